#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "certifier.hpp"
#include "constructions.hpp"

namespace bindisc {

inline constexpr const char* artifact_version = "1.0.0";

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::ordered_json;

// Write to a sibling temporary file, then rename over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw io_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------- packings

namespace detail {

// -0 would come back as the integer 0, so it is written as 0
inline std::string coordinate(double v) { return exact_decimal(v == 0 ? 0.0 : v); }

} // namespace detail

// Hand-written so that numbers are the shortest round-trip decimals and the
// layout is fixed: write, read, write gives identical bytes.
inline std::string packing_to_json(const packing& p)
{
    std::string out = "{\"radius_small\": \"sqrt(2)-1\", \"discs\": [";
    for (std::size_t i = 0; i < p.discs.size(); ++i) {
        const auto& d = p.discs[i];
        out += i == 0 ? "\n  " : ",\n  ";
        out += "{\"x\": " + detail::coordinate(d.x) + ", \"y\": " + detail::coordinate(d.y) + ", \"size\": \"" +
               (d.size == radius_class::large ? "L" : "S") + "\"}";
    }
    out += p.discs.empty() ? "]}\n" : "\n]}\n";
    return out;
}

inline packing packing_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("packing JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("discs") || !j["discs"].is_array()) throw io_error("packing JSON: no discs array");
    if (j.contains("radius_small") && j["radius_small"] != "sqrt(2)-1")
        throw io_error("packing JSON: only radius_small = sqrt(2)-1 is supported");
    packing p;
    for (const auto& d : j["discs"]) {
        if (!d.contains("x") || !d.contains("y") || !d.contains("size")) throw io_error("packing JSON: incomplete disc");
        std::string size = d["size"].get<std::string>();
        if (size != "L" && size != "S") throw io_error("packing JSON: size must be L or S");
        p.discs.push_back({d["x"].get<double>(), d["y"].get<double>(), size == "L" ? radius_class::large : radius_class::small});
    }
    return p;
}

inline std::string tiling_to_json(const square_triangle_tiling& t)
{
    std::string out = "{\"vertices\": [";
    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        out += i == 0 ? "\n  " : ",\n  ";
        out += "[" + detail::coordinate(t.vertices[i][0]) + ", " + detail::coordinate(t.vertices[i][1]) + "]";
    }
    out += t.vertices.empty() ? "], \"tiles\": [" : "\n], \"tiles\": [";
    for (std::size_t i = 0; i < t.tiles.size(); ++i) {
        const auto& tl = t.tiles[i];
        out += i == 0 ? "\n  " : ",\n  ";
        out += std::string("{\"kind\": \"") + (tl.kind == tile_kind::square ? "square" : "triangle") + "\", \"v\": [";
        for (std::size_t k = 0; k < tl.v.size(); ++k) out += (k ? ", " : "") + std::to_string(tl.v[k]);
        out += "]}";
    }
    out += t.tiles.empty() ? "]}\n" : "\n]}\n";
    return out;
}

inline square_triangle_tiling tiling_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("tiling JSON: ") + e.what());
    }
    square_triangle_tiling t;
    for (const auto& v : j.at("vertices")) t.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    for (const auto& tl : j.at("tiles")) {
        std::string kind = tl.at("kind").get<std::string>();
        if (kind != "square" && kind != "triangle") throw io_error("tiling JSON: unknown tile kind " + kind);
        t.tiles.push_back({kind == "square" ? tile_kind::square : tile_kind::triangle, tl.at("v").get<std::vector<int>>()});
    }
    return t;
}

// ------------------------------------------------------------- reports

inline json to_json(const interval& i)
{
    return json{{"lo", exact_decimal(i.lo())}, {"hi", exact_decimal(i.hi())}};
}

inline interval interval_from_json(const json& j)
{
    return interval(parse_exact<double>(j.at("lo").get<std::string>()), parse_exact<double>(j.at("hi").get<std::string>()));
}

inline json to_json(const triangle_box& b)
{
    json sides = json::array();
    for (const auto& s : b.sides) sides.push_back(to_json(s));
    return json{{"kind", kind_name(b.kind)}, {"sides", sides}, {"depth", b.depth}};
}

inline json to_json(const verification_report& r)
{
    json j;
    j["x"] = to_json(r.x);
    j["status"] = status_name(r.status);
    j["stage"] = r.stage;
    j["reason"] = r.reason;
    j["witness"] = r.witness ? to_json(*r.witness) : json(nullptr);
    j["witness_value"] = r.witness_value ? to_json(*r.witness_value) : json(nullptr);
    j["witness_word"] = r.witness_word;
    j["boxes_checked"] = r.boxes_checked;
    j["max_depth"] = r.max_depth;
    json kinds;
    for (int k = 0; k < 4; ++k) kinds[kind_name(static_cast<tight_kind>(k))] = r.boxes_by_kind[k];
    j["boxes_by_kind"] = kinds;
    j["by_tight_rule"] = r.by_tight_rule;
    j["infeasible"] = r.infeasible;
    j["alpha_1"] = to_json(r.alpha_1);
    j["alpha_r"] = to_json(r.alpha_r);
    j["identity"] = to_json(r.identity);
    json res = json::array();
    for (const auto& e : r.residuals) res.push_back(json{{"equation", e.name}, {"value", to_json(e.value)}});
    j["residuals"] = res;
    j["calibrated"] = r.calibrated;
    j["m_1"] = to_json(r.m_1);
    j["m_r"] = to_json(r.m_r);
    j["Z_1"] = to_json(r.Z_1);
    j["Z_r"] = to_json(r.Z_r);
    j["vertex_sequences"] = r.vertex_sequences;
    j["eta"] = exact_decimal(r.eta);
    j["delta_offset"] = exact_decimal(r.delta_offset);
    j["wall_time"] = r.wall_time;
    j["assumption"] = saturation_assumption();
    return j;
}

inline json report_document(const verification_report& r, const json& config)
{
    json j;
    j["version"] = artifact_version;
    j["config"] = config;
    j["report"] = to_json(r);
    return j;
}

// ------------------------------------------------------------- plot data

inline std::string alpha_csv(const sweep_report& s)
{
    std::string out = "x_lo,x_hi,alpha_1_lo,alpha_1_hi,alpha_r_lo,alpha_r_hi\n";
    for (const auto& r : s.intervals)
        out += exact_decimal(r.x.lo()) + "," + exact_decimal(r.x.hi()) + "," + exact_decimal(r.alpha_1.lo()) + "," +
               exact_decimal(r.alpha_1.hi()) + "," + exact_decimal(r.alpha_r.lo()) + "," + exact_decimal(r.alpha_r.hi()) +
               "\n";
    return out;
}

inline std::string boxes_csv(const sweep_report& s)
{
    std::string out = "x_lo,x_hi,alpha_1_lo,alpha_1_hi,alpha_r_lo,alpha_r_hi,boxes,max_depth,status\n";
    for (const auto& r : s.intervals)
        out += exact_decimal(r.x.lo()) + "," + exact_decimal(r.x.hi()) + "," + exact_decimal(r.alpha_1.lo()) + "," +
               exact_decimal(r.alpha_1.hi()) + "," + exact_decimal(r.alpha_r.lo()) + "," + exact_decimal(r.alpha_r.hi()) +
               "," + std::to_string(r.boxes_checked) + "," + std::to_string(r.max_depth) + "," + status_name(r.status) +
               "\n";
    return out;
}

// delta_max on 1001 equally spaced points of [0,1]
template <class T = double>
inline std::string density_curve_csv()
{
    std::string out = "x,delta_lo,delta_hi\n";
    for (int i = 0; i <= 1000; ++i) {
        auto x = ratio<T>(i, 1000);
        auto d = delta_max(x);
        out += exact_decimal(static_cast<double>(i) / 1000) + "," + exact_decimal(d.lo()) + "," + exact_decimal(d.hi()) + "\n";
    }
    return out;
}

// ------------------------------------------------------------- pictures

inline std::string packing_svg(const packing& p)
{
    if (p.discs.empty()) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& d : p.discs) {
        x0 = std::min(x0, d.x - 1);
        y0 = std::min(y0, d.y - 1);
        x1 = std::max(x1, d.x + 1);
        y1 = std::max(y1, d.y + 1);
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << " " << -y1 << " " << x1 - x0 << " " << y1 - y0
        << "\">\n";
    for (const auto& d : p.discs)
        out << "<circle cx=\"" << d.x << "\" cy=\"" << -d.y << "\" r=\"" << radius_of(d.size) << "\" fill=\""
            << (d.size == radius_class::large ? "#3b6ea5" : "#e39b2d") << "\"/>\n";
    out << "</svg>\n";
    return out.str();
}

inline std::string tiling_svg(const square_triangle_tiling& t)
{
    if (t.vertices.empty()) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& v : t.vertices) {
        x0 = std::min(x0, v[0]);
        y0 = std::min(y0, v[1]);
        x1 = std::max(x1, v[0]);
        y1 = std::max(y1, v[1]);
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 - 1 << " " << -y1 - 1 << " " << x1 - x0 + 2
        << " " << y1 - y0 + 2 << "\">\n";
    for (const auto& tl : t.tiles) {
        out << "<polygon points=\"";
        for (std::size_t k = 0; k < tl.v.size(); ++k) {
            const auto& v = t.vertices[static_cast<std::size_t>(tl.v[k])];
            out << (k ? " " : "") << v[0] << "," << -v[1];
        }
        out << "\" fill=\"" << (tl.kind == tile_kind::square ? "#e39b2d" : "#3b6ea5") << "\" stroke=\"black\" stroke-width=\"0.05\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace bindisc
