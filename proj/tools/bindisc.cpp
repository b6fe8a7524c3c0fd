#include <bindisc/certifier.hpp>
#include <bindisc/constructions.hpp>
#include <bindisc/io.hpp>
#include <bindisc/packing.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

using namespace bindisc;
namespace fs = std::filesystem;

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct options {
    std::vector<double> x;
    int subdivisions = 100;
    double eta = 0;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    int depth = 40;
    double epsilon_tight = 1e-3;
    int precision = 53;
    std::string out;
    std::string in;
    std::string format = "json";
    std::string plot_format = "csv";
    int extent = 100;
    int rows = -1;
    double k = 50;
    double window = 30;
    long long n = 4;
    double beta = 0.5;
    std::vector<double> alpha;
    std::string kind = "density_curve";
    double delta_offset = 0;
};

json config_json(const std::string& command, const options& o)
{
    json c;
    c["command"] = command;
    if (!o.x.empty()) {
        json xs = json::array();
        for (double v : o.x) xs.push_back(exact_decimal(v));
        c["x"] = xs;
    }
    c["subdivisions"] = o.subdivisions;
    c["eta"] = exact_decimal(o.eta);
    c["workers"] = o.workers;
    c["depth"] = o.depth;
    c["epsilon_tight"] = exact_decimal(o.epsilon_tight);
    c["precision"] = o.precision;
    c["out"] = o.out;
    c["in"] = o.in;
    c["format"] = o.format;
    c["delta_offset"] = exact_decimal(o.delta_offset);
    return c;
}

void emit(const std::string& out, const std::string& content)
{
    if (out.empty() || out == "-")
        std::cout << content;
    else
        atomic_write(out, content);
}

void require_certifier_precision(const options& o)
{
    if (o.precision != 53) throw usage_error("--precision 64 is only available for density evaluation");
}

interval x_interval(const options& o)
{
    if (o.x.size() != 2) throw usage_error("--x needs LO HI");
    if (!(o.x[0] >= 0 && o.x[0] <= o.x[1] && o.x[1] <= 1)) throw usage_error("--x must satisfy 0 <= LO <= HI <= 1");
    return interval(o.x[0], o.x[1]);
}

double x_point(const options& o)
{
    if (o.x.size() != 1) throw usage_error("--x needs a single value here");
    if (!(o.x[0] >= 0 && o.x[0] <= 1)) throw usage_error("--x must lie in [0,1]");
    return o.x[0];
}

verify_options verify_opts(const options& o)
{
    if (o.eta < 0) throw usage_error("--eta must be nonnegative");
    if (o.depth < 1) throw usage_error("--depth must be positive");
    if (!(o.epsilon_tight >= 0)) throw usage_error("--epsilon-tight must be nonnegative");
    verify_options v;
    v.eta = o.eta;
    v.depth = o.depth;
    v.epsilon_tight = o.epsilon_tight;
    v.delta_offset = o.delta_offset;
    return v;
}

int cmd_verify(const options& o)
{
    require_certifier_precision(o);
    auto x = x_interval(o);
    auto opts = verify_opts(o);
    verification_report r;
    try {
        r = verify_interval(x, opts);
    } catch (const straddles_half& e) {
        throw usage_error(e.what());
    }
    emit(o.out, report_document(r, config_json("verify", o)).dump(2) + "\n");
    std::cerr << exact_decimal(x.lo()) << " " << exact_decimal(x.hi()) << " " << status_name(r.status);
    if (!r.reason.empty()) std::cerr << " (" << r.stage << ": " << r.reason << ")";
    std::cerr << "\n";
    return r.status == verification_status::certified ? 0 : 1;
}

std::string report_name(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "interval_%03zu.json", i);
    return buf;
}

int cmd_sweep(const options& o)
{
    require_certifier_precision(o);
    if (o.out.empty()) throw usage_error("sweep needs --out DIR");
    if (o.workers < 1) throw usage_error("--workers must be positive");
    auto opts = verify_opts(o);
    fs::create_directories(o.out);
    auto s = sweep(o.subdivisions, opts, o.workers);
    auto cfg = config_json("sweep", o);
    json summary;
    summary["version"] = artifact_version;
    summary["config"] = cfg;
    json list = json::array();
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        const auto& r = s.intervals[i];
        atomic_write(fs::path(o.out) / report_name(i), report_document(r, cfg).dump(2) + "\n");
        list.push_back(json{{"file", report_name(i)}, {"x", to_json(r.x)}, {"status", status_name(r.status)}});
    }
    summary["intervals"] = list;
    summary["certified"] = s.count(verification_status::certified);
    summary["failed"] = s.count(verification_status::failed);
    summary["depth_exceeded"] = s.count(verification_status::depth_exceeded);
    summary["wall_time"] = s.wall_time;
    atomic_write(fs::path(o.out) / "summary.json", summary.dump(2) + "\n");
    atomic_write(fs::path(o.out) / "alpha.csv", alpha_csv(s));
    atomic_write(fs::path(o.out) / "boxes.csv", boxes_csv(s));
    atomic_write(fs::path(o.out) / "density_curve.csv", density_curve_csv());
    std::cerr << s.count(verification_status::certified) << "/" << s.intervals.size() << " certified, "
              << s.count(verification_status::failed) << " failed, " << s.count(verification_status::depth_exceeded)
              << " depth exceeded\n";
    return s.all_certified() ? 0 : 1;
}

packing load_packing(const options& o)
{
    if (o.in.empty()) throw usage_error("--in FILE is required");
    return packing_from_json(read_file(o.in));
}

int cmd_construct(const options& o)
{
    double x = x_point(o);
    if (o.extent < 1) throw usage_error("--extent must be positive");
    packing p = densest_packing(x, o.extent);
    validate_packing(p);
    if (o.format == "json")
        emit(o.out, packing_to_json(p));
    else if (o.format == "svg")
        emit(o.out, packing_svg(p));
    else
        throw usage_error("construct writes json or svg");
    std::cerr << p.discs.size() << " discs, large fraction " << large_fraction(p) << "\n";
    return 0;
}

int cmd_tiling(const options& o)
{
    double x = x_point(o);
    if (x < 0.5) throw usage_error("square-triangle tilings describe x >= 1/2");
    if (o.extent < 1) throw usage_error("--extent must be positive");
    auto t = column_tiling(x, o.extent, o.rows);
    validate_tiling(t);
    if (o.format == "json")
        emit(o.out, tiling_to_json(t));
    else if (o.format == "svg")
        emit(o.out, tiling_svg(t));
    else
        throw usage_error("tiling writes json or svg");
    std::cerr << t.count(tile_kind::square) << " squares, " << t.count(tile_kind::triangle) << " triangles\n";
    return 0;
}

template <class T>
json density_json(const packing& p, double k, std::optional<double> target)
{
    auto d = measured_density<T>(p, static_cast<T>(k));
    auto lf = large_fraction(p);
    // compare with delta at the requested proportion, else at the measured one
    auto dm = delta_max(basic_interval<T>(static_cast<T>(target ? *target : lf)));
    json j;
    j["window_half_width"] = exact_decimal(k);
    j["density"] = json{{"lo", exact_decimal(d.lo())}, {"hi", exact_decimal(d.hi())}};
    j["large_fraction"] = exact_decimal(lf);
    j["delta_max"] = json{{"lo", exact_decimal(dm.lo())}, {"hi", exact_decimal(dm.hi())}};
    j["relative_gap"] = exact_decimal(static_cast<double>((dm.mid() - d.mid()) / dm.mid()));
    return j;
}

int cmd_density(const options& o)
{
    packing p = load_packing(o);
    if (!(o.k > 0)) throw usage_error("--k must be positive");
    std::optional<double> target;
    if (!o.x.empty()) target = x_point(o);
    json j = o.precision == 64 ? density_json<long double>(p, o.k, target) : density_json<double>(p, o.k, target);
    j["precision"] = o.precision;
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int cmd_census(const options& o)
{
    packing p = load_packing(o);
    if (!(o.window > 0)) throw usage_error("--window must be positive");
    auto c = neighborhood_census(p, o.window);
    json words = json::array();
    for (const auto& [key, count] : c.words) {
        std::string letter(1, key.first);
        words.push_back(json{{"disc", letter},
                             {"word", key.second},
                             {"count", count},
                             {"bad_le_half", is_bad_neighborhood(neighborhood_word(key.second),
                                                                 key.first == '1' ? radius_class::large : radius_class::small,
                                                                 regime::x_le_half)},
                             {"bad_ge_half", is_bad_neighborhood(neighborhood_word(key.second),
                                                                 key.first == '1' ? radius_class::large : radius_class::small,
                                                                 regime::x_ge_half)}});
    }
    json j;
    j["window"] = exact_decimal(o.window);
    j["interior"] = c.interior;
    j["bad_fraction_le_half"] = exact_decimal(c.bad_fraction(regime::x_le_half));
    j["bad_fraction_ge_half"] = exact_decimal(c.bad_fraction(regime::x_ge_half));
    j["words"] = words;
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int cmd_entropy(const options& o)
{
    if (o.n < 0 || o.n % 2 != 0) throw usage_error("--n must be a nonnegative even integer");
    auto b = block_counts(o.n);
    json j;
    j["n"] = b.n;
    j["S"] = json{{"squares", b.s_square}, {"triangles", b.s_triangle}};
    j["T"] = json{{"squares", b.t_square}, {"triangles", b.t_triangle}};
    j["beta"] = exact_decimal(o.beta);
    j["square_triangle_ratio"] = exact_decimal(square_triangle_ratio(o.beta, o.n));
    if (!o.alpha.empty()) {
        try {
            j["solve_beta"] = exact_decimal(solve_beta(o.alpha[0], o.n));
        } catch (const std::exception& e) {
            j["solve_beta"] = nullptr;
            j["solve_beta_error"] = e.what();
        }
    }
    auto a = dodecagon_area(1), t = dodecagon_tiles_area(1);
    j["dodecagon_identity"] = a == t;
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

// Rebuilds the per-interval table from a sweep directory.
sweep_report load_sweep(const std::string& dir)
{
    auto summary = json::parse(read_file(fs::path(dir) / "summary.json"));
    sweep_report s;
    for (const auto& item : summary.at("intervals")) {
        auto doc = json::parse(read_file(fs::path(dir) / item.at("file").get<std::string>()));
        const auto& r = doc.at("report");
        verification_report v;
        v.x = interval_from_json(r.at("x"));
        v.alpha_1 = interval_from_json(r.at("alpha_1"));
        v.alpha_r = interval_from_json(r.at("alpha_r"));
        v.boxes_checked = r.at("boxes_checked").get<std::uint64_t>();
        v.max_depth = r.at("max_depth").get<int>();
        std::string st = r.at("status").get<std::string>();
        v.status = st == "CERTIFIED" ? verification_status::certified
                   : st == "FAILED"  ? verification_status::failed
                                     : verification_status::depth_exceeded;
        s.intervals.push_back(v);
    }
    return s;
}

int cmd_plot(const options& o)
{
    if (o.kind == "density_curve") {
        if (o.precision == 64)
            emit(o.out, density_curve_csv<long double>());
        else
            emit(o.out, density_curve_csv<double>());
        return 0;
    }
    require_certifier_precision(o);
    if (o.kind != "alpha" && o.kind != "boxes") throw usage_error("--kind must be alpha, boxes or density_curve");
    if (o.in.empty()) throw usage_error("plot --kind " + o.kind + " needs --in SWEEP_DIR");
    auto s = load_sweep(o.in);
    emit(o.out, o.kind == "alpha" ? alpha_csv(s) : boxes_csv(s));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density bounds for binary disc packings with radius ratio sqrt(2)-1"};
    app.require_subcommand(1);
    app.set_version_flag("--version", artifact_version);
    options o;

    auto add_x = [&](CLI::App* c, int n) {
        c->add_option("--x", o.x, n == 2 ? "proportion interval LO HI" : "proportion of large discs")
            ->expected(n)
            ->required();
    };
    auto add_cert = [&](CLI::App* c) {
        c->add_option("--eta", o.eta, "strengthening of the vertex inequality")->capture_default_str();
        c->add_option("--depth", o.depth, "dichotomy depth limit")->capture_default_str();
        c->add_option("--epsilon-tight", o.epsilon_tight, "radius of the first-order tight rule")->capture_default_str();
        c->add_option("--delta-offset", o.delta_offset, "added to delta(x); a positive value must not certify")
            ->capture_default_str();
    };
    auto add_precision = [&](CLI::App* c) {
        c->add_option("--precision", o.precision, "endpoint bits")->check(CLI::IsMember({53, 64}))->capture_default_str();
    };

    auto* verify = app.add_subcommand("verify", "certify one x interval");
    add_x(verify, 2);
    add_cert(verify);
    add_precision(verify);
    verify->add_option("--out", o.out, "report JSON (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "certify [0,1] interval by interval");
    add_cert(sweep_cmd);
    add_precision(sweep_cmd);
    sweep_cmd->add_option("--subdivisions", o.subdivisions)->check(CLI::Range(2, 100000))->capture_default_str();
    sweep_cmd->add_option("--workers", o.workers)->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--out", o.out, "output directory")->required();

    auto* construct = app.add_subcommand("construct", "build a densest-known packing");
    add_x(construct, 1);
    construct->add_option("--extent", o.extent)->capture_default_str();
    construct->add_option("--format", o.format)->check(CLI::IsMember({"json", "svg"}))->capture_default_str();
    construct->add_option("--out", o.out);

    auto* tiling = app.add_subcommand("tiling", "square-triangle column tiling for x >= 1/2");
    add_x(tiling, 1);
    tiling->add_option("--extent", o.extent)->capture_default_str();
    tiling->add_option("--rows", o.rows, "rows (default: as many as columns)");
    tiling->add_option("--format", o.format)->check(CLI::IsMember({"json", "svg"}))->capture_default_str();
    tiling->add_option("--out", o.out);

    auto* density = app.add_subcommand("density", "measured density of a packing file");
    density->add_option("--in", o.in)->required();
    density->add_option("--k", o.k, "window half-width")->capture_default_str();
    density->add_option("--x", o.x, "compare with delta at this proportion")->expected(1);
    add_precision(density);
    density->add_option("--out", o.out);

    auto* census = app.add_subcommand("census", "neighbourhood words of a packing file");
    census->add_option("--in", o.in)->required();
    census->add_option("--window", o.window, "window half-width")->capture_default_str();
    census->add_option("--out", o.out);

    auto* entropy = app.add_subcommand("entropy", "block counts of the S/T substitution");
    entropy->add_option("--n", o.n)->capture_default_str();
    entropy->add_option("--beta", o.beta)->capture_default_str();
    entropy->add_option("--alpha", o.alpha, "square/triangle ratio to invert")->expected(1);
    entropy->add_option("--out", o.out);

    auto* plot = app.add_subcommand("plot", "plot data as CSV");
    plot->add_option("--kind", o.kind)->check(CLI::IsMember({"alpha", "boxes", "density_curve"}))->capture_default_str();
    plot->add_option("--in", o.in, "sweep directory (alpha, boxes)");
    plot->add_option("--format", o.plot_format)->check(CLI::IsMember({"csv"}))->capture_default_str();
    add_precision(plot);
    plot->add_option("--out", o.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) return cmd_verify(o);
        if (*sweep_cmd) return cmd_sweep(o);
        if (*construct) return cmd_construct(o);
        if (*tiling) return cmd_tiling(o);
        if (*density) return cmd_density(o);
        if (*census) return cmd_census(o);
        if (*entropy) return cmd_entropy(o);
        if (*plot) return cmd_plot(o);
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
