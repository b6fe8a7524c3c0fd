#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bindisc/certifier.hpp"
#include "bindisc/constructions.hpp"

using namespace bindisc;
using rc = radius_class;

namespace {

// mpmath forward substitution through the eight equations at x = 1/2
constexpr double alpha1_half = 0.0459045508443292;

bool near(const interval& i, double v, double tol)
{
    return i.lo() - tol <= v && v <= i.hi() + tol;
}

const potential_scheme& calibrated_low()
{
    static const potential_scheme s = calibrate_m_Z(solve_base_potentials(interval(0.1, 0.11)));
    return s;
}

const potential_scheme& calibrated_half()
{
    static const potential_scheme s = calibrate_m_Z(solve_base_potentials(interval(0.5)));
    return s;
}

} // namespace

TEST(BasePotentials, AlphaAtHalf)
{
    auto s = solve_base_potentials(interval(0.5));
    EXPECT_TRUE(s.high);
    EXPECT_TRUE(near(s.alpha_1, alpha1_half, 1e-8));
    EXPECT_TRUE(near(s.alpha_r, -alpha1_half, 1e-8));
    EXPECT_LT(s.alpha_1.width(), 1e-12);
}

TEST(BasePotentials, PinnedV1rr)
{
    auto quarter = solve_base_potentials(interval(0.25));
    EXPECT_TRUE(near(quarter.potential(vertex_label::v1rr), 0.0009375, 1e-15));
    auto three_q = solve_base_potentials(interval(0.75));
    EXPECT_TRUE(near(three_q.potential(vertex_label::v1rr), -0.009, 1e-15));
}

TEST(BasePotentials, StraddlingHalfIsRejected)
{
    EXPECT_THROW(solve_base_potentials(interval(0.45, 0.55)), straddles_half);
    EXPECT_NO_THROW(solve_base_potentials(interval(0.45, 0.5)));
    EXPECT_NO_THROW(solve_base_potentials(interval(0.5, 0.55)));
}

TEST(BasePotentials, IdentityEnclosesZero)
{
    auto half = check_stoichiometry_identity(solve_base_potentials(interval(0.5)));
    EXPECT_TRUE(half.contains_zero());
    EXPECT_LE(half.width(), 1e-10);
    EXPECT_TRUE(check_stoichiometry_identity(solve_base_potentials(interval(0.3))).contains_zero());
    auto wide = check_stoichiometry_identity(solve_base_potentials(interval(0.6, 0.61)));
    EXPECT_TRUE(wide.contains_zero());
    EXPECT_LE(wide.width(), 1e-8);
}

TEST(BasePotentials, EveryIntervalOfTheSweepSolvesTheSystem)
{
    for (const auto& x : sweep_intervals(100)) {
        auto s = solve_base_potentials(x);
        auto res = equation_residuals(s);
        ASSERT_EQ(res.size(), 8u);
        for (const auto& r : res) {
            EXPECT_TRUE(r.value.contains_zero()) << r.name << " at " << x;
            EXPECT_LE(r.value.width(), 1e-8) << r.name << " at " << x;
        }
        auto id = check_stoichiometry_identity(s);
        EXPECT_TRUE(id.contains_zero()) << x;
        EXPECT_LE(id.width(), 1e-8) << x;
    }
}

TEST(BasePotentials, AlphaSignPattern)
{
    EXPECT_TRUE(solve_base_potentials(interval(0.3, 0.31)).alpha_1.negative());
    EXPECT_TRUE(solve_base_potentials(interval(0.7, 0.71)).alpha_1.positive());
}

TEST(BasePotentials, OffsetBreaksTheIdentity)
{
    auto s = solve_base_potentials(interval(0.49, 0.5), 1e-3);
    EXPECT_FALSE(check_stoichiometry_identity(s).contains_zero());
}

TEST(VertexInequality, TightSequencesPassWithEquality)
{
    auto s = solve_base_potentials(interval(0.5));
    auto find = [&](rc q, std::array<int, 3> count) -> const detail::vertex_case* {
        static std::vector<detail::vertex_case> cases;
        cases = detail::vertex_cases(s, q);
        for (const auto& c : cases)
            if (c.cls->count == count) return &c;
        return nullptr;
    };
    // "1r1r1r1r" around a large disc: eight 11r triangles
    auto c = find(rc::large, {0, 8, 0});
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->base.contains_zero());
    EXPECT_LT(c->base.width(), 1e-12);
    EXPECT_TRUE(c->deficit.contains_zero());
    // "1111" around a small disc: four 1r1 triangles
    c = find(rc::small, {4, 0, 0});
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->base.contains_zero());
    EXPECT_TRUE(c->deficit.contains_zero());

    auto low = solve_base_potentials(interval(0.3));
    for (const auto& k : detail::vertex_cases(low, rc::small))
        if (k.cls->count == std::array<int, 3>{0, 0, 6}) {
            // "rrrrrr" at x < 1/2: 6 Vrrr = alpha_r
            EXPECT_TRUE(k.base.contains_zero());
            EXPECT_FALSE(k.cls->bad);
        }
}

TEST(VertexInequality, SequenceClassesAreRealisable)
{
    for (rc q : {rc::large, rc::small})
        for (regime g : {regime::x_le_half, regime::x_ge_half})
            for (const auto& c : detail::sequence_classes(q, g)) {
                EXPECT_EQ(c.count[1] % 2, 0);
                neighborhood_word w(c.word);
                std::string str = w.str();
                std::array<int, 3> cnt{};
                for (std::size_t i = 0; i < str.size(); ++i)
                    ++cnt[(str[i] == 'r') + (str[(i + 1) % str.size()] == 'r')];
                EXPECT_EQ(cnt, c.count) << c.word;
                if (str.size() > 8) EXPECT_TRUE(c.bad);
                // short classes show a bad word whenever they contain one
                EXPECT_EQ(c.bad, is_bad_neighborhood(w, q, g)) << c.word;
            }
}

TEST(VertexInequality, AngleRangesContainTightAngles)
{
    const auto& ranges = detail::label_angle_ranges();
    for (const auto& r : ranges) {
        EXPECT_GT(r.lo_hi.lo(), 0.2);
        EXPECT_LT(r.lo_hi.hi(), 3.0);
        EXPECT_TRUE(r.lo_hi.lo() <= r.tight.lo() && r.tight.hi() <= r.lo_hi.hi());
    }
    // four large neighbours of a large disc can approach the square
    EXPECT_GE(ranges[static_cast<int>(vertex_label::v111)].lo_hi.hi(), 1.5707);
}

TEST(VertexInequality, CalibrationPassesAndZIsMonotone)
{
    const auto& s = calibrated_low();
    for (rc q : {rc::large, rc::small}) {
        EXPECT_TRUE(verify_vertex_inequality(s, q, false).pass);
        auto raised = with_m_Z(s, s.m_1.hi(), s.m_r.hi(), s.Z_1.hi() + 0.05, s.Z_r.hi() + 0.05);
        EXPECT_TRUE(verify_vertex_inequality(raised, q, false).pass);
    }
}

TEST(VertexInequality, ZeroAngleCoefficientFails)
{
    const auto& s = calibrated_low();
    auto flat = with_m_Z(s, 0, 0, s.Z_1.hi(), s.Z_r.hi());
    bool any_fail = !verify_vertex_inequality(flat, rc::large, false).pass ||
                    !verify_vertex_inequality(flat, rc::small, false).pass;
    EXPECT_TRUE(any_fail);
}

TEST(VertexInequality, UncalibratedSchemeIsRejected)
{
    auto s = solve_base_potentials(interval(0.3));
    EXPECT_THROW(verify_vertex_inequality(s, rc::large, false), uncalibrated_scheme);
    triangle_spec<double> t = tight_spec<double>(tight_kind::t111);
    EXPECT_THROW(vertex_potential(s, t, 0), uncalibrated_scheme);
}

TEST(VertexPotential, TightTrianglesGetBaseValues)
{
    const auto& s = calibrated_half();
    auto t111 = tight_spec<double>(tight_kind::t111);
    for (int v = 0; v < 3; ++v) {
        auto u = vertex_potential(s, t111, v);
        auto base = s.potential(vertex_label::v111);
        EXPECT_TRUE(overlaps(u, base));
        EXPECT_LT(u.width(), 1e-12);
    }
    auto t11r = tight_spec<double>(tight_kind::t11r);
    EXPECT_TRUE(overlaps(vertex_potential(s, t11r, 2), s.potential(vertex_label::v1r1)));
    EXPECT_TRUE(overlaps(vertex_potential(s, t11r, 0), s.potential(vertex_label::v11r)));
}

TEST(VertexPotential, DeviationIsChargedAndCapped)
{
    const auto& s = calibrated_half();
    // 111 triangle with one side stretched to 2.2
    triangle_spec<double> t{{rc::large, rc::large, rc::large}, {interval(2.2), interval(2.0), interval(2.0)}};
    double dev = std::acos(1 - 2.2 * 2.2 / 8) - M_PI / 3;
    double expect = std::min(s.Z_1.mid(), s.potential(vertex_label::v111).mid() + s.m_1.mid() * dev);
    EXPECT_TRUE(near(vertex_potential(s, t, 0), expect, 1e-12));
    auto big = with_m_Z(s, 10, 10, s.Z_1.hi(), s.Z_r.hi());
    EXPECT_TRUE(overlaps(vertex_potential(big, t, 0), s.Z_1));
}

TEST(EdgePotential, TableValues)
{
    auto low = solve_base_potentials(interval(0.3));
    auto high = solve_base_potentials(interval(0.7));
    EXPECT_TRUE(near(low.edges[0].l, 2.5, 1e-15));
    EXPECT_TRUE(near(low.edges[0].q, 0.38, 1e-15));
    EXPECT_TRUE(near(low.edges[1].l, 1.83, 1e-15));
    EXPECT_TRUE(near(low.edges[1].q, 0.15, 1e-15));
    EXPECT_TRUE(near(low.edges[2].l, 1.18, 1e-15));
    EXPECT_TRUE(near(low.edges[2].q, 0.15, 1e-15));
    EXPECT_TRUE(near(high.edges[0].q, 0.02, 1e-15));
    EXPECT_TRUE(near(high.edges[1].q, 0.05, 1e-15));
    EXPECT_TRUE(near(high.edges[2].l, 1.18, 1e-15));
    EXPECT_TRUE(near(high.edges[2].q, 0.08, 1e-15));
}

TEST(EdgePotential, AntisymmetricAndZeroBelowThreshold)
{
    auto s = solve_base_potentials(interval(0.3));
    for (auto p : {pair_class::p11, pair_class::p1r, pair_class::prr}) {
        auto below = interval(0.5, s.edges[static_cast<int>(p)].l.lo());
        EXPECT_EQ(edge_potential(s, p, below, edge_role::donor).mag(), 0.0);
        EXPECT_EQ(edge_potential(s, p, below, edge_role::receiver).mag(), 0.0);
        interval len(3.0);
        auto sum = edge_potential(s, p, len, edge_role::donor) + edge_potential(s, p, len, edge_role::receiver);
        EXPECT_TRUE(sum.contains_zero());
        auto expect = s.edges[static_cast<int>(p)].q * (len - s.edges[static_cast<int>(p)].l);
        EXPECT_TRUE(overlaps(edge_potential(s, p, len, edge_role::donor), expect));
    }
    EXPECT_THROW(edge_potential(s, static_cast<pair_class>(7), interval(3.0), edge_role::donor), unknown_pair_class);
}

TEST(EdgePotential, NoEdgeHasTwoReceivers)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        packing p;
        double side = 14;
        while (p.discs.size() < 30) {
            disc d{u(rng) * side, u(rng) * side, u(rng) < 0.5 ? rc::large : rc::small};
            bool ok = true;
            for (const auto& e : p.discs)
                ok = ok && std::hypot(d.x - e.x, d.y - e.y) >= radius_of(d.size) + radius_of(e.size);
            if (ok) p.discs.push_back(d);
        }
        auto t = fm_triangulate(p);
        auto roles = [&](int tri) {
            const auto& v = t.triangles[static_cast<std::size_t>(tri)];
            triangle_spec<double> spec;
            for (int k = 0; k < 3; ++k) {
                spec.radii[k] = p.discs[static_cast<std::size_t>(v[k])].size;
                const auto& a = p.discs[static_cast<std::size_t>(v[(k + 1) % 3])];
                const auto& b = p.discs[static_cast<std::size_t>(v[(k + 2) % 3])];
                spec.sides[k] = sqrt(sqr(interval(a.x) - interval(b.x)) + sqr(interval(a.y) - interval(b.y)));
            }
            return std::pair{v, edge_roles(spec, false)};
        };
        auto sites = augmented_sites(p);
        std::vector<int> everyone(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i) everyone[i] = static_cast<int>(i);
        auto resolved = [&](int tri) {
            const auto& v = t.triangles[static_cast<std::size_t>(tri)];
            return detail::triangle_status<double>(sites, v[0], v[1], v[2], everyone) == conflict::no;
        };
        for (const auto& [edge, tris] : t.adjacency) {
            // the property is about empty tangent circles; unresolved
            // triangles near the hull have none
            if (tris.first < 0 || tris.second < 0 || !resolved(tris.first) || !resolved(tris.second)) continue;
            int receivers = 0;
            for (int tri : {tris.first, tris.second}) {
                auto [v, r] = roles(tri);
                for (int k = 0; k < 3; ++k) {
                    int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
                    if (std::minmax(a, b) == std::pair<const int&, const int&>(edge.first, edge.second) &&
                        r[k] == edge_role::receiver)
                        ++receivers;
                }
            }
            EXPECT_LE(receivers, 1);
            ++checked;
        }
    }
    EXPECT_GT(checked, 800u);
}

TEST(LocalInequality, CertifiesLowStoichiometry)
{
    local_options opt;
    opt.keep_leaves = 2000;
    auto rep = verify_local_inequality(calibrated_low(), opt);
    EXPECT_EQ(rep.status, verification_status::certified);
    EXPECT_GT(rep.by_tight_rule, 0u);
    auto check = resample_certified(calibrated_low(), rep.leaves, 10000, 7);
    EXPECT_GT(check.evaluated, 1000u);
    EXPECT_EQ(check.negative, 0u);
}

TEST(LocalInequality, FarRrrBoxIsImmediate)
{
    const auto& s = calibrated_low();
    auto c = detail::make_context<double>(s, tight_kind::trrr);
    auto root = root_sides(tight_kind::trrr);
    std::array<interval, 3> far;
    for (int i = 0; i < 3; ++i) far[i] = interval(root[i].hi() - 0.01, root[i].hi());
    auto v = detail::evaluate_local(c, far, false);
    EXPECT_TRUE(v.infeasible || v.f.lo() >= 0);
}

TEST(LocalInequality, TightCornerIsExact)
{
    const auto& s = calibrated_low();
    for (int k = 0; k < 4; ++k) {
        auto kind = static_cast<tight_kind>(k);
        auto m = point_margin(s, kind, {tight_spec<double>(kind).sides[0].hi(), tight_spec<double>(kind).sides[1].hi(),
                                        tight_spec<double>(kind).sides[2].hi()});
        if (m) EXPECT_LT(m->mag(), 1e-9) << kind_name(kind);
    }
}

TEST(LocalInequality, InflatedDensityFailsNearTight)
{
    // potentials solved with delta + 1e-3 and the calibration of the honest scheme
    const auto& honest = calibrated_low();
    auto probe = solve_base_potentials(honest.x, 1e-3);
    probe = with_m_Z(probe, honest.m_1.hi(), honest.m_r.hi(), honest.Z_1.hi(), honest.Z_r.hi());
    auto rep = verify_local_inequality(probe);
    ASSERT_EQ(rep.status, verification_status::failed);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_TRUE(rep.witness_value->negative());
    auto tight = tight_spec<double>(rep.witness->kind);
    for (int i = 0; i < 3; ++i) EXPECT_LT(rep.witness->sides[i].hi() - tight.sides[i].lo(), 0.01);
}

TEST(Pipeline, ProbeIsNeverCertified)
{
    verify_options opt;
    opt.delta_offset = 1e-3;
    for (auto x : {interval(0.49, 0.5), interval(0.3, 0.31), interval(0.1, 0.11)}) {
        auto rep = verify_interval(x, opt);
        EXPECT_EQ(rep.status, verification_status::failed) << x;
    }
}

TEST(Pipeline, FailuresCarryWitnesses)
{
    for (auto [x, eta] : {std::pair{interval(0.49, 0.5), 0.0}, std::pair{interval(0.5, 0.51), 1e-4}}) {
        verify_options opt;
        opt.eta = eta;
        auto rep = verify_interval(x, opt);
        if (rep.status == verification_status::certified) continue;
        ASSERT_TRUE(rep.witness.has_value() || !rep.witness_word.empty()) << x;
        if (rep.status == verification_status::failed && rep.witness) {
            auto p = rep.witness->sides;
            auto honest = calibrate_m_Z(solve_base_potentials(x));
            auto m = point_margin(honest, rep.witness->kind, {p[0].mid(), p[1].mid(), p[2].mid()});
            ASSERT_TRUE(m.has_value());
            EXPECT_TRUE(m->negative());
        }
    }
}

TEST(Pipeline, LowIntervalCertifies)
{
    verify_options opt;
    opt.eta = 1e-4;
    auto rep = verify_interval(interval(0.1, 0.11), opt);
    EXPECT_EQ(rep.status, verification_status::certified) << rep.reason;
    EXPECT_TRUE(rep.calibrated);
    EXPECT_GT(rep.boxes_checked, 1000u);
    EXPECT_GT(rep.vertex_sequences, 0u);
}

TEST(Pipeline, SweepIntervalsSplitAtHalf)
{
    auto xs = sweep_intervals(100);
    EXPECT_EQ(xs.size(), 100u);
    EXPECT_EQ(xs.front().lo(), 0.0);
    EXPECT_EQ(xs.back().hi(), 1.0);
    auto odd = sweep_intervals(3);
    EXPECT_EQ(odd.size(), 4u);
    for (const auto& x : odd) EXPECT_FALSE(x.lo() < 0.5 && x.hi() > 0.5);
    EXPECT_THROW(sweep_intervals(1), std::invalid_argument);
}

TEST(Pipeline, DeterministicAcrossWorkers)
{
    verify_options opt;
    opt.depth = 12;
    auto a = sweep(6, opt, 1);
    auto b = sweep(6, opt, 3);
    ASSERT_EQ(a.intervals.size(), b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        const auto& x = a.intervals[i];
        const auto& y = b.intervals[i];
        EXPECT_EQ(x.status, y.status);
        EXPECT_EQ(x.stage, y.stage);
        EXPECT_EQ(x.boxes_checked, y.boxes_checked);
        EXPECT_EQ(x.max_depth, y.max_depth);
        EXPECT_EQ(x.m_1.lo(), y.m_1.lo());
        EXPECT_EQ(x.Z_r.hi(), y.Z_r.hi());
    }
}

TEST(DefectBound, Arithmetic)
{
    interval x(0.3);
    auto d = delta_max(x);
    EXPECT_TRUE(defect_bound(d, x, 1e-4).contains_zero());
    auto gap = defect_bound(d - interval(1e-6), x, 1e-4);
    EXPECT_TRUE(near(gap, 0.01, 1e-9));
    EXPECT_THROW(defect_bound(d, x, 0), nonpositive_eta);
    EXPECT_THROW(defect_bound(d, x, -1), nonpositive_eta);
}
