#include "doctest.h"
#include "hjlab/estimates.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace hjlab;

namespace {

const double pi = std::acos(-1.0);

GridFn sawtooth(int n) { return sample([](double x) { return x < 0.5 ? x : 1 - x; }, PeriodicGrid1D(n, 1.0)); }
GridFn cosine(int n) { return sample([](double x) { return std::cos(2 * pi * x); }, PeriodicGrid1D(n, 1.0)); }

Hamiltonian half_square(const GridFn& u) {
    return Hamiltonian::quadratic(1.0, std::max(1.0, 1.25 * lipschitz_constant(u)));
}

Path ramp(double s) { return piecewise_linear({{0, 0}, {1, s}}); }

GridFn scaled(const GridFn& u, double f) {
    std::vector<double> v(u.values());
    for (double& x : v) x *= f;
    return GridFn(u.grid(), std::move(v));
}

Trajectory perturbed(Trajectory tr, double f) {
    for (auto& s : tr.snapshots) s = scaled(s, f);
    return tr;
}

bool all_pass(const std::vector<EstimateReport>& rs) {
    for (const auto& r : rs)
        if (!r.skipped && !r.pass) return false;
    return true;
}

int count_emitted(const std::vector<EstimateReport>& rs) {
    int k = 0;
    for (const auto& r : rs) k += !r.skipped;
    return k;
}

}  // namespace

TEST_CASE("probe is exact on a parabola away from the wrap") {
    const int n = 256;
    auto u = sample([](double x) { return (x - 0.5) * (x - 0.5) / 2; }, PeriodicGrid1D(n, 1.0));
    auto H = Hamiltonian::quadratic(1.0, 2.0);
    auto pr = curvature_w(u, H);
    for (int i = 0; i < n; ++i) {
        if (i <= pr.stride || i >= n - pr.stride) continue;
        CHECK(pr.w_values[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("probe matches -4 pi^2 cos for the cosine") {
    auto u = cosine(512);
    auto pr = curvature_w(u, half_square(u));
    for (int i = 0; i < 512; ++i)
        CHECK(std::abs(pr.w_values[i] + 4 * pi * pi * std::cos(2 * pi * u.grid().x(i))) <= 0.05 * 4 * pi * pi);
    CHECK(pr.w_min <= pr.w_max);
    CHECK(pr.h_slack > 0);
}

TEST_CASE("slack halves under refinement") {
    for (int n : {128, 256, 512}) {
        auto a = curvature_w(cosine(n), Hamiltonian::quadratic(1.0, 8.0));
        auto b = curvature_w(cosine(2 * n), Hamiltonian::quadratic(1.0, 8.0));
        CHECK(b.h_slack <= a.h_slack / 2 * (1 + 1e-12));
        CHECK(report_slack(b, 30.0) <= report_slack(a, 30.0) / 2 * (1 + 1e-12));
        CHECK(b.stride >= a.stride);
    }
    CHECK(default_stride(512) == 12);
    CHECK_THROWS_AS(curvature_w(cosine(16), Hamiltonian::abs(1.0)), std::invalid_argument);
}

TEST_CASE("bound formulas") {
    const auto inf = CurvatureConstant::infinite();
    for (double t : {0.25, 0.5, 1.0}) CHECK(regularizing_bound(inf, t) == 1.0 / t);
    CHECK(regularizing_bound(CurvatureConstant::finite(2.0), 0.5) == doctest::Approx(1.0));
    CHECK(propagation_bound(4.0, 0.125) == doctest::Approx(-8.0));
    CHECK(lipschitz_decay_bound(0.5, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(CurvatureConstant::finite(-1), std::invalid_argument);
    CHECK_THROWS_AS(inf.value(), std::logic_error);

    // sharp bound <= classical exactly when theta <= 1
    for (double C : {0.5, 3.0, 40.0})
        for (double t : {0.01, 0.3, 2.0}) {
            const auto c = CurvatureConstant::finite(C);
            CHECK(regularizing_bound(c, t) == classical_regularizing_bound(c, 1.0, t));
            CHECK(regularizing_bound(c, t) < classical_regularizing_bound(c, 0.5, t));
            CHECK(regularizing_bound(c, t) > classical_regularizing_bound(c, 2.0, t));
        }
    CHECK(classical_regularizing_bound(inf, 2.0, 0.5) == 1.0);
}

TEST_CASE("regularizing effect from the sawtooth") {
    auto u = sawtooth(512);
    auto H = half_square(u);
    auto tr = solve_pathwise(u, H, ramp(1), {0.0, 0.25, 0.5, 1.0});
    auto rs = check_regularizing(tr, H, CurvatureConstant::infinite(), FlowDirection::plus);
    REQUIRE(rs.size() == 4);
    CHECK(rs[0].skipped);
    CHECK(rs[0].reason == "no_range");
    for (std::size_t k = 1; k < 4; ++k) {
        CHECK(rs[k].quantity == Quantity::curvature_upper);
        CHECK(rs[k].bound == 1.0 / tr.snapshot_times[k]);
        CHECK(rs[k].pass);
        // the sawtooth saturates the bound
        CHECK(rs[k].measured >= 0.99 * rs[k].bound);
    }
    CHECK_FALSE(all_pass(check_regularizing(perturbed(tr, 1.05), H, CurvatureConstant::infinite(), FlowDirection::plus)));
    CHECK_THROWS_AS(check_regularizing(tr, H, CurvatureConstant::infinite(), FlowDirection::minus), std::invalid_argument);
}

TEST_CASE("regularizing effect from finite curvature") {
    auto u = cosine(512);
    auto H = half_square(u);
    const double C0 = propagation_constant(negate(u), H, FlowDirection::plus);
    CHECK(C0 == doctest::Approx(4 * pi * pi).epsilon(0.01));
    auto tr = solve_pathwise(u, H, ramp(1), {1e-2, 0.02});
    auto rs = check_regularizing(tr, H, CurvatureConstant::finite(C0), FlowDirection::plus);
    CHECK(all_pass(rs));
    CHECK(count_emitted(rs) == 2);
    // minus flow bounds W from above
    auto trm = solve_pathwise(u, H, ramp(-1), {1e-2, 0.02});
    CHECK(all_pass(check_regularizing(trm, H, CurvatureConstant::finite(C0), FlowDirection::minus)));
}

TEST_CASE("propagation of the cosine curvature") {
    auto u = cosine(512);
    auto H = half_square(u);
    const double C0 = propagation_constant(u, H, FlowDirection::plus);
    // quotient over d = stride*h damps cos by 2(1 - cos 2 pi d)/d^2
    const double d = default_stride(512) / 512.0;
    CHECK(C0 == doctest::Approx(2 * (1 - std::cos(2 * pi * d)) / (d * d)).epsilon(1e-4));
    auto tr = solve_pathwise(u, H, ramp(1), {0.25 / C0, 0.5 / C0, 1.5 / C0});
    auto rs = check_propagation(tr, H, C0, FlowDirection::plus);
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].pass);
    CHECK(rs[1].pass);
    CHECK(rs[1].bound == doctest::Approx(-2 * C0));
    CHECK(rs[1].measured == doctest::Approx(-2 * C0).epsilon(0.02));
    CHECK(rs[2].skipped);
    CHECK(rs[2].reason == "vacuous");
    CHECK_FALSE(all_pass(check_propagation(perturbed(tr, 1.05), H, C0, FlowDirection::plus)));

    auto trm = solve_pathwise(u, H, ramp(-1), {0.25 / C0, 0.5 / C0});
    const double Cm = propagation_constant(u, H, FlowDirection::minus);
    CHECK(all_pass(check_propagation(trm, H, Cm, FlowDirection::minus)));
    CHECK(count_emitted(check_propagation(trm, H, Cm, FlowDirection::minus)) == 2);
}

TEST_CASE("concave window stays concave under the plus flow") {
    const int n = 512;
    auto u = sample([](double x) { return -(x - 0.5) * (x - 0.5) / 2; }, PeriodicGrid1D(n, 1.0));
    auto H = half_square(u);
    auto v = s_plus(u, H, 0.1);
    auto pr = curvature_w(v, H);
    // the convex kink at the wrap spreads at most t Vmax + stride h
    for (int i = 0; i < n; ++i)
        if (std::abs(v.grid().x(i) - 0.5) < 0.3) CHECK(-pr.w_values[i] >= -report_slack(pr, 0.0));
}

TEST_CASE("nonpositive constant keeps the zero bound") {
    auto u = cosine(256);
    auto H = half_square(u);
    auto tr = solve_pathwise(u, H, ramp(1), {0.05});
    auto rs = check_propagation(tr, H, -3.0, FlowDirection::plus);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].bound == 0.0);
    CHECK_FALSE(rs[0].pass);
}

TEST_CASE("intermittent: monotone path is one-sided") {
    auto u = cosine(512);
    auto H = half_square(u);
    auto p = ramp(1);
    auto tr = solve_pathwise(u, H, p, {1.0});
    auto rs = check_intermittent(tr, H, p);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].quantity == Quantity::curvature_upper);
    CHECK(rs[0].bound == 1.0);
    CHECK(rs[0].pass);
    CHECK(rs[1].skipped);
    CHECK(rs[1].reason == "at_extremum");
    // same as the C = infinity regularizing bound
    auto rr = check_regularizing(tr, H, CurvatureConstant::infinite(), FlowDirection::plus);
    CHECK(rr[0].bound == rs[0].bound);
    CHECK(rr[0].measured == rs[0].measured);
}

TEST_CASE("intermittent: zigzag up 1 down 0.4") {
    auto u = sawtooth(512);
    auto H = half_square(u);
    auto p = piecewise_linear({{0, 0}, {1, 1}, {1.4, 0.6}});
    auto tr = solve_pathwise(u, H, p, {1.4});
    auto rs = check_intermittent(tr, H, p);
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].bound == doctest::Approx(1 / 0.6));
    CHECK(rs[1].bound == doctest::Approx(-1 / 0.4));
    CHECK(rs[2].quantity == Quantity::curvature_abs);
    CHECK(rs[2].bound == doctest::Approx(1 / 0.4));
    CHECK(all_pass(rs));
    CHECK(rs[0].zeta == doctest::Approx(0.6));
    CHECK(rs[0].M == doctest::Approx(1.0));
    CHECK(rs[0].m == 0.0);
    CHECK_FALSE(all_pass(check_intermittent(perturbed(tr, 1.05), H, p)));
}

TEST_CASE("intermittent: Brownian seed 42") {
    auto u = sawtooth(512);
    auto H = half_square(u);
    auto p = sample_brownian(42, 1.0, 1e-3);
    auto tr = solve_skeleton_trajectory(u, H, p, {0.25, 0.5, 1.0});
    auto rs = check_intermittent(tr, H, p);
    CHECK(count_emitted(rs) >= 6);
    CHECK(all_pass(rs));
    CHECK(all_pass(check_lipschitz_decay(tr, H, p)));
}

TEST_CASE("Lipschitz decay") {
    auto u = cosine(512);
    auto H = half_square(u);
    auto p = ramp(1);
    auto tr = solve_pathwise(u, H, p, {1.0});
    auto rs = check_lipschitz_decay(tr, H, p);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].bound == doctest::Approx(std::sqrt(2 * tr.snapshots[0].sup_norm())));
    CHECK(rs[0].pass);
    CHECK(rs[0].slack == doctest::Approx(4 * u.grid().h() * rs[0].bound));

    auto tiny = scaled(u, 1e-6);
    auto Ht = Hamiltonian::quadratic(1.0, 1.0);
    auto tt = solve_pathwise(tiny, Ht, p, {1.0});
    auto rt = check_lipschitz_decay(tt, Ht, p);
    CHECK(rt[0].bound < 2e-3);
    CHECK(rt[0].measured <= rt[0].bound);
    CHECK(rt[0].pass);

    auto flat = piecewise_linear({{0, 0}, {1, 0}});
    auto tf = solve_pathwise(u, H, flat, {0.5, 1.0});
    for (const auto& r : check_lipschitz_decay(tf, H, flat)) {
        CHECK(r.skipped);
        CHECK(r.reason == "no_range");
    }
}

TEST_CASE("degenerate Hamiltonian skips curvature reports") {
    auto u = sawtooth(256);
    auto H = Hamiltonian::abs(1.0);
    auto p = piecewise_linear({{0, 0}, {1, 0.5}, {2, 0.2}});
    auto tr = solve_pathwise(u, H, p, {1.0, 2.0});
    for (const auto& r : check_intermittent(tr, H, p)) CHECK(r.reason == "degenerate_convexity");
    auto lip = check_lipschitz_decay(tr, H, p);
    REQUIRE(lip.size() == 2);
    CHECK(lip[0].reason == "first_snapshot");
    CHECK(!lip[1].skipped);
    CHECK(lip[1].pass);
    CHECK(lip[1].bound == lipschitz_constant(tr.snapshots[0]));
    CHECK(lip[1].measured <= lip[1].bound);
}

TEST_CASE("2-D propagation through the eigenvalue probe") {
    const int n = 96;
    QuadraticHamiltonian2D Q(0.5, 0.0, 1.0);
    auto u = sample2d([](double x, double y) { return std::cos(2 * pi * x) * std::cos(2 * pi * y); }, n, n, 1, 1);
    const double P = 1.25 * 2 * pi * std::sqrt(2.0);
    auto pr = curvature_w_2d(u, Q, P);
    // F = diag(1, sqrt 2), largest W at the minimum of u
    CHECK(pr.w_max == doctest::Approx(8 * pi * pi).epsilon(0.01));
    const double C0 = pr.w_max;
    std::vector<double> ts{0.25 / C0, 0.5 / C0, 2 / C0};
    std::vector<GridFn2D> snaps;
    for (double t : ts) snaps.push_back(s_plus_quadratic_2d(u, Q, t));
    auto rs = check_propagation_2d(ts, snaps, Q, C0, P);
    CHECK(rs[0].pass);
    CHECK(rs[1].pass);
    CHECK(rs[2].reason == "vacuous");

    std::vector<GridFn2D> bad;
    for (const auto& s : snaps) {
        std::vector<double> v(s.values());
        for (double& x : v) x *= 1.05;
        bad.emplace_back(s.n1(), s.n2(), 1.0, 1.0, std::move(v));
    }
    CHECK_FALSE(check_propagation_2d(ts, bad, Q, C0, P)[1].pass);
}

TEST_CASE("report serialization") {
    auto u = sawtooth(128);
    auto H = half_square(u);
    auto p = piecewise_linear({{0, 0}, {1, 1}, {1.4, 0.6}});
    auto tr = solve_pathwise(u, H, p, {0.0, 1.0, 1.4});
    auto rs = check_intermittent(tr, H, p);
    std::ostringstream os;
    write_reports_csv(os, rs);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,quantity,measured,bound,slack,pass,zeta,M,m");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    const auto s = summarize(rs);
    CHECK(rows == s.passed + s.failed);
    CHECK(s.total == static_cast<int>(rs.size()));
    const auto j = reports_summary_json(rs);
    CHECK(j.find("\"skip_reasons\"") != std::string::npos);
    CHECK(j.find("\"at_extremum\"") != std::string::npos);
    CHECK(report_passes(Quantity::curvature_lower, -1.0, -0.9, 0.1));
    CHECK_FALSE(report_passes(Quantity::curvature_upper, 1.0, 0.8, 0.1));
}
