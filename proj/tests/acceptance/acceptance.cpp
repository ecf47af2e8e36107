#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hjlab/estimates.hpp"
#include "hjlab/experiments.hpp"
#include "hjlab/hopflax.hpp"
#include "hjlab/pathwise.hpp"

using namespace hjlab;

namespace {

const double pi = std::acos(-1.0);

GridFn cosine(int n) { return sample([](double x) { return std::cos(2 * pi * x); }, PeriodicGrid1D(n, 1.0)); }
GridFn sawtooth(int n) { return sample([](double x) { return x < 0.5 ? x : 1 - x; }, PeriodicGrid1D(n, 1.0)); }

// slope ranges fixed from the exact Lipschitz constants so refinement changes h only
Hamiltonian h_cos() { return Hamiltonian::quadratic(1.0, 1.25 * 2 * pi); }
Hamiltonian h_saw() { return Hamiltonian::quadratic(1.0, 1.25); }

Path ramp(double s, double T = 1) { return piecewise_linear({{0, 0}, {T, s * T}}); }

double seconds(const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void verdict(int k, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", k, what.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

struct Outcome {
    int emitted = 0, failed = 0;
    double worst = -1e300;  // max over reports of (excess over the bound) / slack
    void add(const std::vector<EstimateReport>& rs) {
        for (const auto& r : rs) {
            if (r.skipped) continue;
            ++emitted;
            failed += !r.pass;
            const double excess = r.quantity == Quantity::curvature_lower ? r.bound - r.measured : r.measured - r.bound;
            worst = std::max(worst, excess / r.slack);
        }
    }
};

// trajectories collected for the monotonicity sweep; skeleton-first snapshots are
// independent solves, compared at rounding level
struct Member {
    Trajectory traj;
    bool composed;
};
std::vector<Member> suite;

// every scenario with slack budgets, parameterized by the grid size
struct SlackScenarios {
    std::vector<EstimateReport> regularizing, propagation, intermittent, propagation_2d;
};

const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

SlackScenarios run_slack_scenarios(int n, int n2d, double C0, double C0_2d, bool keep) {
    SlackScenarios s;
    {
        auto u = sawtooth(n);
        auto H = h_saw();
        auto tr = solve_pathwise(u, H, ramp(1), {0.25, 0.5, 1.0});
        s.regularizing = check_regularizing(tr, H, CurvatureConstant::infinite(), FlowDirection::plus);
        if (keep) suite.push_back({tr, true});
    }
    {
        auto u = cosine(n);
        auto H = h_cos();
        auto tr = solve_pathwise(u, H, ramp(1), {0.25 / C0, 0.5 / C0});
        s.propagation = check_propagation(tr, H, C0, FlowDirection::plus);
        if (keep) suite.push_back({tr, true});
    }
    {
        QuadraticHamiltonian2D Q(0.5, 0.0, 1.0);
        auto u = sample2d([](double x, double y) { return std::cos(2 * pi * x) * std::cos(2 * pi * y); }, n2d, n2d,
                          1, 1);
        const double P = 1.25 * 2 * pi * std::sqrt(2.0);
        std::vector<double> ts{0.25 / C0_2d, 0.5 / C0_2d};
        std::vector<GridFn2D> snaps;
        for (double t : ts) snaps.push_back(s_plus_quadratic_2d(u, Q, t));
        s.propagation_2d = check_propagation_2d(ts, snaps, Q, C0_2d, P);
    }
    {
        auto u = sawtooth(n);
        auto H = h_saw();
        auto zig = piecewise_linear({{0, 0}, {1, 1}, {1.4, 0.6}});
        auto tr = solve_pathwise(u, H, zig, {0.25, 0.5, 1.0, 1.2, 1.4});
        auto a = check_intermittent(tr, H, zig);
        auto b = check_lipschitz_decay(tr, H, zig);
        s.intermittent.insert(s.intermittent.end(), a.begin(), a.end());
        s.intermittent.insert(s.intermittent.end(), b.begin(), b.end());
        if (keep) suite.push_back({tr, true});
        for (auto seed : seeds) {
            auto p = sample_brownian(seed, 1.0, 1e-3);
            auto tb = solve_skeleton_trajectory(u, H, p, {0.25, 0.5, 1.0});
            auto c = check_intermittent(tb, H, p);
            auto d = check_lipschitz_decay(tb, H, p);
            s.intermittent.insert(s.intermittent.end(), c.begin(), c.end());
            s.intermittent.insert(s.intermittent.end(), d.begin(), d.end());
            if (keep) {
                suite.push_back({tb, false});
                suite.push_back({solve_pathwise(u, H, p, {0.25, 0.5, 1.0}), true});
            }
        }
    }
    return s;
}

void criterion_1() {
    const double P = 2;
    const int m = 1024;
    std::vector<double> p(m + 1), hp(m + 1), q;
    for (int j = 0; j <= m; ++j) {
        p[j] = -P + 2 * P * j / m;
        hp[j] = p[j] * p[j] / 2;
    }
    for (int k = -190; k <= 190; ++k) q.push_back(k / 100.0);
    auto L = legendre_conjugate(p, hp, q);
    double err = 0;
    for (std::size_t k = 0; k < q.size(); ++k) err = std::max(err, std::abs(L.values[k] - q[k] * q[k] / 2));
    const double tol = 2 * std::pow(2 * P / m, 2);
    const double bi = Hamiltonian::quadratic(1.0, P, m).biconjugate_error();
    verdict(1, err <= tol && bi <= tol && L.n_clamped == 0, "conjugate of p^2/2 on [-2,2], m=1024",
            fmt("max |L - q^2/2| %.3g, biconjugate %.3g, tol %.3g", err, bi, tol));
}

void criterion_2() {
    const int n = 512;
    auto u = cosine(n);
    auto H = h_cos();
    const double t = 0.1;
    auto plus = s_plus(u, H, t), minus = s_minus(u, H, t);
    // sup/inf over a 10x finer y-grid of the closed-form datum
    const int N = 10 * n;
    double ep = 0, em = 0;
    for (int i = 0; i < n; ++i) {
        const double x = u.grid().x(i);
        double hi = -1e300, lo = 1e300;
        for (int j = -N; j <= 2 * N; ++j) {
            const double y = static_cast<double>(j) / N;
            const double k = (x - y) * (x - y) / (2 * t);
            hi = std::max(hi, std::cos(2 * pi * y) - k);
            lo = std::min(lo, std::cos(2 * pi * y) + k);
        }
        ep = std::max(ep, std::abs(plus[i] - hi));
        em = std::max(em, std::abs(minus[i] - lo));
    }
    const double defect = sup_distance(s_plus(s_plus(u, H, t), H, t), s_plus(u, H, 2 * t));
    const double h = u.grid().h();
    verdict(2, ep <= 2e-3 && em <= 2e-3 && defect <= 5 * h, "Hopf-Lax against a 10x finer brute force",
            fmt("S+ err %.3g, S- err %.3g (tol 2e-3), semigroup defect %.3g (tol 5h = %.3g)", ep, em, defect, 5 * h));
}

void criterion_3() {
    const int n = 512;
    auto u = cosine(n);
    auto H = h_cos();
    auto zig = piecewise_linear({{0, 0}, {1, 0.3}, {2, 0}});
    auto tr = solve_pathwise(u, H, zig, {0.5, 1.0, 1.5, 2.0});
    suite.push_back({tr, true});
    const double d = sup_distance(tr.snapshots.back(), solve_monotone_scheme(u, H, zig, 0.4));
    const double v = 0.7;
    auto path = piecewise_linear({{0, 0}, {0.5, 0.6}, {1, 1}});
    auto lin = solve_monotone_scheme(u, Hamiltonian::linear(v, 8.0), path, 0.4);
    auto exact = sample([&](double x) { return std::cos(2 * pi * (x + v * path(1.0))); }, u.grid());
    const double dl = sup_distance(lin, exact);
    verdict(3, d <= 0.02 && dl <= 0.05, "cross-validation against the monotone scheme",
            fmt("zigzag +-0.3 diff %.3g (tol 0.02), linear H translate diff %.3g (tol 0.05)", d, dl));
}

void criterion_4() {
    const int n = 512;
    auto u = cosine(n);
    auto H = h_cos();
    const double h = u.grid().h();
    double worst = 0, t_skel = 0, t_full = 0;
    for (auto seed : seeds) {
        auto p = sample_brownian(seed, 1.0, 1e-3);
        GridFn a = u, b = u;
        t_skel += seconds([&] { a = solve_skeleton(u, H, p, 1.0); });
        t_full += seconds([&] {
            auto tr = solve_pathwise(u, H, p, {1.0});
            b = tr.snapshots.back();
        });
        worst = std::max(worst, sup_distance(a, b));
    }
    for (auto pts : {std::vector<std::pair<double, double>>{{0, 0}, {1, 1}, {2, 0.8}, {3, 1.5}},
                     std::vector<std::pair<double, double>>{{0, 0}, {0.5, -0.4}, {1, 0.3}, {1.5, -0.2}, {2, 0.1}},
                     std::vector<std::pair<double, double>>{{0, 0}, {1, 0.3}, {2, 0}}}) {
        auto p = piecewise_linear(pts);
        const double T = p.T();
        auto tr = solve_pathwise(u, H, p, {T});
        worst = std::max(worst, sup_distance(solve_skeleton(u, H, p, T), tr.snapshots.back()));
    }
    const double speedup = t_full / t_skel;
    verdict(4, worst <= 6 * h && speedup >= 20, "skeleton reduction, 10 Brownian seeds and 3 zigzags",
            fmt("max diff %.3g (tol 6h = %.3g), speedup %.1fx (need 20x)", worst, 6 * h, speedup));
}

void report_outcome(int k, const std::string& what, const Outcome& o, const std::string& extra = "") {
    verdict(k, o.failed == 0 && o.emitted > 0, what,
            fmt("%.0f reports, %.0f failed, worst excess/slack %.3f", o.emitted, o.failed, o.worst) + extra);
}

void criterion_8(double contraction) {
    int composed = 0, bad = 0, bad_lip = 0;
    double drift = 0;
    for (const auto& m : suite) {
        composed += m.composed;
        const auto& sn = m.traj.snapshots;
        for (std::size_t k = 1; k < sn.size(); ++k) {
            const double up = sn[k].max() - sn[k - 1].max(), down = sn[k - 1].min() - sn[k].min();
            if (m.composed) bad += (up > 0) + (down > 0);
            else drift = std::max({drift, up, down});
            bad_lip += lipschitz_constant(sn[k]) > lipschitz_constant(sn[k - 1]) + 4 * sn[k].grid().h();
        }
    }
    const bool ok = bad == 0 && bad_lip == 0 && drift <= 1e-15 && contraction <= 1e-12;
    verdict(8, ok, "monotone quantities and contraction",
            fmt("%.0f composed trajectories, max/min violations %.0f, Lip violations %.0f", composed, bad, bad_lip) +
                fmt("; %.0f skeleton-first sets, max/min drift %.3g (tol 1e-15)",
                    static_cast<double>(suite.size() - composed), drift) +
                fmt("; contraction excess %.3g (tol 1e-12)", contraction));
}

double contraction_excess() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    const int n = 256;
    auto zig = piecewise_linear({{0, 0}, {0.5, 0.4}, {1, -0.2}, {1.5, 0.1}, {2, -0.5}});
    std::vector<double> times;
    for (int k = 1; k <= 20; ++k) times.push_back(0.1 * k);
    SolveOptions exact;
    exact.hopf_lax.maximization = Maximization::grid_nodes;
    double excess = 0;
    for (int rep = 0; rep < 20; ++rep) {
        double c[4];
        for (double& x : c) x = g(rng);
        auto u = sample([&](double x) { return c[0] * std::cos(2 * pi * x) + c[1] * std::sin(4 * pi * x); },
                        PeriodicGrid1D(n, 1.0));
        auto v = sample([&](double x) { return c[2] * std::cos(2 * pi * x) + c[3] * std::sin(6 * pi * x); },
                        PeriodicGrid1D(n, 1.0));
        auto H = Hamiltonian::quadratic(1.0, 1.25 * std::max(lipschitz_constant(u), lipschitz_constant(v)));
        auto tu = solve_pathwise(u, H, zig, times, exact);
        auto tv = solve_pathwise(v, H, zig, times, exact);
        suite.push_back({tu, true});
        // against the initial pair: states within a run are recomputed from the run base
        const double initial = sup_positive_part(u, v);
        for (std::size_t k = 0; k < times.size(); ++k)
            excess = std::max(excess, sup_positive_part(tu.snapshots[k], tv.snapshots[k]) - initial);
    }
    return excess;
}

void criterion_9() {
    const int n = 256;
    const double h = 1.0 / n;
    std::vector<double> rt;
    for (int k = 1; k <= 80; ++k) rt.push_back(k * 0.125);
    auto H = h_cos();
    auto r = longtime_run(cosine(n), H, ramp(1, 10), rt, 1e-2);
    const double err = std::abs(r.limit_estimate - 1.0);

    std::vector<double> rb;
    for (int k = 1; k <= 512; ++k) rb.push_back(k * 0.25);
    auto b = longtime_run(cosine(n), H, sample_brownian(11, 128, 1e-3), rb, 1e-2);
    const bool conv = b.converged_at.has_value();
    verdict(9, err <= 2 * h && conv && *b.converged_at == 80.75, "long-time collapse",
            fmt("ramp T=10 limit error %.3g (tol 2h = %.3g); Brownian seed 11 oscillation <= 1e-2 at t = %g "
                "(frozen 80.75)",
                err, 2 * h, conv ? *b.converged_at : -1.0));
}

void criterion_10() {
    const double up = tent_limit(ramp(1, 2), 2, 256);
    const double down = tent_limit(ramp(-1, 2), 2, 256);
    auto c = conditioned_events_check();
    MonteCarloOptions o;
    o.n_paths = 500;
    o.seed0 = 1;
    o.T = 4;
    o.grid_n = 256;
    LimitEnsemble e;
    const double secs = seconds([&] { e = random_limit_montecarlo(o); });
    const auto v = judge(e);
    verdict(10, up == 1.0 && down == 0.0 && c.ok() && v.ok() && secs <= 600, "random limit of the tent datum",
            fmt("ramps %g/%g, A+ min %.3g (>= 0.75), A- max %.3g (<= 0.25)", up, down, c.plus_min, c.minus_max) +
                fmt("; 500 paths: variance %.4f, mean %.4f, KS %.4f, %.1fs", e.variance, e.mean, e.symmetry_stat,
                    secs));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();

    const int n = 512, n2d = 128;
    const double C0 = propagation_constant(cosine(n), h_cos(), FlowDirection::plus);
    QuadraticHamiltonian2D Q(0.5, 0.0, 1.0);
    auto u2 = sample2d([](double x, double y) { return std::cos(2 * pi * x) * std::cos(2 * pi * y); }, n2d, n2d, 1, 1);
    const double C0_2d = curvature_w_2d(u2, Q, 1.25 * 2 * pi * std::sqrt(2.0)).w_max;
    const auto base = run_slack_scenarios(n, n2d, C0, C0_2d, true);

    Outcome reg;
    reg.add(base.regularizing);
    report_outcome(5, "regularizing effect from the sawtooth, t = 0.25, 0.5, 1", reg);

    Outcome both;
    both.add(base.propagation);
    both.add(base.propagation_2d);
    report_outcome(6, "propagation from cos, t = 0.25/C0, 0.5/C0, 1-D and 2-D", both,
                   fmt("; C0 = %.4g (1-D), %.4g (2-D)", C0, C0_2d));

    Outcome inter;
    inter.add(base.intermittent);
    report_outcome(7, "intermittent and Lipschitz bounds, zigzag and 10 Brownian seeds", inter);

    criterion_8(contraction_excess());
    criterion_9();
    criterion_10();

    // same scenarios, same constants and times, grid doubled
    const auto fine = run_slack_scenarios(2 * n, 2 * n2d, C0, C0_2d, false);
    auto compare = [](const std::vector<EstimateReport>& a, const std::vector<EstimateReport>& b, int& bad,
                      int& count, double& ratio) {
        if (a.size() != b.size()) {
            ++bad;
            return;
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k].skipped || b[k].skipped) {
                bad += a[k].skipped != b[k].skipped;
                continue;
            }
            ++count;
            ratio = std::max(ratio, b[k].slack / a[k].slack);
            bad += !b[k].pass || b[k].slack > 0.5 * a[k].slack * (1 + 1e-12);
        }
    };
    int bad = 0, count = 0;
    double ratio = 0;
    compare(base.regularizing, fine.regularizing, bad, count, ratio);
    compare(base.propagation, fine.propagation, bad, count, ratio);
    compare(base.propagation_2d, fine.propagation_2d, bad, count, ratio);
    compare(base.intermittent, fine.intermittent, bad, count, ratio);
    verdict(11, bad == 0 && count > 0, "grid refinement halves every slack and still passes",
            fmt("%.0f reports rerun at 2n, %.0f violations, max slack ratio %.4f", count, bad, ratio));

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
