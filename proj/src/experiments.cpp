#include "hjlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace hjlab {

LongTimeRun longtime_run(const GridFn& u0, const Hamiltonian& H, const Path& p, std::vector<double> record_times,
                         double eps_conv, const SolveOptions& opt) {
    if (std::abs(H(0.0)) > 1e-12) throw std::invalid_argument("longtime_run: H(0) must vanish");
    if (H(H.argmin()) < -1e-12) throw std::invalid_argument("longtime_run: H must be nonnegative");
    if (!(eps_conv > 0)) throw std::invalid_argument("longtime_run: eps_conv must be positive");
    if (record_times.empty()) throw std::invalid_argument("longtime_run: no record times");

    const Trajectory traj = solve_pathwise(u0, H, p, std::move(record_times), opt);
    LongTimeRun r;
    double prev_max = u0.max(), prev_min = u0.min();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.snapshot_times[k];
        const double mx = traj.snapshots[k].max(), mn = traj.snapshots[k].min();
        if (mx > prev_max || mn < prev_min)
            throw std::logic_error("longtime_run: max/min monotonicity broken at t=" + std::to_string(t));
        prev_max = mx;
        prev_min = mn;
        r.max_series.push_back({t, mx});
        r.min_series.push_back({t, mn});
        r.oscillation_series.push_back({t, mx - mn});
        if (!r.converged_at && mx - mn <= eps_conv) r.converged_at = t;
    }
    r.limit_estimate = 0.5 * (prev_max + prev_min);
    r.final_oscillation = prev_max - prev_min;
    return r;
}

GridFn tent_datum(int grid_n) {
    return sample([](double x) { return 1.0 - std::abs(x - 1.0); }, PeriodicGrid1D(grid_n, 2.0));
}

static const Hamiltonian& abs_hamiltonian() {
    static const Hamiltonian H = Hamiltonian::abs(1.25);
    return H;
}

double tent_limit(const Path& p, double T, int grid_n) {
    const GridFn u = solve_skeleton(tent_datum(grid_n), abs_hamiltonian(), p, T);
    return 0.5 * (u.max() + u.min());
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

namespace {

struct PathResult {
    double limit, osc;
    std::optional<double> converged;
};

PathResult run_one(std::uint64_t seed, const MonteCarloOptions& opt, const GridFn& u0) {
    const Path p = sample_brownian(seed, opt.T, opt.dt);
    PathResult r{};
    const int steps = static_cast<int>(std::floor(opt.T / opt.record_dt + 1e-9));
    for (int k = 1; k <= steps && !r.converged; ++k) {
        const double t = k * opt.record_dt;
        const GridFn u = solve_skeleton(u0, abs_hamiltonian(), p, t);
        if (oscillation(u) <= opt.eps_conv) r.converged = t;
    }
    const GridFn u = solve_skeleton(u0, abs_hamiltonian(), p, opt.T);
    r.limit = 0.5 * (u.max() + u.min());
    r.osc = oscillation(u);
    if (!r.converged && r.osc <= opt.eps_conv) r.converged = opt.T;
    return r;
}

}  // namespace

LimitEnsemble random_limit_montecarlo(const MonteCarloOptions& opt) {
    if (opt.n_paths < 100) throw std::invalid_argument("montecarlo: n_paths must be >= 100");
    if (!(opt.T > 0) || !(opt.dt > 0) || opt.dt > opt.T) throw std::invalid_argument("montecarlo: bad T or dt");
    if (!(opt.record_dt > 0)) throw std::invalid_argument("montecarlo: record_dt must be positive");
    const GridFn u0 = tent_datum(opt.grid_n);

    const auto n = static_cast<std::size_t>(opt.n_paths);
    std::vector<PathResult> res(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < n;) res[k] = run_one(opt.seed0 + k, opt, u0);
    };
    int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, opt.n_paths);
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    LimitEnsemble e;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        e.seeds.push_back(opt.seed0 + k);
        e.limits.push_back(res[k].limit);
        e.final_oscillation.push_back(res[k].osc);
        e.converged_at.push_back(res[k].converged);
        sum += res[k].limit;
    }
    e.mean = sum / n;
    double ss = 0.0;
    for (double c : e.limits) ss += (c - e.mean) * (c - e.mean);
    e.variance = ss / (n - 1);
    std::vector<double> mirrored(e.limits);
    for (double& c : mirrored) c = 1.0 - c;
    e.symmetry_stat = ks_distance(e.limits, mirrored);
    return e;
}

EnsembleVerdict judge(const LimitEnsemble& e, const EnsembleThresholds& th) {
    return {e.variance > th.min_variance, std::abs(e.mean - 0.5) < th.max_mean_offset,
            e.symmetry_stat < th.max_ks};
}

void write_ensemble_csv(std::ostream& os, const LimitEnsemble& e) {
    os << "seed,limit,final_oscillation,converged_at\n";
    for (std::size_t k = 0; k < e.limits.size(); ++k) {
        os << e.seeds[k] << ',' << fmt17(e.limits[k]) << ',' << fmt17(e.final_oscillation[k]) << ',';
        if (e.converged_at[k]) os << fmt17(*e.converged_at[k]);
        os << '\n';
    }
}

Path event_surrogate(int sign, double eps, double T) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("event_surrogate: sign must be +-1");
    if (!(eps > 0) || !(T > 0)) throw std::invalid_argument("event_surrogate: eps and T must be positive");
    const int K = 16;
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    for (int k = 1; k <= K; ++k) {
        const double t = T * k / K;
        pts.emplace_back(t, sign * t + (k % 2 ? 0.5 : -0.5) * eps);
    }
    return piecewise_linear(pts);
}

ConditionedReport conditioned_events_check(double eps, double T, int grid_n) {
    ConditionedReport r{};
    r.eps = eps;
    const GridFn u0 = tent_datum(grid_n);
    const GridFn up = solve_skeleton(u0, abs_hamiltonian(), event_surrogate(1, eps, T), T);
    const GridFn down = solve_skeleton(u0, abs_hamiltonian(), event_surrogate(-1, eps, T), T);
    r.plus_min = up.min();
    r.minus_max = down.max();
    r.ramp_up = tent_limit(piecewise_linear({{0.0, 0.0}, {T, T}}), T, grid_n);
    r.ramp_down = tent_limit(piecewise_linear({{0.0, 0.0}, {T, -T}}), T, grid_n);
    r.plus_ok = r.plus_min >= 0.75;
    r.minus_ok = r.minus_max <= 0.25;
    r.ramps_ok = r.ramp_up == 1.0 && r.ramp_down == 0.0;
    return r;
}

std::optional<Path> rejection_sample_event(std::uint64_t seed0, int sign, double eps, double T, double dt,
                                           int max_tries) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("rejection_sample_event: sign must be +-1");
    for (int k = 0; k < max_tries; ++k) {
        Path p = sample_brownian(seed0 + k, T, dt);
        bool inside = true;
        for (std::size_t i = 0; i < p.size() && inside; ++i)
            inside = std::abs(p.values()[i] - sign * p.times()[i]) < eps;
        if (inside) return p;
    }
    return std::nullopt;
}

}  // namespace hjlab
