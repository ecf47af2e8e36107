#include "hjlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace hjlab {

double curvature_slack(const Hamiltonian& H, double h) { return (H.Theta() * H.slope_range() + 1) * 10 * h; }

double report_slack(const CurvatureProbe& pr, double bound) { return pr.h_slack + 10 * pr.h * std::abs(bound); }

int default_stride(int n) { return static_cast<int>(std::ceil(std::sqrt(n / 4.0))); }

CurvatureProbe curvature_w(const GridFn& u, const Hamiltonian& H, int stride) {
    if (H.degenerate()) throw std::invalid_argument(H.id() + ": curvature probe needs a uniformly convex H");
    const int n = u.size();
    const int k = stride > 0 ? stride : default_stride(n);
    if (2 * k >= n) throw std::invalid_argument("curvature probe: stride too wide for the grid");
    const double d = k * u.grid().h();
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double a = u.at(i + k), b = u.at(i - k);
        w[i] = H.curvature((a - b) / (2 * d)) * (a - 2 * u[i] + b) / (d * d);
    }
    GridFn wf(u.grid(), std::move(w));
    const double lo = wf.min(), hi = wf.max();
    return {std::move(wf), lo, hi, curvature_slack(H, u.grid().h()), k, u.grid().h()};
}

CurvatureConstant CurvatureConstant::finite(double c) {
    if (!(c >= 0) || !std::isfinite(c)) throw std::invalid_argument("curvature constant must be finite and >= 0");
    return CurvatureConstant(c, false);
}

double CurvatureConstant::value() const {
    if (inf_) throw std::logic_error("curvature constant is infinite");
    return c_;
}

double regularizing_bound(const CurvatureConstant& C, double t) {
    if (C.is_infinite()) return 1.0 / t;
    return C.value() / (1 + C.value() * t);
}

double classical_regularizing_bound(const CurvatureConstant& C, double theta, double t) {
    if (C.is_infinite()) return 1.0 / (theta * t);
    return C.value() / (1 + theta * C.value() * t);
}

double propagation_bound(double C0, double t) { return -C0 / (1 - C0 * t); }

double lipschitz_decay_bound(double sup_u, double theta, double range) {
    return std::sqrt(2 * sup_u / (theta * range));
}

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::curvature_lower: return "curvature_lower";
        case Quantity::curvature_upper: return "curvature_upper";
        case Quantity::curvature_abs: return "curvature_abs";
        case Quantity::lipschitz: return "lipschitz";
    }
    return "?";
}

FlowDirection parse_direction(const std::string& s) {
    if (s == "plus") return FlowDirection::plus;
    if (s == "minus") return FlowDirection::minus;
    throw std::invalid_argument("unknown direction '" + s + "' (expected plus or minus)");
}

std::string to_string(FlowDirection d) { return d == FlowDirection::plus ? "plus" : "minus"; }

bool report_passes(Quantity q, double measured, double bound, double slack) {
    if (q == Quantity::curvature_lower) return measured >= bound - slack;
    return measured <= bound + slack;
}

namespace {

EstimateReport make(double t, Quantity q, double measured, double bound, double slack) {
    EstimateReport r;
    r.time = t;
    r.quantity = q;
    r.measured = measured;
    r.bound = bound;
    r.slack = slack;
    r.pass = report_passes(q, measured, bound, slack);
    return r;
}

EstimateReport make_curv(double t, Quantity q, double measured, double bound, const CurvatureProbe& pr) {
    return make(t, q, measured, bound, report_slack(pr, bound));
}

EstimateReport skip(double t, Quantity q, std::string reason) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EstimateReport r = make(t, q, nan, nan, nan);
    r.pass = true;
    r.skipped = true;
    r.reason = std::move(reason);
    return r;
}

void check_direction(const Path& p, FlowDirection dir) {
    const auto& v = p.values();
    const int s = dir == FlowDirection::plus ? 1 : -1;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (s * (v[k] - v[k - 1]) < 0)
            throw std::invalid_argument("trajectory path is not a single " + to_string(dir) + " flow");
}

struct Context {
    RunningExtrema ext;
    explicit Context(const Path& p) : ext(running_extrema(p)) {}
    void fill(EstimateReport& r, const Path& p) const {
        r.zeta = p(r.time);
        r.M = ext.M(r.time);
        r.m = ext.m(r.time);
    }
};

// max over nodes of s*W and min over nodes of s*W
std::pair<double, double> signed_range(const CurvatureProbe& pr, int s) {
    return s > 0 ? std::make_pair(pr.w_max, pr.w_min) : std::make_pair(-pr.w_min, -pr.w_max);
}

}  // namespace

std::vector<EstimateReport> check_regularizing(const Trajectory& traj, const Hamiltonian& H,
                                               const CurvatureConstant& C0, FlowDirection dir) {
    check_direction(traj.path, dir);
    Context ctx(traj.path);
    std::vector<EstimateReport> out;
    // plus: -W is bounded above, minus: W is
    const int s = dir == FlowDirection::plus ? -1 : 1;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.snapshot_times[k];
        const double elapsed = std::abs(traj.path(t));
        EstimateReport r;
        if (H.degenerate()) r = skip(t, Quantity::curvature_upper, "degenerate_convexity");
        else if (traj.approximate[k]) r = skip(t, Quantity::curvature_upper, "approximate_snapshot");
        else if (!(elapsed > 0)) r = skip(t, Quantity::curvature_upper, "no_range");
        else {
            const auto pr = curvature_w(traj.snapshots[k], H);
            r = make_curv(t, Quantity::curvature_upper, signed_range(pr, s).first, regularizing_bound(C0, elapsed),
                     pr);
        }
        ctx.fill(r, traj.path);
        out.push_back(r);
    }
    return out;
}

double propagation_constant(const GridFn& u0, const Hamiltonian& H, FlowDirection dir) {
    const auto pr = curvature_w(u0, H);
    return std::max(0.0, dir == FlowDirection::plus ? pr.w_max : -pr.w_min);
}

std::vector<EstimateReport> check_propagation(const Trajectory& traj, const Hamiltonian& H, double C0,
                                              FlowDirection dir) {
    check_direction(traj.path, dir);
    C0 = std::max(0.0, C0);
    Context ctx(traj.path);
    std::vector<EstimateReport> out;
    const int s = dir == FlowDirection::plus ? -1 : 1;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.snapshot_times[k];
        const double elapsed = std::abs(traj.path(t));
        EstimateReport r;
        if (H.degenerate()) r = skip(t, Quantity::curvature_lower, "degenerate_convexity");
        else if (traj.approximate[k]) r = skip(t, Quantity::curvature_lower, "approximate_snapshot");
        else if (C0 * elapsed >= 1) r = skip(t, Quantity::curvature_lower, "vacuous");
        else {
            const auto pr = curvature_w(traj.snapshots[k], H);
            r = make_curv(t, Quantity::curvature_lower, signed_range(pr, s).second, propagation_bound(C0, elapsed),
                     pr);
        }
        ctx.fill(r, traj.path);
        out.push_back(r);
    }
    return out;
}

std::vector<EstimateReport> check_intermittent(const Trajectory& traj, const Hamiltonian& H, const Path& p) {
    Context ctx(p);
    std::vector<EstimateReport> out;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.snapshot_times[k];
        const double z = p(t), M = ctx.ext.M(t), m = ctx.ext.m(t);
        std::vector<EstimateReport> rs;
        if (H.degenerate()) {
            rs.push_back(skip(t, Quantity::curvature_upper, "degenerate_convexity"));
            rs.push_back(skip(t, Quantity::curvature_lower, "degenerate_convexity"));
        } else if (traj.approximate[k]) {
            rs.push_back(skip(t, Quantity::curvature_upper, "approximate_snapshot"));
            rs.push_back(skip(t, Quantity::curvature_lower, "approximate_snapshot"));
        } else if (!(M > m)) {
            rs.push_back(skip(t, Quantity::curvature_upper, "no_range"));
            rs.push_back(skip(t, Quantity::curvature_lower, "no_range"));
        } else {
            const auto pr = curvature_w(traj.snapshots[k], H);
            const bool up = z > m, down = z < M;
            // -W <= 1/(zeta - m)
            if (up) rs.push_back(make_curv(t, Quantity::curvature_upper, -pr.w_min, 1 / (z - m), pr));
            else rs.push_back(skip(t, Quantity::curvature_upper, "at_extremum"));
            // -W >= -1/(M - zeta)
            if (down) rs.push_back(make_curv(t, Quantity::curvature_lower, -pr.w_max, -1 / (M - z), pr));
            else rs.push_back(skip(t, Quantity::curvature_lower, "at_extremum"));
            if (up && down) {
                const double absw = std::max(std::abs(pr.w_min), std::abs(pr.w_max));
                rs.push_back(make_curv(t, Quantity::curvature_abs, absw, std::max(1 / (z - m), 1 / (M - z)), pr));
            }
        }
        for (auto& r : rs) {
            r.zeta = z, r.M = M, r.m = m;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<EstimateReport> check_lipschitz_decay(const Trajectory& traj, const Hamiltonian& H, const Path& p) {
    Context ctx(p);
    std::vector<EstimateReport> out;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const double t = traj.snapshot_times[k];
        const double M = ctx.ext.M(t), m = ctx.ext.m(t);
        EstimateReport r;
        if (H.degenerate()) {
            // no decay rate without uniform convexity; the constant still cannot grow
            if (k == 0) r = skip(t, Quantity::lipschitz, "first_snapshot");
            else {
                const double b = lipschitz_constant(traj.snapshots[k - 1]);
                const auto& u = traj.snapshots[k];
                r = make(t, Quantity::lipschitz, lipschitz_constant(u), b, 4 * u.grid().h() * b);
            }
        } else if (traj.approximate[k]) r = skip(t, Quantity::lipschitz, "approximate_snapshot");
        else if (!(M > m)) r = skip(t, Quantity::lipschitz, "no_range");
        else {
            const auto& u = traj.snapshots[k];
            const double b = lipschitz_decay_bound(u.sup_norm(), H.theta(), M - m);
            r = make(t, Quantity::lipschitz, lipschitz_constant(u), b, 4 * u.grid().h() * b);
        }
        r.zeta = p(t), r.M = M, r.m = m;
        out.push_back(r);
    }
    return out;
}

CurvatureProbe2D curvature_w_2d(const GridFn2D& u, const QuadraticHamiltonian2D& Q, double P) {
    const auto F = Q.sqrt_hessian();
    const int n1 = u.n1(), n2 = u.n2();
    const double h1 = u.h1(), h2 = u.h2();
    CurvatureProbe2D pr;
    pr.eig_min.resize(static_cast<std::size_t>(n1) * n2);
    pr.eig_max.resize(pr.eig_min.size());
    pr.w_min = INFINITY;
    pr.w_max = -INFINITY;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double c = u(i, j);
            const double uxx = (u.at(i + 1, j) - 2 * c + u.at(i - 1, j)) / (h1 * h1);
            const double uyy = (u.at(i, j + 1) - 2 * c + u.at(i, j - 1)) / (h2 * h2);
            const double uxy =
                (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) + u.at(i - 1, j - 1)) / (4 * h1 * h2);
            // W = F D F, F symmetric
            const double a = F[0] * uxx + F[1] * uxy, b = F[0] * uxy + F[1] * uyy;
            const double c2 = F[2] * uxx + F[3] * uxy, d = F[2] * uxy + F[3] * uyy;
            const double w11 = a * F[0] + b * F[2], w12 = a * F[1] + b * F[3], w22 = c2 * F[1] + d * F[3];
            const double mid = (w11 + w22) / 2, rad = std::hypot((w11 - w22) / 2, w12);
            const std::size_t idx = static_cast<std::size_t>(i) * n2 + j;
            pr.eig_min[idx] = mid - rad;
            pr.eig_max[idx] = mid + rad;
            pr.w_min = std::min(pr.w_min, mid - rad);
            pr.w_max = std::max(pr.w_max, mid + rad);
        }
    pr.h_slack = (2 * Q.lambda_max() * P + 1) * 10 * std::max(h1, h2);
    return pr;
}

std::vector<EstimateReport> check_propagation_2d(const std::vector<double>& times,
                                                 const std::vector<GridFn2D>& snapshots,
                                                 const QuadraticHamiltonian2D& Q, double C0, double P) {
    if (times.size() != snapshots.size()) throw std::invalid_argument("check_propagation_2d: size mismatch");
    C0 = std::max(0.0, C0);
    std::vector<EstimateReport> out;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (C0 * t >= 1) {
            out.push_back(skip(t, Quantity::curvature_lower, "vacuous"));
            continue;
        }
        const auto pr = curvature_w_2d(snapshots[k], Q, P);
        // smallest eigenvalue of -W
        out.push_back(make(t, Quantity::curvature_lower, -pr.w_max, propagation_bound(C0, t), pr.h_slack));
    }
    return out;
}

ReportSummary summarize(const std::vector<EstimateReport>& reports) {
    ReportSummary s;
    for (const auto& r : reports) {
        ++s.total;
        if (r.skipped) ++s.skipped;
        else if (r.pass) ++s.passed;
        else ++s.failed;
    }
    return s;
}

void write_reports_csv(std::ostream& os, const std::vector<EstimateReport>& reports) {
    os << "t,quantity,measured,bound,slack,pass,zeta,M,m\n";
    for (const auto& r : reports) {
        if (r.skipped) continue;
        os << fmt17(r.time) << ',' << to_string(r.quantity) << ',' << fmt17(r.measured) << ',' << fmt17(r.bound)
           << ',' << fmt17(r.slack) << ',' << (r.pass ? "true" : "false") << ',' << fmt17(r.zeta) << ','
           << fmt17(r.M + 0.0) << ',' << fmt17(r.m + 0.0) << '\n';
    }
}

std::string reports_summary_json(const std::vector<EstimateReport>& reports) {
    const auto s = summarize(reports);
    nlohmann::ordered_json j;
    j["total"] = s.total;
    j["passed"] = s.passed;
    j["failed"] = s.failed;
    j["skipped"] = s.skipped;
    std::map<std::string, int> reasons;
    auto failing = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        if (r.skipped) ++reasons[r.reason];
        else if (!r.pass)
            failing.push_back({{"t", r.time},
                               {"quantity", to_string(r.quantity)},
                               {"measured", r.measured},
                               {"bound", r.bound},
                               {"slack", r.slack}});
    }
    j["skip_reasons"] = reasons;
    j["failures"] = failing;
    j["pass"] = s.ok();
    return j.dump(2);
}

}  // namespace hjlab
