#include "hjlab/hopflax.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace hjlab {

Maximization parse_maximization(const std::string& s) {
    if (s == "grid_nodes") return Maximization::grid_nodes;
    if (s == "eno") return Maximization::eno;
    throw std::invalid_argument("unknown maximization mode '" + s + "' (expected grid_nodes or eno)");
}

std::string to_string(Maximization m) { return m == Maximization::grid_nodes ? "grid_nodes" : "eno"; }

double t_min(const Hamiltonian& H, const PeriodicGrid1D& grid) { return 4 * grid.h() / H.vmax(); }

namespace {

// quadratic through (-1,a), (0,b), (1,c), maximized over s in [lo, hi]
double quad_max(double a, double b, double c, double lo, double hi) {
    const double A = (a + c - 2 * b) / 2, B = (c - a) / 2;
    auto f = [&](double s) { return (A * s + B) * s + b; };
    double best = std::max(f(lo), f(hi));
    if (A < 0) {
        const double s = -B / (2 * A);
        if (s > lo && s < hi) best = std::max(best, f(s));
    }
    return best;
}

// f[0..4] sampled around a node maximum f[2]; each adjacent cell uses the
// smoother of its two candidate stencils
double eno_peak(const double* f) {
    const double dm = f[0] - 2 * f[1] + f[2];
    const double d0 = f[1] - 2 * f[2] + f[3];
    const double dp = f[2] - 2 * f[3] + f[4];
    const double left = std::abs(dm) < std::abs(d0) ? quad_max(f[0], f[1], f[2], 0, 1)
                                                    : quad_max(f[1], f[2], f[3], -1, 0);
    const double right = std::abs(dp) < std::abs(d0) ? quad_max(f[2], f[3], f[4], -1, 0)
                                                     : quad_max(f[1], f[2], f[3], 0, 1);
    return std::max({f[2], left, right});
}

struct Kernel {
    int klo, khi;              // admissible displacements (cells)
    std::vector<double> cost;  // cost[k - klo + 2] for k in [klo-2, khi+2]
    double operator()(int k) const { return cost[k - klo + 2]; }
};

// r[i] = max over k in [klo, khi] of v[i+k] - cost(k), cost convex in k
std::vector<double> sup_convolve(const std::vector<double>& v, const Kernel& ker, Maximization mode) {
    const int n = static_cast<int>(v.size());
    auto val = [&](long long j) {
        long long r = j % n;
        if (r < 0) r += n;
        return v[r];
    };
    std::vector<long long> arg(n);

    // the leftmost argmax is nondecreasing in i (Monge kernel), divide and conquer
    struct Frame { int ilo, ihi; long long jlo, jhi; };
    std::vector<Frame> stack{{0, n - 1, static_cast<long long>(ker.klo), static_cast<long long>(n - 1 + ker.khi)}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.ilo > fr.ihi) continue;
        const int mid = fr.ilo + (fr.ihi - fr.ilo) / 2;
        const long long a = std::max(fr.jlo, static_cast<long long>(mid) + ker.klo);
        const long long b = std::min(fr.jhi, static_cast<long long>(mid) + ker.khi);
        long long best_j = a;
        double best = -std::numeric_limits<double>::infinity();
        for (long long j = a; j <= b; ++j) {
            const double o = val(j) - ker(static_cast<int>(j - mid));
            if (o > best) {
                best = o;
                best_j = j;
            }
        }
        arg[mid] = best_j;
        stack.push_back({fr.ilo, mid - 1, fr.jlo, best_j});
        stack.push_back({mid + 1, fr.ihi, best_j, fr.jhi});
    }

    double vmax = *std::max_element(v.begin(), v.end());
    double cmin = std::numeric_limits<double>::infinity();
    for (int k = ker.klo; k <= ker.khi; ++k) cmin = std::min(cmin, ker(k));
    const double cap = vmax - cmin;

    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        const long long j = arg[i];
        const int k = static_cast<int>(j - i);
        const double f0 = val(j) - ker(k);
        if (mode == Maximization::grid_nodes) {
            r[i] = f0;
            continue;
        }
        double f[5];
        for (int d = -2; d <= 2; ++d) f[d + 2] = val(j + d) - ker(k + d);
        r[i] = std::max(f0, std::min(eno_peak(f), cap));
    }
    return r;
}

// window from the speed bound, shrunk to displacements that can still win
Kernel make_kernel(const Hamiltonian& H, const GridFn& u, double t, int sign) {
    const double h = u.grid().h();
    const int kspeed = static_cast<int>(std::floor(t * H.vmax() / h * (1 + 1e-12)));
    const double osc = oscillation(u);
    auto cost = [&](int k) { return t * H.L(sign * k * h / t); };
    const double c0 = cost(0);
    int khi = 0, klo = 0;
    while (khi < kspeed && cost(khi + 1) <= c0 + osc) ++khi;
    while (-klo < kspeed && cost(klo - 1) <= c0 + osc) --klo;
    Kernel ker{klo, khi, {}};
    ker.cost.resize(khi - klo + 5);
    for (int k = klo - 2; k <= khi + 2; ++k) ker.cost[k - klo + 2] = cost(k);
    return ker;
}

// max of the piecewise-linear interpolant over [x - t, x + t]
std::vector<double> window_max(const std::vector<double>& v, double cells) {
    const int n = static_cast<int>(v.size());
    const int K = static_cast<int>(std::floor(cells * (1 + 1e-12)));
    const double frac = std::max(0.0, cells - K);
    auto val = [&](long long j) {
        long long r = j % n;
        if (r < 0) r += n;
        return v[r];
    };
    std::vector<double> r(n);
    if (2 * K + 1 >= n) {
        std::fill(r.begin(), r.end(), *std::max_element(v.begin(), v.end()));
        return r;
    }
    std::deque<long long> dq;
    // window for node i covers nodes i-K .. i+K
    for (long long j = -K; j < n + K; ++j) {
        while (!dq.empty() && val(dq.back()) <= val(j)) dq.pop_back();
        dq.push_back(j);
        const long long i = j - K;
        if (i < 0) continue;
        while (dq.front() < i - K) dq.pop_front();
        double m = val(dq.front());
        if (frac > 0) {
            m = std::max(m, (1 - frac) * val(i - K) + frac * val(i - K - 1));
            m = std::max(m, (1 - frac) * val(i + K) + frac * val(i + K + 1));
        }
        r[i] = m;
    }
    return r;
}

void check_increment(double t, double tmin) {
    if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("hopf-lax increment must be positive and finite");
    if (t < tmin)
        throw SolverRefusal("increment too small for grid: t=" + fmt17(t) + " < t_min=" + fmt17(tmin) +
                            "; merge increments or coarsen record times");
}

std::vector<double> apply_sup(const GridFn& v, const Hamiltonian& H, double t, int sign, const HopfLaxOptions& opt) {
    if (H.kind() == Hamiltonian::Kind::abs) return window_max(v.values(), t / v.grid().h());
    if (H.kind() != Hamiltonian::Kind::convex)
        throw std::invalid_argument(H.id() + ": Hopf-Lax operators need a convex Hamiltonian");
    return sup_convolve(v.values(), make_kernel(H, v, t, sign), opt.maximization);
}

}  // namespace

GridFn s_plus(const GridFn& u0, const Hamiltonian& H, double t, const HopfLaxOptions& opt) {
    check_increment(t, t_min(H, u0.grid()));
    return GridFn(u0.grid(), apply_sup(u0, H, t, +1, opt));
}

GridFn s_minus(const GridFn& u0, const Hamiltonian& H, double t, const HopfLaxOptions& opt) {
    check_increment(t, t_min(H, u0.grid()));
    auto r = apply_sup(negate(u0), H, t, -1, opt);
    for (double& x : r) x = -x;
    return GridFn(u0.grid(), std::move(r));
}

GridFn hopf_lax(const GridFn& u0, const Hamiltonian& H, double t, int sign, const HopfLaxOptions& opt) {
    return sign > 0 ? s_plus(u0, H, t, opt) : s_minus(u0, H, t, opt);
}

// ---- 2-D quadratic case ----

GridFn2D::GridFn2D(int n1, int n2, double period1, double period2, std::vector<double> values)
    : n1_(n1), n2_(n2), period1_(period1), period2_(period2), values_(std::move(values)) {
    if (n1 < 8 || n2 < 8) throw std::invalid_argument("grid2d: n1, n2 must be >= 8");
    if (!(period1 > 0) || !(period2 > 0)) throw std::invalid_argument("grid2d: periods must be positive");
    if (values_.size() != static_cast<std::size_t>(n1) * n2) throw std::invalid_argument("grid2d: wrong value count");
    for (double x : values_)
        if (!std::isfinite(x)) throw std::invalid_argument("grid2d: non-finite value");
}

double GridFn2D::at(long long i, long long j) const {
    long long a = i % n1_, b = j % n2_;
    if (a < 0) a += n1_;
    if (b < 0) b += n2_;
    return values_[static_cast<std::size_t>(a) * n2_ + b];
}

double GridFn2D::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFn2D::min() const { return *std::min_element(values_.begin(), values_.end()); }

double lipschitz_constant(const GridFn2D& u) {
    double best = 0;
    for (int i = 0; i < u.n1(); ++i)
        for (int j = 0; j < u.n2(); ++j) {
            const double g1 = (u.at(i + 1, j) - u(i, j)) / u.h1();
            const double g2 = (u.at(i, j + 1) - u(i, j)) / u.h2();
            best = std::max(best, std::hypot(g1, g2));
        }
    return best;
}

double sup_distance(const GridFn2D& a, const GridFn2D& b) {
    if (a.n1() != b.n1() || a.n2() != b.n2()) throw std::invalid_argument("grid2d: shape mismatch");
    double d = 0;
    for (std::size_t k = 0; k < a.values().size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
    return d;
}

double t_min_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q) {
    const double P = std::max(1.0, 1.25 * lipschitz_constant(u0));
    return 4 * std::min(u0.h1(), u0.h2()) / (2 * Q.lambda_max() * P);
}

namespace {

GridFn2D sup_convolve_2d(const GridFn2D& v, const QuadraticHamiltonian2D& Q, double t, Maximization mode) {
    const double h1 = v.h1(), h2 = v.h2();
    const double det = Q.a11() * Q.a22() - Q.a12() * Q.a12();
    // t L(d/t) = (A^{-1} d, d) / (4t)
    auto cost = [&](int k1, int k2) {
        const double d1 = k1 * h1, d2 = k2 * h2;
        return (Q.a22() * d1 * d1 - 2 * Q.a12() * d1 * d2 + Q.a11() * d2 * d2) / (det * 4 * t);
    };
    const double osc = v.max() - v.min();
    // bounding box of the ellipse cost <= osc
    const int R1 = static_cast<int>(std::ceil(std::sqrt(osc * 4 * t * Q.a11()) / h1));
    const int R2 = static_cast<int>(std::ceil(std::sqrt(osc * 4 * t * Q.a22()) / h2));
    const int w2 = 2 * R2 + 1;
    std::vector<double> ctab(static_cast<std::size_t>(2 * R1 + 1) * w2);
    for (int k1 = -R1; k1 <= R1; ++k1)
        for (int k2 = -R2; k2 <= R2; ++k2) ctab[static_cast<std::size_t>(k1 + R1) * w2 + (k2 + R2)] = cost(k1, k2);

    const double cap = v.max();
    std::vector<double> out(v.values().size());
    for (int i = 0; i < v.n1(); ++i)
        for (int j = 0; j < v.n2(); ++j) {
            double best = -std::numeric_limits<double>::infinity();
            int b1 = 0, b2 = 0;
            for (int k1 = -R1; k1 <= R1; ++k1) {
                const double* crow = &ctab[static_cast<std::size_t>(k1 + R1) * w2];
                for (int k2 = -R2; k2 <= R2; ++k2) {
                    const double c = crow[k2 + R2];
                    if (c > osc) continue;
                    const double o = v.at(i + k1, j + k2) - c;
                    if (o > best) {
                        best = o;
                        b1 = k1;
                        b2 = k2;
                    }
                }
            }
            double r = best;
            if (mode == Maximization::eno) {
                // axis-wise stencil-selected refinement around the node argmax
                double f1[5], f2[5];
                for (int d = -2; d <= 2; ++d) {
                    f1[d + 2] = v.at(i + b1 + d, j + b2) - cost(b1 + d, b2);
                    f2[d + 2] = v.at(i + b1, j + b2 + d) - cost(b1, b2 + d);
                }
                r = best + (eno_peak(f1) - best) + (eno_peak(f2) - best);
                r = std::max(best, std::min(r, cap));
            }
            out[static_cast<std::size_t>(i) * v.n2() + j] = r;
        }
    return GridFn2D(v.n1(), v.n2(), v.period1(), v.period2(), std::move(out));
}

GridFn2D negate2d(const GridFn2D& u) {
    std::vector<double> v(u.values());
    for (double& x : v) x = -x;
    return GridFn2D(u.n1(), u.n2(), u.period1(), u.period2(), std::move(v));
}

}  // namespace

GridFn2D s_plus_quadratic_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q, double t, const HopfLaxOptions& opt) {
    check_increment(t, t_min_2d(u0, Q));
    return sup_convolve_2d(u0, Q, t, opt.maximization);
}

GridFn2D s_minus_quadratic_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q, double t, const HopfLaxOptions& opt) {
    check_increment(t, t_min_2d(u0, Q));
    return negate2d(sup_convolve_2d(negate2d(u0), Q, t, opt.maximization));
}

}  // namespace hjlab
