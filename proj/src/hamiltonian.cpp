#include "hjlab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hjlab {

ConjugateResult legendre_conjugate(const std::vector<double>& p, const std::vector<double>& hp,
                                   const std::vector<double>& q) {
    const std::size_t m = p.size();
    if (m < 2 || hp.size() != m) throw std::invalid_argument("legendre_conjugate: need >= 2 slope samples");
    for (std::size_t j = 1; j < m; ++j)
        if (!(p[j] > p[j - 1])) throw std::invalid_argument("legendre_conjugate: slopes not increasing");

    const double lo_chord = (hp[1] - hp[0]) / (p[1] - p[0]);
    const double hi_chord = (hp[m - 1] - hp[m - 2]) / (p[m - 1] - p[m - 2]);

    std::vector<std::size_t> order(q.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });

    ConjugateResult res;
    res.values.assign(q.size(), 0.0);
    res.clamped.assign(q.size(), 0);
    std::size_t j = 0;
    for (std::size_t k : order) {
        const double qk = q[k];
        // maximizer of p q - H(p) is nondecreasing in q for convex samples
        while (j + 1 < m && p[j + 1] * qk - hp[j + 1] >= p[j] * qk - hp[j]) ++j;
        res.values[k] = p[j] * qk - hp[j];
        if (qk < lo_chord || qk > hi_chord) {
            res.clamped[k] = 1;
            ++res.n_clamped;
        }
    }
    return res;
}

ConvexityBounds estimate_convexity_bounds(const std::function<double(double)>& f, double P, int m) {
    if (m < 64) throw std::invalid_argument("estimate_convexity_bounds: m must be >= 64");
    if (!(P > 0)) throw std::invalid_argument("estimate_convexity_bounds: P must be positive");
    const double dp = 2 * P / m;
    double lo = INFINITY, hi = -INFINITY;
    for (int j = 0; j <= m; ++j) {
        const double p = -P + j * dp;
        const double d2 = (f(p + dp) - 2 * f(p) + f(p - dp)) / (dp * dp);
        lo = std::min(lo, d2);
        hi = std::max(hi, d2);
    }
    if (!(lo > 0)) throw std::invalid_argument("not uniformly convex on requested range");
    return {lo, hi};
}

static void check_range(double P, int m) {
    if (!(P > 0) || !std::isfinite(P)) throw std::invalid_argument("hamiltonian: slope range P must be positive");
    if (m < 64 || m % 2 != 0) throw std::invalid_argument("hamiltonian: resolution m must be even and >= 64");
}

Hamiltonian Hamiltonian::quadratic(double a, double P, int m) {
    if (!(a > 0)) throw std::invalid_argument("quadratic: a must be positive");
    return custom("quadratic(" + std::to_string(a) + ")", [a](double p) { return a * p * p / 2; }, P, m, true);
}

Hamiltonian Hamiltonian::quartic(double a, double b, double P, int m) {
    if (!(a > 0) || b < 0) throw std::invalid_argument("quartic: need a > 0 and b >= 0");
    return custom("quartic(" + std::to_string(a) + "," + std::to_string(b) + ")",
                  [a, b](double p) { return a * p * p / 2 + b * p * p * p * p / 4; }, P, m, true);
}

Hamiltonian Hamiltonian::abs(double P) {
    check_range(P, 64);
    Hamiltonian h;
    h.id_ = "abs";
    h.kind_ = Kind::abs;
    h.even_ = true;
    h.f_ = [](double p) { return std::abs(p); };
    h.P_ = P;
    h.vmax_ = 1.0;
    return h;
}

Hamiltonian Hamiltonian::linear(double v, double P) {
    check_range(P, 64);
    if (!std::isfinite(v) || v == 0) throw std::invalid_argument("linear: velocity must be nonzero");
    Hamiltonian h;
    h.id_ = "linear(" + std::to_string(v) + ")";
    h.kind_ = Kind::linear;
    h.f_ = [v](double p) { return v * p; };
    h.P_ = P;
    h.vmax_ = std::abs(v);
    return h;
}

Hamiltonian Hamiltonian::custom(std::string id, std::function<double(double)> f, double P, int m, bool even) {
    check_range(P, m);
    Hamiltonian h;
    h.id_ = std::move(id);
    h.f_ = std::move(f);
    h.even_ = even;
    h.P_ = P;
    h.m_ = m;
    h.build_tables();
    return h;
}

void Hamiltonian::build_tables() {
    const double dp = 2 * P_ / m_;
    p_.resize(m_ + 1);
    std::vector<double> hv(m_ + 1);
    hpp_.resize(m_ + 1);
    for (int j = 0; j <= m_; ++j) {
        p_[j] = (j - m_ / 2) * dp;
        hv[j] = f_(p_[j]);
        hpp_[j] = (f_(p_[j] + dp) - 2 * hv[j] + f_(p_[j] - dp)) / (dp * dp);
        if (!std::isfinite(hv[j])) throw std::invalid_argument(id_ + ": non-finite value on slope range");
    }
    argmin_ = p_[std::min_element(hv.begin(), hv.end()) - hv.begin()];
    theta_ = *std::min_element(hpp_.begin(), hpp_.end());
    Theta_ = *std::max_element(hpp_.begin(), hpp_.end());
    if (!(theta_ > 0)) throw std::invalid_argument(id_ + ": not uniformly convex on requested range");

    const double dplus = (f_(P_ + dp) - f_(P_ - dp)) / (2 * dp);
    const double dminus = (f_(-P_ + dp) - f_(-P_ - dp)) / (2 * dp);
    vmax_ = std::max(std::abs(dplus), std::abs(dminus));
    tol_conj_ = Theta_ * dp * dp;

    dq_ = 2 * vmax_ / m_;
    q_.resize(m_ + 1);
    for (int j = 0; j <= m_; ++j) q_[j] = (j - m_ / 2) * dq_;
    l_ = legendre_conjugate(p_, hv, q_).values;
}

double Hamiltonian::lipschitz() const {
    if (kind_ == Kind::abs) return 1.0;
    return vmax_;
}

double Hamiltonian::L(double q) const {
    if (kind_ != Kind::convex) throw std::logic_error(id_ + ": no conjugate table for degenerate Hamiltonian");
    if (even_) q = std::abs(q);
    const double qlo = q_.front(), qhi = q_.back();
    if (q >= qhi) return l_.back() + P_ * (q - qhi);
    if (q <= qlo) return l_.front() - P_ * (q - qlo);
    const double s = (q - qlo) / dq_;
    std::size_t j = static_cast<std::size_t>(s);
    if (j >= l_.size() - 1) j = l_.size() - 2;
    const double w = s - j;
    return (1 - w) * l_[j] + w * l_[j + 1];
}

double Hamiltonian::curvature(double p) const {
    if (kind_ != Kind::convex) throw std::logic_error(id_ + ": degenerate convexity");
    const double dp = 2 * P_ / m_;
    p = std::clamp(p, -P_, P_);
    const double s = (p + P_) / dp;
    std::size_t j = static_cast<std::size_t>(s);
    if (j >= hpp_.size() - 1) j = hpp_.size() - 2;
    const double w = s - j;
    return (1 - w) * hpp_[j] + w * hpp_[j + 1];
}

double Hamiltonian::biconjugate_error() const {
    if (kind_ != Kind::convex) throw std::logic_error(id_ + ": degenerate convexity");
    const auto back = legendre_conjugate(q_, l_, p_).values;
    double err = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j) err = std::max(err, std::abs(back[j] - f_(p_[j])));
    return err;
}

QuadraticHamiltonian2D::QuadraticHamiltonian2D(double a11, double a12, double a22)
    : a11_(a11), a12_(a12), a22_(a22) {
    if (!(a11 > 0) || !(a11 * a22 - a12 * a12 > 0))
        throw std::invalid_argument("quadratic2d: A must be symmetric positive definite");
}

double QuadraticHamiltonian2D::operator()(double p1, double p2) const {
    return a11_ * p1 * p1 + 2 * a12_ * p1 * p2 + a22_ * p2 * p2;
}

double QuadraticHamiltonian2D::lambda_max() const {
    const double m = (a11_ + a22_) / 2;
    const double r = std::hypot((a11_ - a22_) / 2, a12_);
    return m + r;
}

std::array<double, 4> QuadraticHamiltonian2D::sqrt_hessian() const {
    // sqrt of the SPD matrix M = 2A via (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M))
    const double m11 = 2 * a11_, m12 = 2 * a12_, m22 = 2 * a22_;
    const double s = std::sqrt(m11 * m22 - m12 * m12);
    const double t = std::sqrt(m11 + m22 + 2 * s);
    return {(m11 + s) / t, m12 / t, m12 / t, (m22 + s) / t};
}

double conjugate_quadratic_2d(const QuadraticHamiltonian2D& Q, double q1, double q2) {
    const double det = Q.a11() * Q.a22() - Q.a12() * Q.a12();
    // A^{-1} = [a22 -a12; -a12 a11] / det
    const double quad = (Q.a22() * q1 * q1 - 2 * Q.a12() * q1 * q2 + Q.a11() * q2 * q2) / det;
    return quad / 4;
}

}  // namespace hjlab
