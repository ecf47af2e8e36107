#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace hjlab {

struct ConjugateResult {
    std::vector<double> values;
    std::vector<char> clamped;  // query outside the chord-slope range
    int n_clamped = 0;
};

// L(q) = max_j (p_j q - H_j) over the sampled slopes, all queries at once.
// p must be strictly increasing; queries may come in any order.
ConjugateResult legendre_conjugate(const std::vector<double>& p, const std::vector<double>& hp,
                                   const std::vector<double>& q);

struct ConvexityBounds {
    double theta;
    double Theta;
};

// min/max of the centered second difference of f on the m-cell grid over [-P, P]
ConvexityBounds estimate_convexity_bounds(const std::function<double(double)>& f, double P, int m);

class Hamiltonian {
public:
    enum class Kind { convex, abs, linear };

    static Hamiltonian quadratic(double a, double P, int m = 65536);
    static Hamiltonian quartic(double a, double b, double P, int m = 65536);
    static Hamiltonian abs(double P);
    static Hamiltonian linear(double v, double P);
    static Hamiltonian custom(std::string id, std::function<double(double)> f, double P, int m = 65536,
                              bool even = false);

    const std::string& id() const { return id_; }
    Kind kind() const { return kind_; }
    bool degenerate() const { return kind_ != Kind::convex; }
    bool even() const { return even_; }

    double operator()(double p) const { return f_(p); }
    double slope_range() const { return P_; }
    int resolution() const { return m_; }
    double theta() const { return theta_; }
    double Theta() const { return Theta_; }
    double vmax() const { return vmax_; }
    double tol_conj() const { return tol_conj_; }
    // Lipschitz constant of H on the slope range
    double lipschitz() const;
    // minimizer of H over the slope nodes
    double argmin() const { return argmin_; }

    // tabulated conjugate with linear interpolation; slopes +-P beyond the table
    double L(double q) const;
    // H'' from the second-difference table, p clamped to [-P, P]
    double curvature(double p) const;

    const std::vector<double>& velocity_nodes() const { return q_; }
    const std::vector<double>& conjugate_table() const { return l_; }
    const std::vector<double>& slope_nodes() const { return p_; }

    // max |H(p_j) - L*(p_j)| re-conjugating the table at the slope nodes
    double biconjugate_error() const;

private:
    Hamiltonian() = default;
    void build_tables();

    std::string id_;
    Kind kind_ = Kind::convex;
    bool even_ = false;
    std::function<double(double)> f_;
    double P_ = 1.0;
    int m_ = 0;
    double theta_ = 0.0, Theta_ = 0.0;
    double vmax_ = 0.0;
    double argmin_ = 0.0;
    double tol_conj_ = 0.0;
    std::vector<double> p_, hpp_;
    std::vector<double> q_, l_;
    double dq_ = 0.0;
};

// H(p) = (Ap, p) on R^2
class QuadraticHamiltonian2D {
public:
    QuadraticHamiltonian2D(double a11, double a12, double a22);

    double a11() const { return a11_; }
    double a12() const { return a12_; }
    double a22() const { return a22_; }
    double operator()(double p1, double p2) const;
    double lambda_max() const;
    // F = sqrt(D^2 H) = sqrt(2A), symmetric 2x2 stored row-major
    std::array<double, 4> sqrt_hessian() const;

private:
    double a11_, a12_, a22_;
};

double conjugate_quadratic_2d(const QuadraticHamiltonian2D& Q, double q1, double q2);

}  // namespace hjlab
