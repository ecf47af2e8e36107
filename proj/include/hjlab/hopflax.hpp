#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/hamiltonian.hpp"

namespace hjlab {

// Raised when an operator refuses an increment; the CLI maps it to exit code 3.
class SolverRefusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Maximization {
    grid_nodes,  // max over nodes only: exactly monotone and contractive
    eno,         // node argmax refined by a stencil-selected local quadratic
};

struct HopfLaxOptions {
    Maximization maximization = Maximization::eno;
};

Maximization parse_maximization(const std::string& s);
std::string to_string(Maximization m);

double t_min(const Hamiltonian& H, const PeriodicGrid1D& grid);

// u_t = H(u_x):  sup_y [u0(y) - t L((y - x)/t)]
GridFn s_plus(const GridFn& u0, const Hamiltonian& H, double t, const HopfLaxOptions& opt = {});
// u_t = -H(u_x): inf_y [u0(y) + t L((x - y)/t)]
GridFn s_minus(const GridFn& u0, const Hamiltonian& H, double t, const HopfLaxOptions& opt = {});
// dispatch on sign: +1 -> s_plus, -1 -> s_minus
GridFn hopf_lax(const GridFn& u0, const Hamiltonian& H, double t, int sign, const HopfLaxOptions& opt = {});

class GridFn2D {
public:
    GridFn2D(int n1, int n2, double period1, double period2, std::vector<double> values);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    double period1() const { return period1_; }
    double period2() const { return period2_; }
    double h1() const { return period1_ / n1_; }
    double h2() const { return period2_ / n2_; }
    double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * n2_ + j]; }
    double at(long long i, long long j) const;
    const std::vector<double>& values() const { return values_; }
    double max() const;
    double min() const;

private:
    int n1_, n2_;
    double period1_, period2_;
    std::vector<double> values_;
};

template <class F>
GridFn2D sample2d(F f, int n1, int n2, double period1, double period2) {
    std::vector<double> v(static_cast<std::size_t>(n1) * n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) v[static_cast<std::size_t>(i) * n2 + j] = f(i * period1 / n1, j * period2 / n2);
    return GridFn2D(n1, n2, period1, period2, std::move(v));
}

double lipschitz_constant(const GridFn2D& u);
double sup_distance(const GridFn2D& a, const GridFn2D& b);
double t_min_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q);

GridFn2D s_plus_quadratic_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q, double t,
                             const HopfLaxOptions& opt = {});
GridFn2D s_minus_quadratic_2d(const GridFn2D& u0, const QuadraticHamiltonian2D& Q, double t,
                              const HopfLaxOptions& opt = {});

}  // namespace hjlab
