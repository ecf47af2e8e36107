#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hjlab {

// Uniform periodic grid, nodes at x_i = i*h.
class PeriodicGrid1D {
public:
    PeriodicGrid1D(int n, double period);

    int n() const { return n_; }
    double period() const { return period_; }
    double h() const { return period_ / n_; }
    double x(int i) const { return i * h(); }
    int wrap(long long i) const;

    bool operator==(const PeriodicGrid1D& o) const { return n_ == o.n_ && period_ == o.period_; }

private:
    int n_;
    double period_;
};

class GridFn {
public:
    GridFn(PeriodicGrid1D grid, std::vector<double> values);

    const PeriodicGrid1D& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    int size() const { return grid_.n(); }
    double operator[](int i) const { return values_[i]; }
    // periodic access
    double at(long long i) const { return values_[grid_.wrap(i)]; }

    double max() const;
    double min() const;
    double sup_norm() const;

private:
    PeriodicGrid1D grid_;
    std::vector<double> values_;
};

GridFn sample(const std::function<double(double)>& f, const PeriodicGrid1D& grid);
GridFn constant(double c, const PeriodicGrid1D& grid);

GridFn gradient_forward(const GridFn& u);
GridFn gradient_centered(const GridFn& u);
GridFn second_difference(const GridFn& u);
GridFn shift(const GridFn& u, int s);
GridFn negate(const GridFn& u);

double oscillation(const GridFn& u);
double lipschitz_constant(const GridFn& u);
double sup_distance(const GridFn& a, const GridFn& b);
// sup (a - b)_+
double sup_positive_part(const GridFn& a, const GridFn& b);

void write_csv(std::ostream& os, const GridFn& u);
void write_csv(const std::string& path, const GridFn& u);
GridFn read_csv(const std::string& path, double period);

// shared number formatting for all CSV/JSON writers
std::string fmt17(double v);

}  // namespace hjlab
