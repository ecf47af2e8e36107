#include "hjlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hjlab {

PeriodicGrid1D::PeriodicGrid1D(int n, double period) : n_(n), period_(period) {
    if (n < 8) throw std::invalid_argument("grid: n must be >= 8, got " + std::to_string(n));
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("grid: period must be positive and finite");
}

int PeriodicGrid1D::wrap(long long i) const {
    long long r = i % n_;
    if (r < 0) r += n_;
    return static_cast<int>(r);
}

GridFn::GridFn(PeriodicGrid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.n())
        throw std::invalid_argument("GridFn: expected " + std::to_string(grid_.n()) +
                                    " values, got " + std::to_string(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw std::invalid_argument("GridFn: non-finite value at node " + std::to_string(i));
}

double GridFn::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFn::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFn::sup_norm() const { return std::max(std::abs(max()), std::abs(min())); }

GridFn sample(const std::function<double(double)>& f, const PeriodicGrid1D& grid) {
    std::vector<double> v(grid.n());
    for (int i = 0; i < grid.n(); ++i) v[i] = f(grid.x(i));
    return GridFn(grid, std::move(v));
}

GridFn constant(double c, const PeriodicGrid1D& grid) {
    return GridFn(grid, std::vector<double>(grid.n(), c));
}

GridFn gradient_forward(const GridFn& u) {
    const int n = u.size();
    const double h = u.grid().h();
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = (u.at(i + 1) - u[i]) / h;
    return GridFn(u.grid(), std::move(r));
}

GridFn gradient_centered(const GridFn& u) {
    const int n = u.size();
    const double h = u.grid().h();
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = (u.at(i + 1) - u.at(i - 1)) / (2 * h);
    return GridFn(u.grid(), std::move(r));
}

GridFn second_difference(const GridFn& u) {
    const int n = u.size();
    const double h2 = u.grid().h() * u.grid().h();
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = (u.at(i + 1) - 2 * u[i] + u.at(i - 1)) / h2;
    return GridFn(u.grid(), std::move(r));
}

GridFn shift(const GridFn& u, int s) {
    std::vector<double> r(u.size());
    for (int i = 0; i < u.size(); ++i) r[i] = u.at(static_cast<long long>(i) + s);
    return GridFn(u.grid(), std::move(r));
}

GridFn negate(const GridFn& u) {
    std::vector<double> r(u.values());
    for (double& x : r) x = -x;
    return GridFn(u.grid(), std::move(r));
}

double oscillation(const GridFn& u) { return u.max() - u.min(); }

double lipschitz_constant(const GridFn& u) {
    double best = 0.0;
    for (int i = 0; i < u.size(); ++i) best = std::max(best, std::abs(u.at(i + 1) - u[i]));
    return best / u.grid().h();
}

static void check_same(const GridFn& a, const GridFn& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("grid functions live on different grids");
}

double sup_distance(const GridFn& a, const GridFn& b) {
    check_same(a, b);
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double sup_positive_part(const GridFn& a, const GridFn& b) {
    check_same(a, b);
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) d = std::max(d, a[i] - b[i]);
    return d;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const GridFn& u) {
    os << "x,value\n";
    for (int i = 0; i < u.size(); ++i) os << fmt17(u.grid().x(i)) << ',' << fmt17(u[i]) << '\n';
}

void write_csv(const std::string& path, const GridFn& u) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_csv(os, u);
}

GridFn read_csv(const std::string& path, double period) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(is, line);
    if (line != "x,value") throw std::invalid_argument(path + ": expected header x,value");
    std::vector<double> v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument(path + ": malformed row");
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    const PeriodicGrid1D grid(static_cast<int>(v.size()), period);
    return GridFn(grid, std::move(v));
}

}  // namespace hjlab
