#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hjlab {

// Continuous driving signal, piecewise linear between samples, zeta(0) = 0.
class Path {
public:
    Path(std::vector<double> times, std::vector<double> values);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return times_.size(); }
    double T() const { return times_.back(); }
    double operator()(double t) const;
    // the path on [0, T], with an interpolated sample at T
    Path restrict(double T) const;

private:
    std::vector<double> times_, values_;
};

Path piecewise_linear(const std::vector<std::pair<double, double>>& points);
Path sample_brownian(std::uint64_t seed, double T, double dt);

struct RunningExtrema {
    Path M;  // running maximum
    Path m;  // running minimum
};
RunningExtrema running_extrema(const Path& p);

enum class Direction { up, down };

struct MonotoneSegment {
    double t_start, t_end;
    Direction direction;
    double increment;  // |zeta_end - zeta_start| > 0
    double zeta_start, zeta_end;
    int sign() const { return direction == Direction::up ? 1 : -1; }
};

double default_merge_tol(const Path& p);
std::vector<MonotoneSegment> monotone_segments(const Path& p, double merge_tol);
std::vector<MonotoneSegment> monotone_segments(const Path& p);

struct Skeleton {
    Path reduced;
    std::vector<double> tau;
};
Skeleton skeleton(const Path& p, double T);

double total_variation(const Path& p);

void write_csv(std::ostream& os, const Path& p);
void write_csv(const std::string& file, const Path& p);

}  // namespace hjlab
