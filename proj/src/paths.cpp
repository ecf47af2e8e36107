#include "hjlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "hjlab/grid.hpp"

namespace hjlab {

Path::Path(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() < 2) throw std::invalid_argument("path: need at least two samples");
    if (times_.size() != values_.size()) throw std::invalid_argument("path: times and values differ in length");
    if (times_[0] != 0.0) throw std::invalid_argument("path: first time must be 0");
    if (values_[0] != 0.0) throw std::invalid_argument("path: zeta(0) must be 0");
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!std::isfinite(times_[k]) || !std::isfinite(values_[k]))
            throw std::invalid_argument("path: non-finite sample");
        if (k > 0 && !(times_[k] > times_[k - 1])) throw std::invalid_argument("path: times not strictly increasing");
    }
}

double Path::operator()(double t) const {
    const double eps = 1e-12 * std::max(1.0, T());
    if (t < -eps || t > T() + eps) throw std::out_of_range("path: time " + fmt17(t) + " outside [0, T]");
    if (t <= 0) return values_.front();
    if (t >= T()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin());
    const double t0 = times_[k - 1], t1 = times_[k];
    const double w = (t - t0) / (t1 - t0);
    return (1 - w) * values_[k - 1] + w * values_[k];
}

Path Path::restrict(double T) const {
    if (!(T > 0) || T > this->T() * (1 + 1e-12)) throw std::invalid_argument("path: restrict time outside (0, T]");
    std::vector<double> t, v;
    for (std::size_t k = 0; k < times_.size() && times_[k] < T; ++k) {
        t.push_back(times_[k]);
        v.push_back(values_[k]);
    }
    t.push_back(T);
    v.push_back((*this)(T));
    return Path(std::move(t), std::move(v));
}

Path piecewise_linear(const std::vector<std::pair<double, double>>& points) {
    std::vector<double> t, v;
    for (const auto& [a, b] : points) {
        t.push_back(a);
        v.push_back(b);
    }
    return Path(std::move(t), std::move(v));
}

Path sample_brownian(std::uint64_t seed, double T, double dt) {
    if (!(dt > 0) || !(T > 0) || dt > T * (1 + 1e-12)) throw std::invalid_argument("brownian: need 0 < dt <= T");
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> t(steps + 1), v(steps + 1);
    t[0] = 0;
    v[0] = 0;
    for (std::size_t k = 1; k <= steps; ++k) {
        t[k] = k == steps ? T : k * dt;
        v[k] = v[k - 1] + std::sqrt(t[k] - t[k - 1]) * normal(gen);
    }
    return Path(std::move(t), std::move(v));
}

namespace {

Path running(const Path& p, int sign) {
    const auto& ts = p.times();
    const auto& vs = p.values();
    std::vector<double> t{0.0}, v{0.0};
    double cur = 0.0;
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const double a = sign * vs[k - 1], b = sign * vs[k];
        if (b > cur) {
            if (a < cur) {
                const double tc = ts[k - 1] + (cur - a) / (b - a) * (ts[k] - ts[k - 1]);
                if (tc > t.back()) {
                    t.push_back(tc);
                    v.push_back(sign * cur);
                }
            }
            cur = b;
        }
        t.push_back(ts[k]);
        v.push_back(sign * cur);
    }
    return Path(std::move(t), std::move(v));
}

}  // namespace

RunningExtrema running_extrema(const Path& p) { return {running(p, +1), running(p, -1)}; }

double default_merge_tol(const Path& p) {
    const auto [lo, hi] = std::minmax_element(p.values().begin(), p.values().end());
    return 1e-12 * (*hi - *lo);
}

std::vector<MonotoneSegment> monotone_segments(const Path& p) { return monotone_segments(p, default_merge_tol(p)); }

std::vector<MonotoneSegment> monotone_segments(const Path& p, double merge_tol) {
    if (!(merge_tol >= 0)) throw std::invalid_argument("monotone_segments: merge_tol must be >= 0");
    const auto& ts = p.times();
    const auto& vs = p.values();
    const std::size_t n = ts.size();
    std::vector<MonotoneSegment> out;
    auto emit = [&](std::size_t a, std::size_t b, int dir) {
        out.push_back({ts[a], ts[b], dir > 0 ? Direction::up : Direction::down, std::abs(vs[b] - vs[a]), vs[a], vs[b]});
    };
    std::size_t start = 0, ext = 0;
    int dir = 0;
    for (std::size_t k = 1; k < n; ++k) {
        const double v = vs[k];
        if (dir == 0) {
            if (v - vs[start] > merge_tol) dir = 1, ext = k;
            else if (vs[start] - v > merge_tol) dir = -1, ext = k;
        } else if (dir * (v - vs[ext]) > 0) {
            ext = k;
        } else if (dir * (vs[ext] - v) > merge_tol) {
            emit(start, ext, dir);
            start = ext;
            dir = -dir;
            ext = k;
        }
    }
    // the last segment absorbs the sub-tolerance tail so segments tile [0, T]
    if (dir != 0) emit(start, n - 1, dir);
    return out;
}

Skeleton skeleton(const Path& p, double T) {
    const Path q = T >= p.T() ? p : p.restrict(T);
    const auto& ts = q.times();
    const auto& vs = q.values();
    const std::size_t n = ts.size();

    auto arg_extreme = [&](std::size_t a, std::size_t b, bool want_max) {
        std::size_t best = a;
        for (std::size_t k = a + 1; k <= b; ++k)
            if (want_max ? vs[k] > vs[best] : vs[k] < vs[best]) best = k;
        return best;  // earliest attaining index
    };

    std::size_t last_max = 0, last_min = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (vs[k] >= vs[last_max]) last_max = k;
        if (vs[k] <= vs[last_min]) last_min = k;
    }
    std::vector<std::size_t> idx;
    if (vs[last_max] == vs[last_min]) {
        idx = {0, n - 1};  // constant path
    } else {
        const std::size_t i0 = std::max(last_max, last_min);
        const bool max0 = i0 == last_max;

        std::vector<std::size_t> back;
        std::size_t cur = i0;
        bool is_max = max0;
        while (cur > 0) {
            const std::size_t prev = arg_extreme(0, cur, !is_max);
            if (prev == cur) break;
            back.push_back(prev);
            cur = prev;
            is_max = !is_max;
        }
        std::reverse(back.begin(), back.end());
        if (back.empty() || back.front() != 0) {
            if (i0 != 0) idx.push_back(0);
        }
        idx.insert(idx.end(), back.begin(), back.end());
        idx.push_back(i0);

        cur = i0;
        is_max = max0;
        while (cur < n - 1) {
            const std::size_t next = arg_extreme(cur, n - 1, !is_max);
            if (next == cur) break;
            idx.push_back(next);
            cur = next;
            is_max = !is_max;
        }
        if (idx.back() != n - 1) idx.push_back(n - 1);
    }

    std::vector<double> rt, rv;
    for (std::size_t k : idx) {
        rt.push_back(ts[k]);
        rv.push_back(vs[k]);
    }
    Skeleton s{Path(rt, rv), rt};
    return s;
}

double total_variation(const Path& p) {
    double tv = 0;
    for (std::size_t k = 1; k < p.size(); ++k) tv += std::abs(p.values()[k] - p.values()[k - 1]);
    return tv;
}

void write_csv(std::ostream& os, const Path& p) {
    os << "t,zeta\n";
    for (std::size_t k = 0; k < p.size(); ++k) os << fmt17(p.times()[k]) << ',' << fmt17(p.values()[k]) << '\n';
}

void write_csv(const std::string& file, const Path& p) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot write " + file);
    write_csv(os, p);
}

}  // namespace hjlab
