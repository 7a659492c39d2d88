#include "gtdd/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "gtdd/errors.hpp"

namespace gtdd {

TimeGrid::TimeGrid(std::vector<double> points) : t_(std::move(points)) {
  if (t_.size() < 2)
    throw InvalidGrid("time grid needs at least two points");
  if (t_.front() != 0.0)
    throw InvalidGrid("time grid must start at 0");
  for (size_t i = 0; i + 1 < t_.size(); ++i)
    if (!(t_[i] < t_[i + 1]))
      throw InvalidGrid("time grid points must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double horizon, int intervals) {
  if (intervals < 1 || !(horizon > 0))
    throw InvalidGrid("uniform time grid needs horizon > 0 and >= 1 interval");
  std::vector<double> t(intervals + 1);
  for (int m = 0; m <= intervals; ++m)
    t[m] = horizon * static_cast<double>(m) / intervals;
  t.back() = horizon;
  return TimeGrid(std::move(t));
}

bool TimeGrid::same_horizon(const TimeGrid& other) const {
  const double tol = kCoincidenceTol * std::max(horizon(), other.horizon());
  return std::abs(horizon() - other.horizon()) <= tol;
}

bool TimeGrid::conforming_with(const TimeGrid& other) const {
  if (intervals() != other.intervals()) return false;
  const double tol = kCoincidenceTol * std::max(horizon(), other.horizon());
  for (size_t i = 0; i < t_.size(); ++i)
    if (std::abs(t_[i] - other.t_[i]) > tol) return false;
  return true;
}

TimeGrid TimeGrid::refined() const {
  std::vector<double> t;
  t.reserve(2 * t_.size());
  for (size_t i = 0; i + 1 < t_.size(); ++i) {
    t.push_back(t_[i]);
    t.push_back(0.5 * (t_[i] + t_[i + 1]));
  }
  t.push_back(t_.back());
  return TimeGrid(std::move(t));
}

TimeSeries::TimeSeries(TimeGrid grid, int width, double fill)
    : grid_(std::move(grid)), width_(width),
      v_(static_cast<size_t>(grid_.intervals()) * width, fill) {}

double TimeSeries::l2_norm() const {
  double s = 0.0;
  for (int m = 0; m < intervals(); ++m) {
    double row2 = 0.0;
    for (int k = 0; k < width_; ++k) row2 += at(m, k) * at(m, k);
    s += grid_.dt(m) * row2;
  }
  return std::sqrt(s);
}

double TimeSeries::integral(int k) const {
  double s = 0.0;
  for (int m = 0; m < intervals(); ++m) s += grid_.dt(m) * at(m, k);
  return s;
}

TimeSeries project(const TimeSeries& src, const TimeGrid& dst) {
  const TimeGrid& sg = src.grid();
  if (!sg.same_horizon(dst))
    throw GridMismatch("projection requires grids over the same horizon");
  if (sg.conforming_with(dst)) { // identity, exact
    TimeSeries out(dst, src.width());
    out.raw() = src.raw();
    return out;
  }

  const int W = src.width();
  TimeSeries out(dst, W);
  const auto& s = sg.points();
  const int Ms = sg.intervals();
  int l = 0;
  for (int m = 0; m < dst.intervals(); ++m) {
    const double a = dst.t_begin(m), b = dst.t_end(m);
    while (l + 1 < Ms && s[l + 1] <= a) ++l;
    auto dstrow = out.row(m);
    if (s[l] <= a && s[l + 1] >= b) {
      // single source interval covers the target: copy, bitwise exact
      auto srow = src.row(l);
      for (int j = 0; j < W; ++j) dstrow[j] = srow[j];
      continue;
    }
    for (int k = l; k < Ms; ++k) {
      const double ov = std::min(b, s[k + 1]) - std::max(a, s[k]);
      if (ov > 0) {
        auto srow = src.row(k);
        for (int j = 0; j < W; ++j) dstrow[j] += ov * srow[j];
      }
      if (s[k + 1] >= b) break;
    }
    const double inv = 1.0 / (b - a);
    for (int j = 0; j < W; ++j) dstrow[j] *= inv;
  }
  return out;
}

std::pair<double, double> projection_defect(const TimeSeries& series, const TimeGrid& dst) {
  TimeSeries proj = project(series, dst);
  const double norm_defect = proj.l2_norm() - series.l2_norm();
  double int_defect = 0.0;
  for (int k = 0; k < series.width(); ++k)
    int_defect = std::max(int_defect, std::abs(proj.integral(k) - series.integral(k)));
  return {norm_defect, int_defect};
}

} // namespace gtdd
