#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gtdd {

/// Partition of (0,T) into intervals J_m = (t_{m-1}, t_m], m = 1..M.
class TimeGrid {
public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> points);
  static TimeGrid uniform(double horizon, int intervals);

  int intervals() const { return static_cast<int>(t_.size()) - 1; }
  double horizon() const { return t_.back(); }
  double dt(int m) const { return t_[m + 1] - t_[m]; }
  double t_begin(int m) const { return t_[m]; }
  double t_end(int m) const { return t_[m + 1]; }
  const std::vector<double>& points() const { return t_; }

  /// Relative tolerance used when deciding two breakpoints coincide.
  static constexpr double kCoincidenceTol = 1e-13;

  bool same_horizon(const TimeGrid& other) const;
  bool conforming_with(const TimeGrid& other) const;

  /// Grid with every interval split in two.
  TimeGrid refined() const;

private:
  std::vector<double> t_{0.0};
};

/// Piecewise-constant-in-time values on a TimeGrid; one row of `width`
/// doubles per interval.
class TimeSeries {
public:
  TimeSeries() = default;
  TimeSeries(TimeGrid grid, int width, double fill = 0.0);

  const TimeGrid& grid() const { return grid_; }
  int width() const { return width_; }
  int intervals() const { return grid_.intervals(); }

  double& at(int m, int k) { return v_[static_cast<size_t>(m) * width_ + k]; }
  double at(int m, int k) const { return v_[static_cast<size_t>(m) * width_ + k]; }
  std::span<double> row(int m) { return {v_.data() + static_cast<size_t>(m) * width_, static_cast<size_t>(width_)}; }
  std::span<const double> row(int m) const { return {v_.data() + static_cast<size_t>(m) * width_, static_cast<size_t>(width_)}; }
  std::vector<double>& raw() { return v_; }
  const std::vector<double>& raw() const { return v_; }

  double l2_norm() const;       // sqrt(sum_m dt_m sum_k v^2)
  double integral(int k) const; // sum_m dt_m v_{m,k}

private:
  TimeGrid grid_;
  int width_ = 0;
  std::vector<double> v_;
};

/// L2-in-time projection of a piecewise-constant series onto another grid
/// over the same horizon: output interval holds the average of the input
/// over that interval. Single merged sweep over the union of breakpoints.
TimeSeries project(const TimeSeries& src, const TimeGrid& dst);

/// Defects of the projection from `series.grid()` onto `dst`:
/// first = ||proj||_L2 - ||series||_L2 (<= 0 up to roundoff),
/// second = max_k |int proj_k - int series_k|.
std::pair<double, double> projection_defect(const TimeSeries& series, const TimeGrid& dst);

} // namespace gtdd
