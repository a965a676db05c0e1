#pragma once

#include <span>
#include <vector>

namespace coldstart::nn {

/// Dense rank-2 numeric array, channels x time, row-major (one channel's
/// full time line is contiguous). This is the currency of the NN kernel;
/// batches are represented as std::vector<Grid>.
class Grid {
 public:
  Grid() = default;
  Grid(int channels, int time);

  double& at(int c, int t) { return data_[static_cast<std::size_t>(c) * time_ + t]; }
  double at(int c, int t) const { return data_[static_cast<std::size_t>(c) * time_ + t]; }

  int channels() const { return channels_; }
  int time() const { return time_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * time_; }
  const double* channel(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * time_;
  }

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Grid&) const = default;

 private:
  int channels_ = 0;
  int time_ = 0;
  std::vector<double> data_;
};

/// Aborts (assert) on non-finite values in debug builds; no-op in release.
void debug_check_finite(const Grid& g, const char* where);

}  // namespace coldstart::nn
