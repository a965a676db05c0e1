#include "coldstart/grid.hpp"

#include <cassert>
#include <cmath>

#include "coldstart/errors.hpp"

namespace coldstart::nn {

Grid::Grid(int channels, int time) : channels_(channels), time_(time) {
  if (channels < 0 || time < 0) throw ShapeError("Grid: negative dimension");
  data_.assign(static_cast<std::size_t>(channels) * static_cast<std::size_t>(time), 0.0);
}

void Grid::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Grid::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void debug_check_finite([[maybe_unused]] const Grid& g, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
  assert(g.all_finite() && where);
#endif
}

}  // namespace coldstart::nn
