#include "t2t/tensor.hpp"

#include <cmath>

#include "t2t/errors.hpp"

namespace t2t::autodiff {

std::string shape_string(const Tensor& t) {
  return "(" + std::to_string(t.rows) + "," + std::to_string(t.cols) + ")";
}

bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_finite(const Tensor& t, const char* what) {
  if (!all_finite(t))
    throw NonFiniteValue(std::string(what) + " contains a NaN or Inf");
}

}  // namespace t2t::autodiff
