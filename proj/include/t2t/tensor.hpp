#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace t2t::autodiff {

// Dense row-major matrix of doubles; vectors are single-column. Plain
// value type — operations that record derivatives live on the Tape.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

std::string shape_string(const Tensor& t);

// True iff every entry is finite.
bool all_finite(const Tensor& t);

// Throws NonFiniteValue naming `what` when a NaN/Inf is present.
void require_finite(const Tensor& t, const char* what);

}  // namespace t2t::autodiff
