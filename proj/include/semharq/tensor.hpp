#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace semharq {

// Dense row-major tensor of doubles. Graph tensors are rank 2, biases are
// rank 1 (indexed via size()), losses are scalars of shape {1}.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::vector<size_t> s, std::vector<double> values)
      : shape(std::move(s)), v(std::move(values)) {
    if (v.size() != count(shape)) throw std::invalid_argument("value count mismatch");
  }

  static size_t count(const std::vector<size_t>& s) {
    return std::accumulate(s.begin(), s.end(), size_t{1}, std::multiplies<>());
  }

  static Tensor zeros(std::vector<size_t> s) {
    size_t n = count(s);
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
  }

  static Tensor full(std::vector<size_t> s, double value) {
    size_t n = count(s);
    return Tensor(std::move(s), std::vector<double>(n, value));
  }

  size_t size() const { return v.size(); }
  size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? size() / rows() : shape[1]; }

  double& at(size_t r, size_t c) { return v[r * cols() + c]; }
  double at(size_t r, size_t c) const { return v[r * cols() + c]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// Fan-in scaled uniform init, the default for every dense layer here.
inline Tensor uniform_init(std::vector<size_t> shape, size_t fan_in, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& x : t.v) x = dist(rng);
  return t;
}

}  // namespace semharq
