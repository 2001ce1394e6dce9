#pragma once

#include <cassert>
#include <initializer_list>
#include <vector>

namespace moltx {

// Dense row-major f64 array, rank <= 2. Column vectors are (n, 1).
struct Tensor {
  int rows = 0;
  int cols = 1;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  static Tensor vec(std::vector<double> data) {
    Tensor t;
    t.rows = static_cast<int>(data.size());
    t.cols = 1;
    t.v = std::move(data);
    return t;
  }

  static Tensor vec(std::initializer_list<double> data) {
    return vec(std::vector<double>(data));
  }

  static Tensor scalar(double x) {
    Tensor t(1, 1);
    t.v[0] = x;
    return t;
  }

  int size() const { return rows * cols; }

  double& operator()(int i, int j) {
    assert(i >= 0 && i < rows && j >= 0 && j < cols);
    return v[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < rows && j >= 0 && j < cols);
    return v[static_cast<std::size_t>(i) * cols + j];
  }
  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace moltx
