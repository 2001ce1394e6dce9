#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "moltx/rng.hpp"
#include "moltx/tensor.hpp"

namespace moltx {

// One trainable array plus its accumulated gradient.
struct Param {
  Tensor value;
  Tensor grad;
};

// Ordered, uniquely named collection of trainable parameters. Order is the
// insertion order; serialization and the optimizer iterate in that order so
// runs are reproducible.
class ParamSet {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& at(std::string_view name);
  const Param& at(std::string_view name) const;
  const Param* find(std::string_view name) const;
  Param* find(std::string_view name);
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  void zero_grad();
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }

  // Deep copy of values (gradients reset); used for early-stopping snapshots.
  ParamSet clone_values() const;
  void assign_values(const ParamSet& other);

 private:
  std::vector<std::string> names_;
  std::vector<Param> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Adam with bias correction; moment state is kept per parameter name and
// persists across steps. The learning rate is supplied per step so callers
// own the schedule.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& params, double lr);
  std::int64_t steps() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

// Uniform in +/- sqrt(6 / (fan_in + fan_out)); fan_in = cols, fan_out = rows.
Tensor init_glorot(int rows, int cols, std::uint64_t seed);
Tensor init_glorot(int rows, int cols, Rng& rng);

// Glorot weights, zero biases, with per-name derived streams from one seed.
Tensor init_param(const std::string& name, int rows, int cols,
                  std::uint64_t seed, bool is_bias);

}  // namespace moltx
