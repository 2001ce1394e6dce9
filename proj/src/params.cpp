#include "moltx/params.hpp"

#include <cmath>

#include "moltx/error.hpp"

namespace moltx {

Param& ParamSet::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw Error("duplicate parameter name: " + name);
  index_[name] = params_.size();
  names_.push_back(name);
  Param p;
  p.grad = Tensor(init.rows, init.cols, 0.0);
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParamSet::at(std::string_view name) {
  Param* p = find(name);
  if (!p) throw Error("unknown parameter: " + std::string(name));
  return *p;
}

const Param& ParamSet::at(std::string_view name) const {
  const Param* p = find(name);
  if (!p) throw Error("unknown parameter: " + std::string(name));
  return *p;
}

const Param* ParamSet::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

Param* ParamSet::find(std::string_view name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

void ParamSet::zero_grad() {
  for (Param& p : params_) p.grad.fill(0.0);
}

ParamSet ParamSet::clone_values() const {
  ParamSet out;
  for (std::size_t i = 0; i < params_.size(); ++i)
    out.add(names_[i], params_[i].value);
  return out;
}

void ParamSet::assign_values(const ParamSet& other) {
  if (other.size() != size()) throw Error("assign_values: size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (names_[i] != other.names_[i])
      throw Error("assign_values: name mismatch at " + names_[i]);
    params_[i].value = other.params_[i].value;
  }
}

void Adam::step(ParamSet& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    Moments& mom = state_[params.names()[i]];
    if (mom.m.empty()) {
      mom.m.assign(p.value.v.size(), 0.0);
      mom.v.assign(p.value.v.size(), 0.0);
    }
    for (std::size_t j = 0; j < p.value.v.size(); ++j) {
      const double g = p.grad.v[j];
      mom.m[j] = beta1_ * mom.m[j] + (1.0 - beta1_) * g;
      mom.v[j] = beta2_ * mom.v[j] + (1.0 - beta2_) * g * g;
      const double mhat = mom.m[j] / bc1;
      const double vhat = mom.v[j] / bc2;
      p.value.v[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

Tensor init_glorot(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  const double bound =
      std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& x : t.v) x = rng.uniform_real(-bound, bound);
  return t;
}

Tensor init_glorot(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  return init_glorot(rows, cols, rng);
}

Tensor init_param(const std::string& name, int rows, int cols,
                  std::uint64_t seed, bool is_bias) {
  if (is_bias) return Tensor(rows, cols, 0.0);
  return init_glorot(rows, cols, Rng::derive(seed, Rng::hash_str(name)));
}

}  // namespace moltx
