#include <doctest.h>

#include <cmath>

#include "moltx/params.hpp"
#include "moltx/tape.hpp"

using namespace moltx;

TEST_CASE("elementary forward values") {
  Tape tape;
  Value x = tape.constant({-1.0, 2.0});
  Value y = tape.relu(x);
  CHECK(y.data() == std::vector<double>{0.0, 2.0});

  CHECK(tape.sigmoid(tape.scalar(0.0)).scalar() == doctest::Approx(0.5));
  Value sm = tape.softmax(tape.constant({0.0, 0.0}));
  CHECK(sm.data()[0] == doctest::Approx(0.5));
  CHECK(sm.data()[1] == doctest::Approx(0.5));
}

TEST_CASE("backward: x^2 at x = 3") {
  ParamSet params;
  params.add("x", Tensor::scalar(3.0));
  Tape tape;
  Value x = tape.leaf(params.at("x"));
  Value loss = tape.mul(x, x);
  tape.backward(loss);
  CHECK(params.at("x").grad.v[0] == doctest::Approx(6.0));
}

TEST_CASE("backward: sigmoid at 0 has slope 1/4") {
  ParamSet params;
  params.add("x", Tensor::scalar(0.0));
  Tape tape;
  Value loss = tape.sigmoid(tape.leaf(params.at("x")));
  tape.backward(loss);
  CHECK(params.at("x").grad.v[0] == doctest::Approx(0.25));
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  Value v = tape.constant({1.0, 2.0});
  CHECK_THROWS_AS(tape.backward(v), NonScalarLoss);
}

TEST_CASE("shape errors are reported") {
  Tape tape;
  Value a = tape.constant({1.0, 2.0});
  Value b = tape.constant({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(tape.add(a, b), ShapeMismatch);
  Tensor W(2, 2);
  CHECK_THROWS_AS(tape.dense(b, tape.constant(W)), ShapeMismatch);
}

TEST_CASE("grad_reverse: identity forward, negated backward") {
  ParamSet params;
  params.add("x", Tensor::scalar(3.0));

  SUBCASE("forward is bit-identical") {
    Tape tape;
    Value x = tape.leaf(params.at("x"));
    Value r = tape.grad_reverse(x);
    CHECK(r.data() == x.data());
  }

  SUBCASE("loss = grad_reverse(x)^2 gives -6 at x = 3") {
    Tape tape;
    Value x = tape.leaf(params.at("x"));
    Value r = tape.grad_reverse(x);
    tape.backward(tape.mul(r, r));
    CHECK(params.at("x").grad.v[0] == -6.0);
  }

  SUBCASE("composing twice restores the gradient exactly") {
    Tape tape;
    Value x = tape.leaf(params.at("x"));
    Value r = tape.grad_reverse(tape.grad_reverse(x));
    tape.backward(tape.mul(r, r));
    CHECK(params.at("x").grad.v[0] == 6.0);
  }
}

TEST_CASE("detach stops gradients") {
  ParamSet params;
  params.add("x", Tensor::scalar(2.0));
  Tape tape;
  Value x = tape.leaf(params.at("x"));
  Value frozen = tape.detach(x);
  tape.backward(tape.mul(frozen, x));  // d/dx (c * x) = c = 2
  CHECK(params.at("x").grad.v[0] == doctest::Approx(2.0));
}

TEST_CASE("backward is idempotent with zeroing in between") {
  ParamSet params;
  params.add("W", init_glorot(3, 3, 7));
  params.add("x", init_glorot(3, 1, 8));
  Tape tape;
  Value y = tape.relu(tape.dense(tape.leaf(params.at("x")),
                                 tape.leaf(params.at("W"))));
  Value loss = tape.reduce_sum(tape.mul(y, y));
  tape.backward(loss);
  const auto g1 = params.at("W").grad.v;
  params.zero_grad();
  tape.backward(loss);
  CHECK(params.at("W").grad.v == g1);
}

TEST_CASE("gradients accumulate across leaves of the same param") {
  ParamSet params;
  params.add("x", Tensor::scalar(5.0));
  Tape tape;
  Value a = tape.leaf(params.at("x"));
  Value b = tape.leaf(params.at("x"));
  tape.backward(tape.add(a, b));
  CHECK(params.at("x").grad.v[0] == doctest::Approx(2.0));
}

TEST_CASE("log clamp: value and flat-region gradient") {
  ParamSet params;
  params.add("p", Tensor::scalar(1.0));  // beyond the clamp
  Tape tape;
  Value lg = tape.log_clamped(tape.leaf(params.at("p")));
  CHECK(lg.scalar() == doctest::Approx(std::log(1.0 - 1e-7)));
  tape.backward(lg);
  CHECK(params.at("p").grad.v[0] == 0.0);
}

TEST_CASE("binary entropy values") {
  Tape tape;
  CHECK(tape.binary_entropy(tape.scalar(0.5)).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(tape.binary_entropy(tape.scalar(1.0)).scalar() ==
        doctest::Approx(0.0).epsilon(1e-5));
  CHECK(tape.binary_entropy(tape.scalar(0.0)).scalar() ==
        doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("softplus_of_neg is a stable log(1 + exp(-m))") {
  Tape tape;
  CHECK(tape.softplus_of_neg(tape.scalar(0.0)).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(tape.softplus_of_neg(tape.scalar(10.0)).scalar() ==
        doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-12));
  CHECK(std::isfinite(tape.softplus_of_neg(tape.scalar(-800.0)).scalar()));
  CHECK(tape.softplus_of_neg(tape.scalar(-800.0)).scalar() ==
        doctest::Approx(800.0));
}

TEST_CASE("adam minimizes x^2 from 5") {
  ParamSet params;
  params.add("x", Tensor::scalar(5.0));
  Adam adam;
  for (int step = 0; step < 500; ++step) {
    params.zero_grad();
    Tape tape;
    Value x = tape.leaf(params.at("x"));
    tape.backward(tape.mul(x, x));
    adam.step(params, 0.1);
  }
  CHECK(std::fabs(params.at("x").value.v[0]) < 1e-3);
}

TEST_CASE("adam first step magnitude is about lr, regardless of scale") {
  for (double scale : {1.0, 1e-6, 1e6}) {
    ParamSet params;
    params.add("x", Tensor::scalar(scale));
    Adam adam;
    params.zero_grad();
    Tape tape;
    Value x = tape.leaf(params.at("x"));
    tape.backward(tape.mul(x, x));
    const double before = params.at("x").value.v[0];
    adam.step(params, 0.01);
    CHECK(std::fabs(params.at("x").value.v[0] - before) ==
          doctest::Approx(0.01).epsilon(1e-3));
  }
}

TEST_CASE("adam leaves parameters alone on zero gradient") {
  ParamSet params;
  params.add("x", Tensor::scalar(2.0));
  Adam adam;
  params.zero_grad();
  adam.step(params, 0.1);
  CHECK(params.at("x").value.v[0] == doctest::Approx(2.0));
}

TEST_CASE("glorot init: determinism, bounds, centering") {
  const Tensor a = init_glorot(20, 30, 42);
  const Tensor b = init_glorot(20, 30, 42);
  CHECK(a.v == b.v);

  const double bound = std::sqrt(6.0 / (20 + 30));
  for (double x : a.v) CHECK(std::fabs(x) <= bound);

  // Mean of 10^4 draws within 3 sigma of zero.
  const Tensor big = init_glorot(100, 100, 7);
  double mean = 0.0;
  for (double x : big.v) mean += x;
  mean /= static_cast<double>(big.v.size());
  const double sigma_mean = bound / std::sqrt(3.0) / 100.0;
  CHECK(std::fabs(mean) < 3.0 * sigma_mean);
}

TEST_CASE("duplicate parameter names are rejected") {
  ParamSet params;
  params.add("w", Tensor::scalar(0.0));
  CHECK_THROWS_AS(params.add("w", Tensor::scalar(1.0)), Error);
}
