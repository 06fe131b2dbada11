#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ungsl/gradcheck.hpp"
#include "ungsl/optim.hpp"

using namespace ungsl;

TEST_CASE("sigmoid: center, saturation, series oracle") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(40.0) > 1.0 - 1e-15);
  CHECK(sigmoid(-40.0) < 1e-15);
  CHECK(std::isfinite(sigmoid(700.0)));
  CHECK(std::isfinite(sigmoid(-700.0)));
  // high-precision value of 1/(1+e^-0.2)
  CHECK(sigmoid(0.2) == doctest::Approx(0.54983399731247795).epsilon(1e-15));
}

TEST_CASE("softmax_rows: uniform, shift invariance, direct oracle") {
  DenseMatrix z(1, 4, 0.0);
  DenseMatrix p = softmax_rows(z);
  for (std::size_t k = 0; k < 4; ++k) CHECK(p(0, k) == doctest::Approx(0.25));

  DenseMatrix a(1, 3);
  a(0, 0) = 1.0; a(0, 1) = 2.0; a(0, 2) = 3.0;
  DenseMatrix b = a;
  for (double& x : b.data()) x += 17.5;
  DenseMatrix pa = softmax_rows(a), pb = softmax_rows(b);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(pa(0, k) == doctest::Approx(pb(0, k)).epsilon(1e-14));

  // direct e^x / sum e^x
  double z3 = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(pa(0, 0) == doctest::Approx(std::exp(1.0) / z3).epsilon(1e-14));
  CHECK(pa(0, 2) == doctest::Approx(std::exp(3.0) / z3).epsilon(1e-14));
}

TEST_CASE("softmax_rows: 1000 random rows sum to 1") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  DenseMatrix z(1000, 6);
  for (double& x : z.data()) x = u(rng);
  DenseMatrix p = softmax_rows(z);
  for (std::size_t i = 0; i < 1000; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += p(i, k);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("adam: zero gradient leaves value, increments t") {
  ParamTensor p(2, 2, "p");
  p.value(0, 0) = 1.5;
  AdamState st;
  std::vector<ParamTensor*> ps = {&p};
  adam_step(ps, st);
  CHECK(st.t == 1);
  CHECK(p.value(0, 0) == 1.5);
}

TEST_CASE("adam: bias-corrected first step is -lr*sign(g)") {
  ParamTensor p(1, 1, "p");
  p.grad(0, 0) = 3.7;
  AdamState st;
  st.lr = 0.05;
  std::vector<ParamTensor*> ps = {&p};
  adam_step(ps, st);
  CHECK(p.value(0, 0) == doctest::Approx(-0.05).epsilon(1e-6));
}

TEST_CASE("adam: three scripted steps match an independent reference trace") {
  // Reference trace computed by hand for loss f(x) = x^2, x0 = 1,
  // lr = 0.1, default betas: the analytic Adam recurrence evaluated
  // step by step with grad = 2x.
  double x = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> expected;
  for (int t = 1; t <= 3; ++t) {
    const double g = 2.0 * x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    x -= lr * mh / (std::sqrt(vh) + eps);
    expected.push_back(x);
  }

  ParamTensor p(1, 1, "x");
  p.value(0, 0) = 1.0;
  AdamState st;
  st.lr = 0.1;
  std::vector<ParamTensor*> ps = {&p};
  for (int t = 0; t < 3; ++t) {
    p.zero_grad();
    p.grad(0, 0) = 2.0 * p.value(0, 0);
    adam_step(ps, st);
    CHECK(p.value(0, 0) == doctest::Approx(expected[static_cast<std::size_t>(t)])
                               .epsilon(1e-12));
  }
}

TEST_CASE("adam: deterministic given identical state and gradients") {
  auto run = [] {
    ParamTensor p(3, 1, "p");
    for (std::size_t i = 0; i < 3; ++i) p.value(i, 0) = static_cast<double>(i);
    AdamState st;
    std::vector<ParamTensor*> ps = {&p};
    for (int t = 0; t < 5; ++t) {
      p.zero_grad();
      for (std::size_t i = 0; i < 3; ++i) p.grad(i, 0) = p.value(i, 0) - 0.3;
      adam_step(ps, st);
    }
    return p.value;
  };
  DenseMatrix a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("adam: non-finite gradient aborts with parameter name") {
  ParamTensor p(1, 1, "exploding");
  p.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState st;
  std::vector<ParamTensor*> ps = {&p};
  CHECK_THROWS_WITH_AS(adam_step(ps, st),
                       doctest::Contains("exploding"), std::runtime_error);
}

TEST_CASE("finite_diff_check: exact quadratic") {
  ParamTensor p(2, 1, "theta");
  p.value(0, 0) = 1.0;
  p.value(1, 0) = -2.0;
  auto loss = [&] {
    return p.value(0, 0) * p.value(0, 0) + p.value(1, 0) * p.value(1, 0);
  };
  p.grad(0, 0) = 2.0 * p.value(0, 0);
  p.grad(1, 0) = 2.0 * p.value(1, 0);
  CHECK(finite_diff_check(loss, {&p}) < 1e-8);
}

TEST_CASE("finite_diff_check: sum of sigmoids vs analytic derivative") {
  ParamTensor p(3, 1, "theta");
  p.value(0, 0) = 0.3;
  p.value(1, 0) = -1.1;
  p.value(2, 0) = 2.0;
  auto loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += sigmoid(p.value(i, 0));
    return s;
  };
  for (std::size_t i = 0; i < 3; ++i) p.grad(i, 0) = sigmoid_grad(p.value(i, 0));
  CHECK(finite_diff_check(loss, {&p}) < 1e-6);
}

TEST_CASE("finite_diff_check: corrupted gradient is detected") {
  ParamTensor p(1, 1, "theta");
  p.value(0, 0) = 0.7;
  auto loss = [&] { return p.value(0, 0) * p.value(0, 0); };
  p.grad(0, 0) = 2.0 * 0.7 + 0.5;  // deliberately wrong
  CHECK(finite_diff_check(loss, {&p}) > 1e-2);
}
