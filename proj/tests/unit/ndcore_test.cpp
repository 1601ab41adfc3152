#include <cmath>
#include <vector>

#include "doctest.h"
#include "gradient_check.hpp"
#include "phyzzy/common/rng.hpp"
#include "phyzzy/ndcore/adam.hpp"
#include "phyzzy/ndcore/tape.hpp"
#include "phyzzy/ndcore/tensor.hpp"

using phyzzy::Rng;
using phyzzy::ndcore::Adam;
using phyzzy::ndcore::AdamConfig;
using phyzzy::ndcore::Tape;
using phyzzy::ndcore::Tensor;
using phyzzy::testsupport::max_grad_rel_err;

TEST_CASE("tensor shape bookkeeping") {
  Tensor t = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK_THROWS_AS(Tensor::from_values({2, 2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)Tensor::zeros({0, 3}), std::invalid_argument);
}

TEST_CASE("sigmoid midpoint and strict range") {
  Tape tape;
  Tensor zero = Tensor::scalar(0.0);
  CHECK(tape.sigmoid(zero).scalar_value() == doctest::Approx(0.5));

  Tensor extremes = Tensor::from_values({4}, {-1e9, -50.0, 50.0, 1e9});
  Tensor squashed = tape.sigmoid(extremes);
  for (double v : squashed.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("product reduce identity") {
  Tape tape;
  Tensor ones = Tensor::full({4}, 1.0);
  CHECK(tape.product(ones).scalar_value() == doctest::Approx(1.0));
}

TEST_CASE("matmul of ones") {
  Tape tape;
  Tensor a = Tensor::full({2, 3}, 1.0);
  Tensor b = Tensor::full({3, 1}, 1.0);
  Tensor c = tape.matmul(a, b);
  REQUIRE(c.shape() == phyzzy::ndcore::Shape{2, 1});
  CHECK(c.values()[0] == doctest::Approx(3.0));
  CHECK(c.values()[1] == doctest::Approx(3.0));
}

TEST_CASE("shape mismatch diagnostics name the operation and shapes") {
  Tape tape;
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 1});
  try {
    tape.matmul(a, b);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    const std::string message = e.what();
    CHECK(message.find("matmul") != std::string::npos);
    CHECK(message.find("[2,3]") != std::string::npos);
    CHECK(message.find("[4,1]") != std::string::npos);
  }
  CHECK_THROWS_AS(tape.add(a, b), std::invalid_argument);
}

TEST_CASE("log and sqrt reject non-positive input") {
  Tape tape;
  Tensor bad = Tensor::from_values({2}, {0.5, -1.0});
  CHECK_THROWS_AS(tape.log(bad), std::invalid_argument);
  CHECK_THROWS_AS(tape.sqrt(bad), std::invalid_argument);
  Tensor zero = Tensor::scalar(0.0);
  CHECK_THROWS_AS(tape.log(zero), std::invalid_argument);
}

TEST_CASE("backward of x*x at x=3") {
  Tape tape;
  Tensor x = Tensor::scalar(3.0, true);
  Tensor loss = tape.mul(x, x);
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward of sigmoid at 0") {
  Tape tape;
  Tensor x = Tensor::scalar(0.0, true);
  Tensor loss = tape.sigmoid(x);
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape tape;
  Tensor x = Tensor::from_values({2}, {1.0, 2.0}, true);
  Tensor y = tape.mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
}

TEST_CASE("gradients of each primitive match finite differences") {
  Rng rng(20240);
  auto random_tensor = [&rng](phyzzy::ndcore::Shape shape, double lo,
                              double hi) {
    std::vector<double> values(phyzzy::ndcore::shape_numel(shape));
    for (double& v : values) v = rng.uniform(lo, hi);
    return Tensor::from_values(std::move(shape), std::move(values), true);
  };

  SUBCASE("elementwise and reductions") {
    for (int trial = 0; trial < 20; ++trial) {
      Tensor x = random_tensor({5}, 0.1, 2.0);
      Tensor y = random_tensor({5}, 0.2, 1.5);
      // weighted-sum head exercises every output coordinate
      std::vector<double> weights(5);
      for (double& w : weights) w = rng.uniform(-1.0, 1.0);
      Tensor wt = Tensor::from_values({5}, weights);

      struct Case {
        const char* name;
        std::function<Tensor(Tape&, const Tensor&, const Tensor&)> apply;
      };
      const std::vector<Case> cases = {
          {"add", [](Tape& t, const Tensor& a, const Tensor& b) {
             return t.add(a, b);
           }},
          {"sub", [](Tape& t, const Tensor& a, const Tensor& b) {
             return t.sub(a, b);
           }},
          {"mul", [](Tape& t, const Tensor& a, const Tensor& b) {
             return t.mul(a, b);
           }},
          {"div", [](Tape& t, const Tensor& a, const Tensor& b) {
             return t.div(a, b);
           }},
          {"log", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.log(a);
           }},
          {"exp", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.exp(a);
           }},
          {"sqrt", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.sqrt(a);
           }},
          {"sigmoid", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.sigmoid(a);
           }},
          {"leaky_relu", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.leaky_relu(a, 0.01);
           }},
          {"add_scalar", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.add_scalar(a, 0.7);
           }},
          {"mul_scalar", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.mul_scalar(a, -1.3);
           }},
          {"tile_cyclic", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.tile_cyclic(a, 12);
           }},
          {"slice", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.slice(a, 1, 3);
           }},
          {"sum", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.sum(a);
           }},
          {"mean", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.mean(a);
           }},
          {"product", [](Tape& t, const Tensor& a, const Tensor&) {
             return t.product(a);
           }},
      };
      for (const Case& c : cases) {
        auto forward = [&]() {
          Tape t;
          Tensor out = c.apply(t, x, y);
          Tensor w = out.size() == wt.size()
                         ? wt
                         : Tensor::full({out.size()}, 0.37);
          return t.sum(t.mul(out, w)).scalar_value();
        };
        Tape t;
        Tensor out = c.apply(t, x, y);
        Tensor w = out.size() == wt.size() ? wt
                                           : Tensor::full({out.size()}, 0.37);
        Tensor loss = t.sum(t.mul(out, w));
        x.zero_grad();
        y.zero_grad();
        t.backward(loss);
        const double err = max_grad_rel_err(x, forward, x.grad());
        INFO("primitive ", c.name);
        CHECK(err < 1e-4);
      }
    }
  }

  SUBCASE("matmul") {
    Tensor a = random_tensor({3, 4}, -1.0, 1.0);
    Tensor b = random_tensor({4, 2}, -1.0, 1.0);
    auto forward = [&]() {
      Tape t;
      return t.sum(t.matmul(a, b)).scalar_value();
    };
    Tape t;
    Tensor loss = t.sum(t.matmul(a, b));
    t.backward(loss);
    CHECK(max_grad_rel_err(a, forward, a.grad()) < 1e-4);
    CHECK(max_grad_rel_err(b, forward, b.grad()) < 1e-4);
  }

  SUBCASE("conv1d") {
    Tensor x = random_tensor({2, 16}, -1.0, 1.0);
    Tensor w = random_tensor({3, 2, 4}, -1.0, 1.0);
    Tensor b = random_tensor({3}, -0.5, 0.5);
    auto forward = [&]() {
      Tape t;
      return t.sum(t.conv1d(x, w, b, 2)).scalar_value();
    };
    Tape t;
    Tensor loss = t.sum(t.conv1d(x, w, b, 2));
    t.backward(loss);
    CHECK(max_grad_rel_err(x, forward, x.grad()) < 1e-4);
    CHECK(max_grad_rel_err(w, forward, w.grad()) < 1e-4);
    CHECK(max_grad_rel_err(b, forward, b.grad()) < 1e-4);
  }

  SUBCASE("concat and row_mean") {
    Tensor a = random_tensor({3}, -1.0, 1.0);
    Tensor b = random_tensor({4}, -1.0, 1.0);
    auto forward = [&]() {
      Tape t;
      Tensor joined = t.concat({a, b});
      return t.mean(joined).scalar_value();
    };
    Tape t;
    Tensor loss = t.mean(t.concat({a, b}));
    t.backward(loss);
    CHECK(max_grad_rel_err(a, forward, a.grad()) < 1e-4);
    CHECK(max_grad_rel_err(b, forward, b.grad()) < 1e-4);

    Tensor m = random_tensor({3, 5}, -1.0, 1.0);
    auto forward_rows = [&]() {
      Tape t;
      return t.sum(t.row_mean(m)).scalar_value();
    };
    Tape t2;
    Tensor loss2 = t2.sum(t2.row_mean(m));
    t2.backward(loss2);
    CHECK(max_grad_rel_err(m, forward_rows, m.grad()) < 1e-4);
  }
}

TEST_CASE("backward through a chain matches finite differences") {
  Rng rng(7);
  Tensor x = Tensor::from_values({4}, {0.3, 0.6, 0.2, 0.9}, true);
  Tensor w = Tensor::from_values(
      {2, 4}, {0.1, -0.4, 0.7, 0.3, -0.2, 0.5, 0.2, -0.6}, true);
  auto forward = [&]() {
    Tape t;
    Tensor hidden = t.leaky_relu(t.matmul(w, x), 0.01);
    Tensor squashed = t.sigmoid(hidden);
    return t.product(squashed).scalar_value();
  };
  Tape t;
  Tensor hidden = t.leaky_relu(t.matmul(w, x), 0.01);
  Tensor squashed = t.sigmoid(hidden);
  Tensor loss = t.product(squashed);
  t.backward(loss);
  CHECK(max_grad_rel_err(x, forward, x.grad()) < 1e-4);
  CHECK(max_grad_rel_err(w, forward, w.grad()) < 1e-4);
}

TEST_CASE("tape no-grad scope records nothing") {
  Tape tape;
  Tensor x = Tensor::scalar(2.0, true);
  {
    Tape::NoGradGuard guard(tape);
    Tensor y = tape.mul(x, x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(tape.node_count() == 0);
  Tensor y = tape.mul(x, x);
  CHECK(y.requires_grad());
  CHECK(tape.node_count() == 1);
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
  Tensor p = Tensor::from_values({3}, {1.0, -2.0, 0.5}, true);
  p.zero_grad();
  Adam adam({p}, AdamConfig{});
  adam.step();
  CHECK(p.values()[0] == doctest::Approx(1.0));
  CHECK(p.values()[1] == doctest::Approx(-2.0));
  CHECK(p.values()[2] == doctest::Approx(0.5));
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
  Tensor p = Tensor::from_values({2}, {0.0, 0.0}, true);
  auto g = p.grad_buffer();
  g[0] = 0.03;
  g[1] = -4.0;
  AdamConfig config;
  config.learning_rate = 0.05;
  Adam adam({p}, config);
  adam.step();
  CHECK(p.values()[0] == doctest::Approx(-0.05).epsilon(1e-4));
  CHECK(p.values()[1] == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("adam descends x^2 from x=1 monotonically") {
  Tensor x = Tensor::scalar(1.0, true);
  AdamConfig config;
  config.learning_rate = 0.1;
  Adam adam({x}, config);
  double prev = std::abs(x.scalar_value());
  for (int i = 0; i < 10; ++i) {
    adam.zero_grad();
    Tape tape;
    Tensor loss = tape.mul(x, x);
    tape.backward(loss);
    adam.step();
    const double now = std::abs(x.scalar_value());
    CHECK(now < prev);
    prev = now;
  }
  CHECK(adam.step_count() == 10);
}
