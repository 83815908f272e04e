#include <doctest.h>

#include <cmath>

#include "dacc/adam.hpp"
#include "dacc/errors.hpp"
#include "dacc/ops.hpp"
#include "oracles.hpp"

using namespace dacc;
using dacc::testing::random_tensor;

namespace {

// Plain scalar Adam, from the update rule.
struct ScalarAdam {
  double lr, b1, b2, eps;
  double m = 0, v = 0;
  int t = 0;
  double step(double x, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

void set_grad(Variable<double>& p, const Tensor4<double>& g) { p.mutable_grad() = g; }

}  // namespace

TEST_SUITE("adam") {
  TEST_CASE("first step moves by about lr against the gradient sign") {
    const double lr = 1e-3;
    Tensor4<double> init({1, 1, 1, 4}, std::vector<double>{0.5, -0.25, 2.0, 0.0});
    Tensor4<double> g({1, 1, 1, 4}, std::vector<double>{0.3, -2.0, 1e-2, -7.5});
    auto p = Variable<double>::parameter(init);
    Adam<double> adam({p}, {lr});
    set_grad(p, g);
    adam.step();
    for (std::size_t i = 0; i < 4; ++i) {
      const double expected = init[i] - lr * (g[i] > 0 ? 1.0 : -1.0);
      CHECK(std::abs(p.value()[i] - expected) <= lr * 1e-3);
    }
    CHECK_FALSE(p.has_grad());
    CHECK(adam.step_count() == 1);
  }

  TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor4<double> init({1, 2, 2, 2}, 0.75);
    auto p = Variable<double>::parameter(init);
    Adam<double> adam({p}, {});
    for (int i = 0; i < 3; ++i) {
      set_grad(p, Tensor4<double>(init.shape()));
      adam.step();
    }
    CHECK(p.value() == init);
  }

  TEST_CASE("matches a scalar reference over several steps") {
    const AdamOptions opts{2e-2, 0.8, 0.95, 1e-6};
    Rng rng(4);
    auto p = Variable<double>::parameter(random_tensor({1, 1, 2, 3}, rng));
    std::vector<ScalarAdam> ref(6, ScalarAdam{opts.learning_rate, opts.beta1, opts.beta2, opts.epsilon});
    std::vector<double> x(p.value().values().begin(), p.value().values().end());
    Adam<double> adam({p}, opts);
    for (int step = 0; step < 5; ++step) {
      const auto g = random_tensor({1, 1, 2, 3}, rng);
      for (std::size_t i = 0; i < 6; ++i) x[i] = ref[i].step(x[i], g[i]);
      set_grad(p, g);
      adam.step();
    }
    for (std::size_t i = 0; i < 6; ++i) CHECK(p.value()[i] == doctest::Approx(x[i]).epsilon(1e-12));
    CHECK(adam.first_moments()[0].shape() == p.shape());
    CHECK(adam.second_moments()[0].shape() == p.shape());
  }

  TEST_CASE("missing gradients are rejected") {
    auto a = Variable<double>::parameter(Tensor4<double>({1, 1, 1, 1}, 1.0));
    auto b = Variable<double>::parameter(Tensor4<double>({1, 1, 1, 1}, 1.0));
    Adam<double> adam({a, b}, {});
    backward(sum(a));
    CHECK_THROWS_AS(adam.step(), ValidationError);
    CHECK(adam.step_count() == 0);
  }

  TEST_CASE("invalid options are rejected") {
    auto a = Variable<double>::parameter(Tensor4<double>({1, 1, 1, 1}));
    CHECK_THROWS_AS(Adam<double>({a}, {0.0}), ValidationError);
    CHECK_THROWS_AS(Adam<double>({a}, {1e-3, 1.0}), ValidationError);
    CHECK_THROWS_AS(Adam<double>({a}, {1e-3, 0.9, 0.999, 0.0}), ValidationError);
  }

  TEST_CASE("identical runs are bitwise identical") {
    auto run = [] {
      Rng rng(99);
      auto p = Variable<float>::parameter(random_tensor<float>({2, 3, 3, 3}, rng));
      auto x = Variable<float>::constant(random_tensor<float>({1, 3, 6, 6}, rng));
      auto b = Variable<float>::parameter(Tensor4<float>({2, 1, 1, 1}));
      Adam<float> adam({p, b}, {1e-2});
      for (int i = 0; i < 10; ++i) {
        backward(sum(relu(conv2d(x, p, b, {1, 1, 1, ConvAlgorithm::im2col}))));
        adam.step();
      }
      return p.value();
    };
    CHECK(run() == run());
  }
}
