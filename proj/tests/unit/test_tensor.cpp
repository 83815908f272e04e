#include <doctest.h>

#include <limits>
#include <vector>

#include "dacc/errors.hpp"
#include "dacc/tensor.hpp"

using namespace dacc;

TEST_SUITE("tensor") {
  TEST_CASE("data length equals the product of the extents") {
    Tensor4<float> t({2, 3, 4, 5});
    CHECK(t.size() == 120);
    CHECK(t.shape().size() == 120);
    CHECK_THROWS_AS(Tensor4<float>({1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
  }

  TEST_CASE("offsets follow (n, c, y, x) order") {
    Tensor4<double> t({2, 2, 3, 4});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    CHECK(t.at(0, 0, 0, 1) == 1.0);
    CHECK(t.at(0, 0, 1, 0) == 4.0);
    CHECK(t.at(0, 1, 0, 0) == 12.0);
    CHECK(t.at(1, 0, 0, 0) == 24.0);
    CHECK(t.plane(1, 1)[0] == 36.0);
    CHECK(t.item(1).size() == 24);
  }

  TEST_CASE("stack and slice are inverse") {
    Tensor4<float> a({1, 2, 2, 2}, 1.0f);
    Tensor4<float> b({1, 2, 2, 2}, 2.0f);
    std::vector<Tensor4<float>> items{a, b};
    const auto s = stack_batch<float>(items);
    CHECK(s.shape() == Shape4{2, 2, 2, 2});
    CHECK(s.slice_batch(0) == a);
    CHECK(s.slice_batch(1) == b);
    std::vector<Tensor4<float>> bad{a, Tensor4<float>({1, 1, 2, 2})};
    CHECK_THROWS_AS(stack_batch<float>(bad), ShapeError);
  }

  TEST_CASE("horizontal flip mirrors columns and is an involution") {
    Tensor4<float> t({1, 1, 2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
    const auto f = flip_horizontal(t);
    CHECK(std::vector<float>(f.values().begin(), f.values().end()) == std::vector<float>{3, 2, 1, 6, 5, 4});
    CHECK(flip_horizontal(f) == t);
  }

  TEST_CASE("finiteness and sums") {
    Tensor4<double> t({1, 1, 1, 3}, std::vector<double>{1, 2, 3});
    CHECK(t.all_finite());
    CHECK(t.sum() == 6.0);
    t[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
  }
}
