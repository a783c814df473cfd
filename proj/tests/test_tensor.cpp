#include <doctest.h>

#include <cmath>
#include <limits>

#include "coursemi/error.hpp"
#include "coursemi/tensor.hpp"

using namespace coursemi;

TEST_CASE("sigmoid of zero is one half") {
  CHECK(ops::sigmoid(0.0) == 0.5);
  CHECK(ops::sigmoid(Tensor{{0.0, 0.0}}) == Tensor{{0.5, 0.5}});
}

TEST_CASE("softmax of equal entries is uniform") {
  const auto s = ops::softmax_vec(Tensor{{2.5, 2.5, 2.5}});
  for (const double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax sums to one and stays positive for large inputs") {
  const auto s = ops::softmax_vec(Tensor{{1000.0, -1000.0, 3.0, 999.0}});
  double sum = 0;
  for (const double v : s.data()) {
    CHECK(v > 0.0);
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("identity matmul") {
  const Tensor x{{1, 2, 3}, {4, 5, 6}};
  CHECK(ops::matmul(Tensor::identity(2), x) == x);
  CHECK(ops::matmul(x, Tensor::identity(3)) == x);
}

TEST_CASE("matmul hand values and shape errors") {
  const Tensor a{{1, 2}, {3, 4}};
  const Tensor b{{5}, {6}};
  CHECK(ops::matmul(a, b) == Tensor{{17}, {39}});
  CHECK_THROWS_AS(ops::matmul(b, b), ShapeError);
  CHECK_THROWS_AS(ops::add(a, b), ShapeError);
}

TEST_CASE("non-finite results raise a numeric fault") {
  const Tensor big{{1e308}};
  CHECK_THROWS_AS(ops::scale(big, 10.0), NumericFault);
  CHECK_THROWS_AS(ops::add(Tensor{{std::numeric_limits<double>::quiet_NaN()}}, Tensor{{1.0}}),
                  NumericFault);
}

TEST_CASE("stable softplus") {
  CHECK(ops::softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(ops::softplus(800.0) == doctest::Approx(800.0));
  CHECK(ops::softplus(-800.0) >= 0.0);
}

TEST_CASE("row reductions and gather") {
  const Tensor x{{1, 2}, {3, 4}, {5, 6}};
  CHECK(ops::mean_rows(x) == Tensor{{3, 4}});
  CHECK(ops::row_sum(x) == Tensor{{3}, {7}, {11}});
  const std::size_t idx[] = {2, 0};
  CHECK(ops::gather_rows(x, idx) == Tensor{{5, 6}, {1, 2}});
  const std::size_t bad[] = {3};
  CHECK_THROWS_AS(ops::gather_rows(x, bad), ShapeError);
  CHECK(ops::sum_all(x) == 21.0);
  CHECK(ops::mean_all(x) == 3.5);
}

TEST_CASE("transpose, add_row, hadamard, relu, tanh") {
  const Tensor x{{1, -2}, {3, -4}};
  CHECK(ops::transpose(x) == Tensor{{1, 3}, {-2, -4}});
  CHECK(ops::add_row(x, Tensor{{10, 20}}) == Tensor{{11, 18}, {13, 16}});
  CHECK(ops::hadamard(x, x) == Tensor{{1, 4}, {9, 16}});
  CHECK(ops::relu(x) == Tensor{{1, 0}, {3, 0}});
  CHECK(ops::tanh(Tensor{{0.0}}).item() == 0.0);
}

TEST_CASE("item requires a scalar") {
  CHECK(Tensor::scalar(4.0).item() == 4.0);
  CHECK_THROWS_AS(Tensor(2, 1).item(), ShapeError);
}
