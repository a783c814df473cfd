#include "coursemi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coursemi/error.hpp"

namespace coursemi {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

Tensor finite(Tensor t, const char* op) {
  if (!t.all_finite()) throw NumericFault(std::string(op) + ": non-finite result");
  return t;
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return finite(std::move(out), "elementwise op");
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  require_same(a, b, op);
  Tensor out(a.rows(), a.cols());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return finite(std::move(out), op);
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match " +
                     shape_string());
  }
}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged tensor literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::row_vector(std::span<const double> v) {
  return Tensor(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

Tensor Tensor::col_vector(std::span<const double> v) {
  return Tensor(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

double& Tensor::at(std::size_t r, std::size_t c) {
  if (r >= rows_ || c >= cols_) throw ShapeError("index out of range for " + shape_string());
  return (*this)(r, c);
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw ShapeError("index out of range for " + shape_string());
  return (*this)(r, c);
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) throw ShapeError("item() on non-scalar " + shape_string());
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

namespace ops {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  // log(1 + e^x) without overflow.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
  }
  Tensor out(a.rows(), b.cols());
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* orow = out.row(i).data();
    const double* arow = a.row(i).data();
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  return finite(std::move(out), "matmul");
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: " + a.shape_string() + " + " + row.shape_string());
  }
  Tensor out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += row(0, j);
  return finite(std::move(out), "add_row");
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double c) {
  return map(a, [c](double x) { return c * x; });
}

Tensor sigmoid(const Tensor& a) {
  return map(a, [](double x) { return sigmoid(x); });
}

Tensor tanh(const Tensor& a) {
  return map(a, [](double x) { return std::tanh(x); });
}

Tensor relu(const Tensor& a) {
  return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor softplus(const Tensor& a) {
  return map(a, [](double x) { return softplus(x); });
}

Tensor softmax_vec(const Tensor& a) {
  if (a.rows() != 1 && a.cols() != 1) throw ShapeError("softmax_vec on matrix " + a.shape_string());
  if (a.empty()) return a;
  const auto src = a.data();
  const double mx = *std::max_element(src.begin(), src.end());
  Tensor out(a.rows(), a.cols());
  double z = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    out.data()[i] = std::exp(src[i] - mx);
    z += out.data()[i];
  }
  // Floor at the smallest normal so every weight stays strictly positive.
  for (auto& v : out.data()) v = std::max(v / z, std::numeric_limits<double>::min());
  return finite(std::move(out), "softmax_vec");
}

Tensor mean_rows(const Tensor& a) {
  if (a.rows() == 0) throw ShapeError("mean_rows of empty tensor");
  Tensor out(1, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) += a(i, j);
  for (auto& v : out.data()) v /= static_cast<double>(a.rows());
  return finite(std::move(out), "mean_rows");
}

Tensor row_sum(const Tensor& a) {
  Tensor out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (const double v : a.row(i)) s += v;
    out(i, 0) = s;
  }
  return finite(std::move(out), "row_sum");
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> idx) {
  Tensor out(idx.size(), a.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= a.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                       a.shape_string());
    }
    std::copy_n(a.row(idx[i]).begin(), a.cols(), out.row(i).begin());
  }
  return out;
}

double sum_all(const Tensor& a) {
  double s = 0.0;
  for (const double v : a.data()) s += v;
  return s;
}

double mean_all(const Tensor& a) {
  if (a.empty()) throw ShapeError("mean of empty tensor");
  return sum_all(a) / static_cast<double>(a.size());
}

}  // namespace ops
}  // namespace coursemi
