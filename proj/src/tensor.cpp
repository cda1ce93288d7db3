#include "msis/tensor.hpp"

#include "eigen_view.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msis {

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Tensor2D Tensor2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged rows in Tensor2D::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor2D(r, c, std::move(data));
}

Tensor2D Tensor2D::row_vector(std::span<const double> values) {
  return Tensor2D(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Tensor2D Tensor2D::column_vector(std::span<const double> values) {
  return Tensor2D(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Tensor2D Tensor2D::identity(std::size_t n) {
  Tensor2D t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor2D::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor2D::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor2D::shape_string() const {
  std::ostringstream os;
  os << '[' << rows_ << 'x' << cols_ << ']';
  return os.str();
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + a.shape_string() + " * " + b.shape_string());
  }
  Tensor2D out(a.rows(), b.cols());
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
  return out;
}

Tensor2D dense_forward(const Tensor2D& input, const Tensor2D& weight, std::span<const double> bias) {
  if (input.cols() != weight.rows() || bias.size() != weight.cols()) {
    throw DimensionError("dense_forward: input " + input.shape_string() + ", weight " +
                         weight.shape_string() + ", bias [" + std::to_string(bias.size()) + "]");
  }
  Tensor2D out(input.rows(), weight.cols());
  auto o = as_matrix(out);
  o.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  o.noalias() += as_matrix(input) * as_matrix(weight);
  return out;
}

double sigmoid(double x) noexcept {
  const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(s, kProbEpsilon, 1.0 - kProbEpsilon);
}

Tensor2D sigmoid(const Tensor2D& input) {
  Tensor2D out(input.rows(), input.cols());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = sigmoid(input[i]);
  return out;
}

std::vector<double> softmax_vec(std::span<const double> scores) {
  if (scores.empty()) throw std::domain_error("softmax_vec: empty score vector");
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace msis
