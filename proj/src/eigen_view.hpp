#pragma once

#include <Eigen/Core>

#include "msis/tensor.hpp"

namespace msis {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<RowMatrix> as_matrix(Tensor2D& t) {
  return {t.values().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

inline Eigen::Map<const RowMatrix> as_matrix(const Tensor2D& t) {
  return {t.values().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

}  // namespace msis
