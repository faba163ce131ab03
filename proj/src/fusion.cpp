#include "mmalign/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmalign/errors.hpp"

namespace mmalign {

DenseMatrix sinkhorn(const DenseMatrix& x, std::size_t k) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw std::invalid_argument("sinkhorn: empty matrix");
  }
  const double global_max =
      *std::max_element(x.data().begin(), x.data().end());
  DenseMatrix s(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // The floor keeps every entry positive when the input range is so
    // wide that exp underflows; normalization is well-defined either way.
    s.data()[i] = std::max(std::exp(x.data()[i] - global_max),
                           std::numeric_limits<double>::min());
  }
  std::vector<double> col_sums(x.cols());
  for (std::size_t it = 0; it < k; ++it) {
    for (std::size_t i = 0; i < s.rows(); ++i) {
      auto row = s.row(i);
      double sum = 0.0;
      for (double v : row) sum += v;
      const double inv = 1.0 / sum;
      for (double& v : row) v *= inv;
    }
    std::fill(col_sums.begin(), col_sums.end(), 0.0);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const auto row = s.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) col_sums[j] += row[j];
    }
    for (double& v : col_sums) v = 1.0 / v;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      auto row = s.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] *= col_sums[j];
    }
  }
  return s;
}

SimMatrix fuse(const ModalityMatrices& matrices, const PipelineConfig& config) {
  if (matrices.empty()) {
    throw DataError("fuse: no modality matrices");
  }
  const auto& first = matrices.begin()->second;
  DenseMatrix sum(first.rows(), first.cols());
  for (const auto& [kind, m] : matrices) {
    if (m.rows() != sum.rows() || m.cols() != sum.cols()) {
      throw DataError("fuse: shape mismatch for modality " + to_string(kind));
    }
    const DenseMatrix scaled = config.prescale ? minmax_scale(m) : m;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum.data()[i] += scaled.data()[i];
    }
  }
  return sinkhorn(sum, config.sinkhorn_k);
}

}  // namespace mmalign
