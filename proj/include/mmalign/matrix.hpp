#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mmalign {

// Row-major dense matrix of doubles. Files store 32-bit floats, but all
// in-memory arithmetic is 64-bit: Sinkhorn and multi-hop propagation
// amplify rounding.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;
  bool all_nonnegative() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Entity-to-entity score matrix, |E_s| x |E_t|.
using SimMatrix = DenseMatrix;

// Standard product a * b. Throws std::invalid_argument on dimension mismatch.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& m);

// Max-composition of a similarity path: out[i][j] = max over (s,t) of
// a[i][s] * (x[s][t] * b_t[j][t]).  b_t carries the target-side bridge
// already transposed, so shapes are a: m x S, x: S x T, b_t: n x T.
// When every input is nonnegative the reduction is factored through
// w[s][j] = max_t x[s][t]*b_t[j][t]; the factored form is invalid under
// sign changes, so mixed-sign inputs take the exhaustive path (zero
// entries skipped, which cannot change the maximum).
// If S or T is zero the result is all zeros.
DenseMatrix max_compose(const DenseMatrix& a, const DenseMatrix& x,
                        const DenseMatrix& b_t);

// Scales each nonzero row to unit Euclidean norm; all-zero rows stay zero.
DenseMatrix row_l2_normalize(const DenseMatrix& m);

// Affine map of all entries onto [0,1]; a constant matrix maps to zeros.
DenseMatrix minmax_scale(const DenseMatrix& m);

// Per row, the smallest column index attaining the row maximum.
// Throws std::invalid_argument when cols == 0.
std::vector<std::size_t> row_argmax(const DenseMatrix& m);

}  // namespace mmalign
