#include "mmalign/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmalign {

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != m.cols_) {
      throw std::invalid_argument("from_rows: ragged initializer");
    }
    std::copy(r.begin(), r.end(), m.data_.begin() + i * m.cols_);
    ++i;
  }
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool DenseMatrix::all_nonnegative() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return v >= 0.0; });
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch");
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(j, i) = m(i, j);
    }
  }
  return out;
}

namespace {

// out[i][j] = max_s a[i][s] * w[s][j] with all inputs nonnegative, where
// w[s][j] = max_t x[s][t] * b_t[j][t].  Pulling a out of the max is exact
// for a >= 0: rounding is monotone, so fl(a * max_t v_t) = max_t fl(a * v_t).
DenseMatrix max_compose_factored(const DenseMatrix& a, const DenseMatrix& x,
                                 const DenseMatrix& b_t) {
  const std::size_t s_dim = x.rows(), t_dim = x.cols(), n = b_t.rows();
  DenseMatrix w(s_dim, n, -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < s_dim; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      const double* xr = x.row(s).data();
      const double* br = b_t.row(j).data();
      for (std::size_t t = 0; t < t_dim; ++t) {
        best = std::max(best, xr[t] * br[t]);
      }
      w(s, j) = best;
    }
  }
  DenseMatrix out(a.rows(), n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < s_dim; ++s) {
        best = std::max(best, a(i, s) * w(s, j));
      }
      out(i, j) = best;
    }
  }
  return out;
}

struct SparseRow {
  std::vector<std::pair<std::size_t, double>> nonzero;
  bool has_zero = false;
};

SparseRow scan_row(std::span<const double> row) {
  SparseRow r;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] == 0.0) {
      r.has_zero = true;
    } else {
      r.nonzero.emplace_back(k, row[k]);
    }
  }
  return r;
}

// Exhaustive max over all (s,t), valid for any signs.  Terms with a zero
// factor evaluate to +/-0 and compare equal to 0.0, so skipping them is
// exact as long as a single candidate 0 is kept whenever such a term
// exists; with S,T >= 1 a zero anywhere in any input produces one.
DenseMatrix max_compose_exhaustive(const DenseMatrix& a, const DenseMatrix& x,
                                   const DenseMatrix& b_t) {
  std::vector<SparseRow> a_rows(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) a_rows[i] = scan_row(a.row(i));
  std::vector<SparseRow> b_rows(b_t.rows());
  for (std::size_t j = 0; j < b_t.rows(); ++j) b_rows[j] = scan_row(b_t.row(j));
  bool x_has_zero = false;
  for (double v : x.data()) x_has_zero |= (v == 0.0);

  DenseMatrix out(a.rows(), b_t.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const SparseRow& ar = a_rows[i];
    for (std::size_t j = 0; j < b_t.rows(); ++j) {
      const SparseRow& br = b_rows[j];
      const bool zero_term = ar.has_zero || br.has_zero || x_has_zero;
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& [s, av] : ar.nonzero) {
        const double* xr = x.row(s).data();
        for (const auto& [t, bv] : br.nonzero) {
          const double xv = xr[t];
          if (xv == 0.0) continue;
          best = std::max(best, av * (xv * bv));
        }
      }
      if (zero_term) best = std::max(best, 0.0);
      out(i, j) =
          (best == -std::numeric_limits<double>::infinity()) ? 0.0 : best;
    }
  }
  return out;
}

}  // namespace

DenseMatrix max_compose(const DenseMatrix& a, const DenseMatrix& x,
                        const DenseMatrix& b_t) {
  if (a.cols() != x.rows() || x.cols() != b_t.cols()) {
    throw std::invalid_argument("max_compose: dimension mismatch");
  }
  if (x.rows() == 0 || x.cols() == 0) {
    return DenseMatrix(a.rows(), b_t.rows());
  }
  if (a.all_nonnegative() && x.all_nonnegative() && b_t.all_nonnegative()) {
    return max_compose_factored(a, x, b_t);
  }
  return max_compose_exhaustive(a, x, b_t);
}

DenseMatrix row_l2_normalize(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (double v : m.row(i)) sq += v * v;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : out.row(i)) v *= inv;
  }
  return out;
}

DenseMatrix minmax_scale(const DenseMatrix& m) {
  if (m.size() == 0) return m;
  const auto [lo_it, hi_it] =
      std::minmax_element(m.data().begin(), m.data().end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return DenseMatrix(m.rows(), m.cols());
  DenseMatrix out(m.rows(), m.cols());
  const double range = hi - lo;
  for (std::size_t k = 0; k < m.size(); ++k) {
    // True division: the extremes land exactly on 0 and 1.
    out.data()[k] = (m.data()[k] - lo) / range;
  }
  return out;
}

std::vector<std::size_t> row_argmax(const DenseMatrix& m) {
  if (m.cols() == 0) {
    throw std::invalid_argument("row_argmax: zero columns");
  }
  std::vector<std::size_t> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j) {
      if (r[j] > r[best]) best = j;
    }
    out[i] = best;
  }
  return out;
}

}  // namespace mmalign
