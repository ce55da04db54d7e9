// cbss/linalg.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Small dense matrices, row-major. Everything here works on the modest sizes
// this project needs (per-bin PxP systems, block covariances, dense oracles);
// determinants go through pivoted LU on a log-magnitude scale so extended
// demixing matrices of a few hundred rows never overflow.

#ifndef CBSS_LINALG_HPP_
#define CBSS_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbss/common.hpp"

namespace cbss {

template <typename T>
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t rows, std::size_t cols, T value = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  Mat<Cplx> adjoint() const {
    Mat<Cplx> t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj(Cplx((*this)(r, c)));
    return t;
  }

  Mat operator*(const Mat& rhs) const {
    Mat out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = 0; k < cols_; ++k) {
        T a = (*this)(r, k);
        if (a == T{}) continue;
        const T* brow = &rhs.data_[k * rhs.cols_];
        T* orow = &out.data_[r * rhs.cols_];
        for (std::size_t c = 0; c < rhs.cols_; ++c) orow[c] += a * brow[c];
      }
    }
    return out;
  }

  std::vector<T> operator*(const std::vector<T>& v) const {
    std::vector<T> out(rows_, T{});
    for (std::size_t r = 0; r < rows_; ++r) {
      T acc{};
      const T* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * v[c];
      out[r] = acc;
    }
    return out;
  }

  Mat operator+(const Mat& rhs) const {
    Mat out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
  }

  Mat operator-(const Mat& rhs) const {
    Mat out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
  }

  Mat operator*(T s) const {
    Mat out = *this;
    for (auto& v : out.data_) v *= s;
    return out;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<T> data_;
};

using MatR = Mat<Real>;
using MatC = Mat<Cplx>;

namespace detail {
template <typename T>
Real abs_of(const T& v) {
  return std::abs(v);
}
}  // namespace detail

// In-place LU with partial pivoting. Returns false when a pivot underflows
// (matrix numerically singular); on success fills perm and the sign/parity.
template <typename T>
bool lu_factor(Mat<T>& a, std::vector<std::size_t>& perm, int& parity) {
  const std::size_t n = a.rows();
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  parity = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    Real best = detail::abs_of(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      Real m = detail::abs_of(a(r, col));
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (!(best > 0.0)) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
      std::swap(perm[piv], perm[col]);
      parity = -parity;
    }
    T inv_p = T{1} / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      T f = a(r, col) * inv_p;
      a(r, col) = f;
      if (f == T{}) continue;
      for (std::size_t c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  return true;
}

// log|det A|; throws SingularMatrixError on a singular factorization.
template <typename T>
Real log_abs_det(Mat<T> a, const char* what = "matrix") {
  std::vector<std::size_t> perm;
  int parity;
  if (!lu_factor(a, perm, parity))
    throw SingularMatrixError(std::string("singular ") + what + " in log_abs_det");
  Real acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += std::log(detail::abs_of(a(i, i)));
  return acc;
}

template <typename T>
void lu_solve_inplace(const Mat<T>& lu, const std::vector<std::size_t>& perm,
                      std::vector<T>& b) {
  const std::size_t n = lu.rows();
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  b = std::move(x);
}

template <typename T>
Mat<T> inverse(const Mat<T>& a, const char* what = "matrix") {
  Mat<T> lu = a;
  std::vector<std::size_t> perm;
  int parity;
  if (!lu_factor(lu, perm, parity))
    throw SingularMatrixError(std::string("singular ") + what + " in inverse");
  const std::size_t n = a.rows();
  Mat<T> inv(n, n);
  std::vector<T> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(col.begin(), col.end(), T{});
    col[c] = T{1};
    lu_solve_inplace(lu, perm, col);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return inv;
}

template <typename T>
std::vector<T> solve(const Mat<T>& a, std::vector<T> b, const char* what = "system") {
  Mat<T> lu = a;
  std::vector<std::size_t> perm;
  int parity;
  if (!lu_factor(lu, perm, parity))
    throw SingularMatrixError(std::string("singular ") + what + " in solve");
  lu_solve_inplace(lu, perm, b);
  return b;
}

// Cholesky of a symmetric positive definite real matrix; returns false when
// a pivot drops below a tiny positive threshold.
inline bool cholesky(const MatR& a, MatR& l) {
  const std::size_t n = a.rows();
  l = MatR(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Real s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0)) return false;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return true;
}

inline Real cholesky_log_det(const MatR& l) {
  Real acc = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

inline std::vector<Real> cholesky_solve(const MatR& l, std::vector<Real> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) b[i] -= l(i, j) * b[j];
    b[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) b[i] -= l(j, i) * b[j];
    b[i] /= l(i, i);
  }
  return b;
}

template <typename T>
Mat<T> kron(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      T v = a(ar, ac);
      if (v == T{}) continue;
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = v * b(br, bc);
    }
  return out;
}

template <typename T>
Real max_abs(const Mat<T>& a) {
  Real m = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, detail::abs_of(a(r, c)));
  return m;
}

inline MatC to_complex(const MatR& a) {
  MatC out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
  return out;
}

// Symmetric Toeplitz solver (Levinson recursion with a general right-hand
// side). r holds the first row/column [r0, r1, ..., r_{n-1}]; used by the
// least-squares identification paths where the normal matrix is Toeplitz.
// O(n^2) instead of the O(n^3) dense solve.
inline std::vector<Real> levinson_solve(const std::vector<Real>& r,
                                        const std::vector<Real>& b) {
  const std::size_t n = b.size();
  if (n == 0) return {};
  if (!(std::abs(r[0]) > 0.0))
    throw SingularMatrixError("levinson_solve: zero leading autocorrelation");
  std::vector<Real> f{1.0 / r[0]};  // forward vector: T_m f = e_0
  std::vector<Real> x{b[0] / r[0]};
  for (std::size_t m = 1; m < n; ++m) {
    Real ef = 0.0;  // extension error of [f; 0] against the new last row
    for (std::size_t i = 0; i < m; ++i) ef += r[m - i] * f[i];
    Real denom = 1.0 - ef * ef;
    if (!(std::abs(denom) > 0.0))
      throw SingularMatrixError("levinson_solve: singular Toeplitz system");
    // Symmetric Toeplitz: the backward vector is the reversal of f.
    std::vector<Real> fn(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      Real a = (i < m) ? f[i] : 0.0;
      Real rev = (i == 0) ? 0.0 : f[m - i];
      fn[i] = (a - ef * rev) / denom;
    }
    f = std::move(fn);
    Real ex = 0.0;
    for (std::size_t i = 0; i < m; ++i) ex += r[m - i] * x[i];
    Real c = b[m] - ex;
    x.push_back(0.0);
    for (std::size_t i = 0; i <= m; ++i) x[i] += c * f[m - i];
  }
  return x;
}

}  // namespace cbss

#endif  // CBSS_LINALG_HPP_
