// cbss/toeplitz.hpp

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

// Structured matrices of the broadband demixing model: 2L x D Toeplitz
// convolution blocks, the extended square demixing matrix and its permuted
// lower block-triangular form (whose determinants coincide), circulant
// embeddings of the Toeplitz blocks, their DFT diagonalization, and the
// windowed frequency-domain application realizing linear convolution.
//
// Block convention (matches the time-domain cost machinery): a signal block
// is stored newest-first, x(m) = [x(mR), x(mR-1), ..., x(mR-2L+1)], so
// (W_pq^T x_p)[j] is the FIR output w_pq * x_p at time mR - j.

#ifndef CBSS_TOEPLITZ_HPP_
#define CBSS_TOEPLITZ_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "cbss/common.hpp"
#include "cbss/fft.hpp"
#include "cbss/linalg.hpp"

namespace cbss {

// 0/1 selection matrix (exactly one unit entry per column), realized as an
// index map: column j selects row (row_offset + j). Covers the window
// matrices U^{1_D 0} (prefix rows), U^{0 1_{2L-D}} (suffix rows) and
// U^{1_{2L} 0} used to cut Toeplitz blocks out of circulant embeddings.
// Dense materialization exists for test oracles only.
struct WindowSelector {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t row_offset = 0;

  static WindowSelector prefix(std::size_t rows, std::size_t cols) {
    if (cols > rows) throw std::invalid_argument("WindowSelector: cols must be <= rows");
    return WindowSelector{rows, cols, 0};
  }
  static WindowSelector suffix(std::size_t rows, std::size_t cols) {
    if (cols > rows) throw std::invalid_argument("WindowSelector: cols must be <= rows");
    return WindowSelector{rows, cols, rows - cols};
  }

  // U^T x: pick the selected entries.
  std::vector<Real> select(const std::vector<Real>& x) const {
    std::vector<Real> out(cols);
    for (std::size_t j = 0; j < cols; ++j) out[j] = x[row_offset + j];
    return out;
  }

  // U x: scatter into the taller vector.
  std::vector<Real> scatter(const std::vector<Real>& x) const {
    std::vector<Real> out(rows, 0.0);
    for (std::size_t j = 0; j < cols; ++j) out[row_offset + j] = x[j];
    return out;
  }

  MatR dense() const {
    MatR u(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) u(row_offset + j, j) = 1.0;
    return u;
  }
};

// P x P bank of length-L FIR demixing filters with block output length D and
// block shift R (samples between successive processed frames).
struct TimeDomainDemixer {
  // w[p][q]: filter from microphone p to output q, length L each.
  std::vector<std::vector<std::vector<Real>>> w;
  std::size_t block_length_d = 0;  // D
  std::size_t block_shift = 0;     // R

  std::size_t channels() const { return w.size(); }
  std::size_t filter_length() const {
    return w.empty() || w[0].empty() ? 0 : w[0][0].size();
  }

  void validate() const {
    const std::size_t P = channels();
    if (P == 0) throw std::invalid_argument("demixer: needs at least one channel");
    const std::size_t L = filter_length();
    if (L == 0) throw std::invalid_argument("demixer: zero filter length");
    if (block_length_d == 0 || block_length_d > L)
      throw std::invalid_argument("demixer: D must satisfy 1 <= D <= L");
    for (const auto& row : w) {
      if (row.size() != P) throw std::invalid_argument("demixer: filter bank must be square");
      for (const auto& f : row)
        if (f.size() != L) throw std::invalid_argument("demixer: ragged filter lengths");
    }
  }

  // Identity demixer: w_pq = delta(p == q) at tap 0.
  static TimeDomainDemixer identity(std::size_t channels, std::size_t filter_len,
                                    std::size_t d, std::size_t shift) {
    TimeDomainDemixer dm;
    dm.w.assign(channels, std::vector<std::vector<Real>>(
                              channels, std::vector<Real>(filter_len, 0.0)));
    for (std::size_t p = 0; p < channels; ++p) dm.w[p][p][0] = 1.0;
    dm.block_length_d = d;
    dm.block_shift = shift;
    return dm;
  }
};

// 2L x D convolution matrix: column j holds the filter shifted down by j
// (taps shifted past row 2L-1 are cut). The demixing model uses D <= L; the
// square D = 2L case is the raw lower-triangular banded block.
inline MatR toeplitz_matrix(const std::vector<Real>& w, std::size_t d) {
  const std::size_t L = w.size();
  if (L == 0) throw std::invalid_argument("toeplitz_matrix: empty filter");
  if (d == 0 || d > 2 * L)
    throw std::invalid_argument("toeplitz_matrix: D must satisfy 1 <= D <= 2L");
  MatR m(2 * L, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t l = 0; l < L && l + j < 2 * L; ++l) m(l + j, j) = w[l];
  return m;
}

// Extended demixing matrix: Toeplitz blocks plus [0; I_{2L-D}] fillers on the
// block diagonal, square 2LP x 2LP. For D = 2L no filler remains and the
// matrix is the plain block-Toeplitz system.
inline MatR extended_demixer_raw(const std::vector<std::vector<std::vector<Real>>>& w,
                                 std::size_t d) {
  const std::size_t P = w.size();
  const std::size_t L = w[0][0].size();
  if (d == 0 || d > 2 * L)
    throw std::invalid_argument("extended_demixer: D must satisfy 1 <= D <= 2L");
  MatR out(2 * L * P, 2 * L * P);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t q = 0; q < P; ++q) {
      // Toeplitz block W_pq occupies columns [q*2L, q*2L + D).
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < L && l + j < 2 * L; ++l)
          out(p * 2 * L + l + j, q * 2 * L + j) = w[p][q][l];
    }
    // [0_{D x 2L-D}; I_{2L-D}] filler in the p-th diagonal block.
    for (std::size_t i = 0; i < 2 * L - d; ++i)
      out(p * 2 * L + d + i, p * 2 * L + d + i) = 1.0;
  }
  return out;
}

inline MatR extended_demixer(const TimeDomainDemixer& dm) {
  dm.validate();
  return extended_demixer_raw(dm.w, dm.block_length_d);
}

struct PermutationPair {
  // W_bar(r, c) = W_tilde(row_map[r], col_map[c]).
  std::vector<std::size_t> row_map;
  std::vector<std::size_t> col_map;
};

// Row/column permutations taking the extended matrix to its lower
// block-triangular form [[U^T W, 0], [*, I]].
inline PermutationPair extended_permutations(std::size_t channels, std::size_t filter_len,
                                             std::size_t d) {
  const std::size_t P = channels, L = filter_len, D = d;
  PermutationPair pp;
  pp.row_map.resize(2 * L * P);
  pp.col_map.resize(2 * L * P);
  // Rows: first D rows of every channel block move to the top.
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t i = 0; i < D; ++i) pp.row_map[p * D + i] = p * 2 * L + i;
    for (std::size_t i = 0; i < 2 * L - D; ++i)
      pp.row_map[P * D + p * (2 * L - D) + i] = p * 2 * L + D + i;
  }
  // Columns: the D Toeplitz columns of every channel block move to the left.
  for (std::size_t q = 0; q < P; ++q) {
    for (std::size_t j = 0; j < D; ++j) pp.col_map[q * D + j] = q * 2 * L + j;
    for (std::size_t j = 0; j < 2 * L - D; ++j)
      pp.col_map[P * D + q * (2 * L - D) + j] = q * 2 * L + D + j;
  }
  return pp;
}

inline MatR permuted_extended(const MatR& w_tilde, const PermutationPair& pp) {
  const std::size_t n = w_tilde.rows();
  MatR out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) = w_tilde(pp.row_map[r], pp.col_map[c]);
  return out;
}

// PD x PD channel-wise truncation (U^{1_D 0})^T W: block (p, q) keeps the
// first D rows of the Toeplitz block W_pq.
inline MatR truncated_toeplitz(const TimeDomainDemixer& dm) {
  dm.validate();
  const std::size_t P = dm.channels();
  const std::size_t L = dm.filter_length();
  const std::size_t D = dm.block_length_d;
  MatR out(P * D, P * D);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j <= i && j < D; ++j)
          if (i - j < L) out(p * D + i, q * D + j) = dm.w[p][q][i - j];
  return out;
}

// log|det (U^{1_D 0})^T W|; equals log|det W_tilde| of the extended matrix.
inline Real truncated_toeplitz_log_det(const TimeDomainDemixer& dm) {
  return log_abs_det(truncated_toeplitz(dm), "truncated demixing matrix");
}

// First column of the R x R circulant embedding of the Toeplitz block:
// c[0] = w[0], c[R - m] = w[m] for m = 1..L-1, all other entries zero.
// Requires R >= 2L and L >= D so the window matrices recover the Toeplitz
// part exactly: W_pq^T = U^{1_D 0}_{D x R} C U^{1_{2L} 0}_{R x 2L}.
inline std::vector<Real> circulant_first_column(const std::vector<Real>& w,
                                                std::size_t r_fft) {
  const std::size_t L = w.size();
  if (r_fft < 2 * L) throw std::invalid_argument("circulant embedding needs R >= 2L");
  std::vector<Real> c(r_fft, 0.0);
  c[0] = w[0];
  for (std::size_t m = 1; m < L; ++m) c[r_fft - m] = w[m];
  return c;
}

inline MatR circulant_dense(const std::vector<Real>& first_col) {
  const std::size_t r = first_col.size();
  MatR c(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) c(i, j) = first_col[(i + r - j) % r];
  return c;
}

// Unitary DFT matrix handle, F(j,k) = omega^{jk} / sqrt(R), omega = e^{-j2pi/R}.
// forward() applies F, inverse() applies F^{-1} = F^H; |det F| = 1.
class DftMatrixHandle {
 public:
  explicit DftMatrixHandle(std::size_t r) : r_(r) {
    if (!is_power_of_two(r)) throw std::invalid_argument("DftMatrixHandle: power-of-two length");
  }

  std::size_t size() const { return r_; }

  std::vector<Cplx> forward(std::vector<Cplx> x) const {
    fft_inplace(x, false);
    const Real s = 1.0 / std::sqrt(static_cast<Real>(r_));
    for (auto& v : x) v *= s;
    return x;
  }

  std::vector<Cplx> inverse(std::vector<Cplx> x) const {
    fft_inplace(x, true);
    const Real s = std::sqrt(static_cast<Real>(r_));
    for (auto& v : x) v *= s;
    return x;
  }

  MatC dense() const {
    MatC f(r_, r_);
    const Real s = 1.0 / std::sqrt(static_cast<Real>(r_));
    for (std::size_t j = 0; j < r_; ++j)
      for (std::size_t k = 0; k < r_; ++k) {
        Real ang = -2.0 * kPi * static_cast<Real>(j * k % r_) / static_cast<Real>(r_);
        f(j, k) = Cplx(std::cos(ang), std::sin(ang)) * s;
      }
    return f;
  }

 private:
  std::size_t r_;
};

// Diagonal of F C F^{-1} for the circulant built from filter w: the
// unnormalized DFT of the first column, lambda_k = sum_m w[m] e^{+j2pi km/R}.
inline std::vector<Cplx> dft_diagonalize(const std::vector<Real>& w, std::size_t r_fft) {
  std::vector<Cplx> buf(r_fft, Cplx(0.0, 0.0));
  const std::vector<Real> c = circulant_first_column(w, r_fft);
  for (std::size_t i = 0; i < r_fft; ++i) buf[i] = Cplx(c[i], 0.0);
  fft_inplace(buf, false);
  return buf;
}

// Per-bin diagonalized filters of a whole demixer: spec[p][q][k].
inline std::vector<std::vector<std::vector<Cplx>>> dft_diagonalize_bank(
    const TimeDomainDemixer& dm, std::size_t r_fft) {
  dm.validate();
  const std::size_t P = dm.channels();
  std::vector<std::vector<std::vector<Cplx>>> out(
      P, std::vector<std::vector<Cplx>>(P));
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q) out[p][q] = dft_diagonalize(dm.w[p][q], r_fft);
  return out;
}

// y_q = U^{1_D 0} F^{-1} sum_p Wfd_pq F [x_p; 0]: the windowed frequency-domain
// path; computes exactly the D Toeplitz outputs (linear convolution).
// x_block[p] has 2L samples (newest first); returns D samples per channel.
inline std::vector<std::vector<Real>> apply_fd_linear(
    const std::vector<std::vector<std::vector<Cplx>>>& w_fd,
    const std::vector<std::vector<Real>>& x_block, std::size_t d) {
  const std::size_t P = w_fd.size();
  if (P == 0 || x_block.size() != P)
    throw std::invalid_argument("apply_fd_linear: channel mismatch");
  const std::size_t r_fft = w_fd[0][0].size();
  const std::size_t two_l = x_block[0].size();
  if (r_fft < 2 * (two_l / 2) || two_l % 2 != 0 || r_fft < two_l)
    throw std::invalid_argument("apply_fd_linear: need R >= 2L");
  if (d > two_l / 2) throw std::invalid_argument("apply_fd_linear: D must be <= L");

  // Zero-padded spectra of the input blocks.
  std::vector<std::vector<Cplx>> x_spec(P);
  for (std::size_t p = 0; p < P; ++p) {
    if (x_block[p].size() != two_l)
      throw std::invalid_argument("apply_fd_linear: ragged input blocks");
    std::vector<Cplx> buf(r_fft, Cplx(0.0, 0.0));
    for (std::size_t i = 0; i < two_l; ++i) buf[i] = Cplx(x_block[p][i], 0.0);
    fft_inplace(buf, false);
    x_spec[p] = std::move(buf);
  }

  std::vector<std::vector<Real>> y(P, std::vector<Real>(d, 0.0));
  std::vector<Cplx> acc(r_fft);
  for (std::size_t q = 0; q < P; ++q) {
    std::fill(acc.begin(), acc.end(), Cplx(0.0, 0.0));
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t k = 0; k < r_fft; ++k) acc[k] += w_fd[p][q][k] * x_spec[p][k];
    fft_inplace(acc, true);
    for (std::size_t j = 0; j < d; ++j) y[q][j] = acc[j].real();
  }
  return y;
}

// Full-signal FIR demixing: y_q(n) = sum_p sum_l w_pq[l] x_p(n - l),
// truncated to the input length.
inline std::vector<std::vector<Real>> apply_td_demixer(
    const TimeDomainDemixer& dm, const std::vector<std::vector<Real>>& x) {
  dm.validate();
  const std::size_t P = dm.channels();
  if (x.size() != P) throw std::invalid_argument("apply_td_demixer: channel mismatch");
  const std::size_t T = x[0].size();
  std::vector<std::vector<Real>> y(P);
  for (std::size_t q = 0; q < P; ++q) {
    std::vector<Real> acc(T, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      std::vector<Real> c = convolve(x[p], dm.w[p][q]);
      for (std::size_t n = 0; n < T; ++n) acc[n] += c[n];
    }
    y[q] = std::move(acc);
  }
  return y;
}

// Time-domain reference: y_q = sum_p W_pq^T x_p on one block.
inline std::vector<std::vector<Real>> apply_toeplitz_block(
    const TimeDomainDemixer& dm, const std::vector<std::vector<Real>>& x_block) {
  dm.validate();
  const std::size_t P = dm.channels();
  const std::size_t L = dm.filter_length();
  const std::size_t D = dm.block_length_d;
  if (x_block.size() != P) throw std::invalid_argument("apply_toeplitz_block: channel mismatch");
  std::vector<std::vector<Real>> y(P, std::vector<Real>(D, 0.0));
  for (std::size_t q = 0; q < P; ++q)
    for (std::size_t p = 0; p < P; ++p) {
      if (x_block[p].size() != 2 * L)
        throw std::invalid_argument("apply_toeplitz_block: block must have 2L samples");
      for (std::size_t j = 0; j < D; ++j) {
        Real acc = 0.0;
        for (std::size_t l = 0; l < L; ++l) acc += dm.w[p][q][l] * x_block[p][j + l];
        y[q][j] += acc;
      }
    }
  return y;
}

}  // namespace cbss

#endif  // CBSS_TOEPLITZ_HPP_
