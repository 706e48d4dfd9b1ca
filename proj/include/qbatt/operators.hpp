// Copyright 2026 The qbatt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qbatt {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<cd, Eigen::RowMajor, std::int64_t>;
using Local2 = Eigen::Matrix2cd;
using Local4 = Eigen::Matrix4cd;

// Basis convention: index b in [0, 2^N) stores cell n in bit n; bit value 0 is
// the ground state and 1 the excited state. Index 0 is the all-ground state.
inline constexpr int kMaxSites = 30;

std::size_t basis_dim(int n_sites);
int sites_for_dim(std::size_t dim);
inline bool bit_of(std::size_t index, int site) { return (index >> site) & 1U; }
int popcount(std::size_t index);

// Standard Pauli matrices in the {|0>, |1>} index basis.
Local2 pauli_x();
Local2 pauli_y();
Local2 pauli_z();
// sigma_plus = |1><0| raises ground to excited; sigma_minus is its adjoint.
Local2 sigma_plus();
Local2 sigma_minus();
// n = sigma_plus * sigma_minus = |1><1|.
Local2 number_op();
Local2 identity2();

class ManyBodyOperator {
public:
  ManyBodyOperator() = default;
  ManyBodyOperator(std::size_t dim, const std::vector<Eigen::Triplet<cd, std::int64_t>> &entries);
  explicit ManyBodyOperator(SparseMatrix matrix);

  static ManyBodyOperator zero(std::size_t dim);
  static ManyBodyOperator identity(std::size_t dim);
  static ManyBodyOperator diagonal(const RVector &diag);

  std::size_t dim() const noexcept { return dim_; }
  int n_sites() const { return sites_for_dim(dim_); }
  bool hermitian() const noexcept { return hermitian_; }
  std::size_t nnz() const { return static_cast<std::size_t>(matrix_.nonZeros()); }
  const SparseMatrix &matrix() const noexcept { return matrix_; }

  cd coeff(std::size_t row, std::size_t col) const;
  // (row, col, value) triples in row-major order.
  std::vector<std::tuple<std::size_t, std::size_t, cd>> entries() const;

  CVector apply(const CVector &x) const;
  void apply_into(const CVector &x, CVector &y) const;
  CMatrix to_dense() const;
  ManyBodyOperator adjoint() const;

  double hermiticity_defect() const;
  bool is_diagonal() const;
  // Real part of the diagonal; callers check is_diagonal() when that matters.
  RVector real_diagonal() const;

  ManyBodyOperator operator+(const ManyBodyOperator &other) const;
  ManyBodyOperator operator-(const ManyBodyOperator &other) const;
  ManyBodyOperator operator*(const ManyBodyOperator &other) const;
  ManyBodyOperator operator*(cd scalar) const;

private:
  void finalize();

  std::size_t dim_ = 0;
  SparseMatrix matrix_;
  bool hermitian_ = false;
};

inline ManyBodyOperator operator*(cd scalar, const ManyBodyOperator &op) { return op * scalar; }

inline constexpr double kHermitianTolerance = 1e-12;

ManyBodyOperator embed_local(const Local2 &local_op, int site, int n_sites);
ManyBodyOperator embed_pair(const Local2 &a, int site_a, const Local2 &b, int site_b, int n_sites);
ManyBodyOperator commutator(const ManyBodyOperator &a, const ManyBodyOperator &b);

struct SpectralOptions {
  // Dense eigensolve at or below this dimension, Lanczos above it.
  std::size_t dense_threshold = 1024;
  std::size_t capacity = std::size_t{1} << 14;
  double tolerance = 1e-11;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct SpectralRange {
  double min = 0.0;
  double max = 0.0;
  double spread() const { return max - min; }
};

SpectralRange spectral_range(const ManyBodyOperator &a, const SpectralOptions &opts = {});
// Largest singular value; equals max |eigenvalue| for Hermitian input.
double spectral_norm(const ManyBodyOperator &a, const SpectralOptions &opts = {});
RVector dense_eigenvalues(const ManyBodyOperator &a);

// Matrix-free sum of one- and two-site terms. Terms on the same sites are
// merged, so hermiticity is decided per support and holds for the sum.
class LocalTermSum {
public:
  explicit LocalTermSum(int n_sites);

  void add_single(const Local2 &op, int site);
  // op acts on (site_a, site_b) with site_a's bit as the low bit of the 4x4 index.
  void add_pair(const Local4 &op, int site_a, int site_b);
  void add_pair(const Local2 &a, int site_a, const Local2 &b, int site_b);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const { return basis_dim(n_sites_); }
  bool hermitian() const;
  bool empty() const { return singles_.empty() && pairs_.empty(); }

  // y = A x. x and y must not alias.
  void apply_into(const CVector &x, CVector &y) const;
  CVector apply(const CVector &x) const;
  ManyBodyOperator to_operator() const;

  const std::map<int, Local2> &singles() const { return singles_; }
  const std::map<std::pair<int, int>, Local4> &pairs() const { return pairs_; }

private:
  struct Kernel {
    std::vector<int> sites;
    // Row-major nonzeros per local row index: (local col, value).
    std::vector<std::vector<std::pair<int, cd>>> rows;
  };
  void rebuild();

  int n_sites_;
  std::map<int, Local2> singles_;
  std::map<std::pair<int, int>, Local4> pairs_;
  std::vector<Kernel> kernels_;
};

SpectralRange spectral_range(const LocalTermSum &a, const SpectralOptions &opts = {});

// Kronecker product with `low` on the low bit: (high ⊗ low) in index order.
Local4 kron_sites(const Local2 &low, const Local2 &high);

} // namespace qbatt
