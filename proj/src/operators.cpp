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

#include "qbatt/operators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "krylov.hpp"
#include "qbatt/errors.hpp"

namespace qbatt {

using Triplet = Eigen::Triplet<cd, std::int64_t>;

std::size_t basis_dim(int n_sites) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw ArgumentError("cell count must lie in [1, " + std::to_string(kMaxSites) + "], got " +
                        std::to_string(n_sites));
  }
  return std::size_t{1} << n_sites;
}

int sites_for_dim(std::size_t dim) {
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw ArgumentError("dimension " + std::to_string(dim) + " is not a power of two >= 2");
  }
  return std::countr_zero(dim);
}

int popcount(std::size_t index) { return std::popcount(index); }

Local2 pauli_x() {
  Local2 m;
  m << 0, 1, 1, 0;
  return m;
}

Local2 pauli_y() {
  Local2 m;
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

Local2 pauli_z() {
  Local2 m;
  m << 1, 0, 0, -1;
  return m;
}

Local2 sigma_plus() {
  Local2 m;
  m << 0, 0, 1, 0;
  return m;
}

Local2 sigma_minus() { return sigma_plus().adjoint(); }

Local2 number_op() {
  Local2 m;
  m << 0, 0, 0, 1;
  return m;
}

Local2 identity2() { return Local2::Identity(); }

Local4 kron_sites(const Local2 &low, const Local2 &high) {
  Local4 out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out(r, c) = high(r >> 1, c >> 1) * low(r & 1, c & 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ManyBodyOperator

ManyBodyOperator::ManyBodyOperator(std::size_t dim, const std::vector<Triplet> &entries) : dim_(dim) {
  sites_for_dim(dim);
  const auto n = static_cast<std::int64_t>(dim);
  for (const auto &t : entries) {
    if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n) {
      throw ArgumentError("operator entry out of range");
    }
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(entries.begin(), entries.end());
  finalize();
}

ManyBodyOperator::ManyBodyOperator(SparseMatrix matrix) : dim_(static_cast<std::size_t>(matrix.rows())) {
  if (matrix.rows() != matrix.cols()) throw ArgumentError("operator matrix must be square");
  sites_for_dim(dim_);
  matrix_ = std::move(matrix);
  finalize();
}

void ManyBodyOperator::finalize() {
  matrix_.prune(cd(0.0, 0.0), 0.0);
  matrix_.makeCompressed();
  hermitian_ = hermiticity_defect() < kHermitianTolerance;
}

ManyBodyOperator ManyBodyOperator::zero(std::size_t dim) { return ManyBodyOperator(dim, {}); }

ManyBodyOperator ManyBodyOperator::identity(std::size_t dim) {
  std::vector<Triplet> t;
  t.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) t.emplace_back(i, i, 1.0);
  return ManyBodyOperator(dim, t);
}

ManyBodyOperator ManyBodyOperator::diagonal(const RVector &diag) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) t.emplace_back(i, i, diag(i));
  return ManyBodyOperator(static_cast<std::size_t>(diag.size()), t);
}

cd ManyBodyOperator::coeff(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw ArgumentError("operator index out of range");
  return matrix_.coeff(static_cast<std::int64_t>(row), static_cast<std::int64_t>(col));
}

std::vector<std::tuple<std::size_t, std::size_t, cd>> ManyBodyOperator::entries() const {
  std::vector<std::tuple<std::size_t, std::size_t, cd>> out;
  out.reserve(nnz());
  for (std::int64_t r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      out.emplace_back(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value());
    }
  }
  return out;
}

CVector ManyBodyOperator::apply(const CVector &x) const {
  CVector y;
  apply_into(x, y);
  return y;
}

void ManyBodyOperator::apply_into(const CVector &x, CVector &y) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw ArgumentError("vector dimension mismatch");
  y.noalias() = matrix_ * x;
}

CMatrix ManyBodyOperator::to_dense() const { return CMatrix(matrix_); }

ManyBodyOperator ManyBodyOperator::adjoint() const { return ManyBodyOperator(SparseMatrix(matrix_.adjoint())); }

double ManyBodyOperator::hermiticity_defect() const {
  if (dim_ == 0) return 0.0;
  SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double worst = 0.0;
  for (std::int64_t r = 0; r < diff.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

bool ManyBodyOperator::is_diagonal() const {
  for (std::int64_t r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.row() != it.col()) return false;
    }
  }
  return true;
}

RVector ManyBodyOperator::real_diagonal() const {
  RVector d = RVector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::int64_t r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.row() == it.col()) d(it.row()) = it.value().real();
    }
  }
  return d;
}

namespace {
void require_same_dim(const ManyBodyOperator &a, const ManyBodyOperator &b) {
  if (a.dim() != b.dim()) {
    throw ArgumentError("operator dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}
} // namespace

ManyBodyOperator ManyBodyOperator::operator+(const ManyBodyOperator &other) const {
  require_same_dim(*this, other);
  return ManyBodyOperator(SparseMatrix(matrix_ + other.matrix_));
}

ManyBodyOperator ManyBodyOperator::operator-(const ManyBodyOperator &other) const {
  require_same_dim(*this, other);
  return ManyBodyOperator(SparseMatrix(matrix_ - other.matrix_));
}

ManyBodyOperator ManyBodyOperator::operator*(const ManyBodyOperator &other) const {
  require_same_dim(*this, other);
  return ManyBodyOperator(SparseMatrix(matrix_ * other.matrix_));
}

ManyBodyOperator ManyBodyOperator::operator*(cd scalar) const { return ManyBodyOperator(SparseMatrix(matrix_ * scalar)); }

// ---------------------------------------------------------------------------
// Construction

ManyBodyOperator embed_local(const Local2 &local_op, int site, int n_sites) {
  const std::size_t dim = basis_dim(n_sites);
  if (site < 0 || site >= n_sites) {
    throw ArgumentError("site " + std::to_string(site) + " out of range for " + std::to_string(n_sites) + " cells");
  }
  const std::size_t mask = std::size_t{1} << site;
  std::vector<Triplet> t;
  t.reserve(2 * dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const int c = bit_of(col, site);
    for (int r = 0; r < 2; ++r) {
      const cd v = local_op(r, c);
      if (v == cd(0.0, 0.0)) continue;
      const std::size_t row = r ? (col | mask) : (col & ~mask);
      t.emplace_back(row, col, v);
    }
  }
  return ManyBodyOperator(dim, t);
}

ManyBodyOperator embed_pair(const Local2 &a, int site_a, const Local2 &b, int site_b, int n_sites) {
  if (site_a == site_b) throw ArgumentError("pair sites must differ");
  return embed_local(a, site_a, n_sites) * embed_local(b, site_b, n_sites);
}

ManyBodyOperator commutator(const ManyBodyOperator &a, const ManyBodyOperator &b) {
  require_same_dim(a, b);
  return ManyBodyOperator(SparseMatrix(a.matrix() * b.matrix() - b.matrix() * a.matrix()));
}

// ---------------------------------------------------------------------------
// Spectra

RVector dense_eigenvalues(const ManyBodyOperator &a) {
  if (!a.hermitian()) throw ContractViolation("eigenvalues requested for a non-Hermitian operator");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.to_dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");
  return solver.eigenvalues();
}

SpectralRange spectral_range(const ManyBodyOperator &a, const SpectralOptions &opts) {
  if (!a.hermitian()) throw ContractViolation("spectral_range requires a Hermitian operator");
  if (a.dim() > opts.capacity) {
    throw CapacityError("dimension " + std::to_string(a.dim()) + " exceeds spectral capacity " +
                        std::to_string(opts.capacity));
  }
  if (a.dim() <= opts.dense_threshold) {
    RVector ev = dense_eigenvalues(a);
    return {ev(0), ev(ev.size() - 1)};
  }
  return detail::lanczos_range([&](const CVector &x, CVector &y) { a.apply_into(x, y); }, a.dim(), opts);
}

double spectral_norm(const ManyBodyOperator &a, const SpectralOptions &opts) {
  if (a.hermitian()) {
    const SpectralRange r = spectral_range(a, opts);
    return std::max(std::abs(r.min), std::abs(r.max));
  }
  const ManyBodyOperator gram = a.adjoint() * a;
  return std::sqrt(std::max(0.0, spectral_range(gram, opts).max));
}

// ---------------------------------------------------------------------------
// LocalTermSum

LocalTermSum::LocalTermSum(int n_sites) : n_sites_(n_sites) { basis_dim(n_sites); }

void LocalTermSum::add_single(const Local2 &op, int site) {
  if (site < 0 || site >= n_sites_) throw ArgumentError("site out of range");
  auto [it, inserted] = singles_.try_emplace(site, Local2::Zero());
  it->second += op;
  rebuild();
}

void LocalTermSum::add_pair(const Local4 &op, int site_a, int site_b) {
  if (site_a < 0 || site_a >= n_sites_ || site_b < 0 || site_b >= n_sites_ || site_a == site_b) {
    throw ArgumentError("pair sites out of range or equal");
  }
  Local4 m = op;
  if (site_a > site_b) {
    // Swap the roles of the two local bits so the lower site is the low bit.
    const int perm[4] = {0, 2, 1, 3};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m(perm[r], perm[c]) = op(r, c);
    }
    std::swap(site_a, site_b);
  }
  auto [it, inserted] = pairs_.try_emplace({site_a, site_b}, Local4::Zero());
  it->second += m;
  rebuild();
}

void LocalTermSum::add_pair(const Local2 &a, int site_a, const Local2 &b, int site_b) {
  add_pair(kron_sites(a, b), site_a, site_b);
}

bool LocalTermSum::hermitian() const {
  for (const auto &[site, m] : singles_) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() >= kHermitianTolerance) return false;
  }
  for (const auto &[sites, m] : pairs_) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() >= kHermitianTolerance) return false;
  }
  return true;
}

void LocalTermSum::rebuild() {
  kernels_.clear();
  for (const auto &[site, m] : singles_) {
    Kernel k{{site}, std::vector<std::vector<std::pair<int, cd>>>(2)};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        if (m(r, c) != cd(0.0, 0.0)) k.rows[static_cast<std::size_t>(r)].emplace_back(c, m(r, c));
      }
    }
    kernels_.push_back(std::move(k));
  }
  for (const auto &[sites, m] : pairs_) {
    Kernel k{{sites.first, sites.second}, std::vector<std::vector<std::pair<int, cd>>>(4)};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (m(r, c) != cd(0.0, 0.0)) k.rows[static_cast<std::size_t>(r)].emplace_back(c, m(r, c));
      }
    }
    kernels_.push_back(std::move(k));
  }
}

void LocalTermSum::apply_into(const CVector &x, CVector &y) const {
  const std::size_t dim = this->dim();
  if (static_cast<std::size_t>(x.size()) != dim) throw ArgumentError("vector dimension mismatch");
  y.resize(x.size());

  // Flattened kernels: up to four nonzeros per local row, stored as
  // (input offset, re, im). Products are spelled out in real arithmetic so the
  // compiler does not route them through the NaN-safe complex multiply.
  struct Entry {
    std::size_t offset;
    double re, im;
  };
  struct Flat {
    std::size_t mask;
    int s0, s1;
    int count[4];
    Entry entries[4][4];
  };
  std::vector<Flat> flat;
  flat.reserve(kernels_.size());
  for (const auto &k : kernels_) {
    Flat f{};
    f.s0 = k.sites[0];
    f.s1 = k.sites.size() > 1 ? k.sites[1] : f.s0;
    f.mask = (std::size_t{1} << f.s0) | (std::size_t{1} << f.s1);
    auto offset = [&](int local) {
      std::size_t off = static_cast<std::size_t>(local & 1) << f.s0;
      if (k.sites.size() > 1) off |= static_cast<std::size_t>((local >> 1) & 1) << f.s1;
      return off;
    };
    const int n_rows = static_cast<int>(k.rows.size());
    for (int r = 0; r < 4; ++r) {
      // Single-site kernels see the same row for both values of the absent bit.
      const auto &row = k.rows[static_cast<std::size_t>(n_rows == 2 ? (r & 1) : r)];
      f.count[r] = static_cast<int>(row.size());
      for (std::size_t e = 0; e < row.size(); ++e) f.entries[r][e] = {offset(row[e].first), row[e].second.real(), row[e].second.imag()};
    }
    flat.push_back(f);
  }

  const double *xp = reinterpret_cast<const double *>(x.data());
  double *yp = reinterpret_cast<double *>(y.data());
  for (std::size_t b = 0; b < dim; ++b) {
    double re = 0.0, im = 0.0;
    for (const auto &f : flat) {
      const int r = static_cast<int>(((b >> f.s0) & 1U) | (((b >> f.s1) & 1U) << 1));
      const std::size_t base = b & ~f.mask;
      for (int e = 0; e < f.count[r]; ++e) {
        const Entry &en = f.entries[r][e];
        const double *xv = xp + 2 * (base | en.offset);
        re += en.re * xv[0] - en.im * xv[1];
        im += en.re * xv[1] + en.im * xv[0];
      }
    }
    yp[2 * b] = re;
    yp[2 * b + 1] = im;
  }
}

CVector LocalTermSum::apply(const CVector &x) const {
  CVector y;
  apply_into(x, y);
  return y;
}

ManyBodyOperator LocalTermSum::to_operator() const {
  const std::size_t dim = this->dim();
  std::vector<Triplet> t;
  for (const auto &k : kernels_) {
    const int s0 = k.sites[0];
    const int s1 = k.sites.size() > 1 ? k.sites[1] : -1;
    std::size_t mask = std::size_t{1} << s0;
    if (s1 >= 0) mask |= std::size_t{1} << s1;
    auto offset = [&](int l) {
      std::size_t off = static_cast<std::size_t>(l & 1) << s0;
      if (s1 >= 0) off |= static_cast<std::size_t>((l >> 1) & 1) << s1;
      return off;
    };
    for (std::size_t b = 0; b < dim; ++b) {
      int r = bit_of(b, s0);
      if (s1 >= 0) r |= bit_of(b, s1) << 1;
      for (const auto &[c, v] : k.rows[static_cast<std::size_t>(r)]) t.emplace_back(b, (b & ~mask) | offset(c), v);
    }
  }
  return ManyBodyOperator(dim, t);
}

SpectralRange spectral_range(const LocalTermSum &a, const SpectralOptions &opts) {
  if (!a.hermitian()) throw ContractViolation("spectral_range requires a Hermitian operator");
  if (a.dim() > opts.capacity) {
    throw CapacityError("dimension " + std::to_string(a.dim()) + " exceeds spectral capacity " +
                        std::to_string(opts.capacity));
  }
  if (a.dim() <= opts.dense_threshold) return spectral_range(a.to_operator(), opts);
  return detail::lanczos_range([&](const CVector &x, CVector &y) { a.apply_into(x, y); }, a.dim(), opts);
}

} // namespace qbatt
