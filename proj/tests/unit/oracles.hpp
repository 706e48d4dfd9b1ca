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

// Independent reference constructions used as test oracles. Nothing here
// calls into the library's builders.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat sx() { return (Mat(2, 2) << 0, 1, 1, 0).finished(); }
inline Mat sp() { return (Mat(2, 2) << 0, 0, 1, 0).finished(); } // |1><0|
inline Mat sm() { return sp().adjoint(); }
inline Mat sz() { return (Mat(2, 2) << 1, 0, 0, -1).finished(); }
inline Mat nop() { return (Mat(2, 2) << 0, 0, 0, 1).finished(); }

// Operator on `site` of an n-site register; site k is bit k, so the
// Kronecker order runs from the highest site down to site 0.
inline Mat on_sites(int n, const std::vector<std::pair<int, Mat>> &factors) {
  Mat out = Mat::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    Mat f = Mat::Identity(2, 2);
    for (const auto &[s, m] : factors) {
      if (s == k) f = m;
    }
    Mat next = Eigen::kroneckerProduct(out, f).eval();
    out = next;
  }
  return out;
}

inline Mat h0(int n, double omega) {
  Mat h = Mat::Zero(1 << n, 1 << n);
  for (int k = 0; k < n; ++k) h += omega * on_sites(n, {{k, nop()}});
  return h;
}

inline Mat vcl(int n, double Omega) {
  Mat v = Mat::Zero(1 << n, 1 << n);
  for (int k = 0; k < n; ++k) v += Omega * on_sites(n, {{k, sx()}});
  return v;
}

inline Mat vqu(int n, const std::vector<double> &g) {
  Mat v = Mat::Zero(1 << n, 1 << n);
  for (int k = 0; k + 1 < n; ++k) {
    v += g[static_cast<std::size_t>(k)] * (on_sites(n, {{k, sp()}, {k + 1, sp()}}) + on_sites(n, {{k, sm()}, {k + 1, sm()}}));
  }
  return v;
}

inline Eigen::VectorXd eigenvalues(const Mat &h) { return Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues(); }

inline Vec random_state(std::mt19937_64 &rng, int dim) {
  std::normal_distribution<double> nd;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(nd(rng), nd(rng));
  return v / v.norm();
}

inline Mat random_density(std::mt19937_64 &rng, int dim, int rank) {
  Mat rho = Mat::Zero(dim, dim);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int r = 0; r < rank; ++r) {
    const Vec v = random_state(rng, dim);
    rho += u(rng) * v * v.adjoint();
  }
  return rho / rho.trace().real();
}

inline Mat random_unitary(std::mt19937_64 &rng, int dim) {
  std::normal_distribution<double> nd;
  Mat z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = cd(nd(rng), nd(rng));
  Eigen::HouseholderQR<Mat> qr(z);
  return qr.householderQ();
}

// min over permutations of sum p_{pi(i)} e_i.
inline double permutation_passive_energy(const std::vector<double> &p, const std::vector<double> &e) {
  std::vector<int> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) s += p[static_cast<std::size_t>(idx[i])] * e[i];
    best = std::min(best, s);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

// rho_A by summing over basis indices; bit k of the A index is cell subset[k].
inline Mat partial_trace(const Mat &rho, int n, const std::vector<int> &subset) {
  const int na = static_cast<int>(subset.size());
  Mat out = Mat::Zero(1 << na, 1 << na);
  const int dim = 1 << n;
  auto a_index = [&](int b) {
    int a = 0;
    for (int k = 0; k < na; ++k) a |= ((b >> subset[static_cast<std::size_t>(k)]) & 1) << k;
    return a;
  };
  auto b_part = [&](int b) {
    int mask = 0;
    for (int s : subset) mask |= 1 << s;
    return b & ~mask;
  };
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (b_part(i) == b_part(j)) out(a_index(i), a_index(j)) += rho(i, j);
  return out;
}

// Column-stacked Lindblad generator: -i(I x H - H^T x I) + sum_k D[L_k].
inline Mat liouvillian(const Mat &H, const std::vector<std::pair<double, Mat>> &jumps) {
  const int d = static_cast<int>(H.rows());
  const Mat I = Mat::Identity(d, d);
  Mat L = cd(0, -1) * (Eigen::kroneckerProduct(I, H).eval() - Eigen::kroneckerProduct(H.transpose(), I).eval());
  for (const auto &[rate, op] : jumps) {
    const Mat ldl = op.adjoint() * op;
    L += rate * (Eigen::kroneckerProduct(op.conjugate(), op).eval() - 0.5 * Eigen::kroneckerProduct(I, ldl).eval() -
                 0.5 * Eigen::kroneckerProduct(ldl.transpose(), I).eval());
  }
  return L;
}

inline Mat evolve_liouvillian(const Mat &L, const Mat &rho0, double t) {
  const int d = static_cast<int>(rho0.rows());
  Vec v = Eigen::Map<const Vec>(rho0.data(), d * d);
  const Mat prop = (L * t).exp();
  const Vec out = prop * v;
  return Eigen::Map<const Mat>(out.data(), d, d);
}

} // namespace oracle
