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

#include "qbatt/entanglement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "qbatt/errors.hpp"
#include "qbatt/log.hpp"
#include "qbatt/random.hpp"

namespace qbatt {

std::vector<int> Bipartition::complement() const {
  std::vector<int> out;
  std::size_t k = 0;
  for (int n = 0; n < n_cells; ++n) {
    if (k < subset.size() && subset[k] == n) {
      ++k;
    } else {
      out.push_back(n);
    }
  }
  return out;
}

void Bipartition::validate() const {
  if (n_cells < 2) throw ArgumentError("bipartitions need at least two cells");
  if (subset.empty() || static_cast<int>(subset.size()) >= n_cells) {
    throw ArgumentError("subsystem size must lie in [1, N-1]");
  }
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] < 0 || subset[k] >= n_cells) throw ArgumentError("subsystem cell index out of range");
    if (k > 0 && subset[k] <= subset[k - 1]) throw ArgumentError("subsystem indices must be strictly increasing");
  }
}

std::vector<Bipartition> enumerate_bipartitions(int n_cells, int n_a, std::size_t cap) {
  if (n_a < 1 || n_a >= n_cells) {
    throw ArgumentError("N_A = " + std::to_string(n_a) + " outside [1, " + std::to_string(n_cells - 1) + "]");
  }
  // C(N, N_A) computed incrementally; exact for the sizes that pass the cap.
  double count = 1.0;
  for (int k = 1; k <= n_a; ++k) count = count * (n_cells - n_a + k) / k;
  if (count > static_cast<double>(cap) + 0.5) {
    throw CapacityError("C(" + std::to_string(n_cells) + ", " + std::to_string(n_a) + ") exceeds bipartition cap " +
                        std::to_string(cap));
  }
  std::vector<Bipartition> out;
  std::vector<int> idx(static_cast<std::size_t>(n_a));
  for (int k = 0; k < n_a; ++k) idx[static_cast<std::size_t>(k)] = k;
  while (true) {
    out.push_back({n_cells, idx});
    int k = n_a - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n_cells - n_a + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int m = k + 1; m < n_a; ++m) idx[static_cast<std::size_t>(m)] = idx[static_cast<std::size_t>(m - 1)] + 1;
  }
  return out;
}

namespace {

std::vector<std::size_t> scatter_offsets(const std::vector<int> &cells) {
  const std::size_t n = std::size_t{1} << cells.size();
  std::vector<std::size_t> off(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if ((a >> k) & 1U) off[a] |= std::size_t{1} << cells[k];
    }
  }
  return off;
}

void check_part(const QuantumState &state, const Bipartition &part) {
  part.validate();
  if (state.n_sites() != part.n_cells) throw ArgumentError("bipartition and state cell counts differ");
}

// Pure state reshaped to (2^N_A x 2^N_B).
CMatrix schmidt_matrix(const CVector &psi, const std::vector<std::size_t> &off_a,
                       const std::vector<std::size_t> &off_b) {
  const auto da = static_cast<Eigen::Index>(off_a.size()), db = static_cast<Eigen::Index>(off_b.size());
  CMatrix M(da, db);
  for (Eigen::Index b = 0; b < db; ++b) {
    for (Eigen::Index a = 0; a < da; ++a) {
      M(a, b) = psi(static_cast<Eigen::Index>(off_a[static_cast<std::size_t>(a)] | off_b[static_cast<std::size_t>(b)]));
    }
  }
  return M;
}

} // namespace

CMatrix reduced_density_matrix(const QuantumState &state, const Bipartition &part) {
  check_part(state, part);
  const auto off_a = scatter_offsets(part.subset);
  const auto off_b = scatter_offsets(part.complement());
  const auto da = static_cast<Eigen::Index>(off_a.size());
  switch (state.kind()) {
  case QuantumState::Kind::pure: {
    const CMatrix M = schmidt_matrix(state.vector(), off_a, off_b);
    return M * M.adjoint();
  }
  case QuantumState::Kind::mixed: {
    const CMatrix &rho = state.matrix();
    CMatrix out = CMatrix::Zero(da, da);
    for (std::size_t b : off_b) {
      for (Eigen::Index j = 0; j < da; ++j) {
        const auto col = static_cast<Eigen::Index>(off_a[static_cast<std::size_t>(j)] | b);
        for (Eigen::Index i = 0; i < da; ++i) {
          out(i, j) += rho(static_cast<Eigen::Index>(off_a[static_cast<std::size_t>(i)] | b), col);
        }
      }
    }
    return out;
  }
  case QuantumState::Kind::diagonal: {
    const RVector &p = state.diagonal_populations();
    CMatrix out = CMatrix::Zero(da, da);
    for (std::size_t b : off_b) {
      for (Eigen::Index i = 0; i < da; ++i) out(i, i) += p(static_cast<Eigen::Index>(off_a[static_cast<std::size_t>(i)] | b));
    }
    return out;
  }
  }
  return {};
}

double purity(const QuantumState &state, const Bipartition &part) {
  if (state.is_pure()) {
    check_part(state, part);
    const CMatrix M = schmidt_matrix(state.vector(), scatter_offsets(part.subset), scatter_offsets(part.complement()));
    // tr((M M^dag)^2) = tr((M^dag M)^2); use the smaller Gram matrix.
    const CMatrix G = M.rows() <= M.cols() ? CMatrix(M * M.adjoint()) : CMatrix(M.adjoint() * M);
    return G.squaredNorm();
  }
  return reduced_density_matrix(state, part).squaredNorm();
}

double renyi2(const QuantumState &state, const Bipartition &part) { return -std::log(purity(state, part)); }

EntropyGrowthReport entropy_growth(const QuantumState &initial, const QuantumState &final_state, double dt_used) {
  if (initial.dim() != final_state.dim()) throw ArgumentError("states differ in dimension");
  const int n = initial.n_sites();
  if (n < 2) throw ArgumentError("entropy growth needs at least two cells");
  EntropyGrowthReport rep;
  rep.dt_used = dt_used;
  double total = 0.0;
  for (int na = 1; na < n; ++na) {
    const auto parts = enumerate_bipartitions(n, na);
    double acc = 0.0;
    for (const auto &part : parts) acc += renyi2(final_state, part) - renyi2(initial, part);
    rep.per_size.push_back(acc / static_cast<double>(parts.size()));
    total += rep.per_size.back();
  }
  rep.average = total / static_cast<double>(n - 1);
  return rep;
}

EntropyGrowthReport entropy_growth(const ChargingTrace &trace, double dt) {
  trace.validate();
  if (trace.size() < 2) throw InsufficientDataError("entropy growth needs at least two grid points");
  const double target = trace.times.front() + dt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (std::abs(trace.times[i] - target) < std::abs(trace.times[best] - target)) best = i;
  }
  const double off = std::abs(trace.times[best] - target);
  double spacing = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) spacing = std::max(spacing, trace.times[i] - trace.times[i - 1]);
  if (off > spacing) {
    throw InsufficientDataError("trace does not reach t0 + dt = " + std::to_string(target));
  }
  if (off > 1e-3) {
    std::ostringstream msg;
    msg << "entropy_growth: nearest grid point is " << off * 1e3 << " ns from the requested interval";
    warn(msg.str());
  }
  return entropy_growth(trace.states.front(), trace.states[best], trace.times[best] - trace.times.front());
}

double noise_correct(double entropy, int n_a, int n_cells) {
  if (n_cells < 1 || n_a < 0 || n_a > n_cells) throw ArgumentError("invalid subsystem size for noise correction");
  return entropy * (1.0 - static_cast<double>(n_a) / n_cells);
}

namespace {

Local2 haar_unitary(std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  double v[4];
  double norm = 0.0;
  for (double &x : v) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  const cd a(v[0] / norm, v[1] / norm), b(v[2] / norm, v[3] / norm);
  Local2 u;
  u << a, -std::conj(b), b, std::conj(a);
  return u;
}

// rho <- (u at local position k) rho (u at k)^dagger on a 2^n_a register.
void conjugate_local(CMatrix &rho, const Local2 &u, int k) {
  const Eigen::Index d = rho.rows();
  const Eigen::Index m = Eigen::Index{1} << k;
  for (Eigen::Index col = 0; col < d; ++col) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i & m) continue;
      const cd x0 = rho(i, col), x1 = rho(i | m, col);
      rho(i, col) = u(0, 0) * x0 + u(0, 1) * x1;
      rho(i | m, col) = u(1, 0) * x0 + u(1, 1) * x1;
    }
  }
  const Local2 ud = u.adjoint();
  for (Eigen::Index row = 0; row < d; ++row) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j & m) continue;
      const cd x0 = rho(row, j), x1 = rho(row, j | m);
      rho(row, j) = x0 * ud(0, 0) + x1 * ud(1, 0);
      rho(row, j | m) = x0 * ud(0, 1) + x1 * ud(1, 1);
    }
  }
}

} // namespace

SampledPurity sampled_purity(const QuantumState &state, const Bipartition &part, int n_unitaries, int n_shots,
                             std::uint64_t seed) {
  if (part.size() > 6) throw ArgumentError("sampled purity supports N_A <= 6");
  if (n_unitaries < 2 || n_shots < 2) throw ArgumentError("need at least 2 unitaries and 2 shots");
  const CMatrix rho_a = reduced_density_matrix(state, part);
  const int na = part.size();
  const Eigen::Index d = rho_a.rows();
  // (-2)^(-D) weights indexed by Hamming distance.
  std::vector<double> weight(static_cast<std::size_t>(na) + 1);
  for (int k = 0; k <= na; ++k) weight[static_cast<std::size_t>(k)] = std::pow(-2.0, -k);

  std::vector<double> estimates(static_cast<std::size_t>(n_unitaries));
  for (int r = 0; r < n_unitaries; ++r) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    CMatrix rot = rho_a;
    for (int k = 0; k < na; ++k) conjugate_local(rot, haar_unitary(rng), k);

    // Multinomial sampling via sequential conditional binomials.
    std::vector<long> counts(static_cast<std::size_t>(d), 0);
    long left = n_shots;
    double mass = 1.0;
    for (Eigen::Index s = 0; s < d && left > 0; ++s) {
      const double p = std::max(0.0, rot(s, s).real());
      if (s + 1 == d || mass <= 0.0) {
        counts[static_cast<std::size_t>(s)] = left;
        break;
      }
      const double q = std::clamp(p / mass, 0.0, 1.0);
      std::binomial_distribution<long> bin(left, q);
      const long c = bin(rng);
      counts[static_cast<std::size_t>(s)] = c;
      left -= c;
      mass -= p;
    }

    double acc = 0.0;
    for (Eigen::Index s = 0; s < d; ++s) {
      const double ns = static_cast<double>(counts[static_cast<std::size_t>(s)]);
      if (ns == 0.0) continue;
      for (Eigen::Index t = 0; t < d; ++t) {
        const double nt = static_cast<double>(counts[static_cast<std::size_t>(t)]);
        if (nt == 0.0) continue;
        const int dist = std::popcount(static_cast<unsigned long>(s ^ t));
        const double pair = s == t ? ns * (ns - 1.0) : ns * nt;
        acc += weight[static_cast<std::size_t>(dist)] * pair;
      }
    }
    const double m = static_cast<double>(n_shots);
    estimates[static_cast<std::size_t>(r)] = static_cast<double>(d) * acc / (m * (m - 1.0));
  }

  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n_unitaries;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (n_unitaries - 1);
  return {mean, std::sqrt(var / n_unitaries)};
}

} // namespace qbatt
