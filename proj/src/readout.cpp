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

#include "qbatt/readout.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "qbatt/errors.hpp"

namespace qbatt {

namespace {

void check_distribution(const ReadoutModel &model, const RVector &p) {
  if (static_cast<std::size_t>(p.size()) != model.dim()) {
    throw ArgumentError("probability vector length does not match 2^n_qubits");
  }
  if ((p.array() < -1e-12).any()) throw ArgumentError("probability vector has negative entries");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ArgumentError("probability vector does not sum to 1");
}

// out = (M_{n-1} x ... x M_0) in, one bit at a time.
template <class GetMatrix> RVector contract(int n_qubits, const RVector &in, GetMatrix &&get) {
  RVector v = in;
  const Eigen::Index dim = v.size();
  for (int q = 0; q < n_qubits; ++q) {
    const Eigen::Matrix2d m = get(q);
    const Eigen::Index stride = Eigen::Index{1} << q;
    for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
      for (Eigen::Index i = base; i < base + stride; ++i) {
        const double a = v(i), b = v(i + stride);
        v(i) = m(0, 0) * a + m(0, 1) * b;
        v(i + stride) = m(1, 0) * a + m(1, 1) * b;
      }
    }
  }
  return v;
}

} // namespace

ReadoutModel build_readout_model(const std::vector<QubitFidelity> &fidelities) {
  if (fidelities.empty() || fidelities.size() > 30) throw ArgumentError("readout model needs 1..30 qubits");
  ReadoutModel model;
  for (std::size_t q = 0; q < fidelities.size(); ++q) {
    const auto [f0, f1] = fidelities[q];
    if (!(f0 >= 0.0 && f0 <= 1.0 && f1 >= 0.0 && f1 <= 1.0)) {
      std::ostringstream msg;
      msg << "qubit " << q << ": fidelities must lie in [0, 1]";
      throw ArgumentError(msg.str());
    }
    if (f0 + f1 <= 1.0) {
      std::ostringstream msg;
      msg << "qubit " << q << ": F0 + F1 <= 1 gives a singular response matrix";
      throw DegenerateInputError(msg.str());
    }
    if (f0 <= 0.5 || f1 <= 0.5) {
      std::ostringstream msg;
      msg << "qubit " << q << ": fidelities must exceed 0.5";
      throw ArgumentError(msg.str());
    }
    Eigen::Matrix2d a;
    a << f0, 1.0 - f1, 1.0 - f0, f1;
    model.response.push_back(a);
  }
  return model;
}

RVector apply_noise(const ReadoutModel &model, const RVector &ideal) {
  check_distribution(model, ideal);
  return contract(model.n_qubits(), ideal, [&](int q) { return model.response[static_cast<std::size_t>(q)]; });
}

RVector unbiased_inverse(const ReadoutModel &model, const RVector &noisy) {
  check_distribution(model, noisy);
  return contract(model.n_qubits(), noisy,
                  [&](int q) { return Eigen::Matrix2d(model.response[static_cast<std::size_t>(q)].inverse()); });
}

RVector mitigate(const ReadoutModel &model, const RVector &noisy) {
  RVector x = unbiased_inverse(model, noisy).cwiseMax(0.0);
  const double s = x.sum();
  if (!(s > 0.0)) throw DegenerateInputError("mitigated distribution vanishes after clipping");
  return x / s;
}

RVector inverse_standard_error(const ReadoutModel &model, const RVector &frequencies, std::uint64_t shots) {
  if (shots == 0) throw ArgumentError("shot count must be positive");
  const RVector x = unbiased_inverse(model, frequencies);
  const RVector second = contract(model.n_qubits(), frequencies, [&](int q) {
    return Eigen::Matrix2d(model.response[static_cast<std::size_t>(q)].inverse().cwiseAbs2());
  });
  return ((second.array() - x.array().square()).max(0.0) / static_cast<double>(shots)).sqrt();
}

std::vector<std::uint64_t> sample_counts(const RVector &probabilities, std::uint64_t shots, std::uint64_t seed) {
  if ((probabilities.array() < 0.0).any()) throw ArgumentError("negative probability");
  if (std::abs(probabilities.sum() - 1.0) > 1e-9) throw ArgumentError("probabilities do not sum to 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(probabilities.size()), 0);
  double remaining_mass = probabilities.sum();
  std::uint64_t remaining = shots;
  for (Eigen::Index i = 0; i < probabilities.size() && remaining > 0; ++i) {
    const double p = remaining_mass > 0.0 ? std::min(1.0, probabilities(i) / remaining_mass) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, p);
    const std::uint64_t k = (i + 1 == probabilities.size()) ? remaining : draw(rng);
    counts[static_cast<std::size_t>(i)] = k;
    remaining -= k;
    remaining_mass -= probabilities(i);
  }
  return counts;
}

RVector frequencies_from_counts(const std::vector<std::uint64_t> &counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (!(total > 0.0)) throw ArgumentError("no counts");
  RVector f(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) f(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]) / total;
  return f;
}

} // namespace qbatt
