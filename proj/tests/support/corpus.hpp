#pragma once

// Shared source/channel constructions for tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mwrc/channel.hpp"
#include "mwrc/distribution.hpp"
#include "mwrc/rng.hpp"

namespace corpus {

// Three uniform bits with w3 = w1 xor w2.
inline mwrc::JointPmf xor_triple() {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
  for (int w1 = 0; w1 < 2; ++w1)
    for (int w2 = 0; w2 < 2; ++w2) p[w1 * 4 + w2 * 2 + (w1 ^ w2)] = 0.25;
  return mwrc::validate({2, 2, 2}, p);
}

// L independent fair bits.
inline mwrc::JointPmf independent_bits(int L) {
  const Eigen::Index n = Eigen::Index{1} << L;
  return mwrc::validate(std::vector<int>(L, 2),
                        Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

// One fair bit copied to all three users.
inline mwrc::JointPmf identical_triple() {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
  p[0] = 0.5;
  p[7] = 0.5;
  return mwrc::validate({2, 2, 2}, p);
}

// W1 = W2 (one fair bit), W3 an independent fair bit.
inline mwrc::JointPmf pair_plus_solo() {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
  for (int w = 0; w < 2; ++w)
    for (int v = 0; v < 2; ++v) p[w * 4 + w * 2 + v] = 0.25;
  return mwrc::validate({2, 2, 2}, p);
}

// Uniform draw from the probability simplex (Dirichlet(1,...,1)).
inline mwrc::JointPmf dirichlet(const std::vector<int>& alphabet_sizes,
                                std::uint64_t seed) {
  std::int64_t n = 1;
  for (int a : alphabet_sizes) n *= a;
  mwrc::SplitMix64 rng(seed);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i)
    p[i] = -std::log(1.0 - rng.uniform01());
  p /= p.sum();
  p[0] += 1.0 - p.sum();  // pin the sum to 1 exactly
  return mwrc::validate(alphabet_sizes, p);
}

// Average of a table over all user permutations (equal alphabets only):
// the result is exchangeable, so all atoms of one weight coincide.
inline mwrc::JointPmf symmetrized(const mwrc::JointPmf& base) {
  const int L = base.L;
  const int a = base.alphabet_sizes[0];
  std::vector<int> perm(L);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(base.probs.size());
  int count = 0;
  do {
    for (Eigen::Index flat = 0; flat < base.probs.size(); ++flat) {
      const auto sym = mwrc::outcome_symbols(base, flat);
      std::int64_t idx = 0;
      for (int i = 0; i < L; ++i) idx = idx * a + sym[perm[i]];
      acc[idx] += base.probs[flat];
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  acc /= static_cast<double>(count);
  acc[0] += 1.0 - acc.sum();
  return mwrc::validate(base.alphabet_sizes, acc);
}

// Independent users: the joint table is the product of random marginals, so
// every atom of weight >= 2 vanishes (up to rounding).
inline mwrc::JointPmf product_table(const std::vector<int>& alphabet_sizes,
                                    std::uint64_t seed) {
  mwrc::SplitMix64 rng(seed);
  std::vector<Eigen::VectorXd> marg;
  std::int64_t n = 1;
  for (int a : alphabet_sizes) {
    Eigen::VectorXd p(a);
    for (int i = 0; i < a; ++i) p[i] = -std::log(1.0 - rng.uniform01());
    p /= p.sum();
    marg.push_back(p);
    n *= a;
  }
  Eigen::VectorXd probs(n);
  for (std::int64_t flat = 0; flat < n; ++flat) {
    std::int64_t rest = flat;
    double p = 1.0;
    for (int i = static_cast<int>(alphabet_sizes.size()) - 1; i >= 0; --i) {
      p *= marg[i][rest % alphabet_sizes[i]];
      rest /= alphabet_sizes[i];
    }
    probs[flat] = p;
  }
  probs /= probs.sum();
  probs[0] += 1.0 - probs.sum();
  return mwrc::validate(alphabet_sizes, probs);
}

// One random variable copied to every user: only the full-weight atom is
// nonzero, so every tested weight is trivially balanced.
inline mwrc::JointPmf copied_table(int L, int a, std::uint64_t seed) {
  mwrc::SplitMix64 rng(seed);
  Eigen::VectorXd base(a);
  for (int i = 0; i < a; ++i) base[i] = -std::log(1.0 - rng.uniform01());
  base /= base.sum();
  base[0] += 1.0 - base.sum();
  std::int64_t n = 1, diag = 0;
  for (int i = 0; i < L; ++i) {
    n *= a;
    diag = diag * a + 1;  // stride of (v, v, ..., v) per unit of v
  }
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < a; ++v) probs[v * diag] = base[v];
  return mwrc::validate(std::vector<int>(L, a), probs);
}

inline Eigen::VectorXd delta_noise(int q) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(q);
  p[0] = 1.0;
  return p;
}

// 1 - eps at 0, eps spread evenly over the other field elements.
inline Eigen::VectorXd symmetric_noise(int q, double eps) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(q, eps / (q - 1));
  p[0] = 1.0 - eps;
  return p;
}

inline mwrc::ChannelSpec noiseless_channel(int q, int L) {
  return mwrc::validate_channel(
      q, delta_noise(q), std::vector<Eigen::VectorXd>(L, delta_noise(q)));
}

inline mwrc::ChannelSpec symmetric_channel(int q, int L, double eps_relay,
                                           double eps_user) {
  return mwrc::validate_channel(
      q, symmetric_noise(q, eps_relay),
      std::vector<Eigen::VectorXd>(L, symmetric_noise(q, eps_user)));
}

}  // namespace corpus
