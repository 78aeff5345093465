#pragma once

// Joint distribution of L correlated discrete sources and its entropy queries.
// The table is dense and flattened row-major with variable 1 slowest, so the
// flat index of outcome (w_1,...,w_L) is sum_i w_i * stride_i.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mwrc/rng.hpp"
#include "mwrc/subset.hpp"

namespace mwrc {

inline constexpr int kMaxUsers = 12;
inline constexpr double kPmfSumTolerance = 1e-12;
// Dense joint tables larger than this are rejected up front.
inline constexpr std::int64_t kMaxOutcomes = std::int64_t{1} << 24;

struct JointPmf {
  int L = 0;
  std::vector<int> alphabet_sizes;  // size L, each >= 1
  Eigen::VectorXd probs;            // size prod(alphabet_sizes)

  Eigen::Index n_outcomes() const { return probs.size(); }
};

// Checks shape, nonnegativity and normalization (sum within kPmfSumTolerance
// of 1); returns the table unmodified. Negativity is reported before the sum.
JointPmf validate(const std::vector<int>& alphabet_sizes,
                  const Eigen::VectorXd& probs);

// Flat row-major strides, slowest variable first.
std::vector<std::int64_t> strides(const JointPmf& pmf);

// Per-variable symbols of a flat outcome index.
std::vector<int> outcome_symbols(const JointPmf& pmf, std::int64_t flat);

// H(W_S) in bits from the exact marginal over S. S must be nonempty.
double entropy(const JointPmf& pmf, SubsetMask S);

// H(W_S | W_T) = H(W_{S u T}) - H(W_T); S nonempty, disjoint from T.
// T may be empty, in which case this is H(W_S).
double conditional_entropy(const JointPmf& pmf, SubsetMask S, SubsetMask T);

// H(W_S) for every mask S, indexed by mask; entry 0 is 0.
Eigen::VectorXd subset_entropies(const JointPmf& pmf);

// m i.i.d. joint draws; row t is one outcome, column i-1 holds user i's
// symbol. Deterministic for a given seed.
Eigen::MatrixXi sample(const JointPmf& pmf, int m, std::uint64_t seed);
Eigen::MatrixXi sample(const JointPmf& pmf, int m, SplitMix64& rng);

}  // namespace mwrc
