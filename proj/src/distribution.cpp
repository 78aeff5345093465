#include "mwrc/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwrc/error.hpp"

namespace mwrc {

JointPmf validate(const std::vector<int>& alphabet_sizes,
                  const Eigen::VectorXd& probs) {
  const int L = static_cast<int>(alphabet_sizes.size());
  if (L < 2 || L > kMaxUsers)
    fail(Errc::shape_mismatch, "user count L=" + std::to_string(L) +
                                   " outside supported range [2, " +
                                   std::to_string(kMaxUsers) + "]");
  std::int64_t n = 1;
  for (int a : alphabet_sizes) {
    if (a < 1)
      fail(Errc::shape_mismatch,
           "alphabet size " + std::to_string(a) + " is not positive");
    n *= a;
    if (n > kMaxOutcomes)
      fail(Errc::shape_mismatch, "joint table exceeds " +
                                     std::to_string(kMaxOutcomes) +
                                     " outcomes");
  }
  if (probs.size() != n)
    fail(Errc::shape_mismatch, "probability table has " +
                                   std::to_string(probs.size()) +
                                   " entries, expected " + std::to_string(n));
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs[i] < 0.0)
      fail(Errc::negative_probability,
           "entry " + std::to_string(i) + " is " + std::to_string(probs[i]));
  const double sum = probs.sum();
  if (std::abs(sum - 1.0) > kPmfSumTolerance)
    fail(Errc::sum_not_one, "probabilities sum to " + std::to_string(sum));

  JointPmf pmf;
  pmf.L = L;
  pmf.alphabet_sizes = alphabet_sizes;
  pmf.probs = probs;
  return pmf;
}

std::vector<std::int64_t> strides(const JointPmf& pmf) {
  std::vector<std::int64_t> s(pmf.L);
  std::int64_t acc = 1;
  for (int i = pmf.L - 1; i >= 0; --i) {
    s[i] = acc;
    acc *= pmf.alphabet_sizes[i];
  }
  return s;
}

std::vector<int> outcome_symbols(const JointPmf& pmf, std::int64_t flat) {
  std::vector<int> sym(pmf.L);
  for (int i = pmf.L - 1; i >= 0; --i) {
    sym[i] = static_cast<int>(flat % pmf.alphabet_sizes[i]);
    flat /= pmf.alphabet_sizes[i];
  }
  return sym;
}

namespace {

void check_mask(const JointPmf& pmf, SubsetMask S, const char* what) {
  if (S == 0) fail(Errc::empty_subset, std::string(what) + " is empty");
  if (S >= (SubsetMask{1} << pmf.L))
    fail(Errc::parameter_out_of_range,
         std::string(what) + " " + subset_to_string(S) +
             " references users beyond L=" + std::to_string(pmf.L));
}

// Exact marginal over the variables in S, row-major in their natural order.
std::vector<double> marginal(const JointPmf& pmf, SubsetMask S) {
  const auto st = strides(pmf);
  std::int64_t msize = 1;
  for (int i = 0; i < pmf.L; ++i)
    if (contains(S, i + 1)) msize *= pmf.alphabet_sizes[i];
  std::vector<double> marg(static_cast<std::size_t>(msize), 0.0);
  for (Eigen::Index flat = 0; flat < pmf.probs.size(); ++flat) {
    const double p = pmf.probs[flat];
    if (p == 0.0) continue;
    std::int64_t midx = 0;
    for (int i = 0; i < pmf.L; ++i) {
      if (!contains(S, i + 1)) continue;
      const int sym = static_cast<int>((flat / st[i]) % pmf.alphabet_sizes[i]);
      midx = midx * pmf.alphabet_sizes[i] + sym;
    }
    marg[static_cast<std::size_t>(midx)] += p;
  }
  return marg;
}

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

}  // namespace

double entropy(const JointPmf& pmf, SubsetMask S) {
  check_mask(pmf, S, "subset");
  return entropy_of(marginal(pmf, S));
}

double conditional_entropy(const JointPmf& pmf, SubsetMask S, SubsetMask T) {
  check_mask(pmf, S, "subset");
  if (T != 0 && T >= (SubsetMask{1} << pmf.L))
    fail(Errc::parameter_out_of_range,
         "conditioning set references users beyond L=" + std::to_string(pmf.L));
  if (S & T)
    fail(Errc::overlapping_subsets, "subsets " + subset_to_string(S) + " and " +
                                        subset_to_string(T) + " overlap");
  if (T == 0) return entropy(pmf, S);
  return entropy(pmf, S | T) - entropy(pmf, T);
}

Eigen::VectorXd subset_entropies(const JointPmf& pmf) {
  const SubsetMask full = full_mask(pmf.L);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full) + 1);
  for (SubsetMask S = 1; S <= full; ++S) h[S] = entropy(pmf, S);
  return h;
}

Eigen::MatrixXi sample(const JointPmf& pmf, int m, SplitMix64& rng) {
  if (m < 1)
    fail(Errc::parameter_out_of_range,
         "block length m=" + std::to_string(m) + " must be positive");
  const Eigen::Index n = pmf.probs.size();
  std::vector<double> cum(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += pmf.probs[i];
    cum[static_cast<std::size_t>(i)] = acc;
  }
  const double total = acc;

  Eigen::MatrixXi out(m, pmf.L);
  for (int t = 0; t < m; ++t) {
    const double u = rng.uniform01() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::int64_t flat = (it == cum.end()) ? n - 1 : it - cum.begin();
    const auto sym = outcome_symbols(pmf, flat);
    for (int i = 0; i < pmf.L; ++i) out(t, i) = sym[i];
  }
  return out;
}

Eigen::MatrixXi sample(const JointPmf& pmf, int m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample(pmf, m, rng);
}

}  // namespace mwrc
