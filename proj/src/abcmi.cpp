#include "mwrc/abcmi.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mwrc/error.hpp"

namespace mwrc {

std::int64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n)
    fail(Errc::parameter_out_of_range,
         "binomial(" + std::to_string(n) + ", " + std::to_string(k) + ")");
  if (n > 60)
    fail(Errc::parameter_out_of_range,
         "binomial overflow guard: n=" + std::to_string(n));
  k = std::min(k, n - k);
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;  // exact: c*(n-k+i) is divisible by i here
  }
  return c;
}

namespace {

void check_alpha_domain(int L, int S, int K) {
  if (!(2 <= K && K <= S && S <= L - 2))
    fail(Errc::parameter_out_of_range,
         "need 2 <= K <= S <= L-2, got L=" + std::to_string(L) +
             " S=" + std::to_string(S) + " K=" + std::to_string(K));
}

}  // namespace

std::int64_t alpha(int L, int S, int K) {
  check_alpha_domain(L, S, K);
  return S * binomial(L - 1, K) - static_cast<std::int64_t>(S - K) * binomial(S, K);
}

std::int64_t beta(int L, int S, int K) {
  check_alpha_domain(L, S, K);
  return S * binomial(L - 1, K) - static_cast<std::int64_t>(L - 1) * binomial(S, K);
}

double weight_bound(int L, int K) {
  if (L < 3 || L > kMaxUsers)
    fail(Errc::parameter_out_of_range,
         "user count L=" + std::to_string(L) + " outside [3, " +
             std::to_string(kMaxUsers) + "]");
  if (K < 2 || K > L - 1)
    fail(Errc::weight_out_of_range,
         "weight " + std::to_string(K) + " outside [2, " +
             std::to_string(L - 1) + "]");
  if (K == L - 1) return 1.0 + 1.0 / (L - 2);
  double best = std::numeric_limits<double>::infinity();
  for (int S = K; S <= L - 2; ++S) {
    const std::int64_t a = alpha(L, S, K);
    if (a == 0)
      fail(Errc::division_by_zero, "alpha(L=" + std::to_string(L) +
                                       ", S=" + std::to_string(S) +
                                       ", K=" + std::to_string(K) + ") is 0");
    best = std::min(best, static_cast<double>(beta(L, S, K)) /
                              static_cast<double>(a));
  }
  return 1.0 + best / (K - 1);
}

AbcmiReport check_abcmi(const AtomTable& atoms) {
  AbcmiReport report;
  report.L = atoms.L;
  report.overall = true;
  report.negative_atoms = false;
  for (int K = 2; K <= atoms.L - 1; ++K) {
    const WeightExtrema ext = weight_extrema(atoms, K);
    AbcmiWeightRecord rec;
    rec.weight = K;
    rec.mu_max = ext.mu_max;
    rec.mu_min = ext.mu_min;
    rec.bound = weight_bound(atoms.L, K);
    rec.satisfied = ext.mu_max <= ext.mu_min * rec.bound + kAbcmiTolerance;
    rec.negative_atom = ext.mu_min < -kAbcmiTolerance;
    report.overall = report.overall && rec.satisfied;
    report.negative_atoms = report.negative_atoms || rec.negative_atom;
    report.weights.push_back(rec);
  }
  return report;
}

}  // namespace mwrc
