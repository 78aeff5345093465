#pragma once

// Almost-balanced conditional mutual information: a per-weight spread test on
// the atom table. Weight K passes when mu_max <= mu_min * weight_bound(L, K);
// the sources pass when every weight in {2 .. L-1} does.

#include <cstdint>
#include <vector>

#include "mwrc/imeasure.hpp"

namespace mwrc {

inline constexpr double kAbcmiTolerance = 1e-9;

// Exact binomial coefficient; n <= 60 keeps intermediates inside int64.
std::int64_t binomial(int n, int k);

// alpha(L,S,K) = S*C(L-1,K) - (S-K)*C(S,K), for 2 <= K <= S <= L-2.
std::int64_t alpha(int L, int S, int K);

// beta(L,S,K) = S*C(L-1,K) - (L-1)*C(S,K), same domain; 0 <= beta <= alpha.
std::int64_t beta(int L, int S, int K);

// Allowed max/min ratio for atoms of weight K among L users:
//   K == L-1: 1 + 1/(L-2)
//   else:     1 + (1/(K-1)) * min_{S in {K..L-2}} beta(L,S,K)/alpha(L,S,K).
double weight_bound(int L, int K);

struct AbcmiWeightRecord {
  int weight = 0;
  double mu_max = 0.0;
  double mu_min = 0.0;
  double bound = 0.0;           // allowed ratio multiplier
  bool satisfied = false;       // mu_max <= mu_min * bound + kAbcmiTolerance
  bool negative_atom = false;   // mu_min < -kAbcmiTolerance
};

struct AbcmiReport {
  int L = 0;
  std::vector<AbcmiWeightRecord> weights;  // weights 2..L-1 ascending
  bool overall = false;
  bool negative_atoms = false;  // flagged, not an error: the test is still
                                // evaluated literally on negative values
};

// L == 2 has no weights to test and passes vacuously.
AbcmiReport check_abcmi(const AtomTable& atoms);

}  // namespace mwrc
