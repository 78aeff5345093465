#pragma once

// Signed measure over the 2^L - 1 nonempty atoms of the information diagram.
// Atom a(K) is indexed by the mask of K; mu can be negative for |K| >= 3.

#include <Eigen/Dense>

#include "mwrc/distribution.hpp"

namespace mwrc {

struct AtomTable {
  int L = 0;
  Eigen::VectorXd mu;  // size 2^L, indexed by mask; entry 0 is unused (0)

  double operator()(SubsetMask K) const { return mu[K]; }
  Eigen::Index n_atoms() const { return mu.size() - 1; }
};

// Atom measures via the alternating sum of conditional entropies,
//   mu(a(K)) = sum_{nonempty T subseteq K} (-1)^{|T|+1} H(W_T | W_{K^c}).
AtomTable compute_atoms(const JointPmf& pmf);

// Independent route: solve the defining linear system
//   sum_{K : K cap S != 0} mu(a(K)) = H(W_S)  for every nonempty S.
AtomTable oracle_atoms(const JointPmf& pmf);

// H(W_S | W_{S^c}) as the sum of mu over nonempty subsets of S.
double conditional_from_atoms(const AtomTable& atoms, SubsetMask S);

struct WeightExtrema {
  double mu_max;
  double mu_min;
};

// Largest / smallest atom measure among atoms with |K| == weight.
WeightExtrema weight_extrema(const AtomTable& atoms, int weight);

// Wraps externally supplied atom values (tests, what-if analyses). Values are
// taken as-is; entry 0 is forced to 0.
AtomTable make_atom_table(int L, const Eigen::VectorXd& mu_by_mask);

}  // namespace mwrc
