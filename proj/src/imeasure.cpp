#include "mwrc/imeasure.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mwrc/error.hpp"

namespace mwrc {

AtomTable compute_atoms(const JointPmf& pmf) {
  const SubsetMask full = full_mask(pmf.L);
  const Eigen::VectorXd h = subset_entropies(pmf);

  AtomTable atoms;
  atoms.L = pmf.L;
  atoms.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full) + 1);
  for (SubsetMask K = 1; K <= full; ++K) {
    const SubsetMask Kc = full & ~K;
    const double hKc = h[Kc];  // h[0] == 0
    double v = 0.0;
    // All nonempty submasks T of K, descending.
    for (SubsetMask T = K; T; T = (T - 1) & K) {
      const double hT = h[T | Kc] - hKc;
      v += (subset_size(T) % 2 == 1) ? hT : -hT;
    }
    atoms.mu[K] = v;
  }
  return atoms;
}

AtomTable oracle_atoms(const JointPmf& pmf) {
  const SubsetMask full = full_mask(pmf.L);
  const Eigen::Index n = static_cast<Eigen::Index>(full);
  const Eigen::VectorXd h = subset_entropies(pmf);

  // Row S, column K (both 1-based masks): coefficient 1 iff K intersects S.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (SubsetMask S = 1; S <= full; ++S) {
    for (SubsetMask K = 1; K <= full; ++K)
      if (S & K) A(S - 1, K - 1) = 1.0;
    b[S - 1] = h[S];
  }
  const Eigen::VectorXd x = A.partialPivLu().solve(b);
  const double resid = (A * x - b).lpNorm<Eigen::Infinity>();
  if (!x.allFinite() || resid > 1e-8 * std::max(1.0, b.lpNorm<Eigen::Infinity>()))
    fail(Errc::singular_system,
         "atom system solve residual " + std::to_string(resid));

  AtomTable atoms;
  atoms.L = pmf.L;
  atoms.mu = Eigen::VectorXd::Zero(n + 1);
  atoms.mu.tail(n) = x;
  return atoms;
}

double conditional_from_atoms(const AtomTable& atoms, SubsetMask S) {
  if (S == 0) fail(Errc::empty_subset, "subset is empty");
  if (S >= (SubsetMask{1} << atoms.L))
    fail(Errc::parameter_out_of_range,
         "subset " + subset_to_string(S) + " references users beyond L=" +
             std::to_string(atoms.L));
  double v = 0.0;
  for (SubsetMask T = S; T; T = (T - 1) & S) v += atoms.mu[T];
  return v;
}

WeightExtrema weight_extrema(const AtomTable& atoms, int weight) {
  if (weight < 1 || weight > atoms.L - 1)
    fail(Errc::weight_out_of_range,
         "weight " + std::to_string(weight) + " outside [1, " +
             std::to_string(atoms.L - 1) + "]");
  const SubsetMask full = full_mask(atoms.L);
  WeightExtrema ext{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
  for (SubsetMask K = 1; K <= full; ++K) {
    if (subset_size(K) != weight) continue;
    ext.mu_max = std::max(ext.mu_max, atoms.mu[K]);
    ext.mu_min = std::min(ext.mu_min, atoms.mu[K]);
  }
  return ext;
}

AtomTable make_atom_table(int L, const Eigen::VectorXd& mu_by_mask) {
  if (L < 2 || L > kMaxUsers)
    fail(Errc::parameter_out_of_range,
         "user count L=" + std::to_string(L) + " outside [2, " +
             std::to_string(kMaxUsers) + "]");
  if (mu_by_mask.size() != (Eigen::Index{1} << L))
    fail(Errc::shape_mismatch,
         "atom vector has " + std::to_string(mu_by_mask.size()) +
             " entries, expected " + std::to_string(Eigen::Index{1} << L));
  AtomTable atoms;
  atoms.L = L;
  atoms.mu = mu_by_mask;
  atoms.mu[0] = 0.0;
  return atoms;
}

}  // namespace mwrc
