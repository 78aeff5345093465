#pragma once

// Rate-tuple construction from the atom table, the two source-coding
// condition checks, the per-symbol threshold kappa*, and the intersection of
// the source region with the scaled channel region.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mwrc/channel.hpp"
#include "mwrc/imeasure.hpp"

namespace mwrc {

inline constexpr double kRateTolerance = 1e-9;
inline constexpr double kContributionTolerance = 1e-12;

struct RateTuple {
  Eigen::VectorXd r;           // bits per source symbol
  bool clamped = false;        // some r_i in [-kRateTolerance, 0) set to 0
  bool hard_negative = false;  // some r_i < -kRateTolerance (kept as computed)
};

// Weighted share of atom K assigned to user i:
//   +((L-|K|)/(L-1)) * mu(K) when i is in K, else -((|K|-1)/(L-1)) * mu(K).
double contribution(int user, SubsetMask K, const AtomTable& atoms);

// r_i = sum of contributions over every atom of weight 1..L-1. The full-set
// atom contributes nothing by construction.
RateTuple assign_rates(const AtomTable& atoms);

struct SubsetConstraint {
  SubsetMask S = 0;
  double lhs = 0.0;    // sum of r_i over S
  double rhs = 0.0;    // H(W_S | W_{S^c})
  double slack = 0.0;  // lhs - rhs
};

struct RegionReport {
  std::vector<SubsetConstraint> constraints;  // nonempty strict S, mask ascending
  bool c1 = false;  // lhs >= rhs - tol for every |S| <= L-2
  bool c2 = false;  // |lhs - rhs| <= tol for every |S| = L-1
};

RegionReport check_conditions(const JointPmf& pmf, const RateTuple& rt);

struct ChannelCheck {
  bool ok = false;
  Eigen::VectorXd slack;  // per user: capacity term minus others' sum rate
};

// Sum-rate conditions: for each i, sum_{j != i} R_j <= log2 q - max(H0, Hi).
ChannelCheck channel_region_ok(const Eigen::VectorXd& R, const ChannelSpec& ch);

// max_i H(W_{all minus i} | W_i) / capacity_term_i. Users whose numerator is
// ~0 contribute 0 regardless of their denominator; a positive numerator over
// a nonpositive denominator is a degenerate channel.
double kappa_star(const JointPmf& pmf, const ChannelSpec& ch);

struct Feasibility {
  bool feasible = false;
  Eigen::VectorXd witness;  // a rate tuple in the intersection when feasible
};

// Does some r >= 0 satisfy every source constraint and the channel region
// scaled by kappa (bits per source symbol at kappa channel uses per symbol)?
Feasibility intersection_feasible(const JointPmf& pmf, const ChannelSpec& ch,
                                  double kappa);

// Membership check for a specific tuple, within tol on every constraint.
bool in_intersection(const JointPmf& pmf, const ChannelSpec& ch, double kappa,
                     const Eigen::VectorXd& r, double tol = kRateTolerance);

// Smallest feasible kappa in [kappa*, kappa* + 64] by bisection to 1e-6;
// nullopt when even the upper end point is infeasible.
std::optional<double> min_feasible_kappa(const JointPmf& pmf,
                                         const ChannelSpec& ch);

}  // namespace mwrc
