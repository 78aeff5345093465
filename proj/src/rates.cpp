#include "mwrc/rates.hpp"

#include <cmath>
#include <string>

#include "mwrc/error.hpp"
#include "mwrc/simplex.hpp"

namespace mwrc {

double contribution(int user, SubsetMask K, const AtomTable& atoms) {
  const int L = atoms.L;
  if (user < 1 || user > L)
    fail(Errc::parameter_out_of_range, "user " + std::to_string(user) +
                                           " outside [1, " + std::to_string(L) + "]");
  const int k = subset_size(K);
  if (k < 1 || k > L - 1)
    fail(Errc::weight_out_of_range,
         "atom weight " + std::to_string(k) + " outside [1, " +
             std::to_string(L - 1) + "]");
  const double mu = atoms.mu[K];
  if (contains(K, user)) return (static_cast<double>(L - k) / (L - 1)) * mu;
  return -(static_cast<double>(k - 1) / (L - 1)) * mu;
}

RateTuple assign_rates(const AtomTable& atoms) {
  const int L = atoms.L;
  const SubsetMask full = full_mask(L);
  RateTuple rt;
  rt.r = Eigen::VectorXd::Zero(L);
  for (SubsetMask K = 1; K < full; ++K) {  // weights 1..L-1: all except the full set
    for (int i = 1; i <= L; ++i) rt.r[i - 1] += contribution(i, K, atoms);
  }
  for (int i = 0; i < L; ++i) {
    if (rt.r[i] < -kRateTolerance) {
      rt.hard_negative = true;
    } else if (rt.r[i] < 0.0) {
      rt.r[i] = 0.0;
      rt.clamped = true;
    }
  }
  return rt;
}

RegionReport check_conditions(const JointPmf& pmf, const RateTuple& rt) {
  const int L = pmf.L;
  if (rt.r.size() != L)
    fail(Errc::shape_mismatch, "rate tuple has " + std::to_string(rt.r.size()) +
                                   " entries, expected " + std::to_string(L));
  const SubsetMask full = full_mask(L);
  const Eigen::VectorXd h = subset_entropies(pmf);

  RegionReport report;
  report.c1 = true;
  report.c2 = true;
  for (SubsetMask S = 1; S < full; ++S) {
    SubsetConstraint c;
    c.S = S;
    for (int i = 1; i <= L; ++i)
      if (contains(S, i)) c.lhs += rt.r[i - 1];
    c.rhs = h[full] - h[full & ~S];  // H(W_S | W_{S^c}) by the chain rule
    c.slack = c.lhs - c.rhs;
    if (subset_size(S) <= L - 2) {
      report.c1 = report.c1 && c.slack >= -kRateTolerance;
    } else {
      report.c2 = report.c2 && std::abs(c.slack) <= kRateTolerance;
    }
    report.constraints.push_back(c);
  }
  return report;
}

ChannelCheck channel_region_ok(const Eigen::VectorXd& R, const ChannelSpec& ch) {
  const int L = ch.L();
  if (R.size() != L)
    fail(Errc::shape_mismatch, "rate tuple has " + std::to_string(R.size()) +
                                   " entries, expected " + std::to_string(L));
  const Eigen::VectorXd cap = capacity_terms(ch);
  const double sum = R.sum();
  ChannelCheck check;
  check.slack = Eigen::VectorXd(L);
  check.ok = true;
  for (int i = 0; i < L; ++i) {
    check.slack[i] = cap[i] - (sum - R[i]);
    check.ok = check.ok && check.slack[i] >= -kRateTolerance;
  }
  return check;
}

double kappa_star(const JointPmf& pmf, const ChannelSpec& ch) {
  if (pmf.L != ch.L())
    fail(Errc::shape_mismatch, "source has L=" + std::to_string(pmf.L) +
                                   " users, channel has " + std::to_string(ch.L()));
  const SubsetMask full = full_mask(pmf.L);
  const Eigen::VectorXd h = subset_entropies(pmf);
  const Eigen::VectorXd cap = capacity_terms(ch);
  double best = 0.0;
  for (int i = 1; i <= pmf.L; ++i) {
    const double num = h[full] - h[singleton(i)];  // H(W_{all minus i} | W_i)
    if (num <= kRateTolerance) continue;  // nothing to deliver to user i
    if (cap[i - 1] <= 0.0)
      fail(Errc::degenerate_channel,
           "user " + std::to_string(i) + " capacity term is " +
               std::to_string(cap[i - 1]) + " with positive source rate demand");
    best = std::max(best, num / cap[i - 1]);
  }
  return best;
}

namespace {

// Rows of the source region (one per nonempty strict subset) and of the
// scaled channel region (one per user), as  A_ge x >= b_ge, A_le x <= b_le.
void region_rows(const JointPmf& pmf, const ChannelSpec& ch, double kappa,
                 Eigen::MatrixXd& A_ge, Eigen::VectorXd& b_ge,
                 Eigen::MatrixXd& A_le, Eigen::VectorXd& b_le) {
  const int L = pmf.L;
  const SubsetMask full = full_mask(L);
  const Eigen::VectorXd h = subset_entropies(pmf);
  const Eigen::VectorXd cap = capacity_terms(ch);

  const Eigen::Index n_src = static_cast<Eigen::Index>(full) - 1;
  A_ge = Eigen::MatrixXd::Zero(n_src, L);
  b_ge = Eigen::VectorXd(n_src);
  for (SubsetMask S = 1; S < full; ++S) {
    for (int i = 1; i <= L; ++i)
      if (contains(S, i)) A_ge(S - 1, i - 1) = 1.0;
    b_ge[S - 1] = h[full] - h[full & ~S];
  }

  A_le = Eigen::MatrixXd::Ones(L, L);
  b_le = Eigen::VectorXd(L);
  for (int i = 0; i < L; ++i) {
    A_le(i, i) = 0.0;
    b_le[i] = kappa * cap[i];
  }
}

}  // namespace

Feasibility intersection_feasible(const JointPmf& pmf, const ChannelSpec& ch,
                                  double kappa) {
  if (pmf.L != ch.L())
    fail(Errc::shape_mismatch, "source has L=" + std::to_string(pmf.L) +
                                   " users, channel has " + std::to_string(ch.L()));
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    fail(Errc::parameter_out_of_range,
         "kappa=" + std::to_string(kappa) + " must be positive and finite");
  Eigen::MatrixXd A_ge, A_le;
  Eigen::VectorXd b_ge, b_le;
  region_rows(pmf, ch, kappa, A_ge, b_ge, A_le, b_le);
  const LinearFeasibility lf = phase1_feasible(A_ge, b_ge, A_le, b_le, kRateTolerance);
  return {lf.feasible, lf.point};
}

bool in_intersection(const JointPmf& pmf, const ChannelSpec& ch, double kappa,
                     const Eigen::VectorXd& r, double tol) {
  if (r.size() != pmf.L)
    fail(Errc::shape_mismatch, "rate tuple has " + std::to_string(r.size()) +
                                   " entries, expected " + std::to_string(pmf.L));
  Eigen::MatrixXd A_ge, A_le;
  Eigen::VectorXd b_ge, b_le;
  region_rows(pmf, ch, kappa, A_ge, b_ge, A_le, b_le);
  if ((r.array() < -tol).any()) return false;
  if (((A_ge * r - b_ge).array() < -tol).any()) return false;
  if (((A_le * r - b_le).array() > tol).any()) return false;
  return true;
}

std::optional<double> min_feasible_kappa(const JointPmf& pmf,
                                         const ChannelSpec& ch) {
  const double ks = kappa_star(pmf, ch);
  double lo = ks;
  if (lo <= 0.0) {
    // Fully determined sources: no demand, any positive kappa works.
    if (intersection_feasible(pmf, ch, 1e-9).feasible) return 0.0;
    lo = 1e-9;
  } else if (intersection_feasible(pmf, ch, lo).feasible) {
    return lo;
  }
  double hi = ks + 64.0;
  if (!intersection_feasible(pmf, ch, hi).feasible) return std::nullopt;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (intersection_feasible(pmf, ch, mid).feasible)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace mwrc
