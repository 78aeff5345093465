#include "mwrc/simplex.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "mwrc/error.hpp"

namespace mwrc {

namespace {
constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-12;
}  // namespace

LinearFeasibility phase1_feasible(const Eigen::MatrixXd& A_ge,
                                  const Eigen::VectorXd& b_ge,
                                  const Eigen::MatrixXd& A_le,
                                  const Eigen::VectorXd& b_le,
                                  double tol) {
  if (A_ge.rows() != b_ge.size() || A_le.rows() != b_le.size())
    fail(Errc::shape_mismatch, "constraint matrix/vector row mismatch");
  if (A_ge.rows() > 0 && A_le.rows() > 0 && A_ge.cols() != A_le.cols())
    fail(Errc::shape_mismatch, "constraint matrices disagree on variable count");

  const Eigen::Index n = A_ge.rows() > 0 ? A_ge.cols() : A_le.cols();
  const Eigen::Index m = A_ge.rows() + A_le.rows();
  if (m == 0) {
    return {true, Eigen::VectorXd::Zero(n), 0.0};
  }

  // Canonicalize: row i is a.x (sense_i) b with b >= 0; a sign flip toggles
  // the sense. ge rows get surplus -1 and an artificial; le rows get slack +1.
  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd b(m);
  std::vector<bool> ge(m);
  for (Eigen::Index i = 0; i < A_ge.rows(); ++i) {
    A.row(i) = A_ge.row(i);
    b[i] = b_ge[i];
    ge[i] = true;
  }
  for (Eigen::Index i = 0; i < A_le.rows(); ++i) {
    A.row(A_ge.rows() + i) = A_le.row(i);
    b[A_ge.rows() + i] = b_le[i];
    ge[A_ge.rows() + i] = false;
  }
  Eigen::Index n_art = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
      ge[i] = !ge[i];
    }
    if (ge[i]) ++n_art;
  }

  const Eigen::Index ncols = n + m + n_art + 1;  // vars, slack/surplus, artificials, rhs
  if (static_cast<double>(m + 1) * static_cast<double>(ncols) > 2.0e7)
    fail(Errc::tractability_exceeded,
         "phase-1 tableau would need " + std::to_string(m + 1) + "x" +
             std::to_string(ncols) + " entries");

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, ncols);
  std::vector<Eigen::Index> basis(m);
  const Eigen::Index rhs = ncols - 1;
  Eigen::Index art = n + m;
  for (Eigen::Index i = 0; i < m; ++i) {
    T.block(i, 0, 1, n) = A.row(i);
    T(i, n + i) = ge[i] ? -1.0 : 1.0;
    T(i, rhs) = b[i];
    if (ge[i]) {
      T(i, art) = 1.0;
      basis[i] = art++;
      // Phase-1 cost row: reduced costs with the artificial basic.
      T.row(m) -= T.row(i);
      T(m, basis[i]) += 1.0;
    } else {
      basis[i] = n + i;
    }
  }

  // T.row(m) holds reduced costs; T(m, rhs) is minus the current objective.
  const long max_iter = 200 * static_cast<long>(m + ncols) + 1000;
  for (long iter = 0;; ++iter) {
    if (iter > max_iter)
      throw std::logic_error("phase-1 simplex exceeded iteration cap");

    // Bland: smallest improving column.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < rhs; ++j)
      if (T(m, j) < -kCostEps) {
        enter = j;
        break;
      }
    if (enter < 0) break;

    // Ratio test, ties broken by smallest basis index (Bland).
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = T(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = T(i, rhs) / a;
      if (leave < 0 || ratio < best - kPivotEps ||
          (ratio < best + kPivotEps && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0)
      throw std::logic_error("phase-1 objective unbounded below");

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }

  LinearFeasibility out;
  out.infeasibility = -T(m, rhs);
  out.feasible = out.infeasibility <= tol;
  out.point = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] < n) out.point[basis[i]] = T(i, rhs);
  return out;
}

}  // namespace mwrc
