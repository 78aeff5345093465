#pragma once

// Brute-force feasibility oracle for { x >= 0 : A_ge x >= b_ge, A_le x <= b_le }
// by vertex enumeration: with x >= 0 the region contains no line, so it is
// nonempty iff some intersection of n active constraints is a feasible point.
// Exponential in the constraint count — test sizes only.

#include <Eigen/Dense>

#include <vector>

namespace lp_oracle {

inline bool vertex_feasible(const Eigen::MatrixXd& A_ge,
                            const Eigen::VectorXd& b_ge,
                            const Eigen::MatrixXd& A_le,
                            const Eigen::VectorXd& b_le, double tol = 1e-7) {
  const Eigen::Index n = A_ge.rows() > 0 ? A_ge.cols() : A_le.cols();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < A_ge.rows(); ++i) {
    rows.push_back(A_ge.row(i));
    rhs.push_back(b_ge[i]);
  }
  for (Eigen::Index i = 0; i < A_le.rows(); ++i) {
    rows.push_back(A_le.row(i));
    rhs.push_back(b_le[i]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[i] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }

  const auto ok = [&](const Eigen::VectorXd& x) {
    if ((x.array() < -tol).any()) return false;
    if (A_ge.rows() > 0 && ((A_ge * x - b_ge).array() < -tol).any()) return false;
    if (A_le.rows() > 0 && ((A_le * x - b_le).array() > tol).any()) return false;
    return true;
  };

  if (n == 0) return true;
  const std::size_t total = rows.size();
  std::vector<std::size_t> pick(static_cast<std::size_t>(n));
  // iterate all n-subsets of rows
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) pick[i] = i;
  while (true) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      M.row(i) = rows[pick[static_cast<std::size_t>(i)]];
      v[i] = rhs[pick[static_cast<std::size_t>(i)]];
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible() && ok(lu.solve(v))) return true;

    // next combination
    std::size_t k = static_cast<std::size_t>(n);
    while (k > 0) {
      --k;
      if (pick[k] + (static_cast<std::size_t>(n) - k) < total) {
        ++pick[k];
        for (std::size_t j = k + 1; j < static_cast<std::size_t>(n); ++j)
          pick[j] = pick[j - 1] + 1;
        break;
      }
      if (k == 0) return false;
    }
  }
}

}  // namespace lp_oracle
