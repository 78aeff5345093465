#pragma once

// Phase-1 simplex deciding feasibility of
//   { x >= 0 :  A_ge x >= b_ge,  A_le x <= b_le }.
// Dense tableau with Bland's rule, so it terminates without cycling.

#include <Eigen/Dense>

namespace mwrc {

struct LinearFeasibility {
  bool feasible = false;
  Eigen::VectorXd point;        // a feasible point when feasible
  double infeasibility = 0.0;   // phase-1 objective at termination
};

LinearFeasibility phase1_feasible(const Eigen::MatrixXd& A_ge,
                                  const Eigen::VectorXd& b_ge,
                                  const Eigen::MatrixXd& A_le,
                                  const Eigen::VectorXd& b_le,
                                  double tol = 1e-9);

}  // namespace mwrc
