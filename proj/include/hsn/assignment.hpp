#pragma once

#include <vector>

#include <Eigen/Dense>

namespace hsn {

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting path Hungarian method, O(n^3)). Returns col_of_row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Same, maximising total profit.
inline std::vector<int> solve_assignment_max(const Eigen::MatrixXd& profit) { return solve_assignment(-profit); }

}  // namespace hsn
