#pragma once

#include <Eigen/Dense>
#include <vector>

namespace h2blend::detail {

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

/// Dense symmetric indefinite LDL^T (Bunch-Kaufman, LAPACK dsytrf) with inertia.
class SymmetricIndefiniteFactor {
 public:
  /// Factors the lower triangle of `a`. Returns false if LAPACK reports an error.
  bool factor(const Eigen::MatrixXd& a);
  const Inertia& inertia() const { return inertia_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::MatrixXd lu_;
  std::vector<int> ipiv_;
  Inertia inertia_;
};

}  // namespace h2blend::detail
