#include "kkt_factorization.hpp"

#include <cmath>
#include <limits>

extern "C" {
void dsytrf_(const char* uplo, const int* n, double* a, const int* lda, int* ipiv, double* work,
             const int* lwork, int* info);
void dsytrs_(const char* uplo, const int* n, const int* nrhs, const double* a, const int* lda,
             const int* ipiv, double* b, const int* ldb, int* info);
}

namespace h2blend::detail {

bool SymmetricIndefiniteFactor::factor(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  lu_ = a;
  ipiv_.assign(n, 0);
  inertia_ = {};
  if (n == 0) return true;
  int info = 0;
  int lwork = -1;
  double query = 0.0;
  dsytrf_("L", &n, lu_.data(), &n, ipiv_.data(), &query, &lwork, &info);
  lwork = std::max(1, static_cast<int>(query));
  std::vector<double> work(lwork);
  dsytrf_("L", &n, lu_.data(), &n, ipiv_.data(), work.data(), &lwork, &info);
  if (info < 0) return false;

  const double zero_tol = std::numeric_limits<double>::min();
  for (int k = 0; k < n;) {
    if (ipiv_[k] > 0) {
      const double d = lu_(k, k);
      if (std::abs(d) <= zero_tol) ++inertia_.zero;
      else if (d > 0) ++inertia_.positive;
      else ++inertia_.negative;
      k += 1;
    } else {
      // 2x2 block in rows k, k+1 of the lower triangle.
      const double a11 = lu_(k, k), a21 = lu_(k + 1, k), a22 = lu_(k + 1, k + 1);
      const double det = a11 * a22 - a21 * a21;
      const double tr = a11 + a22;
      if (std::abs(det) <= zero_tol) {
        ++inertia_.zero;
        if (tr > 0) ++inertia_.positive;
        else ++inertia_.negative;
      } else if (det < 0) {
        ++inertia_.positive;
        ++inertia_.negative;
      } else if (tr > 0) {
        inertia_.positive += 2;
      } else {
        inertia_.negative += 2;
      }
      k += 2;
    }
  }
  return info == 0 || inertia_.zero > 0;
}

Eigen::VectorXd SymmetricIndefiniteFactor::solve(const Eigen::VectorXd& b) const {
  const int n = static_cast<int>(lu_.rows());
  Eigen::VectorXd x = b;
  if (n == 0) return x;
  const int nrhs = 1;
  int info = 0;
  dsytrs_("L", &n, &nrhs, lu_.data(), &n, ipiv_.data(), x.data(), &n, &info);
  return x;
}

}  // namespace h2blend::detail
