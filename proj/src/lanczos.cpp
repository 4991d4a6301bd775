#include "qttn/search/lanczos.hpp"

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Eigenvalues>

namespace qttn {

std::pair<double, std::vector<double>> tridiagonal_lowest(const std::vector<double>& alpha,
                                                          const std::vector<double>& beta) {
  const auto m = static_cast<Eigen::Index>(alpha.size());
  if (m == 0 || beta.size() + 1 < alpha.size()) throw ArgumentError("malformed tridiagonal matrix");
  if (m == 1) return {alpha[0], {1.0}};
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw SolverError("tridiagonal eigensolver failed");
  std::vector<double> y(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] = es.eigenvectors()(i, 0);
  return {es.eigenvalues()(0), std::move(y)};
}

}  // namespace qttn
