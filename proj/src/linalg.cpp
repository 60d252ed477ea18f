#include "brace/linalg.hpp"

namespace brace {

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double sigma_min(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

std::optional<LeftInverse> left_inverse(const Matrix& m) {
  if (m.rows() < m.cols() || m.size() == 0) return std::nullopt;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smin = s.minCoeff();
  if (!(smin > kSingularThreshold)) return std::nullopt;
  LeftInverse out;
  if (m.rows() == m.cols()) {
    // LU gives the exact inverse for the 2x2 and 3x3 cases used here.
    out.matrix = m.partialPivLu().inverse();
  } else {
    out.matrix = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  }
  out.inf_norm = inf_norm(out.matrix);
  out.sigma_min = smin;
  return out;
}

}  // namespace brace
