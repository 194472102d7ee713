// SPDX-License-Identifier: Apache-2.0
#include "raqr/linops/pinv.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <limits>

namespace raqr::linops {
namespace {

Eigen::MatrixXcd to_eigen(const ComplexMatrix& a) {
  Eigen::MatrixXcd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a.at(i, j);
  return m;
}

ComplexMatrix from_eigen(const Eigen::MatrixXcd& m) {
  ComplexMatrix a(static_cast<std::size_t>(m.rows()),
                  static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      a.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j));
  return a;
}

double rank_tolerance(const ComplexMatrix& a, double sigma_max) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(a.rows(), a.cols())) * sigma_max;
}

}  // namespace

ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw ShapeError("pseudo_inverse: empty matrix " + shape_str(a.rows(), a.cols()));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(a),
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tau = rank_tolerance(a, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::VectorXd inv_sv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv_sv(i) = sv(i) > tau ? 1.0 / sv(i) : 0.0;
  Eigen::MatrixXcd pinv =
      svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint();
  return from_eigen(pinv);
}

double condition_number(const ComplexMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(a));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = sv(sv.size() - 1);
  const double tau = rank_tolerance(a, sv(0));
  if (smin <= tau) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

std::size_t numerical_rank(const ComplexMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(a));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double tau = rank_tolerance(a, sv(0));
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tau) ++r;
  return r;
}

}  // namespace raqr::linops
