#include "serorec/mvn.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "serorec/errors.hpp"
#include "serorec/stats.hpp"

namespace serorec {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kPsdTol = 1e-8;

void check_square_symmetric(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw InvalidCovariance("covariance matrix is not square");
  const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw InvalidCovariance("covariance matrix is not symmetric");
}

// indices whose row/column is not identically zero
std::vector<Eigen::Index> active_coords(const Eigen::MatrixXd& sigma) {
  const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> act;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    if (sigma.diagonal()(i) > 0.0) {
      act.push_back(i);
    } else if (sigma.row(i).cwiseAbs().maxCoeff() > 1e-14 * scale) {
      // zero variance with nonzero covariance cannot be PSD
      throw InvalidCovariance("zero-variance coordinate has nonzero covariance");
    } else if (sigma.diagonal()(i) < 0.0) {
      throw InvalidCovariance("negative variance on the diagonal");
    }
  }
  return act;
}

}  // namespace

void check_covariance(const Eigen::MatrixXd& sigma) {
  check_square_symmetric(sigma);
  if (sigma.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -kPsdTol * std::max(1.0, lmax))
    throw InvalidCovariance("covariance matrix is not positive semidefinite");
}

Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                         RngStream& rng) {
  check_square_symmetric(sigma);
  if (mu.size() != sigma.rows())
    throw std::invalid_argument("mvn_draw: mean/covariance dimension mismatch");
  if (mu.size() == 0) return mu;

  const std::vector<Eigen::Index> act = active_coords(sigma);
  Eigen::VectorXd out = mu;
  if (act.empty()) return out;

  const Eigen::Index m = static_cast<Eigen::Index>(act.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = sigma(act[i], act[j]);

  Eigen::MatrixXd root;
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -kPsdTol * std::max(1.0, lmax))
      throw InvalidCovariance("covariance matrix is not positive semidefinite");
    root = es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
  const Eigen::VectorXd delta = root * z;
  for (Eigen::Index i = 0; i < m; ++i) out(act[i]) += delta(i);
  return out;
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& sigma) {
  check_square_symmetric(sigma);
  if (x.size() != mu.size() || x.size() != sigma.rows())
    throw std::invalid_argument("mvn_logpdf: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("mvn_logpdf: covariance is not positive definite");
  const Eigen::VectorXd r = x - mu;
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    logdet += std::log(llt.matrixL()(i, i));
  const double d = static_cast<double>(x.size());
  return -0.5 * w.squaredNorm() - logdet -
         0.5 * d * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd wishart_draw(double df, const Eigen::MatrixXd& scale, RngStream& rng) {
  check_square_symmetric(scale);
  const Eigen::Index d = scale.rows();
  if (!(df > static_cast<double>(d) - 1.0))
    throw std::invalid_argument("wishart_draw: df must exceed dim-1");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw InvalidCovariance("wishart_draw: scale is not positive definite");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(df - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd la = llt.matrixL() * a;
  return la * la.transpose();
}

Eigen::MatrixXd inverse_wishart_draw(double df, const Eigen::MatrixXd& scale,
                                     RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw InvalidCovariance("inverse_wishart_draw: scale is not positive definite");
  const Eigen::MatrixXd scale_inv =
      llt.solve(Eigen::MatrixXd::Identity(scale.rows(), scale.cols()));
  // symmetrize against round-off before the inner Cholesky
  const Eigen::MatrixXd w =
      wishart_draw(df, 0.5 * (scale_inv + scale_inv.transpose()), rng);
  Eigen::LLT<Eigen::MatrixXd> lw(w);
  if (lw.info() != Eigen::Success)
    throw SingularMatrix("inverse_wishart_draw: singular Wishart draw");
  const Eigen::MatrixXd inv = lw.solve(Eigen::MatrixXd::Identity(w.rows(), w.cols()));
  return 0.5 * (inv + inv.transpose());
}

double inverse_wishart_logpdf(const Eigen::MatrixXd& x, double df,
                              const Eigen::MatrixXd& scale) {
  check_square_symmetric(scale);
  check_square_symmetric(x);
  const Eigen::Index d = scale.rows();
  if (x.rows() != d) throw std::invalid_argument("inverse_wishart_logpdf: dimension mismatch");
  if (!(df > static_cast<double>(d) - 1.0))
    throw std::invalid_argument("inverse_wishart_logpdf: df must exceed dim-1");
  Eigen::LLT<Eigen::MatrixXd> ls(scale);
  if (ls.info() != Eigen::Success)
    throw InvalidCovariance("inverse_wishart_logpdf: scale is not positive definite");
  Eigen::LLT<Eigen::MatrixXd> lx(x);
  if (lx.info() != Eigen::Success)
    throw SingularMatrix("inverse_wishart_logpdf: argument is not positive definite");
  double logdet_s = 0.0, logdet_x = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    logdet_s += 2.0 * std::log(ls.matrixL()(i, i));
    logdet_x += 2.0 * std::log(lx.matrixL()(i, i));
  }
  const double tr = lx.solve(scale).trace();
  const double dd = static_cast<double>(d);
  return 0.5 * df * logdet_s - 0.5 * df * dd * std::log(2.0) - lmvgamma(d, 0.5 * df) -
         0.5 * (df + dd + 1.0) * logdet_x - 0.5 * tr;
}

double inverse_gamma_draw(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("inverse_gamma_draw: shape and scale must be > 0");
  return scale / rng.gamma(shape);
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("inverse_gamma_logpdf: shape and scale must be > 0");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) -
         scale / x;
}

}  // namespace serorec
