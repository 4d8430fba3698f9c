#ifndef SEROREC_MVN_HPP
#define SEROREC_MVN_HPP

#include <Eigen/Dense>

#include "serorec/rng.hpp"

namespace serorec {

// Throws InvalidCovariance unless sigma is square, symmetric (1e-10 relative)
// and positive semidefinite (smallest eigenvalue >= -1e-8 * largest magnitude).
void check_covariance(const Eigen::MatrixXd& sigma);

// Draw from N(mu, sigma). Handles semidefinite sigma: coordinates whose row
// and column are identically zero are returned at their mean; the nonzero
// principal block must be PSD. Consumes one normal per non-degenerate
// coordinate.
Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                         RngStream& rng);

// Log density of N(mu, sigma); sigma must be positive definite.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& sigma);

// Wishart(df, scale) via the Bartlett factorization; df > dim-1, scale PD.
Eigen::MatrixXd wishart_draw(double df, const Eigen::MatrixXd& scale, RngStream& rng);

// Inverse-Wishart(df, scale): inverse of a Wishart(df, scale^-1) draw.
Eigen::MatrixXd inverse_wishart_draw(double df, const Eigen::MatrixXd& scale,
                                     RngStream& rng);

double inverse_wishart_logpdf(const Eigen::MatrixXd& x, double df,
                              const Eigen::MatrixXd& scale);

// Inverse-gamma with density scale^shape / Gamma(shape) * x^-(shape+1) * exp(-scale/x).
double inverse_gamma_draw(double shape, double scale, RngStream& rng);
double inverse_gamma_logpdf(double x, double shape, double scale);

}  // namespace serorec

#endif
