#ifndef SEROREC_SIMULATE_HPP
#define SEROREC_SIMULATE_HPP

#include <Eigen/Dense>
#include <string>

#include "serorec/dataset.hpp"
#include "serorec/rng.hpp"
#include "serorec/scenario.hpp"

namespace serorec {

// Stacked coefficient draw; semidefinite covariances are allowed, zero-variance
// coordinates come back exactly at their mean.
Eigen::VectorXd draw_random_effects(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                    RngStream& rng);

// One subject under one model row: coefficient draw, then independent Gaussian
// measurement noise around each biomarker trajectory on the role's schedule.
Individual simulate_individual(const ModelConfig& model, const ScenarioConfig& cfg, Role role,
                               double tau, int id, RngStream stream);

// Full replicate for one model row: n_in_sample subjects with uniform
// seroconversion offsets plus one out-of-sample subject per configured offset.
// Streams are derived from (master seed, scenario, replicate, subject) with the
// model label folded in only for coefficients and noise, so a replicate's
// seroconversion offsets coincide across model rows fitted to the same
// scenario.
PanelDataset simulate_dataset(const ScenarioConfig& cfg, const std::string& model_label,
                              int replicate);

}  // namespace serorec

#endif
