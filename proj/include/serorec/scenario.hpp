#ifndef SEROREC_SCENARIO_HPP
#define SEROREC_SCENARIO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "serorec/growth.hpp"

namespace serorec {

struct BiomarkerConfig {
  std::string name;
  GrowthModelSpec spec;
};

// One generative model row: biomarker curve(s), population mean and covariance
// of the stacked coefficient vector, and per-biomarker measurement-error
// variance. Coordinates marked fixed in the curve spec must carry zero
// generative variance; measurement errors are independent across biomarkers by
// construction (a full error matrix in a config file is rejected unless
// diagonal).
struct ModelConfig {
  std::string label;
  std::vector<BiomarkerConfig> biomarkers;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::vector<double> error_var;

  int stacked_dim() const;
  int coord_offset(int k) const;  // first stacked index of biomarker k
  void validate() const;
};

struct ScenarioConfig {
  std::string name;
  std::vector<ModelConfig> models;
  int n_in_sample = 100;
  std::vector<double> out_of_sample_taus{0.014, 0.25, 0.5, 0.75, 0.986};
  std::vector<double> in_sample_schedule;       // default 0:0.25:2 (9 visits)
  std::vector<double> out_of_sample_schedule;   // default diagnosis, 2 weeks, 1 month
  double sero_interval = 1.0;                   // years between last negative and diagnosis
  std::uint64_t master_seed = 1;

  void validate() const;
  const ModelConfig& model(std::string_view label) const;
  bool has_model(std::string_view label) const;
};

// "AR1&AR4" and "ar1_ar4" both normalize to "AR1_AR4".
std::string canonical_model_label(std::string_view raw);

std::vector<double> default_in_sample_schedule();
std::vector<double> default_out_of_sample_schedule();

// Scenario with the standard five univariate rows (AR1, AR2, AR3, AR4, VL)
// plus the two bivariate rows (AR1_AR4, AR4_VL).
ScenarioConfig realistic_scenario();

// Same rows with every random-coordinate variance set to 0.01, correlations
// preserved; measurement error unchanged.
ScenarioConfig ideal_from_realistic(ScenarioConfig cfg);
ScenarioConfig ideal_scenario();

ScenarioConfig scenario_by_name(std::string_view name);  // "realistic" | "ideal"

void save_scenario_config(const ScenarioConfig& cfg, const std::filesystem::path& path);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

}  // namespace serorec

#endif
