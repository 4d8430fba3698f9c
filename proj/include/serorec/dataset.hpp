#ifndef SEROREC_DATASET_HPP
#define SEROREC_DATASET_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace serorec {

enum class Role { InSample, OutOfSample };

std::string role_name(Role r);
Role role_from_name(const std::string& s);

// One subject's panel: a shared visit schedule and one response series per
// biomarker. tau is the seroconversion offset in years before diagnosis; for
// simulated data it is the generating truth (the sampler never reads it for
// the individual being inferred). random_effects is the stacked generating
// coefficient vector when known, empty otherwise.
struct Individual {
  int id = 0;
  Role role = Role::InSample;
  double tau = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> y;  // [biomarker][visit]
  Eigen::VectorXd random_effects;

  std::size_t n_obs() const { return times.size(); }
  void validate(std::size_t n_biomarkers) const;
};

struct PanelDataset {
  std::string scenario;
  std::string model_label;
  int replicate = 0;
  double sero_interval = 1.0;
  std::vector<std::string> biomarker_names;
  std::vector<Individual> individuals;

  std::size_t n_biomarkers() const { return biomarker_names.size(); }
  std::size_t n_in_sample() const;
  std::size_t n_out_of_sample() const;
  void validate() const;
};

// Text format: versioned header, '#meta' lines for dataset-level fields,
// '#fx' lines carrying generating coefficients, then one CSV row per
// observation with columns replicate,id,role,biomarker,j,t_ij,y,tau_truth.
// Round-trips losslessly.
void write_dataset(const PanelDataset& data, const std::filesystem::path& path);
PanelDataset read_dataset(const std::filesystem::path& path);

// Copy with the out-of-sample follow-up truncated to the first n_visits
// observations (in-sample individuals untouched).
PanelDataset truncate_followup(PanelDataset data, std::size_t n_visits);

}  // namespace serorec

#endif
