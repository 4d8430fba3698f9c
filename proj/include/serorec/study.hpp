#ifndef SEROREC_STUDY_HPP
#define SEROREC_STUDY_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "serorec/mcmc.hpp"
#include "serorec/recency.hpp"
#include "serorec/scenario.hpp"

namespace serorec {

struct StudyConfig {
  ScenarioConfig scenario;
  std::vector<std::string> models;   // labels from the scenario's model rows
  int replicates = 20;
  std::size_t truncate_visits = 3;   // out-of-sample visits kept: 1 = diagnosis only
  SamplerConfig sampler;
  std::filesystem::path out_dir;
  int workers = 0;                   // 0 = hardware concurrency

  void validate() const;
};

// visit-count encoding of the follow-up flag: diagnosis|2weeks|1month -> 1|2|3
std::size_t truncate_visits_from_name(const std::string& name);

struct StudyCell {
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // convergence-gated or failed fits
  bool missing = false;        // no usable replicate
};

struct StudySummary {
  std::string scenario;
  std::vector<std::string> models;
  std::vector<double> tau_list;
  std::vector<double> x_list;
  // cells[model][tau][x]
  std::vector<std::vector<std::vector<StudyCell>>> cells;
  std::size_t n_fits = 0;
  std::size_t n_failed_fits = 0;
  std::size_t n_gate_excluded = 0;

  const StudyCell& cell(const std::string& model, double tau_truth, double x) const;
};

struct StudyResult {
  StudySummary summary;
  std::vector<FitRecord> records;  // successful fits, grid order
};

// Inclusive linear-interpolation quartiles of P_X across usable replicates.
// `usable` marks records that passed the convergence gate.
StudySummary aggregate(const std::vector<FitRecord>& records, const std::vector<bool>& usable,
                       const StudyConfig& config);

// The full pipeline over the (model x replicate x out-of-sample individual)
// grid: each fit sees every in-sample individual plus exactly one new one,
// follow-up truncated per config. Convergence-gated fits are excluded from the
// quartiles and counted. Writes summary.csv, study_summary.csv, failures.csv,
// charts/, density/ and study_manifest.json under out_dir; fully deterministic
// apart from wall-clock metadata (manifest only).
StudyResult run_study(const StudyConfig& config);

void emit_report(const StudySummary& summary, const std::vector<FitRecord>& records,
                 const StudyConfig& config, const std::filesystem::path& dir);

}  // namespace serorec

#endif
