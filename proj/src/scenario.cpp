#include "serorec/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "serorec/errors.hpp"
#include "serorec/mvn.hpp"

namespace serorec {

using nlohmann::json;

int ModelConfig::stacked_dim() const {
  int d = 0;
  for (const auto& b : biomarkers) d += b.spec.dim();
  return d;
}

int ModelConfig::coord_offset(int k) const {
  if (k < 0 || k >= static_cast<int>(biomarkers.size()))
    throw std::invalid_argument("biomarker index out of range");
  int off = 0;
  for (int i = 0; i < k; ++i) off += biomarkers[static_cast<std::size_t>(i)].spec.dim();
  return off;
}

void ModelConfig::validate() const {
  if (label.empty()) throw std::invalid_argument("model label is empty");
  if (biomarkers.empty() || biomarkers.size() > 2)
    throw std::invalid_argument("model must have one or two biomarkers");
  for (const auto& b : biomarkers) b.spec.validate();
  const int d = stacked_dim();
  if (mean.size() != d)
    throw std::invalid_argument("population mean size does not match stacked dimension");
  if (cov.rows() != d || cov.cols() != d)
    throw std::invalid_argument("population covariance size does not match stacked dimension");
  check_covariance(cov);
  int c = 0;
  for (const auto& b : biomarkers) {
    for (int j = 0; j < b.spec.dim(); ++j, ++c) {
      if (b.spec.is_fixed(j) && cov.row(c).cwiseAbs().maxCoeff() > 0.0)
        throw InvalidCovariance("fixed coordinate " + std::to_string(c) +
                                " must have zero generative variance");
    }
  }
  if (error_var.size() != biomarkers.size())
    throw std::invalid_argument("one measurement-error variance required per biomarker");
  for (double v : error_var)
    if (!(v > 0.0)) throw std::invalid_argument("measurement-error variance must be > 0");
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw std::invalid_argument("scenario name is empty");
  if (models.empty()) throw std::invalid_argument("scenario has no model rows");
  for (const auto& m : models) m.validate();
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      if (models[i].label == models[j].label)
        throw std::invalid_argument("duplicate model label: " + models[i].label);
  if (n_in_sample < 0) throw std::invalid_argument("n_in_sample must be >= 0");
  if (!(sero_interval > 0.0)) throw std::invalid_argument("sero_interval must be > 0");
  for (double tau : out_of_sample_taus)
    if (!(tau >= 0.0 && tau <= sero_interval))
      throw std::invalid_argument("out-of-sample offsets must lie in [0, sero_interval]");
  if (in_sample_schedule.empty() || out_of_sample_schedule.empty())
    throw std::invalid_argument("visit schedules must be non-empty");
  for (const auto* sched : {&in_sample_schedule, &out_of_sample_schedule}) {
    if ((*sched)[0] < 0.0) throw std::invalid_argument("visit times must be >= 0");
    for (std::size_t i = 1; i < sched->size(); ++i)
      if (!((*sched)[i] > (*sched)[i - 1]))
        throw std::invalid_argument("visit schedules must be strictly increasing");
  }
}

const ModelConfig& ScenarioConfig::model(std::string_view label) const {
  const std::string canon = canonical_model_label(label);
  for (const auto& m : models)
    if (m.label == canon) return m;
  throw std::invalid_argument("scenario '" + name + "' has no model row '" + canon + "'");
}

bool ScenarioConfig::has_model(std::string_view label) const {
  const std::string canon = canonical_model_label(label);
  return std::any_of(models.begin(), models.end(),
                     [&](const ModelConfig& m) { return m.label == canon; });
}

std::string canonical_model_label(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '&') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::vector<double> default_in_sample_schedule() {
  std::vector<double> t;
  for (int i = 0; i <= 8; ++i) t.push_back(0.25 * i);
  return t;
}

std::vector<double> default_out_of_sample_schedule() {
  // two weeks as 2/52 year, one month as 1/12 year
  return {0.0, 2.0 / 52.0, 1.0 / 12.0};
}

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

BiomarkerConfig antibody(const std::string& name) {
  return {name, GrowthModelSpec::nonlinear3(/*fixed_asymptote=*/true)};
}

}  // namespace

ScenarioConfig realistic_scenario() {
  ScenarioConfig cfg;
  cfg.name = "realistic";
  cfg.in_sample_schedule = default_in_sample_schedule();
  cfg.out_of_sample_schedule = default_out_of_sample_schedule();

  ModelConfig ar1;
  ar1.label = "AR1";
  ar1.biomarkers = {{"AR1", GrowthModelSpec::linear()}};
  ar1.mean = vec({5.0, 2.0});
  ar1.cov = mat({{0.5, -0.19}, {-0.19, 0.2}});
  ar1.error_var = {0.01};

  ModelConfig ar2;
  ar2.label = "AR2";
  ar2.biomarkers = {antibody("AR2")};
  ar2.mean = vec({0.0, -1.0, 1.0});
  ar2.cov = mat({{0.0, 0.0, 0.0}, {0.0, 0.2, -0.085}, {0.0, -0.085, 0.4}});
  ar2.error_var = {0.0025};

  ModelConfig ar3;
  ar3.label = "AR3";
  ar3.biomarkers = {antibody("AR3")};
  ar3.mean = vec({0.0, -1.5, 0.5});
  ar3.cov = ar2.cov;
  ar3.error_var = {0.0025};

  ModelConfig ar4;
  ar4.label = "AR4";
  ar4.biomarkers = {antibody("AR4")};
  ar4.mean = vec({1.5, -1.5, 0.8});
  ar4.cov = mat({{0.0, 0.0, 0.0}, {0.0, 0.4, -0.147}, {0.0, -0.147, 0.6}});
  ar4.error_var = {0.0025};

  ModelConfig vl;
  vl.label = "VL";
  vl.biomarkers = {{"VL", GrowthModelSpec::viral_decay()}};
  vl.mean = vec({3.0, 2.0});
  vl.cov = mat({{1.0, 0.3536}, {0.3536, 0.5}});
  vl.error_var = {0.04};

  ModelConfig ar1_ar4;
  ar1_ar4.label = "AR1_AR4";
  ar1_ar4.biomarkers = {antibody("AR4"), {"AR1", GrowthModelSpec::linear()}};
  ar1_ar4.mean = vec({1.5, -1.5, 0.8, 5.0, 2.0});
  ar1_ar4.cov = mat({{0.0, 0.0, 0.0, 0.0, 0.0},
                     {0.0, 0.4, -0.147, 0.045, -0.028},
                     {0.0, -0.147, 0.6, -0.055, 0.173},
                     {0.0, 0.045, -0.055, 0.5, -0.19},
                     {0.0, -0.028, 0.173, -0.19, 0.2}});
  ar1_ar4.error_var = {0.0025, 0.01};

  ModelConfig ar4_vl;
  ar4_vl.label = "AR4_VL";
  ar4_vl.biomarkers = {antibody("AR4"), {"VL", GrowthModelSpec::viral_decay()}};
  ar4_vl.mean = vec({1.5, -1.5, 0.8, 3.0, 2.0});
  ar4_vl.cov = mat({{0.0, 0.0, 0.0, 0.0, 0.0},
                    {0.0, 0.4, -0.147, 0.063, 0.134},
                    {0.0, -0.147, 0.6, 0.232, 0.055},
                    {0.0, 0.063, 0.232, 1.0, 0.3536},
                    {0.0, 0.134, 0.055, 0.3536, 0.5}});
  ar4_vl.error_var = {0.0025, 0.04};

  cfg.models = {ar1, ar2, ar3, ar4, vl, ar1_ar4, ar4_vl};
  cfg.validate();
  return cfg;
}

ScenarioConfig ideal_from_realistic(ScenarioConfig cfg) {
  constexpr double kIdealVar = 0.01;
  for (auto& m : cfg.models) {
    const Eigen::VectorXd sd = m.cov.diagonal().cwiseSqrt();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.cov.rows(), m.cov.cols());
    for (Eigen::Index i = 0; i < m.cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cov.cols(); ++j) {
        if (sd(i) == 0.0 || sd(j) == 0.0) continue;
        const double corr = m.cov(i, j) / (sd(i) * sd(j));
        out(i, j) = corr * kIdealVar;
      }
    }
    m.cov = out;
  }
  cfg.name = "ideal";
  cfg.validate();
  return cfg;
}

ScenarioConfig ideal_scenario() { return ideal_from_realistic(realistic_scenario()); }

ScenarioConfig scenario_by_name(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "realistic") return realistic_scenario();
  if (lower == "ideal") return ideal_scenario();
  throw std::invalid_argument("unknown scenario: " + std::string(name));
}

namespace {

constexpr const char* kSchema = "serorec-scenario/1";

json model_to_json(const ModelConfig& m) {
  json jm;
  jm["label"] = m.label;
  jm["biomarkers"] = json::array();
  for (const auto& b : m.biomarkers) {
    json jb;
    jb["name"] = b.name;
    jb["kind"] = growth_kind_name(b.spec.kind);
    const auto& mask = b.spec.fixed_mask;
    if (std::find(mask.begin(), mask.end(), true) != mask.end()) jb["fixedMask"] = mask;
    jm["biomarkers"].push_back(jb);
  }
  jm["mean"] = std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size());
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.cov.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cov.cols(); ++j) row.push_back(m.cov(i, j));
    rows.push_back(row);
  }
  jm["cov"] = rows;
  jm["errorVar"] = m.error_var;
  return jm;
}

ModelConfig model_from_json(const json& jm) {
  ModelConfig m;
  m.label = canonical_model_label(jm.at("label").get<std::string>());
  for (const auto& jb : jm.at("biomarkers")) {
    BiomarkerConfig b;
    b.name = jb.at("name").get<std::string>();
    b.spec.kind = growth_kind_from_name(jb.at("kind").get<std::string>());
    if (jb.contains("fixedMask")) {
      auto mask = jb.at("fixedMask").get<std::vector<bool>>();
      // an all-false mask carries no information; keep the canonical empty form
      if (std::find(mask.begin(), mask.end(), true) != mask.end())
        b.spec.fixed_mask = std::move(mask);
    }
    m.biomarkers.push_back(std::move(b));
  }
  const auto mean = jm.at("mean").get<std::vector<double>>();
  m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  const auto& rows = jm.at("cov");
  m.cov.resize(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
  for (Eigen::Index i = 0; i < m.cov.rows(); ++i) {
    const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != m.cov.cols())
      throw ParseError("model '" + m.label + "': ragged covariance rows");
    for (Eigen::Index j = 0; j < m.cov.cols(); ++j) m.cov(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (jm.contains("errorVar")) {
    m.error_var = jm.at("errorVar").get<std::vector<double>>();
  } else if (jm.contains("errorCov")) {
    // full matrix form is accepted only when diagonal
    const auto& ec = jm.at("errorCov");
    for (std::size_t i = 0; i < ec.size(); ++i) {
      const auto row = ec[i].get<std::vector<double>>();
      if (row.size() != ec.size())
        throw ParseError("model '" + m.label + "': measurement-error matrix is not square");
      for (std::size_t j = 0; j < row.size(); ++j)
        if (i != j && row[j] != 0.0)
          throw ParseError("model '" + m.label +
                           "': measurement errors must be independent across biomarkers "
                           "(off-diagonal entry at row " + std::to_string(i) + ")");
      m.error_var.push_back(row[i]);
    }
  } else {
    throw ParseError("model '" + m.label + "': missing errorVar");
  }
  return m;
}

}  // namespace

void save_scenario_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
  cfg.validate();
  json j;
  j["schema"] = kSchema;
  j["name"] = cfg.name;
  j["nInSample"] = cfg.n_in_sample;
  j["outOfSampleTaus"] = cfg.out_of_sample_taus;
  j["inSampleSchedule"] = cfg.in_sample_schedule;
  j["outOfSampleSchedule"] = cfg.out_of_sample_schedule;
  j["seroInterval"] = cfg.sero_interval;
  j["masterSeed"] = cfg.master_seed;
  j["models"] = json::array();
  for (const auto& m : cfg.models) j["models"].push_back(model_to_json(m));
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kSchema)
      throw ParseError(path.string() + ": unsupported schema '" +
                       j.at("schema").get<std::string>() + "'");
    ScenarioConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.n_in_sample = j.at("nInSample").get<int>();
    cfg.out_of_sample_taus = j.at("outOfSampleTaus").get<std::vector<double>>();
    cfg.in_sample_schedule = j.at("inSampleSchedule").get<std::vector<double>>();
    cfg.out_of_sample_schedule = j.at("outOfSampleSchedule").get<std::vector<double>>();
    cfg.sero_interval = j.at("seroInterval").get<double>();
    cfg.master_seed = j.at("masterSeed").get<std::uint64_t>();
    for (const auto& jm : j.at("models")) cfg.models.push_back(model_from_json(jm));
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace serorec
