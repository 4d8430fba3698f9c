#include "serorec/simulate.hpp"

#include <cmath>

#include "serorec/mvn.hpp"

namespace serorec {

Eigen::VectorXd draw_random_effects(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                    RngStream& rng) {
  return mvn_draw(mu, sigma, rng);
}

Individual simulate_individual(const ModelConfig& model, const ScenarioConfig& cfg, Role role,
                               double tau, int id, RngStream stream) {
  Individual ind;
  ind.id = id;
  ind.role = role;
  ind.tau = tau;
  ind.times = role == Role::InSample ? cfg.in_sample_schedule : cfg.out_of_sample_schedule;

  RngStream effects = stream.split("effects");
  ind.random_effects = draw_random_effects(model.mean, model.cov, effects);

  ind.y.resize(model.biomarkers.size());
  for (std::size_t k = 0; k < model.biomarkers.size(); ++k) {
    const auto& spec = model.biomarkers[k].spec;
    const int off = model.coord_offset(static_cast<int>(k));
    const std::span<const double> beta{ind.random_effects.data() + off,
                                       static_cast<std::size_t>(spec.dim())};
    const std::vector<double> mean = eval_trajectory(spec, beta, tau, ind.times);
    const double sd = std::sqrt(model.error_var[k]);
    RngStream noise = stream.split("noise").split(static_cast<std::uint64_t>(k));
    ind.y[k].reserve(mean.size());
    for (double m : mean) ind.y[k].push_back(noise.normal(m, sd));
  }
  return ind;
}

PanelDataset simulate_dataset(const ScenarioConfig& cfg, const std::string& model_label,
                              int replicate) {
  cfg.validate();
  if (replicate < 0) throw std::invalid_argument("replicate index must be >= 0");
  const ModelConfig& model = cfg.model(model_label);

  PanelDataset data;
  data.scenario = cfg.name;
  data.model_label = model.label;
  data.replicate = replicate;
  data.sero_interval = cfg.sero_interval;
  for (const auto& b : model.biomarkers) data.biomarker_names.push_back(b.name);

  const RngStream root = RngStream(cfg.master_seed).split(cfg.name);
  const RngStream tau_root = root.split("tau").split(static_cast<std::uint64_t>(replicate));
  const RngStream ind_root =
      root.split("ind").split(model.label).split(static_cast<std::uint64_t>(replicate));

  for (int i = 0; i < cfg.n_in_sample; ++i) {
    RngStream ts = tau_root.split(static_cast<std::uint64_t>(i));
    const double tau = ts.uniform(0.0, cfg.sero_interval);
    data.individuals.push_back(simulate_individual(
        model, cfg, Role::InSample, tau, i, ind_root.split(static_cast<std::uint64_t>(i))));
  }
  for (std::size_t u = 0; u < cfg.out_of_sample_taus.size(); ++u) {
    const int id = cfg.n_in_sample + static_cast<int>(u);
    data.individuals.push_back(simulate_individual(
        model, cfg, Role::OutOfSample, cfg.out_of_sample_taus[u], id,
        ind_root.split(static_cast<std::uint64_t>(id))));
  }
  data.validate();
  return data;
}

}  // namespace serorec
