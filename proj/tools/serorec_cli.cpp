#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "serorec/chainio.hpp"
#include "serorec/dataset.hpp"
#include "serorec/diagnostics.hpp"
#include "serorec/errors.hpp"
#include "serorec/mcmc.hpp"
#include "serorec/recency.hpp"
#include "serorec/scenario.hpp"
#include "serorec/simulate.hpp"
#include "serorec/study.hpp"

namespace {

using namespace serorec;

ScenarioConfig resolve_scenario(const std::string& name) {
  if (name == "realistic" || name == "ideal") return scenario_by_name(name);
  if (std::filesystem::exists(name)) return load_scenario_config(name);
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected realistic, ideal, or a config file path)");
}

// Reduce a dataset to the in-sample panel plus one analysed individual (kept
// last). unknown_id < 0 selects the last out-of-sample individual.
PanelDataset single_unknown(PanelDataset data, long long unknown_id) {
  PanelDataset out;
  out.scenario = data.scenario;
  out.model_label = data.model_label;
  out.replicate = data.replicate;
  out.sero_interval = data.sero_interval;
  out.biomarker_names = data.biomarker_names;
  std::optional<Individual> chosen;
  for (auto& ind : data.individuals) {
    if (ind.role == Role::InSample) {
      out.individuals.push_back(std::move(ind));
    } else if (unknown_id < 0 || ind.id == static_cast<int>(unknown_id)) {
      chosen = std::move(ind);
    }
  }
  if (!chosen)
    throw std::invalid_argument(
        unknown_id < 0 ? std::string("dataset has no out-of-sample individual to analyse")
                       : "no out-of-sample individual with id " + std::to_string(unknown_id));
  out.individuals.push_back(std::move(*chosen));
  return out;
}

void print_summary(const RecencySummary& s) {
  std::printf("posterior median offset  %.6f\n", s.tau_median);
  std::printf("95%% HPD interval         [%.6f, %.6f]  (width %.6f)\n", s.hpd95.lo, s.hpd95.hi,
              s.hpd95.length());
  for (const auto& [x, p] : s.p_x)
    std::printf("P(tau <= %.4f yr)       %.6f\n", x, p);
  std::printf("pooled draws             %zu\n", s.n_draws);
  std::printf("R-hat(tau)               %.4f%s\n", s.rhat_tau,
              s.convergence_warning ? "  ** convergence gate failed **" : "");
  std::printf("ESS(tau)                 %.1f\n", s.ess_tau);
}

int run_simulate(const std::string& scenario_name, std::vector<std::string> models,
                 int replicates, long long master_seed, const std::string& out_dir) {
  ScenarioConfig scen = resolve_scenario(scenario_name);
  if (master_seed >= 0) scen.master_seed = static_cast<std::uint64_t>(master_seed);
  if (models.empty())
    for (const auto& m : scen.models) models.push_back(m.label);
  std::filesystem::create_directories(out_dir);
  int written = 0;
  for (const auto& raw : models) {
    const std::string label = canonical_model_label(raw);
    for (int rep = 0; rep < replicates; ++rep) {
      const PanelDataset data = simulate_dataset(scen, label, rep);
      const auto path = std::filesystem::path(out_dir) /
                        (scen.name + "_" + label + "_rep" + std::to_string(rep) + ".csv");
      write_dataset(data, path);
      ++written;
    }
  }
  std::printf("wrote %d dataset file%s under %s\n", written, written == 1 ? "" : "s",
              out_dir.c_str());
  return 0;
}

struct FitOptions {
  std::string data_path;
  std::string out_dir;
  std::string scenario_override;
  std::string truncate;
  long long unknown_id = -1;
  SamplerConfig sampler;
  double rhat_gate = 1.05;
};

int run_fit(const FitOptions& opt) {
  PanelDataset data = read_dataset(opt.data_path);
  const ScenarioConfig scen =
      resolve_scenario(opt.scenario_override.empty() ? data.scenario : opt.scenario_override);
  const ModelConfig& mc = scen.model(data.model_label);

  data = single_unknown(std::move(data), opt.unknown_id);
  if (!opt.truncate.empty())
    data = truncate_followup(std::move(data), truncate_visits_from_name(opt.truncate));

  const InferenceModel model =
      InferenceModel::from_model_config(mc, data.individuals.size() - 1, data.sero_interval);
  const ChainOutput output = run_chain(data, model, opt.sampler);
  if (output.n_failed() == output.chains.size())
    throw std::runtime_error("all chains failed: " +
                             (output.chains.empty() ? std::string("none run")
                                                    : output.chains.front().error));

  const auto manifest = write_chain_output(output, opt.out_dir);
  std::printf("chains written to %s\n", manifest.string().c_str());

  const RecencySummary summary =
      summarize(output, data.sero_interval, default_x_list(), 201, opt.rhat_gate);
  print_summary(summary);
  return summary.convergence_warning ? 3 : 0;
}

struct RecencyOptions {
  std::string chains_path;
  double support = 1.0;
  std::vector<double> x_list;
  std::size_t grid = 201;
  double rhat_gate = 1.05;
  std::string density_out;
};

int run_recency(const RecencyOptions& opt) {
  const ChainOutput output = read_chain_output(opt.chains_path);
  const std::vector<double> xs = opt.x_list.empty() ? default_x_list() : opt.x_list;
  const RecencySummary summary = summarize(output, opt.support, xs, opt.grid, opt.rhat_gate);
  print_summary(summary);
  if (!opt.density_out.empty()) {
    std::ofstream out(opt.density_out);
    if (!out) throw ParseError("cannot open for writing: " + opt.density_out);
    out << "tau\tdensity\n";
    char buf[80];
    for (std::size_t i = 0; i < summary.density.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\n", summary.density.x[i],
                    summary.density.density[i]);
      out << buf;
    }
  }
  return summary.convergence_warning ? 3 : 0;
}

int run_diagnose(const std::string& chains_path) {
  const ChainOutput output = read_chain_output(chains_path);
  std::printf("%-24s %10s %12s\n", "parameter", "R-hat", "ESS");
  for (std::size_t col = 0; col < output.param_names.size(); ++col) {
    std::vector<std::vector<double>> chains = output.per_chain(col);
    if (chains.empty()) continue;
    if (chains.size() == 1) {
      // single chain: split in half so the between-half term is defined
      auto& only = chains.front();
      const std::size_t half = only.size() / 2;
      std::vector<double> first(only.begin(), only.begin() + half);
      std::vector<double> second(only.begin() + half, only.end());
      chains = {std::move(first), std::move(second)};
    }
    const RhatResult rhat = split_rhat(chains);
    double ess = 0.0;
    for (const auto& c : output.per_chain(col)) ess += effective_sample_size(c).value;
    std::printf("%-24s %10.4f %12.1f%s\n", output.param_names[col].c_str(), rhat.value, ess,
                rhat.divergent ? "  divergent" : "");
  }
  return 0;
}

struct StudyOptions {
  std::string scenario_name = "realistic";
  std::vector<std::string> models;
  int replicates = 20;
  std::string truncate = "1month";
  long long master_seed = -1;
  SamplerConfig sampler;
  std::string out_dir;
  int workers = 0;
};

int run_study_cmd(const StudyOptions& opt) {
  StudyConfig cfg;
  cfg.scenario = resolve_scenario(opt.scenario_name);
  if (opt.master_seed >= 0) cfg.scenario.master_seed = static_cast<std::uint64_t>(opt.master_seed);
  if (opt.models.empty())
    for (const auto& m : cfg.scenario.models) cfg.models.push_back(m.label);
  else
    cfg.models = opt.models;
  cfg.replicates = opt.replicates;
  cfg.truncate_visits = truncate_visits_from_name(opt.truncate);
  cfg.sampler = opt.sampler;
  cfg.out_dir = opt.out_dir;
  cfg.workers = opt.workers;

  const StudyResult result = run_study(cfg);
  std::printf("study complete: %zu fits, %zu failed, %zu excluded by the convergence gate\n",
              result.summary.n_fits, result.summary.n_failed_fits,
              result.summary.n_gate_excluded);
  std::printf("summary table: %s\n",
              (cfg.out_dir / "study_summary.csv").string().c_str());
  return 0;
}

void add_sampler_flags(CLI::App* cmd, SamplerConfig& s) {
  cmd->add_option("--chains", s.n_chains, "independent chains");
  cmd->add_option("--iterations", s.iterations, "sweeps per chain");
  cmd->add_option("--burn-in", s.burn_in, "discarded sweeps per chain");
  cmd->add_option("--thinning", s.thinning, "retain every k-th sweep");
  cmd->add_option("--adapt-window", s.adapt_window, "proposal adaptation window");
  cmd->add_option("--seed", s.seed, "sampler seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian recency estimation from longitudinal biomarkers"};
  app.require_subcommand(1);
  std::function<int()> action;

  // simulate
  std::string sim_scenario = "realistic", sim_out;
  std::vector<std::string> sim_models;
  int sim_replicates = 1;
  long long sim_master_seed = -1;
  auto* sim = app.add_subcommand("simulate", "generate synthetic panel datasets");
  sim->add_option("--scenario", sim_scenario, "realistic | ideal | config file");
  sim->add_option("--model", sim_models, "model labels (default: every scenario row)");
  sim->add_option("--replicates", sim_replicates, "replicate datasets per model")
      ->check(CLI::PositiveNumber);
  sim->add_option("--master-seed", sim_master_seed, "override the scenario master seed");
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->callback([&] {
    action = [&] {
      return run_simulate(sim_scenario, sim_models, sim_replicates, sim_master_seed, sim_out);
    };
  });

  // fit
  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "fit one dataset and summarize the unknown offset");
  fit->add_option("--data", fit_opt.data_path, "dataset file")->required();
  fit->add_option("--out", fit_opt.out_dir, "chain output directory")->required();
  fit->add_option("--scenario", fit_opt.scenario_override,
                  "model/prior source (default: the dataset's scenario)");
  fit->add_option("--truncate-followup", fit_opt.truncate, "diagnosis | 2weeks | 1month");
  fit->add_option("--unknown", fit_opt.unknown_id,
                  "id of the analysed individual (default: last out-of-sample)");
  fit->add_option("--rhat-gate", fit_opt.rhat_gate, "R-hat convergence threshold");
  fit->add_flag("--parallel", fit_opt.sampler.parallel_chains, "run chains on threads");
  add_sampler_flags(fit, fit_opt.sampler);
  fit->callback([&] { action = [&] { return run_fit(fit_opt); }; });

  // recency
  RecencyOptions rec_opt;
  auto* rec = app.add_subcommand("recency", "summarize stored chain output");
  rec->add_option("--chains", rec_opt.chains_path, "manifest.json from a fit")->required();
  rec->add_option("--support", rec_opt.support, "seroconversion interval length (years)");
  rec->add_option("--x", rec_opt.x_list, "P_X thresholds in years (default 2,4,6 months)");
  rec->add_option("--grid", rec_opt.grid, "density grid size");
  rec->add_option("--rhat-gate", rec_opt.rhat_gate, "R-hat convergence threshold");
  rec->add_option("--density-out", rec_opt.density_out, "write the density grid to a file");
  rec->callback([&] { action = [&] { return run_recency(rec_opt); }; });

  // diagnose
  std::string diag_chains;
  auto* diag = app.add_subcommand("diagnose", "R-hat and ESS for every stored parameter");
  diag->add_option("--chains", diag_chains, "manifest.json from a fit")->required();
  diag->callback([&] { action = [&] { return run_diagnose(diag_chains); }; });

  // study
  StudyOptions study_opt;
  auto* study = app.add_subcommand("study", "full simulation study over the fit grid");
  study->add_option("--scenario", study_opt.scenario_name, "realistic | ideal | config file");
  study->add_option("--model", study_opt.models, "model labels (default: every scenario row)");
  study->add_option("--replicates", study_opt.replicates, "replicate datasets per model")
      ->check(CLI::PositiveNumber);
  study->add_option("--truncate-followup", study_opt.truncate, "diagnosis | 2weeks | 1month");
  study->add_option("--master-seed", study_opt.master_seed, "override the scenario master seed");
  study->add_option("--out", study_opt.out_dir, "output directory")->required();
  study->add_option("--workers", study_opt.workers, "fit workers (0 = hardware)");
  add_sampler_flags(study, study_opt.sampler);
  study->callback([&] { action = [&] { return run_study_cmd(study_opt); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    return action ? action() : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
