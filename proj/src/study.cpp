#include "serorec/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "serorec/errors.hpp"
#include "serorec/simulate.hpp"
#include "serorec/stats.hpp"
#include "serorec/svg.hpp"

namespace serorec {

using nlohmann::json;

void StudyConfig::validate() const {
  scenario.validate();
  if (replicates < 1) throw std::invalid_argument("study: replicate count must be >= 1");
  if (models.empty()) throw std::invalid_argument("study: model list is empty");
  for (const auto& label : models)
    if (!scenario.has_model(label))
      throw std::invalid_argument("study: scenario has no model row '" + label + "'");
  if (truncate_visits < 1 || truncate_visits > scenario.out_of_sample_schedule.size())
    throw std::invalid_argument("study: follow-up truncation outside the visit schedule");
  if (workers < 0) throw std::invalid_argument("study: worker count must be >= 0");
  sampler.validate();
}

std::size_t truncate_visits_from_name(const std::string& name) {
  if (name == "diagnosis" || name == "diagnosis-only") return 1;
  if (name == "2weeks" || name == "+2weeks") return 2;
  if (name == "1month" || name == "+1month") return 3;
  throw std::invalid_argument("unknown follow-up truncation '" + name +
                              "' (expected diagnosis|2weeks|1month)");
}

const StudyCell& StudySummary::cell(const std::string& model, double tau_truth, double x) const {
  const std::string canon = canonical_model_label(model);
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (models[m] != canon) continue;
    for (std::size_t t = 0; t < tau_list.size(); ++t) {
      if (tau_list[t] != tau_truth) continue;
      for (std::size_t xi = 0; xi < x_list.size(); ++xi)
        if (std::fabs(x_list[xi] - x) < 1e-12) return cells[m][t][xi];
    }
  }
  throw std::invalid_argument("no study cell for the requested model/offset/X");
}

StudySummary aggregate(const std::vector<FitRecord>& records, const std::vector<bool>& usable,
                       const StudyConfig& config) {
  if (records.size() != usable.size())
    throw std::invalid_argument("aggregate: record/flag length mismatch");
  StudySummary s;
  s.scenario = config.scenario.name;
  for (const auto& label : config.models) s.models.push_back(canonical_model_label(label));
  s.tau_list = config.scenario.out_of_sample_taus;
  s.x_list = default_x_list();
  s.cells.assign(s.models.size(),
                 std::vector<std::vector<StudyCell>>(
                     s.tau_list.size(), std::vector<StudyCell>(s.x_list.size())));

  for (std::size_t m = 0; m < s.models.size(); ++m) {
    for (std::size_t t = 0; t < s.tau_list.size(); ++t) {
      for (std::size_t xi = 0; xi < s.x_list.size(); ++xi) {
        std::vector<double> values;
        StudyCell& cell = s.cells[m][t][xi];
        for (std::size_t i = 0; i < records.size(); ++i) {
          const FitRecord& rec = records[i];
          if (rec.model != s.models[m] || rec.tau_truth != s.tau_list[t]) continue;
          double p = -1.0;
          for (const auto& [x, prob] : rec.summary.p_x)
            if (std::fabs(x - s.x_list[xi]) < 1e-12) p = prob;
          if (p < 0.0) continue;
          if (usable[i]) {
            values.push_back(p);
          } else {
            cell.n_excluded += 1;
          }
        }
        cell.n_used = values.size();
        if (values.empty()) {
          cell.missing = true;
        } else {
          std::sort(values.begin(), values.end());
          cell.q25 = quantile_sorted(values, 0.25);
          cell.median = quantile_sorted(values, 0.5);
          cell.q75 = quantile_sorted(values, 0.75);
        }
      }
    }
  }
  return s;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};

std::string chart_px(const StudySummary& s, std::size_t xi) {
  const int width = 780, height = 430;
  const double left = 64, right = 20, top = 52, bottom = 66;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  SvgWriter svg(width, height);

  const double x_months = s.x_list[xi] * 12.0;
  svg.text(left, 24, "Pr(tau <= " + short_num(s.x_list[xi]) + " yr)  (" + short_num(x_months) +
                         " months), " + s.scenario + " scenario",
           "start", 15);

  auto ypix = [&](double p) { return top + plot_h * (1.0 - p); };
  for (int i = 0; i <= 4; ++i) {
    const double p = 0.25 * i;
    svg.line(left, ypix(p), left + plot_w, ypix(p), "#dddddd", 1.0);
    svg.text(left - 8, ypix(p) + 4, short_num(p), "end", 12);
  }
  svg.line(left, top, left, top + plot_h, "#222222", 1.2);
  svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#222222", 1.2);
  svg.text(left + plot_w / 2, height - 14, "true seroconversion offset (years)", "middle", 13);

  const std::size_t n_tau = s.tau_list.size();
  const std::size_t n_models = s.models.size();
  const double group_w = plot_w / static_cast<double>(n_tau);
  const double slot = std::min(20.0, group_w / static_cast<double>(n_models + 1));

  // legend
  double lx = left;
  for (std::size_t m = 0; m < n_models; ++m) {
    const std::string color = kPalette[m % 7];
    svg.rect(lx, 34, 10, 10, color);
    svg.text(lx + 14, 43, s.models[m], "start", 12);
    lx += 26 + 8.0 * static_cast<double>(s.models[m].size());
  }

  for (std::size_t t = 0; t < n_tau; ++t) {
    const double gx = left + group_w * (static_cast<double>(t) + 0.5);
    svg.text(gx, top + plot_h + 20, short_num(s.tau_list[t]), "middle", 12);
    for (std::size_t m = 0; m < n_models; ++m) {
      const StudyCell& cell = s.cells[m][t][xi];
      if (cell.missing) continue;
      const double cx =
          gx + slot * (static_cast<double>(m) - (static_cast<double>(n_models) - 1.0) / 2.0);
      const std::string color = kPalette[m % 7];
      svg.line(cx, ypix(cell.q25), cx, ypix(cell.q75), color, 2.0);
      svg.line(cx - 4, ypix(cell.q25), cx + 4, ypix(cell.q25), color, 2.0);
      svg.line(cx - 4, ypix(cell.q75), cx + 4, ypix(cell.q75), color, 2.0);
      svg.circle(cx, ypix(cell.median), 3.5, color);
    }
  }
  return svg.finish();
}

struct FitTask {
  std::size_t model_idx;
  int replicate;
  std::size_t out_idx;
};

struct FitOutcome {
  bool ok = false;
  bool usable = false;
  FitRecord record;
  std::string error;
};

FitOutcome run_fit_task(const StudyConfig& cfg, const FitTask& task) {
  FitOutcome outcome;
  try {
    const std::string& label = cfg.models[task.model_idx];
    const ModelConfig& mc = cfg.scenario.model(label);
    PanelDataset full = simulate_dataset(cfg.scenario, label, task.replicate);

    PanelDataset fit;
    fit.scenario = full.scenario;
    fit.model_label = full.model_label;
    fit.replicate = full.replicate;
    fit.sero_interval = full.sero_interval;
    fit.biomarker_names = full.biomarker_names;
    std::size_t seen_out = 0;
    for (auto& ind : full.individuals) {
      if (ind.role == Role::InSample) {
        fit.individuals.push_back(std::move(ind));
      } else {
        if (seen_out == task.out_idx) fit.individuals.push_back(std::move(ind));
        ++seen_out;
      }
    }
    // analysed individual sits last; exactly one out-of-sample subject per fit
    std::stable_partition(fit.individuals.begin(), fit.individuals.end(),
                          [](const Individual& ind) { return ind.role == Role::InSample; });
    fit = truncate_followup(std::move(fit), cfg.truncate_visits);

    const std::size_t unknown = fit.individuals.size() - 1;
    const InferenceModel model =
        InferenceModel::from_model_config(mc, unknown, cfg.scenario.sero_interval);

    SamplerConfig scfg = cfg.sampler;
    scfg.parallel_chains = false;  // the fit grid is the parallel axis
    scfg.seed = RngStream(cfg.sampler.seed)
                    .split("fit")
                    .split(mc.label)
                    .split(static_cast<std::uint64_t>(task.replicate))
                    .split(static_cast<std::uint64_t>(task.out_idx))
                    .key();

    const ChainOutput chains = run_chain(fit, model, scfg);
    const RecencySummary summary = summarize(chains, cfg.scenario.sero_interval);

    outcome.record.replicate = task.replicate;
    outcome.record.model = mc.label;
    outcome.record.scenario = cfg.scenario.name;
    outcome.record.tau_truth = fit.individuals.back().tau;
    outcome.record.summary = summary;
    outcome.ok = true;
    outcome.usable = !summary.convergence_warning;
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

std::string sanitize_csv(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace

void emit_report(const StudySummary& summary, const std::vector<FitRecord>& records,
                 const StudyConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "charts");
  std::filesystem::create_directories(dir / "density");

  write_fit_records(records, dir / "summary.csv");

  {
    std::ofstream out(dir / "study_summary.csv");
    if (!out) throw ParseError("cannot open for writing: " + (dir / "study_summary.csv").string());
    out << "# P_X quartiles over " << config.replicates
        << " replicates, follow-up visits kept: " << config.truncate_visits
        << "; excluded fits failed the R-hat convergence gate\n";
    out << "# quantiles: inclusive linear interpolation between order statistics\n";
    out << "model,scenario,tauTruth,X,median,q25,q75,nUsed,nExcluded,missing\n";
    for (std::size_t m = 0; m < summary.models.size(); ++m) {
      for (std::size_t t = 0; t < summary.tau_list.size(); ++t) {
        for (std::size_t xi = 0; xi < summary.x_list.size(); ++xi) {
          const StudyCell& cell = summary.cells[m][t][xi];
          out << summary.models[m] << ',' << summary.scenario << ','
              << g17(summary.tau_list[t]) << ',' << g17(summary.x_list[xi]) << ',';
          if (cell.missing) {
            out << "NA,NA,NA";
          } else {
            out << g17(cell.median) << ',' << g17(cell.q25) << ',' << g17(cell.q75);
          }
          out << ',' << cell.n_used << ',' << cell.n_excluded << ','
              << (cell.missing ? 1 : 0) << '\n';
        }
      }
    }
  }

  for (std::size_t xi = 0; xi < summary.x_list.size(); ++xi) {
    const std::filesystem::path p = dir / "charts" / ("px_" + std::to_string(xi) + ".svg");
    std::ofstream out(p);
    if (!out) throw ParseError("cannot open for writing: " + p.string());
    out << chart_px(summary, xi);
  }

  // averaged posterior-density panels for the second configured offset
  const std::size_t density_tau_idx = summary.tau_list.size() > 1 ? 1 : 0;
  for (const auto& model : summary.models) {
    std::vector<double> grid_x, acc;
    std::size_t count = 0;
    for (const auto& rec : records) {
      if (rec.model != model || rec.summary.convergence_warning) continue;
      if (rec.tau_truth != summary.tau_list[density_tau_idx]) continue;
      if (acc.empty()) {
        grid_x = rec.summary.density.x;
        acc.assign(grid_x.size(), 0.0);
      }
      if (rec.summary.density.density.size() != acc.size()) continue;
      for (std::size_t g = 0; g < acc.size(); ++g) acc[g] += rec.summary.density.density[g];
      ++count;
    }
    const std::filesystem::path p = dir / "density" / ("density_" + model + ".tsv");
    std::ofstream out(p);
    if (!out) throw ParseError("cannot open for writing: " + p.string());
    out << "# mean posterior density of the seroconversion offset, true offset "
        << g17(summary.tau_list[density_tau_idx]) << ", " << count << " replicates\n";
    out << "tau\tdensity\n";
    for (std::size_t g = 0; g < grid_x.size(); ++g)
      out << g17(grid_x[g]) << '\t' << g17(count > 0 ? acc[g] / static_cast<double>(count) : 0.0)
          << '\n';
  }
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  // fail on an unwritable output location before any fitting starts
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream probe(config.out_dir / ".write_probe");
    if (!probe) throw ParseError("output directory is not writable: " + config.out_dir.string());
  }
  std::filesystem::remove(config.out_dir / ".write_probe");

  std::vector<FitTask> tasks;
  for (std::size_t m = 0; m < config.models.size(); ++m)
    for (int rep = 0; rep < config.replicates; ++rep)
      for (std::size_t u = 0; u < config.scenario.out_of_sample_taus.size(); ++u)
        tasks.push_back({m, rep, u});

  std::vector<FitOutcome> outcomes(tasks.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(
      tasks.size(), config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      outcomes[i] = run_fit_task(config, tasks[i]);
    }
  };
  if (n_workers > 1) {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  } else {
    worker();
  }

  StudyResult result;
  std::vector<bool> usable;
  std::vector<std::pair<FitTask, std::string>> failures;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (outcomes[i].ok) {
      result.records.push_back(std::move(outcomes[i].record));
      usable.push_back(outcomes[i].usable);
    } else {
      failures.emplace_back(tasks[i], outcomes[i].error);
    }
  }

  result.summary = aggregate(result.records, usable, config);
  result.summary.n_fits = tasks.size();
  result.summary.n_failed_fits = failures.size();
  for (std::size_t i = 0; i < usable.size(); ++i)
    if (!usable[i]) result.summary.n_gate_excluded += 1;
  // hard failures count as excluded in their cells
  for (const auto& [task, err] : failures)
    for (auto& cell : result.summary.cells[task.model_idx][task.out_idx])
      cell.n_excluded += 1;

  emit_report(result.summary, result.records, config, config.out_dir);

  {
    std::ofstream out(config.out_dir / "failures.csv");
    if (!out) throw ParseError("cannot open for writing: " + (config.out_dir / "failures.csv").string());
    out << "model,replicate,tauTruth,error\n";
    for (const auto& [task, err] : failures)
      out << canonical_model_label(config.models[task.model_idx]) << ',' << task.replicate << ','
          << g17(config.scenario.out_of_sample_taus[task.out_idx]) << ',' << sanitize_csv(err)
          << '\n';
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest;
  manifest["schema"] = "serorec-study/1";
  manifest["scenario"] = config.scenario.name;
  manifest["models"] = result.summary.models;
  manifest["replicates"] = config.replicates;
  manifest["truncateVisits"] = config.truncate_visits;
  manifest["masterSeed"] = config.scenario.master_seed;
  manifest["samplerSeed"] = config.sampler.seed;
  manifest["nFits"] = result.summary.n_fits;
  manifest["nFailedFits"] = result.summary.n_failed_fits;
  manifest["nGateExcluded"] = result.summary.n_gate_excluded;
  manifest["wallSeconds"] = wall;
  std::ofstream mout(config.out_dir / "study_manifest.json");
  if (!mout)
    throw ParseError("cannot open for writing: " + (config.out_dir / "study_manifest.json").string());
  mout << manifest.dump(2) << '\n';

  return result;
}

}  // namespace serorec
