#include "serorec/recency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "serorec/diagnostics.hpp"
#include "serorec/errors.hpp"
#include "serorec/stats.hpp"

namespace serorec {

double p_x(const std::vector<double>& tau_draws, double x) {
  if (tau_draws.empty()) throw InsufficientSamples("p_x: no posterior draws");
  if (!(x >= 0.0)) throw std::invalid_argument("p_x: X must be >= 0");
  std::size_t count = 0;
  for (double v : tau_draws)
    if (v <= x) ++count;
  return static_cast<double>(count) / static_cast<double>(tau_draws.size());
}

Interval hpd_interval(std::vector<double> tau_draws, double mass) {
  if (tau_draws.size() < 20) throw InsufficientSamples("hpd_interval: need at least 20 draws");
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("hpd_interval: mass outside (0,1)");
  std::sort(tau_draws.begin(), tau_draws.end());
  const std::size_t n = tau_draws.size();
  const std::size_t w =
      std::min(n, static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n))));
  Interval best{tau_draws.front(), tau_draws[w - 1]};
  for (std::size_t i = 1; i + w <= n; ++i) {
    if (tau_draws[i + w - 1] - tau_draws[i] < best.length())
      best = {tau_draws[i], tau_draws[i + w - 1]};
  }
  return best;
}

DensityGrid posterior_density(const std::vector<double>& tau_draws, std::size_t grid_size,
                              double support) {
  if (tau_draws.size() < 20)
    throw InsufficientSamples("posterior_density: need at least 20 draws");
  if (grid_size < 2) throw std::invalid_argument("posterior_density: grid too small");
  if (!(support > 0.0)) throw std::invalid_argument("posterior_density: support must be > 0");

  const double n = static_cast<double>(tau_draws.size());
  const double sd = std::sqrt(sample_variance(tau_draws));
  std::vector<double> sorted = tau_draws;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double width = sd;
  if (iqr > 0.0) width = std::min(width, iqr / 1.34);
  double h = 0.9 * width * std::pow(n, -0.2);
  h = std::max(h, 1e-3 * support);  // keeps the kernel proper on degenerate draws

  DensityGrid grid;
  grid.x.resize(grid_size);
  grid.density.assign(grid_size, 0.0);
  const double step = support / static_cast<double>(grid_size - 1);
  for (std::size_t g = 0; g < grid_size; ++g) grid.x[g] = step * static_cast<double>(g);

  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  auto kernel = [&](double u) { return std::exp(-0.5 * u * u / (h * h)); };
  for (double xi : tau_draws) {
    for (std::size_t g = 0; g < grid_size; ++g) {
      const double x = grid.x[g];
      // reflection images at 0 and at the right boundary
      grid.density[g] +=
          norm * (kernel(x - xi) + kernel(x + xi) + kernel(2.0 * support - x - xi));
    }
  }
  return grid;
}

std::vector<double> default_x_list() { return {2.0 / 12.0, 4.0 / 12.0, 6.0 / 12.0}; }

RecencySummary summarize(const ChainOutput& output, double sero_interval,
                         const std::vector<double>& x_list, std::size_t grid_size,
                         double rhat_gate) {
  if (!(sero_interval > 0.0)) throw std::invalid_argument("summarize: support must be > 0");
  std::vector<std::vector<double>> per_chain = output.per_chain(output.tau_column());
  if (per_chain.empty()) throw InsufficientSamples("summarize: no surviving chains");

  RecencySummary s;
  if (per_chain.size() >= 2) {
    const RhatResult r = split_rhat(per_chain);
    s.rhat_tau = r.value;
  } else {
    // halve the single chain so the gate still sees a between-segment contrast
    const auto& c = per_chain.front();
    if (c.size() >= 8) {
      const std::size_t half = c.size() / 2;
      std::vector<std::vector<double>> halves{
          std::vector<double>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half)),
          std::vector<double>(c.begin() + static_cast<std::ptrdiff_t>(half),
                              c.begin() + static_cast<std::ptrdiff_t>(2 * half))};
      s.rhat_tau = split_rhat(halves).value;
    }
  }
  s.convergence_warning = !(s.rhat_tau < rhat_gate);

  double ess = 0.0;
  for (const auto& c : per_chain) {
    const EssResult e = effective_sample_size(c);
    ess += e.value;
  }
  s.ess_tau = ess;

  std::vector<double> pooled = output.pooled(output.tau_column());
  s.n_draws = pooled.size();
  std::vector<double> xs = x_list;
  std::sort(xs.begin(), xs.end());
  for (double x : xs) s.p_x.emplace_back(x, p_x(pooled, x));
  s.hpd95 = hpd_interval(pooled, 0.95);
  s.density = posterior_density(pooled, grid_size, sero_interval);
  s.tau_median = median(pooled);
  return s;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_fit_records(const std::vector<FitRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << "replicate,model,scenario,tauTruth,X,pX,hpdLow,hpdHigh,rhat,ess\n";
  for (const auto& rec : records) {
    for (const auto& [x, p] : rec.summary.p_x) {
      out << rec.replicate << ',' << rec.model << ',' << rec.scenario << ','
          << g17(rec.tau_truth) << ',' << g17(x) << ',' << g17(p) << ','
          << g17(rec.summary.hpd95.lo) << ',' << g17(rec.summary.hpd95.hi) << ','
          << g17(rec.summary.rhat_tau) << ',' << g17(rec.summary.ess_tau) << '\n';
    }
  }
  if (!out) throw ParseError("write failed: " + path.string());
}

}  // namespace serorec
