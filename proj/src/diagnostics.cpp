#include "serorec/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace serorec {

RhatResult split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("split_rhat: need at least 2 chains");
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) throw std::invalid_argument("split_rhat: need at least 4 draws per chain");

  const std::size_t half = n / 2;
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(half),
                        c.begin() + static_cast<std::ptrdiff_t>(2 * half));
  }

  const double m = static_cast<double>(halves.size());
  const double len = static_cast<double>(half);
  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& h : halves) {
    double mu = 0.0;
    for (double v : h) mu += v;
    mu /= len;
    double s2 = 0.0;
    for (double v : h) s2 += (v - mu) * (v - mu);
    s2 /= (len - 1.0);
    means.push_back(mu);
    vars.push_back(s2);
  }
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= len / (m - 1.0);
  double w = 0.0;
  for (double s2 : vars) w += s2;
  w /= m;

  if (w == 0.0) {
    if (b == 0.0) return {1.0, false};
    return {kRhatDivergent, true};
  }
  const double var_plus = (len - 1.0) / len * w + b / len;
  return {std::sqrt(var_plus / w), false};
}

EssResult effective_sample_size(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  if (n < 4) throw std::invalid_argument("effective_sample_size: need at least 4 draws");
  const auto [mn, mx] = std::minmax_element(draws.begin(), draws.end());
  if (*mn == *mx) return {static_cast<double>(n), true};
  double mu = 0.0;
  for (double v : draws) mu += v;
  mu /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : draws) c0 += (v - mu) * (v - mu);
  c0 /= static_cast<double>(n);
  if (c0 == 0.0) return {static_cast<double>(n), true};

  auto rho = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (draws[i] - mu) * (draws[i + lag] - mu);
    return c / (static_cast<double>(n) * c0);
  };

  // paired sums Gamma_k = rho(2k) + rho(2k+1); tau = 2*sum(Gamma) - 1, kept
  // while positive and forced monotone non-increasing
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double g = rho(2 * k) + rho(2 * k + 1);
    if (g <= 0.0) break;
    g = std::min(g, prev);
    prev = g;
    sum += g;
  }
  const double tau_int = std::max(2.0 * sum - 1.0, 1e-12);
  return {std::min(static_cast<double>(n) / tau_int, static_cast<double>(n) * 1.5), false};
}

}  // namespace serorec
