#include "serorec/growth.hpp"

#include <cmath>
#include <stdexcept>

namespace serorec {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite ") + what);
}

void require_s(double s) {
  require_finite(s, "time since seroconversion");
  if (s < 0.0) throw std::invalid_argument("time since seroconversion must be >= 0");
}

}  // namespace

int growth_dim(GrowthKind kind) {
  switch (kind) {
    case GrowthKind::Linear: return 2;
    case GrowthKind::Nonlinear3: return 3;
    case GrowthKind::ViralDecay: return 2;
  }
  throw std::invalid_argument("unknown growth kind");
}

std::string growth_kind_name(GrowthKind kind) {
  switch (kind) {
    case GrowthKind::Linear: return "linear";
    case GrowthKind::Nonlinear3: return "nonlinear3";
    case GrowthKind::ViralDecay: return "viral_decay";
  }
  throw std::invalid_argument("unknown growth kind");
}

GrowthKind growth_kind_from_name(const std::string& name) {
  if (name == "linear") return GrowthKind::Linear;
  if (name == "nonlinear3") return GrowthKind::Nonlinear3;
  if (name == "viral_decay") return GrowthKind::ViralDecay;
  throw std::invalid_argument("unknown growth kind: " + name);
}

bool growth_coord_is_linear(GrowthKind kind, int c) {
  switch (kind) {
    case GrowthKind::Linear: return c == 0 || c == 1;
    case GrowthKind::Nonlinear3: return c == 0 || c == 1;  // not the log-rate
    case GrowthKind::ViralDecay: return c == 0;            // not the decay rate
  }
  return false;
}

int GrowthModelSpec::n_fixed() const {
  int n = 0;
  for (bool f : fixed_mask)
    if (f) ++n;
  return n;
}

bool GrowthModelSpec::is_fixed(int c) const {
  if (c < 0 || c >= dim()) throw std::invalid_argument("coordinate index out of range");
  return !fixed_mask.empty() && fixed_mask[static_cast<std::size_t>(c)];
}

void GrowthModelSpec::validate() const {
  if (!fixed_mask.empty() && static_cast<int>(fixed_mask.size()) != dim())
    throw std::invalid_argument("fixed_mask size does not match curve dimension");
}

GrowthModelSpec GrowthModelSpec::linear() { return {GrowthKind::Linear, {}}; }

GrowthModelSpec GrowthModelSpec::nonlinear3(bool fixed_asymptote) {
  GrowthModelSpec s{GrowthKind::Nonlinear3, {}};
  if (fixed_asymptote) s.fixed_mask = {true, false, false};
  return s;
}

GrowthModelSpec GrowthModelSpec::viral_decay() { return {GrowthKind::ViralDecay, {}}; }

double eval_linear(double intercept, double slope, double s) {
  require_finite(intercept, "coefficient");
  require_finite(slope, "coefficient");
  require_s(s);
  return intercept + slope * s;
}

double eval_nonlinear3(double asymptote, double intercept, double log_rate, double s) {
  require_finite(asymptote, "coefficient");
  require_finite(intercept, "coefficient");
  require_finite(log_rate, "coefficient");
  require_s(s);
  return asymptote + (intercept - asymptote) * std::exp(-std::exp(log_rate) * s);
}

double eval_viral(double plateau, double decay_rate, double s) {
  require_finite(plateau, "coefficient");
  require_finite(decay_rate, "coefficient");
  require_s(s);
  return plateau * (1.0 + std::exp(-decay_rate * s));
}

double eval_growth(GrowthKind kind, std::span<const double> beta, double s) {
  if (static_cast<int>(beta.size()) != growth_dim(kind))
    throw std::invalid_argument("coefficient vector size does not match curve dimension");
  switch (kind) {
    case GrowthKind::Linear: return eval_linear(beta[0], beta[1], s);
    case GrowthKind::Nonlinear3: return eval_nonlinear3(beta[0], beta[1], beta[2], s);
    case GrowthKind::ViralDecay: return eval_viral(beta[0], beta[1], s);
  }
  throw std::invalid_argument("unknown growth kind");
}

std::vector<double> eval_trajectory(const GrowthModelSpec& spec, std::span<const double> beta,
                                    double tau, std::span<const double> times) {
  spec.validate();
  require_finite(tau, "seroconversion offset");
  if (tau < 0.0) throw std::invalid_argument("seroconversion offset must be >= 0");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(eval_growth(spec.kind, beta, t + tau));
  return out;
}

std::vector<double> eval_bivariate(const BivariateSpec& spec, std::span<const double> beta1,
                                   std::span<const double> beta2, double tau,
                                   std::span<const double> times) {
  std::vector<double> out = eval_trajectory(spec.first, beta1, tau, times);
  std::vector<double> second = eval_trajectory(spec.second, beta2, tau, times);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

}  // namespace serorec
