#ifndef SEROREC_GROWTH_HPP
#define SEROREC_GROWTH_HPP

#include <span>
#include <string>
#include <vector>

namespace serorec {

// Mean trajectories as functions of time since seroconversion s >= 0.
//   Linear      beta = (intercept, slope):          b1 + b2*s
//   Nonlinear3  beta = (asymptote, intercept, log_rate):
//                                                   b1 + (b2-b1)*exp(-exp(b3)*s)
//   ViralDecay  beta = (plateau, decay_rate):       b1*(1 + exp(-b2*s))
enum class GrowthKind { Linear, Nonlinear3, ViralDecay };

int growth_dim(GrowthKind kind);
std::string growth_kind_name(GrowthKind kind);
GrowthKind growth_kind_from_name(const std::string& name);

// True when the trajectory is a linear function of coordinate c at any fixed
// value of the remaining coordinates; only such coordinates may be shared as
// fixed effects (the posterior update for them stays Gaussian).
bool growth_coord_is_linear(GrowthKind kind, int c);

// Curve family plus a mask of coordinates treated as fixed effects (no
// individual-level variation).
struct GrowthModelSpec {
  GrowthKind kind = GrowthKind::Linear;
  std::vector<bool> fixed_mask;  // size dim(); empty means all random

  int dim() const { return growth_dim(kind); }
  int n_fixed() const;
  int n_random() const { return dim() - n_fixed(); }
  bool is_fixed(int c) const;
  void validate() const;

  static GrowthModelSpec linear();
  static GrowthModelSpec nonlinear3(bool fixed_asymptote = false);
  static GrowthModelSpec viral_decay();
};

double eval_linear(double intercept, double slope, double s);
double eval_nonlinear3(double asymptote, double intercept, double log_rate, double s);
double eval_viral(double plateau, double decay_rate, double s);

// Dispatch on kind; beta.size() must equal growth_dim(kind).
double eval_growth(GrowthKind kind, std::span<const double> beta, double s);

// Mean response at each observation time t_j, with s_j = t_j + tau.
std::vector<double> eval_trajectory(const GrowthModelSpec& spec, std::span<const double> beta,
                                    double tau, std::span<const double> times);

struct BivariateSpec {
  GrowthModelSpec first;
  GrowthModelSpec second;
  int stacked_dim() const { return first.dim() + second.dim(); }
};

// Stacked mean vector: first biomarker's trajectory then the second's, both on
// the shared time grid.
std::vector<double> eval_bivariate(const BivariateSpec& spec, std::span<const double> beta1,
                                   std::span<const double> beta2, double tau,
                                   std::span<const double> times);

}  // namespace serorec

#endif
