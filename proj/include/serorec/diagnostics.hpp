#ifndef SEROREC_DIAGNOSTICS_HPP
#define SEROREC_DIAGNOSTICS_HPP

#include <vector>

namespace serorec {

struct RhatResult {
  double value = 1.0;
  // true when chains sit at distinct constants (zero within-chain variance,
  // nonzero between); value then carries a large finite sentinel
  bool divergent = false;
};

// Sentinel reported when the split statistic diverges.
inline constexpr double kRhatDivergent = 1e6;

// Split-chain potential scale reduction factor. Each chain is halved (odd
// lengths drop the last draw); needs >= 2 chains of >= 4 draws. All chains
// constant and equal -> exactly 1.
RhatResult split_rhat(const std::vector<std::vector<double>>& chains);

struct EssResult {
  double value = 0.0;
  bool zero_variance = false;  // constant chain; value = draw count
};

// Autocorrelation-based effective sample size with Geyer initial-monotone
// truncation of the paired autocorrelation sums.
EssResult effective_sample_size(const std::vector<double>& draws);

}  // namespace serorec

#endif
