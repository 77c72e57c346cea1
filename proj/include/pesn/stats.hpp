#pragma once

#include <span>
#include <vector>

namespace pesn {

struct HistogramSpec {
  int bins = 100;
  double lo = -2.0;
  double hi = 2.0;
  double log_base = 2.0;

  void validate() const;
};

/// Bin counts; values outside [lo, hi] land in the edge bins.
[[nodiscard]] std::vector<std::size_t> histogram(std::span<const double> samples, const HistogramSpec& spec);

/// -sum p_i log_base(p_i) over nonempty bins. Throws DomainError on no samples.
[[nodiscard]] double shannon_entropy(std::span<const double> samples, const HistogramSpec& spec = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least-squares line through (x, y) with coefficient of determination.
[[nodiscard]] LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

[[nodiscard]] double median(std::vector<double> values);

}  // namespace pesn
