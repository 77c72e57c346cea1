#include "pesn/stats.hpp"

#include <algorithm>
#include <cmath>

#include "pesn/errors.hpp"

namespace pesn {

void HistogramSpec::validate() const {
  if (bins < 2 || !(lo < hi)) {
    throw DomainError("HistogramSpec: need bins >= 2 and lo < hi");
  }
  if (!(log_base > 1.0)) {
    throw DomainError("HistogramSpec: log base must be > 1");
  }
}

std::vector<std::size_t> histogram(std::span<const double> samples, const HistogramSpec& spec) {
  spec.validate();
  std::vector<std::size_t> counts(static_cast<std::size_t>(spec.bins), 0);
  const double width = (spec.hi - spec.lo) / spec.bins;
  for (double v : samples) {
    if (std::isnan(v)) {
      throw DomainError("histogram: NaN sample");
    }
    auto bin = static_cast<long long>(std::floor((v - spec.lo) / width));
    bin = std::clamp<long long>(bin, 0, spec.bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

double shannon_entropy(std::span<const double> samples, const HistogramSpec& spec) {
  if (samples.empty()) {
    throw DomainError("shannon_entropy: no samples");
  }
  const auto counts = histogram(samples, spec);
  const double n = static_cast<double>(samples.size());
  const double log_base = std::log(spec.log_base);
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p) / log_base;
  }
  return std::max(0.0, h);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("linear_fit: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw DomainError("linear_fit: x values are all equal");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw DomainError("median: no values");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace pesn
