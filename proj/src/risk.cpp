#include "mgrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mgrisk/errors.hpp"
#include "mgrisk/line_search.hpp"

namespace mgrisk {

namespace {

// Upper end of the search range for v, as a loss quantile.
constexpr double kSearchQuantile = 1.0 - 1e-9;

double loss_of(double n, double upper, double lower) {
  return std::max({n - upper, lower - n, 0.0});
}

// Smallest sorted[k] with (k + 1) / N >= p.
double quantile_sorted(std::span<const double> sorted, double p) {
  const double n = static_cast<double>(sorted.size());
  std::size_t lo = 0;
  std::size_t hi = sorted.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (static_cast<double>(mid + 1) / n >= p)
      hi = mid;
    else
      lo = mid + 1;
  }
  return sorted[lo];
}

}  // namespace

void RiskSpec::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw ValidationError("alpha must satisfy 0 <= alpha < 1, got " + std::to_string(alpha));
  if (!(ru_tolerance > 0.0))
    throw ValidationError("ru_tolerance must be > 0, got " + std::to_string(ru_tolerance));
  if (quadrature_points < 64)
    throw ValidationError("quadrature_points must be >= 64, got " +
                          std::to_string(quadrature_points));
}

double controller_rule(double n, double b, Band band) noexcept {
  const double flow = n + b;
  if (flow > band.p_max) return flow - band.p_max;
  if (flow < band.p_min) return flow - band.p_min;
  return 0.0;
}

CurtailmentMagnitude::CurtailmentMagnitude(const StageDistribution& net_load, double b, Band band)
    : net_load_(&net_load), upper_(band.p_max - b), lower_(band.p_min - b) {}

double CurtailmentMagnitude::atom_at_zero() const {
  return std::max(0.0, mgrisk::cdf(*net_load_, upper_) - cdf_left(*net_load_, lower_));
}

double CurtailmentMagnitude::cdf(double z) const {
  if (z < 0.0) return 0.0;
  const double p = mgrisk::cdf(*net_load_, upper_ + z) - cdf_left(*net_load_, lower_ - z);
  return std::clamp(p, 0.0, 1.0);
}

double CurtailmentMagnitude::tail_expectation(double v) const {
  // upper_ + v > lower_ - v for v >= 0, so the two tails never overlap.
  return upper_partial_expectation(*net_load_, upper_ + v) +
         lower_partial_expectation(*net_load_, lower_ - v);
}

double CurtailmentMagnitude::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0))
    throw InputError("loss quantile: probability must lie in [0, 1), got " + std::to_string(p));
  if (atom_at_zero() >= p) return 0.0;

  if (const auto* e = std::get_if<Empirical>(net_load_)) {
    std::vector<double> losses;
    losses.reserve(e->size());
    for (double n : e->sorted()) losses.push_back(loss_of(n, upper_, lower_));
    std::sort(losses.begin(), losses.end());
    return quantile_sorted(losses, p);
  }

  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw SolverError("loss quantile bracket diverged");
  }
  // Invariant: cdf(lo) < p <= cdf(hi).
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double var_alpha(const CurtailmentMagnitude& loss, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw InputError("var_alpha: alpha must lie in [0, 1), got " + std::to_string(alpha));
  return loss.quantile(alpha);
}

double cvar_alpha(const CurtailmentMagnitude& loss, const RiskSpec& spec) {
  spec.validate();
  const double scale = 1.0 / (1.0 - spec.alpha);
  auto objective = [&](double v) { return v + loss.tail_expectation(v) * scale; };

  // The objective is convex in v and minimized at VaR_alpha; the line search covers
  // the far tail, and the closed-form candidates make the boundary case v = 0 exact.
  double best = objective(0.0);
  const double v_max = loss.quantile(kSearchQuantile);
  if (v_max > 0.0) {
    const auto search = golden_section_minimize(objective, 0.0, v_max, spec.ru_tolerance);
    best = std::min(best, search.value);
    const double var = var_alpha(loss, spec.alpha);
    if (var > 0.0) best = std::min(best, objective(var));
  }
  return std::max(0.0, best);
}

double stage_cost(const StageDistribution& net_load, double b, Band band, const RiskSpec& spec) {
  return cvar_alpha(CurtailmentMagnitude(net_load, b, band), spec);
}

double stage_cost_closed_form_alpha0(const StageDistribution& net_load, double b, Band band) {
  if (!std::holds_alternative<Gaussian>(net_load))
    throw UnsupportedModelError("closed-form alpha=0 stage cost requires a Gaussian net load");
  return upper_partial_expectation(net_load, band.p_max - b) +
         lower_partial_expectation(net_load, band.p_min - b);
}

}  // namespace mgrisk
