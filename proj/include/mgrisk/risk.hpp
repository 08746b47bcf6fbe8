#pragma once

// Risk of load shedding and renewable curtailment under the transmission-limit rule.
//
// For a charge/discharge rate b the controller keeps the line flow n - n~ + b inside
// [p_min, p_max] with the smallest intervention n~; its magnitude |n~| is the per-stage
// loss. The stage cost g(b) is the CVaR of that loss at confidence level alpha, where
// VaR_alpha is the alpha-quantile of the loss, so small alpha means "average over
// nearly the whole distribution".

#include "mgrisk/netload.hpp"

namespace mgrisk {

struct RiskSpec {
  double alpha = 0.0;
  // Stopping width of the golden-section search over the auxiliary variable v in
  // CVaR = min_v { v + E[(loss - v)^+] / (1 - alpha) }.
  double ru_tolerance = 1e-10;
  // Resolution for tail integrals of models without closed-form partial expectations.
  // Both shipped models have closed forms, so this only feeds the quadrature cross-check.
  int quadrature_points = 256;

  void validate() const;
  bool operator==(const RiskSpec&) const = default;
};

// Signed intervention: positive sheds load, negative curtails renewables.
double controller_rule(double n, double b, Band band) noexcept;

// Distribution of |n~(b)| for a fixed action b. Holds a reference to `net_load`,
// which must outlive the view.
class CurtailmentMagnitude {
 public:
  CurtailmentMagnitude(const StageDistribution& net_load, double b, Band band);

  // P(|n~| = 0) = F(p_max - b) - F((p_min - b)^-).
  double atom_at_zero() const;
  // P(|n~| <= z); zero for z < 0.
  double cdf(double z) const;
  // E[(|n~| - v)^+] for v >= 0, from the two net-load partial expectations.
  double tail_expectation(double v) const;
  double mean() const { return tail_expectation(0.0); }
  // min{z >= 0 : cdf(z) >= p} for p in [0, 1).
  double quantile(double p) const;

 private:
  const StageDistribution* net_load_;
  double upper_;  // p_max - b: net load above it is shed
  double lower_;  // p_min - b: net load below it is curtailed
};

double var_alpha(const CurtailmentMagnitude& loss, double alpha);
double cvar_alpha(const CurtailmentMagnitude& loss, const RiskSpec& spec);

// g(b) = CVaR_alpha(|n~(b)|).
double stage_cost(const StageDistribution& net_load, double b, Band band, const RiskSpec& spec);

// alpha = 0 stage cost as E[(n + b - p_max)^+] + E[(p_min - n - b)^+]; Gaussian models only.
double stage_cost_closed_form_alpha0(const StageDistribution& net_load, double b, Band band);

}  // namespace mgrisk
