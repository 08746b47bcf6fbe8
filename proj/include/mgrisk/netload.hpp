#pragma once

// Per-stage probability models of the net load n_t = d_t - r_t.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace mgrisk {

// Normal net load. Density is strictly positive everywhere.
class Gaussian {
 public:
  Gaussian() = default;  // standard normal
  Gaussian(double mean, double stddev);

  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }

  bool operator==(const Gaussian&) const = default;

 private:
  double mean_ = 0.0;
  double stddev_ = 1.0;
};

// Equiprobable samples with the right-continuous step CDF.
class Empirical {
 public:
  explicit Empirical(std::vector<double> samples);

  // Samples in ascending order.
  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }

  bool operator==(const Empirical&) const = default;

 private:
  std::vector<double> sorted_;
};

using StageDistribution = std::variant<Gaussian, Empirical>;

// Standard normal helpers. normal_cdf uses std::erfc, accurate to a few ulp
// (absolute error far below 1e-12 across the real line).
double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

// sum(loads) - sum(generations).
double aggregate(std::span<const double> loads, std::span<const double> generations);

double mean(const StageDistribution& dist);

// P(n <= x).
double cdf(const StageDistribution& dist, double x);

// P(n < x); differs from cdf only at the atoms of an empirical model.
double cdf_left(const StageDistribution& dist, double x);

// Generalized inverse min{x : cdf(x) >= p} for p in (0, 1). Exact for empirical
// models, bisection to 1e-10 for Gaussian ones.
double quantile(const StageDistribution& dist, double p);

// E[(n - k)^+].
double upper_partial_expectation(const StageDistribution& dist, double k);

// E[(k - n)^+].
double lower_partial_expectation(const StageDistribution& dist, double k);

// E[(n - k)^+] = integral of (1 - F) over [k, inf), by composite Simpson with
// `points` panels on a truncated range. Independent route for Gaussian models.
double upper_partial_expectation_quadrature(const Gaussian& dist, double k, int points);

struct Band {
  double p_min;
  double p_max;

  bool operator==(const Band&) const = default;
};

struct ScenarioConfig {
  std::vector<StageDistribution> stages;
  Band band{0.0, 1.0};

  std::size_t horizon() const noexcept { return stages.size(); }
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

void validate_band(const Band& band);

}  // namespace mgrisk
