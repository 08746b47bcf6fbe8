#include "mgrisk/netload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mgrisk/errors.hpp"

namespace mgrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kQuantileTolerance = 1e-10;

}  // namespace

Gaussian::Gaussian(double mean, double stddev) : mean_(mean), stddev_(stddev) {
  if (!std::isfinite(mean)) throw InputError("Gaussian mean must be finite");
  if (!(stddev > 0.0) || !std::isfinite(stddev))
    throw InputError("Gaussian stddev must be finite and strictly positive, got " +
                     std::to_string(stddev));
}

Empirical::Empirical(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw InputError("empirical distribution needs at least one sample");
  for (double v : sorted_)
    if (!std::isfinite(v)) throw InputError("empirical samples must be finite");
  std::sort(sorted_.begin(), sorted_.end());
}

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double aggregate(std::span<const double> loads, std::span<const double> generations) {
  if (loads.size() != generations.size())
    throw InputError("aggregate: " + std::to_string(loads.size()) + " loads but " +
                     std::to_string(generations.size()) + " generations");
  const double d = std::accumulate(loads.begin(), loads.end(), 0.0);
  const double r = std::accumulate(generations.begin(), generations.end(), 0.0);
  return d - r;
}

double mean(const StageDistribution& dist) {
  return std::visit(overloaded{
                        [](const Gaussian& g) { return g.mean(); },
                        [](const Empirical& e) {
                          auto s = e.sorted();
                          return std::accumulate(s.begin(), s.end(), 0.0) /
                                 static_cast<double>(s.size());
                        },
                    },
                    dist);
}

double cdf(const StageDistribution& dist, double x) {
  return std::visit(overloaded{
                        [x](const Gaussian& g) { return normal_cdf((x - g.mean()) / g.stddev()); },
                        [x](const Empirical& e) {
                          auto s = e.sorted();
                          auto it = std::upper_bound(s.begin(), s.end(), x);
                          return static_cast<double>(it - s.begin()) /
                                 static_cast<double>(s.size());
                        },
                    },
                    dist);
}

double cdf_left(const StageDistribution& dist, double x) {
  return std::visit(overloaded{
                        [x](const Gaussian& g) { return normal_cdf((x - g.mean()) / g.stddev()); },
                        [x](const Empirical& e) {
                          auto s = e.sorted();
                          auto it = std::lower_bound(s.begin(), s.end(), x);
                          return static_cast<double>(it - s.begin()) /
                                 static_cast<double>(s.size());
                        },
                    },
                    dist);
}

double quantile(const StageDistribution& dist, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("quantile: probability must lie in (0, 1), got " + std::to_string(p));

  return std::visit(
      overloaded{
          [p](const Gaussian& g) {
            double lo = g.mean() - 40.0 * g.stddev();
            double hi = g.mean() + 40.0 * g.stddev();
            // Invariant: cdf(lo) < p <= cdf(hi).
            while (hi - lo > kQuantileTolerance) {
              const double mid = 0.5 * (lo + hi);
              if (mid <= lo || mid >= hi) break;
              if (normal_cdf((mid - g.mean()) / g.stddev()) >= p)
                hi = mid;
              else
                lo = mid;
            }
            return hi;
          },
          [p](const Empirical& e) {
            // Smallest index k with (k + 1) / N >= p, evaluated exactly as cdf does.
            auto s = e.sorted();
            const double n = static_cast<double>(s.size());
            std::size_t lo = 0;
            std::size_t hi = s.size() - 1;
            while (lo < hi) {
              const std::size_t mid = lo + (hi - lo) / 2;
              if (static_cast<double>(mid + 1) / n >= p)
                hi = mid;
              else
                lo = mid + 1;
            }
            return s[lo];
          },
      },
      dist);
}

double upper_partial_expectation(const StageDistribution& dist, double k) {
  return std::visit(
      overloaded{
          [k](const Gaussian& g) {
            // sigma * (phi(z) - z * (1 - Phi(z))), z = (k - mu) / sigma
            const double z = (k - g.mean()) / g.stddev();
            const double tail = normal_cdf(-z);
            return std::max(0.0, g.stddev() * normal_pdf(z) + (g.mean() - k) * tail);
          },
          [k](const Empirical& e) {
            double sum = 0.0;
            for (double v : e.sorted()) sum += std::max(v - k, 0.0);
            return sum / static_cast<double>(e.size());
          },
      },
      dist);
}

double lower_partial_expectation(const StageDistribution& dist, double k) {
  return std::visit(
      overloaded{
          [k](const Gaussian& g) {
            const double z = (k - g.mean()) / g.stddev();
            const double head = normal_cdf(z);
            return std::max(0.0, g.stddev() * normal_pdf(z) + (k - g.mean()) * head);
          },
          [k](const Empirical& e) {
            double sum = 0.0;
            for (double v : e.sorted()) sum += std::max(k - v, 0.0);
            return sum / static_cast<double>(e.size());
          },
      },
      dist);
}

double upper_partial_expectation_quadrature(const Gaussian& dist, double k, int points) {
  if (points < 2) throw InputError("quadrature needs at least 2 panels");
  const int panels = points + (points % 2);  // Simpson wants an even count
  const double upper = dist.mean() + 12.0 * dist.stddev();
  if (k >= upper) return 0.0;
  // Below mean - 12 sigma the survival function is 1 to double precision.
  const double lo = std::max(k, dist.mean() - 12.0 * dist.stddev());
  const double flat = lo - k;
  const double h = (upper - lo) / panels;
  auto survival = [&](double x) { return normal_cdf((dist.mean() - x) / dist.stddev()); };
  double sum = survival(lo) + survival(upper);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * survival(lo + i * h);
  return flat + sum * h / 3.0;
}

void validate_band(const Band& band) {
  if (!std::isfinite(band.p_min) || !std::isfinite(band.p_max))
    throw ValidationError("flow limits must be finite");
  if (!(band.p_min < band.p_max))
    throw ValidationError("flow limits require p_min < p_max (got p_min=" +
                          std::to_string(band.p_min) + ", p_max=" + std::to_string(band.p_max) +
                          ")");
}

void ScenarioConfig::validate() const { validate_band(band); }

}  // namespace mgrisk
