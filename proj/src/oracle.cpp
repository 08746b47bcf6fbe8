#include "mgrisk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "mgrisk/errors.hpp"
#include "parallel.hpp"

namespace mgrisk {

namespace {

constexpr std::uint64_t kBatchSize = 1u << 16;

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Fills `out` with draws of the loss magnitude.
void draw_losses(const StageDistribution& net_load, double b, Band band, std::uint64_t seed,
                 std::span<double> out) {
  std::mt19937_64 gen(seed);
  auto loss = [&](double n) { return std::abs(controller_rule(n, b, band)); };
  if (const auto* g = std::get_if<Gaussian>(&net_load)) {
    for (std::size_t i = 0; i < out.size(); i += 2) {
      const double u1 = 1.0 - uniform01(gen);  // (0, 1]
      const double u2 = uniform01(gen);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double theta = 2.0 * std::numbers::pi * u2;
      out[i] = loss(g->mean() + g->stddev() * r * std::cos(theta));
      if (i + 1 < out.size()) out[i + 1] = loss(g->mean() + g->stddev() * r * std::sin(theta));
    }
  } else {
    const auto samples = std::get<Empirical>(net_load).sorted();
    // Unbiased index by rejection on the raw 64-bit stream; std::uniform_int_distribution
    // is implementation-defined and would not reproduce across standard libraries.
    const std::uint64_t range = samples.size();
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    for (double& v : out) {
      std::uint64_t x = gen();
      while (x >= limit) x = gen();
      v = loss(samples[x % range]);
    }
  }
}

double interpolate_like_dp(const std::vector<double>& grid, const std::vector<double>& values,
                           double s) {
  const std::size_t n = grid.size();
  const double step = (grid.back() - grid.front()) / static_cast<double>(n - 1);
  if (step <= 0.0) return values[0];
  const double pos = (s - grid.front()) / step;
  if (pos <= 0.0) return values[0];
  if (pos >= static_cast<double>(n - 1)) return values[n - 1];
  std::size_t j = static_cast<std::size_t>(std::floor(pos));
  if (j >= n - 1) j = n - 2;
  const double w = pos - static_cast<double>(j);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

class TreeSearch {
 public:
  TreeSearch(const ScenarioConfig& scenario, const StorageParams& params, int actions,
             int states, const RiskSpec& risk)
      : scenario_(scenario), params_(params), risk_(risk), actions_(actions) {
    const double step = (params.s_max - params.s_min) / static_cast<double>(states - 1);
    for (int i = 0; i < states; ++i)
      grid_.push_back(i == states - 1 ? params.s_max : params.s_min + step * static_cast<double>(i));
  }

  const std::vector<double>& grid() const { return grid_; }

  // Optimal cost from grid node `node` at stage t.
  double cost(std::size_t t, std::size_t node) const {
    if (t == scenario_.horizon()) return 0.0;
    const double s = grid_[node];
    const ActionInterval iv = feasible_action_interval(s, params_);
    double best = std::numeric_limits<double>::infinity();
    const int count = iv.high > iv.low ? actions_ : 1;
    for (int k = 0; k < count; ++k) {
      const double b = count == 1 ? iv.low
                       : k == count - 1
                           ? iv.high
                           : iv.low + (iv.high - iv.low) * static_cast<double>(k) /
                                          static_cast<double>(count - 1);
      const double next = step_state(s, b, params_);
      // Value every grid node of the next stage reachable through interpolation.
      std::vector<double> continuation(grid_.size(), 0.0);
      for (std::size_t j : bracket(next)) continuation[j] = cost(t + 1, j);
      const double total = stage_cost(scenario_.stages[t], b, scenario_.band, risk_) +
                           interpolate_like_dp(grid_, continuation, next);
      best = std::min(best, total);
    }
    return best;
  }

 private:
  // Grid nodes whose values enter the interpolation at s.
  std::vector<std::size_t> bracket(double s) const {
    const std::size_t n = grid_.size();
    const double step = (grid_.back() - grid_.front()) / static_cast<double>(n - 1);
    if (step <= 0.0) return {0};
    const double pos = (s - grid_.front()) / step;
    if (pos <= 0.0) return {0};
    if (pos >= static_cast<double>(n - 1)) return {n - 1};
    std::size_t j = static_cast<std::size_t>(std::floor(pos));
    if (j >= n - 1) j = n - 2;
    return {j, j + 1};
  }

  const ScenarioConfig& scenario_;
  const StorageParams& params_;
  const RiskSpec& risk_;
  int actions_;
  std::vector<double> grid_;
};

}  // namespace

void OracleConfig::validate() const {
  if (sample_count < 10'000) throw ValidationError("oracle sample_count must be >= 10^4");
  if (action_grid_points < 3) throw ValidationError("oracle action_grid_points must be >= 3");
  if (threads < 0) throw ValidationError("oracle threads must be >= 0");
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

McEstimate mc_cvar(const StageDistribution& net_load, double b, Band band, double alpha,
                   const OracleConfig& cfg) {
  cfg.validate();
  validate_band(band);
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw InputError("mc_cvar: alpha must lie in [0, 1), got " + std::to_string(alpha));

  const std::uint64_t n = cfg.sample_count;
  const std::size_t batches = static_cast<std::size_t>((n + kBatchSize - 1) / kBatchSize);
  std::vector<std::uint64_t> seeds(batches);
  std::uint64_t state = cfg.rng_seed;
  for (auto& s : seeds) s = splitmix64(state);

  std::vector<double> losses(n);
  detail::parallel_for(batches, cfg.threads, [&](std::size_t k) {
    const std::size_t begin = k * kBatchSize;
    const std::size_t len = std::min<std::uint64_t>(kBatchSize, n - begin);
    draw_losses(net_load, b, band, seeds[k], std::span<double>(losses).subspan(begin, len));
  });

  // Empirical VaR: smallest order statistic m_(k) with (k + 1) / N >= alpha.
  std::vector<double> order = losses;
  std::size_t k = 0;
  while (k + 1 < n && static_cast<double>(k + 1) / static_cast<double>(n) < alpha) ++k;
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  const double var = order[k];

  const double scale = 1.0 / (1.0 - alpha);
  McEstimate out;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double m : losses) {
    const double excess = std::max(m - var, 0.0);
    if (excess > 0.0) ++out.tail_count;
    const double y = var + excess * scale;
    sum += y;
    sum_sq += y * y;
  }
  const double count = static_cast<double>(n);
  out.estimate = sum / count;
  const double variance = std::max(0.0, (sum_sq - sum * sum / count) / (count - 1.0));
  out.std_error = std::sqrt(variance / count);
  out.empty_tail = out.tail_count == 0;
  if (out.empty_tail) {
    out.estimate = var;
    out.std_error = 0.0;
  }
  return out;
}

ExhaustiveResult exhaustive_dp(const ScenarioConfig& scenario, const StorageParams& params,
                               int action_grid_points, int state_points, const RiskSpec& risk) {
  if (scenario.horizon() > kExhaustiveMaxStages || action_grid_points > kExhaustiveMaxActions ||
      state_points > kExhaustiveMaxStates)
    throw SizeError("exhaustive oracle limited to T <= " + std::to_string(kExhaustiveMaxStages) +
                    ", actions <= " + std::to_string(kExhaustiveMaxActions) + ", states <= " +
                    std::to_string(kExhaustiveMaxStates) + " (got T=" +
                    std::to_string(scenario.horizon()) + ", actions=" +
                    std::to_string(action_grid_points) + ", states=" +
                    std::to_string(state_points) + ")");
  if (action_grid_points < 3) throw InputError("exhaustive oracle needs >= 3 action points");
  if (state_points < 2) throw InputError("exhaustive oracle needs >= 2 state points");
  scenario.validate();
  params.validate();
  risk.validate();

  const TreeSearch search(scenario, params, action_grid_points, state_points, risk);
  ExhaustiveResult out;
  for (std::size_t i = 0; i < search.grid().size(); ++i)
    out.initial_costs.push_back(search.cost(0, i));
  out.best_cost = *std::min_element(out.initial_costs.begin(), out.initial_costs.end());
  return out;
}

}  // namespace mgrisk
