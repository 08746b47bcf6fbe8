#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mgrisk/errors.hpp"
#include "mgrisk/risk.hpp"
#include "unit/test_support.hpp"

using namespace mgrisk;

namespace {

const Band kBand{0.0, 0.6};

// CVaR as the tail average of the quantile function, (1/(1-alpha)) * int_alpha^1 q(u) du,
// with q from bisection on the loss CDF built directly from normal_cdf.
double cvar_by_quantile_integral(double mu, double sd, double b, Band band, double alpha) {
  const double up = band.p_max - b, lo = band.p_min - b;
  auto loss_cdf = [&](double z) {
    return normal_cdf((up + z - mu) / sd) - normal_cdf((lo - z - mu) / sd);
  };
  auto q = [&](double u) {
    if (loss_cdf(0.0) >= u) return 0.0;
    double a = 0.0, c = 20.0 * sd + 1.0;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + c);
      (loss_cdf(m) >= u ? c : a) = m;
    }
    return c;
  };
  // Substitute u = 1 - (1 - alpha) * exp(-w) to resolve the quantile singularity at 1,
  // and start past the atom, where q jumps off zero.
  auto integrand = [&](double w) {
    const double u = 1.0 - (1.0 - alpha) * std::exp(-w);
    return q(u) * std::exp(-w);
  };
  const double atom = loss_cdf(0.0);
  const double w0 = atom > alpha ? std::log((1.0 - alpha) / (1.0 - atom)) : 0.0;
  return testing::simpson(integrand, w0, 40.0, 4000);
}

}  // namespace

TEST_SUITE("risk") {
  TEST_CASE("controller rule branches") {
    CHECK(controller_rule(0.5, 0.3, kBand) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(controller_rule(-0.4, 0.1, kBand) == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(controller_rule(0.2, 0.1, kBand) == 0.0);
  }

  TEST_CASE("controller rule keeps the flow in band and intervenes minimally") {
    auto rng = testing::make_rng(3);
    for (int i = 0; i < 5000; ++i) {
      const double n = testing::uniform(rng, -2.0, 2.0);
      const double b = testing::uniform(rng, -1.0, 1.0);
      const double pmin = testing::uniform(rng, -1.0, 0.5);
      const Band band{pmin, pmin + testing::uniform(rng, 0.01, 1.0)};
      const double nt = controller_rule(n, b, band);
      const double p = n - nt + b;
      CHECK(p >= band.p_min - 1e-12);
      CHECK(p <= band.p_max + 1e-12);
      const double flow = n + b;
      const double distance = std::max({flow - band.p_max, band.p_min - flow, 0.0});
      CHECK(std::abs(std::abs(nt) - distance) <= 1e-12);
    }
  }

  TEST_CASE("loss distribution has an atom at zero") {
    const StageDistribution g = Gaussian(0.0, 0.25);
    const CurtailmentMagnitude loss(g, 0.0, kBand);
    CHECK(std::abs(loss.atom_at_zero() - 0.491802464075403871) <= 1e-12);
    CHECK(loss.cdf(-0.1) == 0.0);
    CHECK(loss.cdf(0.0) == loss.atom_at_zero());
    CHECK(loss.cdf(50.0) == doctest::Approx(1.0));
    double prev = 0.0;
    for (double z = 0.0; z < 2.0; z += 0.01) {
      CHECK(loss.cdf(z) >= prev);
      prev = loss.cdf(z);
    }
  }

  TEST_CASE("VaR examples") {
    const StageDistribution tight = Gaussian(0.3, 0.1);
    const CurtailmentMagnitude tight_loss(tight, 0.0, kBand);
    REQUIRE(tight_loss.atom_at_zero() >= 0.95);
    CHECK(var_alpha(tight_loss, 0.9) == 0.0);
    const StageDistribution g = Gaussian(0.0, 0.25);
    CHECK(var_alpha(CurtailmentMagnitude(g, 0.0, kBand), 0.0) == 0.0);
    // Root of F(z) = 0.995 from 30-digit arithmetic.
    CHECK(std::abs(var_alpha(CurtailmentMagnitude(g, 0.0, kBand), 0.995) - 0.643962941756919218) <= 1e-9);
    CHECK_THROWS_AS(var_alpha(CurtailmentMagnitude(g, 0.0, kBand), 1.0), InputError);
  }

  TEST_CASE("VaR agrees with an empirical quantile of simulated losses") {
    auto rng = testing::make_rng(99);
    std::normal_distribution<double> normal(0.0, 0.25);
    std::vector<double> losses(1'000'000);
    for (auto& m : losses) m = std::abs(controller_rule(normal(rng), 0.0, kBand));
    const std::size_t k = static_cast<std::size_t>(0.995 * losses.size());
    std::nth_element(losses.begin(), losses.begin() + k, losses.end());
    const StageDistribution g = Gaussian(0.0, 0.25);
    CHECK(std::abs(var_alpha(CurtailmentMagnitude(g, 0.0, kBand), 0.995) - losses[k]) <= 0.005);
  }

  TEST_CASE("CVaR examples") {
    const StageDistribution inband = Empirical({0.1, 0.5});
    CHECK(cvar_alpha(CurtailmentMagnitude(inband, 0.0, kBand), RiskSpec{0.5}) == 0.0);

    const StageDistribution g = Gaussian(0.0, 0.25);
    const CurtailmentMagnitude loss(g, 0.0, kBand);
    const double at0 = cvar_alpha(loss, RiskSpec{0.0});
    CHECK(std::abs(at0 - 0.100415681119311216) <= 1e-9);
    CHECK(cvar_alpha(loss, RiskSpec{0.5}) >= at0);
  }

  TEST_CASE("CVaR matches the quantile-integral form at general alpha") {
    struct Case {
      double mu, sd, b, alpha, expected;
    };
    // 30-digit reference values.
    const Case cases[] = {
        {0.1, 0.25, 0.2, 0.5, 0.0561024507171630239},
        {0.1, 0.25, 0.2, 0.9, 0.215678201876856539},
        {0.8, 0.3, -0.1, 0.3, 0.253238101396832466},
        {0.8, 0.3, -0.1, 0.01, 0.179057243411901747},
    };
    for (const auto& c : cases) {
      const StageDistribution g = Gaussian(c.mu, c.sd);
      const double value = cvar_alpha(CurtailmentMagnitude(g, c.b, kBand), RiskSpec{c.alpha});
      CHECK(std::abs(value - c.expected) <= 1e-9);
      CHECK(std::abs(cvar_by_quantile_integral(c.mu, c.sd, c.b, kBand, c.alpha) - c.expected) <= 1e-6);
    }
  }

  TEST_CASE("CVaR dominates VaR and grows with alpha") {
    auto rng = testing::make_rng(17);
    for (int i = 0; i < 40; ++i) {
      const StageDistribution g = Gaussian(testing::uniform(rng, -0.5, 1.1), testing::uniform(rng, 0.05, 0.5));
      const CurtailmentMagnitude loss(g, testing::uniform(rng, -0.5, 0.5), kBand);
      double prev = 0.0;
      for (double alpha : {0.0, 0.01, 0.2, 0.5, 0.8, 0.95, 0.99}) {
        const double var = var_alpha(loss, alpha);
        const double cvar = cvar_alpha(loss, RiskSpec{alpha});
        CHECK(var >= 0.0);
        CHECK(cvar >= var - 1e-12);
        CHECK(cvar >= prev - 1e-10);
        prev = cvar;
      }
    }
  }

  TEST_CASE("alpha = 0 CVaR equals the expected loss") {
    auto rng = testing::make_rng(23);
    for (int i = 0; i < 10; ++i) {
      const double mu = testing::uniform(rng, -0.3, 0.9), sd = testing::uniform(rng, 0.1, 0.4);
      const double b = testing::uniform(rng, -0.4, 0.4);
      const StageDistribution g = Gaussian(mu, sd);
      const double direct = testing::expected_loss_by_quadrature(mu, sd, b, kBand.p_min, kBand.p_max);
      CHECK(std::abs(stage_cost(g, b, kBand, RiskSpec{0.0}) - direct) <= 1e-8);
    }
  }

  TEST_CASE("stage cost examples") {
    const StageDistribution g = Gaussian(0.0, 0.25);
    const RiskSpec r0{0.0};
    CHECK(std::abs(stage_cost(g, 0.0, kBand, r0) - 0.100415681119311216) <= 1e-9);
    const double g03 = stage_cost(g, 0.3, kBand, r0);
    CHECK(std::abs(g03 - 0.0280512253585815094) <= 1e-9);
    CHECK(g03 <= stage_cost(g, 0.0, kBand, r0));
    CHECK(g03 <= stage_cost(g, 0.6, kBand, r0));
    // Dense scan: the minimizer is the band centre minus the mean.
    double best_b = 0.0, best = 1e300;
    for (int i = 0; i <= 600; ++i) {
      const double b = i * 0.001;
      const double v = stage_cost(g, b, kBand, r0);
      if (v < best) best = v, best_b = b;
    }
    CHECK(best_b == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(stage_cost(Empirical({0.1, 0.5}), 0.0, kBand, r0) == 0.0);
  }

  TEST_CASE("closed form at alpha = 0") {
    const StageDistribution g = Gaussian(0.0, 0.25);
    CHECK(std::abs(stage_cost_closed_form_alpha0(g, 0.0, kBand) - 0.100415681119311216) <= 1e-12);
    CHECK(std::abs(stage_cost_closed_form_alpha0(g, 0.0, Band{-0.6, 0.6}) - 0.00136022203790609309) <= 1e-12);
    CHECK(stage_cost_closed_form_alpha0(Gaussian(0.3, 1e-3), 0.0, kBand) <= 1e-12);
    CHECK_THROWS_AS(stage_cost_closed_form_alpha0(Empirical({0.1}), 0.0, kBand), UnsupportedModelError);

    auto rng = testing::make_rng(29);
    for (int i = 0; i < 50; ++i) {
      const StageDistribution d = Gaussian(testing::uniform(rng, -0.5, 1.1), testing::uniform(rng, 0.05, 0.5));
      const double b = testing::uniform(rng, -1.0, 1.0);
      CHECK(std::abs(stage_cost(d, b, kBand, RiskSpec{0.0}) - stage_cost_closed_form_alpha0(d, b, kBand)) <= 1e-9);
    }
  }

  TEST_CASE("stage cost is convex in b, strictly while the tail reaches the atom") {
    auto rng = testing::make_rng(31);
    int strict_checked = 0;
    for (int i = 0; i < 200; ++i) {
      const StageDistribution d = Gaussian(testing::uniform(rng, -0.4, 1.0), testing::uniform(rng, 0.1, 0.4));
      const RiskSpec r{i % 2 ? testing::uniform(rng, 0.0, 0.9) : testing::uniform(rng, 0.0, 0.05)};
      double x = testing::uniform(rng, -1.0, 1.0), y = testing::uniform(rng, -1.0, 1.0);
      if (std::abs(x - y) < 0.05) continue;
      if (x > y) std::swap(x, y);
      const double gx = stage_cost(d, x, kBand, r), gy = stage_cost(d, y, kBand, r);
      const double gm = stage_cost(d, 0.5 * (x + y), kBand, r);
      const double gap = 0.5 * (gx + gy) - gm;
      // Once the (1 - alpha) tail sits on one side of the band for every action in
      // [x, y], g is affine there. Strictness is asserted when VaR is zero at both ends.
      const CurtailmentMagnitude lx(d, x, kBand), ly(d, y, kBand);
      const bool tail_reaches_atom = lx.atom_at_zero() >= r.alpha && ly.atom_at_zero() >= r.alpha;
      if (tail_reaches_atom && 1.0 - CurtailmentMagnitude(d, 0.5 * (x + y), kBand).atom_at_zero() > 1e-6) {
        CHECK(gap > 1e-12);
        ++strict_checked;
      } else {
        CHECK(gap >= -1e-12);
      }
    }
    CHECK(strict_checked > 60);
  }

  TEST_CASE("stage cost is invariant under a common shift of band and action") {
    auto rng = testing::make_rng(37);
    for (int i = 0; i < 50; ++i) {
      const StageDistribution d = Gaussian(testing::uniform(rng, -0.5, 1.0), testing::uniform(rng, 0.05, 0.4));
      const RiskSpec r{testing::uniform(rng, 0.0, 0.9)};
      const double b = testing::uniform(rng, -0.5, 0.5), c = testing::uniform(rng, -1.0, 1.0);
      const double base = stage_cost(d, b, kBand, r);
      const double shifted = stage_cost(d, b - c, Band{kBand.p_min - c, kBand.p_max - c}, r);
      CHECK(std::abs(base - shifted) <= 1e-12 * std::max(1.0, base) + 1e-12);
    }
  }

  TEST_CASE("empirical stage cost is exact") {
    // Losses for n in {0.9, 0.2, -0.3, 0.4} at b = 0: {0.3, 0, 0.3, 0}.
    const StageDistribution e = Empirical({0.9, 0.2, -0.3, 0.4});
    CHECK(stage_cost(e, 0.0, kBand, RiskSpec{0.0}) == doctest::Approx(0.15));
    CHECK(stage_cost(e, 0.0, kBand, RiskSpec{0.5}) == doctest::Approx(0.3));
    CHECK(var_alpha(CurtailmentMagnitude(e, 0.0, kBand), 0.6) == doctest::Approx(0.3));
  }

  TEST_CASE("risk spec validation") {
    CHECK_THROWS_AS((RiskSpec{1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((RiskSpec{-0.1}.validate()), ValidationError);
    CHECK_THROWS_AS((RiskSpec{0.1, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((RiskSpec{0.1, 1e-10, 32}.validate()), ValidationError);
  }
}
