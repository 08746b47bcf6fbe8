#pragma once

#include <cmath>
#include <utility>

namespace mgrisk {

struct ScalarMinimum {
  double x;
  double value;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
///
/// Stops once the bracket is narrower than `tolerance` (or after `max_iterations`).
/// Returns the best point evaluated, which is never worse than the final bracket midpoint.
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double tolerance,
                                      int max_iterations = 200) {
  if (hi < lo) std::swap(lo, hi);
  constexpr double inv_phi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  ScalarMinimum best = fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};

  for (int it = 0; it < max_iterations && (hi - lo) > tolerance; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
      if (fc < best.value) best = {c, fc};
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
      if (fd < best.value) best = {d, fd};
    }
  }
  return best;
}

}  // namespace mgrisk
