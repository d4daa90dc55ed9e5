#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "slide/acquisition.hpp"

namespace slide {

// Raised when a deflection series never meets the settling criterion;
// callers fall back to the full horizon.
class NoSettle : public std::runtime_error {
 public:
  explicit NoSettle(const std::string& msg) : std::runtime_error(msg) {}
};

// Valve open (+1) for the first 20% of the horizon, closed after.
std::vector<double> decay_probe_signal(int n_steps);

// Settling window of one deflection series: threshold delta* = 1.05 times
// the signed mean, n* = n/10, k = first index where |delta| stays below
// |delta*| for n* consecutive steps; returns t_d* = k + n* - 1.
int slide_window_one(const std::vector<double>& dy_series);

struct SlideWindow {
  int steps = 0;
  double seconds = 0.0;
  std::vector<int> per_sample;      // t_d* per series (n on no-settle)
  std::vector<double> thresholds;   // delta* per series
  int no_settle_count = 0;
};

// Mean window over samples, rounded half-up. Series that never settle fall
// back to their full horizon; more than half no-settle raises NoSettle.
SlideWindow slide_window_avg(const std::vector<std::vector<double>>& samples,
                             double dt_s);

// Dedicated probe batch: n_probe trajectories from random start angles
// excited by the decay probe signal, then slide_window_avg over their
// tip-deflection series. Probes at twice run.n_steps (same dt) so slow
// heavy-payload bounces fit under the quiet-run bar and still settle.
SlideWindow probe_slide_window(const PlantModel& plant, double payload_kg,
                               int n_probe, std::uint64_t seed,
                               const SimRunConfig& run);

}  // namespace slide
