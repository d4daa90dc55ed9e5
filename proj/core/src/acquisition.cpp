#include "slide/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "binio.hpp"
#include "parallel.hpp"
#include "slide/errors.hpp"

namespace slide {

namespace {

// distinct RNG streams derived from the batch seed
constexpr std::uint64_t kRetryStream = 0x72657472;  // per-slot retry chain
constexpr std::uint64_t kSplitStream = 0x73706c69;  // train/val shuffle

constexpr char kMagic[5] = "SLID";
constexpr std::uint32_t kVersion = 1;

}  // namespace

const char* channel_name(int channel) {
  static const char* names[kNumChannels] = {"U", "s", "sdot", "p1", "p2",
                                            "delta_y"};
  if (channel < 0 || channel >= kNumChannels)
    throw InvalidInput("channel index out of range");
  return names[channel];
}

std::uint8_t pack_flags(const StepFlags& flags) {
  std::uint8_t out = 0;
  if (flags.actuator_limit) out |= kFlagActuatorLimit;
  if (flags.vacuum) out |= kFlagVacuum;
  if (flags.theta_bound) out |= kFlagThetaBound;
  return out;
}

int validation_count(int n_trajectories) { return n_trajectories / 5; }

double sample_initial_angle(Rng& rng, const LiftGeometry& geom) {
  return rng.uniform(geom.theta_min_rad, geom.theta_max_rad);
}

Equilibrium static_equilibrium(double theta_in, double payload_kg,
                               const PlantModel& plant) {
  const LiftGeometry& geom = plant.geom;
  if (theta_in < geom.theta_min_rad || theta_in > geom.theta_max_rad)
    throw InvalidInput("start angle outside the boom range");

  const int m = plant.modal.n_modes;
  const double g = plant.gravity_ms2;
  const double cos_t = std::cos(theta_in);
  const double sin_t = std::sin(theta_in);
  const double mp = payload_kg;
  const Eigen::VectorXd& phi_p = plant.modal.phi_payload;
  const ActuatorKinematics kin = actuator_kinematics(theta_in, geom);

  // Q(theta_in, zeta, F) = 0 is linear in [zeta; F]: modal rows balance
  // elastic force against gravity and the clevis load, the theta row is the
  // moment balance about the pivot.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd b(m + 1);
  const Eigen::VectorXd w2 = plant.modal.omega().cwiseAbs2();
  const Eigen::VectorXd grav_zeta =
      g * cos_t * (plant.modal.gravity_load + mp * phi_p);
  a.topLeftCorner(m, m) = w2.asDiagonal();
  a.topRightCorner(m, 1) = -kin.transverse_dir * plant.modal.phi_actuator;
  b.head(m) = -grav_zeta;
  a.bottomLeftCorner(1, m) =
      g * sin_t * (plant.modal.gravity_load + mp * phi_p).transpose();
  a(m, m) = kin.dlength_dtheta;
  b(m) = g * cos_t * (plant.beam_first_moment_kgm + mp * geom.payload_x_m);

  const Eigen::VectorXd sol = a.partialPivLu().solve(b);
  if (!sol.allFinite())
    throw NumericalFailure("static equilibrium solve failed");

  Equilibrium eq;
  eq.theta = theta_in;
  eq.zeta = sol.head(m);
  eq.force_n = sol(m);

  // consistency: residual forces must be negligible against the gravity
  // torque scale, and modal residuals below 1e-7 m in position units
  SimState probe;
  probe.theta = theta_in;
  probe.zeta = eq.zeta;
  probe.zeta_rate = Eigen::VectorXd::Zero(m);
  const Eigen::VectorXd res =
      assemble_eom(probe, plant, payload_kg, eq.force_n).force;
  const double torque_scale =
      std::max(1.0, std::abs(g * (plant.beam_first_moment_kgm +
                                  mp * geom.payload_x_m)));
  if (std::abs(res(0)) > 1e-6 * torque_scale)
    throw NumericalFailure("static equilibrium: moment residual too large");
  for (int j = 0; j < m; ++j) {
    if (std::abs(res(j + 1)) / w2(j) > 1e-7)
      throw NumericalFailure("static equilibrium: position residual > 1e-7 m");
  }

  // force to pressures, low side anchored at tank
  const double a1 = plant.hyd.piston_area();
  const double a2 = plant.hyd.rod_side_area();
  const double pt = plant.hyd.tank_pressure_pa;
  if (eq.force_n >= -pt * (a1 - a2)) {
    eq.chambers = {(eq.force_n + pt * a2) / a1, pt};
  } else {
    eq.chambers = {pt, (pt * a1 - eq.force_n) / a2};
  }
  const double pp = plant.hyd.pump_pressure_pa;
  if (eq.chambers.p1_pa <= 0 || eq.chambers.p1_pa > pp ||
      eq.chambers.p2_pa <= 0 || eq.chambers.p2_pa > pp) {
    std::ostringstream msg;
    msg << "equilibrium pressures infeasible at theta = " << theta_in
        << " rad: p1 = " << eq.chambers.p1_pa << " Pa, p2 = "
        << eq.chambers.p2_pa << " Pa";
    throw InfeasibleConfiguration(msg.str());
  }
  return eq;
}

SimState equilibrium_state(const Equilibrium& eq, const PlantModel& plant) {
  SimState state = make_state(plant);
  state.theta = eq.theta;
  state.zeta = eq.zeta;
  state.chambers = eq.chambers;
  return state;
}

namespace {

// Cuts `total` steps into random segment lengths in [2, 10] (remainder
// folding into the last segment).
std::vector<int> segment_lengths(int total, Rng& rng) {
  std::vector<int> lengths;
  int left = total;
  while (left > 0) {
    int len = 2 + static_cast<int>(rng.below(9));
    if (len >= left - 1) len = left;  // avoid a trailing 1-step stub
    lengths.push_back(len);
    left -= len;
  }
  return lengths;
}

}  // namespace

std::vector<double> make_control_signal(int n_steps, Rng& rng) {
  if (n_steps < 10) throw InvalidInput("control signal needs >= 10 steps");
  const int pool = n_steps / 5;

  std::vector<std::vector<double>> segments;
  for (const double value : {0.0, 1.0, -1.0}) {
    for (const int len : segment_lengths(pool, rng))
      segments.emplace_back(len, value);
  }
  // Ramps spanning the full range, random direction and length. The grid
  // denominator keeps every ramp clear of exact 0 so the zeros pool stays
  // exactly countable: even lengths include both endpoints, odd lengths
  // include only the start.
  for (const int len : segment_lengths(pool, rng)) {
    std::vector<double> ramp(len);
    const bool rising = rng.below(2) == 0;
    const int denom = len % 2 == 0 ? len - 1 : len;
    for (int i = 0; i < len; ++i) {
      const double v = len == 1 ? 1.0 : -1.0 + 2.0 * i / denom;
      ramp[i] = rising ? v : -v;
    }
    segments.push_back(std::move(ramp));
  }
  // uniform random pool absorbs the rounding remainder
  const int random_pool = n_steps - 4 * pool;
  for (const int len : segment_lengths(random_pool, rng)) {
    std::vector<double> seg(len);
    for (double& v : seg) v = rng.uniform(-1.0, 1.0);
    segments.push_back(std::move(seg));
  }

  rng.shuffle(segments);
  std::vector<double> signal;
  signal.reserve(n_steps);
  for (const auto& seg : segments)
    signal.insert(signal.end(), seg.begin(), seg.end());
  return signal;
}

Trajectory simulate_trajectory(const Equilibrium& eq,
                               const std::vector<double>& control,
                               double payload_kg, const PlantModel& plant,
                               const SimRunConfig& run, std::uint64_t seed) {
  if (static_cast<int>(control.size()) != run.n_steps)
    throw InvalidInput("control signal length does not match step count");

  Trajectory traj;
  traj.dt_s = run.dt_s;
  traj.payload_kg = payload_kg;
  traj.theta_in = eq.theta;
  traj.seed = seed;
  for (auto& ch : traj.channels) ch.resize(run.n_steps);

  GeneralizedAlpha integrator(plant, payload_kg, run.step);
  integrator.reset(equilibrium_state(eq, plant));

  for (int i = 0; i < run.n_steps; ++i) {
    const SimState& s = integrator.state();
    const ActuatorKinematics kin = actuator_kinematics(s.theta, plant.geom);
    traj.channels[kChU][i] = static_cast<float>(control[i]);
    traj.channels[kChS][i] = static_cast<float>(kin.length_m);
    traj.channels[kChSRate][i] =
        static_cast<float>(kin.dlength_dtheta * s.theta_rate);
    traj.channels[kChP1][i] = static_cast<float>(s.chambers.p1_pa);
    traj.channels[kChP2][i] = static_cast<float>(s.chambers.p2_pa);
    traj.channels[kChDy][i] =
        static_cast<float>(tip_deflection(s, plant).dy_m);
    integrator.advance(control[i], run.dt_s);
  }
  traj.flags = pack_flags(integrator.flags());
  return traj;
}

namespace {

// One slot of the batch: sample, balance, excite, simulate; retry with a
// fresh seed chain while flags trip.
struct SlotResult {
  Trajectory traj;
  bool complete = false;
  bool clean = false;
};

SlotResult generate_slot(const GenConfig& cfg, const PlantModel& plant,
                         int index) {
  SlotResult slot;
  std::uint64_t attempt_seed = derive_seed(cfg.seed, index);
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    Rng rng(attempt_seed);
    try {
      Equilibrium eq;
      bool feasible = false;
      for (int tries = 0; tries < 64 && !feasible; ++tries) {
        const double theta_in = sample_initial_angle(rng, plant.geom);
        try {
          eq = static_equilibrium(theta_in, cfg.payload_kg, plant);
          feasible = true;
        } catch (const InfeasibleConfiguration&) {
        }
      }
      if (!feasible) throw NumericalFailure("no feasible start angle found");

      const std::vector<double> control =
          make_control_signal(cfg.run.n_steps, rng);
      Trajectory traj = simulate_trajectory(eq, control, cfg.payload_kg,
                                            plant, cfg.run, attempt_seed);
      const bool clean = traj.flags == 0;
      if (clean || !slot.complete) {
        slot.traj = std::move(traj);
        slot.complete = true;
        slot.clean = clean;
      }
      if (clean) return slot;
    } catch (const NumericalFailure&) {
    }
    attempt_seed = derive_seed(attempt_seed, kRetryStream);
  }
  return slot;
}

std::uint64_t hash_gen_config(const GenConfig& cfg, const PlantModel& plant) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto fold = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 0x100000001b3ULL;
  };
  fold(static_cast<double>(cfg.n));
  fold(cfg.payload_kg);
  fold(static_cast<double>(cfg.seed));
  fold(cfg.run.dt_s);
  fold(static_cast<double>(cfg.run.n_steps));
  fold(plant.beam_inertia_kgm2);
  fold(plant.modal.n_modes ? plant.modal.frequencies_hz(0) : 0.0);
  fold(plant.hyd.valve_coeff);
  fold(plant.geom.attach_x_m);
  return h;
}

}  // namespace

Batch generate_batch(const GenConfig& cfg, const PlantModel& plant) {
  if (cfg.n < 5) throw InvalidInput("batch needs at least 5 trajectories");
  if (cfg.run.n_steps < 10) throw InvalidInput("too few steps per trajectory");

  std::vector<SlotResult> slots(cfg.n);
  const int workers = cfg.workers > 0 ? cfg.workers : worker_count();
  parallel_for(cfg.n, workers,
               [&](int i) { slots[i] = generate_slot(cfg, plant, i); });

  int failures = 0;
  for (const auto& slot : slots) {
    if (!slot.complete)
      throw NumericalFailure(
          "trajectory generation failed on every retry; check the "
          "configuration");
    if (!slot.clean) ++failures;
  }
  if (failures > cfg.max_failure_fraction * cfg.n) {
    std::ostringstream msg;
    msg << "batch quality: " << failures << " of " << cfg.n
        << " trajectories stayed flagged after retries";
    throw NumericalFailure(msg.str());
  }

  // split by a seeded shuffle; the stored order is the split order
  std::vector<int> order(cfg.n);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(cfg.seed, kSplitStream));
  split_rng.shuffle(order);

  Batch batch;
  batch.dt_s = cfg.run.dt_s;
  batch.payload_kg = cfg.payload_kg;
  batch.config_hash = hash_gen_config(cfg, plant);
  batch.trajectories.reserve(cfg.n);
  for (const int idx : order)
    batch.trajectories.push_back(std::move(slots[idx].traj));
  const int n_val = validation_count(cfg.n);
  for (int i = 0; i < cfg.n - n_val; ++i) batch.train_indices.push_back(i);
  for (int i = cfg.n - n_val; i < cfg.n; ++i) batch.val_indices.push_back(i);
  return batch;
}

void save_batch(const Batch& batch, const std::string& path) {
  if (batch.trajectories.empty()) throw InvalidInput("empty batch");
  auto os = binio::open_out(path);
  binio::write_magic(os, kMagic);
  binio::write<std::uint32_t>(os, kVersion);
  binio::write<std::uint32_t>(os, batch.n());
  const std::uint32_t n_steps = batch.trajectories.front().n_steps();
  binio::write<std::uint32_t>(os, n_steps);
  binio::write<std::uint32_t>(os, kNumChannels);
  binio::write<float>(os, static_cast<float>(batch.dt_s));
  binio::write<double>(os, batch.payload_kg);
  for (const Trajectory& traj : batch.trajectories) {
    if (traj.n_steps() != static_cast<int>(n_steps))
      throw InvalidInput("ragged batch");
    binio::write<double>(os, traj.theta_in);
    binio::write<std::uint64_t>(os, traj.seed);
    binio::write<std::uint8_t>(os, traj.flags);
    for (const auto& ch : traj.channels)
      binio::write_span(os, ch.data(), ch.size());
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

Batch load_batch(const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kMagic, "trajectory dataset");
  if (binio::read<std::uint32_t>(is) != kVersion)
    throw InvalidInput("unsupported dataset version");
  const auto n_traj = binio::read<std::uint32_t>(is);
  const auto n_steps = binio::read<std::uint32_t>(is);
  const auto n_channels = binio::read<std::uint32_t>(is);
  if (n_channels != kNumChannels)
    throw InvalidInput("unexpected channel count");
  if (n_traj == 0 || n_steps == 0) throw InvalidInput("empty dataset file");

  Batch batch;
  batch.dt_s = binio::read<float>(is);
  batch.payload_kg = binio::read<double>(is);
  batch.trajectories.resize(n_traj);
  for (Trajectory& traj : batch.trajectories) {
    traj.dt_s = batch.dt_s;
    traj.payload_kg = batch.payload_kg;
    traj.theta_in = binio::read<double>(is);
    traj.seed = binio::read<std::uint64_t>(is);
    traj.flags = binio::read<std::uint8_t>(is);
    for (auto& ch : traj.channels) {
      ch.resize(n_steps);
      binio::read_span(is, ch.data(), ch.size());
    }
  }
  const int n_val = validation_count(static_cast<int>(n_traj));
  for (int i = 0; i < static_cast<int>(n_traj) - n_val; ++i)
    batch.train_indices.push_back(i);
  for (int i = static_cast<int>(n_traj) - n_val; i < static_cast<int>(n_traj);
       ++i)
    batch.val_indices.push_back(i);
  return batch;
}

void export_csv(const Batch& batch, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (int t = 0; t < batch.n(); ++t) {
    const Trajectory& traj = batch.trajectories[t];
    char name[32];
    std::snprintf(name, sizeof name, "traj_%04d.csv", t);
    std::ofstream os(std::filesystem::path(dir) / name);
    if (!os) throw InvalidInput("cannot write CSV in " + dir);
    os.precision(9);  // float32 round-trip
    os << "t,U,s,sdot,p1,p2,delta_y\n";
    for (int i = 0; i < traj.n_steps(); ++i) {
      os << i * traj.dt_s;
      for (const auto& ch : traj.channels) os << ',' << ch[i];
      os << '\n';
    }
  }
}

}  // namespace slide
