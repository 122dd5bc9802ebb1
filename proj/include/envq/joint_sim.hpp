#pragma once

#include <cstdint>
#include <vector>

#include "envq/env_core.hpp"
#include "envq/reflected_sde.hpp"

namespace envq {

struct JointState {
  int n = 0;
  Vec2 z{0.0, 0.0};
  double t = 0.0;
  std::vector<double> ell;
};

struct JointSimParams {
  double horizon = 1000.0;
  double dt = 1e-3;
  // Cap on the time-changed step scale*dt; when scale*dt exceeds it the real
  // step shrinks to h_cap/scale.
  double h_cap = 1e-2;
  int n_cap = 12;
  int z_bins = 30;
  int chunks = 50;
  bool log_events = false;
  double snapshot_every = 0.0;  // 0 disables snapshots
  std::size_t max_logged = 1000000;
};

struct QueueEvent {
  double t;
  int n;  // level after the event
  Vec2 z;
};

struct Snapshot {
  double t;
  Vec2 z;
};

// Occupation and local-time accumulators over one time chunk. Layers
// 0..n_cap plus one overflow row.
struct ChunkAccum {
  std::vector<double> occ;        // (n_cap + 2) * z_bins, time-weighted
  std::vector<double> ell_raw;    // (n_cap + 2) * faces
  std::vector<double> ell_scaled; // ell increments divided by the time-change scale
  std::vector<double> off;        // n_cap + 2; threshold mode, time with z outside D_n
  double time = 0.0;
};

struct JointPath {
  JointSimParams params;
  double z_lo = 0.0;
  double z_hi = 1.0;
  int faces = 2;
  std::vector<ChunkAccum> chunks;
  std::vector<QueueEvent> events;
  std::vector<Snapshot> snapshots;
  std::uint64_t steps = 0;
  std::uint64_t queue_events = 0;
  int max_n = 0;
  // Threshold mode: total |displacement| on steps taken while z was outside
  // D_n, and the time spent that way.
  double frozen_displacement = 0.0;
  double frozen_time = 0.0;
  std::uint64_t replicas = 1;
  JointState final_state;
};

JointPath simulate_joint(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p, std::uint64_t seed);
// Same loop with the freezing rule; requires spec.threshold.
JointPath simulate_joint_threshold(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p,
                                   std::uint64_t seed);

// Adds b into a chunk by chunk; grids must match.
void merge_paths(JointPath& a, const JointPath& b);

// Runs replicas with seeds split_seed(root, i) on worker threads and merges
// them in replica order.
JointPath simulate_replicas(const DiffusionEnvSpec& spec, const JointState& x0, const JointSimParams& p,
                            std::uint64_t root_seed, int replicas, int threads = 0);

struct OccupationMatrix {
  int n_cap = 0;
  int bins = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> frac;  // (n_cap + 2) * bins; the last row is n > n_cap
  // Per row: fraction of time with z outside D_n (threshold mode only; such
  // time is not in frac). frac plus off_support sums to 1.
  std::vector<double> off_support;
  double total_time = 0.0;

  double at(int n, int b) const { return frac[static_cast<std::size_t>(n * bins + b)]; }
  double& at(int n, int b) { return frac[static_cast<std::size_t>(n * bins + b)]; }
  double bin_lo(int b) const { return lo + (hi - lo) * b / bins; }
  double bin_hi(int b) const { return lo + (hi - lo) * (b + 1) / bins; }
  double layer_mass(int n) const;
};

struct SummaryOptions {
  double burn_in = 0.2;
  int n_cap = -1;   // -1: the path's own
  int z_bins = -1;  // must divide the path's bin count
  int first_chunk = -1;  // explicit chunk range overrides burn_in
  int last_chunk = -1;
};

OccupationMatrix occupation_summary(const JointPath& path, const SummaryOptions& opt = {});
// Post-burn-in occupation split into two halves.
std::pair<OccupationMatrix, OccupationMatrix> occupation_halves(const JointPath& path, double burn_in = 0.2);

}  // namespace envq
