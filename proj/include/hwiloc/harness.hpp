#pragma once

// Seeded experiment sweeps over transmit power or one impairment level, the
// Monte-Carlo estimator trials and the CSV rows they produce.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hwiloc/bounds.hpp"

namespace hwiloc {

enum class SweepAxis { TxPower, SigmaPn, SigmaCfo, SigmaMc, Pa };

/// Hardware is redrawn for every realization either way; `Resample` also
/// draws a fresh pilot block per realization. `Auto` resamples only on the PA axis.
enum class PilotPolicy { Auto, Fixed, Resample };

struct OutputSet {
  bool crb_m2 = true;
  bool crb_m1 = true;
  bool lb = true;
  bool aeb = true;
  bool deb = true;
  bool peb = true;
  bool mmle_rmse = true;
  bool mle_rmse = false;
};

struct ExperimentSpec {
  SystemConfig system;
  ImpairmentConfig impairments = ImpairmentConfig::reference_profile();
  Vec2 position{3.0, 2.0};  // m
  double gain_phase = 0.3;  // rad
  EstimatorConfig estimator;

  SweepAxis axis = SweepAxis::TxPower;
  // Sweep values in config units: dBm, degrees for sigma_pn, 0/1 for the PA.
  std::vector<double> values{-10.0, 0.0, 10.0, 20.0, 30.0, 40.0};
  int realizations = 25;
  int trials = 200;
  std::uint64_t seed = 1;
  OutputSet outputs;
  PilotPolicy pilots = PilotPolicy::Auto;
  double fd_step = 1e-6;  // relative step of the numeric CRB-M1 Jacobian

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  bool resample_pilots() const;
  SystemConfig system_at(double value) const;
  ImpairmentConfig impairments_at(double value) const;
  ChannelParams truth(const SystemConfig& sys) const;
};

const char* axis_name(SweepAxis axis);
/// Inverse of axis_name; ConfigError for unknown names.
SweepAxis parse_axis(const std::string& name);
std::vector<double> default_sweep_values(SweepAxis axis);

/// Desk-scale profile (G = 5, K = 32), everything else as in the default spec.
ExperimentSpec desk_profile();

struct ResultRow {
  double sweep_value = 0.0;
  std::string metric;     // e.g. "LB-PEB", "MMLE-RMSE"
  std::string statistic;  // mean | min | max
  double value = 0.0;
  std::string units;      // m | deg | s
  int realizations = 0;
  int trials = 0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> diagnostics;  // failed points and excluded trials
};

/// Stream seed as a pure function of its coordinates. `purpose` separates the
/// pilot, hardware and noise streams that share the same coordinates.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t axis,
                          std::uint64_t realization, std::uint64_t trial);

enum StreamPurpose : std::uint64_t { kPilotStream = 1, kHardwareStream = 2, kNoiseStream = 3 };

/// Pilot block and hardware realization r at the given sweep value. The streams
/// do not depend on the sweep value, so every point sees the same underlying draws.
PilotBlock realization_pilots(const ExperimentSpec& spec, const SystemConfig& sys, int r);
ImpairmentRealization realization_hardware(const ExperimentSpec& spec, const SystemConfig& sys,
                                           const ImpairmentConfig& imp, int r);

/// CRB-M2, numeric CRB-M1 and LB per realization, aggregated to mean/min/max.
SweepResult run_bounds_sweep(const ExperimentSpec& spec);

/// MMLE (and MLE-M1) RMSE of the position over `trials` noisy M1 observations;
/// trial t uses hardware realization t mod R. Non-converged trials are excluded
/// and listed in the diagnostics.
SweepResult run_estimator_trials(const ExperimentSpec& spec);

/// Stable order: sweep value, then metric, then mean/min/max.
void sort_rows(std::vector<ResultRow>& rows);

/// Header `sweep_value,metric,statistic,value,units,realizations,trials` and rows.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

/// Worker count: HWI_LOC_THREADS when set (>= 1), else the hardware concurrency.
int worker_count();

/// Calls task(i) for i in [0, count) on up to worker_count() threads. The first
/// exception thrown by a task is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& task);

}  // namespace hwiloc
