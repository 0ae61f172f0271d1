#pragma once

// Matched (MLE on M1) and mismatched (MMLE on M2) position estimators:
// concentrated least-squares objective with the complex gain profiled out,
// coarse polar grid search, then gradient descent with Armijo backtracking.

#include <vector>

#include "hwiloc/observation.hpp"

namespace hwiloc {

struct EstimatorConfig {
  double angle_min = -kPi / 2.0;  // rad, inclusive
  double angle_max = kPi / 2.0;
  double angle_step = kPi / 180.0;
  double range_min = 0.5;  // m, inclusive
  double range_max = 30.0;
  double range_step = 0.5;

  int max_iterations = 200;
  double gradient_tolerance = 1e-9;  // on the objective normalized by |y|^2, per meter
  double armijo_slope = 1e-4;
  double step_shrink = 0.5;
  double initial_step = 0.1;  // m
  double fd_step = 1e-6;      // relative to |p|

  void validate() const;
  std::vector<double> angle_grid() const;
  /// Range grid truncated to the first delay-ambiguity interval when one is given.
  std::vector<double> range_grid(double unambiguous_range = 0.0) const;
};

enum class StopReason { GradientTolerance, LineSearchStall, MaxIterations };

struct GridPoint {
  Vec2 position = Vec2::Zero();
  double aoa = 0.0;
  double range = 0.0;
  int aoa_index = 0;
  int range_index = 0;
  double objective = 0.0;
};

struct Estimate {
  Vec2 position = Vec2::Zero();
  cd gain = 0.0;
  double objective = 0.0;  // projection residual |y - P_eta y|^2 at the estimate
  int iterations = 0;
  bool converged = false;
  StopReason reason = StopReason::MaxIterations;
  Vec2 initial_position = Vec2::Zero();
  double initial_objective = 0.0;
  std::vector<double> objective_trace;  // normalized objective at start and after each step
};

/// |y - (eta^H y / |eta|^2) eta|^2; DomainError if eta = 0.
double projection_objective(const CVec& y, const CVec& eta);

/// Least-squares gain eta^H y / |eta|^2; DomainError if eta = 0.
cd plug_in_gain(const CVec& y, const CVec& eta);

/// Lowest objective over the polar grid; ties go to the smallest angle index, then range index.
GridPoint grid_search(const CVec& y, const SignalModel& model, const EstimatorConfig& cfg,
                      double unambiguous_range = 0.0);

/// Gradient descent on p from p0 with central-difference gradients and
/// Armijo backtracking. The objective sequence is monotone non-increasing.
/// NumericError on a non-finite objective.
Estimate refine(const CVec& y, const SignalModel& model, const Vec2& start,
                const EstimatorConfig& cfg);

/// grid_search followed by refine, gain from the plug-in estimate.
Estimate estimate_position(const CVec& y, const SignalModel& model, const EstimatorConfig& cfg,
                           double unambiguous_range = 0.0);

/// MLE with perfect knowledge of the hardware realization that produced y.
Estimate mle_m1(const CVec& y, const SystemConfig& sys, const PilotBlock& pilots,
                const ImpairmentConfig& imp, const ImpairmentRealization& realization,
                const EstimatorConfig& cfg);

/// Mismatched MLE that assumes M2.
Estimate mmle_m2(const CVec& y, const SystemConfig& sys, const PilotBlock& pilots,
                 const ImpairmentConfig& imp, const EstimatorConfig& cfg);

}  // namespace hwiloc
