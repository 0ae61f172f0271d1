#include "hwiloc/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hwiloc {

namespace {

std::vector<double> inclusive_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

double evaluate(const CVec& y, const SignalModel& model, const Vec2& p) {
  return projection_objective(y, model.eta(std::atan2(p.y(), p.x()), p.norm() / kSpeedOfLight));
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(angle_step > 0.0) || !(range_step > 0.0)) throw ConfigError("grid steps must be positive");
  if (!(angle_max >= angle_min) || !(range_max >= range_min))
    throw ConfigError("grid ranges must be non-empty");
  if (!(range_min > 0.0)) throw ConfigError("grid ranges must be positive");
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) throw ConfigError("armijo_slope must be in (0,1)");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw ConfigError("step_shrink must be in (0,1)");
  if (!(initial_step > 0.0) || !(fd_step > 0.0) || !(gradient_tolerance >= 0.0))
    throw ConfigError("refinement steps and tolerance must be positive");
}

std::vector<double> EstimatorConfig::angle_grid() const {
  return inclusive_grid(angle_min, angle_max, angle_step);
}

std::vector<double> EstimatorConfig::range_grid(double unambiguous_range) const {
  std::vector<double> grid = inclusive_grid(range_min, range_max, range_step);
  if (unambiguous_range > 0.0) {
    // a range of exactly c / df aliases onto zero, so the interval is half-open
    while (grid.size() > 1 && grid.back() >= unambiguous_range) grid.pop_back();
  }
  return grid;
}

double projection_objective(const CVec& y, const CVec& eta) {
  const double energy = eta.squaredNorm();
  if (!(energy > 0.0)) throw DomainError("projection_objective: zero model vector");
  const cd coef = eta.dot(y) / energy;  // Eigen's dot conjugates the left operand
  return (y - coef * eta).squaredNorm();
}

cd plug_in_gain(const CVec& y, const CVec& eta) {
  const double energy = eta.squaredNorm();
  if (!(energy > 0.0)) throw DomainError("plug_in_gain: zero model vector");
  return eta.dot(y) / energy;
}

GridPoint grid_search(const CVec& y, const SignalModel& model, const EstimatorConfig& cfg,
                      double unambiguous_range) {
  cfg.validate();
  const auto angles = cfg.angle_grid();
  const auto ranges = cfg.range_grid(unambiguous_range);
  GridPoint best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const double value = projection_objective(y, model.eta(angles[i], ranges[r] / kSpeedOfLight));
      // strict '<' keeps the first index on ties
      if (value < best.objective) {
        best.objective = value;
        best.aoa = angles[i];
        best.range = ranges[r];
        best.aoa_index = static_cast<int>(i);
        best.range_index = static_cast<int>(r);
      }
    }
  best.position = best.range * Vec2(std::cos(best.aoa), std::sin(best.aoa));
  return best;
}

Estimate refine(const CVec& y, const SignalModel& model, const Vec2& start,
                const EstimatorConfig& cfg) {
  cfg.validate();
  const double scale = y.squaredNorm();
  if (!(scale > 0.0)) throw DomainError("refine: zero observation");

  auto objective = [&](const Vec2& p) {
    const double v = evaluate(y, model, p) / scale;
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "refine: non-finite objective at p = (" << p.x() << ", " << p.y() << ")";
      throw NumericError(msg.str());
    }
    return v;
  };
  auto gradient = [&](const Vec2& p) {
    const double h = cfg.fd_step * std::max(p.norm(), 1e-3);
    Vec2 g;
    for (int i = 0; i < 2; ++i) {
      Vec2 up = p, down = p;
      up[i] += h;
      down[i] -= h;
      g[i] = (objective(up) - objective(down)) / (2.0 * h);
    }
    return g;
  };

  Estimate est;
  est.initial_position = start;
  Vec2 p = start;
  double f = objective(p);
  est.initial_objective = f * scale;
  est.objective_trace.push_back(f);
  Vec2 g = gradient(p);
  Vec2 prev_p = p, prev_g = g;
  double trial = cfg.initial_step;
  const double min_step = 1e-14 * std::max(p.norm(), 1.0);

  est.reason = StopReason::MaxIterations;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    const double gnorm = g.norm();
    if (gnorm < cfg.gradient_tolerance) {
      est.reason = StopReason::GradientTolerance;
      break;
    }
    if (it > 0) {
      // Barzilai-Borwein length as the first trial, capped by the initial step
      const Vec2 s = p - prev_p;
      const double curvature = s.dot(g - prev_g);
      trial = curvature > 0.0 ? std::min(cfg.initial_step, s.squaredNorm() / curvature * gnorm)
                              : cfg.initial_step;
    }
    const Vec2 dir = -g / gnorm;
    double t = trial;
    bool accepted = false;
    double f_new = f;
    Vec2 p_new = p;
    while (t >= min_step) {
      p_new = p + t * dir;
      f_new = objective(p_new);
      if (f_new <= f - cfg.armijo_slope * t * gnorm) {
        accepted = true;
        break;
      }
      t *= cfg.step_shrink;
    }
    if (!accepted) {
      est.reason = StopReason::LineSearchStall;
      break;
    }
    prev_p = p;
    prev_g = g;
    p = p_new;
    f = f_new;
    g = gradient(p);
    est.objective_trace.push_back(f);
  }
  if (it == cfg.max_iterations && g.norm() < cfg.gradient_tolerance)
    est.reason = StopReason::GradientTolerance;

  est.position = p;
  est.iterations = it;
  est.converged = est.reason != StopReason::MaxIterations;
  const CVec eta = model.eta(std::atan2(p.y(), p.x()), p.norm() / kSpeedOfLight);
  est.gain = plug_in_gain(y, eta);
  est.objective = projection_objective(y, eta);
  return est;
}

Estimate estimate_position(const CVec& y, const SignalModel& model, const EstimatorConfig& cfg,
                           double unambiguous_range) {
  const GridPoint start = grid_search(y, model, cfg, unambiguous_range);
  return refine(y, model, start.position, cfg);
}

Estimate mle_m1(const CVec& y, const SystemConfig& sys, const PilotBlock& pilots,
                const ImpairmentConfig& imp, const ImpairmentRealization& realization,
                const EstimatorConfig& cfg) {
  const ImpairedModel model(sys, pilots, imp, realization);
  return estimate_position(y, model, cfg, sys.unambiguous_range());
}

Estimate mmle_m2(const CVec& y, const SystemConfig& sys, const PilotBlock& pilots,
                 const ImpairmentConfig& imp, const EstimatorConfig& cfg) {
  const MismatchedModel model(sys, pilots, imp);
  return estimate_position(y, model, cfg, sys.unambiguous_range());
}

}  // namespace hwiloc
