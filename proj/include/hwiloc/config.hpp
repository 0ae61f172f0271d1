#pragma once

// Flat key=value config files with [sections]. Unset keys keep the defaults
// of ExperimentSpec; unknown sections or keys are errors.
//
//   [system]       antennas, transmissions, subcarriers, cp_length, carrier_hz,
//                  bandwidth_hz, load_ohm, noise_psd_dbm_hz, noise_figure_db,
//                  tx_power_dbm, pilot_seed, combiner_seed
//   [impairments]  sigma_pn_deg, sigma_cfo, sigma_mc, mc_c1..mc_cn,
//                  pa_beta0..pa_betaQ, x_clip (inf allowed)
//   [ue]           x_m, y_m, gain_phase_rad
//   [estimator]    angle_min_deg, angle_max_deg, angle_step_deg, range_min_m,
//                  range_max_m, range_step_m, max_iterations, gradient_tolerance,
//                  armijo_slope, step_shrink, initial_step_m, fd_step
//   [experiment]   sweep, values, realizations, trials, seed, pilots, outputs,
//                  crb_fd_step
//
// Complex numbers are written a+bj, a-bj, bj or a.

#include <iosfwd>
#include <string>

#include "hwiloc/harness.hpp"

namespace hwiloc {

ExperimentSpec parse_config(std::istream& in, ExperimentSpec base = ExperimentSpec{});
ExperimentSpec parse_config_string(const std::string& text,
                                   ExperimentSpec base = ExperimentSpec{});
/// ConfigError if the file cannot be opened or does not parse.
ExperimentSpec load_config(const std::string& path, ExperimentSpec base = ExperimentSpec{});

/// Writes every key; parse_config(render_config(s)) reproduces s.
std::string render_config(const ExperimentSpec& spec);

cd parse_complex(const std::string& text);
std::string format_complex(cd value);

}  // namespace hwiloc
