#include "hwiloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace hwiloc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Triple {
  double aeb = 0.0;  // deg
  double deb = 0.0;  // m
  double peb = 0.0;  // m
};

Triple to_report_units(double aeb_rad, double deb_s, double peb_m) {
  return {rad2deg(aeb_rad), deb_s * kSpeedOfLight, peb_m};
}

struct PointBounds {
  std::optional<Triple> crb_m2, crb_m1, lb;
  std::vector<std::string> notes;
};

std::string point_label(const ExperimentSpec& spec, double value, int r) {
  std::ostringstream out;
  out << axis_name(spec.axis) << "=" << format_double(value) << " realization " << r;
  return out.str();
}

void emit_stats(std::vector<ResultRow>& rows, double sweep_value, const std::string& metric,
                const std::string& units, const std::vector<double>& samples, int trials) {
  if (samples.empty()) return;
  double sum = 0.0;
  for (double v : samples) sum += v;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  rows.push_back({sweep_value, metric, "mean", sum / n, units, n, trials});
  rows.push_back({sweep_value, metric, "min", *lo, units, n, trials});
  rows.push_back({sweep_value, metric, "max", *hi, units, n, trials});
}

void emit_bound(std::vector<ResultRow>& rows, const OutputSet& out, double sweep_value,
                const std::string& name, const std::vector<Triple>& samples) {
  auto pick = [&](double Triple::*field) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.*field);
    return v;
  };
  if (out.aeb) emit_stats(rows, sweep_value, name + "-AEB", "deg", pick(&Triple::aeb), 0);
  if (out.deb) emit_stats(rows, sweep_value, name + "-DEB", "m", pick(&Triple::deb), 0);
  if (out.peb) emit_stats(rows, sweep_value, name + "-PEB", "m", pick(&Triple::peb), 0);
}

int statistic_rank(const std::string& s) {
  if (s == "mean") return 0;
  if (s == "min") return 1;
  if (s == "max") return 2;
  return 3;
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
  system.validate();
  impairments.validate(system.antennas);
  estimator.validate();
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (values.empty()) throw ConfigError("sweep list must be non-empty");
  if (!(position.norm() > 0.0)) throw ConfigError("UE position must differ from the array origin");
  if (!(fd_step > 0.0)) throw ConfigError("fd_step must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    switch (axis) {
      case SweepAxis::TxPower: break;
      case SweepAxis::Pa:
        if (v != 0.0 && v != 1.0) throw ConfigError("pa sweep values must be 0 or 1");
        break;
      default:
        if (v < 0.0) throw ConfigError("impairment sweep values must be >= 0");
    }
  }
}

bool ExperimentSpec::resample_pilots() const {
  if (pilots == PilotPolicy::Auto) return axis == SweepAxis::Pa;
  return pilots == PilotPolicy::Resample;
}

SystemConfig ExperimentSpec::system_at(double value) const {
  SystemConfig s = system;
  if (axis == SweepAxis::TxPower) s.tx_power_dbm = value;
  return s;
}

ImpairmentConfig ExperimentSpec::impairments_at(double value) const {
  ImpairmentConfig c = impairments;
  switch (axis) {
    case SweepAxis::TxPower: break;
    case SweepAxis::SigmaPn: c.sigma_pn = deg2rad(value); break;
    case SweepAxis::SigmaCfo: c.sigma_cfo = value; break;
    case SweepAxis::SigmaMc: c.sigma_mc = value; break;
    case SweepAxis::Pa:
      if (value == 0.0) {
        c.pa_coeffs = {1.0};
        c.x_clip = std::numeric_limits<double>::infinity();
      }
      break;
  }
  return c;
}

ChannelParams ExperimentSpec::truth(const SystemConfig& sys) const {
  return state_to_params(ue_from_position(position, sys.wavelength(), gain_phase));
}

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::TxPower: return "tx_power_dbm";
    case SweepAxis::SigmaPn: return "sigma_pn_deg";
    case SweepAxis::SigmaCfo: return "sigma_cfo";
    case SweepAxis::SigmaMc: return "sigma_mc";
    case SweepAxis::Pa: return "pa";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::TxPower, SweepAxis::SigmaPn, SweepAxis::SigmaCfo,
                      SweepAxis::SigmaMc, SweepAxis::Pa})
    if (name == axis_name(a)) return a;
  if (name == "tx_power") return SweepAxis::TxPower;
  if (name == "sigma_pn") return SweepAxis::SigmaPn;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

std::vector<double> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::TxPower: return {-10.0, 0.0, 10.0, 20.0, 30.0, 40.0};
    case SweepAxis::SigmaPn: return {1.0, 10.0, 20.0, 30.0};
    case SweepAxis::SigmaCfo: return {0.001, 0.005, 0.01, 0.02};
    case SweepAxis::SigmaMc: return {0.005, 0.01, 0.02, 0.05};
    case SweepAxis::Pa: return {0.0, 1.0};
  }
  return {};
}

ExperimentSpec desk_profile() {
  ExperimentSpec spec;
  spec.system.transmissions = 5;
  spec.system.subcarriers = 32;
  return spec;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t axis,
                          std::uint64_t realization, std::uint64_t trial) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t part : {purpose, axis, realization, trial}) h = splitmix64(h ^ part);
  return h;
}

PilotBlock realization_pilots(const ExperimentSpec& spec, const SystemConfig& sys, int r) {
  PilotBlock block = make_pilot_block(sys);
  if (spec.resample_pilots()) {
    std::mt19937_64 rng(derive_seed(spec.seed, kPilotStream, static_cast<std::uint64_t>(spec.axis),
                                    static_cast<std::uint64_t>(r), 0));
    block.symbols = generate_pilots(sys, rng);
  }
  return block;
}

ImpairmentRealization realization_hardware(const ExperimentSpec& spec, const SystemConfig& sys,
                                           const ImpairmentConfig& imp, int r) {
  std::mt19937_64 rng(derive_seed(spec.seed, kHardwareStream,
                                  static_cast<std::uint64_t>(spec.axis),
                                  static_cast<std::uint64_t>(r), 0));
  return sample_realization(imp, {sys.antennas, sys.transmissions, sys.subcarriers}, rng);
}

// ---------------------------------------------------------------------------

SweepResult run_bounds_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const int points = static_cast<int>(spec.values.size());
  const int reals = spec.realizations;
  std::vector<PointBounds> cells(static_cast<std::size_t>(points * reals));

  parallel_for(points * reals, [&](int task) {
    const int i = task / reals;
    const int r = task % reals;
    PointBounds& cell = cells[static_cast<std::size_t>(task)];
    const double value = spec.values[static_cast<std::size_t>(i)];
    const std::string where = point_label(spec, value, r);
    try {
      const SystemConfig sys = spec.system_at(value);
      const ImpairmentConfig imp = spec.impairments_at(value);
      const ChannelParams truth = spec.truth(sys);
      const double sn = noise_std(sys);
      const PilotBlock pilots = realization_pilots(spec, sys, r);
      const MismatchedModel mm(sys, pilots, imp);

      if (spec.outputs.crb_m2) {
        try {
          const BoundsReport b = crb_m2(truth, mm, sn);
          cell.crb_m2 = to_report_units(b.scalar.aeb, b.scalar.deb, b.scalar.peb);
        } catch (const std::exception& e) {
          cell.notes.push_back(where + ": CRB-M2: " + e.what());
        }
      }
      if (!spec.outputs.crb_m1 && !spec.outputs.lb) return;

      const ImpairedModel tm(sys, pilots, imp, realization_hardware(spec, sys, imp, r));
      if (spec.outputs.crb_m1) {
        try {
          const BoundsReport b = crb_m1_numeric(truth, tm, sn, spec.fd_step, imp.x_clip);
          cell.crb_m1 = to_report_units(b.scalar.aeb, b.scalar.deb, b.scalar.peb);
          for (const auto& w : b.warnings) cell.notes.push_back(where + ": CRB-M1 warning: " + w);
        } catch (const std::exception& e) {
          cell.notes.push_back(where + ": CRB-M1: " + e.what());
        }
      }
      if (spec.outputs.lb) {
        try {
          const MismatchReport m = mismatch_bounds(truth, tm, mm, sn);
          cell.lb = to_report_units(m.lb_aeb, m.lb_deb, m.lb_peb);
        } catch (const std::exception& e) {
          cell.notes.push_back(where + ": LB: " + e.what());
        }
      }
    } catch (const std::exception& e) {
      cell.notes.push_back(where + ": " + e.what());
    }
  });

  SweepResult result;
  for (int i = 0; i < points; ++i) {
    const double value = spec.values[static_cast<std::size_t>(i)];
    std::vector<Triple> m2, m1, lb;
    for (int r = 0; r < reals; ++r) {
      const PointBounds& cell = cells[static_cast<std::size_t>(i * reals + r)];
      if (cell.crb_m2) m2.push_back(*cell.crb_m2);
      if (cell.crb_m1) m1.push_back(*cell.crb_m1);
      if (cell.lb) lb.push_back(*cell.lb);
      result.diagnostics.insert(result.diagnostics.end(), cell.notes.begin(), cell.notes.end());
    }
    if (spec.outputs.crb_m2) emit_bound(result.rows, spec.outputs, value, "CRB-M2", m2);
    if (spec.outputs.crb_m1) emit_bound(result.rows, spec.outputs, value, "CRB-M1", m1);
    if (spec.outputs.lb) emit_bound(result.rows, spec.outputs, value, "LB", lb);
  }
  sort_rows(result.rows);
  return result;
}

SweepResult run_estimator_trials(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult result;
  if (!spec.outputs.mmle_rmse && !spec.outputs.mle_rmse) return result;
  const int reals = spec.realizations;
  const int trials = spec.trials;
  const auto axis = static_cast<std::uint64_t>(spec.axis);

  for (double value : spec.values) {
    const SystemConfig sys = spec.system_at(value);
    const ImpairmentConfig imp = spec.impairments_at(value);
    const ChannelParams truth = spec.truth(sys);
    const Vec2 p_true = spec.position;
    const double sn = noise_std(sys);
    const double unamb = sys.unambiguous_range();

    // Models per realization, built once and shared read-only across trials.
    std::vector<PilotBlock> pilots;
    std::vector<ImpairedModel> truths;
    std::vector<MismatchedModel> assumed;
    pilots.reserve(reals);
    truths.reserve(reals);
    assumed.reserve(reals);
    for (int r = 0; r < reals; ++r) {
      pilots.push_back(realization_pilots(spec, sys, r));
      truths.emplace_back(sys, pilots.back(), imp, realization_hardware(spec, sys, imp, r));
      assumed.emplace_back(sys, pilots.back(), imp);
    }

    struct Outcome {
      std::optional<double> mmle, mle;  // squared position error
      std::string note;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int t) {
      const int r = t % reals;
      Outcome& o = outcomes[static_cast<std::size_t>(t)];
      std::ostringstream where;
      where << point_label(spec, value, r) << " trial " << t;
      try {
        std::mt19937_64 rng(derive_seed(spec.seed, kNoiseStream, axis,
                                        static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(t)));
        const CVec y = observe(truths[static_cast<std::size_t>(r)].mu(truth), sn, rng).y;
        auto run = [&](const SignalModel& model, const char* name, std::optional<double>& slot) {
          try {
            const Estimate e = estimate_position(y, model, spec.estimator, unamb);
            if (e.converged)
              slot = (e.position - p_true).squaredNorm();
            else
              o.note += where.str() + ": " + name + " did not converge; excluded\n";
          } catch (const std::exception& ex) {
            o.note += where.str() + ": " + name + ": " + ex.what() + "; excluded\n";
          }
        };
        if (spec.outputs.mmle_rmse) run(assumed[static_cast<std::size_t>(r)], "MMLE", o.mmle);
        if (spec.outputs.mle_rmse) run(truths[static_cast<std::size_t>(r)], "MLE-M1", o.mle);
      } catch (const std::exception& ex) {
        o.note += where.str() + ": " + ex.what() + "\n";
      }
    });

    auto emit = [&](const char* metric, std::optional<double> Outcome::*field) {
      double sum = 0.0;
      int used = 0;
      for (const auto& o : outcomes)
        if (o.*field) {
          sum += *(o.*field);
          ++used;
        }
      if (used == 0) {
        result.diagnostics.push_back(point_label(spec, value, 0) + ": " + metric +
                                     ": no converged trials");
        return;
      }
      // RMSE over the included trials; `trials` records how many were used
      result.rows.push_back({value, metric, "mean", std::sqrt(sum / used), "m", reals, used});
    };
    if (spec.outputs.mmle_rmse) emit("MMLE-RMSE", &Outcome::mmle);
    if (spec.outputs.mle_rmse) emit("MLE-RMSE", &Outcome::mle);
    for (const auto& o : outcomes) {
      std::istringstream lines(o.note);
      for (std::string line; std::getline(lines, line);)
        if (!line.empty()) result.diagnostics.push_back(line);
    }
  }
  sort_rows(result.rows);
  return result;
}

// ---------------------------------------------------------------------------

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.metric != b.metric) return a.metric < b.metric;
    return statistic_rank(a.statistic) < statistic_rank(b.statistic);
  });
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "sweep_value,metric,statistic,value,units,realizations,trials\n";
  for (const auto& r : rows)
    out << format_double(r.sweep_value) << ',' << r.metric << ',' << r.statistic << ','
        << format_double(r.value) << ',' << r.units << ',' << r.realizations << ',' << r.trials
        << '\n';
}

int worker_count() {
  if (const char* env = std::getenv("HWI_LOC_THREADS")) {
    int n = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& task) {
  if (count <= 0) return;
  const int workers = std::min(worker_count(), count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hwiloc
