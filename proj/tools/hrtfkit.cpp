// hrtfkit: command-line front end.
//
// Exit codes: 0 success, 1 usage error (bad flags or out-of-range
// parameters), 2 data or validation failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hrtfkit/electroacoustics.hpp"
#include "hrtfkit/error.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"
#include "hrtfkit/localization_cues.hpp"
#include "hrtfkit/run_config.hpp"
#include "hrtfkit/synth_oracle.hpp"
#include "hrtfkit/verify.hpp"

namespace fs = std::filesystem;
using namespace hrtfkit;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string args_string(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
  return s;
}

void write_gnuplot(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << body;
}

// ---- fit-tsp -------------------------------------------------------------

struct FitArgs {
  std::string free_path;
  std::string mass_path;
  double delta_mass_g = 1.0;
  double s_d = 0.002827;
  std::string out;
  bool magnitude_only = false;
};

int run_fit(const FitArgs& a, const RunConfig& cfg, const std::string& argline) {
  const auto free_curve = electro::read_impedance_csv(a.free_path, a.magnitude_only);
  const auto mass_curve = electro::read_impedance_csv(a.mass_path, a.magnitude_only);
  electro::AirProperties air{cfg.air_density, cfg.speed_of_sound};
  const auto fit = electro::fit_tsp_delta_mass(free_curve, mass_curve, a.delta_mass_g * 1e-3, a.s_d, air);

  const auto ref = electro::reference_driver();
  struct Row {
    const char* name;
    double fitted;
    double reference;
    double scale;
    const char* unit;
  };
  const auto& p = fit.params;
  const Row rows[] = {
      {"R_evc", p.r_evc, ref.r_evc, 1.0, "ohm"},  {"F_0", p.f0, ref.f0, 1.0, "Hz"},
      {"M_ms", p.m_ms, ref.m_ms, 1e3, "g"},       {"M_md", p.m_md, ref.m_md, 1e3, "g"},
      {"C_ms", p.c_ms, ref.c_ms, 1e3, "mm/N"},    {"BL", p.bl, ref.bl, 1.0, "T*m"},
      {"Q_ms", p.q_ms, ref.q_ms, 1.0, ""},        {"Q_es", p.q_es, ref.q_es, 1.0, ""},
      {"Q_ts", p.q_ts, ref.q_ts, 1.0, ""},        {"V_as", p.v_as, ref.v_as, 1e3, "l"},
      {"K_rm", p.k_rm, ref.k_rm, 1.0, ""},        {"E_rm", p.e_rm, ref.e_rm, 1.0, ""},
      {"K_xm", p.k_xm, ref.k_xm, 1.0, ""},        {"E_xm", p.e_xm, ref.e_xm, 1.0, ""},
      {"N_0", p.n0, ref.n0, 100.0, "%"},          {"SPL_0", p.spl0, ref.spl0, 1.0, "dB"},
  };
  const fs::path out_path(a.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  electro::write_tsp_file(a.out, p);

  std::ostringstream report;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %14s %14s %9s  %s\n", "param", "fitted", "reference", "dev %",
                "unit");
  report << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-6s %14.6g %14.6g %+9.3f  %s\n", r.name, r.fitted * r.scale,
                  r.reference * r.scale, 100.0 * (r.fitted - r.reference) / r.reference, r.unit);
    report << buf;
  }
  std::snprintf(buf, sizeof buf,
                "peaks: free %.3f Hz, mass-loaded %.3f Hz; rms misfit free %.3e, mass %.3e; %d iterations\n",
                fit.resonance_free_hz, fit.resonance_mass_hz, fit.rms_residual_free, fit.rms_residual_mass,
                fit.iterations);
  report << buf;
  std::cout << report.str();

  const std::string dir = out_path.has_parent_path() ? out_path.parent_path().string() : ".";
  std::ofstream(join_path(dir, out_path.stem().string() + "_report.txt")) << report.str();
  write_run_config(join_path(dir, "run_config.txt"), cfg, {{"command", "fit-tsp"}, {"args", argline}});
  return 0;
}

// ---- impedance -----------------------------------------------------------

struct ImpedanceArgs {
  std::string tsp;
  double delta_mass_g = 1.0;
  std::string out;
  bool magnitude_only = false;
};

int run_impedance(const ImpedanceArgs& a, const RunConfig& cfg, const std::string& argline) {
  const auto tsp = a.tsp.empty() ? electro::reference_driver() : electro::read_tsp_file(a.tsp);
  const auto f = electro::log_frequency_grid();
  fs::create_directories(a.out);
  electro::write_impedance_csv(join_path(a.out, "impedance_free.csv"),
                               electro::make_impedance_curve(tsp, f, 0.0, a.magnitude_only));
  electro::write_impedance_csv(join_path(a.out, "impedance_mass.csv"),
                               electro::make_impedance_curve(tsp, f, a.delta_mass_g * 1e-3, a.magnitude_only));
  write_run_config(join_path(a.out, "run_config.txt"), cfg, {{"command", "impedance"}, {"args", argline}});
  std::cout << "wrote impedance_free.csv and impedance_mass.csv (" << f.size() << " points) to " << a.out
            << "\n";
  return 0;
}

// ---- simulate-speaker ----------------------------------------------------

struct SimArgs {
  std::string tsp;
  double vbox_cc = 800.0;
  double veg = 2.828;
  double r = 1.0;
  std::string out;
  bool plots = false;
};

int run_simulate(const SimArgs& a, const RunConfig& cfg, const std::string& argline) {
  const auto tsp = a.tsp.empty() ? electro::reference_driver() : electro::read_tsp_file(a.tsp);
  electro::SealedModuleConfig mc{a.vbox_cc * 1e-6, a.veg, a.r};
  electro::AirProperties air{cfg.air_density, cfg.speed_of_sound};
  const auto resp = electro::simulate_sealed_module(tsp, mc, electro::log_frequency_grid(), air);
  const auto s = electro::summarize(resp);
  fs::create_directories(a.out);
  electro::write_response_csv(join_path(a.out, "response.csv"), resp);
  std::ostringstream summary;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "rolloff_6db_hz=%.2f\npeak_excursion_mm=%.4f\npeak_excursion_hz=%.2f\n"
                "peak_volume_velocity_m3s=%.6f\npeak_volume_velocity_hz=%.2f\n",
                s.rolloff_hz, s.peak_excursion_m * 1e3, s.peak_excursion_hz, s.peak_velocity_m3s,
                s.peak_velocity_hz);
  summary << buf;
  std::cout << summary.str();
  std::ofstream(join_path(a.out, "summary.txt")) << summary.str();
  if (a.plots) {
    write_gnuplot(join_path(a.out, "response.gp"),
                  "set datafile separator ','\nset logscale x\nset multiplot layout 3,1\n"
                  "plot 'response.csv' skip 1 using 1:2 with lines title 'excursion (mm)'\n"
                  "plot 'response.csv' skip 1 using 1:3 with lines title 'volume velocity (m^3/s)'\n"
                  "plot 'response.csv' skip 1 using 1:4 with lines title 'SPL (dB)'\nunset multiplot\n");
  }
  write_run_config(join_path(a.out, "run_config.txt"), cfg,
                   {{"command", "simulate-speaker"}, {"args", argline}});
  return 0;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  double head_radius = 0.0875;
  std::uint64_t seed = 1;
  bool reflections = false;
  int reflection_offset = 300;
  double reflection_gain = 0.3;
  double notch_hz = 0.0;
  double notch_depth_db = 15.0;
  std::string coloration = "speaker";
  double noise = 0.0;
};

int run_synth(const SynthArgs& a, const RunConfig& cfg, const std::string& argline) {
  synth::SynthOptions opt;
  opt.model.head_radius = a.head_radius;
  opt.model.speed_of_sound = cfg.speed_of_sound;
  opt.model.sample_rate = cfg.sample_rate;
  opt.seed = a.seed;
  opt.noise_rms = a.noise;
  if (a.reflections) opt.reflection = synth::ReflectionSpec{a.reflection_offset, a.reflection_gain};
  if (a.notch_hz > 0.0) opt.notch = synth::NotchSpec{a.notch_hz, a.notch_depth_db};
  const auto col = a.coloration == "flat" ? synth::SpeakerColoration::flat()
                                          : synth::SpeakerColoration::sealed_module(cfg.sample_rate);
  const auto set = synth::synth_set(opt, col);
  write_raw_set(a.out, set);
  synth::write_truth_csv(join_path(a.out, "truth.csv"), synth::truth_table(opt));
  write_run_config(join_path(a.out, "run_config.txt"), cfg, {{"command", "synth"}, {"args", argline}});
  std::cout << "wrote " << set.bir.size() << " BIR files, " << set.oir.size()
            << " OIR files and truth.csv to " << a.out << "\n";
  return 0;
}

// ---- derive --------------------------------------------------------------

struct DeriveArgs {
  std::string in;
  std::string out;
  std::string subject = "synthetic";
  bool no_compensation = false;
};

int run_derive(const DeriveArgs& a, const RunConfig& cfg, const std::string& argline) {
  BuildConfig bc;
  bc.shift_m = cfg.shift_m;
  bc.head_radius = cfg.head_radius;
  bc.speed_of_sound = cfg.speed_of_sound;
  bc.compensate = !a.no_compensation;
  bc.subject = a.subject;
  bc.pre_peak = static_cast<std::size_t>(cfg.window_pre_peak);
  bc.min_gap = static_cast<std::size_t>(cfg.window_min_gap);
  // Validate the shift before touching any input.
  if (bc.compensate) validate_shift(bc.shift_m, bc.head_radius, bc.speed_of_sound, cfg.sample_rate);
  const auto set = read_raw_set(a.in);
  const auto db = build_database(set, bc);
  write_database(a.out, db);
  write_run_config(join_path(a.out, "run_config.txt"), cfg, {{"command", "derive"}, {"args", argline}});
  std::cout << "wrote " << db.hrir.size() << " HRIR files to " << a.out << " (window start "
            << db.meta.window_start << (db.meta.window_clamped ? ", clamped" : "") << ", shift "
            << db.meta.shift_m << ", flagged bins " << db.meta.flagged_bins << ")\n";
  return 0;
}

// ---- cues ----------------------------------------------------------------

struct CueArgs {
  std::string kind;
  std::string db;
  std::string out;
  bool no_compensation_check = false;
  bool all_directions = false;
  std::string ear = "right";
  std::vector<double> freqs;
  bool plots = false;
};

void require_causal(const HrirDatabase& db) {
  if (!db.meta.compensated) {
    throw DataError("database was built without non-causality compensation; "
                    "pass --no-compensation-check to analyse it anyway");
  }
  for (const auto& [d, pair] : db.hrir) {
    if (peak_index(pair.left) >= kHrirLength / 2 || peak_index(pair.right) >= kHrirLength / 2) {
      throw DataError("HRIR at " + to_string(d) +
                      " peaks in the second half of the buffer (non-causal); "
                      "pass --no-compensation-check to analyse it anyway");
    }
  }
}

int run_cues(const CueArgs& a, const RunConfig& cfg, const std::string& argline) {
  const auto db = read_database(a.db);
  if (!a.no_compensation_check) require_causal(db);
  fs::create_directories(a.out);
  if (a.kind == "itd") {
    const auto itd = cues::itd_map(db);
    cues::write_itd_csv(join_path(a.out, "itd.csv"), itd);
    double max_abs = 0.0;
    for (const auto& kv : itd.values) max_abs = std::max(max_abs, std::abs(kv.second));
    std::cout << "itd.csv: " << itd.values.size() << " directions, max |ITD| " << max_abs * 1e6 << " us\n";
    if (a.plots) {
      write_gnuplot(join_path(a.out, "itd.gp"),
                    "set datafile separator ','\nset view map\nset xlabel 'azimuth column'\n"
                    "set ylabel 'elevation row'\nplot 'itd.csv' matrix rowheaders columnheaders with image\n");
    }
  } else if (a.kind == "ild") {
    cues::write_direction_table_csv(join_path(a.out, "ild_wide.csv"), cues::ild_wideband_map(db));
    std::size_t narrow = 0;
    for (const auto& [d, pair] : db.hrir) {
      if (!a.all_directions && d.elevation_deg != 0) continue;
      char name[64];
      std::snprintf(name, sizeof name, "ild_narr_%d_%d.csv", d.azimuth_deg, d.elevation_deg);
      cues::write_ild_narrow_csv(join_path(a.out, name), cues::ild_narrowband(pair.left, pair.right));
      ++narrow;
    }
    std::cout << "ild_wide.csv plus " << narrow << " narrowband files\n";
    if (a.plots) {
      write_gnuplot(join_path(a.out, "ild.gp"),
                    "set datafile separator ','\nset logscale x\n"
                    "plot for [az in '-90 -45 0 45 90'] 'ild_narr_'.az.'_0.csv' skip 1 using 1:2 "
                    "with lines title az\n");
    }
  } else if (a.kind == "sc") {
    cues::FeatureSearch fsearch;
    fsearch.f_lo = cfg.sc_f_lo;
    fsearch.f_hi = cfg.sc_f_hi;
    fsearch.smoothing_bins = cfg.sc_smoothing_bins;
    fsearch.neighborhood_bins = cfg.sc_neighborhood_bins;
    fsearch.min_prominence_db = cfg.sc_min_prominence_db;
    const Ear ear = a.ear == "left" ? Ear::Left : Ear::Right;
    const auto entries = cues::median_plane_features(db, ear, fsearch);
    cues::write_sc_csv(join_path(a.out, "sc_median.csv"), entries);
    std::cout << "sc_median.csv: " << entries.size() << " median-plane entries\n";
    if (a.plots) {
      write_gnuplot(join_path(a.out, "sc.gp"),
                    "set datafile separator ','\nset xlabel 'extended elevation (deg)'\n"
                    "set ylabel 'frequency (Hz)'\n"
                    "plot 'sc_median.csv' skip 1 using 1:(strcol(2) eq 'peak' ? $3 : 1/0) title 'peaks', \\\n"
                    "     'sc_median.csv' skip 1 using 1:(strcol(2) eq 'notch' ? $3 : 1/0) title 'notches'\n");
    }
  } else if (a.kind == "hpd") {
    const auto freqs = a.freqs.empty() ? cues::default_hpd_frequencies() : a.freqs;
    std::size_t files = 0;
    for (Ear ear : {Ear::Left, Ear::Right}) files += cues::write_hpd_csvs(a.out, cues::hpd(db, ear, freqs)).size();
    std::cout << files << " HPD files\n";
    if (a.plots) {
      write_gnuplot(join_path(a.out, "hpd.gp"),
                    "set datafile separator ','\nset polar\nset angles degrees\n"
                    "plot for [f in '750 1500 3000 6000 12000'] 'hpd_right_'.f.'.csv' skip 1 "
                    "using 1:($2+30) with lines title f.' Hz'\n");
    }
  }
  write_run_config(join_path(a.out, "run_config.txt"), cfg, {{"command", "cues " + a.kind}, {"args", argline}});
  return 0;
}

// ---- verify --------------------------------------------------------------

int run_verify(const std::string& db_dir, const std::string& truth_path) {
  const auto db = read_database(db_dir);
  std::optional<std::vector<synth::TruthRow>> truth;
  if (!truth_path.empty() && fs::exists(truth_path)) {
    truth = synth::read_truth_csv(truth_path);
  } else {
    std::cout << "note: " << (truth_path.empty() ? "no truth file given" : "truth file " + truth_path + " not found")
              << "; running truth-independent checks only\n";
  }
  const auto report = verify_database(db, truth);
  print_report(std::cout, report);
  return report.passed() ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hrtfkit: HRIR database post-processing, binaural cues and speaker-module simulation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 std::string("key=value run configuration (default: $") + kConfigEnvVar + ")");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-tsp", "Identify Thiele-Small parameters by the delta-mass method");
  fit_cmd->add_option("--free", fit.free_path, "free-air impedance CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--mass", fit.mass_path, "mass-loaded impedance CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--delta-mass", fit.delta_mass_g, "added mass in grams")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--sd", fit.s_d, "diaphragm area in m^2")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit.out, "output TSP file")->required();
  fit_cmd->add_flag("--magnitude-only", fit.magnitude_only, "fit |Z| only, even if phase is present");

  ImpedanceArgs imp;
  auto* imp_cmd = app.add_subcommand("impedance", "Write synthetic free-air and mass-loaded impedance curves");
  imp_cmd->add_option("--tsp", imp.tsp, "TSP file (default: reference driver)")->check(CLI::ExistingFile);
  imp_cmd->add_option("--delta-mass", imp.delta_mass_g, "added mass in grams")->check(CLI::PositiveNumber);
  imp_cmd->add_option("--out", imp.out, "output directory")->required();
  imp_cmd->add_flag("--magnitude-only", imp.magnitude_only, "write |Z| only");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-speaker", "Simulate the sealed speaker module response");
  sim_cmd->add_option("--tsp", sim.tsp, "TSP file (default: reference driver)")->check(CLI::ExistingFile);
  sim_cmd->add_option("--vbox", sim.vbox_cc, "box volume in cc")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--veg", sim.veg, "drive voltage, V rms")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--r", sim.r, "microphone distance, m")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  sim_cmd->add_flag("--plots", sim.plots, "also write a gnuplot script");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic raw measurement set with ground truth");
  syn_cmd->add_option("--out", syn.out, "output directory")->required();
  syn_cmd->add_option("--head-radius", syn.head_radius, "sphere radius, m")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--seed", syn.seed, "noise seed");
  syn_cmd->add_flag("--reflections", syn.reflections, "inject a late floor reflection");
  syn_cmd->add_option("--reflection-offset", syn.reflection_offset, "samples after the direct pulse")
      ->check(CLI::PositiveNumber);
  syn_cmd->add_option("--reflection-gain", syn.reflection_gain, "relative amplitude");
  syn_cmd->add_option("--notch", syn.notch_hz, "inject a pinna notch at this frequency (Hz)")
      ->check(CLI::PositiveNumber);
  syn_cmd->add_option("--notch-depth", syn.notch_depth_db, "notch depth, dB")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--coloration", syn.coloration, "speaker coloration")
      ->check(CLI::IsMember({"speaker", "flat"}));
  syn_cmd->add_option("--noise", syn.noise, "additive noise rms")->check(CLI::NonNegativeNumber);

  DeriveArgs der;
  int shift = 48;
  double head_radius = 0.0875;
  auto* der_cmd = app.add_subcommand("derive", "Build the causal HRIR database from raw measurements");
  der_cmd->add_option("--in", der.in, "raw measurement directory")->required();
  der_cmd->add_option("--out", der.out, "output database directory")->required();
  auto* shift_opt = der_cmd->add_option("--shift", shift, "circular shift m, samples");
  auto* radius_opt = der_cmd->add_option("--head-radius", head_radius, "head radius l, m")
                         ->check(CLI::NonNegativeNumber);
  der_cmd->add_option("--subject", der.subject, "subject id stored in db_meta");
  der_cmd->add_flag("--no-compensation", der.no_compensation, "skip the non-causality shift");

  CueArgs cue;
  auto* cue_cmd = app.add_subcommand("cues", "Compute localisation cues from an HRIR database");
  cue_cmd->add_option("kind", cue.kind, "itd | ild | sc | hpd")->required()
      ->check(CLI::IsMember({"itd", "ild", "sc", "hpd"}));
  cue_cmd->add_option("--db", cue.db, "database directory")->required();
  cue_cmd->add_option("--out", cue.out, "output directory")->required();
  cue_cmd->add_flag("--no-compensation-check", cue.no_compensation_check, "accept non-causal databases");
  cue_cmd->add_flag("--all-directions", cue.all_directions, "ild: narrowband files for every direction");
  cue_cmd->add_option("--ear", cue.ear, "sc: ear to analyse")->check(CLI::IsMember({"left", "right"}));
  cue_cmd->add_option("--freqs", cue.freqs, "hpd: frequencies in Hz");
  cue_cmd->add_flag("--plots", cue.plots, "also write a gnuplot script");

  std::string verify_db;
  std::string verify_truth;
  auto* ver_cmd = app.add_subcommand("verify", "Run the invariant suite on a database");
  ver_cmd->add_option("--db", verify_db, "database directory")->required();
  ver_cmd->add_option("--truth", verify_truth, "truth.csv from synth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? load_default_run_config() : read_run_config(config_path);
    if (shift_opt->count() > 0) cfg.shift_m = shift;
    if (radius_opt->count() > 0) cfg.head_radius = head_radius;
    if (syn_cmd->count("--seed") > 0) cfg.seed = syn.seed;
    else syn.seed = cfg.seed;
    if (syn_cmd->count("--head-radius") == 0) syn.head_radius = cfg.head_radius;
    const std::string argline = args_string(argc, argv);

    if (*fit_cmd) return run_fit(fit, cfg, argline);
    if (*imp_cmd) return run_impedance(imp, cfg, argline);
    if (*sim_cmd) return run_simulate(sim, cfg, argline);
    if (*syn_cmd) return run_synth(syn, cfg, argline);
    if (*der_cmd) return run_derive(der, cfg, argline);
    if (*cue_cmd) return run_cues(cue, cfg, argline);
    if (*ver_cmd) return run_verify(verify_db, verify_truth);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
