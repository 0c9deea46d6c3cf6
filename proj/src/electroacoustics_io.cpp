#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "hrtfkit/electroacoustics.hpp"
#include "hrtfkit/error.hpp"

namespace hrtfkit::electro {
namespace {

struct Field {
  const char* key;
  double ThieleSmallParams::*member;
  const char* unit;
};

constexpr Field kFields[] = {
    {"r_evc", &ThieleSmallParams::r_evc, "ohm"},
    {"f0", &ThieleSmallParams::f0, "Hz"},
    {"s_d", &ThieleSmallParams::s_d, "m^2"},
    {"k_rm", &ThieleSmallParams::k_rm, "ohm / (rad/s)^e_rm"},
    {"e_rm", &ThieleSmallParams::e_rm, ""},
    {"k_xm", &ThieleSmallParams::k_xm, "ohm / (rad/s)^e_xm"},
    {"e_xm", &ThieleSmallParams::e_xm, ""},
    {"v_as", &ThieleSmallParams::v_as, "m^3"},
    {"c_ms", &ThieleSmallParams::c_ms, "m/N"},
    {"m_md", &ThieleSmallParams::m_md, "kg"},
    {"m_ms", &ThieleSmallParams::m_ms, "kg"},
    {"bl", &ThieleSmallParams::bl, "T*m"},
    {"q_ms", &ThieleSmallParams::q_ms, ""},
    {"q_es", &ThieleSmallParams::q_es, ""},
    {"q_ts", &ThieleSmallParams::q_ts, ""},
    {"n0", &ThieleSmallParams::n0, "fraction"},
    {"spl0", &ThieleSmallParams::spl0, "dB SPL"},
    {"r_ms", &ThieleSmallParams::r_ms, "N*s/m"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw DataError(where + ": cannot parse number '" + text + "'");
}

}  // namespace

ImpedanceCurve read_impedance_csv(const std::string& path, bool force_magnitude_only) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open impedance file " + path);
  ImpedanceCurve curve;
  std::string line;
  int columns = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const std::string where = path + ":" + std::to_string(line_no);
    // A header is any first row whose first cell is not numeric.
    if (curve.frequencies.empty() && columns == 0) {
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) {
        columns = -1;
        continue;
      }
    }
    if (cells.size() != 2 && cells.size() != 3) {
      throw DataError(where + ": expected 2 or 3 columns");
    }
    const int n = static_cast<int>(cells.size());
    if (columns > 0 && n != columns) throw DataError(where + ": inconsistent column count");
    columns = n;
    curve.frequencies.push_back(parse_number(cells[0], where));
    if (n == 2) {
      curve.impedance.emplace_back(parse_number(cells[1], where), 0.0);
    } else {
      curve.impedance.emplace_back(parse_number(cells[1], where), parse_number(cells[2], where));
    }
  }
  if (curve.frequencies.empty()) throw DataError("impedance file " + path + " has no data rows");
  curve.magnitude_only = columns == 2 || force_magnitude_only;
  if (curve.magnitude_only) {
    for (auto& z : curve.impedance) z = {std::abs(z), 0.0};
  }
  return curve;
}

void write_impedance_csv(const std::string& path, const ImpedanceCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  char buf[128];
  if (curve.magnitude_only) {
    out << "freq_hz,mag_ohm\n";
  } else {
    out << "freq_hz,re_ohm,im_ohm\n";
  }
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    if (curve.magnitude_only) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", curve.frequencies[i], curve.magnitude(i));
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", curve.frequencies[i],
                    curve.impedance[i].real(), curve.impedance[i].imag());
    }
    out << buf;
  }
}

void write_tsp(std::ostream& out, const ThieleSmallParams& tsp) {
  char buf[160];
  for (const auto& f : kFields) {
    if (f.unit[0] != '\0') {
      std::snprintf(buf, sizeof buf, "%s=%.10g  # %s\n", f.key, tsp.*f.member, f.unit);
    } else {
      std::snprintf(buf, sizeof buf, "%s=%.10g\n", f.key, tsp.*f.member);
    }
    out << buf;
  }
}

void write_tsp_file(const std::string& path, const ThieleSmallParams& tsp) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_tsp(out, tsp);
}

ThieleSmallParams read_tsp(std::istream& in) {
  std::map<std::string, double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "TSP line " + std::to_string(line_no);
    if (eq == std::string::npos) throw DataError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    bool known = false;
    for (const auto& f : kFields) known = known || key == f.key;
    if (!known) throw DataError(where + ": unknown key '" + key + "'");
    values[key] = parse_number(trim(line.substr(eq + 1)), where);
  }
  ThieleSmallParams tsp;
  for (const auto& f : kFields) {
    if (auto it = values.find(f.key); it != values.end()) tsp.*f.member = it->second;
  }
  for (const char* required : {"r_evc", "s_d", "c_ms", "m_ms", "bl"}) {
    if (!values.count(required)) throw DataError(std::string("TSP file lacks ") + required);
  }
  if (!values.count("r_ms")) {
    if (!values.count("q_ms")) throw DataError("TSP file needs r_ms or q_ms");
    const double f0 = values.count("f0") ? tsp.f0
                                          : 1.0 / (2.0 * std::numbers::pi * std::sqrt(tsp.m_ms * tsp.c_ms));
    tsp.r_ms = 2.0 * std::numbers::pi * f0 * tsp.m_ms / tsp.q_ms;
  }
  if (!values.count("m_md")) tsp.m_md = tsp.m_ms - piston_air_load_mass(tsp.s_d);
  validate(tsp);
  return tsp;
}

ThieleSmallParams read_tsp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open TSP file " + path);
  return read_tsp(in);
}

void write_response_csv(const std::string& path, const SealedModuleResponse& resp) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "freq_hz,excursion_mm,volume_velocity_m3s,spl_db\n";
  char buf[160];
  for (std::size_t i = 0; i < resp.frequencies.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", resp.frequencies[i],
                  std::abs(resp.excursion[i]) * 1e3, std::abs(resp.volume_velocity[i]), resp.spl[i]);
    out << buf;
  }
}

}  // namespace hrtfkit::electro
