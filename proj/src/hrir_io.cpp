#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hrtfkit/error.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"

namespace fs = std::filesystem;

namespace hrtfkit {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses `columns` numbers per non-empty line, separated by commas and/or
// whitespace. Returns column-major data.
std::vector<std::vector<double>> parse_table(const std::string& path, std::size_t columns) {
  const std::string text = slurp(path);
  std::vector<std::vector<double>> cols(columns);
  std::size_t line_no = 0;
  const char* p = text.c_str();
  const char* const end = p + text.size();
  while (p < end) {
    const char* eol = p;
    while (eol < end && *eol != '\n') ++eol;
    ++line_no;
    const char* q = p;
    std::size_t got = 0;
    while (true) {
      while (q < eol && (*q == ' ' || *q == '\t' || *q == ',' || *q == '\r')) ++q;
      if (q >= eol) break;
      char* next = nullptr;
      errno = 0;
      const double v = std::strtod(q, &next);
      if (next == q || next > eol || errno == ERANGE) {
        throw DataError(path + ":" + std::to_string(line_no) + ": unparsable number");
      }
      if (got < columns) cols[got].push_back(v);
      ++got;
      q = next;
    }
    if (got != 0 && got != columns) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                      " columns, found " + std::to_string(got));
    }
    p = eol + 1;
  }
  return cols;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

ImpulseResponse as_ir(std::vector<double> v, double sample_rate) {
  ImpulseResponse ir;
  ir.samples = std::move(v);
  ir.sample_rate = sample_rate;
  return ir;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_raw_set(const std::string& dir, const RawMeasurementSet& set) {
  fs::create_directories(dir);
  char buf[96];
  for (const auto& [d, pair] : set.bir) {
    if (pair.left.size() != pair.right.size()) throw PreconditionError("BIR channels differ in length");
    std::string text;
    text.reserve(pair.left.size() * 48);
    for (std::size_t i = 0; i < pair.left.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pair.left[i], pair.right[i]);
      text += buf;
    }
    write_text((fs::path(dir) / bir_filename(d)).string(), text);
  }
  for (const auto& [el, ir] : set.oir) {
    std::string text;
    text.reserve(ir.size() * 24);
    for (double v : ir.samples) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      text += buf;
    }
    write_text((fs::path(dir) / oir_filename(el)).string(), text);
  }
}

RawMeasurementSet read_raw_set(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("raw measurement directory not found: " + dir);
  RawMeasurementSet set;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    if (name.rfind("bir_", 0) == 0 && path.extension() == ".csv") {
      const auto d = parse_direction_tag(name);
      if (!d) throw DataError("cannot parse direction from " + name);
      auto cols = parse_table(path.string(), 2);
      if (cols[0].empty()) throw DataError(name + " has no samples");
      set.bir[*d] = {as_ir(std::move(cols[0]), set.sample_rate), as_ir(std::move(cols[1]), set.sample_rate)};
    } else if (name.rfind("oir_el", 0) == 0 && path.extension() == ".csv") {
      int el = 0;
      if (std::sscanf(name.c_str(), "oir_el%d.csv", &el) != 1) {
        throw DataError("cannot parse elevation from " + name);
      }
      auto cols = parse_table(path.string(), 1);
      if (cols[0].empty()) throw DataError(name + " has no samples");
      set.oir[el] = as_ir(std::move(cols[0]), set.sample_rate);
    }
  }
  if (set.bir.empty()) throw DataError("no bir_*.csv files in " + dir);
  std::size_t len = set.bir.begin()->second.left.size();
  for (const auto& [d, pair] : set.bir) {
    if (pair.left.size() != len) throw DataError("BIR " + to_string(d) + " has a different length");
  }
  for (const auto& [el, ir] : set.oir) {
    if (ir.size() != len) throw DataError("OIR at elevation " + std::to_string(el) + " has a different length");
  }
  return set;
}

void write_hrir_file(const std::string& path, const BinauralPair& pair) {
  if (pair.left.size() != kHrirLength || pair.right.size() != kHrirLength) {
    throw PreconditionError("HRIR channels must have " + std::to_string(kHrirLength) + " samples");
  }
  std::string text;
  text.reserve(kHrirLength * 34);
  char buf[80];
  for (std::size_t i = 0; i < kHrirLength; ++i) {
    std::snprintf(buf, sizeof buf, "%+.9e %+.9e\n", pair.left[i], pair.right[i]);
    text += buf;
  }
  write_text(path, text);
}

BinauralPair read_hrir_file(const std::string& path, double sample_rate) {
  auto cols = parse_table(path, 2);
  if (cols[0].size() != kHrirLength) {
    throw DataError(path + ": expected " + std::to_string(kHrirLength) + " rows, found " +
                    std::to_string(cols[0].size()));
  }
  return {as_ir(std::move(cols[0]), sample_rate), as_ir(std::move(cols[1]), sample_rate)};
}

HrirFile read_hrir_file_with_direction(const std::string& path, double sample_rate) {
  const auto d = parse_direction_tag(fs::path(path).filename().string());
  if (!d) throw DataError("cannot parse direction from file name " + path);
  return {*d, read_hrir_file(path, sample_rate)};
}

void write_db_meta(const std::string& path, const DatabaseMeta& meta) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", meta.sample_rate);
  out << "fs=" << buf << "\n";
  out << "shift_m=" << meta.shift_m << "\n";
  out << "window_start=" << meta.window_start << "\n";
  out << "window_clamped=" << (meta.window_clamped ? 1 : 0) << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", meta.head_radius);
  out << "head_radius_l=" << buf << "\n";
  out << "subject=" << meta.subject << "\n";
  out << "compensated=" << (meta.compensated ? 1 : 0) << "\n";
  out << "flagged_bins=" << meta.flagged_bins << "\n";
  write_text(path, out.str());
}

DatabaseMeta read_db_meta(const std::string& path) {
  std::istringstream in(slurp(path));
  DatabaseMeta meta;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(path + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "fs") meta.sample_rate = std::stod(value);
      else if (key == "shift_m") meta.shift_m = std::stoi(value);
      else if (key == "window_start") meta.window_start = std::stoul(value);
      else if (key == "window_clamped") meta.window_clamped = value == "1";
      else if (key == "head_radius_l") meta.head_radius = std::stod(value);
      else if (key == "subject") meta.subject = value;
      else if (key == "compensated") meta.compensated = value == "1";
      else if (key == "flagged_bins") meta.flagged_bins = std::stoul(value);
      // Unknown keys are tolerated so newer writers stay readable.
    } catch (const std::exception&) {
      throw DataError(path + ": bad value for " + key);
    }
  }
  return meta;
}

void write_database(const std::string& dir, const HrirDatabase& db) {
  fs::create_directories(dir);
  for (const auto& [d, pair] : db.hrir) {
    write_hrir_file((fs::path(dir) / hrir_filename(d)).string(), pair);
  }
  write_db_meta((fs::path(dir) / "db_meta").string(), db.meta);
}

HrirDatabase read_database(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("database directory not found: " + dir);
  HrirDatabase db;
  const fs::path meta_path = fs::path(dir) / "db_meta";
  if (fs::exists(meta_path)) {
    db.meta = read_db_meta(meta_path.string());
  } else {
    db.meta.subject = "unknown";
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".txt" && parse_direction_tag(name)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    HrirFile f = read_hrir_file_with_direction(path.string(), db.meta.sample_rate);
    if (!db.hrir.emplace(f.direction, std::move(f.pair)).second) {
      throw DataError("duplicate HRIR for direction " + to_string(f.direction) + " in " + dir);
    }
  }
  if (db.hrir.empty()) throw DataError("no HRIR files in " + dir);
  return db;
}

}  // namespace hrtfkit
