#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "hrtfkit/error.hpp"
#include "hrtfkit/hrtf_pipeline.hpp"

using namespace hrtfkit;
namespace fs = std::filesystem;

TEST_CASE("direction canonicalisation") {
  CHECK(Direction::make(-180, 0).azimuth_deg == 180);
  CHECK(Direction::make(190, 10).azimuth_deg == -170);
  CHECK(Direction::make(-90, 0).mirrored() == Direction::make(90, 0));
  CHECK(Direction::make(180, 0).mirrored() == Direction::make(180, 0));
  CHECK_THROWS_AS(Direction::make(0, -45), PreconditionError);
  CHECK_THROWS_AS(Direction::make(0, 95), PreconditionError);
}

TEST_CASE("file names encode signed padded degrees") {
  CHECK(bir_filename(Direction::make(-90, 0)) == "bir_az-090_el+00.csv");
  CHECK(hrir_filename(Direction::make(180, -40)) == "hrir_az+180_el-40.txt");
  CHECK(oir_filename(5) == "oir_el+05.csv");
  const auto d = parse_direction_tag("some/dir/hrir_az-015_el+35.txt");
  REQUIRE(d.has_value());
  CHECK(*d == Direction::make(-15, 35));
  CHECK_FALSE(parse_direction_tag("readme.txt").has_value());
}

TEST_CASE("standard grid has 72 x 27 unique directions") {
  const auto g = MeasurementGrid::standard();
  CHECK(g.azimuths().size() == 72);
  CHECK(g.elevations().size() == 27);
  CHECK(g.size() == 1944);
  std::set<Direction> unique(g.directions().begin(), g.directions().end());
  CHECK(unique.size() == 1944);
  CHECK(unique.count(Direction::make(180, 90)) == 1);
  CHECK_THROWS(MeasurementGrid({0, 0}, {0}));
}

TEST_CASE("HRIR text file round trip") {
  const auto dir = fixtures::scratch_dir("hrir_io");
  std::mt19937 gen(8);
  std::normal_distribution<double> g;
  BinauralPair pair;
  pair.left.samples.resize(512);
  pair.right.samples.resize(512);
  for (std::size_t i = 0; i < 512; ++i) {
    pair.left.samples[i] = g(gen) * 1e-3;
    pair.right.samples[i] = g(gen) * 10.0;
  }
  const std::string p = dir + "/" + hrir_filename(Direction::make(45, 10));
  write_hrir_file(p, pair);
  const auto back = read_hrir_file_with_direction(p);
  CHECK(back.direction == Direction::make(45, 10));
  for (std::size_t i = 0; i < 512; ++i) {
    CHECK(std::abs(back.pair.left[i] - pair.left[i]) <= 1e-8 * std::max(1.0, std::abs(pair.left[i])));
    CHECK(std::abs(back.pair.right[i] - pair.right[i]) <= 1e-8 * std::max(1.0, std::abs(pair.right[i])));
  }

  // Two whitespace-separated columns, 512 lines.
  std::ifstream in(p);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double a, b;
    CHECK(static_cast<bool>(ss >> a >> b));
    ++rows;
  }
  CHECK(rows == 512);
}

TEST_CASE("malformed HRIR files are rejected") {
  const auto dir = fixtures::scratch_dir("hrir_bad");
  {
    std::ofstream out(dir + "/short.txt");
    for (int i = 0; i < 511; ++i) out << "0.1 0.2\n";
  }
  CHECK_THROWS_AS(read_hrir_file(dir + "/short.txt"), DataError);
  {
    std::ofstream out(dir + "/junk.txt");
    for (int i = 0; i < 512; ++i) out << (i == 100 ? "0.1 abc\n" : "0.1 0.2\n");
  }
  CHECK_THROWS_AS(read_hrir_file(dir + "/junk.txt"), DataError);
  {
    std::ofstream out(dir + "/onecol.txt");
    for (int i = 0; i < 512; ++i) out << "0.1\n";
  }
  CHECK_THROWS_AS(read_hrir_file(dir + "/onecol.txt"), DataError);
  BinauralPair wrong;
  wrong.left.samples.assign(100, 0.0);
  wrong.right.samples.assign(100, 0.0);
  CHECK_THROWS(write_hrir_file(dir + "/w.txt", wrong));
}

TEST_CASE("database metadata round trip") {
  const auto dir = fixtures::scratch_dir("meta");
  DatabaseMeta m;
  m.shift_m = 60;
  m.window_start = 94;
  m.window_clamped = true;
  m.head_radius = 0.09;
  m.subject = "dummy-head";
  m.compensated = false;
  m.flagged_bins = 3;
  write_db_meta(dir + "/db_meta", m);
  const auto b = read_db_meta(dir + "/db_meta");
  CHECK(b.sample_rate == m.sample_rate);
  CHECK(b.shift_m == 60);
  CHECK(b.window_start == 94);
  CHECK(b.window_clamped);
  CHECK(b.head_radius == 0.09);
  CHECK(b.subject == "dummy-head");
  CHECK_FALSE(b.compensated);
  CHECK(b.flagged_bins == 3);
}

TEST_CASE("database written without metadata is read with the published convention") {
  const auto dir = fixtures::scratch_dir("published");
  BinauralPair pair;
  pair.left.samples.assign(512, 0.0);
  pair.right.samples.assign(512, 0.0);
  pair.left.samples[60] = 1.0;
  pair.right.samples[70] = 0.5;
  write_hrir_file(dir + "/hrir_az+000_el+00.txt", pair);
  write_hrir_file(dir + "/hrir_az+005_el+00.txt", pair);
  const auto db = read_database(dir);
  CHECK(db.hrir.size() == 2);
  CHECK(db.meta.sample_rate == 48000.0);
  CHECK(db.meta.subject == "unknown");
  CHECK(db.at(Direction::make(5, 0)).right[70] == 0.5);
  CHECK_THROWS(db.at(Direction::make(10, 0)));
}
