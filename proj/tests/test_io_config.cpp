#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dispersim/config.hpp"
#include "dispersim/io.hpp"
#include "test_util.hpp"

using namespace dispersim;
using nlohmann::json;
using test::random_field;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

}  // namespace

TEST_CASE("snapshot roundtrip is bitwise exact") {
  auto g = make_grid(2, 32, 12.5);
  ComplexField f = random_field(g, 21);
  TempFile tmp("dispersim_roundtrip.dspf");
  emit_snapshot(f, tmp.path);
  auto loaded = load_snapshot(tmp.path);
  REQUIRE(std::holds_alternative<ComplexField>(loaded));
  const ComplexField& back = std::get<ComplexField>(loaded);
  REQUIRE(back.grid().same_as(*g));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}

TEST_CASE("spinor snapshot roundtrip") {
  auto g = make_grid(1, 64, 30.0);
  SpinorField s(g);
  s.up = random_field(g, 1);
  s.down = random_field(g, 2);
  TempFile tmp("dispersim_spinor.dspf");
  emit_snapshot(s, tmp.path);
  auto loaded = load_snapshot(tmp.path);
  REQUIRE(std::holds_alternative<SpinorField>(loaded));
  const SpinorField& back = std::get<SpinorField>(loaded);
  for (std::size_t i = 0; i < s.up.size(); ++i) {
    CHECK(back.up[i] == s.up[i]);
    CHECK(back.down[i] == s.down[i]);
  }
}

TEST_CASE("snapshot file size and format errors") {
  auto g = make_grid(3, 16, 10.0);
  ComplexField f = random_field(g, 5);
  TempFile tmp("dispersim_size.dspf");
  emit_snapshot(f, tmp.path);
  // header: 4 magic + 2 version + 1 dim + 1 spinor + 4 N + 8 L = 20 bytes
  CHECK(std::filesystem::file_size(tmp.path) == 20 + 16 * 16 * 16 * 16);

  // Corrupt the version field.
  {
    std::fstream fs(tmp.path,
                    std::ios::binary | std::ios::in | std::ios::out);
    fs.seekp(4);
    std::uint16_t bad = 999;
    fs.write(reinterpret_cast<const char*>(&bad), 2);
  }
  CHECK_THROWS_AS(load_snapshot(tmp.path), SnapshotError);

  TempFile garbage("dispersim_garbage.dspf");
  std::ofstream(garbage.path) << "not a snapshot";
  CHECK_THROWS_AS(load_snapshot(garbage.path), SnapshotError);
  CHECK_THROWS_AS(load_snapshot("/nonexistent/nope.dspf"), SnapshotError);
}

namespace {

json base_config() {
  return json{
      {"grid", {{"dim", 1}, {"points", 64}, {"box_length", 40.0}}},
      {"wells",
       {{{"depth", 2.0}, {"width", 1.0}},
        {{"depth", 1.5},
         {"width", 1.0},
         {"center", {8.0}},
         {"velocity", {2.0 * 3.14159265358979323846 * 6.0 / 40.0}}}}},
      {"time", {{"t0", 0.0}, {"t1", 2.0}, {"dt", 0.01}, {"stride", 10}}},
  };
}

}  // namespace

TEST_CASE("config parses a valid document") {
  ExperimentConfig cfg = parse_config(base_config());
  CHECK(cfg.dim == 1);
  CHECK(cfg.points == 64);
  CHECK(cfg.wells.size() == 2);
  CHECK(cfg.wells[1].center[0] == 8.0);
  CHECK_FALSE(cfg.matrix);
  CHECK(cfg.dt == 0.01);
}

TEST_CASE("config rejects structural problems") {
  json doc = base_config();
  doc["unknown_top"] = 1;
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["grid"]["points"] = 48;
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["wells"][0]["typo"] = 3;
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["wells"][0].erase("depth");
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["time"]["dt"] = -1.0;
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["wells"][0]["velocity"] = {0.0, 1.0};  // beyond grid dimension
  CHECK_THROWS_AS(parse_config(doc), SchemaError);

  doc = base_config();
  doc["initial"] = {{"type", "mystery"}};
  CHECK_THROWS_AS(parse_config(doc), SchemaError);
}

TEST_CASE("config snaps non-commensurate velocities loudly") {
  json doc = base_config();
  doc["wells"][1]["velocity"] = {0.95};
  std::vector<std::string> adjustments;
  ExperimentConfig cfg = parse_config(doc, &adjustments);
  REQUIRE(adjustments.size() == 1);
  CHECK(is_commensurate(cfg.wells[1].velocity, cfg.box_length));
  // Already-commensurate input is left untouched and unreported.
  adjustments.clear();
  parse_config(base_config(), &adjustments);
  CHECK(adjustments.empty());
}

TEST_CASE("matrix config schema") {
  json doc = {
      {"grid", {{"dim", 1}, {"points", 64}, {"box_length", 40.0}}},
      {"matrix", true},
      {"channels",
       {{{"u", {{"depth", 1.0}, {"width", 1.0}}},
         {"w", {{"depth", 0.5}, {"width", 1.0}}},
         {"alpha", 1.0},
         {"velocity", {3.14159265358979323846 * 4.0 / 40.0}}}}},
  };
  ExperimentConfig cfg = parse_config(doc);
  CHECK(cfg.matrix);
  REQUIRE(cfg.channels.size() == 1);
  CHECK(cfg.channels[0].alpha == 1.0);

  json bad = doc;
  bad["channels"][0]["alpha"] = 0.0;
  CHECK_THROWS_AS(parse_config(bad), SchemaError);

  bad = doc;
  bad["grid"]["dim"] = 3;
  CHECK_THROWS_AS(parse_config(bad), SchemaError);

  bad = doc;
  bad["wells"] = json::array();
  CHECK_THROWS_AS(parse_config(bad), SchemaError);
}
