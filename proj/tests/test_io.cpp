#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forceflow/errors.hpp"
#include "forceflow/io.hpp"
#include "oracles.hpp"

#include <fstream>
#include <limits>

using namespace forceflow;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FORCEFLOW_TEST_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("forceflow_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(3.0) == "3");
  CHECK(io::format_double(std::numeric_limits<double>::denorm_min()) != "0");
}

TEST_CASE("IDX loading") {
  SUBCASE("plain and gzip give the same data") {
    for (const char* suffix : {"", ".gz"}) {
      const Dataset d = io::load_idx(kData / (std::string("tiny-images-idx3-ubyte") + suffix),
                                     kData / (std::string("tiny-labels-idx1-ubyte") + suffix));
      REQUIRE(d.size() == 2);
      REQUIRE(d.dim() == 4);
      CHECK(d.points(0, 0) == 0.0);
      CHECK(d.points(0, 1) == 1.0);
      CHECK(d.points(0, 2) == 0.2);
      CHECK(d.points(0, 3) == 0.4);
      CHECK(d.points(1, 3) == 0.8);
      CHECK(*d.labels == Labels{1, 5});
    }
  }
  TempDir tmp;
  const std::string img = bytes_of(kData / "tiny-images-idx3-ubyte");
  const std::string lab = bytes_of(kData / "tiny-labels-idx1-ubyte");
  SUBCASE("bad magic") {
    std::string bad = img;
    bad[3] = 0x04;
    write_bytes(tmp.path / "img", bad);
    write_bytes(tmp.path / "lab", lab);
    CHECK_THROWS_AS(io::load_idx(tmp.path / "img", tmp.path / "lab"), FormatError);
    write_bytes(tmp.path / "img", img);
    CHECK_THROWS_AS(io::load_idx(tmp.path / "lab", tmp.path / "lab"), FormatError);
  }
  SUBCASE("truncated pixels report the offset") {
    write_bytes(tmp.path / "img", img.substr(0, img.size() - 3));
    write_bytes(tmp.path / "lab", lab);
    try {
      io::load_idx(tmp.path / "img", tmp.path / "lab");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    write_bytes(tmp.path / "img", img.substr(0, 6));
    write_bytes(tmp.path / "lab", lab);
    CHECK_THROWS_AS(io::load_idx(tmp.path / "img", tmp.path / "lab"), FormatError);
  }
  SUBCASE("count mismatch") {
    std::string one = lab.substr(0, 9);
    one[7] = 1;
    write_bytes(tmp.path / "img", img);
    write_bytes(tmp.path / "lab", one);
    CHECK_THROWS_AS(io::load_idx(tmp.path / "img", tmp.path / "lab"), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(io::load_idx(tmp.path / "nope", tmp.path / "nope"), FormatError);
  }
}

TEST_CASE("CSV round trips") {
  TempDir tmp;
  SUBCASE("table") {
    const Matrix m = oracle::random_matrix(7, 3, 2, 1e3);
    io::write_csv(tmp.path / "t.csv", {"a", "b", "c"}, m);
    const io::CsvTable t = io::read_csv(tmp.path / "t.csv");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    CHECK(t.values == m);
    CHECK(t.column("c") == 2);
    CHECK_THROWS_AS(t.column("z"), FormatError);
  }
  SUBCASE("ragged rows") {
    io::write_text(tmp.path / "r.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(io::read_csv(tmp.path / "r.csv"), FormatError);
    io::write_text(tmp.path / "n.csv", "a,b\n1,nan\n");
    CHECK_THROWS_AS(io::read_csv(tmp.path / "n.csv"), FormatError);
  }
  SUBCASE("dataset") {
    Dataset d = Dataset::from_points(oracle::random_matrix(5, 4, 3), Labels{1, 5, 1, 5, 5});
    io::save_dataset(tmp.path / "d.csv", d);
    const Dataset e = io::load_dataset(tmp.path / "d.csv");
    CHECK(e.points == d.points);
    CHECK(*e.labels == *d.labels);
  }
  SUBCASE("feature csv") {
    io::write_text(tmp.path / "f.csv", "u,label,v\n1,3,2\n4,7,5\n");
    const Dataset d = io::load_feature_csv(tmp.path / "f.csv");
    CHECK(d.dim() == 2);
    CHECK(*d.labels == Labels{3, 7});
    CHECK(d.points(1, 1) == 5.0);
  }
  SUBCASE("embedding") {
    const Points2 y = oracle::random_points(9, 4);
    io::save_embedding(tmp.path / "e.csv", y, Labels(9, 2));
    std::optional<Labels> labels;
    CHECK(io::load_embedding(tmp.path / "e.csv", &labels) == y);
    CHECK(labels == Labels(9, 2));
  }
  SUBCASE("field") {
    io::FieldFile f;
    f.samples.anchors = oracle::random_points(6, 5);
    f.samples.forces = oracle::random_points(6, 6);
    f.samples.kind = ForceKind::raw_attraction;
    f.samples.Z = 123.456;
    f.samples.sign_flipped = true;
    f.k = 4;
    f.sigma = 0.321;
    io::save_field(tmp.path / "f.csv", f);
    const io::FieldFile g = io::load_field(tmp.path / "f.csv");
    CHECK(g.samples.anchors == f.samples.anchors);
    CHECK(g.samples.forces == f.samples.forces);
    CHECK(g.samples.kind == ForceKind::raw_attraction);
    CHECK(g.samples.Z == 123.456);
    CHECK(g.samples.sign_flipped);
    CHECK(g.k == 4);
    CHECK(g.sigma == 0.321);
  }
  SUBCASE("grid") {
    FieldGrid g;
    g.bbox = {-1, 3, 0, 2};
    g.nx = 3;
    g.ny = 2;
    g.positions = oracle::random_points(6, 7);
    g.values = oracle::random_points(6, 8);
    io::save_grid(tmp.path / "g.csv", g);
    const FieldGrid h = io::load_grid(tmp.path / "g.csv");
    CHECK(h.nx == 3);
    CHECK(h.ny == 2);
    CHECK(h.bbox.xmax == 3);
    CHECK(h.positions == g.positions);
    CHECK(h.values == g.values);
  }
  SUBCASE("flow") {
    FlowResult r;
    r.initial = oracle::random_points(5, 9);
    r.final = oracle::random_points(5, 10);
    r.snapshots = {{0, r.initial}, {10, r.final}};
    r.iterations = 10;
    r.field_kind = "modified_attraction";
    r.underflow_count = 3;
    io::save_flow(tmp.path / "flow", r);
    const FlowResult s = io::load_flow(tmp.path / "flow");
    CHECK(s.initial == r.initial);
    CHECK(s.final == r.final);
    REQUIRE(s.snapshots.size() == 2);
    CHECK(s.snapshots[1].iteration == 10);
    CHECK(s.snapshots[1].positions == r.final);
    CHECK(s.iterations == 10);
    CHECK(s.field_kind == "modified_attraction");
    CHECK(s.underflow_count == 3);
  }
}

TEST_CASE("PGM output") {
  TempDir tmp;
  Vector px(4);
  px << 0.0, 1.0, 0.5, 2.0;
  io::write_pgm(tmp.path / "a.pgm", px, 2, 2);
  CHECK(io::read_text(tmp.path / "a.pgm") == "P2\n2 2\n255\n0 255\n128 255\n");
  CHECK_THROWS(io::write_pgm(tmp.path / "b.pgm", px, 3, 2));
}
