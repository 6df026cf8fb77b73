#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "toposdf/config.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/io.hpp"

using namespace toposdf;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("toposdf_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Independent OBJ reader: "v x y z" and "f a b c" with 1-based indices.
std::pair<std::vector<Vec3>, std::vector<std::array<std::size_t, 3>>> read_obj_oracle(
    const std::string& text) {
  std::vector<Vec3> v;
  std::vector<std::array<std::size_t, 3>> f;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      ls >> p[0] >> p[1] >> p[2];
      v.push_back(p);
    } else if (tag == "f") {
      std::array<std::size_t, 3> t;
      ls >> t[0] >> t[1] >> t[2];
      f.push_back({t[0] - 1, t[1] - 1, t[2] - 1});
    }
  }
  return {v, f};
}

}  // namespace

TEST_CASE("xyz parsing") {
  CHECK(parse_xyz("0 0 0\n1 0 0\n").size() == 2);
  const auto withn = parse_xyz("# header\n0 0 0 0 0 1\n\n2.5 -1 3e-1 0 1 0\n");
  REQUIRE(withn.size() == 2);
  CHECK(withn[0] == Vec3{0, 0, 0});
  CHECK(withn[1] == Vec3{2.5, -1, 0.3});
  try {
    parse_xyz("0 0\n1 1 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_xyz("1 2 3\n"), DegenerateInputError);
  CHECK_THROWS_AS(parse_xyz("1 2 3\n1 x 3\n"), ParseError);
}

TEST_CASE("ascii ply parsing") {
  const std::string ply =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n";
  CHECK(parse_ply_ascii(ply).size() == 3);
  const std::string color =
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty uchar red\n"
      "property float x\nproperty float y\nproperty float z\nproperty uchar green\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "255 1 2 3 0\n0 4 5 6 255\n3 0 1 1\n";
  const auto c = parse_ply_ascii(color);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Vec3{1, 2, 3});
  CHECK(c[1] == Vec3{4, 5, 6});
  const std::string trunc =
      "ply\nformat ascii 1.0\nelement vertex 5\nproperty float x\nproperty float y\n"
      "property float z\nend_header\n0 0 0\n1 0 0\n0 1 0\n";
  CHECK_THROWS_AS(parse_ply_ascii(trunc), ParseError);
  CHECK_THROWS_AS(parse_ply_ascii("ply\nformat binary_little_endian 1.0\nend_header\n"),
                  UnsupportedFormatError);
  CHECK_THROWS_AS(parse_ply_ascii("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
                                  "end_header\n1\n2\n"),
                  UnsupportedFormatError);
}

TEST_CASE("point files on disk") {
  TempDir tmp;
  const std::vector<Vec3> pts{{0.125, -3, 7}, {1e-3, 2, 0}, {5, 5, 5}};
  save_xyz(pts, tmp.path / "a.xyz");
  CHECK(load_points(tmp.path / "a.xyz") == pts);
  write_text_file(tmp.path / "b.ply",
                  "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
                  "property double z\nend_header\n1 2 3\n4 5 6\n");
  CHECK(load_points(tmp.path / "b.ply").size() == 2);
  CHECK_THROWS_AS(load_points(tmp.path / "missing.xyz"), IoError);
  write_text_file(tmp.path / "c.stl", "solid");
  CHECK_THROWS_AS(load_points(tmp.path / "c.stl"), UnsupportedFormatError);
}

TEST_CASE("obj output") {
  TriangleMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.triangles = {{0, 1, 2}};
  const std::string text = format_obj(tri);
  std::size_t vlines = 0, flines = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++vlines;
    if (line.rfind("f ", 0) == 0) {
      ++flines;
      CHECK(line == "f 1 2 3");
    }
  }
  CHECK(vlines == 3);
  CHECK(flines == 1);
  const std::string empty = format_obj(TriangleMesh{});
  CHECK(empty.rfind("#", 0) == 0);
  CHECK(empty.find("\nv ") == std::string::npos);

  std::mt19937_64 rng(2);
  TriangleMesh m;
  m.vertices = oracle::random_points(40, rng, -3.0, 3.0);
  for (std::size_t i = 0; i + 2 < 40; ++i) m.triangles.push_back({i, i + 1, i + 2});
  TempDir tmp;
  save_obj(m, tmp.path / "m.obj");
  const auto [v, f] = read_obj_oracle(read_text_file(tmp.path / "m.obj"));
  REQUIRE(v.size() == m.vertices.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(std::fabs(v[i][k] - m.vertices[i][k]) < 1e-8);
  CHECK(f == m.triangles);
  const TriangleMesh back = load_obj(tmp.path / "m.obj");
  CHECK(back.triangles == m.triangles);
}

TEST_CASE("diagram csv") {
  PersistenceDiagram d;
  d.pairs.push_back({0.1, 0.9, 5, 60, true});
  const std::string text = format_diagram(d);
  CHECK(text == std::string(kDiagramHeader) + "\n0,0.1,0.9,5,60,1\n");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PersistenceDiagram r;
  for (std::size_t i = 0; i < 50; ++i) {
    const double b = u(rng);
    r.pairs.push_back({b, b + std::fabs(u(rng)), i, 100 + i, i == 7});
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const auto& a, const auto& b) { return a.birth < b.birth; });
  TempDir tmp;
  export_diagram(r, tmp.path / "d.csv");
  const auto back = import_diagram(tmp.path / "d.csv");
  CHECK(back.pairs == r.pairs);
  CHECK_THROWS_AS(parse_diagram("birth,death\n"), ParseError);
}

TEST_CASE("history csv") {
  TrainHistory h;
  h.records.push_back({0, 0.5, 0.0, 0.0, 0.5, 0.001, 0});
  h.records.push_back({1, 0.25, -0.75, 0.125, 0.5, 0.001, 2});
  const std::string text = format_history(h);
  CHECK(text.rfind(std::string(kHistoryHeader) + "\n", 0) == 0);
  CHECK(text.find("\n1,0.5,0.25,-0.75,0.125,0.001,2\n") != std::string::npos);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const SdfModel m = init_geometric(Architecture{4, 16, 2}, 0.5, 3);
  const std::string bytes = encode_checkpoint(m);
  CHECK(bytes.substr(0, 4) == "STCH");
  const SdfModel back = decode_checkpoint(bytes);
  CHECK(back.arch == m.arch);
  CHECK(back.flatten() == m.flatten());
  CHECK(encode_checkpoint(back) == bytes);
  TempDir tmp;
  save_checkpoint(m, tmp.path / "m.ckpt");
  CHECK(load_checkpoint(tmp.path / "m.ckpt").flatten() == m.flatten());

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), ParseError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), ParseError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), ParseError);
}

TEST_CASE("transform files") {
  TempDir tmp;
  SourceTransform t;
  t.scale = 5.0 / 0.9;
  t.translation = {0.1, -2.0, 1e-17};
  save_transform(t, tmp.path / "t.txt");
  const SourceTransform back = load_transform(tmp.path / "t.txt");
  CHECK(back.scale == t.scale);
  CHECK(back.translation == t.translation);
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("run config parsing and echo") {
  const RunConfig def = parse_run_config("");
  CHECK(def.train.iterations == 40000);
  CHECK(def.train.weights.curriculum_start_iter == 39500);
  const std::string echo = echo_run_config(def);
  CHECK(echo_run_config(parse_run_config(echo)) == echo);

  const RunConfig c = parse_run_config(
      "# desk\niterations = 3000\nlambda2 = 2.5\noptimizer = sgd\nfiltration = raw\n"
      "include_essential = false\n");
  CHECK(c.train.iterations == 3000);
  CHECK(c.train.weights.curriculum_start_iter == 2500);
  CHECK(c.train.weights.lambda2 == 2.5);
  CHECK(c.train.optimizer == OptimizerKind::sgd_robbins_monro);
  CHECK(c.train.topo.filtration == Filtration::raw);
  CHECK_FALSE(c.train.topo.partition.include_essential);
  const std::string e2 = echo_run_config(c);
  CHECK(echo_run_config(parse_run_config(e2)) == e2);

  CHECK(parse_run_config("iterations = 300\nwarmup_iters = 100\n").train.weights.curriculum_start_iter == 0);
  CHECK_THROWS_AS(parse_run_config("bogus = 1\n"), ParameterError);
  CHECK_THROWS_AS(parse_run_config("seed = 1\nseed = 2\n"), ParameterError);
  CHECK_THROWS_AS(parse_run_config("seed 1\n"), ParseError);
  CHECK_THROWS_AS(parse_run_config("iterations = many\n"), ParameterError);

  const RunConfig desk = parse_run_config(read_text_file(TOPOSDF_SOURCE_DIR "/configs/desk.cfg"));
  CHECK(desk.train.arch == Architecture{4, 64, 2});
  CHECK(desk.train.iterations == 5000);
  CHECK(desk.mesh_resolution == 64);
}
