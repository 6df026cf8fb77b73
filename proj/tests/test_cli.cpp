#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "toposdf/cli.hpp"
#include "toposdf/io.hpp"
#include "toposdf/synthetic.hpp"

using namespace toposdf;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("toposdf_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("verify subcommand") {
  const Run r = run({"verify", "--theorem", "2", "--m", "5", "--k", "3", "--trials", "100", "--seed", "1"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("0 counterexamples") != std::string::npos);
  const Run t3 = run({"verify", "--theorem", "3", "--m", "6", "--k", "2", "--trials", "20"});
  CHECK(t3.code == kExitOk);
  CHECK(t3.out.find("undecided") != std::string::npos);
  CHECK(run({"verify", "--theorem", "2", "--m", "9", "--k", "3"}).code == kExitValidation);
}

TEST_CASE("usage errors") {
  const Run r = run({"verify", "--theorem", "2", "--bogus"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("reconstruct with a missing input") {
  TempDir tmp;
  const Run r = run({"reconstruct", "--input", tmp / "nope.xyz", "--out", tmp / "run"});
  CHECK(r.code == kExitIo);
  CHECK(r.err.find("nope.xyz") != std::string::npos);
}

TEST_CASE("mesh on a field without a zero crossing") {
  TempDir tmp;
  SdfModel m = init_standard(Architecture{2, 4, 1}, 0);
  for (auto& l : m.layers) {
    std::fill(l.weight.storage().begin(), l.weight.storage().end(), 0.0);
    std::fill(l.bias.storage().begin(), l.bias.storage().end(), 0.0);
  }
  m.layers[1].bias[0] = 1.0;
  save_checkpoint(m, tmp / "flat.ckpt");
  const Run r = run({"mesh", "--model", tmp / "flat.ckpt", "--resolution", "16", "--out", tmp / "m.obj"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("no iso-surface") != std::string::npos);
}

TEST_CASE("generate, reconstruct, mesh, diagram and eval") {
  TempDir tmp;
  REQUIRE(run({"generate", "--shape", "sphere", "--samples", "300", "--seed", "2", "--out", tmp / "s.xyz"}).code == 0);
  write_text_file(tmp / "tiny.cfg",
                  "layer_count = 3\nhidden_width = 16\nskip_layer = 1\niterations = 40\n"
                  "batch_queries = 64\nsigma_k = 5\nwarmup_iters = 5\ntopo_grid_resolution = 4\n"
                  "curriculum_start_iter = 30\nmesh_resolution = 16\nthreads = 1\n");
  const Run rec = run({"reconstruct", "--input", tmp / "s.xyz", "--config", tmp / "tiny.cfg",
                       "--out", tmp / "run", "--seed", "4"});
  REQUIRE(rec.code == kExitOk);
  for (const char* f : {"config.txt", "transform.txt", "model.ckpt", "history.csv"})
    CHECK(fs::exists(tmp.path / "run" / f));
  const std::string echo = read_text_file(tmp / "run/config.txt");
  CHECK(echo.find("seed = 4\n") != std::string::npos);
  const std::string history = read_text_file(tmp / "run/history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') >= 41);

  REQUIRE(run({"mesh", "--model", tmp / "run/model.ckpt", "--resolution", "24", "--transform",
               tmp / "run/transform.txt", "--out", tmp / "m.obj"}).code == kExitOk);
  CHECK(load_obj(tmp / "m.obj").triangles.size() > 0);
  REQUIRE(run({"diagram", "--model", tmp / "run/model.ckpt", "--resolution", "6", "--out", tmp / "d.csv"}).code == kExitOk);
  const auto d = import_diagram(tmp / "d.csv");
  CHECK(d.essential_count() == 1);
  const Run ev = run({"eval", "--mesh", tmp / "m.obj", "--gt", tmp / "s.xyz", "--model",
                      tmp / "run/model.ckpt", "--transform", tmp / "run/transform.txt",
                      "--samples", "500", "--report", tmp / "r.json"});
  REQUIRE(ev.code == kExitOk);
  const std::string report = read_text_file(tmp / "r.json");
  CHECK(report.find("\"cd_two_sided\"") != std::string::npos);
  CHECK(report.find("\"component_count\"") != std::string::npos);
}
