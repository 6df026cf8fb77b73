#include "toposdf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

#include "toposdf/config.hpp"
#include "toposdf/errors.hpp"
#include "toposdf/io.hpp"
#include "toposdf/kernels.hpp"
#include "toposdf/metrics.hpp"
#include "toposdf/surface.hpp"
#include "toposdf/synthetic.hpp"
#include "toposdf/topo_verify.hpp"

namespace toposdf {

namespace {

struct Options {
  // reconstruct
  std::string input, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::size_t progress_every = 500;
  // mesh / diagram / eval
  std::string model, out_file, transform, mesh, gt, report;
  std::size_t resolution = 256;
  double iso = 0.0;
  std::string filtration = "absolute";
  std::size_t samples = kDefaultMetricSamples;
  std::uint64_t metric_seed = 0;
  // verify
  int theorem = 2;
  std::size_t m = 5, k = 3, trials = 100, packing_trials = 8;
  std::uint64_t verify_seed = 0;
  double eps_ratio = 0.1;
  // generate
  std::string shape = "sphere";
  std::size_t gen_samples = 2000;
  double radius = 0.5, gap = kTwoSpheresGap, major = 0.5, minor = 0.15, thickness = 0.05,
         half_extent = 0.6, noise = 0.0;
  std::uint64_t gen_seed = 0;
};

int run_reconstruct(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = o.config_path.empty() ? parse_run_config("")
                                        : parse_run_config(read_text_file(o.config_path));
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.out_dir.empty()) cfg.output = o.out_dir;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (cfg.input.empty()) throw ParameterError("no input point cloud given");
  if (cfg.output.empty()) throw ParameterError("no output directory given");
  cfg.validate();
  if (cfg.threads > 0) kernels::set_threads(static_cast<int>(cfg.threads));

  const std::vector<Vec3> raw = load_points(cfg.input);
  const PointCloud cloud = normalize(raw, cfg.normalize_half_extent);

  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.output + "': " + ec.message());
  const fs::path dir(cfg.output);
  write_text_file(dir / "config.txt", echo_run_config(cfg));
  save_transform(cloud.source_transform, dir / "transform.txt");

  const std::size_t every = o.progress_every;
  auto [model, history] = train(cloud, cfg.train, [&](const IterationRecord& r) {
    if (every > 0 && (r.iter % every == 0 || r.iter + 1 == cfg.train.iterations)) {
      err << "iter " << r.iter << " total " << r.total << " pull " << r.pull << " sig "
          << r.significant << " noise " << r.noise << " lr " << r.lr << '\n';
    }
  });
  save_checkpoint(model, dir / "model.ckpt");
  save_history_csv(history, dir / "history.csv");
  out << "wrote " << (dir / "model.ckpt").string() << '\n';
  return kExitOk;
}

int run_mesh(const Options& o, std::ostream& out) {
  const SdfModel model = load_checkpoint(o.model);
  TriangleMesh mesh = marching_cubes(model, o.resolution, GridDomain{}, o.iso);
  if (!o.transform.empty()) {
    const SourceTransform t = load_transform(o.transform);
    for (auto& v : mesh.vertices) v = t.to_source(v);
  }
  const ComponentInfo info = mesh_components(mesh);
  save_obj(mesh, o.out_file);
  out << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles, "
      << info.count << " components\n";
  return kExitOk;
}

int run_eval(const Options& o, std::ostream& out) {
  TriangleMesh mesh = load_obj(o.mesh);
  std::vector<Vec3> gt = load_points(o.gt);
  if (!o.transform.empty()) {
    const SourceTransform t = load_transform(o.transform);
    for (auto& p : gt) p = t.to_normalized(p);
  }
  std::optional<SdfModel> model;
  if (!o.model.empty()) model = load_checkpoint(o.model);
  MetricsOptions mo;
  mo.samples = o.samples;
  mo.seed = o.metric_seed;
  const MetricsReport r = evaluate_reconstruction(mesh, gt, model ? &*model : nullptr, mo);

  nlohmann::ordered_json j;
  j["cd_one_sided_pred_to_gt"] = r.cd_one_sided_pred_to_gt;
  j["cd_one_sided_gt_to_pred"] = r.cd_one_sided_gt_to_pred;
  j["cd_two_sided"] = r.cd_two_sided;
  j["hd_one_sided_pred_to_gt"] = r.hd_one_sided_pred_to_gt;
  j["hd_one_sided_gt_to_pred"] = r.hd_one_sided_gt_to_pred;
  j["hd_two_sided"] = r.hd_two_sided;
  j["significant_feature_loss"] = r.significant_feature_loss;
  j["significant_feature_loss_definition"] = "abs(L_S), unweighted, top-1 on the |f| grid";
  j["component_count"] = r.component_count;
  j["pred_samples"] = r.pred_samples;
  j["gt_samples"] = r.gt_samples;
  j["sfl_grid_resolution"] = r.sfl_grid_resolution;
  j["sample_seed"] = r.sample_seed;
  write_text_file(o.report, j.dump(2) + '\n');
  out << "cd_two_sided " << r.cd_two_sided << " hd_two_sided " << r.hd_two_sided
      << " components " << r.component_count << '\n';
  return kExitOk;
}

int run_diagram(const Options& o, std::ostream& out) {
  const SdfModel model = load_checkpoint(o.model);
  const Filtration f = filtration_from_string(o.filtration);
  const ScalarGrid grid = sample_grid(model, o.resolution, GridDomain{}, f == Filtration::absolute);
  const PersistenceDiagram pd = persistence0(grid);
  export_diagram(pd, o.out_file);
  out << pd.pairs.size() << " pairs\n";
  return kExitOk;
}

int run_verify(const Options& o, std::ostream& out) {
  if (o.theorem == 2) {
    const Theorem2Report r = check_theorem2(o.m, o.k, o.trials, o.verify_seed);
    out << r.counterexamples << " counterexamples in " << r.trials << " trials\n";
    return kExitOk;
  }
  if (o.theorem == 3) {
    const Theorem3Report r =
        check_theorem3(o.m, o.k, o.eps_ratio, o.trials, o.verify_seed, o.packing_trials);
    out << r.counterexamples() << " counterexamples in " << r.trials << " trials (verified "
        << r.verified << ", premise false " << r.premise_false << ", undecided " << r.undecided
        << ", violated " << r.violated << ")\n";
    return kExitOk;
  }
  throw ParameterError("--theorem must be 2 or 3");
}

int run_generate(const Options& o, std::ostream& out) {
  ShapeSpec s;
  s.kind = shape_kind_from_string(o.shape);
  s.radius = o.radius;
  s.gap = o.gap;
  s.major_radius = o.major;
  s.minor_radius = o.minor;
  s.thickness = o.thickness;
  s.half_extent = o.half_extent;
  s.samples = o.gen_samples;
  s.noise_std = o.noise;
  s.seed = o.gen_seed;
  const SyntheticShape shape = generate(s);
  save_xyz(shape.points, o.out_file);
  out << shape.points.size() << " points\n";
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural SDF surface reconstruction with a persistence-based topology prior",
               "toposdf"};
  app.require_subcommand(1);
  Options o;

  auto* rec = app.add_subcommand("reconstruct", "train an SDF on a point cloud");
  rec->add_option("--input", o.input, "point cloud (.xyz or ascii .ply)");
  rec->add_option("--config", o.config_path, "key = value config file");
  rec->add_option("--out", o.out_dir, "output directory");
  rec->add_option("--seed", o.seed, "override the config seed");
  rec->add_option("--threads", o.threads, "OpenMP threads (0: default)");
  rec->add_option("--progress-every", o.progress_every, "log every n iterations (0: silent)");

  auto* msh = app.add_subcommand("mesh", "extract the zero level set as OBJ");
  msh->add_option("--model", o.model, "checkpoint")->required();
  msh->add_option("--resolution", o.resolution, "grid samples per axis")->check(CLI::Range(8, 1024));
  msh->add_option("--iso", o.iso, "iso level");
  msh->add_option("--transform", o.transform, "map vertices back to source units");
  msh->add_option("--out", o.out_file, "OBJ path")->required();

  auto* ev = app.add_subcommand("eval", "compare a mesh against ground-truth points");
  ev->add_option("--mesh", o.mesh, "OBJ mesh")->required();
  ev->add_option("--gt", o.gt, "ground-truth cloud")->required();
  ev->add_option("--model", o.model, "checkpoint for the significant-feature loss");
  ev->add_option("--transform", o.transform, "normalize ground truth with this transform");
  ev->add_option("--samples", o.samples, "surface samples on the mesh");
  ev->add_option("--seed", o.metric_seed, "sampling seed");
  ev->add_option("--report", o.report, "JSON report path")->required();

  auto* dg = app.add_subcommand("diagram", "export the 0-dim persistence diagram as CSV");
  dg->add_option("--model", o.model, "checkpoint")->required();
  dg->add_option("--resolution", o.resolution, "grid samples per axis")->check(CLI::Range(2, 512));
  dg->add_option("--filtration", o.filtration, "absolute or raw");
  dg->add_option("--out", o.out_file, "CSV path")->required();

  auto* vf = app.add_subcommand("verify", "randomized checks of the density/separation theorems");
  vf->add_option("--theorem", o.theorem, "2 or 3")->required();
  vf->add_option("--m", o.m, "set size (<= 8)");
  vf->add_option("--k", o.k, "subset size");
  vf->add_option("--trials", o.trials, "random sets");
  vf->add_option("--seed", o.verify_seed, "master seed");
  vf->add_option("--eps-ratio", o.eps_ratio, "eps as a fraction of beta (theorem 3)");
  vf->add_option("--packing-trials", o.packing_trials, "greedy packing restarts (theorem 3)");

  auto* gen = app.add_subcommand("generate", "write a synthetic point cloud");
  gen->add_option("--shape", o.shape, "sphere, two_spheres, torus, thin_plate");
  gen->add_option("--samples", o.gen_samples, "point count");
  gen->add_option("--radius", o.radius, "sphere radius");
  gen->add_option("--gap", o.gap, "gap between the two spheres");
  gen->add_option("--major", o.major, "torus ring radius");
  gen->add_option("--minor", o.minor, "torus tube radius");
  gen->add_option("--thickness", o.thickness, "plate thickness");
  gen->add_option("--half-extent", o.half_extent, "plate half width");
  gen->add_option("--noise", o.noise, "Gaussian noise std");
  gen->add_option("--seed", o.gen_seed, "seed");
  gen->add_option("--out", o.out_file, "XYZ path")->required();

  std::vector<std::string> argv_store{"toposdf"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (rec->parsed()) return run_reconstruct(o, out, err);
    if (msh->parsed()) return run_mesh(o, out);
    if (ev->parsed()) return run_eval(o, out);
    if (dg->parsed()) return run_diagram(o, out);
    if (vf->parsed()) return run_verify(o, out);
    if (gen->parsed()) return run_generate(o, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace toposdf
