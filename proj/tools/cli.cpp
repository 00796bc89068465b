#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "spiralnet/checkpoint.hpp"
#include "spiralnet/error.hpp"
#include "spiralnet/eval.hpp"
#include "spiralnet/features.hpp"
#include "spiralnet/grad_fixtures.hpp"
#include "spiralnet/mesh_io.hpp"
#include "spiralnet/model.hpp"
#include "spiralnet/parallel.hpp"
#include "spiralnet/spiral.hpp"
#include "spiralnet/train.hpp"

namespace spiralnet::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kFeatureHelp =
    "Feature sources: a VFEAT1 file (\"VFEAT1\\n\", \"<V> <D> <name>\\n\", then V*D\n"
    "little-endian float64, row-major) or raw:position, raw:normal,\n"
    "raw:position-normal for built-in per-vertex features.";

constexpr const char* kMapHelp =
    "Correspondence files: one `source_idx target_idx` pair per line, '#' lines\n"
    "are comments. Vertex ids are 0-based.";

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoError("no such file: " + path);
}

std::optional<MeshFormat> mesh_format_option(const std::string& name) {
  if (name.empty()) return std::nullopt;
  auto f = parse_mesh_format(name);
  if (!f) throw ValidationError("unknown mesh format '" + name + "'");
  return f;
}

bool is_raw_source(const std::string& source) { return source.rfind("raw:", 0) == 0; }

RawFeatureKind parse_raw_kind(const std::string& name) {
  if (name == "position") return RawFeatureKind::position;
  if (name == "normal") return RawFeatureKind::normal;
  if (name == "position-normal" || name == "position_normal") {
    return RawFeatureKind::position_normal;
  }
  throw ValidationError("unknown raw feature kind '" + name + "'");
}

FeatureMatrix load_features(const std::string& source, const HalfEdgeMesh& mesh) {
  if (is_raw_source(source)) return raw_features(mesh, parse_raw_kind(source.substr(4)));
  require_file(source);
  return load_descriptors(source, mesh);
}

std::vector<std::int32_t> labels_from_map(const CorrespondenceMap& map, const std::string& path) {
  std::vector<std::int32_t> labels(map.size());
  for (std::size_t v = 0; v < map.size(); ++v) {
    if (map[v] == kNoVertex) {
      throw ValidationError(path + ": vertex " + std::to_string(v) + " has no label");
    }
    labels[v] = map[v];
  }
  return labels;
}

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  auto file = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*file) throw IoError("cannot write " + path);
  return file;
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  auto file = open_output(path);
  body(*file);
  file->flush();
  if (!*file) throw IoError("failed writing " + path);
}

// Dataset entries: `mesh|features|labels` separated by ';'. Relative paths
// resolve against the config directory.
std::vector<TrainingSample> load_dataset(const std::string& spec, const fs::path& base) {
  std::vector<TrainingSample> samples;
  std::string entry;
  std::istringstream in(spec);
  auto resolve = [&](std::string p) {
    p.erase(0, p.find_first_not_of(" \t"));
    p.erase(p.find_last_not_of(" \t") + 1);
    if (is_raw_source(p) || fs::path(p).is_absolute()) return p;
    return (base / p).string();
  };
  while (std::getline(in, entry, ';')) {
    if (entry.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> parts;
    std::string part;
    std::istringstream es(entry);
    while (std::getline(es, part, '|')) parts.push_back(resolve(part));
    if (parts.size() != 3) {
      throw ValidationError("dataset entry '" + entry + "' must be mesh|features|labels");
    }
    require_file(parts[0]);
    require_file(parts[2]);
    TrainingSample s;
    s.name = parts[0];
    s.mesh = load_mesh(parts[0]);
    s.features = load_features(parts[1], s.mesh);
    s.labels = labels_from_map(load_correspondences(parts[2], s.mesh.vertex_count()), parts[2]);
    samples.push_back(std::move(s));
  }
  return samples;
}

struct RadiusOptions {
  double max_radius = 0.25;
  double step = 0.0025;

  void add_to(CLI::App* app) {
    app->add_option("--max-radius", max_radius, "largest normalized radius")->capture_default_str();
    app->add_option("--radius-step", step, "radius grid spacing")->capture_default_str();
  }
  std::vector<double> grid() const { return radius_grid(max_radius, step); }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spiralnet: spiral-serialized mesh correspondence toolkit", "spiralnet"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads; 1 is bit-reproducible")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::function<int()> action;

  // validate-mesh
  std::string vm_mesh, vm_format;
  auto* vm = app.add_subcommand("validate-mesh", "check that a mesh is a manifold triangle mesh");
  vm->add_option("mesh", vm_mesh, "OBJ or PLY file")->required();
  vm->add_option("--format", vm_format, "obj, ply-ascii or ply-binary (default: by extension)");
  vm->footer(
      "Prints `ok` with counts for a valid mesh. Otherwise prints one\n"
      "`severity<TAB>element<TAB>message` line per violation and exits 4.");
  vm->callback([&] {
    action = [&]() -> int {
      require_file(vm_mesh);
      const TriangleSoup soup = load_triangles(vm_mesh, mesh_format_option(vm_format));
      const ValidationReport report = validate_manifold(soup);
      if (!report.ok()) {
        report.print(out);
        err << "validate-mesh: " << report.violations.size() << " violations\n";
        return kValidation;
      }
      const HalfEdgeMesh mesh = HalfEdgeMesh::build(soup);
      out << "ok vertices=" << mesh.vertex_count() << " faces=" << mesh.face_count()
          << " edges=" << mesh.edge_count() << " euler=" << mesh.euler_characteristic() << '\n';
      return kOk;
    };
  });

  // spiral-dump
  std::string sd_mesh, sd_out;
  std::size_t sd_n = 0, sd_k = 0;
  std::uint64_t sd_seed = 0;
  auto* sd = app.add_subcommand("spiral-dump", "print the spiral of every vertex");
  sd->add_option("mesh", sd_mesh, "OBJ or PLY file")->required();
  auto* sd_n_opt = sd->add_option("--n", sd_n, "fixed spiral length")->check(CLI::PositiveNumber);
  auto* sd_k_opt = sd->add_option("--k", sd_k, "number of rings")->check(CLI::PositiveNumber);
  sd_n_opt->excludes(sd_k_opt);
  sd->add_option("--seed", sd_seed, "seed for the random start neighbours")->required();
  sd->add_option("--out", sd_out, "output file (default: stdout)");
  sd->footer(
      "One line per vertex, `v: id id ...`, listing the spiral of v with v\n"
      "itself first; -1 marks padding. Vertex v draws its start neighbour\n"
      "from derive_seed(seed, v).");
  sd->callback([&] {
    action = [&]() -> int {
      if (sd_n_opt->count() == 0 && sd_k_opt->count() == 0) {
        throw CLI::ValidationError("spiral-dump", "one of --n or --k is required");
      }
      require_file(sd_mesh);
      const HalfEdgeMesh mesh = load_mesh(sd_mesh);
      emit(sd_out, out, [&](std::ostream& os) {
        for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
          const auto vid = static_cast<VertexId>(v);
          Rng rng(derive_seed(sd_seed, v));
          const VertexId start = mesh.valence(vid) == 0 ? kNoVertex : random_start(mesh, vid, rng);
          const SpiralSequence s = sd_n_opt->count() ? spiral_fixed(mesh, vid, sd_n, start)
                                                     : spiral_by_ring(mesh, vid, sd_k, start);
          os << v << ':';
          for (VertexId id : s.vertices) os << ' ' << id;
          os << '\n';
        }
      });
      return kOk;
    };
  });

  // features
  auto* ft = app.add_subcommand("features", "descriptor file utilities");
  ft->require_subcommand(1);
  std::string fc_in, fc_out, fc_name, fc_mesh;
  auto* fc = ft->add_subcommand("convert", "convert between text tables and VFEAT1");
  fc->add_option("--in", fc_in, "input file")->required();
  fc->add_option("--out", fc_out, "output file")->required();
  fc->add_option("--name", fc_name, "descriptor name stored in VFEAT1 (default: input stem)");
  fc->add_option("--mesh", fc_mesh, "mesh whose vertex count the rows must match");
  fc->footer(
      "A VFEAT1 input is written as a text table; any other input is read as a\n"
      "text table (one row per vertex, values separated by spaces or commas,\n"
      "'#' comments) and written as VFEAT1.");
  fc->callback([&] {
    action = [&]() -> int {
      require_file(fc_in);
      std::string magic(6, '\0');
      {
        std::ifstream probe(fc_in, std::ios::binary);
        probe.read(magic.data(), 6);
      }
      FeatureMatrix m;
      const bool from_binary = magic == "VFEAT1";
      if (from_binary) {
        m = read_descriptors(fc_in);
      } else {
        m = read_descriptor_table(fc_in, fc_name.empty() ? fs::path(fc_in).stem().string() : fc_name);
      }
      if (!fc_name.empty()) m.name = fc_name;
      if (!fc_mesh.empty()) {
        require_file(fc_mesh);
        const HalfEdgeMesh mesh = load_mesh(fc_mesh);
        if (m.rows != mesh.vertex_count()) {
          throw ValidationError(fc_in + ": " + std::to_string(m.rows) + " rows for " +
                                std::to_string(mesh.vertex_count()) + " vertices");
        }
      }
      if (from_binary) {
        emit(fc_out, out, [&](std::ostream& os) {
          os << "# " << m.name << '\n';
          for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < m.cols; ++c) os << (c ? " " : "") << format_real(m.at(r, c));
            os << '\n';
          }
        });
      } else {
        save_descriptors(m, fc_out);
      }
      out << m.rows << " x " << m.cols << " written to " << fc_out << '\n';
      return kOk;
    };
  });
  std::string fr_mesh, fr_out, fr_kind = "position";
  auto* fr = ft->add_subcommand("raw", "write built-in per-vertex features as VFEAT1");
  fr->add_option("mesh", fr_mesh, "OBJ or PLY file")->required();
  fr->add_option("--kind", fr_kind, "position, normal or position-normal")->capture_default_str();
  fr->add_option("--out", fr_out, "output VFEAT1 file")->required();
  fr->callback([&] {
    action = [&]() -> int {
      require_file(fr_mesh);
      const HalfEdgeMesh mesh = load_mesh(fr_mesh);
      const FeatureMatrix m = raw_features(mesh, parse_raw_kind(fr_kind));
      save_descriptors(m, fr_out);
      out << m.rows << " x " << m.cols << " written to " << fr_out << '\n';
      return kOk;
    };
  });

  // train
  std::string tr_config, tr_out, tr_last, tr_log;
  std::optional<std::uint64_t> tr_seed;
  std::optional<std::size_t> tr_epochs;
  bool tr_quiet = false;
  auto* tr = app.add_subcommand("train", "train a correspondence network");
  tr->add_option("--config", tr_config, "key=value training config")->required();
  tr->add_option("--out", tr_out, "checkpoint of the best epoch")->required();
  tr->add_option("--last", tr_last, "checkpoint of the final epoch");
  tr->add_option("--log", tr_log, "CSV of per-epoch losses and accuracies");
  tr->add_option("--seed", tr_seed, "overrides the config seed");
  tr->add_option("--epochs", tr_epochs, "overrides the config epoch count");
  tr->add_flag("--quiet", tr_quiet, "no per-epoch output");
  tr->footer(
      "Config keys (one key=value per line, '#' comments):\n"
      "  net=lstm|fcs epochs seed lr beta1 beta2 epsilon seq_len augment=0|1\n"
      "  distance=euclidean|geodesic normalize=0|1 dropout forget_bias classes\n"
      "  embed_width encoder_widths=a,b,c head_width\n"
      "  train=mesh|features|labels;...  validation=mesh|features|labels;...\n"
      "Relative paths resolve against the config directory. Labels use the\n"
      "correspondence file format and must cover every vertex. A seed is\n"
      "required, from the config or --seed. Best = highest validation\n"
      "accuracy (ties: lower loss), or the final epoch without validation.\n"
      "Seed streams: derive_seed(seed, s) with s = 0 init, 1 shuffle,\n"
      "2 spiral starts, 3 dropout, 4 validation spirals.\n" +
      std::string(kFeatureHelp));
  tr->callback([&] {
    action = [&]() -> int {
      require_file(tr_config);
      ConfigFile cfg = parse_train_config(tr_config);
      if (tr_seed) {
        cfg.config.seed = *tr_seed;
      } else if (!cfg.has_seed) {
        throw CLI::ValidationError("train", "a seed is required (config `seed` or --seed)");
      }
      if (tr_epochs) cfg.config.epochs = *tr_epochs;
      const fs::path base = fs::path(tr_config).parent_path();
      const auto train_it = cfg.extra.find("train");
      if (train_it == cfg.extra.end()) throw ValidationError(tr_config + ": missing `train` key");
      for (const auto& [key, value] : cfg.extra) {
        if (key != "train" && key != "validation") {
          throw ValidationError(tr_config + ": unknown key '" + key + "'");
        }
      }
      const auto training = load_dataset(train_it->second, base);
      std::vector<TrainingSample> validation;
      if (auto it = cfg.extra.find("validation"); it != cfg.extra.end()) {
        validation = load_dataset(it->second, base);
      }
      std::ostringstream log;
      log << "epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n";
      const TrainResult result = train(training, validation, cfg.config, [&](const EpochRecord& e) {
        log << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.train_accuracy)
            << ',' << (e.validation_loss ? format_real(*e.validation_loss) : "") << ','
            << (e.validation_accuracy ? format_real(*e.validation_accuracy) : "") << '\n';
        if (!tr_quiet) {
          out << "epoch " << e.epoch << " loss " << format_real(e.train_loss) << " accuracy "
              << format_real(e.train_accuracy);
          if (e.validation_accuracy) {
            out << " val_loss " << format_real(*e.validation_loss) << " val_accuracy "
                << format_real(*e.validation_accuracy);
          }
          out << '\n';
        }
      });
      save_checkpoint(result.best, tr_out);
      if (!tr_last.empty()) save_checkpoint(result.last, tr_last);
      if (!tr_log.empty()) emit(tr_log, out, [&](std::ostream& os) { os << log.str(); });
      out << "best epoch " << result.best.meta.epoch << " written to " << tr_out << '\n';
      return kOk;
    };
  });

  // infer
  std::string in_ck, in_mesh, in_features, in_out;
  std::uint64_t in_seed = 0;
  auto* inf = app.add_subcommand("infer", "predict template vertices for a mesh");
  inf->add_option("--checkpoint", in_ck, "trained checkpoint")->required();
  inf->add_option("--mesh", in_mesh, "source mesh")->required();
  inf->add_option("--features", in_features, "feature source")->required();
  inf->add_option("--seed", in_seed, "seed for the random spiral starts")->required();
  inf->add_option("--out", in_out, "correspondence file (default: stdout)");
  inf->footer(std::string(kFeatureHelp) + "\n" + kMapHelp);
  inf->callback([&] {
    action = [&]() -> int {
      require_file(in_ck);
      require_file(in_mesh);
      const Checkpoint ck = load_checkpoint(in_ck);
      const HalfEdgeMesh mesh = load_mesh(in_mesh);
      const FeatureMatrix features = load_features(in_features, mesh);
      const Prediction p = infer(ck, mesh, features, in_seed);
      if (in_out.empty()) {
        for (std::size_t v = 0; v < p.targets.size(); ++v) out << v << ' ' << p.targets[v] << '\n';
      } else {
        save_correspondences(p.targets, in_out);
      }
      return kOk;
    };
  });

  // eval
  std::string ev_pred, ev_gt, ev_mesh, ev_out;
  RadiusOptions ev_radii;
  auto* ev = app.add_subcommand("eval", "geodesic error curve of a prediction");
  ev->add_option("--pred", ev_pred, "predicted correspondences")->required();
  ev->add_option("--gt", ev_gt, "ground-truth correspondences")->required();
  ev->add_option("--mesh", ev_mesh, "target (template) mesh")->required();
  ev->add_option("--out", ev_out, "curve CSV (default: stdout)");
  ev_radii.add_to(ev);
  ev->footer(std::string(kMapHelp) +
             "\nErrors are edge-graph geodesic distances on the target mesh divided by\n"
             "sqrt(surface area). Output: `radius,fraction` rows and `# auc=<value>`.");
  ev->callback([&] {
    action = [&]() -> int {
      require_file(ev_pred);
      require_file(ev_gt);
      require_file(ev_mesh);
      const HalfEdgeMesh target = load_mesh(ev_mesh);
      CorrespondenceMap pred = load_correspondences(ev_pred, 0);
      CorrespondenceMap gt = load_correspondences(ev_gt, 0);
      const std::size_t n = std::max(pred.size(), gt.size());
      pred.resize(n, kNoVertex);
      gt.resize(n, kNoVertex);
      const GeodesicErrorCurve curve = evaluate(pred, gt, target, ev_radii.grid());
      emit(ev_out, out, [&](std::ostream& os) { write_curve_csv(curve, os); });
      return kOk;
    };
  });

  // sweep
  std::string sw_ck, sw_mesh, sw_features, sw_gt, sw_target, sw_out;
  std::size_t sw_runs = 1;
  std::uint64_t sw_seed = 0;
  RadiusOptions sw_radii;
  auto* sw = app.add_subcommand("sweep", "spread of error curves over seeded inference runs");
  sw->add_option("--checkpoint", sw_ck, "trained checkpoint")->required();
  sw->add_option("--mesh", sw_mesh, "source mesh")->required();
  sw->add_option("--features", sw_features, "feature source")->required();
  sw->add_option("--gt", sw_gt, "ground-truth correspondences")->required();
  sw->add_option("--target-mesh", sw_target, "target mesh (default: --mesh)");
  sw->add_option("--runs", sw_runs, "number of inference runs")->required()->check(CLI::PositiveNumber);
  sw->add_option("--seed", sw_seed, "base seed; run r uses derive_seed(seed, r)")->required();
  sw->add_option("--out", sw_out, "sweep CSV (default: stdout)");
  sw_radii.add_to(sw);
  sw->footer(std::string(kFeatureHelp) + "\n" + kMapHelp +
             "\nOutput: `radius,mean,min,max` rows across runs.");
  sw->callback([&] {
    action = [&]() -> int {
      require_file(sw_ck);
      require_file(sw_mesh);
      require_file(sw_gt);
      if (!sw_target.empty()) require_file(sw_target);
      const Checkpoint ck = load_checkpoint(sw_ck);
      const HalfEdgeMesh mesh = load_mesh(sw_mesh);
      const HalfEdgeMesh target = sw_target.empty() ? mesh : load_mesh(sw_target);
      const FeatureMatrix features = load_features(sw_features, mesh);
      const CorrespondenceMap gt = load_correspondences(sw_gt, mesh.vertex_count());
      const RobustnessSweep sweep =
          robustness_sweep(ck, mesh, features, gt, target, sw_runs, sw_seed, sw_radii.grid());
      emit(sw_out, out, [&](std::ostream& os) { write_sweep_csv(sweep, os); });
      return kOk;
    };
  });

  // param-count
  std::string pc_net = "lstm";
  std::size_t pc_input = 544, pc_seq = 30, pc_classes = 6890;
  bool pc_layers = false;
  auto* pc = app.add_subcommand("param-count", "closed-form parameter count of a network");
  pc->add_option("--net", pc_net, "lstm or fcs")->capture_default_str();
  pc->add_option("--input-dim", pc_input, "per-step input dimension")->capture_default_str();
  pc->add_option("--seq-len", pc_seq, "spiral length N")->capture_default_str();
  pc->add_option("--classes", pc_classes, "template vertex count")->capture_default_str();
  pc->add_flag("--layers", pc_layers, "print per-layer counts before the total");
  pc->callback([&] {
    action = [&]() -> int {
      const auto kind = parse_network_kind(pc_net);
      if (!kind) throw CLI::ValidationError("--net", "expected lstm or fcs");
      const NetworkSpec spec = *kind == NetworkKind::lstm_net
                                   ? NetworkSpec::lstm_net(pc_input, pc_seq, pc_classes)
                                   : NetworkSpec::fcs_net(pc_input, pc_seq, pc_classes);
      spec.validate();
      if (pc_layers) {
        for (const auto& l : layer_param_counts(spec)) out << l.name << ' ' << l.count << '\n';
        out << "total ";
      }
      out << count_params(spec) << '\n';
      return kOk;
    };
  });

  // grad-check
  std::string gc_net = "lstm-cell";
  std::uint64_t gc_seed = 0;
  std::size_t gc_seeds = 1;
  std::optional<double> gc_step, gc_tolerance, gc_floor;
  std::optional<int> gc_order;
  auto* gc = app.add_subcommand("grad-check", "compare backprop against central differences");
  gc->add_option("--net", gc_net, "lstm-cell, lstm or fcs")->capture_default_str();
  gc->add_option("--seed", gc_seed, "first fixture seed")->capture_default_str();
  gc->add_option("--seeds", gc_seeds, "number of consecutive seeds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc->add_option("--step", gc_step, "finite-difference step");
  gc->add_option("--tolerance", gc_tolerance, "max relative error");
  gc->add_option("--floor", gc_floor, "relative-error denominator floor");
  gc->add_option("--order", gc_order, "stencil order, 2 or 4");
  gc->footer(
      "lstm-cell checks a ragged LSTM sequence; lstm and fcs check a narrow\n"
      "network on a 2 x 5 grid strip. Relative error is |a - n| / max(|a|, |n|, floor).\n"
      "Defaults: lstm-cell order 4, step 1e-3, floor 1e-6, tolerance 1e-5;\n"
      "networks order 2, step 1e-5, floor 1e-6, tolerance 1e-4.\n"
      "Exits 5 when any seed exceeds the tolerance.");
  gc->callback([&] {
    action = [&]() -> int {
      std::optional<NetworkKind> kind;
      if (gc_net != "lstm-cell") {
        kind = parse_network_kind(gc_net);
        if (!kind) throw CLI::ValidationError("--net", "expected lstm-cell, lstm or fcs");
      }
      GradCheckOptions gc_opts = kind ? network_check_options() : lstm_sequence_check_options();
      if (gc_step) gc_opts.step = *gc_step;
      if (gc_tolerance) gc_opts.tolerance = *gc_tolerance;
      if (gc_floor) gc_opts.denominator_floor = *gc_floor;
      if (gc_order) gc_opts.order = *gc_order;
      double worst = 0.0;
      for (std::size_t i = 0; i < gc_seeds; ++i) {
        const std::uint64_t seed = gc_seed + i;
        const GradCheckReport r = kind ? check_network_gradients(*kind, seed, gc_opts)
                                       : check_lstm_sequence_gradients(seed, gc_opts);
        out << "seed " << seed << " max_rel_error " << format_real(r.max_rel_error) << '\n';
        worst = std::max(worst, r.max_rel_error);
      }
      const bool passed = worst < gc_opts.tolerance;
      out << (passed ? "PASS" : "FAIL") << " worst " << format_real(worst) << " tolerance "
          << format_real(gc_opts.tolerance) << '\n';
      if (!passed) {
        err << "grad-check: relative error " << format_real(worst) << " exceeds "
            << format_real(gc_opts.tolerance) << '\n';
        return kNumeric;
      }
      return kOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    set_thread_count(threads);
    return action ? action() : kUsage;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::io: return kIo;
      case ErrorKind::validation: return kValidation;
      case ErrorKind::numeric: return kNumeric;
    }
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace spiralnet::cli
