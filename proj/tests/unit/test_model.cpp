#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "spiralnet/checkpoint.hpp"
#include "spiralnet/error.hpp"
#include "spiralnet/grad_fixtures.hpp"
#include "spiralnet/model.hpp"
#include "spiralnet/primitives.hpp"
#include "spiralnet/train.hpp"

using namespace spiralnet;

namespace {

NetworkSpec small_spec(NetworkKind kind, std::size_t input_dim, std::size_t seq_len,
                       std::size_t classes) {
  NetworkSpec s = kind == NetworkKind::lstm_net ? NetworkSpec::lstm_net(input_dim, seq_len, classes)
                                                : NetworkSpec::fcs_net(input_dim, seq_len, classes);
  s.embed_width = 6;
  s.encoder_widths = {5, 7, 4};
  s.head_width = 9;
  return s;
}

TrainingSample grid_sample(std::size_t rows, std::size_t cols, std::string name) {
  TrainingSample s;
  s.name = std::move(name);
  s.mesh = HalfEdgeMesh::build(make_grid(rows, cols));
  s.features = raw_features(s.mesh, RawFeatureKind::position);
  s.labels.resize(s.mesh.vertex_count());
  std::iota(s.labels.begin(), s.labels.end(), 0);
  return s;
}

TrainConfig small_config(std::uint64_t seed, std::size_t epochs) {
  TrainConfig c;
  c.seed = seed;
  c.epochs = epochs;
  c.seq_len = 7;
  c.augment = true;
  c.dropout = 0.3;
  c.adam.lr = 0.01;
  c.embed_width = 8;
  c.encoder_widths = std::array<std::size_t, 3>{8, 8, 8};
  c.head_width = 16;
  return c;
}

std::string checkpoint_bytes(const Checkpoint& c) {
  std::ostringstream out;
  write_checkpoint(c, out);
  return out.str();
}

// The same mesh with vertex perm[i] renamed to i: rows move and spiral ids
// are relabelled.
SerializedBatch permute_rows(const SerializedBatch& b, const std::vector<std::size_t>& perm) {
  SerializedBatch out = b;
  std::vector<VertexId> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<VertexId>(i);
  const std::size_t width = b.steps * b.dim;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy_n(b.inputs.begin() + static_cast<std::ptrdiff_t>(perm[i] * width), width,
                out.inputs.begin() + static_cast<std::ptrdiff_t>(i * width));
    std::copy_n(b.mask.begin() + static_cast<std::ptrdiff_t>(perm[i] * b.steps), b.steps,
                out.mask.begin() + static_cast<std::ptrdiff_t>(i * b.steps));
    for (std::size_t t = 0; t < b.steps; ++t) {
      const VertexId u = b.spiral_at(perm[i], t);
      out.spirals[i * b.steps + t] = u == kNoVertex ? kNoVertex : inv[static_cast<std::size_t>(u)];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("default layer stacks have the reference parameter counts") {
  const auto lstm = NetworkSpec::lstm_net(544, 30, 6890);
  const auto layers = layer_param_counts(lstm);
  REQUIRE(layers.size() == 6);
  const std::vector<std::pair<std::string, std::size_t>> expect = {
      {"FC16", 8720},       {"LSTM150", 100200}, {"LSTM200", 280800},
      {"LSTM250", 451000},  {"FC256", 64256},    {"FC6890", 1770730}};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(layers[i].name == expect[i].first);
    CHECK(layers[i].count == expect[i].second);
  }
  CHECK(count_params(lstm) == 2675706);
  // The LSTM stack does not depend on the sequence length.
  CHECK(count_params(NetworkSpec::lstm_net(544, 15, 6890)) == 2675706);

  const auto fcs = NetworkSpec::fcs_net(544, 20, 6890);
  CHECK(count_params(fcs) == 2763356);
  // Closed form: each FCS layer sees the concatenation of N input vectors.
  auto fc = [](std::size_t i, std::size_t o) { return i * o + o; };
  const std::size_t n = 20;
  CHECK(count_params(fcs) == fc(544, 16) + fc(n * 16, 100) + fc(n * 100, 150) +
                                 fc(n * 150, 200) + fc(200, 256) + fc(256, 6890));

  NetworkSpec one = NetworkSpec::lstm_net(2, 1, 3);
  CHECK(layer_param_counts(one).back().count == 256 * 3 + 3);
  CHECK(fc(2, 3) == 9);
}

TEST_CASE("allocated parameters agree with the closed forms") {
  Rng rng(1);
  for (auto kind : {NetworkKind::lstm_net, NetworkKind::fcs_net}) {
    for (std::size_t n : {1u, 4u, 9u}) {
      const auto spec = small_spec(kind, 5, n, 11);
      const auto model = CorrespondenceModel::build(spec, rng);
      CHECK(model.parameter_count() == count_params(spec));
      auto copy = model;
      CHECK(count_scalars(copy.parameters()) == count_params(spec));
    }
  }
  const auto full = CorrespondenceModel(NetworkSpec::lstm_net(544, 30, 6890));
  CHECK(full.parameter_count() == 2675706);
  const auto full_fcs = CorrespondenceModel(NetworkSpec::fcs_net(544, 20, 6890));
  CHECK(full_fcs.parameter_count() == 2763356);
}

TEST_CASE("network spec validation and kind names") {
  auto spec = NetworkSpec::lstm_net(4, 5, 3);
  CHECK(spec.dropout == 0.3);
  spec.classes = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = NetworkSpec::lstm_net(4, 5, 3);
  spec.dropout = 1.0;
  CHECK_THROWS_AS(CorrespondenceModel{spec}, ValidationError);
  spec = NetworkSpec::lstm_net(4, 5, 3);
  spec.encoder_widths[1] = 0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  CHECK(parse_network_kind("lstm") == NetworkKind::lstm_net);
  CHECK(parse_network_kind("fcs-net") == NetworkKind::fcs_net);
  CHECK_FALSE(parse_network_kind("cnn").has_value());
  CHECK(parse_network_kind(to_string(NetworkKind::fcs_net)) == NetworkKind::fcs_net);
}

TEST_CASE("full-network gradients match finite differences over 20 seeds") {
  for (auto kind : {NetworkKind::lstm_net, NetworkKind::fcs_net}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CAPTURE(to_string(kind));
      CAPTURE(seed);
      const auto report = check_network_gradients(kind, seed);
      CHECK(report.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("outputs are valid distributions and follow vertex permutations") {
  const auto mesh = HalfEdgeMesh::build(make_grid(4, 5));
  const auto features = raw_features(mesh, RawFeatureKind::position_normal);
  for (auto kind : {NetworkKind::lstm_net, NetworkKind::fcs_net}) {
    Rng rng(3);
    const auto model = CorrespondenceModel::build(small_spec(kind, 8, 6, 20), rng);
    Rng srng(5);
    const auto batch = serialize_batch(mesh, features, {6, true, CenterDistance::euclidean}, srng);
    const Tensor probs = model.predict(batch);
    REQUIRE(probs.rows() == 20);
    for (std::size_t v = 0; v < 20; ++v) {
      double s = 0;
      for (double p : probs.row(v)) s += p;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    Rng prng(11);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[prng.uniform_index(i + 1)]);
    const Tensor permuted = model.predict(permute_rows(batch, perm));
    for (std::size_t i = 0; i < 20; ++i) {
      for (std::size_t c = 0; c < 20; ++c) CHECK(permuted(i, c) == probs(perm[i], c));
    }
  }
}

TEST_CASE("eval mode is deterministic and ignores the rng") {
  const auto mesh = HalfEdgeMesh::build(make_grid(3, 4));
  const auto features = raw_features(mesh, RawFeatureKind::position);
  Rng rng(8);
  const auto model = CorrespondenceModel::build(small_spec(NetworkKind::lstm_net, 3, 5, 12), rng);
  Rng srng(2);
  const auto batch = serialize_batch(mesh, features, {5, false, CenterDistance::euclidean}, srng);
  Rng a(1), b(999);
  CHECK(model.forward(batch, Mode::eval, a) == model.forward(batch, Mode::eval, b));
  Rng c(1), d(2);
  CHECK(model.forward(batch, Mode::train, c) != model.forward(batch, Mode::train, d));
}

TEST_CASE("masked pad steps leave LSTM outputs unchanged") {
  const auto mesh = HalfEdgeMesh::build(make_icosahedron());
  const auto features = raw_features(mesh, RawFeatureKind::position);
  Rng rng(4);
  auto short_model = CorrespondenceModel::build(small_spec(NetworkKind::lstm_net, 3, 5, 12), rng);
  CorrespondenceModel long_model(small_spec(NetworkKind::lstm_net, 3, 9, 12));
  auto src = short_model.parameters();
  auto dst = long_model.parameters();
  REQUIRE(src.size() == dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].value = *src[i].value;

  Rng srng(6);
  const auto batch = serialize_batch(mesh, features, {5, false, CenterDistance::euclidean}, srng);
  SerializedBatch padded = batch;
  padded.steps = 9;
  padded.inputs.assign(12 * 9 * 3, 0.0);
  padded.mask.assign(12 * 9, 0);
  padded.spirals.assign(12 * 9, kNoVertex);
  for (std::size_t v = 0; v < 12; ++v) {
    for (std::size_t t = 0; t < 5; ++t) {
      padded.mask[v * 9 + t] = batch.mask[v * 5 + t];
      padded.spirals[v * 9 + t] = batch.spirals[v * 5 + t];
      for (std::size_t d = 0; d < 3; ++d) padded.inputs[(v * 9 + t) * 3 + d] = batch.step(v, t)[d];
    }
    // Junk in padded inputs must not matter either.
    for (std::size_t t = 5; t < 9; ++t) padded.inputs[(v * 9 + t) * 3] = 1e3;
  }
  CHECK(long_model.predict(padded) == short_model.predict(batch));
  CHECK(short_model.predict(padded) == short_model.predict(batch));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const auto sample = grid_sample(3, 4, "grid");
  auto config = small_config(21, 3);
  config.normalize = true;
  const auto result = train({sample}, {}, config);
  const Checkpoint& ck = result.last;
  const std::string bytes = checkpoint_bytes(ck);
  std::istringstream in(bytes);
  const Checkpoint back = read_checkpoint(in);
  CHECK(checkpoint_bytes(back) == bytes);
  CHECK(back.model.spec() == ck.model.spec());
  CHECK(back.adam.step == ck.adam.step);
  CHECK(back.normalization.mean == ck.normalization.mean);
  CHECK(back.meta.seed == 21);
  CHECK(back.augment);
  for (std::uint64_t seed : {0u, 7u}) {
    const auto p1 = infer(ck, sample.mesh, sample.features, seed, true);
    const auto p2 = infer(back, sample.mesh, sample.features, seed, true);
    CHECK(p1.targets == p2.targets);
    CHECK(p1.distribution == p2.distribution);
  }

  oracle::TempDir dir("ckpt");
  save_checkpoint(ck, dir.path() / "a.ckpt");
  CHECK(oracle::read_file(dir.path() / "a.ckpt") == bytes);
  CHECK(checkpoint_bytes(load_checkpoint(dir.path() / "a.ckpt")) == bytes);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.ckpt"), IoError);

  auto parse = [](const std::string& text) {
    std::istringstream s(text);
    return read_checkpoint(s);
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("not-a-checkpoint 1\n"), ParseError);
  CHECK_THROWS_AS(parse("spiralnet-checkpoint 99\n"), ParseError);
  CHECK_THROWS_AS(parse(bytes.substr(0, bytes.size() - 16)), ParseError);
  const auto header_end = bytes.find("payload");
  CHECK_THROWS_AS(parse(bytes.substr(0, header_end)), ParseError);
}

TEST_CASE("training is reproducible and records its history") {
  const auto a = grid_sample(3, 4, "a");
  const auto b = grid_sample(3, 4, "b");
  auto config = small_config(5, 4);
  std::vector<EpochRecord> seen;
  const auto r1 = train({a, b}, {a}, config, [&](const EpochRecord& e) { seen.push_back(e); });
  const auto r2 = train({a, b}, {a}, config);
  CHECK(checkpoint_bytes(r1.best) == checkpoint_bytes(r2.best));
  CHECK(checkpoint_bytes(r1.last) == checkpoint_bytes(r2.last));
  REQUIRE(r1.history.size() == 4);
  REQUIRE(seen.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(seen[e].epoch == e + 1);
    CHECK(seen[e].validation_accuracy.has_value());
  }
  CHECK(r1.last.meta.epoch == 4);
  CHECK(r1.last.adam.step == 8);

  // Best: highest validation accuracy, ties broken by lower loss.
  std::size_t best = 0;
  for (std::size_t e = 1; e < 4; ++e) {
    const auto& h = r1.history[e];
    const auto& cur = r1.history[best];
    if (*h.validation_accuracy > *cur.validation_accuracy ||
        (*h.validation_accuracy == *cur.validation_accuracy &&
         *h.validation_loss < *cur.validation_loss)) {
      best = e;
    }
  }
  CHECK(r1.best.meta.epoch == best + 1);
  CHECK(r1.best.meta.validation_accuracy == *r1.history[best].validation_accuracy);

  auto other = config;
  other.seed = 6;
  CHECK(checkpoint_bytes(train({a, b}, {}, other).last) != checkpoint_bytes(r1.last));

  const auto no_val = train({a}, {}, config);
  CHECK(checkpoint_bytes(no_val.best) == checkpoint_bytes(no_val.last));
}

TEST_CASE("training on contradictory labels still lowers the loss") {
  auto a = grid_sample(3, 4, "a");
  auto b = grid_sample(3, 4, "b");
  std::reverse(b.labels.begin(), b.labels.end());
  auto config = small_config(13, 10);
  config.dropout = 0.0;
  const auto r = train({a, b}, {}, config);
  CHECK(r.history.back().train_loss < r.history.front().train_loss);
}

TEST_CASE("training rejects bad inputs") {
  auto s = grid_sample(3, 3, "s");
  const auto config = small_config(1, 1);
  CHECK_THROWS_AS(train({}, {}, config), ValidationError);
  auto zero_epochs = config;
  zero_epochs.epochs = 0;
  CHECK_THROWS_AS(train({s}, {}, zero_epochs), ValidationError);
  auto bad = s;
  bad.labels[2] = -1;
  CHECK_THROWS_AS(train({bad}, {}, config), ValidationError);
  auto capped = config;
  capped.classes = 5;
  CHECK_THROWS_AS(train({s}, {}, capped), ValidationError);
  auto short_labels = s;
  short_labels.labels.pop_back();
  CHECK_THROWS_AS(train({short_labels}, {}, config), ValidationError);
}

TEST_CASE("inference is deterministic per seed and checks dimensions") {
  const auto s = grid_sample(3, 4, "s");
  const auto r = train({s}, {}, small_config(2, 2));
  const auto p1 = infer(r.last, s.mesh, s.features, 17);
  const auto p2 = infer(r.last, s.mesh, s.features, 17);
  CHECK(p1.targets == p2.targets);
  CHECK(p1.distribution.empty());
  for (VertexId t : p1.targets) CHECK((t >= 0 && t < 12));
  const auto with_dist = infer(r.last, s.mesh, s.features, 17, true);
  CHECK(with_dist.distribution.rows() == 12);
  CHECK(with_dist.targets == p1.targets);
  const auto normals = raw_features(s.mesh, RawFeatureKind::position_normal);
  CHECK_THROWS_AS(infer(r.last, s.mesh, normals, 17), ValidationError);
}

TEST_CASE("config files") {
  const auto file = parse_train_config_text(
      "# comment\n"
      "net = fcs\n"
      "epochs=12\n"
      "seed=99\n"
      "lr=0.005\n"
      "N=20\n"
      "augment=true\n"
      "distance=geodesic\n"
      "normalize=yes\n"
      "dropout=0.1\n"
      "encoder_widths=10,20,30\n"
      "train=a.obj|a.vfeat|a.map\n",
      "cfg");
  const auto& c = file.config;
  CHECK(c.kind == NetworkKind::fcs_net);
  CHECK(c.epochs == 12);
  CHECK(c.seed == 99);
  CHECK(file.has_seed);
  CHECK(c.adam.lr == 0.005);
  CHECK(c.adam.beta1 == 0.9);
  CHECK(c.seq_len == 20);
  CHECK(c.augment);
  CHECK(c.distance == CenterDistance::geodesic);
  CHECK(c.normalize);
  CHECK(c.dropout == 0.1);
  CHECK(*c.encoder_widths == std::array<std::size_t, 3>{10, 20, 30});
  CHECK(file.extra.at("train") == "a.obj|a.vfeat|a.map");

  const auto spec = make_network_spec(c, 6, 40);
  CHECK(spec.input_dim == 8);
  CHECK(spec.embed_width == 16);
  CHECK(spec.head_width == 256);
  CHECK(spec.classes == 40);

  const auto defaults = parse_train_config_text("", "empty");
  CHECK_FALSE(defaults.has_seed);
  CHECK(defaults.config.adam.lr == 0.001);
  CHECK(defaults.config.adam.beta2 == 0.999);
  CHECK(defaults.config.adam.epsilon == 1e-8);
  CHECK(defaults.config.dropout == 0.3);
  CHECK(defaults.config.seq_len == 30);

  CHECK_THROWS_AS(parse_train_config_text("epochs\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config_text("epochs=ten\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config_text("net=cnn\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config_text("augment=maybe\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config_text("encoder_widths=1,2\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config_text("distance=manhattan\n", "x"), ValidationError);
  CHECK_THROWS_AS(parse_train_config("/nonexistent/config.txt"), IoError);
}

TEST_CASE("correspondence files") {
  oracle::TempDir dir("corr");
  const auto path = dir.path() / "map.txt";
  CorrespondenceMap map = {3, kNoVertex, 0, 7};
  save_correspondences(map, path);
  CHECK(load_correspondences(path, 4) == map);
  CHECK(load_correspondences(path, 0) == CorrespondenceMap{3, kNoVertex, 0, 7});
  CHECK(load_correspondences(path, 6).size() == 6);

  oracle::write_file(path, "# header\n0 1\n\n2 2\n");
  CHECK(load_correspondences(path, 3) == CorrespondenceMap{1, kNoVertex, 2});
  oracle::write_file(path, "0 1\n0 2\n");
  CHECK_THROWS_AS(load_correspondences(path, 3), ValidationError);
  oracle::write_file(path, "5 1\n");
  CHECK_THROWS_AS(load_correspondences(path, 3), ValidationError);
  oracle::write_file(path, "0 -4\n");
  CHECK_THROWS_AS(load_correspondences(path, 3), ValidationError);
  oracle::write_file(path, "0 x\n");
  CHECK_THROWS_AS(load_correspondences(path, 3), ParseError);
  CHECK_THROWS_AS(load_correspondences(dir.path() / "none.txt", 3), IoError);
}
