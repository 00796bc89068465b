#include "spiralnet/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "spiralnet/error.hpp"

namespace spiralnet {

namespace {

// Seed streams derived from TrainConfig::seed.
enum SeedStream : std::uint64_t {
  kInitStream = 0,
  kShuffleStream = 1,
  kSpiralStream = 2,
  kDropoutStream = 3,
  kValidationStream = 4,
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& value, const std::string& source) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError(source + ": bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value, const std::string& source) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ValidationError(source + ": bad boolean '" + value + "' for key '" + key + "'");
}

void check_sample(const TrainingSample& s, std::size_t classes, std::size_t dim) {
  if (s.features.rows != s.mesh.vertex_count()) {
    throw ValidationError(s.name + ": " + std::to_string(s.features.rows) + " feature rows for " +
                          std::to_string(s.mesh.vertex_count()) + " vertices");
  }
  if (s.features.cols != dim) {
    throw ValidationError(s.name + ": feature dimension " + std::to_string(s.features.cols) +
                          " differs from " + std::to_string(dim));
  }
  if (s.labels.size() != s.mesh.vertex_count()) {
    throw ValidationError(s.name + ": " + std::to_string(s.labels.size()) + " labels for " +
                          std::to_string(s.mesh.vertex_count()) + " vertices");
  }
  for (std::size_t v = 0; v < s.labels.size(); ++v) {
    if (s.labels[v] < 0 || static_cast<std::size_t>(s.labels[v]) >= classes) {
      throw ValidationError(s.name + ": label " + std::to_string(s.labels[v]) + " of vertex " +
                            std::to_string(v) + " out of range for " + std::to_string(classes) +
                            " classes");
    }
  }
}

}  // namespace

CorrespondenceMap load_correspondences(const std::filesystem::path& path,
                                       std::size_t vertex_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CorrespondenceMap map(vertex_count, kNoVertex);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls(t);
    long long source = 0, target = 0;
    std::string extra;
    if (!(ls >> source >> target) || (ls >> extra)) {
      throw ParseError(path.string(), lineno, "expected 'source_idx target_idx'");
    }
    if (source < 0 || source > std::numeric_limits<VertexId>::max() ||
        (vertex_count != 0 && static_cast<std::size_t>(source) >= vertex_count)) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": source vertex " +
                            std::to_string(source) + " out of range");
    }
    if (target < 0 || target > std::numeric_limits<VertexId>::max()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": target vertex " +
                            std::to_string(target) + " out of range");
    }
    if (static_cast<std::size_t>(source) >= map.size()) {
      map.resize(static_cast<std::size_t>(source) + 1, kNoVertex);
    }
    auto& slot = map[static_cast<std::size_t>(source)];
    if (slot != kNoVertex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": source vertex " +
                            std::to_string(source) + " listed twice");
    }
    slot = static_cast<VertexId>(target);
  }
  return map;
}

void save_correspondences(const CorrespondenceMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t v = 0; v < map.size(); ++v) {
    if (map[v] != kNoVertex) out << v << ' ' << map[v] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ConfigFile parse_train_config_text(const std::string& text, const std::string& source) {
  ConfigFile file;
  TrainConfig& c = file.config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto size = [&] { return parse_value<std::size_t>(key, value, source); };
    auto real = [&] { return parse_value<double>(key, value, source); };
    if (key == "net") {
      const auto kind = parse_network_kind(value);
      if (!kind) throw ValidationError(source + ": unknown network '" + value + "'");
      c.kind = *kind;
    } else if (key == "epochs") {
      c.epochs = size();
    } else if (key == "seed") {
      c.seed = parse_value<std::uint64_t>(key, value, source);
      file.has_seed = true;
    } else if (key == "lr") {
      c.adam.lr = real();
    } else if (key == "beta1") {
      c.adam.beta1 = real();
    } else if (key == "beta2") {
      c.adam.beta2 = real();
    } else if (key == "epsilon") {
      c.adam.epsilon = real();
    } else if (key == "seq_len" || key == "N") {
      c.seq_len = size();
    } else if (key == "augment") {
      c.augment = parse_bool(key, value, source);
    } else if (key == "distance") {
      if (value == "euclidean") {
        c.distance = CenterDistance::euclidean;
      } else if (value == "geodesic") {
        c.distance = CenterDistance::geodesic;
      } else {
        throw ValidationError(source + ": distance must be euclidean or geodesic");
      }
    } else if (key == "normalize") {
      c.normalize = parse_bool(key, value, source);
    } else if (key == "dropout") {
      c.dropout = real();
    } else if (key == "forget_bias") {
      c.forget_bias = real();
    } else if (key == "classes") {
      c.classes = size();
    } else if (key == "embed_width") {
      c.embed_width = size();
    } else if (key == "head_width") {
      c.head_width = size();
    } else if (key == "encoder_widths") {
      std::string v = value;
      std::replace(v.begin(), v.end(), ',', ' ');
      std::istringstream ws(v);
      std::array<std::size_t, 3> widths{};
      std::string extra;
      for (auto& w : widths) {
        if (!(ws >> w)) throw ValidationError(source + ": encoder_widths needs three integers");
      }
      if (ws >> extra) throw ValidationError(source + ": encoder_widths needs three integers");
      c.encoder_widths = widths;
    } else {
      file.extra[key] = value;
    }
  }
  return file;
}

ConfigFile parse_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config_text(ss.str(), path.string());
}

NetworkSpec make_network_spec(const TrainConfig& config, std::size_t feature_dim,
                              std::size_t classes) {
  const std::size_t input_dim = feature_dim + (config.augment ? 2 : 0);
  NetworkSpec spec = config.kind == NetworkKind::lstm_net
                         ? NetworkSpec::lstm_net(input_dim, config.seq_len, classes)
                         : NetworkSpec::fcs_net(input_dim, config.seq_len, classes);
  if (config.embed_width) spec.embed_width = *config.embed_width;
  if (config.encoder_widths) spec.encoder_widths = *config.encoder_widths;
  if (config.head_width) spec.head_width = *config.head_width;
  spec.dropout = config.dropout;
  spec.forget_bias = config.forget_bias;
  spec.validate();
  return spec;
}

SerializedBatch prepare_batch(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                              const FeatureMatrix& features, std::uint64_t seed) {
  const std::size_t expected =
      checkpoint.model.spec().input_dim - (checkpoint.augment ? 2 : 0);
  if (features.cols != expected) {
    throw ValidationError("checkpoint expects " + std::to_string(expected) +
                          "-dimensional features, got " + std::to_string(features.cols));
  }
  Rng rng(seed);
  return serialize_batch(mesh, checkpoint.normalization.apply(features),
                         checkpoint.serialize_options(), rng);
}

Prediction infer(const Checkpoint& checkpoint, const HalfEdgeMesh& mesh,
                 const FeatureMatrix& features, std::uint64_t seed, bool keep_distribution) {
  const SerializedBatch batch = prepare_batch(checkpoint, mesh, features, seed);
  Tensor probs = checkpoint.model.predict(batch);
  Prediction p;
  for (auto c : argmax_rows(probs)) p.targets.push_back(static_cast<VertexId>(c));
  if (keep_distribution) p.distribution = std::move(probs);
  return p;
}

TrainResult train(const std::vector<TrainingSample>& training,
                  const std::vector<TrainingSample>& validation, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (training.empty()) throw ValidationError("train: empty training set");
  if (config.epochs == 0) throw ValidationError("train: epochs must be >= 1");

  std::size_t classes = config.classes;
  if (classes == 0) {
    for (const auto& s : training) {
      for (auto l : s.labels) classes = std::max(classes, static_cast<std::size_t>(std::max(l, 0)) + 1);
    }
  }
  const std::size_t dim = training.front().features.cols;
  for (const auto& s : training) check_sample(s, classes, dim);
  for (const auto& s : validation) check_sample(s, classes, dim);

  Checkpoint ck;
  ck.augment = config.augment;
  ck.distance = config.distance;
  ck.meta.seed = config.seed;
  ck.adam.config = config.adam;
  if (config.normalize) {
    std::vector<const FeatureMatrix*> mats;
    for (const auto& s : training) mats.push_back(&s.features);
    ck.normalization = NormalizationStats::compute(mats);
  }
  const NetworkSpec spec = make_network_spec(config, dim, classes);
  {
    Rng init(derive_seed(config.seed, kInitStream));
    ck.model = CorrespondenceModel::build(spec, init);
  }

  std::vector<FeatureMatrix> train_features, val_features;
  for (const auto& s : training) train_features.push_back(ck.normalization.apply(s.features));
  for (const auto& s : validation) val_features.push_back(ck.normalization.apply(s.features));

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng spiral_rng(derive_seed(config.seed, kSpiralStream));
  Rng dropout_rng(derive_seed(config.seed, kDropoutStream));
  const std::uint64_t validation_seed = derive_seed(config.seed, kValidationStream);
  const SerializeOptions options = ck.serialize_options();

  // Validation batches use fixed starts so epochs are compared on equal terms.
  std::vector<SerializedBatch> val_batches;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    Rng rng(derive_seed(validation_seed, i));
    val_batches.push_back(serialize_batch(validation[i].mesh, val_features[i], options, rng));
  }

  TrainResult result;
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  bool have_best = false;
  double best_acc = 0.0, best_loss = 0.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochRecord record;
    record.epoch = epoch;
    double loss_sum = 0.0, acc_sum = 0.0;
    std::size_t vertex_sum = 0;
    for (std::size_t idx : order) {
      const auto& sample = training[idx];
      const SerializedBatch batch =
          serialize_batch(sample.mesh, train_features[idx], options, spiral_rng);
      const auto step = ck.model.forward_backward(batch, sample.labels, Mode::train, dropout_rng);
      adam_step(ck.model.parameters(), ck.adam);
      const auto n = static_cast<double>(batch.vertices);
      loss_sum += step.loss * n;
      acc_sum += step.accuracy * n;
      vertex_sum += batch.vertices;
    }
    record.train_loss = loss_sum / static_cast<double>(vertex_sum);
    record.train_accuracy = acc_sum / static_cast<double>(vertex_sum);
    ck.meta.epoch = epoch;
    ck.meta.train_loss = record.train_loss;

    if (!val_batches.empty()) {
      double vloss = 0.0, vacc = 0.0;
      std::size_t vcount = 0;
      for (std::size_t i = 0; i < val_batches.size(); ++i) {
        const Tensor probs = ck.model.predict(val_batches[i]);
        const auto predicted = argmax_rows(probs);
        vloss += cross_entropy(probs, validation[i].labels) *
                 static_cast<double>(val_batches[i].vertices);
        for (std::size_t v = 0; v < predicted.size(); ++v) {
          vacc += predicted[v] == validation[i].labels[v] ? 1.0 : 0.0;
        }
        vcount += val_batches[i].vertices;
      }
      record.validation_loss = vloss / static_cast<double>(vcount);
      record.validation_accuracy = vacc / static_cast<double>(vcount);
      ck.meta.validation_loss = *record.validation_loss;
      ck.meta.validation_accuracy = *record.validation_accuracy;
      const bool better = !have_best || *record.validation_accuracy > best_acc ||
                          (*record.validation_accuracy == best_acc && *record.validation_loss < best_loss);
      if (better) {
        have_best = true;
        best_acc = *record.validation_accuracy;
        best_loss = *record.validation_loss;
        result.best = ck;
      }
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.last = ck;
  if (!have_best) result.best = ck;
  return result;
}

}  // namespace spiralnet
