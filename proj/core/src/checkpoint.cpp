#include "spiralnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "spiralnet/error.hpp"

namespace spiralnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

namespace {

constexpr char kMagic[] = "spiralnet-checkpoint";

std::string hex(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::hex);
  return std::string(buf, ptr);
}

double parse_hex(const std::string& s, const std::string& source) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source + ": bad real value '" + s + "'");
  }
  return x;
}

template <typename T>
T parse_int(const std::string& s, const std::string& source) {
  T x{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source + ": bad integer value '" + s + "'");
  }
  return x;
}

struct TensorEntry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;
};

}  // namespace

void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
  const NetworkSpec& s = ck.model.spec();
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "kind " << to_string(s.kind) << '\n'
      << "input_dim " << s.input_dim << '\n'
      << "seq_len " << s.seq_len << '\n'
      << "embed_width " << s.embed_width << '\n'
      << "encoder_widths " << s.encoder_widths[0] << ',' << s.encoder_widths[1] << ','
      << s.encoder_widths[2] << '\n'
      << "head_width " << s.head_width << '\n'
      << "classes " << s.classes << '\n'
      << "dropout " << hex(s.dropout) << '\n'
      << "forget_bias " << hex(s.forget_bias) << '\n'
      << "augment " << (ck.augment ? 1 : 0) << '\n'
      << "distance " << (ck.distance == CenterDistance::euclidean ? "euclidean" : "geodesic") << '\n'
      << "seed " << ck.meta.seed << '\n'
      << "epoch " << ck.meta.epoch << '\n'
      << "train_loss " << hex(ck.meta.train_loss) << '\n'
      << "validation_loss " << hex(ck.meta.validation_loss) << '\n'
      << "validation_accuracy " << hex(ck.meta.validation_accuracy) << '\n'
      << "adam_step " << ck.adam.step << '\n'
      << "adam_lr " << hex(ck.adam.config.lr) << '\n'
      << "adam_beta1 " << hex(ck.adam.config.beta1) << '\n'
      << "adam_beta2 " << hex(ck.adam.config.beta2) << '\n'
      << "adam_epsilon " << hex(ck.adam.config.epsilon) << '\n';

  std::vector<std::pair<std::string, const Tensor*>> tensors = ck.model.named_tensors();
  const std::size_t n_model = tensors.size();
  if (!ck.adam.m.empty()) {
    if (ck.adam.m.size() != n_model || ck.adam.v.size() != n_model) {
      throw ValidationError("checkpoint: Adam state does not match the model parameters");
    }
    for (std::size_t i = 0; i < n_model; ++i) tensors.emplace_back("adam.m." + tensors[i].first, &ck.adam.m[i]);
    for (std::size_t i = 0; i < n_model; ++i) tensors.emplace_back("adam.v." + tensors[i].first, &ck.adam.v[i]);
  }
  Tensor norm_mean, norm_std;
  if (!ck.normalization.empty()) {
    norm_mean = Tensor({ck.normalization.mean.size()}, ck.normalization.mean);
    norm_std = Tensor({ck.normalization.stddev.size()}, ck.normalization.stddev);
    tensors.emplace_back("norm.mean", &norm_mean);
    tensors.emplace_back("norm.std", &norm_std);
  }

  std::size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    out << "tensor " << name << ' ' << t->rank();
    for (auto d : t->shape()) out << ' ' << d;
    out << ' ' << offset << '\n';
    offset += t->size();
  }
  out << "payload " << offset << '\n';
  for (const auto& [name, t] : tensors) {
    out.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * sizeof(double)));
  }
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty checkpoint");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kMagic) {
      throw ParseError(source + ": not a spiralnet checkpoint");
    }
    if (version != kCheckpointVersion) {
      throw ParseError(source + ": unsupported checkpoint version " + std::to_string(version));
    }
  }

  std::map<std::string, std::string> keys;
  std::vector<TensorEntry> entries;
  std::size_t payload = 0;
  bool have_payload = false;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "tensor") {
      TensorEntry e;
      std::size_t rank = 0;
      if (!(ls >> e.name >> rank)) throw ParseError(source, lineno, "bad tensor line");
      e.shape.resize(rank);
      for (auto& d : e.shape) {
        if (!(ls >> d)) throw ParseError(source, lineno, "bad tensor shape");
      }
      if (!(ls >> e.offset)) throw ParseError(source, lineno, "bad tensor offset");
      entries.push_back(std::move(e));
    } else if (key == "payload") {
      if (!(ls >> payload)) throw ParseError(source, lineno, "bad payload line");
      have_payload = true;
      break;
    } else {
      std::string value;
      if (!(ls >> value)) throw ParseError(source, lineno, "missing value for '" + key + "'");
      keys[key] = value;
    }
  }
  if (!have_payload) throw ParseError(source + ": checkpoint has no payload");

  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = keys.find(key);
    if (it == keys.end()) throw ParseError(source + ": checkpoint lacks '" + key + "'");
    return it->second;
  };
  auto get_size = [&](const std::string& key) { return parse_int<std::size_t>(get(key), source); };
  auto get_real = [&](const std::string& key) { return parse_hex(get(key), source); };

  NetworkSpec spec;
  const auto kind = parse_network_kind(get("kind"));
  if (!kind) throw ParseError(source + ": unknown network kind " + get("kind"));
  spec.kind = *kind;
  spec.input_dim = get_size("input_dim");
  spec.seq_len = get_size("seq_len");
  spec.embed_width = get_size("embed_width");
  {
    std::string widths = get("encoder_widths");
    std::replace(widths.begin(), widths.end(), ',', ' ');
    std::istringstream ws(widths);
    for (auto& w : spec.encoder_widths) {
      if (!(ws >> w)) throw ParseError(source + ": bad encoder_widths");
    }
  }
  spec.head_width = get_size("head_width");
  spec.classes = get_size("classes");
  spec.dropout = get_real("dropout");
  spec.forget_bias = get_real("forget_bias");

  Checkpoint ck;
  ck.model = CorrespondenceModel(spec);
  ck.augment = get_size("augment") != 0;
  const std::string& distance = get("distance");
  if (distance != "euclidean" && distance != "geodesic") {
    throw ParseError(source + ": unknown distance " + distance);
  }
  ck.distance = distance == "euclidean" ? CenterDistance::euclidean : CenterDistance::geodesic;
  ck.meta.seed = parse_int<std::uint64_t>(get("seed"), source);
  ck.meta.epoch = get_size("epoch");
  ck.meta.train_loss = get_real("train_loss");
  ck.meta.validation_loss = get_real("validation_loss");
  ck.meta.validation_accuracy = get_real("validation_accuracy");
  ck.adam.step = parse_int<std::uint64_t>(get("adam_step"), source);
  ck.adam.config.lr = get_real("adam_lr");
  ck.adam.config.beta1 = get_real("adam_beta1");
  ck.adam.config.beta2 = get_real("adam_beta2");
  ck.adam.config.epsilon = get_real("adam_epsilon");

  std::vector<double> data(payload);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(payload * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != payload * sizeof(double)) {
    throw ParseError(source + ": checkpoint payload truncated");
  }

  std::map<std::string, const TensorEntry*> by_name;
  for (const auto& e : entries) {
    if (e.offset + shape_size(e.shape) > payload) {
      throw ParseError(source + ": tensor " + e.name + " exceeds the payload");
    }
    by_name[e.name] = &e;
  }
  auto take = [&](const std::string& name, const Shape& expected) -> std::optional<Tensor> {
    const auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    const TensorEntry& e = *it->second;
    if (!expected.empty() && e.shape != expected) {
      throw ParseError(source + ": tensor " + name + " has shape " + shape_string(e.shape) +
                       ", expected " + shape_string(expected));
    }
    const auto first = data.begin() + static_cast<std::ptrdiff_t>(e.offset);
    return Tensor(e.shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(shape_size(e.shape))));
  };

  const ParamList params = ck.model.parameters();
  bool have_adam = true;
  for (const auto& p : params) {
    auto t = take(p.name, p.value->shape());
    if (!t) throw ParseError(source + ": checkpoint lacks tensor " + p.name);
    *p.value = std::move(*t);
    have_adam = have_adam && by_name.count("adam.m." + p.name) && by_name.count("adam.v." + p.name);
  }
  if (have_adam) {
    for (const auto& p : params) ck.adam.m.push_back(*take("adam.m." + p.name, p.value->shape()));
    for (const auto& p : params) ck.adam.v.push_back(*take("adam.v." + p.name, p.value->shape()));
  }
  if (auto mean = take("norm.mean", {})) {
    auto stddev = take("norm.std", mean->shape());
    if (!stddev) throw ParseError(source + ": checkpoint has norm.mean without norm.std");
    ck.normalization.mean = mean->storage();
    ck.normalization.stddev = stddev->storage();
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_checkpoint(checkpoint, out);
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace spiralnet
