#include "spiralnet/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

#include "spiralnet/error.hpp"

namespace spiralnet {

static_assert(std::endian::native == std::endian::little,
              "binary PLY reader assumes a little-endian host");

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

// ---------------------------------------------------------------- OBJ

TriangleSoup read_obj(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  const std::string source = path.string();
  TriangleSoup soup;
  std::vector<std::pair<std::size_t, std::vector<long>>> raw_faces;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw ParseError(source, lineno, "vertex needs 3 coordinates");
      Vec3 p;
      if (!parse_number(tokens[1], p.x) || !parse_number(tokens[2], p.y) ||
          !parse_number(tokens[3], p.z)) {
        throw ParseError(source, lineno, "bad vertex coordinate");
      }
      soup.positions.push_back(p);
    } else if (tokens[0] == "f") {
      std::vector<long> idx;
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        const auto slot = tokens[t].substr(0, tokens[t].find('/'));
        long value = 0;
        if (!parse_number(slot, value) || value == 0) {
          throw ParseError(source, lineno, "bad face index '" + std::string(tokens[t]) + "'");
        }
        idx.push_back(value);
      }
      if (idx.size() != 3) {
        throw ValidationError(source + ":" + std::to_string(lineno) + ": non-triangle face with " +
                              std::to_string(idx.size()) + " vertices");
      }
      // Negative indices are relative to the vertices read so far.
      for (auto& i : idx) {
        if (i < 0) i = static_cast<long>(soup.positions.size()) + i + 1;
      }
      raw_faces.emplace_back(lineno, std::move(idx));
    }
  }
  const auto nv = static_cast<long>(soup.positions.size());
  for (const auto& [ln, idx] : raw_faces) {
    Triangle tri{};
    for (int j = 0; j < 3; ++j) {
      if (idx[j] < 1 || idx[j] > nv) {
        throw ValidationError(source + ":" + std::to_string(ln) + ": face index " +
                              std::to_string(idx[j]) + " out of range");
      }
      tri[j] = static_cast<VertexId>(idx[j] - 1);
    }
    soup.faces.push_back(tri);
  }
  return soup;
}

// ---------------------------------------------------------------- PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  return std::nullopt;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

template <typename T>
double read_le(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<double>(value);
}

double read_binary(std::istream& in, PlyType t) {
  switch (t) {
    case PlyType::i8: return read_le<std::int8_t>(in);
    case PlyType::u8: return read_le<std::uint8_t>(in);
    case PlyType::i16: return read_le<std::int16_t>(in);
    case PlyType::u16: return read_le<std::uint16_t>(in);
    case PlyType::i32: return read_le<std::int32_t>(in);
    case PlyType::u32: return read_le<std::uint32_t>(in);
    case PlyType::f32: return read_le<float>(in);
    case PlyType::f64: return read_le<double>(in);
  }
  return 0.0;
}

// Pulls whitespace-separated tokens across lines for ascii bodies.
class AsciiTokens {
 public:
  AsciiTokens(std::istream& in, std::string source, std::size_t lineno)
      : in_(in), source_(std::move(source)), lineno_(lineno) {}

  double next() {
    while (pos_ >= tokens_.size()) {
      if (!std::getline(in_, line_)) throw ParseError(source_, lineno_, "unexpected end of file");
      ++lineno_;
      tokens_ = split_ws(line_);
      pos_ = 0;
    }
    double value = 0.0;
    if (!parse_number(tokens_[pos_], value)) {
      throw ParseError(source_, lineno_, "bad number '" + std::string(tokens_[pos_]) + "'");
    }
    ++pos_;
    return value;
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t lineno_;
  std::string line_;
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
};

TriangleSoup read_ply(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in | std::ios::binary);
  const std::string source = path.string();

  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(source, 1, "missing 'ply' magic");
  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  while (true) {
    if (!next_line()) throw ParseError(source, lineno, "header has no end_header");
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "end_header") break;
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2) throw ParseError(source, lineno, "bad format line");
      if (tokens[1] == "ascii") {
        binary = false;
      } else if (tokens[1] == "binary_little_endian") {
        binary = true;
      } else {
        throw ParseError(source, lineno, "unsupported PLY format " + std::string(tokens[1]));
      }
      have_format = true;
    } else if (tokens[0] == "element") {
      std::size_t count = 0;
      if (tokens.size() != 3 || !parse_number(tokens[2], count)) {
        throw ParseError(source, lineno, "bad element line");
      }
      elements.push_back({std::string(tokens[1]), count, {}});
    } else if (tokens[0] == "property") {
      if (elements.empty()) throw ParseError(source, lineno, "property before element");
      PlyProperty prop;
      if (tokens.size() == 5 && tokens[1] == "list") {
        const auto ct = ply_type(tokens[2]);
        const auto vt = ply_type(tokens[3]);
        if (!ct || !vt) throw ParseError(source, lineno, "unknown list property type");
        prop = {std::string(tokens[4]), *vt, true, *ct};
      } else if (tokens.size() == 3) {
        const auto t = ply_type(tokens[1]);
        if (!t) throw ParseError(source, lineno, "unknown property type " + std::string(tokens[1]));
        prop = {std::string(tokens[2]), *t, false, PlyType::u8};
      } else {
        throw ParseError(source, lineno, "bad property line");
      }
      elements.back().properties.push_back(prop);
    } else {
      throw ParseError(source, lineno, "unexpected header keyword " + std::string(tokens[0]));
    }
  }
  if (!have_format) throw ParseError(source, lineno, "header lacks a format line");

  TriangleSoup soup;
  AsciiTokens ascii(in, source, lineno);
  auto read_value = [&](PlyType t) { return binary ? read_binary(in, t) : ascii.next(); };

  bool saw_vertices = false;
  std::size_t face_record = 0;
  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    int xi = -1, yi = -1, zi = -1, fi = -1;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const auto& name = element.properties[p].name;
      const int ip = static_cast<int>(p);
      if (name == "x") xi = ip;
      if (name == "y") yi = ip;
      if (name == "z") zi = ip;
      if (element.properties[p].is_list && (name == "vertex_indices" || name == "vertex_index")) fi = ip;
    }
    if (is_vertex && (xi < 0 || yi < 0 || zi < 0)) {
      throw ParseError(source, lineno, "vertex element lacks x/y/z");
    }
    if (is_face && fi < 0) throw ParseError(source, lineno, "face element lacks vertex_indices");

    for (std::size_t r = 0; r < element.count; ++r) {
      Vec3 p;
      std::vector<double> face_idx;
      for (std::size_t k = 0; k < element.properties.size(); ++k) {
        const auto& prop = element.properties[k];
        const int ik = static_cast<int>(k);
        if (prop.is_list) {
          const double n = read_value(prop.count_type);
          if (n < 0 || n > 1e6) throw ParseError(source, lineno, "bad list length");
          for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const double value = read_value(prop.type);
            if (ik == fi) face_idx.push_back(value);
          }
        } else {
          const double value = read_value(prop.type);
          if (ik == xi) p.x = value;
          if (ik == yi) p.y = value;
          if (ik == zi) p.z = value;
        }
      }
      if (binary && !in) throw ParseError(source, lineno, "truncated binary body");
      if (is_vertex) soup.positions.push_back(p);
      if (is_face) {
        if (face_idx.size() != 3) {
          throw ValidationError(source + ": face " + std::to_string(face_record) +
                                " is a non-triangle face with " +
                                std::to_string(face_idx.size()) + " vertices");
        }
        Triangle tri{};
        for (int j = 0; j < 3; ++j) {
          const double value = face_idx[static_cast<std::size_t>(j)];
          if (value < 0 || value >= static_cast<double>(std::numeric_limits<VertexId>::max())) {
            throw ValidationError(source + ": face " + std::to_string(face_record) +
                                  " index out of range");
          }
          tri[j] = static_cast<VertexId>(value);
        }
        soup.faces.push_back(tri);
        ++face_record;
      }
    }
    saw_vertices = saw_vertices || is_vertex;
  }
  if (!saw_vertices) throw ParseError(source, lineno, "no vertex element");
  const auto nv = static_cast<VertexId>(soup.positions.size());
  for (std::size_t f = 0; f < soup.faces.size(); ++f) {
    for (VertexId v : soup.faces[f]) {
      if (v >= nv) {
        throw ValidationError(source + ": face " + std::to_string(f) + " index " +
                              std::to_string(v) + " out of range");
      }
    }
  }
  return soup;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

MeshFormat guess_mesh_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".obj") return MeshFormat::obj;
  if (ext == ".ply") return MeshFormat::ply_ascii;
  throw IoError("cannot infer mesh format from extension of " + path.string());
}

std::optional<MeshFormat> parse_mesh_format(std::string_view name) {
  if (name == "obj") return MeshFormat::obj;
  if (name == "ply-ascii" || name == "ply") return MeshFormat::ply_ascii;
  if (name == "ply-binary-little-endian" || name == "ply-binary") return MeshFormat::ply_binary_le;
  return std::nullopt;
}

TriangleSoup load_triangles(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  const MeshFormat fmt = format ? *format : guess_mesh_format(path);
  return fmt == MeshFormat::obj ? read_obj(path) : read_ply(path);
}

HalfEdgeMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  return HalfEdgeMesh::build(load_triangles(path, format));
}

void save_obj(const TriangleSoup& soup, const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out);
  out << std::setprecision(17);
  for (const auto& p : soup.positions) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const auto& f : soup.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void save_ply(const TriangleSoup& soup, const std::filesystem::path& path, bool binary) {
  auto out = open_output(path, std::ios::out | std::ios::binary);
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << soup.positions.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << soup.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  if (binary) {
    for (const auto& p : soup.positions) {
      const double xyz[3] = {p.x, p.y, p.z};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
    for (const auto& f : soup.faces) {
      const std::uint8_t n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      const std::int32_t idx[3] = {f[0], f[1], f[2]};
      out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
  } else {
    out << std::setprecision(17);
    for (const auto& p : soup.positions) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
    for (const auto& f : soup.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace spiralnet
