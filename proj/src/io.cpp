#include "toposdf/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "toposdf/errors.hpp"

namespace toposdf {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

template <class Int>
bool parse_int(std::string_view tok, Int& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("cannot format value");
  return std::string(buf, ptr);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- points

std::vector<Vec3> parse_xyz(const std::string& text) {
  std::vector<Vec3> pts;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto tok = split_ws(lines[ln]);
    if (tok.empty() || tok[0].front() == '#') continue;
    Vec3 p{};
    if (tok.size() < 3) {
      throw ParseError("line " + std::to_string(ln + 1) + ": expected 3 coordinates, found " +
                       std::to_string(tok.size()));
    }
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tok[k], p[k])) {
        throw ParseError("line " + std::to_string(ln + 1) + ": cannot parse '" +
                         std::string(tok[k]) + "' as a number");
      }
    }
    pts.push_back(p);
  }
  if (pts.size() < 2) {
    throw DegenerateInputError("point file holds " + std::to_string(pts.size()) +
                               " points, at least 2 are required");
  }
  return pts;
}

std::vector<Vec3> load_xyz(const fs::path& path) { return parse_xyz(read_text_file(path)); }

std::vector<Vec3> parse_ply_ascii(const std::string& text) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  const auto lines = lines_of(text);
  if (lines.empty() || split_ws(lines[0]).empty() || split_ws(lines[0])[0] != "ply") {
    throw UnsupportedFormatError("missing 'ply' magic line");
  }
  std::vector<Element> elements;
  std::size_t ln = 1;
  bool ended = false;
  for (; ln < lines.size(); ++ln) {
    const auto tok = split_ws(lines[ln]);
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") {
        throw UnsupportedFormatError("only ascii PLY is supported, found format '" +
                                     (tok.size() > 1 ? std::string(tok[1]) : std::string()) + "'");
      }
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw ParseError("line " + std::to_string(ln + 1) + ": malformed element");
      Element e;
      e.name = tok[1];
      if (!parse_int(tok[2], e.count)) {
        throw ParseError("line " + std::to_string(ln + 1) + ": bad element count");
      }
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError("line " + std::to_string(ln + 1) + ": property before element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().has_list = true;
        elements.back().properties.push_back(tok.size() >= 5 ? std::string(tok[4]) : "");
      } else {
        elements.back().properties.push_back(tok.size() >= 3 ? std::string(tok[2]) : "");
      }
    } else if (tok[0] == "end_header") {
      ended = true;
      ++ln;
      break;
    }
  }
  if (!ended) throw ParseError("PLY header has no end_header line");

  std::vector<Vec3> pts;
  bool seen_vertex = false;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i, ++ln) {
        if (ln >= lines.size()) throw ParseError("PLY truncated inside element '" + e.name + "'");
      }
      continue;
    }
    seen_vertex = true;
    std::array<std::ptrdiff_t, 3> col{-1, -1, -1};
    for (std::size_t c = 0; c < e.properties.size(); ++c) {
      if (e.properties[c] == "x") col[0] = static_cast<std::ptrdiff_t>(c);
      if (e.properties[c] == "y") col[1] = static_cast<std::ptrdiff_t>(c);
      if (e.properties[c] == "z") col[2] = static_cast<std::ptrdiff_t>(c);
    }
    if (col[0] < 0 || col[1] < 0 || col[2] < 0) {
      throw UnsupportedFormatError("PLY vertex element lacks x, y and z properties");
    }
    if (e.has_list) throw UnsupportedFormatError("list properties on vertices are not supported");
    for (std::size_t i = 0; i < e.count; ++i, ++ln) {
      while (ln < lines.size() && split_ws(lines[ln]).empty()) ++ln;
      if (ln >= lines.size()) {
        throw ParseError("PLY declares " + std::to_string(e.count) + " vertices but ends after " +
                         std::to_string(i));
      }
      const auto tok = split_ws(lines[ln]);
      if (tok.size() < e.properties.size()) {
        throw ParseError("line " + std::to_string(ln + 1) + ": expected " +
                         std::to_string(e.properties.size()) + " values");
      }
      Vec3 p{};
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(tok[static_cast<std::size_t>(col[k])], p[k])) {
          throw ParseError("line " + std::to_string(ln + 1) + ": bad coordinate");
        }
      }
      pts.push_back(p);
    }
  }
  if (!seen_vertex) throw UnsupportedFormatError("PLY has no vertex element");
  if (pts.size() < 2) throw DegenerateInputError("PLY holds fewer than 2 vertices");
  return pts;
}

std::vector<Vec3> load_ply_ascii(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_ply_ascii(read_text_file(path));
}

std::vector<Vec3> load_points(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") return load_ply_ascii(path);
  if (ext == ".xyz" || ext == ".txt" || ext == ".pts" || ext.empty()) return load_xyz(path);
  throw UnsupportedFormatError("unsupported point file extension '" + ext + "'");
}

void save_xyz(const std::vector<Vec3>& points, const fs::path& path) {
  std::string out;
  for (const auto& p : points) {
    out += format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]) + '\n';
  }
  write_text_file(path, out);
}

// ---------------------------------------------------------------- meshes

std::string format_obj(const TriangleMesh& mesh) {
  mesh.validate();
  std::string out = "# " + std::to_string(mesh.vertices.size()) + " vertices, " +
                    std::to_string(mesh.triangles.size()) + " triangles\n";
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
    out += buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "f %zu %zu %zu\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

void save_obj(const TriangleMesh& mesh, const fs::path& path) {
  write_text_file(path, format_obj(mesh));
}

TriangleMesh load_obj(const fs::path& path) {
  const std::string text = read_text_file(path);
  TriangleMesh mesh;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto tok = split_ws(lines[ln]);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "v") {
      Vec3 p{};
      if (tok.size() < 4 || !parse_double(tok[1], p[0]) || !parse_double(tok[2], p[1]) ||
          !parse_double(tok[3], p[2])) {
        throw ParseError("line " + std::to_string(ln + 1) + ": malformed vertex");
      }
      mesh.vertices.push_back(p);
    } else if (tok[0] == "f") {
      std::vector<std::size_t> idx;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string_view first = tok[i].substr(0, tok[i].find('/'));
        long long v = 0;
        if (!parse_int(first, v) || v == 0) {
          throw ParseError("line " + std::to_string(ln + 1) + ": malformed face index");
        }
        const long long n = static_cast<long long>(mesh.vertices.size());
        const long long zero_based = v > 0 ? v - 1 : n + v;
        if (zero_based < 0 || zero_based >= n) {
          throw ParseError("line " + std::to_string(ln + 1) + ": face index out of range");
        }
        idx.push_back(static_cast<std::size_t>(zero_based));
      }
      if (idx.size() < 3) throw ParseError("line " + std::to_string(ln + 1) + ": face needs 3 vertices");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------- diagrams

std::string format_diagram(const PersistenceDiagram& diagram) {
  std::vector<std::size_t> order(diagram.pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = diagram.pairs[a];
    const auto& pb = diagram.pairs[b];
    if (pa.birth != pb.birth) return pa.birth < pb.birth;
    return pa.birth_vertex < pb.birth_vertex;
  });
  std::string out = std::string(kDiagramHeader) + '\n';
  for (std::size_t i : order) {
    const auto& p = diagram.pairs[i];
    out += "0," + format_double(p.birth) + ',' + format_double(p.death) + ',' +
           std::to_string(p.birth_vertex) + ',' + std::to_string(p.death_vertex) + ',' +
           (p.essential ? "1" : "0") + '\n';
  }
  return out;
}

void export_diagram(const PersistenceDiagram& diagram, const fs::path& path) {
  write_text_file(path, format_diagram(diagram));
}

PersistenceDiagram parse_diagram(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kDiagramHeader) throw ParseError("diagram CSV header mismatch");
  PersistenceDiagram pd;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = lines[ln];
    while (true) {
      const std::size_t c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    PersistencePair p;
    int dim = -1;
    if (f.size() != 6 || !parse_int(f[0], dim) || dim != 0 || !parse_double(f[1], p.birth) ||
        !parse_double(f[2], p.death) || !parse_int(f[3], p.birth_vertex) ||
        !parse_int(f[4], p.death_vertex) || (f[5] != "0" && f[5] != "1")) {
      throw ParseError("diagram line " + std::to_string(ln + 1) + " is malformed");
    }
    p.essential = f[5] == "1";
    pd.pairs.push_back(p);
  }
  return pd;
}

PersistenceDiagram import_diagram(const fs::path& path) { return parse_diagram(read_text_file(path)); }

// ---------------------------------------------------------------- history

std::string format_history(const TrainHistory& history) {
  std::string out = std::string(kHistoryHeader) + '\n';
  for (const auto& r : history.records) {
    out += std::to_string(r.iter) + ',' + format_double(r.total) + ',' + format_double(r.pull) +
           ',' + format_double(r.significant) + ',' + format_double(r.noise) + ',' +
           format_double(r.lr) + ',' + std::to_string(r.dropped) + '\n';
  }
  return out;
}

void save_history_csv(const TrainHistory& history, const fs::path& path) {
  write_text_file(path, format_history(history));
}

// ---------------------------------------------------------------- checkpoints

namespace {

template <class T>
void put_le(std::string& out, T v) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ParseError("checkpoint is truncated");
  std::array<unsigned char, sizeof(T)> bits;
  std::memcpy(bits.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::string encode_checkpoint(const SdfModel& model) {
  std::string out(kCheckpointMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.layer_count));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.hidden_width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.skip_layer));
  const std::vector<double> theta = model.flatten();
  put_le<std::uint64_t>(out, theta.size());
  for (double v : theta) put_le<double>(out, v);
  return out;
}

SdfModel decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw ParseError("not a checkpoint: bad magic");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw UnsupportedFormatError("checkpoint version " + std::to_string(version) +
                                 " is not supported");
  }
  SdfModel model;
  model.arch.layer_count = get_le<std::uint32_t>(bytes, pos);
  model.arch.hidden_width = get_le<std::uint32_t>(bytes, pos);
  model.arch.skip_layer = get_le<std::uint32_t>(bytes, pos);
  model.arch.validate();
  const auto count = get_le<std::uint64_t>(bytes, pos);
  if (count != model.arch.parameter_count()) {
    throw ConsistencyError("checkpoint holds " + std::to_string(count) +
                           " parameters, architecture needs " +
                           std::to_string(model.arch.parameter_count()));
  }
  std::vector<double> theta(count);
  for (auto& v : theta) v = get_le<double>(bytes, pos);
  if (pos != bytes.size()) throw ParseError("checkpoint has trailing bytes");
  model.layers.resize(model.arch.layer_count);
  for (std::size_t l = 0; l < model.arch.layer_count; ++l) {
    model.layers[l].weight = Tensor({model.arch.input_dim(l), model.arch.output_dim(l)});
    model.layers[l].bias = Tensor({model.arch.output_dim(l)});
  }
  model.unflatten(theta);
  return model;
}

void save_checkpoint(const SdfModel& model, const fs::path& path) {
  write_text_file(path, encode_checkpoint(model));
}

SdfModel load_checkpoint(const fs::path& path) { return decode_checkpoint(read_text_file(path)); }

void save_transform(const SourceTransform& t, const fs::path& path) {
  write_text_file(path, "scale = " + format_double(t.scale) + "\ntranslation = " +
                            format_double(t.translation[0]) + ' ' +
                            format_double(t.translation[1]) + ' ' +
                            format_double(t.translation[2]) + '\n');
}

SourceTransform load_transform(const fs::path& path) {
  const std::string text = read_text_file(path);
  SourceTransform t;
  bool have_scale = false, have_translation = false;
  for (std::string_view line : lines_of(text)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() == 3 && tok[0] == "scale" && tok[1] == "=" && parse_double(tok[2], t.scale)) {
      have_scale = true;
    } else if (tok.size() == 5 && tok[0] == "translation" && tok[1] == "=" &&
               parse_double(tok[2], t.translation[0]) && parse_double(tok[3], t.translation[1]) &&
               parse_double(tok[4], t.translation[2])) {
      have_translation = true;
    } else {
      throw ParseError("malformed transform line '" + std::string(line) + "'");
    }
  }
  if (!have_scale || !have_translation) throw ParseError("transform file is incomplete");
  return t;
}

}  // namespace toposdf
