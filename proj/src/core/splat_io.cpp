// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "splat_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "log.hpp"

namespace splatrig {

namespace {

constexpr double kQuatNormTolerance = 1e-6;

float read_f32_le(const std::uint8_t* p) {
  const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                             (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
  return std::bit_cast<float>(bits);
}

void append_f32_le(std::vector<std::uint8_t>& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  out.push_back(static_cast<std::uint8_t>(bits & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xff));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p) - std::log1p(-p); }

// Reads one '\n'-terminated header line starting at *pos.
std::optional<std::string> next_line(std::span<const std::uint8_t> bytes, std::size_t* pos) {
  if (*pos >= bytes.size()) return std::nullopt;
  std::size_t end = *pos;
  while (end < bytes.size() && bytes[end] != '\n') ++end;
  if (end == bytes.size()) return std::nullopt;
  std::string line(reinterpret_cast<const char*>(bytes.data() + *pos), end - *pos);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  *pos = end + 1;
  return line;
}

int degree_for_rest_count(std::size_t rest) {
  switch (rest) {
    case 0: return 0;
    case 9: return 1;
    case 24: return 2;
    case 45: return 3;
    default: return -1;
  }
}

}  // namespace

SplatScene parse_splat_ply(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto line = next_line(bytes, &pos);
  if (!line || *line != "ply") fail(ErrorCode::kFormat, "not a PLY file");

  std::optional<std::size_t> vertex_count;
  bool in_vertex = false;
  bool saw_format = false;
  std::vector<std::string> properties;
  while (true) {
    line = next_line(bytes, &pos);
    if (!line) fail(ErrorCode::kFormat, "unexpected end of PLY header");
    if (*line == "end_header") break;
    std::istringstream ss(*line);
    std::string keyword;
    ss >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string kind, version;
      ss >> kind >> version;
      if (kind != "binary_little_endian") {
        fail(ErrorCode::kFormat, "unsupported PLY format '" + kind + "' (binary_little_endian only)");
      }
      saw_format = true;
    } else if (keyword == "element") {
      std::string name;
      long long count = -1;
      ss >> name >> count;
      if (name == "vertex") {
        if (count < 0) fail(ErrorCode::kFormat, "bad vertex count");
        vertex_count = static_cast<std::size_t>(count);
        in_vertex = true;
      } else {
        // Elements after the vertex block are never read.
        in_vertex = false;
      }
    } else if (keyword == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ss >> type >> name;
      if (type != "float" && type != "float32") {
        fail(ErrorCode::kFormat, "unsupported vertex property type '" + type + "' for " + name);
      }
      properties.push_back(name);
    } else {
      fail(ErrorCode::kFormat, "unrecognized PLY header line: " + *line);
    }
  }
  if (!saw_format) fail(ErrorCode::kFormat, "missing PLY format line");
  if (!vertex_count) fail(ErrorCode::kFormat, "missing element vertex");
  if (*vertex_count == 0) fail(ErrorCode::kEmptyScene, "PLY has zero vertices");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < properties.size(); ++i) index.emplace(properties[i], i);
  auto require = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) fail(ErrorCode::kFormat, "missing property '" + name + "'");
    return it->second;
  };

  const std::array<std::size_t, 3> mean_idx{require("x"), require("y"), require("z")};
  const std::array<std::size_t, 3> dc_idx{require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
  const std::size_t opacity_idx = require("opacity");
  const std::array<std::size_t, 3> scale_idx{require("scale_0"), require("scale_1"),
                                             require("scale_2")};
  const std::array<std::size_t, 4> rot_idx{require("rot_0"), require("rot_1"), require("rot_2"),
                                           require("rot_3")};

  std::vector<std::size_t> rest_idx;
  std::size_t rest_seen = 0;
  for (const auto& name : properties) {
    if (name.rfind("f_rest_", 0) == 0) ++rest_seen;
  }
  for (std::size_t i = 0; i < rest_seen; ++i) {
    auto it = index.find("f_rest_" + std::to_string(i));
    if (it == index.end()) {
      fail(ErrorCode::kFormat, "f_rest properties are not numbered 0.." + std::to_string(rest_seen - 1));
    }
    rest_idx.push_back(it->second);
  }
  const int degree = degree_for_rest_count(rest_idx.size());
  if (degree < 0) {
    fail(ErrorCode::kFormat,
         "f_rest count " + std::to_string(rest_idx.size()) + " matches no SH degree (expected 0, 9, 24 or 45)");
  }
  const int bases = sh_bases_for_degree(degree);

  bool has_normals = false;
  for (const auto& name : properties) {
    if (name == "nx" || name == "ny" || name == "nz") {
      has_normals = true;
      continue;
    }
    const bool known = name == "x" || name == "y" || name == "z" || name == "opacity" ||
                       name.rfind("f_dc_", 0) == 0 || name.rfind("f_rest_", 0) == 0 ||
                       name.rfind("scale_", 0) == 0 || name.rfind("rot_", 0) == 0;
    if (!known) log_warn("skipping unknown PLY property '{}'", name);
  }

  const std::size_t stride = properties.size() * sizeof(float);
  const std::size_t count = *vertex_count;
  if (count > (bytes.size() - pos) / stride) {
    fail(ErrorCode::kFormat, "PLY body truncated: expected " + std::to_string(count) + " vertices");
  }

  SplatScene scene;
  scene.sh_degree = degree;
  scene.write_normals = has_normals;
  scene.gaussians.resize(count);
  const std::size_t rest_per_channel = static_cast<std::size_t>(bases - 1);
  for (std::size_t v = 0; v < count; ++v) {
    const std::uint8_t* row = bytes.data() + pos + v * stride;
    auto field = [&](std::size_t i) -> double { return read_f32_le(row + i * sizeof(float)); };
    Gaussian3D& g = scene.gaussians[v];
    g.mean = Vec3(field(mean_idx[0]), field(mean_idx[1]), field(mean_idx[2]));
    for (int k = 0; k < 3; ++k) {
      g.scale[k] = std::max(std::exp(field(scale_idx[k])), std::numeric_limits<double>::min());
    }
    g.opacity = sigmoid(field(opacity_idx));
    Quat q(field(rot_idx[0]), field(rot_idx[1]), field(rot_idx[2]), field(rot_idx[3]));
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      fail(ErrorCode::kFormat, "degenerate rotation at vertex " + std::to_string(v));
    }
    // Already-unit quaternions are kept bit-exact so that files round-trip.
    if (std::abs(n - 1.0) > kQuatNormTolerance) q.coeffs() /= n;
    g.rotation = q;
    for (int c = 0; c < 3; ++c) {
      g.sh[0][c] = field(dc_idx[c]);
      for (std::size_t b = 1; b < static_cast<std::size_t>(bases); ++b) {
        g.sh[b][c] = field(rest_idx[c * rest_per_channel + (b - 1)]);
      }
    }
  }
  return scene;
}

std::vector<std::uint8_t> write_splat_ply(const SplatScene& scene) {
  if (scene.empty()) fail(ErrorCode::kEmptyScene, "cannot write an empty scene");
  if (scene.sh_degree < 0 || scene.sh_degree > kMaxShDegree) {
    fail(ErrorCode::kInvalidArgument, "sh_degree must be in [0,3]");
  }
  const int bases = sh_bases_for_degree(scene.sh_degree);
  const int rest = 3 * (bases - 1);

  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\nelement vertex " << scene.size() << "\n";
  for (const char* p : {"x", "y", "z"}) header << "property float " << p << "\n";
  if (scene.write_normals) {
    for (const char* p : {"nx", "ny", "nz"}) header << "property float " << p << "\n";
  }
  for (int i = 0; i < 3; ++i) header << "property float f_dc_" << i << "\n";
  for (int i = 0; i < rest; ++i) header << "property float f_rest_" << i << "\n";
  header << "property float opacity\n";
  for (int i = 0; i < 3; ++i) header << "property float scale_" << i << "\n";
  for (int i = 0; i < 4; ++i) header << "property float rot_" << i << "\n";
  header << "end_header\n";

  const std::string h = header.str();
  const std::size_t floats_per_vertex = 3 + (scene.write_normals ? 3 : 0) + 3 + rest + 1 + 3 + 4;
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.reserve(h.size() + scene.size() * floats_per_vertex * sizeof(float));
  for (const Gaussian3D& g : scene.gaussians) {
    for (int k = 0; k < 3; ++k) append_f32_le(out, g.mean[k]);
    if (scene.write_normals) {
      for (int k = 0; k < 3; ++k) append_f32_le(out, 0.0);
    }
    for (int c = 0; c < 3; ++c) append_f32_le(out, g.sh[0][c]);
    for (int c = 0; c < 3; ++c) {
      for (int b = 1; b < bases; ++b) append_f32_le(out, g.sh[b][c]);
    }
    append_f32_le(out, logit(g.opacity));
    for (int k = 0; k < 3; ++k) append_f32_le(out, std::log(g.scale[k]));
    append_f32_le(out, g.rotation.w());
    append_f32_le(out, g.rotation.x());
    append_f32_le(out, g.rotation.y());
    append_f32_le(out, g.rotation.z());
  }
  return out;
}

SplatScene load_splat_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SplatScene scene = parse_splat_ply(bytes);
  scene.source_label = path;
  return scene;
}

void save_splat_ply(const SplatScene& scene, const std::string& path) {
  const auto bytes = write_splat_ply(scene);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace splatrig
