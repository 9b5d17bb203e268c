#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "afford/error.hpp"
#include "afford/math.hpp"

namespace afford {

constexpr double kMinTriangleArea = 1e-12;  // m^2

struct Triangle {
  std::array<int, 3> v{0, 0, 0};
  int operator[](int i) const { return v[i]; }
  int& operator[](int i) { return v[i]; }
};

// Indexed triangle mesh, coordinates in meters. Metadata records what the
// loader did so result files can echo it.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  double applied_scale = 1.0;      // unit-normalization factor applied on load
  bool watertight_hint = false;    // set by mass-property computation

  bool empty() const { return vertices.empty() || triangles.empty(); }

  Aabb bounds() const {
    Aabb b;
    for (const auto& v : vertices) b.expand(v);
    return b;
  }

  Vec3 triangle_vertex(int tri, int corner) const { return vertices[triangles[tri][corner]]; }

  double triangle_area(int tri) const {
    Vec3 a = triangle_vertex(tri, 0), b = triangle_vertex(tri, 1), c = triangle_vertex(tri, 2);
    return 0.5 * norm(cross(b - a, c - a));
  }

  double surface_area() const {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(triangles.size()); ++i) s += triangle_area(i);
    return s;
  }

  TriMesh transformed(const Pose& pose) const {
    TriMesh out = *this;
    for (auto& v : out.vertices) v = pose.transform_point(v);
    return out;
  }

  TriMesh scaled(double s) const {
    TriMesh out = *this;
    for (auto& v : out.vertices) v *= s;
    return out;
  }

  // Throws if indices are out of range, coordinates non-finite, or a
  // degenerate triangle slipped through.
  void check_valid() const {
    if (empty()) throw AffordError(ErrorCode::invalid_input, "mesh is empty");
    int nv = static_cast<int>(vertices.size());
    for (const auto& v : vertices)
      if (!is_finite(v)) throw AffordError(ErrorCode::invalid_input, "non-finite vertex coordinate");
    for (size_t i = 0; i < triangles.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        int idx = triangles[i][k];
        if (idx < 0 || idx >= nv)
          throw AffordError(ErrorCode::invalid_input,
                            "triangle " + std::to_string(i) + " references vertex " +
                                std::to_string(idx) + " of " + std::to_string(nv));
      }
      if (triangle_area(static_cast<int>(i)) <= kMinTriangleArea)
        throw AffordError(ErrorCode::invalid_input,
                          "degenerate triangle " + std::to_string(i));
    }
  }
};

enum class MeshFormat { off, obj };

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    size_t h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    size_t a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r\n");
    line = line.substr(a, b - a + 1);
    return true;
  }
  return false;
}

[[noreturn]] inline void format_fail(const std::string& what, int line_no) {
  throw AffordError(ErrorCode::format_error,
                    what + " at line " + std::to_string(line_no));
}

inline void drop_degenerate_triangles(TriMesh& mesh) {
  std::vector<Triangle> kept;
  kept.reserve(mesh.triangles.size());
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    if (mesh.triangle_area(static_cast<int>(i)) > kMinTriangleArea) kept.push_back(t);
  }
  mesh.triangles = std::move(kept);
}

inline TriMesh parse_off(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  if (!next_content_line(in, line, line_no)) format_fail("empty OFF file", line_no);

  long nv = -1, nf = -1, ne = 0;
  if (line == "OFF") {
    if (!next_content_line(in, line, line_no)) format_fail("missing OFF counts", line_no);
    std::istringstream cs(line);
    if (!(cs >> nv >> nf >> ne)) format_fail("bad OFF counts", line_no);
  } else if (line.rfind("OFF", 0) == 0) {
    // ModelNet quirk: counts glued onto the header line ("OFF490 480 0").
    std::istringstream cs(line.substr(3));
    if (!(cs >> nv >> nf >> ne)) format_fail("bad OFF header", line_no);
  } else {
    format_fail("missing OFF header", line_no);
  }
  if (nv < 0 || nf < 0) format_fail("negative OFF counts", line_no);

  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, line_no)) format_fail("unexpected end of vertex list", line_no);
    std::istringstream vs(line);
    Vec3 v;
    if (!(vs >> v.x >> v.y >> v.z)) format_fail("bad vertex record", line_no);
    mesh.vertices.push_back(v);
  }
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line, line_no)) format_fail("unexpected end of face list", line_no);
    std::istringstream fs(line);
    long k = 0;
    if (!(fs >> k) || k < 3) format_fail("bad face record", line_no);
    std::vector<long> idx(k);
    for (long j = 0; j < k; ++j)
      if (!(fs >> idx[j])) format_fail("bad face index", line_no);
    for (long j = 0; j < k; ++j)
      if (idx[j] < 0 || idx[j] >= nv)
        throw AffordError(ErrorCode::invalid_input,
                          "face references vertex " + std::to_string(idx[j]) + " of " +
                              std::to_string(nv) + " at line " + std::to_string(line_no));
    for (long j = 1; j + 1 < k; ++j)
      mesh.triangles.push_back({static_cast<int>(idx[0]), static_cast<int>(idx[j]),
                                static_cast<int>(idx[j + 1])});
  }
  return mesh;
}

inline TriMesh parse_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (next_content_line(in, line, line_no)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) format_fail("bad vertex record", line_no);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) {
        // take the vertex index before any '/': "7", "7/2", "7//3"
        size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        long raw = 0;
        try {
          raw = std::stol(head);
        } catch (...) {
          format_fail("bad face index '" + tok + "'", line_no);
        }
        long nv = static_cast<long>(mesh.vertices.size());
        long resolved = raw > 0 ? raw - 1 : nv + raw;  // negative = relative to end
        if (resolved < 0 || resolved >= nv)
          throw AffordError(ErrorCode::invalid_input,
                            "face references vertex " + std::to_string(raw) + " of " +
                                std::to_string(nv) + " at line " + std::to_string(line_no));
        idx.push_back(resolved);
      }
      if (idx.size() < 3) format_fail("face with fewer than 3 vertices", line_no);
      for (size_t j = 1; j + 1 < idx.size(); ++j)
        mesh.triangles.push_back({static_cast<int>(idx[0]), static_cast<int>(idx[j]),
                                  static_cast<int>(idx[j + 1])});
    }
    // vt/vn/usemtl/... ignored: geometry-only reader
  }
  return mesh;
}

}  // namespace detail

// Unit convention: files carry no units. If the raw bounding diagonal falls
// outside [0.05 m, 5 m] the mesh is rescaled to a 0.5 m diagonal and the
// factor recorded in applied_scale.
inline void normalize_units(TriMesh& mesh) {
  double d = mesh.bounds().diagonal();
  if (d <= 0.0) return;
  if (d > 5.0 || d < 0.05) {
    double s = 0.5 / d;
    for (auto& v : mesh.vertices) v *= s;
    mesh.applied_scale = s;
  }
}

inline TriMesh parse_mesh(std::istream& in, MeshFormat format) {
  TriMesh mesh = format == MeshFormat::off ? detail::parse_off(in) : detail::parse_obj(in);
  detail::drop_degenerate_triangles(mesh);
  if (mesh.empty())
    throw AffordError(ErrorCode::invalid_input, "mesh has no usable geometry");
  normalize_units(mesh);
  mesh.check_valid();
  return mesh;
}

inline MeshFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".off") return MeshFormat::off;
  if (ext == ".obj") return MeshFormat::obj;
  throw AffordError(ErrorCode::format_error, "unsupported mesh extension '" + ext + "'");
}

inline TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw AffordError(ErrorCode::io_error, "cannot open " + path.string());
  return parse_mesh(in, format);
}

inline TriMesh load_mesh(const std::filesystem::path& path) {
  return load_mesh(path, format_from_extension(path));
}

inline void save_obj(const TriMesh& mesh, std::ostream& out) {
  out << "# " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
      << " triangles\n";
  for (const auto& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

inline void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw AffordError(ErrorCode::io_error, "cannot write " + path.string());
  save_obj(mesh, out);
}

inline void save_off(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw AffordError(ErrorCode::io_error, "cannot write " + path.string());
  out << "OFF\n" << mesh.vertices.size() << " " << mesh.triangles.size() << " 0\n";
  for (const auto& v : mesh.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace afford
