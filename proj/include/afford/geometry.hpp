#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "afford/error.hpp"
#include "afford/math.hpp"
#include "afford/mesh.hpp"

namespace afford {

// ---------------------------------------------------------------------------
// Convex hull: incremental construction with horizon expansion.
// ---------------------------------------------------------------------------

namespace detail {

struct HullFace {
  int a, b, c;
  Vec3 normal;      // outward unit normal
  double offset;    // plane: dot(normal, x) = offset
  bool alive = true;
  std::vector<int> outside;
};

inline double point_plane(const HullFace& f, const Vec3& p) {
  return dot(f.normal, p) - f.offset;
}

inline HullFace make_face(const std::vector<Vec3>& pts, int a, int b, int c,
                          const Vec3& interior) {
  HullFace f;
  f.a = a; f.b = b; f.c = c;
  Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
  double l = norm(n);
  f.normal = l > 0 ? n / l : Vec3{0, 0, 1};
  f.offset = dot(f.normal, pts[a]);
  if (dot(f.normal, interior) - f.offset > 0) {  // flip to face outward
    std::swap(f.b, f.c);
    f.normal = -1.0 * f.normal;
    f.offset = -f.offset;
  }
  return f;
}

}  // namespace detail

inline TriMesh convex_hull_points(const std::vector<Vec3>& input) {
  using detail::HullFace;
  // Dedupe exact duplicates; keep order stable for determinism.
  std::vector<Vec3> pts;
  {
    std::set<std::array<double, 3>> seen;
    for (const auto& p : input)
      if (seen.insert({p.x, p.y, p.z}).second) pts.push_back(p);
  }
  int n = static_cast<int>(pts.size());
  if (n < 4) throw AffordError(ErrorCode::degenerate_geometry, "fewer than 4 distinct points");

  Aabb bb;
  for (const auto& p : pts) bb.expand(p);
  double scale = std::max(bb.diagonal(), 1e-12);
  double eps = 1e-12 * scale;

  // Initial simplex: extreme pair, then farthest from line, then from plane.
  int i0 = 0, i1 = 0;
  for (int d = 0; d < 3; ++d) {
    int lo = 0, hi = 0;
    for (int i = 1; i < n; ++i) {
      if (pts[i][d] < pts[lo][d]) lo = i;
      if (pts[i][d] > pts[hi][d]) hi = i;
    }
    if (norm_sq(pts[hi] - pts[lo]) > norm_sq(pts[i1] - pts[i0])) { i0 = lo; i1 = hi; }
  }
  if (norm_sq(pts[i1] - pts[i0]) < eps * eps)
    throw AffordError(ErrorCode::degenerate_geometry, "all points coincident");

  Vec3 dir = pts[i1] - pts[i0];
  int i2 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    double d = norm(cross(dir, pts[i] - pts[i0])) / norm(dir);
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0) throw AffordError(ErrorCode::degenerate_geometry, "all points collinear");

  Vec3 pn = normalized(cross(dir, pts[i2] - pts[i0]));
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    double d = std::abs(dot(pn, pts[i] - pts[i0]));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0) throw AffordError(ErrorCode::degenerate_geometry, "all points coplanar");

  Vec3 interior = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  std::vector<HullFace> faces;
  faces.push_back(detail::make_face(pts, i0, i1, i2, interior));
  faces.push_back(detail::make_face(pts, i0, i1, i3, interior));
  faces.push_back(detail::make_face(pts, i0, i2, i3, interior));
  faces.push_back(detail::make_face(pts, i1, i2, i3, interior));

  double visible_eps = std::max(1e-10, 1e-10 * scale);
  auto assign = [&](int pi) {
    for (auto& f : faces) {
      if (!f.alive) continue;
      if (detail::point_plane(f, pts[pi]) > visible_eps) {
        f.outside.push_back(pi);
        return;
      }
    }
  };
  for (int i = 0; i < n; ++i)
    if (i != i0 && i != i1 && i != i2 && i != i3) assign(i);

  for (;;) {
    int fi = -1;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i)
      if (faces[i].alive && !faces[i].outside.empty()) { fi = i; break; }
    if (fi < 0) break;

    // farthest outside point of this face
    int far = faces[fi].outside[0];
    double fd = detail::point_plane(faces[fi], pts[far]);
    for (int pi : faces[fi].outside) {
      double d = detail::point_plane(faces[fi], pts[pi]);
      if (d > fd) { fd = d; far = pi; }
    }

    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i)
      if (faces[i].alive && detail::point_plane(faces[i], pts[far]) > visible_eps)
        visible.push_back(i);

    // Horizon: directed edges of visible faces whose reverse is not visible.
    std::set<std::pair<int, int>> vis_edges;
    for (int i : visible) {
      const auto& f = faces[i];
      vis_edges.insert({f.a, f.b});
      vis_edges.insert({f.b, f.c});
      vis_edges.insert({f.c, f.a});
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& e : vis_edges)
      if (!vis_edges.count({e.second, e.first})) horizon.push_back(e);

    std::vector<int> orphans;
    for (int i : visible) {
      faces[i].alive = false;
      orphans.insert(orphans.end(), faces[i].outside.begin(), faces[i].outside.end());
      faces[i].outside.clear();
    }

    size_t first_new = faces.size();
    for (const auto& e : horizon)
      faces.push_back(detail::make_face(pts, e.first, e.second, far, interior));

    for (int pi : orphans) {
      if (pi == far) continue;
      for (size_t i = first_new; i < faces.size(); ++i) {
        if (detail::point_plane(faces[i], pts[pi]) > visible_eps) {
          faces[i].outside.push_back(pi);
          break;
        }
      }
    }
  }

  // Compact to a mesh containing only hull vertices.
  std::map<int, int> remap;
  TriMesh hull;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    for (int v : {f.a, f.b, f.c}) {
      if (!remap.count(v)) {
        remap[v] = static_cast<int>(hull.vertices.size());
        hull.vertices.push_back(pts[v]);
      }
    }
    hull.triangles.push_back({remap[f.a], remap[f.b], remap[f.c]});
  }
  if (hull.vertices.size() < 4)
    throw AffordError(ErrorCode::degenerate_geometry, "hull collapsed");
  return hull;
}

inline TriMesh convex_hull(const TriMesh& mesh) { return convex_hull_points(mesh.vertices); }

// ---------------------------------------------------------------------------
// Watertightness: every edge shared by exactly two triangles, once in each
// direction (closed orientable manifold, possibly several shells).
// ---------------------------------------------------------------------------

inline bool is_watertight(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      auto key = std::make_pair(t[k], t[(k + 1) % 3]);
      if (++directed[key] > 1) return false;  // duplicated directed edge
    }
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end()) return false;
  }
  return !mesh.triangles.empty();
}

// ---------------------------------------------------------------------------
// Mass properties via signed-tetrahedron integration (covariance form).
// ---------------------------------------------------------------------------

struct MassProperties {
  double volume = 0.0;        // m^3
  double mass = 0.0;          // kg
  Vec3 center_of_mass;        // m
  Mat3 inertia;               // about COM, kg m^2
  bool watertight = true;     // false: computed on the convex hull fallback
};

namespace detail {

// Integrates volume, first moment, and second moment over the solid bounded
// by the triangle set, assuming outward orientation.
inline void integrate_solid(const TriMesh& mesh, double& volume, Vec3& first, Mat3& second) {
  volume = 0.0;
  first = {0, 0, 0};
  second = Mat3::zero();
  // canonical tet covariance: diag 1/60, off-diag 1/120
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    double d = dot(a, cross(b, c));  // 6 * signed tet volume
    volume += d / 6.0;
    first += (a + b + c) * (d / 24.0);
    Mat3 A = Mat3::from_columns(a, b, c);
    Mat3 C0;
    C0.m = {{{1.0 / 60, 1.0 / 120, 1.0 / 120},
             {1.0 / 120, 1.0 / 60, 1.0 / 120},
             {1.0 / 120, 1.0 / 120, 1.0 / 60}}};
    second = second + (A * C0 * A.transposed()) * d;
  }
}

}  // namespace detail

inline MassProperties compute_mass_properties(const TriMesh& mesh, double density = 500.0) {
  if (density <= 0.0) throw AffordError(ErrorCode::invalid_input, "density must be positive");

  MassProperties props;
  TriMesh solid = mesh;
  props.watertight = is_watertight(mesh);
  if (!props.watertight) solid = convex_hull(mesh);  // open shells fall back to the hull

  double volume;
  Vec3 first;
  Mat3 second;
  detail::integrate_solid(solid, volume, first, second);
  if (volume < 0.0) {  // inward orientation: flip
    volume = -volume;
    first = -1.0 * first;
    second = second * -1.0;
  }
  if (volume <= 1e-12)
    throw AffordError(ErrorCode::degenerate_geometry, "computed volume not positive");

  Vec3 com = first / volume;
  // shift second moment to COM, convert covariance to inertia tensor
  Mat3 com_outer;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) com_outer(i, j) = com[i] * com[j];
  Mat3 c_com = second + com_outer * (-volume);
  Mat3 inertia = (Mat3::identity() * c_com.trace() + c_com * -1.0) * density;

  props.volume = volume;
  props.mass = density * volume;
  props.center_of_mass = com;
  props.inertia = inertia;
  return props;
}

// ---------------------------------------------------------------------------
// Oriented bounding box: PCA frame refined by a local Euler-angle grid search.
// ---------------------------------------------------------------------------

struct Obb {
  Vec3 half_extents;  // strictly positive, meters
  Pose frame;         // box center + orientation

  double volume() const { return 8.0 * half_extents.x * half_extents.y * half_extents.z; }

  bool contains(const Vec3& p, double tol = 1e-6) const {
    Vec3 local = frame.rotation.rotate_inverse(p - frame.position);
    return std::abs(local.x) <= half_extents.x + tol &&
           std::abs(local.y) <= half_extents.y + tol &&
           std::abs(local.z) <= half_extents.z + tol;
  }
};

namespace detail {

inline double aabb_volume_in_frame(const std::vector<Vec3>& pts, const Mat3& rot,
                                   Vec3& lo_out, Vec3& hi_out) {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : pts) {
    // coordinates of p in the candidate frame (rot columns are the axes)
    Vec3 q{dot(rot.col(0), p), dot(rot.col(1), p), dot(rot.col(2), p)};
    lo = comp_min(lo, q);
    hi = comp_max(hi, q);
  }
  lo_out = lo;
  hi_out = hi;
  Vec3 e = hi - lo;
  return std::max(e.x, 1e-9) * std::max(e.y, 1e-9) * std::max(e.z, 1e-9);
}

inline Mat3 euler_zyx(double yaw, double pitch, double roll) {
  return (Quat::from_axis_angle({0, 0, 1}, yaw) * Quat::from_axis_angle({0, 1, 0}, pitch) *
          Quat::from_axis_angle({1, 0, 0}, roll))
      .to_matrix();
}

}  // namespace detail

inline Obb compute_obb(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw AffordError(ErrorCode::invalid_input, "empty mesh");

  std::vector<Vec3> pts;
  try {
    pts = convex_hull(mesh).vertices;  // extreme points determine the box
  } catch (const AffordError&) {
    pts = mesh.vertices;               // planar or near-degenerate input
  }

  Vec3 mean{0, 0, 0};
  for (const auto& p : pts) mean += p;
  mean = mean / static_cast<double>(pts.size());

  Mat3 cov = Mat3::zero();
  for (const auto& p : pts) {
    Vec3 d = p - mean;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov(i, j) += d[i] * d[j];
  }
  Vec3 evals;
  Mat3 evecs;
  eigen_symmetric(cov, evals, evecs);
  // right-handed frame
  Vec3 c0 = normalized(evecs.col(0)), c1 = normalized(evecs.col(1));
  Mat3 base = Mat3::from_columns(c0, c1, cross(c0, c1));

  // local refinement: +-15 degrees, 1 degree steps around the PCA axes
  Mat3 best_rot = base;
  Vec3 best_lo, best_hi;
  double best_vol = detail::aabb_volume_in_frame(pts, base, best_lo, best_hi);
  for (int yi = -15; yi <= 15; ++yi) {
    for (int pi = -15; pi <= 15; ++pi) {
      for (int ri = -15; ri <= 15; ++ri) {
        if (yi == 0 && pi == 0 && ri == 0) continue;
        Mat3 rot = base * detail::euler_zyx(deg_to_rad(yi), deg_to_rad(pi), deg_to_rad(ri));
        Vec3 lo, hi;
        double v = detail::aabb_volume_in_frame(pts, rot, lo, hi);
        if (v < best_vol - 1e-15) {
          best_vol = v;
          best_rot = rot;
          best_lo = lo;
          best_hi = hi;
        }
      }
    }
  }

  Obb obb;
  Vec3 half = (best_hi - best_lo) * 0.5;
  obb.half_extents = {std::max(half.x, 1e-4), std::max(half.y, 1e-4), std::max(half.z, 1e-4)};
  Vec3 mid = (best_lo + best_hi) * 0.5;
  obb.frame.rotation = Quat::from_matrix(best_rot);
  obb.frame.position = best_rot * mid;
  return obb;
}

// ---------------------------------------------------------------------------
// Coplanar-face merging on a convex hull, used by stability analysis.
// ---------------------------------------------------------------------------

struct HullPolygonFace {
  Vec3 normal;                                  // outward
  double offset;                                // dot(normal, x) = offset
  std::vector<std::pair<int, int>> boundary;    // directed boundary edges
};

inline std::vector<HullPolygonFace> merge_coplanar_faces(const TriMesh& hull,
                                                         double normal_tol = 1e-6) {
  int nt = static_cast<int>(hull.triangles.size());
  std::vector<Vec3> normals(nt);
  std::vector<double> offsets(nt);
  for (int i = 0; i < nt; ++i) {
    Vec3 a = hull.triangle_vertex(i, 0), b = hull.triangle_vertex(i, 1),
         c = hull.triangle_vertex(i, 2);
    normals[i] = normalized(cross(b - a, c - a));
    offsets[i] = dot(normals[i], a);
  }
  std::vector<int> group(nt, -1);
  int ngroups = 0;
  for (int i = 0; i < nt; ++i) {
    if (group[i] >= 0) continue;
    int g = ngroups++;
    group[i] = g;
    for (int j = i + 1; j < nt; ++j) {
      if (group[j] >= 0) continue;
      if (norm(normals[i] - normals[j]) < normal_tol &&
          std::abs(offsets[i] - offsets[j]) < 1e-9 + normal_tol)
        group[j] = g;
    }
  }
  std::vector<HullPolygonFace> faces(ngroups);
  std::vector<std::map<std::pair<int, int>, int>> edge_use(ngroups);
  for (int i = 0; i < nt; ++i) {
    int g = group[i];
    faces[g].normal = normals[i];
    faces[g].offset = offsets[i];
    const auto& t = hull.triangles[i];
    for (int k = 0; k < 3; ++k) {
      int u = t[k], v = t[(k + 1) % 3];
      auto key = std::minmax(u, v);
      edge_use[g][{key.first, key.second}]++;
    }
  }
  for (int i = 0; i < nt; ++i) {
    int g = group[i];
    const auto& t = hull.triangles[i];
    for (int k = 0; k < 3; ++k) {
      int u = t[k], v = t[(k + 1) % 3];
      auto key = std::minmax(u, v);
      if (edge_use[g][{key.first, key.second}] == 1)
        faces[g].boundary.push_back({u, v});  // interior edges occur twice
    }
  }
  return faces;
}

// In-plane distance from a point (assumed on the face plane) to the face
// boundary; positive inside. Faces of a convex hull are convex polygons.
inline double face_interior_margin(const HullPolygonFace& face, const TriMesh& hull,
                                   const Vec3& point) {
  double margin = 1e300;
  for (const auto& [u, v] : face.boundary) {
    Vec3 a = hull.vertices[u], b = hull.vertices[v];
    Vec3 edge = b - a;
    Vec3 inward = cross(face.normal, edge);  // points into the polygon for CCW boundary
    double l = norm(inward);
    if (l < 1e-15) continue;
    margin = std::min(margin, dot(inward / l, point - a));
  }
  return margin;
}

}  // namespace afford
