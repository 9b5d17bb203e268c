#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <sstream>

#include "afford/geometry.hpp"
#include "afford/mesh.hpp"
#include "afford/rng.hpp"

using namespace afford;

namespace {

TriMesh make_box(const Vec3& half, const Vec3& center = {0, 0, 0}) {
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back(center + Vec3{(i & 1) ? half.x : -half.x, (i & 2) ? half.y : -half.y,
                                       (i & 4) ? half.z : -half.z});
  int f[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                  {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  for (auto& t : f) m.triangles.push_back({t[0], t[1], t[2]});
  return m;
}

// Independent oracle: hull volume by brute-force supporting-plane
// enumeration; O(n^3) over point triples, fine for small clouds.
double brute_hull_volume(const std::vector<Vec3>& pts) {
  int n = static_cast<int>(pts.size());
  std::map<std::array<long long, 4>, std::pair<Vec3, double>> planes;
  auto quant = [](double v) { return std::llround(v * 1e7); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        Vec3 nrm = cross(pts[j] - pts[i], pts[k] - pts[i]);
        double len = norm(nrm);
        if (len < 1e-12) continue;
        nrm = nrm / len;
        double off = dot(nrm, pts[i]);
        bool above = false, below = false;
        for (int m = 0; m < n; ++m) {
          double d = dot(nrm, pts[m]) - off;
          if (d > 1e-9) above = true;
          if (d < -1e-9) below = true;
        }
        if (above && below) continue;
        if (above) { nrm = -1.0 * nrm; off = -off; }  // make outward
        planes[{quant(nrm.x), quant(nrm.y), quant(nrm.z), quant(off)}] = {nrm, off};
      }
  double volume = 0.0;
  for (const auto& [key, plane] : planes) {
    const auto& [nrm, off] = plane;
    std::vector<Vec3> on_plane;
    for (const auto& p : pts)
      if (std::abs(dot(nrm, p) - off) <= 1e-9) on_plane.push_back(p);
    if (on_plane.size() < 3) continue;
    // 2D convex hull (monotone chain) of the coplanar points, then its area
    Vec3 u = normalized(on_plane[1] - on_plane[0]);
    Vec3 v = cross(nrm, u);
    std::vector<std::pair<double, double>> uv;
    for (const auto& p : on_plane) uv.push_back({dot(p - on_plane[0], u), dot(p - on_plane[0], v)});
    std::sort(uv.begin(), uv.end());
    uv.erase(std::unique(uv.begin(), uv.end()), uv.end());
    auto cross2 = [](const std::pair<double, double>& o, const std::pair<double, double>& a,
                     const std::pair<double, double>& b) {
      return (a.first - o.first) * (b.second - o.second) -
             (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> ch;
    for (int pass = 0; pass < 2; ++pass) {
      size_t start = ch.size();
      for (const auto& p : uv) {
        while (ch.size() >= start + 2 && cross2(ch[ch.size() - 2], ch.back(), p) <= 0)
          ch.pop_back();
        ch.push_back(p);
      }
      ch.pop_back();
      std::reverse(uv.begin(), uv.end());
    }
    double area = 0.0;
    for (size_t t = 1; t + 1 < ch.size(); ++t)
      area += 0.5 * cross2(ch[0], ch[t], ch[t + 1]);
    volume += off * std::abs(area) / 3.0;
  }
  return volume;
}

TriMesh open_cup_shell(double r_outer, double r_inner, double height, int segments = 24) {
  // bottom disk + outer and inner walls, open top: deliberately not watertight
  TriMesh m;
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    m.vertices.push_back({r_outer * std::cos(a), r_outer * std::sin(a), 0});
    m.vertices.push_back({r_outer * std::cos(a), r_outer * std::sin(a), height});
    m.vertices.push_back({r_inner * std::cos(a), r_inner * std::sin(a), 0.004});
    m.vertices.push_back({r_inner * std::cos(a), r_inner * std::sin(a), height});
  }
  int center = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0, 0, 0});
  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    int o0 = 4 * i, o1 = 4 * j;
    m.triangles.push_back({o0, o1, o0 + 1});
    m.triangles.push_back({o1, o1 + 1, o0 + 1});
    m.triangles.push_back({o0 + 2, o0 + 3, o1 + 2});
    m.triangles.push_back({o1 + 2, o0 + 3, o1 + 3});
    m.triangles.push_back({center, o1, o0});
  }
  return m;
}

}  // namespace

TEST_CASE("OFF load: unit cube counts") {
  std::istringstream in(
      "OFF\n8 12 0\n"
      "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n"
      "3 0 2 3\n3 0 3 1\n3 4 5 7\n3 4 7 6\n3 0 1 5\n3 0 5 4\n"
      "3 2 6 7\n3 2 7 3\n3 0 4 6\n3 0 6 2\n3 1 3 7\n3 1 7 5\n");
  TriMesh m = parse_mesh(in, MeshFormat::off);
  CHECK(m.vertices.size() == 8);
  CHECK(m.triangles.size() == 12);
  CHECK(m.applied_scale == 1.0);  // diagonal sqrt(3) is in range
}

TEST_CASE("OFF load: ModelNet header quirk and comments") {
  std::istringstream in(
      "# comment\nOFF4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n");
  TriMesh m = parse_mesh(in, MeshFormat::off);
  CHECK(m.vertices.size() == 4);
  CHECK(m.triangles.size() == 1);
}

TEST_CASE("OBJ load: out-of-range face index is rejected") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  try {
    parse_mesh(in, MeshFormat::obj);
    FAIL("expected invalid_input");
  } catch (const AffordError& e) {
    CHECK(e.code() == ErrorCode::invalid_input);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }
}

TEST_CASE("OBJ load: slash forms and quad fan") {
  std::istringstream in(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2/2 3//3 4\n");
  TriMesh m = parse_mesh(in, MeshFormat::obj);
  CHECK(m.vertices.size() == 4);
  CHECK(m.triangles.size() == 2);
}

TEST_CASE("unit normalization rescales large ModelNet-style meshes") {
  // diagonal 87 units -> rescaled to 0.5 m
  std::ostringstream off;
  off.precision(17);
  off << "OFF\n4 1 0\n0 0 0\n" << 87.0 / std::sqrt(3.0) << " 0 0\n0 "
      << 87.0 / std::sqrt(3.0) << " 0\n0 0 " << 87.0 / std::sqrt(3.0) << "\n3 0 1 2\n";
  std::istringstream in(off.str());
  TriMesh m = parse_mesh(in, MeshFormat::off);
  CHECK(m.bounds().diagonal() == Catch::Approx(0.5).epsilon(1e-9));
  CHECK(m.applied_scale == Catch::Approx(0.5 / 87.0).epsilon(1e-9));
}

TEST_CASE("empty mesh rejected") {
  std::istringstream in("OFF\n0 0 0\n");
  CHECK_THROWS_AS(parse_mesh(in, MeshFormat::off), AffordError);
}

TEST_CASE("convex hull: interior points discarded") {
  TriMesh box = make_box({0.5, 0.5, 0.5});
  TriMesh with_inner = box;
  with_inner.vertices.push_back({0.1, 0.1, 0.1});
  TriMesh hull = convex_hull(with_inner);
  CHECK(hull.vertices.size() == 8);
}

TEST_CASE("convex hull: regular tetrahedron") {
  TriMesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.triangles = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  TriMesh hull = convex_hull(m);
  CHECK(hull.vertices.size() == 4);
  CHECK(hull.triangles.size() == 4);
}

TEST_CASE("convex hull: contains all inputs and is idempotent") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (pts.size() < 100) {
    Vec3 p{uni(rng), uni(rng), uni(rng)};
    if (norm(p) <= 1.0) pts.push_back(p * 0.3);
  }
  TriMesh hull = convex_hull_points(pts);
  auto faces = merge_coplanar_faces(hull);
  for (const auto& p : pts) {
    for (const auto& f : faces) {
      CHECK(dot(f.normal, p) - f.offset <= 1e-9);
    }
  }
  TriMesh hull2 = convex_hull(hull);
  std::set<std::array<double, 3>> s1, s2;
  for (const auto& v : hull.vertices) s1.insert({v.x, v.y, v.z});
  for (const auto& v : hull2.vertices) s2.insert({v.x, v.y, v.z});
  CHECK(s1 == s2);
}

TEST_CASE("convex hull: coplanar input rejected") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, 0.5, 0}};
  CHECK_THROWS_AS(convex_hull_points(pts), AffordError);
}

TEST_CASE("convex hull volume matches brute-force oracle on random clouds") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 18; ++i) pts.push_back({uni(rng), 0.7 * uni(rng), 0.4 * uni(rng)});
    TriMesh hull = convex_hull_points(pts);
    double vol_impl = 0.0;
    for (const auto& t : hull.triangles)
      vol_impl += dot(hull.vertices[t[0]],
                      cross(hull.vertices[t[1]], hull.vertices[t[2]])) / 6.0;
    double vol_oracle = brute_hull_volume(pts);
    CHECK(std::abs(vol_impl) == Catch::Approx(vol_oracle).epsilon(1e-7));
  }
}

TEST_CASE("mass properties: unit cube analytic values") {
  TriMesh cube = make_box({0.5, 0.5, 0.5});
  MassProperties p = compute_mass_properties(cube, 1000.0);
  CHECK(p.watertight);
  CHECK(p.volume == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(p.mass == Catch::Approx(1000.0).epsilon(1e-12));
  CHECK(norm(p.center_of_mass) < 1e-12);
  for (int i = 0; i < 3; ++i) {
    CHECK(p.inertia(i, i) == Catch::Approx(1000.0 / 6.0).epsilon(1e-9));
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(p.inertia(i, j)) < 1e-9);
  }
}

TEST_CASE("mass properties: translation equivariance") {
  TriMesh cube = make_box({0.5, 0.5, 0.5}, {1.5, 2.5, 3.5});
  MassProperties p = compute_mass_properties(cube, 1000.0);
  CHECK(p.volume == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(norm(p.center_of_mass - Vec3{1.5, 2.5, 3.5}) < 1e-9);
  for (int i = 0; i < 3; ++i)
    CHECK(p.inertia(i, i) == Catch::Approx(1000.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("mass properties: rigid rotation invariance") {
  TriMesh box = make_box({0.1, 0.2, 0.3});
  MassProperties p0 = compute_mass_properties(box, 500.0);
  std::mt19937_64 rng(5);
  Quat q = random_rotation(rng);
  Mat3 r = q.to_matrix();
  TriMesh rotated = box.transformed({q, {0, 0, 0}});
  MassProperties p1 = compute_mass_properties(rotated, 500.0);
  CHECK(p1.volume == Catch::Approx(p0.volume).epsilon(1e-9));
  Mat3 expected = r * p0.inertia * r.transposed();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(p1.inertia(i, j) - expected(i, j)) < 1e-7);
}

TEST_CASE("mass properties: open shell falls back to convex hull") {
  TriMesh shell = open_cup_shell(0.04, 0.036, 0.1);
  CHECK_FALSE(is_watertight(shell));
  MassProperties p = compute_mass_properties(shell, 500.0);
  CHECK_FALSE(p.watertight);
  double oracle = brute_hull_volume(shell.vertices);
  CHECK(p.volume == Catch::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("mass properties: degenerate geometry rejected") {
  TriMesh flat;
  flat.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  flat.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(compute_mass_properties(flat, 500.0), AffordError);
}

TEST_CASE("OBB: axis-aligned box is its own OBB") {
  TriMesh box = make_box({0.1, 0.2, 0.3});
  Obb obb = compute_obb(box);
  std::array<double, 3> he = {obb.half_extents.x, obb.half_extents.y, obb.half_extents.z};
  std::sort(he.begin(), he.end());
  CHECK(he[0] == Catch::Approx(0.1).margin(1e-9));
  CHECK(he[1] == Catch::Approx(0.2).margin(1e-9));
  CHECK(he[2] == Catch::Approx(0.3).margin(1e-9));
  CHECK(norm(obb.frame.position) < 1e-9);
}

TEST_CASE("OBB: rotated box recovered within tolerance") {
  TriMesh box = make_box({0.1, 0.2, 0.3});
  Quat q30 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(30));
  TriMesh rotated = box.transformed({q30, {0, 0, 0}});
  Obb obb = compute_obb(rotated);
  std::array<double, 3> he = {obb.half_extents.x, obb.half_extents.y, obb.half_extents.z};
  std::sort(he.begin(), he.end());
  CHECK(he[0] == Catch::Approx(0.1).margin(1e-6));
  CHECK(he[1] == Catch::Approx(0.2).margin(1e-6));
  CHECK(he[2] == Catch::Approx(0.3).margin(1e-6));

  // oracle: brute-force yaw grid at 1 degree steps minimizing AABB volume
  double best = 1e300;
  for (int deg = 0; deg < 90; ++deg) {
    Quat q = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(deg));
    Aabb bb;
    for (const auto& v : rotated.vertices) bb.expand(q.rotate(v));
    Vec3 e = bb.extents();
    best = std::min(best, e.x * e.y * e.z);
  }
  CHECK(obb.volume() <= best * (1.0 + 1e-6));
}

TEST_CASE("OBB: volume within 5 percent of rotation-sampling oracle") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 60; ++i)
    pts.push_back({0.3 * gauss(rng), 0.15 * gauss(rng), 0.05 * gauss(rng)});
  TriMesh cloud;
  cloud.vertices = pts;
  cloud.triangles = {{0, 1, 2}};  // triangles unused by OBB
  Obb obb = compute_obb(cloud);

  double best = 1e300;
  for (int i = 0; i < 20000; ++i) {
    Quat q = super_fibonacci_rotation(i, 20000);
    Aabb bb;
    for (const auto& v : pts) bb.expand(q.rotate(v));
    Vec3 e = bb.extents();
    best = std::min(best, e.x * e.y * e.z);
  }
  CHECK(obb.volume() <= best * 1.05);
}

TEST_CASE("OBB: containment invariant and degenerate clamp") {
  TriMesh tri;
  tri.vertices = {{0, 0, 0}, {0.2, 0, 0}, {0, 0.1, 0}};
  tri.triangles = {{0, 1, 2}};
  Obb obb = compute_obb(tri);
  CHECK(obb.half_extents.x >= 1e-4);
  CHECK(obb.half_extents.y >= 1e-4);
  CHECK(obb.half_extents.z >= 1e-4);
  for (const auto& v : tri.vertices) CHECK(obb.contains(v, 1e-6));

  TriMesh shell = open_cup_shell(0.04, 0.036, 0.1);
  Obb obb2 = compute_obb(shell);
  for (const auto& v : shell.vertices) CHECK(obb2.contains(v, 1e-6));
}

TEST_CASE("coplanar face merge groups cube into six faces") {
  TriMesh hull = convex_hull(make_box({0.5, 0.5, 0.5}));
  auto faces = merge_coplanar_faces(hull);
  CHECK(faces.size() == 6);
  for (const auto& f : faces) {
    CHECK(f.boundary.size() == 4);
    double margin = face_interior_margin(f, hull, f.normal * f.offset);
    CHECK(margin == Catch::Approx(0.5).margin(1e-9));
  }
}
