#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "afford/error.hpp"
#include "afford/geometry.hpp"
#include "afford/math.hpp"
#include "afford/mesh.hpp"

namespace afford {

struct WorldConfig {
  double timestep = 1.0 / 240.0;     // s
  double gravity = 9.81;             // m/s^2, along -z
  int solver_iterations = 10;
  double friction = 0.5;
  double restitution = 0.0;          // [0, 1]
  double contact_slop = 1e-3;        // m
  double baumgarte = 0.2;
  double settle_speed_eps = 1e-2;    // m/s and rad/s
  int settle_window = 60;            // consecutive quiet steps
  double cell_size = 0.05;           // broadphase hash cell, m
  std::uint64_t rng_seed = 0;

  void check() const {
    if (timestep <= 0) throw AffordError(ErrorCode::config_error, "timestep must be positive");
    if (solver_iterations < 1)
      throw AffordError(ErrorCode::config_error, "solver_iterations must be >= 1");
    if (restitution < 0 || restitution > 1)
      throw AffordError(ErrorCode::config_error, "restitution must be in [0,1]");
  }
};

enum class BodyKind { static_mesh, dynamic_mesh, sphere_composite, ground_plane };
enum class BodyMode { dynamic, kinematic, fixed };

struct SphereShape {
  Vec3 offset;   // body frame, m
  double radius; // m
};

struct ContactPoint {
  int body_a = -1, body_b = -1;
  Vec3 point;   // world, m
  Vec3 normal;  // unit, a -> b
  double depth; // m, positive = penetration; >= -contact_slop
};

namespace detail {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;
  Vec3 bp = p - b;
  double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  Vec3 cp = p - c;
  double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + (c - b) * w;
  }
  double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

struct TriangleGrid {
  double cell = 0.05;
  std::unordered_map<std::uint64_t, std::vector<int>> cells;

  static std::uint64_t key(long ix, long iy, long iz) {
    std::uint64_t h = 1469598103934665603ull;
    for (long v : {ix, iy, iz}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }

  void build(const TriMesh& mesh, double cell_size) {
    cell = cell_size;
    cells.clear();
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
      Aabb bb;
      for (int k = 0; k < 3; ++k) bb.expand(mesh.triangle_vertex(t, k));
      long x0 = static_cast<long>(std::floor(bb.lo.x / cell)),
           x1 = static_cast<long>(std::floor(bb.hi.x / cell));
      long y0 = static_cast<long>(std::floor(bb.lo.y / cell)),
           y1 = static_cast<long>(std::floor(bb.hi.y / cell));
      long z0 = static_cast<long>(std::floor(bb.lo.z / cell)),
           z1 = static_cast<long>(std::floor(bb.hi.z / cell));
      for (long x = x0; x <= x1; ++x)
        for (long y = y0; y <= y1; ++y)
          for (long z = z0; z <= z1; ++z) cells[key(x, y, z)].push_back(t);
    }
  }

  // Sorted, deduplicated candidate triangles overlapping the box.
  std::vector<int> query(const Aabb& box) const {
    std::vector<int> out;
    long x0 = static_cast<long>(std::floor(box.lo.x / cell)),
         x1 = static_cast<long>(std::floor(box.hi.x / cell));
    long y0 = static_cast<long>(std::floor(box.lo.y / cell)),
         y1 = static_cast<long>(std::floor(box.hi.y / cell));
    long z0 = static_cast<long>(std::floor(box.lo.z / cell)),
         z1 = static_cast<long>(std::floor(box.hi.z / cell));
    for (long x = x0; x <= x1; ++x)
      for (long y = y0; y <= y1; ++y)
        for (long z = z0; z <= z1; ++z) {
          auto it = cells.find(key(x, y, z));
          if (it != cells.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

}  // namespace detail

struct Body {
  int id = -1;
  BodyKind kind = BodyKind::sphere_composite;
  BodyMode mode = BodyMode::dynamic;
  Pose pose;
  Vec3 linear_velocity;
  Vec3 angular_velocity;

  std::vector<SphereShape> spheres;  // sphere_composite
  TriMesh mesh;                      // static_mesh: world space; dynamic_mesh: body frame
  std::vector<Vec3> hull_points;     // dynamic_mesh ground-contact points, body frame
  detail::TriangleGrid grid;         // static_mesh broadphase

  double mass = 0.0;
  double inv_mass = 0.0;
  Mat3 inertia_body = Mat3::identity();
  Mat3 inv_inertia_body = Mat3::zero();
  double bounding_radius = 0.0;  // about body origin

  bool is_dynamic() const { return mode == BodyMode::dynamic; }

  Mat3 inv_inertia_world() const {
    Mat3 r = pose.rotation.to_matrix();
    return r * inv_inertia_body * r.transposed();
  }

  Vec3 velocity_at(const Vec3& world_point) const {
    return linear_velocity + cross(angular_velocity, world_point - pose.position);
  }
};

// Deterministic fixed-timestep rigid-body world. Supports exactly the pairs
// the pipeline needs: spheres vs static mesh / ground / spheres, and a
// dynamic mesh vs ground. Copyable; copies evolve independently.
class World {
 public:
  explicit World(const WorldConfig& config = {}) : config_(config) { config_.check(); }

  const WorldConfig& config() const { return config_; }
  int step_count() const { return step_count_; }
  int body_count() const { return static_cast<int>(bodies_.size()); }

  const Body& body(int id) const {
    if (id < 0 || id >= static_cast<int>(bodies_.size()))
      throw AffordError(ErrorCode::unknown_body, "body " + std::to_string(id));
    return bodies_[id];
  }
  Body& body_mut(int id) { return const_cast<Body&>(body(id)); }

  int add_ground() {
    Body b;
    b.kind = BodyKind::ground_plane;
    b.mode = BodyMode::fixed;
    return push(std::move(b));
  }

  // Mesh fixed in the world at `pose`; triangles are baked to world space.
  int add_static_mesh(const TriMesh& mesh, const Pose& pose) {
    Body b;
    b.kind = BodyKind::static_mesh;
    b.mode = BodyMode::fixed;
    b.pose = pose;
    b.mesh = mesh.transformed(pose);
    b.grid.build(b.mesh, config_.cell_size);
    return push(std::move(b));
  }

  // Mesh must be expressed about its center of mass (|com| < 1e-9).
  int add_dynamic_mesh(const TriMesh& mesh, const MassProperties& props, const Pose& pose) {
    if (norm(props.center_of_mass) > 1e-9)
      throw AffordError(ErrorCode::invalid_input,
                        "dynamic mesh must be centered on its center of mass");
    if (props.mass <= 0) throw AffordError(ErrorCode::invalid_input, "dynamic body needs mass");
    Body b;
    b.kind = BodyKind::dynamic_mesh;
    b.mode = BodyMode::dynamic;
    b.pose = pose;
    b.mesh = mesh;
    b.hull_points = convex_hull(mesh).vertices;
    b.mass = props.mass;
    b.inv_mass = 1.0 / props.mass;
    b.inertia_body = props.inertia;
    b.inv_inertia_body = props.inertia.inverse();
    for (const auto& v : b.hull_points) b.bounding_radius = std::max(b.bounding_radius, norm(v));
    return push(std::move(b));
  }

  // Sphere offsets are re-centered so the body origin is the composite COM.
  int add_sphere_composite(std::vector<SphereShape> spheres, double mass, const Pose& pose,
                           BodyMode mode = BodyMode::dynamic) {
    if (spheres.empty()) throw AffordError(ErrorCode::invalid_input, "composite needs spheres");
    for (const auto& s : spheres)
      if (s.radius <= 0) throw AffordError(ErrorCode::invalid_input, "sphere radius must be positive");
    if (mass <= 0) throw AffordError(ErrorCode::invalid_input, "dynamic body needs mass");

    double total_w = 0;
    Vec3 com{0, 0, 0};
    for (const auto& s : spheres) {
      double w = s.radius * s.radius * s.radius;
      com += s.offset * w;
      total_w += w;
    }
    com = com / total_w;
    for (auto& s : spheres) s.offset -= com;

    Body b;
    b.kind = BodyKind::sphere_composite;
    b.mode = mode;
    b.pose = {pose.rotation, pose.position + pose.rotation.rotate(com)};
    b.spheres = spheres;
    b.mass = mass;
    b.inv_mass = mode == BodyMode::dynamic ? 1.0 / mass : 0.0;

    Mat3 inertia = Mat3::zero();
    for (const auto& s : spheres) {
      double m = mass * (s.radius * s.radius * s.radius) / total_w;
      double solid = 0.4 * m * s.radius * s.radius;
      Mat3 para = Mat3::zero();
      double d2 = norm_sq(s.offset);
      for (int i = 0; i < 3; ++i) {
        para(i, i) = solid + m * (d2 - s.offset[i] * s.offset[i]);
        for (int j = 0; j < 3; ++j)
          if (i != j) para(i, j) = -m * s.offset[i] * s.offset[j];
      }
      inertia = inertia + para;
      b.bounding_radius = std::max(b.bounding_radius, norm(s.offset) + s.radius);
    }
    b.inertia_body = inertia;
    b.inv_inertia_body = mode == BodyMode::dynamic ? inertia.inverse() : Mat3::zero();
    return push(std::move(b));
  }

  void set_mode(int id, BodyMode mode) {
    Body& b = body_mut(id);
    if (b.kind == BodyKind::static_mesh || b.kind == BodyKind::ground_plane)
      throw AffordError(ErrorCode::invalid_input, "cannot change mode of a fixed body");
    b.mode = mode;
    b.inv_mass = mode == BodyMode::dynamic ? 1.0 / b.mass : 0.0;
    b.inv_inertia_body = mode == BodyMode::dynamic ? b.inertia_body.inverse() : Mat3::zero();
  }

  // One fixed timestep: gravity, contact impulses, position integration.
  // Identical inputs produce bit-identical outputs.
  void step() {
    double dt = config_.timestep;
    for (auto& b : bodies_)
      if (b.is_dynamic()) b.linear_velocity.z -= config_.gravity * dt;

    auto contacts = detect_contacts(true);
    solve_contacts(contacts);

    for (auto& b : bodies_) {
      if (!b.is_dynamic()) continue;
      b.pose.position += b.linear_velocity * dt;
      Quat w{0, b.angular_velocity.x, b.angular_velocity.y, b.angular_velocity.z};
      b.pose.rotation = (b.pose.rotation + (w * b.pose.rotation) * (0.5 * dt)).normalized();
      if (!b.pose.is_finite() || !is_finite(b.linear_velocity) || !is_finite(b.angular_velocity))
        throw AffordError(ErrorCode::numeric_blowup, "body " + std::to_string(b.id));
    }
    ++step_count_;
  }

  struct SettleResult {
    bool settled = false;
    int steps = 0;
  };

  // Steps until every dynamic body is quiet for settle_window consecutive
  // steps, or until max_sim_time elapses.
  SettleResult settle(double max_sim_time) {
    if (max_sim_time <= 0) throw AffordError(ErrorCode::invalid_input, "max_sim_time must be positive");
    int max_steps = static_cast<int>(std::ceil(max_sim_time / config_.timestep));
    int quiet = 0;
    for (int i = 0; i < max_steps; ++i) {
      step();
      bool calm = true;
      for (const auto& b : bodies_) {
        if (!b.is_dynamic()) continue;
        if (norm(b.linear_velocity) > config_.settle_speed_eps ||
            norm(b.angular_velocity) > config_.settle_speed_eps) {
          calm = false;
          break;
        }
      }
      quiet = calm ? quiet + 1 : 0;
      if (quiet >= config_.settle_window) return {true, i + 1};
    }
    return {false, max_steps};
  }

  struct SweepResult {
    bool collided = false;
    int collision_step = -1;  // world step index when contact exceeded slop
    int steps_executed = 0;
  };

  // Drives a group of kinematic bodies rigidly along center waypoints at
  // `speed`. Offsets are the body poses relative to the group center. Motion
  // stops at the first contact depth > contact_slop involving a moved body.
  SweepResult move_kinematic_group(const std::vector<int>& ids,
                                   const std::vector<Pose>& offsets,
                                   const std::vector<Pose>& waypoints, double speed) {
    if (ids.empty() || offsets.size() != ids.size())
      throw AffordError(ErrorCode::invalid_input, "ids/offsets mismatch");
    if (waypoints.empty()) throw AffordError(ErrorCode::invalid_input, "waypoints must be non-empty");
    if (speed <= 0) throw AffordError(ErrorCode::invalid_input, "speed must be positive");
    for (int id : ids)
      if (body(id).mode != BodyMode::kinematic)
        throw AffordError(ErrorCode::invalid_input, "body " + std::to_string(id) + " not kinematic");

    std::vector<double> cum{0.0};
    for (size_t i = 1; i < waypoints.size(); ++i) {
      double d = norm(waypoints[i].position - waypoints[i - 1].position);
      double a = waypoints[i - 1].rotation.angle_to(waypoints[i].rotation);
      cum.push_back(cum.back() + std::max(d, a * 0.1));  // pure turns paced as 0.1 m lever
    }
    double total = cum.back();
    double dt = config_.timestep;

    auto center_at = [&](double s) -> Pose {
      if (total <= 0) return waypoints.back();
      s = std::clamp(s, 0.0, total);
      size_t seg = 1;
      while (seg < cum.size() - 1 && cum[seg] < s) ++seg;
      double seg_len = cum[seg] - cum[seg - 1];
      double t = seg_len > 0 ? (s - cum[seg - 1]) / seg_len : 1.0;
      return {slerp(waypoints[seg - 1].rotation, waypoints[seg].rotation, t),
              waypoints[seg - 1].position +
                  (waypoints[seg].position - waypoints[seg - 1].position) * t};
    };

    auto place = [&](const Pose& center, const Vec3& vel) {
      for (size_t k = 0; k < ids.size(); ++k) {
        Body& b = body_mut(ids[k]);
        b.pose = center.compose(offsets[k]);
        b.linear_velocity = vel;
        b.angular_velocity = {0, 0, 0};
      }
    };

    place(center_at(0.0), {0, 0, 0});
    SweepResult result;
    double s = 0.0;
    while (s < total) {
      double s_next = std::min(s + speed * dt, total);
      Pose c0 = center_at(s), c1 = center_at(s_next);
      Vec3 vel = (c1.position - c0.position) / dt;
      place(c1, vel);
      step();
      ++result.steps_executed;
      s = s_next;

      for (int id : ids) {
        for (const auto& cp : contacts_of(id)) {
          int other = cp.body_a == id ? cp.body_b : cp.body_a;
          if (body(other).kind == BodyKind::sphere_composite &&
              std::find(ids.begin(), ids.end(), other) != ids.end())
            continue;  // contacts within the moving group cannot occur; skip anyway
          if (cp.depth > config_.contact_slop) {
            result.collided = true;
            result.collision_step = step_count_;
            break;
          }
        }
        if (result.collided) break;
      }
      if (result.collided) break;
    }
    for (int id : ids) {
      Body& b = body_mut(id);
      b.linear_velocity = {0, 0, 0};
      b.angular_velocity = {0, 0, 0};
    }
    return result;
  }

  struct MoveResult {
    bool collided = false;
    std::optional<int> collision_step;
  };

  MoveResult move_kinematic(int id, const std::vector<Pose>& waypoints, double speed) {
    auto r = move_kinematic_group({id}, {Pose::identity()}, waypoints, speed);
    MoveResult out;
    out.collided = r.collided;
    if (r.collided) out.collision_step = r.collision_step;
    return out;
  }

  // Current contact points involving `id` (pure query, no state change).
  std::vector<ContactPoint> contacts_of(int id) const {
    body(id);  // validates
    std::vector<ContactPoint> all = detect_contacts(false);
    std::vector<ContactPoint> out;
    for (const auto& c : all)
      if (c.body_a == id || c.body_b == id) out.push_back(c);
    return out;
  }

  struct ContactSummary {
    int n_object = 0;  // static or dynamic mesh
    int n_agent = 0;   // other sphere composites
    int n_ground = 0;
  };

  ContactSummary contact_summary(int id) const {
    ContactSummary s;
    for (const auto& c : contacts_of(id)) {
      int other = c.body_a == id ? c.body_b : c.body_a;
      switch (body(other).kind) {
        case BodyKind::static_mesh:
        case BodyKind::dynamic_mesh: ++s.n_object; break;
        case BodyKind::sphere_composite: ++s.n_agent; break;
        case BodyKind::ground_plane: ++s.n_ground; break;
      }
    }
    return s;
  }

  std::vector<ContactPoint> all_contacts() const { return detect_contacts(false); }

  // Kinetic plus gravitational potential energy of all dynamic bodies.
  double mechanical_energy() const {
    double e = 0.0;
    for (const auto& b : bodies_) {
      if (!b.is_dynamic()) continue;
      Mat3 r = b.pose.rotation.to_matrix();
      Mat3 inertia_world = r * b.inertia_body * r.transposed();
      e += 0.5 * b.mass * norm_sq(b.linear_velocity);
      e += 0.5 * dot(b.angular_velocity, inertia_world * b.angular_velocity);
      e += b.mass * config_.gravity * b.pose.position.z;
    }
    return e;
  }

 private:
  int push(Body&& b) {
    b.id = static_cast<int>(bodies_.size());
    bodies_.push_back(std::move(b));
    return bodies_.back().id;
  }

  struct SolverContact {
    int a, b;           // body indices; impulses push a and b apart along n (a -> b)
    Vec3 point;
    Vec3 normal;
    double gap;         // signed distance, negative = penetrating
    double accum_n = 0;
    double accum_t1 = 0, accum_t2 = 0;
    Vec3 t1, t2;
  };

  void sphere_vs_ground(const Body& sph, const Body& ground, double margin, bool detect_band,
                        std::vector<SolverContact>& out) const {
    for (const auto& s : sph.spheres) {
      Vec3 c = sph.pose.transform_point(s.offset);
      double gap = c.z - s.radius;
      if (gap > (detect_band ? margin : config_.contact_slop)) continue;
      SolverContact sc;
      sc.a = ground.id;
      sc.b = sph.id;
      sc.point = {c.x, c.y, c.z - s.radius};
      sc.normal = {0, 0, 1};
      sc.gap = gap;
      out.push_back(sc);
    }
  }

  void sphere_vs_static_mesh(const Body& sph, const Body& mesh, double margin, bool detect_band,
                             std::vector<SolverContact>& out) const {
    double band = detect_band ? margin : config_.contact_slop;
    for (const auto& s : sph.spheres) {
      Vec3 c = sph.pose.transform_point(s.offset);
      Aabb box;
      box.expand(c);
      box.inflate(s.radius + band);
      for (int t : mesh.grid.query(box)) {
        Vec3 a = mesh.mesh.triangle_vertex(t, 0), b = mesh.mesh.triangle_vertex(t, 1),
             cc = mesh.mesh.triangle_vertex(t, 2);
        Vec3 q = detail::closest_point_on_triangle(c, a, b, cc);
        Vec3 d = c - q;
        double dist = norm(d);
        double gap = dist - s.radius;
        if (gap > band) continue;
        Vec3 n;
        if (dist > 1e-9) {
          n = d / dist;
        } else {
          n = normalized(cross(b - a, cc - a));
          if (dot(n, sph.linear_velocity) > 0) n = -1.0 * n;  // push against approach
        }
        SolverContact sc;
        sc.a = mesh.id;
        sc.b = sph.id;
        sc.point = q;
        sc.normal = n;
        sc.gap = gap;
        out.push_back(sc);
      }
    }
  }

  void sphere_vs_sphere(const Body& x, const Body& y, double margin, bool detect_band,
                        std::vector<SolverContact>& out) const {
    double band = detect_band ? margin : config_.contact_slop;
    for (const auto& sx : x.spheres) {
      Vec3 cx = x.pose.transform_point(sx.offset);
      for (const auto& sy : y.spheres) {
        Vec3 cy = y.pose.transform_point(sy.offset);
        Vec3 d = cy - cx;
        double dist = norm(d);
        double gap = dist - (sx.radius + sy.radius);
        if (gap > band) continue;
        Vec3 n = dist > 1e-12 ? d / dist : Vec3{0, 0, 1};
        SolverContact sc;
        sc.a = x.id;
        sc.b = y.id;
        sc.point = cx + n * sx.radius;
        sc.normal = n;
        sc.gap = gap;
        out.push_back(sc);
      }
    }
  }

  void mesh_vs_ground(const Body& mesh, const Body& ground, double margin, bool detect_band,
                      std::vector<SolverContact>& out) const {
    double band = detect_band ? margin : config_.contact_slop;
    for (const auto& p : mesh.hull_points) {
      Vec3 w = mesh.pose.transform_point(p);
      if (w.z > band) continue;
      SolverContact sc;
      sc.a = ground.id;
      sc.b = mesh.id;
      sc.point = w;
      sc.normal = {0, 0, 1};
      sc.gap = w.z;
      out.push_back(sc);
    }
  }

  template <typename ContactT = ContactPoint>
  std::vector<SolverContact> collect(bool detect_band) const {
    std::vector<SolverContact> out;
    double dt = config_.timestep;
    int n = static_cast<int>(bodies_.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Body &x = bodies_[i], &y = bodies_[j];
        if (!x.is_dynamic() && !y.is_dynamic() && x.mode != BodyMode::kinematic &&
            y.mode != BodyMode::kinematic)
          continue;
        double motion = (norm(x.linear_velocity) + norm(x.angular_velocity) * x.bounding_radius +
                         norm(y.linear_velocity) + norm(y.angular_velocity) * y.bounding_radius) *
                        dt;
        double margin = config_.contact_slop + motion;
        auto pair = std::make_pair(x.kind, y.kind);
        if (x.kind == BodyKind::sphere_composite && y.kind == BodyKind::ground_plane)
          sphere_vs_ground(x, y, margin, detect_band, out);
        else if (x.kind == BodyKind::ground_plane && y.kind == BodyKind::sphere_composite)
          sphere_vs_ground(y, x, margin, detect_band, out);
        else if (x.kind == BodyKind::sphere_composite && y.kind == BodyKind::static_mesh)
          sphere_vs_static_mesh(x, y, margin, detect_band, out);
        else if (x.kind == BodyKind::static_mesh && y.kind == BodyKind::sphere_composite)
          sphere_vs_static_mesh(y, x, margin, detect_band, out);
        else if (x.kind == BodyKind::sphere_composite && y.kind == BodyKind::sphere_composite)
          sphere_vs_sphere(x, y, margin, detect_band, out);
        else if (x.kind == BodyKind::dynamic_mesh && y.kind == BodyKind::ground_plane)
          mesh_vs_ground(x, y, margin, detect_band, out);
        else if (x.kind == BodyKind::ground_plane && y.kind == BodyKind::dynamic_mesh)
          mesh_vs_ground(y, x, margin, detect_band, out);
        (void)pair;
      }
    }
    return out;
  }

  std::vector<ContactPoint> detect_contacts(bool) const;  // specialization below

  std::vector<SolverContact> detect_solver_contacts() { return collect(true); }

  void solve_contacts(std::vector<SolverContact>& contacts) {
    double dt = config_.timestep;
    constexpr double kMaxPushoutSpeed = 0.5;  // m/s

    for (auto& c : contacts) {
      // tangent basis
      Vec3 n = c.normal;
      Vec3 t1 = std::abs(n.z) < 0.9 ? normalized(cross(n, Vec3{0, 0, 1}))
                                    : normalized(cross(n, Vec3{1, 0, 0}));
      c.t1 = t1;
      c.t2 = cross(n, t1);
    }

    for (int iter = 0; iter < config_.solver_iterations; ++iter) {
      for (auto& c : contacts) {
        Body& a = bodies_[c.a];
        Body& b = bodies_[c.b];
        double inv_mass_sum = a.inv_mass + b.inv_mass;
        if (inv_mass_sum <= 0) continue;  // kinematic/static pair: report only

        Vec3 ra = c.point - a.pose.position;
        Vec3 rb = c.point - b.pose.position;
        Mat3 inv_ia = a.is_dynamic() ? a.inv_inertia_world() : Mat3::zero();
        Mat3 inv_ib = b.is_dynamic() ? b.inv_inertia_world() : Mat3::zero();

        auto eff_mass = [&](const Vec3& dir) {
          Vec3 ta = cross(ra, dir), tb = cross(rb, dir);
          return inv_mass_sum + dot(ta, inv_ia * ta) + dot(tb, inv_ib * tb);
        };

        Vec3 v_rel = b.velocity_at(c.point) - a.velocity_at(c.point);
        double vn = dot(v_rel, c.normal);

        double target;
        if (c.gap > 0) {
          target = -c.gap / dt;  // speculative: may approach just enough to land flush
        } else {
          double pen = -c.gap;
          target = pen > config_.contact_slop
                       ? std::min(config_.baumgarte * (pen - config_.contact_slop) / dt,
                                  kMaxPushoutSpeed)
                       : 0.0;
        }

        double kn = eff_mass(c.normal);
        double lambda = (target - vn) / kn;
        double new_accum = std::max(0.0, c.accum_n + lambda);
        double applied = new_accum - c.accum_n;
        c.accum_n = new_accum;
        apply_impulse(a, b, c.point, c.normal * applied, inv_ia, inv_ib);

        // Coulomb friction on two tangent axes, clamped by the normal impulse.
        double max_t = config_.friction * c.accum_n;
        v_rel = b.velocity_at(c.point) - a.velocity_at(c.point);
        double vt1 = dot(v_rel, c.t1);
        double l1 = -vt1 / eff_mass(c.t1);
        double new_t1 = std::clamp(c.accum_t1 + l1, -max_t, max_t);
        apply_impulse(a, b, c.point, c.t1 * (new_t1 - c.accum_t1), inv_ia, inv_ib);
        c.accum_t1 = new_t1;

        v_rel = b.velocity_at(c.point) - a.velocity_at(c.point);
        double vt2 = dot(v_rel, c.t2);
        double l2 = -vt2 / eff_mass(c.t2);
        double new_t2 = std::clamp(c.accum_t2 + l2, -max_t, max_t);
        apply_impulse(a, b, c.point, c.t2 * (new_t2 - c.accum_t2), inv_ia, inv_ib);
        c.accum_t2 = new_t2;
        (void)vn;
      }
    }
  }

  static void apply_impulse(Body& a, Body& b, const Vec3& point, const Vec3& impulse,
                            const Mat3& inv_ia, const Mat3& inv_ib) {
    if (a.is_dynamic()) {
      a.linear_velocity -= impulse * a.inv_mass;
      a.angular_velocity -= inv_ia * cross(point - a.pose.position, impulse);
    }
    if (b.is_dynamic()) {
      b.linear_velocity += impulse * b.inv_mass;
      b.angular_velocity += inv_ib * cross(point - b.pose.position, impulse);
    }
  }

  WorldConfig config_;
  std::vector<Body> bodies_;
  int step_count_ = 0;

  void solve_contacts_entry();  // unused

  friend struct WorldDetectAccess;
};

// Public contact query: narrow band (depth >= -contact_slop).
inline std::vector<ContactPoint> World::detect_contacts(bool detect_band) const {
  auto scs = collect(detect_band);
  std::vector<ContactPoint> out;
  out.reserve(scs.size());
  for (const auto& sc : scs) {
    double depth = -sc.gap;
    if (!detect_band && depth < -config_.contact_slop) continue;
    ContactPoint cp;
    cp.body_a = sc.a;
    cp.body_b = sc.b;
    cp.point = sc.point;
    cp.normal = sc.normal;
    cp.depth = depth;
    out.push_back(cp);
  }
  return out;
}

}  // namespace afford
