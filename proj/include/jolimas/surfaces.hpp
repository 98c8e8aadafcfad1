#pragma once

// Surface models and the geometric queries the pipeline needs: normals,
// ray intersection, closest-point projection, tangent planes and walking.

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jolimas/geom.hpp"

namespace jolimas {

struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

// Rectangle in a plane, centred at `origin`; v axis = normal x u axis.
struct PlaneExtent {
  Vec3 origin = Vec3::Zero();
  Vec3 u_axis = Vec3::UnitX();
  double half_u = 1.0;
  double half_v = 1.0;
};

struct Plane {
  PlaneH plane;
  std::optional<PlaneExtent> extent;  // unbounded when empty
};

// Angular sheet of a cylinder: angles measured from `zero_dir` about the axis.
struct CylinderExtent {
  Vec3 zero_dir = Vec3::UnitZ();
  double half_angle = 1.0;
  double half_length = 1.0;
};

struct Cylinder {
  Vec3 axis_point = Vec3::Zero();
  Vec3 axis_dir = Vec3::UnitZ();
  double radius = 1.0;
  std::optional<CylinderExtent> extent;
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct EllipsoidSurface {
  Vec3 center = Vec3::Zero();
  Vec3 axes = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();  // columns are the local axes
};

// Smooth-shaded triangle mesh with per-vertex normals and a BVH built once.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces, std::vector<Vec3> normals);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::vector<Vec3>& normals() const { return normals_; }

  struct Hit {
    double t = 0.0;  // ray parameter, or distance for closest queries
    int face = -1;
    Vec3 bary = Vec3::Zero();
    Vec3 point = Vec3::Zero();
  };

  std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir) const;
  Hit closest(const Vec3& p) const;
  Vec3 interpolated_normal(const Hit& hit) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1, right = -1;
    int first = 0, count = 0;
  };
  int build(int first, int count);
  void closest_recursive(int node, const Vec3& p, Hit& best) const;

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<Vec3> normals_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Depth + normal grid registered to a camera. Depth is the camera-frame z,
// normals are stored in the world frame after loading.
class GridSurface {
 public:
  // Holes (depth <= 0 or zero normal) are filled by 4-neighbour diffusion.
  // normal_smoothing_px > 0 applies a Gaussian of that width (pixels) to the
  // filled normal field, for noisy sensor normals.
  GridSurface(CameraView camera, std::vector<double> depth, std::vector<Vec3> normals_world,
              double normal_smoothing_px = 0.0);

  const CameraView& camera() const { return camera_; }
  int width() const { return camera_.width; }
  int height() const { return camera_.height; }
  double depth_at(int u, int v) const { return depth_[std::size_t(v) * width() + u]; }
  const Vec3& normal_at_pixel(int u, int v) const { return normals_[std::size_t(v) * width() + u]; }

  Vec3 position(const Vec2& px) const;
  Vec3 normal(const Vec2& px) const;
  double depth(const Vec2& px) const;
  bool in_grid(const Vec2& px) const;

  std::optional<SurfacePoint> intersect(const Vec3& origin, const Vec3& dir) const;
  SurfacePoint closest(const Vec3& p, const Vec3& hint) const;

 private:
  CameraView camera_;
  std::vector<double> depth_;
  std::vector<Vec3> normals_;
  double min_depth_ = 0.0, max_depth_ = 0.0;
};

enum class SurfaceKind { Plane, Cylinder, Sphere, Ellipsoid, Mesh, Grid };

class SurfaceModel {
 public:
  using Variant = std::variant<Plane, Cylinder, Sphere, EllipsoidSurface, std::shared_ptr<const TriangleMesh>,
                               std::shared_ptr<const GridSurface>>;

  SurfaceModel(Plane s);
  SurfaceModel(Cylinder s);
  SurfaceModel(Sphere s);
  SurfaceModel(EllipsoidSurface s);
  SurfaceModel(std::shared_ptr<const TriangleMesh> s);
  SurfaceModel(std::shared_ptr<const GridSurface> s);

  SurfaceKind kind() const;
  bool is_parametric() const { return kind() != SurfaceKind::Mesh && kind() != SurfaceKind::Grid; }
  const Variant& variant() const { return v_; }

  // Unit normal toward the exterior. Throws OffSurface when p is not on S.
  Vec3 normal_at(const Vec3& p) const;
  // Nearest hit with positive ray parameter, honouring sheet extents.
  std::optional<SurfacePoint> intersect_ray(const Vec3& origin, const Vec3& dir) const;
  // Minimiser of |q - p| over the (unbounded) surface; `hint` disambiguates.
  SurfacePoint closest_point(const Vec3& p, const Vec3& hint) const;
  // Signed implicit-surface residual in world units (parametric variants);
  // unsigned distance for mesh and grid.
  double residual(const Vec3& p) const;
  // Surface samples over the parametric domain, n x n where applicable.
  std::vector<Vec3> seed_points(int n) const;
  // Rigid motion x -> R x + t applied to the surface.
  SurfaceModel transformed(const Mat3& rotation, const Vec3& translation) const;

 private:
  Variant v_;
};

struct WalkResult {
  SurfacePoint point;
  Vec3 direction = Vec3::Zero();  // input direction re-projected onto the new tangent plane
};

// Step-and-project walk. Returns nullopt if the projection advances less than
// 0.1 * step (a fold or a hole).
std::optional<WalkResult> try_walk(const SurfaceModel& s, const SurfacePoint& start, const Vec3& tangent_dir,
                                   double step);
// As try_walk but throws StalledWalk.
WalkResult walk_on_surface(const SurfaceModel& s, const SurfacePoint& start, const Vec3& tangent_dir, double step);

PlaneH tangent_plane(const SurfacePoint& sp);

struct MorphParam {
  double kappa = 0.0;  // 1 / radius; 0 is the plane
};

// Sheet of the plane z = 0 centred at the origin: width along x (the bending
// direction), length along y.
struct SheetExtent {
  double width = 2.0;
  double length = 2.0;
};

// kappa = 0: bounded plane z = 0. kappa > 0: cylinder of radius 1/kappa
// tangent to z = 0 along the y axis, bending away from +z, same arc width.
SurfaceModel morph_surface(MorphParam kappa, const SheetExtent& extent);

// Mesh file: OFF header/vertex/face sections followed by a NORMALS section
// with one normal per vertex. Per-face or missing normals are replaced by
// area-weighted vertex normals with a warning.
std::shared_ptr<const TriangleMesh> load_off_mesh(const std::filesystem::path& path);
void save_off_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

// Tessellated unit-sphere style helper for tests and fixtures.
std::shared_ptr<const TriangleMesh> make_uv_sphere_mesh(const Vec3& center, double radius, int rings, int segments);

}  // namespace jolimas
