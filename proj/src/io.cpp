#include "jolimas/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace jolimas {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& ctx, const std::string& what) {
  throw Error(ErrorCode::ParseError, ctx + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) parse_fail(ctx, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(ctx, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& ctx) {
  if (!j.is_number()) parse_fail(ctx, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& ctx) {
  if (!j.is_number_integer()) parse_fail(ctx, "expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const Json& j, std::size_t n, const std::string& ctx) {
  if (!j.is_array() || j.size() != n) parse_fail(ctx, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

Mat3 mat3_from_json(const Json& j, const std::string& ctx) {
  const auto v = numbers(j, 9, ctx);
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[std::size_t(3 * r + c)];
  return m;
}

Json mat_to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
  if (!j.is_object()) parse_fail(ctx, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) parse_fail(ctx, "unknown field '" + k + "'");
}

template <typename T>
void maybe(const Json& j, const char* key, T& out, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string sub = ctx + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    out = integer(*it, sub);
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) parse_fail(sub, "expected a boolean");
    out = it->template get<bool>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0))
      parse_fail(sub, "expected a non-negative integer");
    out = it->template get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, Vec3>) {
    out = vec3_from_json(*it, sub);
  } else {
    out = number(*it, sub);
  }
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

Json shape_to_json(const EllipsoidShape& s) {
  return Json{{"center", to_json(s.center)}, {"axes", to_json(s.axes)}, {"rotation", mat_to_json(s.rotation)}};
}

}  // namespace

Json read_json_file(const fs::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- to_json

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json to_json(const Ellipse& e) {
  return Json{{"center", to_json(e.center)}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}};
}

Json to_json(const CameraView& v) {
  return Json{{"id", v.id},         {"fx", v.fx},         {"fy", v.fy},
              {"cx", v.cx},         {"cy", v.cy},         {"width", v.width},
              {"height", v.height}, {"R", mat_to_json(v.rotation)}, {"t", to_json(v.translation)}};
}

Json to_json(const Material& m) {
  return Json{{"specular_gain", m.specular_gain},
              {"roughness", m.roughness},
              {"diffuse", m.diffuse},
              {"ambient", m.ambient}};
}

Json to_json(const DetectConfig& c) {
  return Json{{"threshold", c.threshold},
              {"min_area", c.min_area},
              {"reject_clipped", c.reject_clipped},
              {"top_fraction", c.top_fraction}};
}

Json to_json(const WarpConfig& c) {
  return Json{{"directions", c.directions},
              {"step_fraction", c.step_fraction},
              {"max_steps", c.max_steps},
              {"min_directions", c.min_directions}};
}

Json to_json(const MorphSequenceConfig& c) {
  return Json{{"steps", c.steps},
              {"views_per_step", c.views_per_step},
              {"kappa_max", c.kappa_max},
              {"sheet", {{"width", c.sheet.width}, {"length", c.sheet.length}}},
              {"light", to_json(c.light)},
              {"material", to_json(c.material)},
              {"background", c.background},
              {"width", c.width},
              {"height", c.height},
              {"focal", c.focal},
              {"arc_radius", c.arc_radius},
              {"arc_half_angle", c.arc_half_angle},
              {"camera_y", c.camera_y},
              {"jitter", c.jitter},
              {"seed", c.seed}};
}

Json to_json(const EllipsoidSequenceConfig& c) {
  return Json{{"frames", c.frames},
              {"cluster_frames", c.cluster_frames},
              {"object",
               {{"center", to_json(c.object.center)},
                {"axes", to_json(c.object.axes)},
                {"rotation", mat_to_json(c.object.rotation)}}},
              {"light", to_json(c.light)},
              {"material", to_json(c.material)},
              {"background", c.background},
              {"width", c.width},
              {"height", c.height},
              {"focal", c.focal},
              {"distance", c.distance},
              {"start_azimuth", c.start_azimuth},
              {"start_elevation", c.start_elevation},
              {"end_azimuth", c.end_azimuth},
              {"end_elevation", c.end_elevation},
              {"cluster_radius", c.cluster_radius}};
}

Json to_json(const Detection& d) {
  Json contour = Json::array();
  for (const Vec2& p : d.contour_px) contour.push_back(to_json(p));
  return Json{{"view_id", d.view_id},
              {"brightest_px", to_json(d.brightest_px)},
              {"contour_px", contour},
              {"ellipse", to_json(d.ellipse)},
              {"clipped", d.clipped}};
}

Json to_json(const SpecularObservation& o) {
  Json contour = Json::array(), surface = Json::array();
  for (const Vec2& p : o.contour_px) contour.push_back(to_json(p));
  for (const Vec3& p : o.contour_s) surface.push_back(to_json(p));
  return Json{{"view_id", o.view_id},
              {"brightest_px", to_json(o.brightest_px)},
              {"contour_px", contour},
              {"ellipse", to_json(o.ellipse_img)},
              {"P_B", {{"position", to_json(o.pb.position)}, {"normal", to_json(o.pb.normal)}}},
              {"contour_S", surface}};
}

Json to_json(const ForwardWarp& w) {
  const auto opt_point = [](const std::optional<Vec3>& p) { return p ? to_json(*p) : Json(nullptr); };
  Json dirs = Json::array(), alphas = Json::array(), pts = Json::array(), cross = Json::array();
  for (std::size_t i = 0; i < w.fan.directions.size(); ++i) {
    dirs.push_back(to_json(w.fan.directions[i]));
    alphas.push_back(std::isfinite(w.fan.alpha_max[i]) ? Json(w.fan.alpha_max[i]) : Json(nullptr));
    pts.push_back(opt_point(w.canonical.points[i]));
    const auto& c = w.crossings.points[i];
    cross.push_back(c ? to_json(c->position) : Json(nullptr));
  }
  const TangentFrame& f = w.fan.frame;
  return Json{{"frame", {{"origin", to_json(f.origin)}, {"normal", to_json(f.normal)}, {"e1", to_json(f.e1)},
                         {"e2", to_json(f.e2)}}},
              {"step", w.crossings.step},
              {"fan", {{"directions", dirs}, {"alpha_max", alphas}}},
              {"surface_crossings", cross},
              {"canonical", {{"points", pts}, {"ellipse_t", to_json(w.canonical.ellipse_t)}}}};
}

Json to_json(const PredictedSpecularity& p) {
  Json contour = Json::array();
  for (const Vec2& q : p.contour_img) contour.push_back(to_json(q));
  return Json{{"view_id", p.view_id},
              {"P_B", {{"position", to_json(p.pb.position)}, {"normal", to_json(p.pb.normal)}}},
              {"contour_px", contour},
              {"ellipse", to_json(p.ellipse_img)},
              {"failed_directions", p.failed_directions}};
}

// ---------------------------------------------------------------- from_json

Vec3 vec3_from_json(const Json& j, const std::string& ctx) {
  const auto v = numbers(j, 3, ctx);
  return {v[0], v[1], v[2]};
}

CameraView camera_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, {"id", "fx", "fy", "cx", "cy", "width", "height", "R", "t"}, ctx);
  CameraView v;
  const Json& id = field(j, "id", ctx);
  if (!id.is_string()) parse_fail(ctx + ".id", "expected a string");
  v.id = id.get<std::string>();
  v.fx = number(field(j, "fx", ctx), ctx + ".fx");
  v.fy = number(field(j, "fy", ctx), ctx + ".fy");
  v.cx = number(field(j, "cx", ctx), ctx + ".cx");
  v.cy = number(field(j, "cy", ctx), ctx + ".cy");
  v.width = integer(field(j, "width", ctx), ctx + ".width");
  v.height = integer(field(j, "height", ctx), ctx + ".height");
  v.rotation = mat3_from_json(field(j, "R", ctx), ctx + ".R");
  v.translation = vec3_from_json(field(j, "t", ctx), ctx + ".t");
  try {
    v.validate();
  } catch (const Error& e) {
    parse_fail(ctx, e.what());
  }
  return v;
}

Material material_from_json(const Json& j, const std::string& ctx, Material m) {
  check_keys(j, {"specular_gain", "roughness", "diffuse", "ambient"}, ctx);
  maybe(j, "specular_gain", m.specular_gain, ctx);
  maybe(j, "roughness", m.roughness, ctx);
  maybe(j, "diffuse", m.diffuse, ctx);
  maybe(j, "ambient", m.ambient, ctx);
  m.validate();
  return m;
}

DetectConfig detect_config_from_json(const Json& j, const std::string& ctx, DetectConfig c) {
  check_keys(j, {"threshold", "min_area", "reject_clipped", "top_fraction"}, ctx);
  maybe(j, "threshold", c.threshold, ctx);
  maybe(j, "min_area", c.min_area, ctx);
  maybe(j, "reject_clipped", c.reject_clipped, ctx);
  maybe(j, "top_fraction", c.top_fraction, ctx);
  return c;
}

WarpConfig warp_config_from_json(const Json& j, const std::string& ctx, WarpConfig c) {
  check_keys(j, {"directions", "step_fraction", "max_steps", "min_directions"}, ctx);
  maybe(j, "directions", c.directions, ctx);
  maybe(j, "step_fraction", c.step_fraction, ctx);
  maybe(j, "max_steps", c.max_steps, ctx);
  maybe(j, "min_directions", c.min_directions, ctx);
  return c;
}

MorphSequenceConfig morph_config_from_json(const Json& j, const std::string& ctx, MorphSequenceConfig c) {
  check_keys(j,
             {"steps", "views_per_step", "kappa_max", "sheet", "light", "material", "background", "width", "height",
              "focal", "arc_radius", "arc_half_angle", "camera_y", "jitter", "seed"},
             ctx);
  maybe(j, "steps", c.steps, ctx);
  maybe(j, "views_per_step", c.views_per_step, ctx);
  maybe(j, "kappa_max", c.kappa_max, ctx);
  if (j.contains("sheet")) {
    const Json& s = j["sheet"];
    check_keys(s, {"width", "length"}, ctx + ".sheet");
    maybe(s, "width", c.sheet.width, ctx + ".sheet");
    maybe(s, "length", c.sheet.length, ctx + ".sheet");
  }
  maybe(j, "light", c.light, ctx);
  if (j.contains("material")) c.material = material_from_json(j["material"], ctx + ".material", c.material);
  maybe(j, "background", c.background, ctx);
  maybe(j, "width", c.width, ctx);
  maybe(j, "height", c.height, ctx);
  maybe(j, "focal", c.focal, ctx);
  maybe(j, "arc_radius", c.arc_radius, ctx);
  maybe(j, "arc_half_angle", c.arc_half_angle, ctx);
  maybe(j, "camera_y", c.camera_y, ctx);
  maybe(j, "jitter", c.jitter, ctx);
  maybe(j, "seed", c.seed, ctx);
  return c;
}

EllipsoidSequenceConfig ellipsoid_config_from_json(const Json& j, const std::string& ctx, EllipsoidSequenceConfig c) {
  check_keys(j,
             {"frames", "cluster_frames", "object", "light", "material", "background", "width", "height", "focal",
              "distance", "start_azimuth", "start_elevation", "end_azimuth", "end_elevation", "cluster_radius"},
             ctx);
  maybe(j, "frames", c.frames, ctx);
  maybe(j, "cluster_frames", c.cluster_frames, ctx);
  if (j.contains("object")) {
    const Json& o = j["object"];
    const std::string octx = ctx + ".object";
    check_keys(o, {"center", "axes", "rotation"}, octx);
    maybe(o, "center", c.object.center, octx);
    maybe(o, "axes", c.object.axes, octx);
    if (o.contains("rotation")) c.object.rotation = mat3_from_json(o["rotation"], octx + ".rotation");
  }
  maybe(j, "light", c.light, ctx);
  if (j.contains("material")) c.material = material_from_json(j["material"], ctx + ".material", c.material);
  maybe(j, "background", c.background, ctx);
  maybe(j, "width", c.width, ctx);
  maybe(j, "height", c.height, ctx);
  maybe(j, "focal", c.focal, ctx);
  maybe(j, "distance", c.distance, ctx);
  maybe(j, "start_azimuth", c.start_azimuth, ctx);
  maybe(j, "start_elevation", c.start_elevation, ctx);
  maybe(j, "end_azimuth", c.end_azimuth, ctx);
  maybe(j, "end_elevation", c.end_elevation, ctx);
  maybe(j, "cluster_radius", c.cluster_radius, ctx);
  return c;
}

// ---------------------------------------------------------------- cameras

std::vector<CameraView> load_cameras(const fs::path& path) {
  const Json j = read_json_file(path);
  const std::string ctx = path.string();
  const Json& views = field(j, "views", ctx);
  if (!views.is_array()) parse_fail(ctx + ".views", "expected an array");
  std::vector<CameraView> out;
  for (std::size_t i = 0; i < views.size(); ++i)
    out.push_back(camera_from_json(views[i], ctx + ".views[" + std::to_string(i) + "]"));
  return out;
}

void save_cameras(const std::vector<CameraView>& views, const fs::path& path) {
  Json arr = Json::array();
  for (const auto& v : views) arr.push_back(to_json(v));
  write_text_file(path, Json{{"views", arr}}.dump(2) + "\n");
}

// ---------------------------------------------------------------- surfaces

SurfaceModel surface_from_json(const Json& j, const fs::path& base_dir, const std::string& ctx) {
  const Json& type_j = field(j, "type", ctx);
  if (!type_j.is_string()) parse_fail(ctx + ".type", "expected a string");
  const std::string type = type_j.get<std::string>();
  const auto resolve = [&](const char* key) {
    const Json& p = field(j, key, ctx);
    if (!p.is_string()) parse_fail(ctx + "." + key, "expected a path string");
    fs::path path = p.get<std::string>();
    return path.is_relative() ? base_dir / path : path;
  };
  if (type == "plane") {
    check_keys(j, {"type", "normal", "offset", "point", "extent"}, ctx);
    Plane s;
    const Vec3 n = vec3_from_json(field(j, "normal", ctx), ctx + ".normal");
    if (n.norm() < 1e-12) parse_fail(ctx + ".normal", "zero normal");
    if (j.contains("point")) {
      s.plane = PlaneH::from_point_normal(vec3_from_json(j["point"], ctx + ".point"), n);
    } else {
      s.plane = PlaneH{n.normalized(), 0.0};
      maybe(j, "offset", s.plane.offset, ctx);
      s.plane.offset /= n.norm();
    }
    if (j.contains("extent")) {
      const Json& e = j["extent"];
      const std::string ectx = ctx + ".extent";
      check_keys(e, {"origin", "u_axis", "half_u", "half_v"}, ectx);
      PlaneExtent ext;
      maybe(e, "origin", ext.origin, ectx);
      maybe(e, "u_axis", ext.u_axis, ectx);
      maybe(e, "half_u", ext.half_u, ectx);
      maybe(e, "half_v", ext.half_v, ectx);
      ext.u_axis = (ext.u_axis - ext.u_axis.dot(s.plane.normal) * s.plane.normal).normalized();
      s.extent = ext;
    }
    return s;
  }
  if (type == "cylinder") {
    check_keys(j, {"type", "axis_point", "axis_dir", "radius", "extent"}, ctx);
    Cylinder s;
    s.axis_point = vec3_from_json(field(j, "axis_point", ctx), ctx + ".axis_point");
    s.axis_dir = vec3_from_json(field(j, "axis_dir", ctx), ctx + ".axis_dir").normalized();
    s.radius = number(field(j, "radius", ctx), ctx + ".radius");
    if (!(s.radius > 0.0)) parse_fail(ctx + ".radius", "must be positive");
    if (j.contains("extent")) {
      const Json& e = j["extent"];
      const std::string ectx = ctx + ".extent";
      check_keys(e, {"zero_dir", "half_angle", "half_length"}, ectx);
      CylinderExtent ext;
      maybe(e, "zero_dir", ext.zero_dir, ectx);
      maybe(e, "half_angle", ext.half_angle, ectx);
      maybe(e, "half_length", ext.half_length, ectx);
      s.extent = ext;
    }
    return s;
  }
  if (type == "sphere") {
    check_keys(j, {"type", "center", "radius"}, ctx);
    Sphere s;
    s.center = vec3_from_json(field(j, "center", ctx), ctx + ".center");
    s.radius = number(field(j, "radius", ctx), ctx + ".radius");
    if (!(s.radius > 0.0)) parse_fail(ctx + ".radius", "must be positive");
    return s;
  }
  if (type == "ellipsoid") {
    check_keys(j, {"type", "center", "axes", "rotation"}, ctx);
    EllipsoidSurface s;
    s.center = vec3_from_json(field(j, "center", ctx), ctx + ".center");
    s.axes = vec3_from_json(field(j, "axes", ctx), ctx + ".axes");
    if (s.axes.minCoeff() <= 0.0) parse_fail(ctx + ".axes", "semi-axes must be positive");
    if (j.contains("rotation")) s.rotation = mat3_from_json(j["rotation"], ctx + ".rotation");
    return s;
  }
  if (type == "morph") {
    check_keys(j, {"type", "kappa", "width", "length"}, ctx);
    MorphParam k;
    SheetExtent ext;
    k.kappa = number(field(j, "kappa", ctx), ctx + ".kappa");
    maybe(j, "width", ext.width, ctx);
    maybe(j, "length", ext.length, ctx);
    return morph_surface(k, ext);
  }
  if (type == "mesh") {
    check_keys(j, {"type", "path"}, ctx);
    return load_off_mesh(resolve("path"));
  }
  if (type == "grid") {
    check_keys(j, {"type", "depth", "normals", "camera", "normal_smoothing"}, ctx);
    double smoothing = 0.0;
    maybe(j, "normal_smoothing", smoothing, ctx);
    const Json& cam = field(j, "camera", ctx);
    CameraView camera;
    if (cam.is_string()) {
      fs::path p = cam.get<std::string>();
      const auto views = load_cameras(p.is_relative() ? base_dir / p : p);
      if (views.empty()) parse_fail(ctx + ".camera", "camera file has no views");
      camera = views.front();
    } else {
      camera = camera_from_json(cam, ctx + ".camera");
    }
    return load_grid_surface(resolve("depth"), resolve("normals"), camera, smoothing);
  }
  parse_fail(ctx + ".type", "unknown surface type '" + type + "'");
}

Json surface_to_json(const SurfaceModel& s) {
  struct Visitor {
    Json operator()(const Plane& p) const {
      Json j{{"type", "plane"}, {"normal", to_json(p.plane.normal)}, {"offset", p.plane.offset}};
      if (p.extent)
        j["extent"] = Json{{"origin", to_json(p.extent->origin)},
                           {"u_axis", to_json(p.extent->u_axis)},
                           {"half_u", p.extent->half_u},
                           {"half_v", p.extent->half_v}};
      return j;
    }
    Json operator()(const Cylinder& c) const {
      Json j{{"type", "cylinder"},
             {"axis_point", to_json(c.axis_point)},
             {"axis_dir", to_json(c.axis_dir)},
             {"radius", c.radius}};
      if (c.extent)
        j["extent"] = Json{{"zero_dir", to_json(c.extent->zero_dir)},
                           {"half_angle", c.extent->half_angle},
                           {"half_length", c.extent->half_length}};
      return j;
    }
    Json operator()(const Sphere& s) const {
      return Json{{"type", "sphere"}, {"center", to_json(s.center)}, {"radius", s.radius}};
    }
    Json operator()(const EllipsoidSurface& e) const {
      return Json{{"type", "ellipsoid"},
                  {"center", to_json(e.center)},
                  {"axes", to_json(e.axes)},
                  {"rotation", mat_to_json(e.rotation)}};
    }
    Json operator()(const std::shared_ptr<const TriangleMesh>&) const {
      throw Error(ErrorCode::InvalidArgument, "mesh surfaces are referenced by file path and cannot be inlined");
    }
    Json operator()(const std::shared_ptr<const GridSurface>&) const {
      throw Error(ErrorCode::InvalidArgument, "grid surfaces are referenced by file path and cannot be inlined");
    }
  };
  return std::visit(Visitor{}, s.variant());
}

// ---------------------------------------------------------------- scenes

Scene scene_from_json(const Json& j, const fs::path& base_dir, const std::string& ctx) {
  check_keys(j, {"surface", "light", "material", "views", "background"}, ctx);
  Scene scene{surface_from_json(field(j, "surface", ctx), base_dir, ctx + ".surface"), Vec3::Zero(), {}, {}, 0.0};
  maybe(j, "light", scene.light, ctx);
  if (j.contains("material")) scene.material = material_from_json(j["material"], ctx + ".material");
  maybe(j, "background", scene.background, ctx);
  const Json& views = field(j, "views", ctx);
  if (views.is_string()) {
    fs::path p = views.get<std::string>();
    scene.views = load_cameras(p.is_relative() ? base_dir / p : p);
  } else {
    if (!views.is_array()) parse_fail(ctx + ".views", "expected an array or a camera file path");
    for (std::size_t i = 0; i < views.size(); ++i)
      scene.views.push_back(camera_from_json(views[i], ctx + ".views[" + std::to_string(i) + "]"));
  }
  return scene;
}

Scene load_scene(const fs::path& path) {
  return scene_from_json(read_json_file(path), path.parent_path(), path.string());
}

Json scene_to_json(const Scene& scene) {
  Json views = Json::array();
  for (const auto& v : scene.views) views.push_back(to_json(v));
  return Json{{"surface", surface_to_json(scene.surface)},
              {"light", to_json(scene.light)},
              {"material", to_json(scene.material)},
              {"views", views},
              {"background", scene.background}};
}

// ---------------------------------------------------------------- rasters

void write_pgm16(const Image& image, const fs::path& path, double scale) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  std::ostringstream header;
  header.precision(17);
  header << "P5\n# scale " << scale << "\n" << image.width << " " << image.height << "\n65535\n";
  out << header.str();
  std::vector<unsigned char> buf(image.data.size() * 2);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const double v = std::clamp(std::round(double(image.data[i]) * scale), 0.0, 65535.0);
    const auto s = static_cast<std::uint16_t>(v);
    buf[2 * i] = static_cast<unsigned char>(s >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(s & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

Image read_pgm16(const fs::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::string ctx = path.string();
  double scale = kDefaultImageScale;
  std::vector<std::string> tokens;
  while (tokens.size() < 4) {
    int c = in.peek();
    if (c == EOF) parse_fail(ctx, "truncated PGM header");
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line.substr(1));
      std::string key;
      double value = 0.0;
      if (ls >> key >> value && key == "scale") {
        if (!(value > 0.0)) parse_fail(ctx, "non-positive scale comment");
        scale = value;
      }
      continue;
    }
    std::string tok;
    while (in.peek() != EOF && !std::isspace(in.peek()) && in.peek() != '#') tok.push_back(char(in.get()));
    tokens.push_back(tok);
  }
  if (tokens[0] != "P5") parse_fail(ctx, "not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(tokens[1]);
    h = std::stoi(tokens[2]);
    maxval = std::stoi(tokens[3]);
  } catch (const std::exception&) {
    parse_fail(ctx, "malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) parse_fail(ctx, "invalid PGM dimensions or maxval");
  in.get();  // single whitespace after maxval
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(std::size_t(w) * std::size_t(h) * bpp);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (in.gcount() != std::streamsize(buf.size())) parse_fail(ctx, "truncated PGM pixel data");
  Image img(w, h);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const unsigned v = bpp == 2 ? (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1] : buf[i];
    img.data[i] = float(double(v) / scale);
  }
  return img;
}

void write_normal_grid(const std::vector<Vec3>& normals, int width, int height, const fs::path& path) {
  if (normals.size() != std::size_t(width) * std::size_t(height))
    throw Error(ErrorCode::InvalidArgument, "normal grid size does not match its dimensions");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P3F\n" << width << " " << height << "\n";
  for (int c = 0; c < 3; ++c) {
    for (const Vec3& n : normals) {
      const float f = float(n(c));
      std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
      unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff), static_cast<unsigned char>((bits >> 8) & 0xff),
                            static_cast<unsigned char>((bits >> 16) & 0xff), static_cast<unsigned char>(bits >> 24)};
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

std::vector<Vec3> read_normal_grid(const fs::path& path, int& width, int& height) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const std::string ctx = path.string();
  std::string magic;
  if (!(in >> magic) || magic != "P3F") parse_fail(ctx, "missing P3F header");
  if (!(in >> width >> height) || width <= 0 || height <= 0) parse_fail(ctx, "invalid normal grid dimensions");
  in.get();
  const std::size_t n = std::size_t(width) * std::size_t(height);
  std::vector<unsigned char> buf(n * 12);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (in.gcount() != std::streamsize(buf.size())) parse_fail(ctx, "truncated normal grid data");
  std::vector<Vec3> out(n);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* b = &buf[(std::size_t(c) * n + i) * 4];
      const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                                 (std::uint32_t(b[3]) << 24);
      out[i](c) = double(std::bit_cast<float>(bits));
    }
  return out;
}

std::shared_ptr<const GridSurface> load_grid_surface(const fs::path& depth_pgm, const fs::path& normal_grid,
                                                     const CameraView& camera, double normal_smoothing_px) {
  const Image depth = read_pgm16(depth_pgm);
  int w = 0, h = 0;
  const auto normals_cam = read_normal_grid(normal_grid, w, h);
  if (depth.width != camera.width || depth.height != camera.height || w != camera.width || h != camera.height)
    throw Error(ErrorCode::ParseError, "grid surface: depth, normal and camera dimensions disagree");
  std::vector<double> d(depth.data.begin(), depth.data.end());
  std::vector<Vec3> nw;
  nw.reserve(normals_cam.size());
  const Mat3 rt = camera.rotation.transpose();
  for (const Vec3& n : normals_cam) nw.push_back(rt * n);
  return std::make_shared<const GridSurface>(camera, std::move(d), std::move(nw), normal_smoothing_px);
}

void write_ppm(const ColorImage& image, const fs::path& path) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), std::streamsize(image.rgb.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- models

std::string model_to_string(const JolimasModel& model) {
  Json ids = Json::array();
  for (const auto& id : model.source_view_ids) ids.push_back(id);
  Json j{{"mode", std::string(to_string(model.mode))}, {"Q_star", mat_to_json(model.q_star.m)}};
  const Json shape = shape_to_json(model.shape);
  for (const auto& [k, v] : shape.items()) j[k] = v;
  j["source_view_ids"] = ids;
  j["residual"] = model.residual;
  return j.dump(2) + "\n";
}

JolimasModel model_from_string(const std::string& text, const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  check_keys(j, {"mode", "Q_star", "center", "axes", "rotation", "source_view_ids", "residual"}, origin);
  JolimasModel m;
  const auto q = numbers(field(j, "Q_star", origin), 16, origin + ".Q_star");
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m.q_star.m(r, c) = q[std::size_t(4 * r + c)];
  if ((m.q_star.m - m.q_star.m.transpose()).norm() > 1e-9 * m.q_star.m.norm())
    parse_fail(origin + ".Q_star", "matrix is not symmetric");
  const double norm = m.q_star.m.norm();
  if (std::abs(norm - 1.0) > 1e-12 || m.q_star.m(3, 3) > 0.0) {
    if (!(norm > 0.0)) parse_fail(origin + ".Q_star", "zero matrix");
    m.q_star.m /= m.q_star.m(3, 3) > 0.0 ? -norm : norm;
  }
  try {
    const EllipsoidShape decoded = decode_ellipsoid(m.q_star);
    m.shape = decoded;
  } catch (const Error& e) {
    parse_fail(origin + ".Q_star", e.what());
  }
  if (j.contains("center")) m.shape.center = vec3_from_json(j["center"], origin + ".center");
  if (j.contains("axes")) m.shape.axes = vec3_from_json(j["axes"], origin + ".axes");
  if (j.contains("rotation")) m.shape.rotation = mat3_from_json(j["rotation"], origin + ".rotation");
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) parse_fail(origin + ".mode", "expected a string");
    try {
      m.mode = parse_mode(j["mode"].get<std::string>());
    } catch (const Error& e) {
      parse_fail(origin + ".mode", e.what());
    }
  }
  if (j.contains("source_view_ids")) {
    const Json& ids = j["source_view_ids"];
    if (!ids.is_array()) parse_fail(origin + ".source_view_ids", "expected an array of strings");
    for (const auto& id : ids) {
      if (!id.is_string()) parse_fail(origin + ".source_view_ids", "expected an array of strings");
      m.source_view_ids.push_back(id.get<std::string>());
    }
  }
  maybe(j, "residual", m.residual, origin);
  return m;
}

void save_model(const JolimasModel& model, const fs::path& path) { write_text_file(path, model_to_string(model)); }

JolimasModel load_model(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_string(ss.str(), path.string());
}

}  // namespace jolimas
