#pragma once

// File formats: JSON documents for cameras, scenes, surfaces, detections,
// warps and models; 16-bit PGM intensity grids; planar float32 normal grids;
// binary PPM overlays.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jolimas/canonical.hpp"
#include "jolimas/model.hpp"
#include "jolimas/shading.hpp"

namespace jolimas {

using Json = nlohmann::ordered_json;

// Default fixed-point scale of 16-bit images: stored = round(value * scale).
inline constexpr double kDefaultImageScale = 16384.0;

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json to_json(const Vec2& v);
Json to_json(const Vec3& v);
Json to_json(const Ellipse& e);
Json to_json(const CameraView& view);
Json to_json(const Material& m);
Json to_json(const DetectConfig& c);
Json to_json(const WarpConfig& c);
Json to_json(const MorphSequenceConfig& c);
Json to_json(const EllipsoidSequenceConfig& c);
Json to_json(const Detection& d);
Json to_json(const SpecularObservation& o);
Json to_json(const ForwardWarp& w);
Json to_json(const PredictedSpecularity& p);

// Field readers; `ctx` prefixes ParseError messages.
Vec3 vec3_from_json(const Json& j, const std::string& ctx);
CameraView camera_from_json(const Json& j, const std::string& ctx);
Material material_from_json(const Json& j, const std::string& ctx, Material base = {});
DetectConfig detect_config_from_json(const Json& j, const std::string& ctx, DetectConfig base = {});
WarpConfig warp_config_from_json(const Json& j, const std::string& ctx, WarpConfig base = {});
MorphSequenceConfig morph_config_from_json(const Json& j, const std::string& ctx, MorphSequenceConfig base = {});
EllipsoidSequenceConfig ellipsoid_config_from_json(const Json& j, const std::string& ctx,
                                                   EllipsoidSequenceConfig base = {});

// {"views": [{id, fx, fy, cx, cy, width, height, R[9], t[3]}]}
std::vector<CameraView> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<CameraView>& views, const std::filesystem::path& path);

// Surface description. Types: plane, cylinder, sphere, ellipsoid, morph,
// mesh (OFF path), grid (depth PGM, normal grid, registration camera,
// optional normal_smoothing in pixels).
// Relative file paths resolve against `base_dir`.
SurfaceModel surface_from_json(const Json& j, const std::filesystem::path& base_dir, const std::string& ctx);
Json surface_to_json(const SurfaceModel& s);

// {surface, light, material, views, background}
Scene scene_from_json(const Json& j, const std::filesystem::path& base_dir, const std::string& ctx);
Scene load_scene(const std::filesystem::path& path);
Json scene_to_json(const Scene& scene);

// 16-bit binary PGM with a "# scale <s>" comment. Values are clamped to the
// representable range on write.
void write_pgm16(const Image& image, const std::filesystem::path& path, double scale = kDefaultImageScale);
Image read_pgm16(const std::filesystem::path& path);

// Planar float32 little-endian grid: "P3F\n<w> <h>\n" then the x, y and z planes.
void write_normal_grid(const std::vector<Vec3>& normals, int width, int height, const std::filesystem::path& path);
std::vector<Vec3> read_normal_grid(const std::filesystem::path& path, int& width, int& height);

// Grid surface from a depth image (camera-frame z, in image units divided by
// the PGM scale), a camera-frame normal grid and its registration camera.
std::shared_ptr<const GridSurface> load_grid_surface(const std::filesystem::path& depth_pgm,
                                                     const std::filesystem::path& normal_grid,
                                                     const CameraView& camera,
                                                     double normal_smoothing_px = 0.0);

void write_ppm(const ColorImage& image, const std::filesystem::path& path);

}  // namespace jolimas
