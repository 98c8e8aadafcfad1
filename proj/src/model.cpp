#include "jolimas/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>

namespace jolimas {

namespace {

using Vec10 = Eigen::Matrix<double, 10, 1>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

constexpr int kIdx4[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};
constexpr int kIdx3[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

// Columns: vech(P E_k P^T) for the symmetric basis E_k of vech(Q*).
Eigen::Matrix<double, 6, 10> projection_operator(const Mat34& p) {
  Eigen::Matrix<double, 6, 10> g;
  for (int k = 0; k < 10; ++k) {
    Mat4 e = Mat4::Zero();
    e(kIdx4[k][0], kIdx4[k][1]) = 1.0;
    e(kIdx4[k][1], kIdx4[k][0]) = 1.0;
    g.col(k) = vech(Mat3(p * e * p.transpose()));
  }
  return g;
}

DualQuadric normalize_quadric(const Mat4& q) {
  Mat4 m = 0.5 * (q + q.transpose());
  const double norm = m.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::NotAnEllipsoid, "zero or non-finite quadric");
  m /= norm;
  if (m(3, 3) > 0.0) m = -m;
  return {m};
}

// Ray from the camera centre through pixel px, intersected with `plane`.
std::optional<Vec3> backproject_to_plane(const CameraView& view, const Vec2& px, const PlaneH& plane) {
  const Vec3 c = view.center();
  const Vec3 d = view.ray_direction(px);
  const double denom = plane.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = -plane.signed_distance(c) / denom;
  if (!(t > 0.0)) return std::nullopt;
  return c + t * d;
}

// Points of T_PB(S) on the projected ellipsoid contour, one per fan direction.
std::vector<std::optional<Vec3>> tangent_contour(const Conic& conic, const CameraView& view,
                                                 const TangentFrame& frame, int n) {
  const Mat34 p = view.projection();
  const Vec3 a = p * frame.origin.homogeneous();
  std::vector<std::optional<Vec3>> out(std::size_t(n), std::nullopt);
  for (int i = 0; i < n; ++i) {
    const Vec3 dir = frame.direction(fan_angle(i, n));
    const Vec3 b = p.leftCols<3>() * dir;
    const double qa = b.dot(conic.m * b), qb = 2.0 * a.dot(conic.m * b), qc = a.dot(conic.m * a);
    double s = -1.0;
    if (std::abs(qa) < 1e-300) {
      if (std::abs(qb) > 0.0) s = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (qb + std::copysign(sq, qb));
      const double r1 = q / qa, r2 = q != 0.0 ? qc / q : r1;
      s = std::max(r1, r2);
    }
    if (!(s > 0.0) || !std::isfinite(s)) continue;
    if ((a + s * b).z() <= 0.0) continue;
    out[std::size_t(i)] = frame.origin + s * dir;
  }
  return out;
}

double spread(const std::vector<Vec3>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, (pts[i] - pts[j]).norm());
  return best;
}

struct TangentPrediction {
  SurfacePoint pb;
  TangentFrame frame;
  Conic conic;
  std::vector<std::optional<Vec3>> points;
};

TangentPrediction predict_tangent(const JolimasModel& model, const CameraView& view, const SurfaceModel& surface,
                                  const PipelineConfig& config) {
  TangentPrediction out;
  out.pb = predict_brightest_point(surface, view, model.shape.center, config.seed_grid, config.max_seed_alpha);
  out.frame = TangentFrame::at(out.pb, view.center());
  const ProjectionMap virtual_camera = mirror_camera(view, out.frame.plane());
  const ProjectedConic projected = project_dual_quadric(virtual_camera, model.q_star);
  if (projected.degenerate)
    throw Error(ErrorCode::NotAnEllipse, "view '" + view.id + "': ellipsoid projects to a degenerate conic");
  out.conic = dual(projected.conic);
  to_ellipse(out.conic);  // classification check
  out.points = tangent_contour(out.conic, view, out.frame, config.warp.directions);
  return out;
}

}  // namespace

std::string_view to_string(ModelMode mode) { return mode == ModelMode::Canonical ? "canonical" : "dual"; }

ModelMode parse_mode(std::string_view text) {
  if (text == "canonical") return ModelMode::Canonical;
  if (text == "dual" || text == "dual-baseline") return ModelMode::DualBaseline;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "' (expected canonical or dual)");
}

Eigen::Matrix<double, 10, 1> vech(const Mat4& m) {
  Vec10 v;
  for (int k = 0; k < 10; ++k) v(k) = m(kIdx4[k][0], kIdx4[k][1]);
  return v;
}

Eigen::Matrix<double, 6, 1> vech(const Mat3& m) {
  Vec6 v;
  for (int k = 0; k < 6; ++k) v(k) = m(kIdx3[k][0], kIdx3[k][1]);
  return v;
}

Mat4 unvech4(const Eigen::Matrix<double, 10, 1>& v) {
  Mat4 m;
  for (int k = 0; k < 10; ++k) {
    m(kIdx4[k][0], kIdx4[k][1]) = v(k);
    m(kIdx4[k][1], kIdx4[k][0]) = v(k);
  }
  return m;
}

CanonicalView make_canonical_view(const std::string& view_id, const CameraView& view, const PlaneH& plane,
                                  std::span<const Vec3> plane_points) {
  CanonicalView cv;
  cv.view_id = view_id;
  cv.tangent = plane;
  cv.virtual_camera = mirror_camera(view, plane);
  std::vector<Vec2> img;
  img.reserve(plane_points.size());
  for (const Vec3& p : plane_points) img.push_back(cv.virtual_camera.project(p));
  cv.ellipse = fit_ellipse(img);
  cv.conic = to_conic(cv.ellipse);
  cv.fit_rms = ellipse_fit_rms(cv.ellipse, img);
  return cv;
}

CanonicalView make_canonical_view(const SpecularObservation& obs, const CanonicalContour& contour,
                                  const CameraView& view) {
  const auto pts = contour.valid_points();
  return make_canonical_view(obs.view_id, view, contour.plane(), pts);
}

JolimasModel reconstruct(std::span<const CanonicalView> views, ModelMode mode, double degeneracy_ratio) {
  const int m = int(views.size());
  if (m < 3)
    throw Error(ErrorCode::DegenerateConfiguration,
                "reconstruction needs at least 3 views, got " + std::to_string(m));

  // World normalisation: origin at the least-squares meeting point of the
  // ellipse-centre rays, unit scale at the mean camera distance to it.
  Mat3 lhs = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  std::vector<Vec3> centres;
  for (const auto& v : views) {
    const Vec3 c = v.virtual_camera.center();
    const Vec3 x = v.ellipse.center.homogeneous();
    const Vec3 d = v.virtual_camera.matrix.leftCols<3>().lu().solve(x).normalized();
    const Mat3 proj = Mat3::Identity() - d * d.transpose();
    lhs += proj;
    rhs += proj * c;
    centres.push_back(c);
  }
  Vec3 mu = Vec3::Zero();
  for (const Vec3& c : centres) mu += c;
  mu /= double(m);
  Eigen::JacobiSVD<Mat3> meet(lhs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (meet.singularValues()(2) > 1e-9 * meet.singularValues()(0)) mu = meet.solve(rhs);
  double rms = 0.0;
  for (const Vec3& c : centres) rms += (c - mu).squaredNorm();
  rms = std::sqrt(rms / double(m));
  if (!(rms > 0.0)) rms = 1.0;
  Mat4 w_inv = Mat4::Identity();
  w_inv.topLeftCorner<3, 3>() *= rms;
  w_inv.topRightCorner<3, 1>() = mu;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6 * m, 10 + m);
  for (int i = 0; i < m; ++i) {
    const Ellipse e = views[std::size_t(i)].ellipse.normalized();
    // Image normalisation: ellipse centre to the origin, semi-major to 1.
    Mat3 t = Mat3::Identity();
    t(0, 0) = t(1, 1) = 1.0 / e.a;
    t(0, 2) = -e.center.x() / e.a;
    t(1, 2) = -e.center.y() / e.a;
    Mat34 p = t * views[std::size_t(i)].virtual_camera.matrix * w_inv;
    p /= p.norm();
    const Ellipse en{Vec2::Zero(), 1.0, e.b / e.a, e.theta};
    Mat3 c_star = adjugate(to_conic(en).m);
    c_star /= c_star.norm();
    a.block<6, 10>(6 * i, 0) = projection_operator(p);
    a.block<6, 1>(6 * i, 10 + i) = -vech(c_star);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index n = sv.size();
  const double smallest = sv(n - 1), second = sv(n - 2);
  if (!(second > degeneracy_ratio * smallest))
    throw Error(ErrorCode::DegenerateConfiguration,
                "null space is not one-dimensional (singular value ratio " + std::to_string(second / smallest) + ")");
  const Vec10 q = svd.matrixV().col(10 + m - 1).head<10>();
  const Mat4 q_norm = unvech4(q);
  JolimasModel model;
  model.q_star = normalize_quadric(w_inv * q_norm * w_inv.transpose());
  model.shape = decode_ellipsoid(model.q_star);
  model.mode = mode;
  for (const auto& v : views) model.source_view_ids.push_back(v.view_id);
  model.residual = second > 0.0 ? smallest / second : 0.0;
  return model;
}

std::optional<Vec3> estimate_light_from_reflections(std::span<const ViewObservation> inputs,
                                                    double min_conditioning) {
  if (inputs.size() < 2) return std::nullopt;
  std::vector<std::pair<Vec3, Vec3>> rays;
  Mat3 lhs = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (const auto& in : inputs) {
    const Vec3 o = in.obs.pb.position;
    const Vec3 d = LightModel::mirror(in.obs.pb, in.view.center()).value;
    const Mat3 proj = Mat3::Identity() - d * d.transpose();
    lhs += proj;
    rhs += proj * o;
    rays.emplace_back(o, d);
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> es(lhs);
  // Smallest eigenvalue ~ sum of squared sines between the rays.
  if (!(es.eigenvalues()(0) > min_conditioning * double(inputs.size()))) return std::nullopt;
  const Vec3 x = lhs.ldlt().solve(rhs);
  for (const auto& [o, d] : rays)
    if (d.dot(x - o) <= 0.0) return std::nullopt;
  return x;
}

JolimasModel reconstruct_from_observations(const SurfaceModel& surface, std::span<const ViewObservation> inputs,
                                           const PipelineConfig& config, ReconstructionReport* report) {
  ReconstructionReport local;
  ReconstructionReport& rep = report ? *report : local;
  rep = {};

  const auto recoverable = [](const Error& e) {
    return e.code() == ErrorCode::WarpFailed || e.code() == ErrorCode::NotAnEllipse ||
           e.code() == ErrorCode::DegenerateInput;
  };

  if (config.mode == ModelMode::DualBaseline) {
    std::vector<CanonicalView> views;
    for (const auto& in : inputs) {
      try {
        const Vec3 c = in.view.center();
        const ContourCrossings cross = sample_contour_crossings(in.obs, surface, c, config.warp);
        if (config.warp.directions - cross.failed() < config.warp.min_directions)
          throw Error(ErrorCode::WarpFailed, "view '" + in.obs.view_id + "': too few contour crossings");
        const PlaneH plane = cross.frame.plane();
        std::vector<Vec3> pts;
        for (const auto& p : cross.points) {
          if (!p) continue;
          // Image contour point carried straight back to the tangent plane.
          if (auto x = backproject_to_plane(in.view, in.view.project(p->position), plane)) pts.push_back(*x);
        }
        views.push_back(make_canonical_view(in.obs.view_id, in.view, plane, pts));
        rep.used_views.push_back(in.obs.view_id);
      } catch (const Error& e) {
        if (!recoverable(e)) throw;
        rep.dropped_views.push_back(in.obs.view_id);
      }
    }
    rep.canonical_views = views;
    JolimasModel model = reconstruct(views, ModelMode::DualBaseline, config.degeneracy_ratio);
    rep.passes.push_back(model);
    return model;
  }

  std::optional<JolimasModel> model;
  const std::optional<Vec3> seed_light = estimate_light_from_reflections(inputs);
  const int passes = std::max(1, config.light_passes);
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<CanonicalView> views;
    rep.used_views.clear();
    rep.dropped_views.clear();
    for (const auto& in : inputs) {
      try {
        const Vec3 c = in.view.center();
        const LightModel light = model        ? LightModel::point(model->shape.center)
                                 : seed_light ? LightModel::point(*seed_light)
                                              : LightModel::mirror(in.obs.pb, c);
        const ForwardWarp fw = forward_warp(in.obs, surface, light, c, config.warp);
        views.push_back(make_canonical_view(in.obs, fw.canonical, in.view));
        rep.used_views.push_back(in.obs.view_id);
      } catch (const Error& e) {
        if (!recoverable(e)) throw;
        rep.dropped_views.push_back(in.obs.view_id);
      }
    }
    rep.canonical_views = views;
    model = reconstruct(views, ModelMode::Canonical, config.degeneracy_ratio);
    rep.passes.push_back(*model);
  }
  return *model;
}

SurfacePoint predict_brightest_point(const SurfaceModel& surface, const CameraView& view, const Vec3& light,
                                     int seed_grid, double max_seed_alpha) {
  const auto mp = find_mirror_point(surface, light, view.center(), seed_grid);
  if (!mp) throw Error(ErrorCode::NoVisibleReflection, "view '" + view.id + "': no visible surface point");
  if (mp->seed_alpha > max_seed_alpha)
    throw Error(ErrorCode::NoVisibleReflection,
                "view '" + view.id + "': best visible incident angle " + std::to_string(mp->seed_alpha) + " rad");
  return mp->point;
}

PredictedSpecularity predict(const JolimasModel& model, const CameraView& view, const SurfaceModel& surface,
                             const PipelineConfig& config) {
  const TangentPrediction tp = predict_tangent(model, view, surface, config);
  const Vec3 c = view.center();
  const LightModel light = LightModel::point(model.shape.center);
  const LimitAngleFan fan = plane_limit_angles(tp.frame, tp.points, light, c);

  std::vector<Vec3> valid;
  for (const auto& p : tp.points)
    if (p) valid.push_back(*p);
  if (int(valid.size()) < config.warp.min_directions)
    throw Error(ErrorCode::WarpFailed, "view '" + view.id + "': projected contour misses most fan directions");
  const double step = config.warp.step_fraction * spread(valid);
  const InverseWarp inv = inverse_warp(fan, tp.pb, surface, light, c, step, config.warp);

  PredictedSpecularity out;
  out.view_id = view.id;
  out.pb = tp.pb;
  for (const Vec3& p : inv.valid_points()) out.contour_img.push_back(view.project(p));
  out.ellipse_img = fit_ellipse(out.contour_img).normalized();
  out.failed_directions = inv.failed();
  return out;
}

PredictedSpecularity predict_dual_baseline(const JolimasModel& model, const CameraView& view,
                                           const SurfaceModel& surface, const PipelineConfig& config) {
  const TangentPrediction tp = predict_tangent(model, view, surface, config);
  PredictedSpecularity out;
  out.view_id = view.id;
  out.pb = tp.pb;
  for (const auto& p : tp.points) {
    if (p) {
      out.contour_img.push_back(view.project(*p));
    } else {
      ++out.failed_directions;
    }
  }
  out.ellipse_img = to_ellipse(tp.conic).normalized();
  return out;
}

PredictedSpecularity predict_mode(const JolimasModel& model, const CameraView& view, const SurfaceModel& surface,
                                  const PipelineConfig& config) {
  return config.mode == ModelMode::Canonical ? predict(model, view, surface, config)
                                             : predict_dual_baseline(model, view, surface, config);
}

}  // namespace jolimas
