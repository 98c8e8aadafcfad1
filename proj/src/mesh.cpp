#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "jolimas/surfaces.hpp"

namespace jolimas {

namespace {

constexpr int kLeafSize = 4;

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, Vec3& bary) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    bary = {1.0, 0.0, 0.0};
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    bary = {0.0, 1.0, 0.0};
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    bary = {1.0 - v, v, 0.0};
    return a + v * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    bary = {0.0, 0.0, 1.0};
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    bary = {1.0 - w, 0.0, w};
    return a + w * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    bary = {0.0, 1.0 - w, w};
    return b + w * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  bary = {1.0 - v - w, v, w};
  return a + ab * v + ac * w;
}

bool ray_box(const Eigen::AlignedBox3d& box, const Vec3& o, const Vec3& inv_d, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    double ta = (box.min()(k) - o(k)) * inv_d(k);
    double tb = (box.max()(k) - o(k)) * inv_d(k);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

std::vector<Vec3> area_weighted_normals(const std::vector<Vec3>& verts, const std::vector<std::array<int, 3>>& faces) {
  std::vector<Vec3> n(verts.size(), Vec3::Zero());
  for (const auto& f : faces) {
    const Vec3 fn = (verts[std::size_t(f[1])] - verts[std::size_t(f[0])]).cross(verts[std::size_t(f[2])] - verts[std::size_t(f[0])]);
    for (int k : f) n[std::size_t(k)] += fn;
  }
  for (Vec3& v : n) v.normalize();
  return n;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces, std::vector<Vec3> normals)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), normals_(std::move(normals)) {
  if (faces_.empty()) throw Error(ErrorCode::InvalidArgument, "mesh has no faces");
  for (const auto& f : faces_)
    for (int k : f)
      if (k < 0 || std::size_t(k) >= vertices_.size()) throw Error(ErrorCode::InvalidArgument, "mesh face index out of range");
  if (normals_.size() != vertices_.size()) throw Error(ErrorCode::InvalidArgument, "mesh needs one normal per vertex");
  for (Vec3& n : normals_) n.normalize();
  order_.resize(faces_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = int(i);
  nodes_.reserve(2 * faces_.size());
  build(0, int(faces_.size()));
}

int TriangleMesh::build(int first, int count) {
  Node node;
  node.box.setEmpty();
  Eigen::AlignedBox3d centroids;
  centroids.setEmpty();
  for (int i = first; i < first + count; ++i) {
    const auto& f = faces_[std::size_t(order_[std::size_t(i)])];
    Vec3 c = Vec3::Zero();
    for (int k : f) {
      node.box.extend(vertices_[std::size_t(k)]);
      c += vertices_[std::size_t(k)];
    }
    centroids.extend(c / 3.0);
  }
  const int index = int(nodes_.size());
  nodes_.push_back(node);
  if (count <= kLeafSize) {
    nodes_[std::size_t(index)].first = first;
    nodes_[std::size_t(index)].count = count;
    return index;
  }
  int axis = 0;
  centroids.sizes().maxCoeff(&axis);
  const int mid = first + count / 2;
  auto centroid = [&](int face) {
    const auto& f = faces_[std::size_t(face)];
    return vertices_[std::size_t(f[0])](axis) + vertices_[std::size_t(f[1])](axis) + vertices_[std::size_t(f[2])](axis);
  };
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) { return centroid(a) < centroid(b); });
  const int left = build(first, mid - first);
  const int right = build(mid, first + count - mid);
  nodes_[std::size_t(index)].left = left;
  nodes_[std::size_t(index)].right = right;
  return index;
}

std::optional<TriangleMesh::Hit> TriangleMesh::intersect(const Vec3& origin, const Vec3& dir) const {
  const Vec3 inv_d(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
  std::optional<Hit> best;
  double t_best = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[std::size_t(stack.back())];
    stack.pop_back();
    if (!ray_box(node.box, origin, inv_d, t_best)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int fi = order_[std::size_t(i)];
        const auto& f = faces_[std::size_t(fi)];
        const Vec3& a = vertices_[std::size_t(f[0])];
        const Vec3 e1 = vertices_[std::size_t(f[1])] - a, e2 = vertices_[std::size_t(f[2])] - a;
        const Vec3 pv = dir.cross(e2);
        const double det = e1.dot(pv);
        if (std::abs(det) < 1e-18) continue;
        const double inv = 1.0 / det;
        const Vec3 tv = origin - a;
        const double u = tv.dot(pv) * inv;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 qv = tv.cross(e1);
        const double v = dir.dot(qv) * inv;
        if (v < 0.0 || u + v > 1.0) continue;
        const double t = e2.dot(qv) * inv;
        if (t <= 1e-9 || t >= t_best) continue;
        t_best = t;
        best = Hit{t, fi, Vec3(1.0 - u - v, u, v), origin + t * dir};
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

void TriangleMesh::closest_recursive(int index, const Vec3& p, Hit& best) const {
  const Node& node = nodes_[std::size_t(index)];
  if (node.box.squaredExteriorDistance(p) >= best.t * best.t) return;
  if (node.left < 0) {
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int fi = order_[std::size_t(i)];
      const auto& f = faces_[std::size_t(fi)];
      Vec3 bary;
      const Vec3 q = closest_on_triangle(p, vertices_[std::size_t(f[0])], vertices_[std::size_t(f[1])], vertices_[std::size_t(f[2])], bary);
      const double d = (q - p).norm();
      if (d < best.t) best = Hit{d, fi, bary, q};
    }
    return;
  }
  const Node& l = nodes_[std::size_t(node.left)];
  const Node& r = nodes_[std::size_t(node.right)];
  if (l.box.squaredExteriorDistance(p) <= r.box.squaredExteriorDistance(p)) {
    closest_recursive(node.left, p, best);
    closest_recursive(node.right, p, best);
  } else {
    closest_recursive(node.right, p, best);
    closest_recursive(node.left, p, best);
  }
}

TriangleMesh::Hit TriangleMesh::closest(const Vec3& p) const {
  Hit best;
  best.t = std::numeric_limits<double>::infinity();
  closest_recursive(0, p, best);
  return best;
}

Vec3 TriangleMesh::interpolated_normal(const Hit& hit) const {
  const auto& f = faces_[std::size_t(hit.face)];
  return (hit.bary(0) * normals_[std::size_t(f[0])] + hit.bary(1) * normals_[std::size_t(f[1])] +
          hit.bary(2) * normals_[std::size_t(f[2])])
      .normalized();
}

std::shared_ptr<const TriangleMesh> load_off_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mesh file " + path.string());
  std::vector<std::string> tokens;
  std::vector<int> token_line;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) {
      tokens.push_back(tok);
      token_line.push_back(line_no);
    }
  }
  std::size_t pos = 0;
  const auto fail = [&](const std::string& what) -> void {
    const int ln = pos < token_line.size() ? token_line[pos] : (token_line.empty() ? 0 : token_line.back());
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(ln) + ": " + what);
  };
  const auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) fail("unexpected end of file");
    return tokens[pos++];
  };
  const auto number = [&]() {
    const std::string& t = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) fail("bad number '" + t + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + t + "'");
    }
    return 0.0;
  };
  if (next() != "OFF") fail("missing OFF header");
  const int nv = int(number()), nf = int(number());
  number();
  if (nv <= 0 || nf <= 0) fail("vertex and face counts must be positive");
  std::vector<Vec3> verts(static_cast<std::size_t>(nv));
  for (Vec3& v : verts)
    for (int c = 0; c < 3; ++c) v(c) = number();
  std::vector<std::array<int, 3>> faces;
  faces.reserve(std::size_t(nf));
  for (int i = 0; i < nf; ++i) {
    const int k = int(number());
    std::vector<int> idx(std::size_t(std::max(k, 0)));
    for (int& j : idx) j = int(number());
    if (k < 3) fail("face with fewer than 3 vertices");
    for (int j = 1; j + 1 < k; ++j) faces.push_back({idx[0], idx[std::size_t(j)], idx[std::size_t(j) + 1]});
  }
  std::vector<Vec3> normals;
  if (pos < tokens.size()) {
    if (next() != "NORMALS") fail("expected NORMALS section");
    const int nn = int(number());
    normals.resize(std::size_t(std::max(nn, 0)));
    for (Vec3& n : normals)
      for (int c = 0; c < 3; ++c) n(c) = number();
    if (nn != nv) {
      std::cerr << "warning: " << path.string() << ": " << nn
                << " normals for " << nv << " vertices (faceted normals); using smooth area-weighted vertex normals\n";
      normals.clear();
    }
  } else {
    std::cerr << "warning: " << path.string() << ": no NORMALS section; using area-weighted vertex normals\n";
  }
  if (normals.empty()) normals = area_weighted_normals(verts, faces);
  return std::make_shared<const TriangleMesh>(std::move(verts), std::move(faces), std::move(normals));
}

void save_off_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write mesh file " + path.string());
  out.precision(17);
  out << "OFF\n" << mesh.vertices().size() << ' ' << mesh.faces().size() << " 0\n";
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  out << "NORMALS " << mesh.normals().size() << '\n';
  for (const Vec3& n : mesh.normals()) out << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
}

std::shared_ptr<const TriangleMesh> make_uv_sphere_mesh(const Vec3& center, double radius, int rings, int segments) {
  std::vector<Vec3> verts, normals;
  std::vector<std::array<int, 3>> faces;
  verts.push_back(center + radius * Vec3::UnitZ());
  normals.push_back(Vec3::UnitZ());
  for (int i = 1; i < rings; ++i) {
    const double th = std::numbers::pi * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / segments;
      const Vec3 n(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      verts.push_back(center + radius * n);
      normals.push_back(n);
    }
  }
  verts.push_back(center - radius * Vec3::UnitZ());
  normals.push_back(-Vec3::UnitZ());
  const int south = int(verts.size()) - 1;
  const auto ring = [&](int i, int j) { return 1 + (i - 1) * segments + (j % segments); };
  for (int j = 0; j < segments; ++j) faces.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < rings; ++i)
    for (int j = 0; j < segments; ++j) {
      faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  for (int j = 0; j < segments; ++j) faces.push_back({ring(rings - 1, j), south, ring(rings - 1, j + 1)});
  return std::make_shared<const TriangleMesh>(std::move(verts), std::move(faces), std::move(normals));
}

}  // namespace jolimas
