#include "tdc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdc/error.hpp"

namespace tdc {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::geometry_too_coarse: return "geometry-too-coarse";
    case Errc::step_size: return "step-size";
    case Errc::solver_convergence: return "solver-convergence";
    case Errc::no_flushing: return "no-flushing";
    case Errc::cannot_shrink: return "cannot-shrink";
    case Errc::parameter_overflow: return "parameter-overflow";
    case Errc::non_convergence: return "non-convergence";
    case Errc::oracle_too_large: return "oracle-too-large";
    case Errc::resolution_too_coarse: return "resolution-too-coarse";
    case Errc::domain_error: return "domain-error";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::escape: return "escape";
    case Errc::unsupported_geometry: return "unsupported-geometry";
    case Errc::construction: return "construction";
  }
  return "unknown";
}

Region Region::disk(Vec2 c, double radius) {
  if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "disk radius must be positive");
  Region r;
  r.kind = Kind::disk;
  r.center = c;
  r.r_out = radius;
  return r;
}

Region Region::annulus(Vec2 c, double inner, double outer) {
  if (!(inner >= 0.0 && outer > inner))
    throw Error(Errc::invalid_argument, "annulus needs 0 <= r_in < r_out");
  Region r;
  r.kind = Kind::annulus;
  r.center = c;
  r.r_in = inner;
  r.r_out = outer;
  return r;
}

Region Region::rectangle(Vec2 lo, Vec2 hi) {
  if (!(hi.x > lo.x && hi.y > lo.y)) throw Error(Errc::invalid_argument, "rectangle needs lo < hi");
  Region r;
  r.kind = Kind::rectangle;
  r.lo = lo;
  r.hi = hi;
  r.center = 0.5 * (lo + hi);
  return r;
}

double Region::signed_distance(Vec2 p) const {
  switch (kind) {
    case Kind::disk:
      return r_out - norm(p - center);
    case Kind::annulus: {
      double d = norm(p - center);
      return std::min(d - r_in, r_out - d);
    }
    case Kind::rectangle: {
      double dx = std::max(lo.x - p.x, p.x - hi.x);
      double dy = std::max(lo.y - p.y, p.y - hi.y);
      if (dx <= 0.0 && dy <= 0.0) return -std::max(dx, dy);
      return -std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
    }
  }
  return 0.0;
}

bool Region::contains(Vec2 p) const { return signed_distance(p) > 0.0; }

bool Region::contains_closed(Vec2 p, double tol) const { return signed_distance(p) >= -tol; }

Vec2 Region::project_to_boundary(Vec2 p) const {
  switch (kind) {
    case Kind::disk:
    case Kind::annulus: {
      Vec2 d = p - center;
      double n = norm(d);
      if (n == 0.0) return center + Vec2{r_out, 0.0};
      double rad = r_out;
      if (kind == Kind::annulus && std::abs(n - r_in) < std::abs(n - r_out)) rad = r_in;
      return center + (rad / n) * d;
    }
    case Kind::rectangle: {
      Vec2 q{std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y)};
      if (!(q.x > lo.x && q.x < hi.x && q.y > lo.y && q.y < hi.y)) return q;
      double d[4] = {q.x - lo.x, hi.x - q.x, q.y - lo.y, hi.y - q.y};
      int k = static_cast<int>(std::min_element(d, d + 4) - d);
      if (k == 0) q.x = lo.x;
      if (k == 1) q.x = hi.x;
      if (k == 2) q.y = lo.y;
      if (k == 3) q.y = hi.y;
      return q;
    }
  }
  return p;
}

Region Region::eroded(double d) const {
  switch (kind) {
    case Kind::disk:
      if (r_out - d <= 0.0) throw Error(Errc::cannot_shrink, "erosion empties the disk");
      return disk(center, r_out - d);
    case Kind::annulus:
      if (r_out - d <= r_in + d) throw Error(Errc::cannot_shrink, "erosion empties the annulus");
      return annulus(center, r_in + d, r_out - d);
    case Kind::rectangle:
      if (hi.x - lo.x <= 2 * d || hi.y - lo.y <= 2 * d)
        throw Error(Errc::cannot_shrink, "erosion empties the rectangle");
      return rectangle({lo.x + d, lo.y + d}, {hi.x - d, hi.y - d});
  }
  return *this;
}

Vec2 Region::bbox_lo() const {
  if (kind == Kind::rectangle) return lo;
  return {center.x - r_out, center.y - r_out};
}

Vec2 Region::bbox_hi() const {
  if (kind == Kind::rectangle) return hi;
  return {center.x + r_out, center.y + r_out};
}

double Region::diameter() const { return norm(bbox_hi() - bbox_lo()) / (kind == Kind::rectangle ? 1.0 : std::sqrt(2.0)); }

double Region::area() const {
  switch (kind) {
    case Kind::disk: return M_PI * r_out * r_out;
    case Kind::annulus: return M_PI * (r_out * r_out - r_in * r_in);
    case Kind::rectangle: return (hi.x - lo.x) * (hi.y - lo.y);
  }
  return 0.0;
}

bool Region::inside_of(const Region& outer, double margin) const {
  if (kind == Kind::rectangle) {
    Vec2 cs[4] = {lo, hi, {lo.x, hi.y}, {hi.x, lo.y}};
    for (auto c : cs)
      if (outer.signed_distance(c) < margin) return false;
    if (outer.kind == Kind::annulus) return false;
    return true;
  }
  if (outer.kind == Kind::rectangle) {
    return center.x - r_out - outer.lo.x >= margin && outer.hi.x - center.x - r_out >= margin &&
           center.y - r_out - outer.lo.y >= margin && outer.hi.y - center.y - r_out >= margin;
  }
  double d = norm(center - outer.center);
  if (d + r_out + margin > outer.r_out) return false;
  if (outer.kind == Kind::annulus) {
    if (kind == Kind::annulus && d == 0.0) return r_in >= outer.r_in + margin;
    return d - r_out - margin >= outer.r_in;
  }
  return true;
}

std::string Region::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::disk:
      os << "disk(" << center.x << "," << center.y << ";" << r_out << ")";
      break;
    case Kind::annulus:
      os << "annulus(" << center.x << "," << center.y << ";" << r_in << "," << r_out << ")";
      break;
    case Kind::rectangle:
      os << "rectangle(" << lo.x << "," << lo.y << ";" << hi.x << "," << hi.y << ")";
      break;
  }
  return os.str();
}

void DomainSpec::validate() const {
  if (shape.kind == Region::Kind::annulus)
    throw Error(Errc::invalid_argument, "domain shape must be a disk or a rectangle");
  if (!control.inside_of(shape, 0.0) || control.area() <= 0.0)
    throw Error(Errc::invalid_argument, "control region must be nonempty with closure inside the domain");
  if (obstacle) {
    if (!obstacle->inside_of(shape, 1e-12))
      throw Error(Errc::invalid_argument, "obstacle must be compactly contained in the domain");
  }
}

void TimeGrid::validate() const {
  if (!(T > 0.0)) throw Error(Errc::invalid_argument, "time horizon must be positive");
  if (nt < 2) throw Error(Errc::invalid_argument, "time grid needs nt >= 2");
}

int Grid::neighbor(int c, int dir) const {
  int i = ci[c], j = cj[c];
  switch (dir) {
    case face_east: return active(i + 1, j);
    case face_west: return active(i - 1, j);
    case face_north: return active(i, j + 1);
    default: return active(i, j - 1);
  }
}

std::vector<char> Grid::unknown_mask() const {
  std::vector<char> m(centers.size());
  for (size_t c = 0; c < m.size(); ++c) m[c] = obstacle_mask[c] ? 0 : 1;
  return m;
}

int Grid::count(const std::vector<char>& mask) const {
  return static_cast<int>(std::count_if(mask.begin(), mask.end(), [](char v) { return v != 0; }));
}

Grid build_grid(const DomainSpec& domain, int nx) {
  if (nx < 8) throw Error(Errc::invalid_argument, "build_grid needs nx >= 8");
  domain.validate();
  Grid g;
  g.domain = domain;
  Vec2 lo = domain.shape.bbox_lo(), hi = domain.shape.bbox_hi();
  g.nx = nx;
  g.h = (hi.x - lo.x) / nx;
  g.ny = std::max(1, static_cast<int>(std::lround((hi.y - lo.y) / g.h)));
  g.origin = lo;
  g.index.assign(static_cast<size_t>(g.nx) * g.ny, -1);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      Vec2 p{lo.x + (i + 0.5) * g.h, lo.y + (j + 0.5) * g.h};
      if (!domain.shape.contains(p)) continue;
      g.index[i + g.nx * j] = g.size();
      g.ci.push_back(i);
      g.cj.push_back(j);
      g.centers.push_back(p);
      g.omega_mask.push_back(domain.control.contains(p) ? 1 : 0);
      g.obstacle_mask.push_back(domain.obstacle && domain.obstacle->contains(p) ? 1 : 0);
    }
  }
  if (g.count(g.omega_mask) == 0)
    throw Error(Errc::geometry_too_coarse, "control region resolves to zero cells at nx=" + std::to_string(nx));
  if (domain.obstacle && g.count(g.obstacle_mask) == 0)
    throw Error(Errc::geometry_too_coarse, "obstacle resolves to zero cells at nx=" + std::to_string(nx));
  static const Vec2 normals[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int c = 0; c < g.size(); ++c)
    for (int d = 0; d < 4; ++d)
      if (g.neighbor(c, d) < 0) g.boundary_faces.push_back({c, d, normals[d]});
  return g;
}

double integrate(const Grid& grid, const GridFunction& f, const std::vector<char>& mask) {
  double s = 0.0;
  for (int c = 0; c < grid.size(); ++c)
    if (mask[c]) s += f[c];
  return grid.h * grid.h * s;
}

double integrate(const Grid& grid, const GridFunction& f) { return grid.h * grid.h * f.sum(); }

double norm2(const Grid& grid, const GridFunction& f, const std::vector<char>* mask) {
  double s = 0.0;
  for (int c = 0; c < grid.size(); ++c)
    if (!mask || (*mask)[c]) s += f[c] * f[c];
  return grid.h * grid.h * s;
}

}  // namespace tdc
