#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace tdc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Disk, annulus or axis-aligned rectangle. Membership is for the open set.
struct Region {
  enum class Kind { disk, annulus, rectangle };

  Kind kind = Kind::disk;
  Vec2 center;
  double r_in = 0.0;
  double r_out = 0.0;
  Vec2 lo;
  Vec2 hi;

  static Region disk(Vec2 c, double radius);
  static Region annulus(Vec2 c, double inner, double outer);
  static Region rectangle(Vec2 lo, Vec2 hi);

  bool contains(Vec2 p) const;
  bool contains_closed(Vec2 p, double tol = 0.0) const;
  // Positive inside, negative outside; magnitude is the distance to the boundary.
  double signed_distance(Vec2 p) const;
  Vec2 project_to_boundary(Vec2 p) const;
  Region eroded(double d) const;
  Vec2 bbox_lo() const;
  Vec2 bbox_hi() const;
  double diameter() const;
  double area() const;
  bool inside_of(const Region& outer, double margin = 0.0) const;
  std::string describe() const;
};

struct DomainSpec {
  Region shape;
  Region control;
  std::optional<Region> obstacle;

  void validate() const;
};

enum FaceDir { face_east = 0, face_west = 1, face_north = 2, face_south = 3 };

struct BoundaryFace {
  int cell;  // active-cell index
  int dir;   // FaceDir
  Vec2 normal;
};

// Masked uniform grid over the bounding box of the domain; cells are
// classified by their centers. Active cells are the cells inside the domain.
class Grid {
 public:
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  Vec2 origin;
  std::vector<int> index;  // lattice (i + nx*j) -> active index or -1
  std::vector<int> ci;
  std::vector<int> cj;
  std::vector<Vec2> centers;
  std::vector<char> omega_mask;
  std::vector<char> obstacle_mask;
  std::vector<BoundaryFace> boundary_faces;
  DomainSpec domain;

  int size() const { return static_cast<int>(centers.size()); }
  int active(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return index[i + nx * j];
  }
  // Neighbor of active cell c across face dir, or -1.
  int neighbor(int c, int dir) const;
  Vec2 corner(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
  std::vector<char> inside_mask() const { return std::vector<char>(centers.size(), 1); }
  std::vector<char> unknown_mask() const;
  int count(const std::vector<char>& mask) const;
};

using GridFunction = Eigen::VectorXd;

struct TimeGrid {
  double T = 1.0;
  int nt = 2;
  double t_begin = 0.0;

  double dt() const { return T / nt; }
  double time(int n) const { return n == nt ? t_begin + T : t_begin + T * n / nt; }
  void validate() const;
};

Grid build_grid(const DomainSpec& domain, int nx);

double integrate(const Grid& grid, const GridFunction& f, const std::vector<char>& mask);
double integrate(const Grid& grid, const GridFunction& f);
double norm2(const Grid& grid, const GridFunction& f, const std::vector<char>* mask = nullptr);

}  // namespace tdc
