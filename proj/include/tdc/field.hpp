#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdc/geometry.hpp"

namespace tdc {

struct Jacobian {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;  // a_ij = d B_i / d x_j

  double frobenius() const;
  double trace() const { return a11 + a22; }
};

// Monomial c * x1^px * x2^py * t^pt contributing to component `component`.
struct PolyTerm {
  int component = 0;
  int px = 0;
  int py = 0;
  int pt = 0;
  double coeff = 0.0;
};

struct FieldBounds {
  double b = 0.0;    // sup |B|
  double L = 0.0;    // sup Frobenius norm of the Jacobian
  double div = 0.0;  // sup |div B|
  double dtB = 0.0;  // sup |dB/dt|
};

class VectorField {
 public:
  enum class Kind { rotation, spiral, constant, polynomial };

  static VectorField rotation();
  static VectorField spiral(double R = 1.0);
  static VectorField constant(Vec2 v);
  static VectorField zero() { return constant({0.0, 0.0}); }
  static VectorField polynomial(std::vector<PolyTerm> terms);

  Kind kind() const { return kind_; }
  bool time_dependent() const { return time_dependent_; }
  double radius() const { return R_; }
  Vec2 constant_value() const { return v_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }
  double scale() const { return scale_; }
  VectorField scaled(double kappa) const;
  std::string name() const;

  Vec2 operator()(Vec2 x, double t) const;
  Jacobian jacobian(Vec2 x, double t) const;
  Vec2 time_derivative(Vec2 x, double t) const;

  // Solenoidal part written as (d2 psi, -d1 psi); absent for constant and
  // polynomial fields, whose whole value is then the remainder.
  bool has_stream() const { return kind_ == Kind::rotation || kind_ == Kind::spiral; }
  double stream(Vec2 x) const;
  Vec2 remainder(Vec2 x, double t) const;

  // Sup-norm bounds over the closed domain and [0, T], by dense sampling of
  // the closed forms.
  void compute_bounds(const Region& domain, double T = 1.0);
  bool has_bounds() const { return bounds_.has_value(); }
  const FieldBounds& bounds() const;
  const std::optional<Region>& bounds_domain() const { return bounds_domain_; }

 private:
  Kind kind_ = Kind::constant;
  bool time_dependent_ = false;
  double R_ = 1.0;
  Vec2 v_;
  double scale_ = 1.0;
  std::vector<PolyTerm> terms_;
  std::optional<FieldBounds> bounds_;
  std::optional<Region> bounds_domain_;
};

Vec2 evaluate_field(const VectorField& field, Vec2 x, double t);

}  // namespace tdc
