#include "tdc/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdc/error.hpp"

namespace tdc {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

}  // namespace

double Jacobian::frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }

VectorField VectorField::rotation() {
  VectorField f;
  f.kind_ = Kind::rotation;
  return f;
}

VectorField VectorField::spiral(double R) {
  if (!(R > 0.0)) throw Error(Errc::invalid_argument, "spiral radius must be positive");
  VectorField f;
  f.kind_ = Kind::spiral;
  f.R_ = R;
  return f;
}

VectorField VectorField::constant(Vec2 v) {
  VectorField f;
  f.kind_ = Kind::constant;
  f.v_ = v;
  return f;
}

VectorField VectorField::polynomial(std::vector<PolyTerm> terms) {
  VectorField f;
  f.kind_ = Kind::polynomial;
  for (const auto& t : terms) {
    if (t.component < 0 || t.component > 1 || t.px < 0 || t.py < 0 || t.pt < 0)
      throw Error(Errc::invalid_argument, "invalid polynomial term");
    if (t.pt > 0 && t.coeff != 0.0) f.time_dependent_ = true;
  }
  f.terms_ = std::move(terms);
  return f;
}

VectorField VectorField::scaled(double kappa) const {
  VectorField f = *this;
  f.scale_ *= kappa;
  f.bounds_.reset();
  f.bounds_domain_.reset();
  return f;
}

std::string VectorField::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::rotation: os << "rotation"; break;
    case Kind::spiral: os << "spiral(R=" << R_ << ")"; break;
    case Kind::constant: os << "constant(" << v_.x << "," << v_.y << ")"; break;
    case Kind::polynomial: os << "polynomial(" << terms_.size() << " terms)"; break;
  }
  if (scale_ != 1.0) os << "*" << scale_;
  return os.str();
}

double VectorField::stream(Vec2 x) const {
  double r2 = x.x * x.x + x.y * x.y;
  if (kind_ == Kind::rotation) return scale_ * 0.5 * r2;
  if (kind_ == Kind::spiral) return scale_ * 0.5 * std::exp(-r2);
  return 0.0;
}

Vec2 VectorField::remainder(Vec2 x, double t) const {
  switch (kind_) {
    case Kind::rotation:
      return {0.0, 0.0};
    case Kind::spiral: {
      double r2 = x.x * x.x + x.y * x.y;
      double w = scale_ * std::exp(-r2) * (R_ * R_ - r2);
      return {w * x.x, w * x.y};
    }
    default:
      return (*this)(x, t);
  }
}

Vec2 VectorField::operator()(Vec2 x, double t) const {
  switch (kind_) {
    case Kind::rotation:
      return {scale_ * x.y, -scale_ * x.x};
    case Kind::spiral: {
      double r2 = x.x * x.x + x.y * x.y;
      double e = scale_ * std::exp(-r2);
      double w = R_ * R_ - r2;
      return {e * (-x.y + w * x.x), e * (x.x + w * x.y)};
    }
    case Kind::constant:
      return scale_ * v_;
    case Kind::polynomial: {
      Vec2 out;
      for (const auto& m : terms_) {
        double v = m.coeff * ipow(x.x, m.px) * ipow(x.y, m.py) * ipow(t, m.pt);
        (m.component == 0 ? out.x : out.y) += v;
      }
      return scale_ * out;
    }
  }
  return {};
}

Jacobian VectorField::jacobian(Vec2 x, double t) const {
  Jacobian J;
  switch (kind_) {
    case Kind::rotation:
      J.a12 = scale_;
      J.a21 = -scale_;
      break;
    case Kind::spiral: {
      double r2 = x.x * x.x + x.y * x.y;
      double e = scale_ * std::exp(-r2);
      double w = R_ * R_ - r2;
      double p1 = -x.y + w * x.x, p2 = x.x + w * x.y;
      // d/dxj [e * p_i] = e * (dp_i/dxj - 2 xj p_i)
      double dp11 = w - 2 * x.x * x.x, dp12 = -1 - 2 * x.x * x.y;
      double dp21 = 1 - 2 * x.x * x.y, dp22 = w - 2 * x.y * x.y;
      J.a11 = e * (dp11 - 2 * x.x * p1);
      J.a12 = e * (dp12 - 2 * x.y * p1);
      J.a21 = e * (dp21 - 2 * x.x * p2);
      J.a22 = e * (dp22 - 2 * x.y * p2);
      break;
    }
    case Kind::constant:
      break;
    case Kind::polynomial:
      for (const auto& m : terms_) {
        double dx = m.px > 0 ? m.coeff * m.px * ipow(x.x, m.px - 1) * ipow(x.y, m.py) * ipow(t, m.pt) : 0.0;
        double dy = m.py > 0 ? m.coeff * m.py * ipow(x.x, m.px) * ipow(x.y, m.py - 1) * ipow(t, m.pt) : 0.0;
        if (m.component == 0) {
          J.a11 += scale_ * dx;
          J.a12 += scale_ * dy;
        } else {
          J.a21 += scale_ * dx;
          J.a22 += scale_ * dy;
        }
      }
      break;
  }
  return J;
}

Vec2 VectorField::time_derivative(Vec2 x, double t) const {
  Vec2 out;
  if (kind_ != Kind::polynomial) return out;
  for (const auto& m : terms_) {
    if (m.pt == 0) continue;
    double v = m.coeff * m.pt * ipow(x.x, m.px) * ipow(x.y, m.py) * ipow(t, m.pt - 1);
    (m.component == 0 ? out.x : out.y) += v;
  }
  return scale_ * out;
}

void VectorField::compute_bounds(const Region& domain, double T) {
  FieldBounds b;
  Vec2 lo = domain.bbox_lo(), hi = domain.bbox_hi();
  const int n = 240;
  std::vector<Vec2> pts;
  pts.reserve((n + 1) * (n + 1) + 4 * n);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      Vec2 p{lo.x + (hi.x - lo.x) * i / n, lo.y + (hi.y - lo.y) * j / n};
      if (domain.contains_closed(p)) pts.push_back(p);
    }
  for (int k = 0; k < 4 * n; ++k) {
    double s = 2 * M_PI * k / (4 * n);
    Vec2 probe = domain.center + Vec2{10 * domain.diameter() * std::cos(s), 10 * domain.diameter() * std::sin(s)};
    pts.push_back(domain.project_to_boundary(probe));
  }
  int ntimes = time_dependent_ ? 21 : 1;
  for (int k = 0; k < ntimes; ++k) {
    double t = ntimes == 1 ? 0.0 : T * k / (ntimes - 1);
    for (auto p : pts) {
      b.b = std::max(b.b, norm((*this)(p, t)));
      Jacobian J = jacobian(p, t);
      b.L = std::max(b.L, J.frobenius());
      b.div = std::max(b.div, std::abs(J.trace()));
      b.dtB = std::max(b.dtB, norm(time_derivative(p, t)));
    }
  }
  // Sampling misses interior maxima by O(spacing^2); linear fields peak on the boundary samples.
  const double pad = (kind_ == Kind::rotation || kind_ == Kind::constant) ? 1.0 : 1.0 + 1e-3;
  b.b *= pad;
  b.L *= pad;
  b.div *= pad;
  b.dtB *= pad;
  bounds_ = b;
  bounds_domain_ = domain;
}

const FieldBounds& VectorField::bounds() const {
  if (!bounds_) throw Error(Errc::invalid_argument, "field bounds not computed");
  return *bounds_;
}

Vec2 evaluate_field(const VectorField& field, Vec2 x, double t) { return field(x, t); }

}  // namespace tdc
