#pragma once

#include <optional>
#include <vector>

#include "tdc/error.hpp"
#include "tdc/field.hpp"
#include "tdc/geometry.hpp"

namespace tdc {

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec2> x;
  double t0 = 0.0;
  Vec2 x0;
  bool forward = true;
  double step = 0.0;  // actual spacing between consecutive samples

  Vec2 end() const { return x.back(); }
};

// min(0.01, 0.1/b) with b the field's sup bound (computed bounds required).
double default_step(const VectorField& field);

// One classical RK4 step of size dt from (x, t).
Vec2 rk4_step(const VectorField& field, Vec2 x, double t, double dt);

// Endpoint of the flow without storing samples. The escape guard applies
// when the field carries bounds computed on a domain.
Vec2 flow_point(const VectorField& field, Vec2 x0, double t0, double t1, double step);

Trajectory integrate_flow(const VectorField& field, Vec2 x0, double t0, double t1, double step);

struct FlowPair {
  Vec2 x0;
  double t0;
  Vec2 y0;
  double s0;
};

// Max over pairs of |Phi(t,t0,x0) - Phi(t,s0,y0)| - e^{L T}(b|t0-s0| + |x0-y0|).
double gronwall_check(const VectorField& field, const std::vector<FlowPair>& pairs, double t, double T,
                      double step = 0.0);

struct FlushingSample {
  Vec2 x0;
  double t0 = 0.0;
  std::optional<double> entry_time;  // latest admissible t in (t0 - T0, t0)
  std::optional<Trajectory> witness;
};

struct FlushingReport {
  bool satisfied = false;
  double T0 = 0.0;
  double r0 = 0.0;
  double inset = 0.0;
  std::vector<FlushingSample> samples;
  int violation_count = 0;
};

struct FlushingOptions {
  double step = 0.0;   // 0: default_step(field)
  double inset = -1.0;  // < 0: half the sample spacing
};

// Deterministic x0 samples: lattice points inside the domain plus boundary
// points moved inward by the inset.
std::vector<Vec2> flushing_points(const Region& domain, int n_space, double* inset_out = nullptr,
                                  double inset = -1.0);

// Center plus concentric rings, at least n_ball points.
std::vector<Vec2> ball_points(Vec2 center, double r, int n_ball);

FlushingReport check_flushing(const VectorField& field, const Region& domain, const Region& target, double T,
                              double T0, double r0, int n_space, int n_time, int n_ball,
                              const FlushingOptions& opts = {});

class NoFlushingError : public Error {
 public:
  NoFlushingError(const std::string& what, Trajectory witness)
      : Error(Errc::no_flushing, what), witness_(std::move(witness)) {}
  const Trajectory& witness() const { return witness_; }

 private:
  Trajectory witness_;
};

struct FlushingEstimate {
  double T0 = 0.0;
  double r0 = 0.0;
  double max_entry = 0.0;
  Vec2 worst_point;
};

FlushingEstimate estimate_T0_r0(const VectorField& field, const Region& domain, const Region& target,
                                double step = 0.0, int n_space = 400, double horizon = 100.0);

struct ShrinkResult {
  Region region;
  double d0 = 0.0;
};

ShrinkResult shrink_target(const VectorField& field, const Region& domain, const Region& target, double T,
                           double T0, double r0, int n_space = 400, int n_time = 3, int n_ball = 25,
                           const FlushingOptions& opts = {});

}  // namespace tdc
