#pragma once

// Min-max over a two-parameter family of axisymmetric vortex rings on a
// solid ellipsoid, computed on the (r, z) half-ellipse with the modified
// potential.

#include <span>
#include <vector>

#include "gllab/analysis.hpp"
#include "gllab/field.hpp"
#include "gllab/solver.hpp"

namespace gllab {

/// Ẽ_eps on the half_ellipse_rz chart (2π r weights, modified potential).
double reduced_energy(const ComplexField& rf);

/// v_{y,eps}(x) = φ_eps(|x-w|) (x-w)/|x-w|, φ_eps(t) = min(t/eps, 1),
/// w = -y/(1-|y|); the constant y when |y| = 1. x = r + iz.
cplx sweep_profile(cplx x, cplx y, double eps);

struct SweepMember {
  cplx y;
  bool on_boundary = false;  // |y| = 1
  int radial_index = 0;      // 0 = centre, radial = boundary circle
  int angular_index = 0;
  ComplexField field;
  double energy = 0.0;
};

struct SweepFamily {
  double epsilon = 0.0;
  double elongation = 0.0;
  int radial = 8;
  int angular = 16;
  DomainPtr domain;
  std::vector<SweepMember> members;  // centre first, then by radial then angular index
  double max_energy = 0.0;
  double lipschitz = 0.0;            // max ‖m(y1) - m(y2)‖ / |y1 - y2| over neighbouring samples
  std::vector<double> fractions;     // interior radial levels as fractions of the ray extent

  ComplexField member(cplx y) const;
};

/// Parameter point whose vortex centre w sits at `frac` of the way from the
/// origin to the half-ellipse boundary along direction phi (in (r, z)).
cplx sweep_parameter(double frac, double phi, double l);

/// Parameter points lie on `angular` rays; interior radial levels place the
/// vortex centre w at fixed fractions of the ray's distance to the
/// half-ellipse boundary, so every ray resolves the region the vortex can
/// occupy. Throws ConfigError below 8 x 16 samples.
SweepFamily sweep_family(double eps, double l, std::span<const int> resolution, int radial = 8, int angular = 16);

struct MountainPassOptions {
  int refine_evaluations = 40;  // pattern-search budget around the sampled argmax
  int polish_flow_steps = 10;
  int phase_sweeps = 1;
  int polish_newton = 40;
  double polish_tol = 1e-7;
};

struct MinMaxReport {
  double epsilon = 0.0;
  double c_initial = 0.0;          // max energy over the unflowed family
  double c_eps = 0.0;              // max energy after the flow budget
  std::vector<double> c_trace;     // max energy after each budget step
  std::size_t argmax_index = 0;
  cplx argmax_y;
  cplx refined_y;                  // local maximiser of the flowed energy over y
  double c_refined = 0.0;          // its energy, >= c_eps
  int refine_evaluations = 0;
  ComplexField polished;
  double polished_energy = 0.0;
  double polished_residual = 0.0;  // Ẽ Euler-Lagrange residual
  bool polish_converged = false;
  std::string polish_message;
  std::array<double, 2> vortex_location{0.0, 0.0};  // (r, z) of min |u|
  double vortex_min_modulus = 0.0;
  double vortex_boundary_distance = 0.0;            // to the arc r^2 + (z/l)^2 = 1, in cells
  double energy_over_log_eps = 0.0;                 // c_eps / |log eps|
  std::vector<std::vector<double>> member_energy;   // per member, per step
};

MinMaxReport mountain_pass(SweepFamily& family, int flow_budget, const MountainPassOptions& opt = {});

/// Euclidean (r, z) distance from a point to the arc r^2 + (z/l)^2 = 1, r >= 0.
double distance_to_arc(double r, double z, double l);

struct ConcentrationReport {
  std::vector<double> tube_radii;
  std::vector<double> fractions;
};

/// Fraction of the measure within (r, z)-distance rho of the equator
/// circle (r, z) = (1, 0). The measure is already three-dimensional through
/// the chart's 2π r weight.
ConcentrationReport equator_concentration(const EnergyMeasure& mu, std::span<const double> tube_radii);

/// |u| = tanh(d/eps) with d the distance to the equator circle.
ComplexField planted_equator_ring(DomainPtr dom, double eps);

}  // namespace gllab
