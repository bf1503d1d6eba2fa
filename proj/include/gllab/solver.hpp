#pragma once

// Critical points of the Ginzburg-Landau energy with Neumann boundary
// conditions: semi-implicit L^2 gradient flow, Newton polishing with MINRES
// inner solves, and the even reflection across a flat boundary face.

#include <cstdint>
#include <string>
#include <vector>

#include "gllab/field.hpp"

namespace gllab {

/// Largest flow step for the explicit reaction term.
inline double dt_stability(double eps) { return 0.4 * eps * eps; }

struct SolverConfig {
  double dt = 0.0;  // 0 selects dt_stability(eps)
  int max_steps = 20000;
  double residual_tol = 1e-8;  // weighted RMS of the GL residual
  double newton_after = 0.5;
  double damping = 0.5;        // line-search contraction
  int max_newton = 30;
  int fallback_steps = 200;    // flow steps after a failed Newton phase
  double newton_linear_tol = 1e-6;
  int newton_max_linear = 5000;
  Potential potential = Potential::quartic;
  int record_every = 1;
};

struct EnergyRecord {
  int step = 0;
  double energy = 0.0;
  double residual = 0.0;
  bool newton = false;
};

struct SolveReport {
  double final_residual = 0.0;
  int steps = 0;              // flow steps
  int newton_iterations = 0;
  int linear_iterations = 0;  // MINRES iterations summed over Newton steps
  std::vector<EnergyRecord> energy_history;
  bool converged = false;
  bool aborted = false;       // energy increased on 3 consecutive flow steps
  bool newton_fallback = false;
  double max_modulus = 0.0;
  std::string message;
};

/// Per-node -Δ_g u - eps^-2 (1-|u|^2) u (or the modified-potential
/// analogue); the discrete Neumann condition is built into the stencil.
std::vector<cplx> gl_residual(const ComplexField& u, Potential pot = Potential::quartic);
double residual_norm(const ComplexField& u, Potential pot = Potential::quartic);

struct SolveResult {
  ComplexField field;
  SolveReport report;
};

SolveResult gradient_flow(ComplexField init, const SolverConfig& cfg);
SolveResult newton_polish(ComplexField init, const SolverConfig& cfg);
/// Flow until the residual drops below newton_after, then Newton; failed
/// Newton phases fall back to more flow.
SolveResult solve(ComplexField init, const SolverConfig& cfg);

/// Multiplies u by e^{iψ} with ψ chosen so the current u×du becomes
/// divergence free (Neumann). Removes far-field phase mismatch far faster
/// than the flow and leaves |u| untouched.
ComplexField relax_phase(ComplexField u, int sweeps = 1);

// Initial data.
ComplexField init_constant(DomainPtr dom, double eps, cplx value);
ComplexField init_noise(DomainPtr dom, double eps, std::uint64_t seed, double amplitude);
/// tanh(d/eps) e^{i degree theta} about `core` in the plane of axes (a, b).
ComplexField init_vortex(DomainPtr dom, double eps, const Vec3& core, int degree = 1, int a = 0, int b = 1);
/// (1 - k^2 eps^2)^{1/2} e^{iks} on the product chart.
ComplexField init_product_exact(DomainPtr dom, double eps, int k);
/// Same plane wave with the amplitude that solves the discrete equation.
ComplexField init_product_discrete(DomainPtr dom, double eps, int k);

struct ReflectionReport {
  ComplexField full;
  double half_interior_residual = 0.0;
  double full_interior_residual = 0.0;
  double neumann_violation = 0.0;  // RMS one-sided normal derivative on the flat face, relative
  bool neumann_flagged = false;
  bool within_bound = false;       // full <= 2 * half
};

/// Even reflection ũ(x', x_n) = u(x', |x_n|) of a half-ball field onto the
/// full ball.
ReflectionReport reflect_even(const ComplexField& half, double neumann_flag_tol = 0.25);

/// Weighted RMS of the residual restricted to interior cells.
double interior_residual_norm(const ComplexField& u, Potential pot = Potential::quartic);

}  // namespace gllab
