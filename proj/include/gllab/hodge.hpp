#pragma once

// Discrete exterior calculus on the staggered grid: 0-forms on cells,
// 1-forms on links, 2-forms on plaquettes (plus polar caps on the product
// chart). d∘d vanishes identically and d* is the exact adjoint of d in the
// weighted inner products, so the Hodge split is orthogonal up to the
// accuracy of the two inner linear solves.

#include <vector>

#include "gllab/field.hpp"
#include "gllab/forms.hpp"

namespace gllab {

/// df on links: (f_b - f_a) / h.
DiscreteOneForm exterior_derivative(DomainPtr dom, const std::vector<double>& f);

/// d*ω = -div_g ω per node (zero at exterior cells).
std::vector<double> d_star(const DiscreteOneForm& w);

/// Discrete 2-form: plaquette circulations per plane, then one value per cap.
struct DiscreteTwoForm {
  std::array<std::vector<double>, 3> plane;  // ∂_a ω_b - ∂_b ω_a, planes (0,1), (0,2), (1,2)
  std::vector<double> cap;                   // circulation around each polar ring, over the cap area
};

DiscreteTwoForm d(const DiscreteOneForm& w);
/// Area-weighted L^2 norm of a 2-form.
double norm(const Domain& dom, const DiscreteTwoForm& f);

struct HodgeSplit {
  DiscreteOneForm harmonic;
  DiscreteOneForm exact;
  DiscreteOneForm coexact;
  std::vector<double> alpha;  // potential of the exact part, weighted mean zero
  double residual_norm = 0.0; // worst relative residual of the two inner solves
  bool flagged = false;
};

HodgeSplit hodge_decompose(const DiscreteOneForm& w, double rtol = 1e-13);

struct Harmonicity {
  double d_norm = 0.0;       // ‖dω‖ / ‖ω‖
  double d_star_norm = 0.0;  // ‖d*ω‖ / ‖ω‖
  double normal_norm = 0.0;  // RMS of ⟨ω, ν⟩ over boundary nodes / RMS |ω|
};

Harmonicity harmonicity(const DiscreteOneForm& w);

struct PsiEntry {
  double epsilon = 0.0;
  DiscreteOneForm psi;       // |log ε|^{-1/2} u×du
  DiscreteOneForm harmonic;
  Harmonicity diagnostics;
  double harmonic_defect = 0.0;  // ‖ψ - harmonic(ψ)‖ / ‖ψ‖
};

/// Requires every field's residual to be at most `max_residual`.
std::vector<PsiEntry> extract_psi(const std::vector<ComplexField>& fields, double max_residual = 1e-6);

}  // namespace gllab
