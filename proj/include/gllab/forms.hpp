#pragma once

// Discrete 1-forms live on links between neighbouring domain cells: the
// value stored at comp[a][c] is the covariant component along axis a on
// the link c -> plus[a][c]. Links leaving the domain do not exist, which
// is what encodes a vanishing normal trace.

#include <array>
#include <vector>

#include "gllab/field.hpp"
#include "gllab/grid.hpp"

namespace gllab {

struct DiscreteOneForm {
  DomainPtr domain;
  std::array<std::vector<double>, 3> comp;

  DiscreteOneForm() = default;
  explicit DiscreteOneForm(DomainPtr dom);

  const Domain& dom() const { return *domain; }
  bool has_link(int axis, std::size_t c) const { return domain->plus[axis][c] >= 0; }

  DiscreteOneForm& operator+=(const DiscreteOneForm& o);
  DiscreteOneForm& operator-=(const DiscreteOneForm& o);
  DiscreteOneForm& operator*=(double s);
};

DiscreteOneForm operator+(DiscreteOneForm a, const DiscreteOneForm& b);
DiscreteOneForm operator-(DiscreteOneForm a, const DiscreteOneForm& b);
DiscreteOneForm operator*(double s, DiscreteOneForm a);

/// L^2_g inner product sum over links of link_weight * a * b.
double inner(const DiscreteOneForm& a, const DiscreteOneForm& b);
double norm(const DiscreteOneForm& a);

/// Gauge-invariant current u x du on links:
/// rho_a rho_b * arg(conj(u_a) u_b) / h. Exact for unimodular plane waves
/// and equal to rho^2 dphi whenever the phase jump is below pi.
DiscreteOneForm u_cross_du(const ComplexField& u);

/// Node-averaged chart vector of a form (mean of the adjacent links per
/// axis), for reporting and plotting.
std::vector<Vec3> to_node_vectors(const DiscreteOneForm& w);

}  // namespace gllab
