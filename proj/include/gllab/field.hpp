#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "gllab/grid.hpp"
#include "gllab/parallel.hpp"

namespace gllab {

using cplx = std::complex<double>;

/// Potential term of the energy: the standard quartic (1-t^2)^2/4 or the
/// modified W(t), which agrees with it for t <= 1 and grows quadratically
/// beyond.
enum class Potential { quartic, modified };

struct PotentialValue {
  double value = 0.0;
  double slope = 0.0;      // dW/dt
  double curvature = 0.0;  // d^2W/dt^2
};

/// W(t) = (t^2-1)^2/4 for t <= 1, (t-1)^2 for t > 1. Throws for t < 0.
PotentialValue modified_potential(double t);
PotentialValue potential(Potential kind, double t);

/// Discrete u: grid -> C. Values at exterior cells are kept at zero.
struct ComplexField {
  DomainPtr domain;
  double epsilon = 1.0;
  std::vector<cplx> values;

  ComplexField() = default;
  ComplexField(DomainPtr dom, double eps);

  std::size_t size() const { return values.size(); }
  const Domain& dom() const { return *domain; }
  double max_modulus() const;
  void zero_exterior();
};

/// Node gradient: central differences inside, second-order one-sided next to
/// a missing neighbour. Component (node, axis) at d[node * 3 + axis].
struct NodeGradient {
  std::vector<cplx> d;
  cplx at(std::size_t node, int axis) const { return d[node * 3 + axis]; }
};

NodeGradient gradient(const ComplexField& u);
/// |∇u|_g^2 = g^{aa} |∂_a u|^2 at a node.
double gradient_norm2(const Domain& dom, const NodeGradient& grad, std::size_t node);

/// Per-node energy mass: half of every adjacent link's kinetic energy plus
/// the node's potential energy, all multiplied by the node measure. Summing
/// these gives the total energy; dividing by node_weight gives e_eps(u).
std::vector<double> cell_energy(const ComplexField& u, Potential pot = Potential::quartic);

/// E_eps(u), deterministic pairwise sum of `cell_energy`.
double energy(const ComplexField& u, Potential pot = Potential::quartic);

/// Pointwise energy density and its four summands
/// (1-|u|^2)|∇u|^2/2, |∇|u|^2|^2/8, |u x ∇u|^2/2, (1-|u|^2)^2/(4 eps^2).
struct EnergyDensity {
  std::vector<double> e;
  std::array<std::vector<double>, 4> parts;
};

EnergyDensity decompose_energy(const ComplexField& u);

/// Link-level form of the gradient identity
/// |Du|^2 = (1-|ū|^2)|Du|^2 + |D|u|^2|^2/4 + |ū x Du|^2 with ū the link
/// midpoint value. Arrays are indexed [axis][tail cell].
struct LinkGradientSplit {
  std::array<std::vector<double>, 3> total;
  std::array<std::vector<double>, 3> amplitude_weighted;
  std::array<std::vector<double>, 3> modulus;
  std::array<std::vector<double>, 3> cross;
};

LinkGradientSplit gradient_decomposition(const ComplexField& u);

struct PolarForm {
  std::vector<double> rho;
  std::vector<double> phi;
  std::vector<double> X;  // eps^-2 (1 - rho)
  std::vector<std::uint8_t> valid;
  std::size_t seed = 0;
};

/// Breadth-first phase unwrapping over {rho >= rho_min}, starting from the
/// node of largest modulus. Neighbour jumps are reduced below pi; a jump of
/// exactly pi is an error.
PolarForm polar_decompose(const ComplexField& u, double rho_min = 0.5);

/// Principal argument of conj(a) * b with the tie at exactly -pi/pi mapped
/// to 0 (the mean of the two admissible values).
double link_phase(cplx a, cplx b);

/// Winding number of the phase along a closed loop of nodes.
int phase_winding(const ComplexField& u, std::span<const std::size_t> loop);

/// Closed loop of nodes along the boundary of an index square with
/// half-width `half` cells around `center` in the plane of axes (a, b).
std::vector<std::size_t> square_loop(const Domain& dom, std::size_t center, int half, int a = 0, int b = 1);

/// Stiffness operator: out_c = sum over links of conductance * (v_c - v_other).
/// Equals -W Δ_g v with W the node measure; Neumann by construction.
template <class T>
void apply_stiffness(const Domain& dom, std::span<const T> v, std::span<T> out) {
  const int n = dom.ndim();
  par::for_each(dom.size(), [&](std::size_t c) {
    if (!dom.active(c)) {
      out[c] = T{};
      return;
    }
    T acc{};
    for (int a = 0; a < n; ++a) {
      const auto p = dom.plus[a][c];
      if (p >= 0) acc += dom.conductance[a][c] * (v[c] - v[static_cast<std::size_t>(p)]);
      const auto m = dom.minus[a][c];
      if (m >= 0) acc += dom.conductance[a][static_cast<std::size_t>(m)] * (v[c] - v[static_cast<std::size_t>(m)]);
    }
    out[c] = acc;
  });
}

/// Weighted inner product sum_c w_c Re(conj(a_c) b_c).
double weighted_dot(const Domain& dom, std::span<const cplx> a, std::span<const cplx> b);
/// sqrt(sum w |v|^2 / vol): the resolution-independent RMS norm.
double weighted_rms(const Domain& dom, std::span<const cplx> v);

}  // namespace gllab
