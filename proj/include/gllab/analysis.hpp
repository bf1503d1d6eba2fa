#pragma once

// Energy-measure analytics: ball densities and monotonicity, the
// Courant-Lebesgue shell search, eta-ellipticity scans, singular-set
// extraction and the inner/outer variation checks.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gllab/field.hpp"

namespace gllab {

/// Index offsets of every cell centre within chart distance < radius of a
/// cell centre. Ball integrals walk these offsets instead of scanning.
struct BallStencil {
  std::vector<std::array<int, 3>> offsets;
  double radius = 0.0;
};

BallStencil ball_stencil(const StructuredGrid& grid, double radius);
/// Calls f(cell) for every active cell of the ball around `center`.
void for_ball(const Domain& dom, const BallStencil& st, std::size_t center, const std::function<void(std::size_t)>& f);

struct EnergyMeasure {
  DomainPtr domain;
  std::vector<double> cell_mass;  // e_eps(u) times the node measure
  double log_eps = 1.0;           // |log eps|
  bool normalized = true;         // masses divided by |log eps| on read

  double scale() const { return normalized ? 1.0 / log_eps : 1.0; }
  double total() const;
  double ball(const BallStencil& st, std::size_t center) const;
};

EnergyMeasure energy_measure(const ComplexField& u, bool normalized = true, Potential pot = Potential::quartic);

struct DensityProfile {
  std::size_t center = 0;
  std::vector<double> radii;
  std::vector<double> values;  // e^{chi r} r^{2-n} mu(B_r)
  double chi = 0.0;
};

/// Throws ConfigError for an inactive center or radii outside
/// (2 * max spacing, diameter).
DensityProfile density_profile(const EnergyMeasure& mu, std::size_t center, std::span<const double> radii,
                               double chi = 0.0);

struct MonotonicityEntry {
  std::size_t center = 0;
  double chi_fit = 0.0;  // smallest chi >= 0 making the profile non-decreasing within slack
  bool flagged = false;  // chi_fit > chi_max
  DensityProfile profile;
};

struct MonotonicityReport {
  double slack = 0.02;
  double chi_max = 0.05;
  std::vector<MonotonicityEntry> entries;
  bool all_pass = true;
};

MonotonicityReport monotonicity_report(const EnergyMeasure& mu, std::span<const std::size_t> centers,
                                       std::span<const double> radii, double slack = 0.02, double chi_max = 0.05);

struct CourantLebesgueResult {
  double r_lo = 0.0;  // sqrt(eps)
  double r_hi = 0.0;  // eps^{1/4}
  std::vector<double> radii;
  std::vector<double> values;
  double radius = 0.0;  // argmin, smallest among ties
  double value = 0.0;
  double bulk = 0.0;    // r_hi^{2-n} times the energy of B_{r_hi}
  double c_fit = 0.0;   // value * |log eps| / bulk
};

/// Minimises r^{3-n} ∫_{∂B_r} |∂_ν u|^2 + r^{2-n} ∫_{B_r} (1-|u|^2)^2/(2 eps^2)
/// over resolvable radii in (sqrt(eps), eps^{1/4}).
CourantLebesgueResult courant_lebesgue_search(const ComplexField& u, const Vec3& center);

struct EtaCenter {
  std::size_t center = 0;
  double scaled_energy = 0.0;  // r^{2-n} ∫_{B_r} e_eps / |log(eps/r)|
  double min_modulus = 0.0;    // over B_{r/4}
  bool energy_small = false;
  bool counterexample = false;
};

struct EtaScanReport {
  double ball_radius = 0.0;
  double eta = 0.0;
  double sigma = 0.0;
  std::vector<EtaCenter> centers;
  std::size_t passing = 0;
  std::size_t counterexamples = 0;
};

/// `stride` = 0 picks centres every ~r/4 cells.
EtaScanReport eta_scan(const ComplexField& u, double ball_radius, double eta, double sigma, int stride = 0);

struct SingularSet {
  double r_probe = 0.0;
  double theta_min = 0.0;
  std::vector<std::size_t> cells;  // ascending
  std::vector<double> density;     // r^{2-n} mu(B_r(p)) for p in cells
  double max_density = 0.0;        // over every active cell
};

SingularSet singular_set(const EnergyMeasure& mu, double r_probe, double theta_min);

/// Chart vector field X with analytic-derivative table ∂_a X^b, sampled
/// at cell centres.
struct AdmissibleVectorField {
  std::vector<Vec3> X;
  std::vector<std::array<double, 9>> DX;  // [b * 3 + a] = ∂_a X^b
  double boundary_tangency_norm = 0.0;    // max |<X, ν>_g| over boundary nodes
  double c1_norm = 0.0;                   // max |X|_g + max |∇X|

  bool admissible() const { return boundary_tangency_norm <= 1e-10; }
};

AdmissibleVectorField make_vector_field(const Domain& dom, const std::function<Vec3(const Vec3&)>& X);
AdmissibleVectorField combine(double a, const AdmissibleVectorField& x1, double b, const AdmissibleVectorField& x2,
                              const Domain& dom);

/// ∫ e_eps(u) div_g X - <∇X, du⊗du> dvol. Throws ConfigError when X is not
/// tangent to the boundary.
double stationarity_residual(const ComplexField& u, const AdmissibleVectorField& X);

/// δE_eps(u)(ζ) for the discrete energy.
double first_variation(const ComplexField& u, std::span<const cplx> zeta, Potential pot = Potential::quartic);

/// sqrt(sum w |ζ|^2)
double weighted_norm(const Domain& dom, std::span<const cplx> zeta);

/// Sum of a few low-frequency complex Fourier modes with random
/// coefficients; zero outside the domain.
std::vector<cplx> random_smooth_field(const Domain& dom, std::uint64_t seed, int modes = 3);

/// Multilinear interpolation of a node field at a chart point, using the
/// active cells among the surrounding 2^n centres.
cplx interpolate(const Domain& dom, std::span<const cplx> values, const Vec3& x, bool* inside = nullptr);

}  // namespace gllab
