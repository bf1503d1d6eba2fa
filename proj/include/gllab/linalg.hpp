#pragma once

// Krylov solvers over std::vector<double> or std::vector<cplx>. Complex
// vectors are treated as real vectors of twice the length, so operators
// only need to be real-linear and symmetric w.r.t. Re<a, b>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gllab/parallel.hpp"

namespace gllab::linalg {

struct KrylovStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

inline double re_dot(double a, double b) { return a * b; }
inline double re_dot(std::complex<double> a, std::complex<double> b) {
  return a.real() * b.real() + a.imag() * b.imag();
}

template <class T>
double dot(const std::vector<T>& a, const std::vector<T>& b) {
  return par::sum_of(a.size(), [&](std::size_t i) { return re_dot(a[i], b[i]); });
}

/// y += s * x
template <class T>
void axpy(double s, const std::vector<T>& x, std::vector<T>& y) {
  par::for_each(x.size(), [&](std::size_t i) { y[i] += s * x[i]; });
}

template <class T>
using Operator = std::function<void(const std::vector<T>&, std::vector<T>&)>;

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi-)definite operator. `inv_diag` is the Jacobi preconditioner; an
/// optional `project` keeps iterates in a subspace (e.g. mean-zero).
template <class T>
KrylovStats conjugate_gradient(const Operator<T>& apply, const std::vector<T>& b, std::vector<T>& x,
                               std::span<const double> inv_diag, double rtol, int max_iter,
                               const std::function<void(std::vector<T>&)>& project = {}) {
  const std::size_t n = b.size();
  KrylovStats st;
  std::vector<T> r(n), z(n), p(n), q(n);
  apply(x, q);
  par::for_each(n, [&](std::size_t i) { r[i] = b[i] - q[i]; });
  if (project) project(r);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), T{});
    st.converged = true;
    return st;
  }
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= rtol * bnorm) {
    st.relative_residual = rnorm / bnorm;
    st.converged = true;
    return st;
  }
  par::for_each(n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
  if (project) project(z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      st.iterations = it;
      break;
    }
    const double alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    if (project) project(r);
    rnorm = std::sqrt(dot(r, r));
    st.iterations = it;
    if (rnorm <= rtol * bnorm) {
      st.converged = true;
      break;
    }
    par::for_each(n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
    if (project) project(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    par::for_each(n, [&](std::size_t i) { p[i] = z[i] + beta * p[i]; });
  }
  st.relative_residual = rnorm / bnorm;
  return st;
}

/// Preconditioned MINRES for symmetric, possibly indefinite or singular
/// (consistent) systems. `precond` applies a symmetric positive definite M^-1.
template <class T>
KrylovStats minres(const Operator<T>& apply, const std::vector<T>& b, std::vector<T>& x,
                   const Operator<T>& precond, double rtol, int max_iter) {
  const std::size_t n = b.size();
  KrylovStats st;
  std::vector<T> r1(n), r2(n), y(n), v(n), w(n, T{}), w1(n, T{}), w2(n, T{}), tmp(n);
  apply(x, tmp);
  par::for_each(n, [&](std::size_t i) { r1[i] = b[i] - tmp[i]; });
  precond(r1, y);
  const double beta1 = std::sqrt(std::max(0.0, dot(r1, y)));
  if (beta1 == 0.0) {
    st.converged = true;
    return st;
  }
  r2 = r1;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double tiny = std::numeric_limits<double>::epsilon();
  for (int itn = 1; itn <= max_iter; ++itn) {
    const double s = 1.0 / beta;
    par::for_each(n, [&](std::size_t i) { v[i] = s * y[i]; });
    apply(v, y);
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    std::swap(r1, r2);
    r2 = y;
    precond(r2, y);
    oldb = beta;
    beta = std::sqrt(std::max(0.0, dot(r2, y)));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    const double denom = 1.0 / gamma;
    std::swap(w1, w2);
    std::swap(w2, w);
    par::for_each(n, [&](std::size_t i) { w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom; });
    axpy(phi, w, x);
    st.iterations = itn;
    st.relative_residual = phibar / beta1;
    if (st.relative_residual <= rtol) {
      st.converged = true;
      break;
    }
    if (beta == 0.0) {
      st.converged = true;
      break;
    }
  }
  return st;
}

template <class T>
KrylovStats minres(const Operator<T>& apply, const std::vector<T>& b, std::vector<T>& x,
                   std::span<const double> inv_diag, double rtol, int max_iter) {
  const Operator<T> jacobi = [&](const std::vector<T>& r, std::vector<T>& z) {
    par::for_each(r.size(), [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
  };
  return minres<T>(apply, b, x, jacobi, rtol, max_iter);
}

}  // namespace gllab::linalg
