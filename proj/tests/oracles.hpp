#pragma once

// Reference values computed without the FFT machinery: one-dimensional
// radial and Hankel quadratures of the cutoff, written from the definitions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// h(2 - r) / (h(2 - r) + h(r - 1)) with h(t) = exp(-1/t).
inline double theta(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - r));
  const double b = std::exp(-1.0 / (r - 1.0));
  return a / (a + b);
}

inline double phi0(double r) { return theta(r) - theta(2.0 * r); }

// Shallow adaptivity: near-zero integrals (Bessel cancellation) would
// otherwise chase an unreachable relative tolerance.
template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 3, 1e-14, &err);
}

// Fixed pieces keep the Bessel oscillations resolved.
template <class F>
double integrate_pieces(F f, double a, double b, double piece = 0.25) {
  double s = 0.0;
  for (double x = a; x < b; x += piece) s += integrate(f, x, std::min(b, x + piece));
  return s;
}

// (2 pi)^{-2} int theta(|xi|)^2 dxi = ||psi||_2^2.
inline double psi_l2_squared() {
  return integrate_pieces([](double r) { return r * theta(r) * theta(r); }, 0.0, 2.0) / (2.0 * pi);
}

// (2 pi)^{-2} int |xi|^2 theta^2 dxi.
inline double psi_h1_squared() {
  return integrate_pieces([](double r) { return r * r * r * theta(r) * theta(r); }, 0.0, 2.0) /
         (2.0 * pi);
}

// psi(x) for |x| = r: (2 pi)^{-1} int_0^2 rho theta(rho) J_0(rho r) d rho.
inline double psi(double r) {
  return integrate_pieces(
             [r](double rho) { return rho * theta(rho) * boost::math::cyl_bessel_j(0.0, rho * r); }, 0.0,
             2.0) /
         (2.0 * pi);
}

// d psi / dr: -(2 pi)^{-1} int rho^2 theta J_1(rho r).
inline double psi_prime(double r) {
  return -integrate_pieces(
              [r](double rho) { return rho * rho * theta(rho) * boost::math::cyl_bessel_j(1.0, rho * r); },
              0.0, 2.0) /
         (2.0 * pi);
}

// ||F^{-1}[phi_hat_j theta]||_2^2 by Parseval.
inline double block_l2_squared(int j) {
  const double lo = std::ldexp(1.0, j - 1), hi = std::min(2.0, std::ldexp(1.0, j + 1));
  if (lo >= hi) return 0.0;
  return integrate_pieces(
             [j](double r) {
               const double b = theta(std::ldexp(r, -j)) - theta(std::ldexp(r, 1 - j));
               return r * b * b * theta(r) * theta(r);
             },
             lo, hi, (hi - lo) / 8.0) /
         (2.0 * pi);
}

// (Delta_j psi)(0) = sup |Delta_j psi| (the transform is non-negative).
inline double block_sup(int j) {
  const double lo = std::ldexp(1.0, j - 1), hi = std::min(2.0, std::ldexp(1.0, j + 1));
  if (lo >= hi) return 0.0;
  return integrate_pieces(
             [j](double r) {
               return r * (theta(std::ldexp(r, -j)) - theta(std::ldexp(r, 1 - j))) * theta(r);
             },
             lo, hi, (hi - lo) / 8.0) /
         (2.0 * pi);
}

// H_n(rho) = int phi_hat_0(r) J_n(r rho) dr over [1/2, 2], fixed 61-point
// rule on pieces of width 1/32.
inline double hankel(int n, double rho) {
  double s = 0.0;
  for (int k = 0; k < 48; ++k) {
    const double a = 0.5 + k / 32.0;
    s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [n, rho](double r) {
          return phi0(r) * boost::math::cyl_bessel_j(static_cast<double>(n), r * rho);
        },
        a, a + 1.0 / 32.0, 0, 0);
  }
  return s;
}

// The profile F^{-1}[phi_hat_0 M_vec] has modulus
//   (1 / 8 pi) sqrt(H_1^2 + H_3^2 + 2 H_1 H_3 cos(4 theta))
// at polar point (rho, theta), from the angular expansion of M_vec.
inline double profile_modulus(double h1, double h3, double ang) {
  const double v = h1 * h1 + h3 * h3 + 2.0 * h1 * h3 * std::cos(4.0 * ang);
  return std::sqrt(std::max(v, 0.0)) / (8.0 * pi);
}

// ||F^{-1}[phi_hat_0 M_vec]||_{L^p}; p = infinity gives the sup.
inline double profile_norm(double p, double rmax = 300.0) {
  if (std::isinf(p)) {
    double best = 0.0, arg = 0.0;
    for (double r = 0.0; r <= 20.0; r += 0.01) {
      const double v = std::abs(hankel(1, r)) + std::abs(hankel(3, r));
      if (v > best) best = v, arg = r;
    }
    // Golden-section polish around the lattice maximum.
    double a = std::max(0.0, arg - 0.01), b = arg + 0.01;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [](double r) { return std::abs(hankel(1, r)) + std::abs(hankel(3, r)); };
    for (int it = 0; it < 60; ++it) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (f(c) > f(d)) b = d;
      else a = c;
    }
    return std::max(best, f(0.5 * (a + b))) / (8.0 * pi);
  }
  const int nang = 512;
  auto radial = [p](double rho) {
    const double h1 = hankel(1, rho), h3 = hankel(3, rho);
    double s = 0.0;
    for (int k = 0; k < nang; ++k)
      s += std::pow(profile_modulus(h1, h3, 2.0 * pi * k / nang), p);
    return rho * s * (2.0 * pi / nang);
  };
  // The profile oscillates with period about pi in rho and decays slowly
  // (the L^1 tail beyond 200 is about 4e-6 relative), so steps widen outward.
  double acc = 0.0;
  for (double x = 0.0; x < rmax;) {
    const double w = x < 40.0 ? 1.0 : x < 120.0 ? 2.0 : 4.0;
    const double b = std::min(rmax, x + w);
    acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(radial, x, b, 0, 0);
    x = b;
  }
  return std::pow(acc, 1.0 / p);
}

// L^2 norm in closed form: (2 pi)^{-2} (pi / 4) int phi_hat_0(r)^2 / r dr.
inline double profile_l2() {
  return std::sqrt(integrate_pieces([](double r) { return phi0(r) * phi0(r) / r; }, 0.5, 2.0,
                                    0.125) /
                   (16.0 * pi));
}

inline double a_inf(double p) { return psi_l2_squared() * profile_norm(p); }

}  // namespace oracle
