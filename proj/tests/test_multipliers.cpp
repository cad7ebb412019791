#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sns/multipliers.hpp"

using namespace sns;

namespace {

SpectralField psi_on(double h, int K) { return sample_symbol(FrequencyGrid(h, K), psi_hat(), true); }

double l2(const SpectralField& f) {
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (const cplx& v : f.component(c)) s += std::norm(v);
  return std::sqrt(s);
}

double rel(const SpectralField& a, const SpectralField& b) {
  return l2(a.plus(b.scaled(-1.0))) / l2(b);
}

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_step(0.3) == 1.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(2.0) == 0.0);
  CHECK(smooth_step(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 1.0;
  for (double r = 1.0; r <= 2.0; r += 1.0 / 64.0) {
    CHECK(smooth_step(r) <= prev);
    CHECK(smooth_step(r) == doctest::Approx(oracle::theta(r)).epsilon(1e-14));
    prev = smooth_step(r);
  }
}

TEST_CASE("blocks sum to one away from the origin") {
  double worst = 0.0;
  for (double r = std::ldexp(1.0, -6); r <= 64.0; r *= 1.0137) {
    double s = 0.0;
    for (int j = -8; j <= 8; ++j) s += lp_block_value(j, r);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst <= 1e-12);
  CHECK(lp_block_value(0, 0.4) == 0.0);
  CHECK(lp_block_value(0, 2.1) == 0.0);
  CHECK(lp_block_value(0, 1.0) == 1.0);
}

TEST_CASE("derivatives against finite differences of the Hankel profile") {
  const SpectralField psi = psi_on(1.0 / 16.0, 128);
  const PhysicalField g = to_physical(gradient(psi));
  const PhysicalField gp = to_physical(grad_perp(psi));
  const FrequencyGrid& G = psi.grid();
  for (auto [m1, m2] : {std::pair{70, 64}, std::pair{66, 61}, std::pair{60, 75}}) {
    const double x1 = G.position(m1), x2 = G.position(m2);
    const double r = std::hypot(x1, x2);
    const double d = 1e-4;
    const double dr = (oracle::psi(r + d) - oracle::psi(r - d)) / (2.0 * d);
    CHECK(dr == doctest::Approx(oracle::psi_prime(r)).epsilon(1e-7));
    CHECK(g.at(0, m1, m2).real() == doctest::Approx(dr * x1 / r).epsilon(1e-7));
    CHECK(g.at(1, m1, m2).real() == doctest::Approx(dr * x2 / r).epsilon(1e-7));
    CHECK(gp.at(0, m1, m2).real() == doctest::Approx(-dr * x2 / r).epsilon(1e-7));
    CHECK(gp.at(1, m1, m2).real() == doctest::Approx(dr * x1 / r).epsilon(1e-7));
  }
}

TEST_CASE("projector algebra") {
  const SpectralField psi = psi_on(1.0 / 64.0, 512);
  const SpectralField u = grad_perp(psi);
  const SpectralField w = gradient(psi);
  const SpectralField mix = u.plus(w.scaled(0.7));
  const SpectralField pm = helmholtz_project(mix);
  CHECK(rel(helmholtz_project(pm), pm) < 1e-14);
  CHECK(rel(pm, u) < 1e-14);
  CHECK(l2(helmholtz_project(w)) / l2(w) < 1e-15);
  CHECK(l2(divergence(u)) / l2(apply_multiplier(psi, laplacian_symbol())) < 1e-15);
}

TEST_CASE("inverse Laplacian") {
  const SpectralField psi = psi_on(1.0 / 8.0, 64);
  const SpectralField lap = apply_multiplier(psi, laplacian_symbol());
  CHECK(rel(inv_laplacian(lap), psi) > 0.0);  // psi has mass at 0, lap does not
  const SpectralField back = apply_multiplier(inv_laplacian(lap), laplacian_symbol());
  CHECK(rel(back, lap) < 1e-14);
  CHECK_THROWS_AS(inv_laplacian(psi), SingularityError);
}

TEST_CASE("tensor divergence of an outer product") {
  // div(u (x) v) with v constant in the second slot reduces to (div u) v.
  const SpectralField psi = psi_on(1.0 / 64.0, 512);
  const SpectralField u = grad_perp(psi);
  const SpectralField T = outer_product(u, u);
  const SpectralField d = tensor_divergence(T);
  CHECK(d.components() == 2);
  // For radial psi, (u . grad) u is a gradient, so the projection vanishes.
  CHECK(l2(helmholtz_project(d)) / l2(d) < 1e-13);
}

TEST_CASE("multiplier shape checks") {
  const SpectralField psi = psi_on(1.0 / 8.0, 64);
  CHECK_THROWS_AS(apply_multiplier(psi, divergence_symbol()), ConfigError);
  CHECK_THROWS_AS(partial_symbol(2), ConfigError);
  const SpectralField b = lp_block(psi, 0);
  CHECK(b.support_radius() <= 2.0);
}
