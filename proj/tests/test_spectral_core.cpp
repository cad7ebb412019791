#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sns/multipliers.hpp"
#include "sns/ns_bilinear.hpp"
#include "sns/spectral_core.hpp"

using namespace sns;

namespace {

SpectralField psi_on(double h, int K) { return sample_symbol(FrequencyGrid(h, K), psi_hat(), true); }

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (int c = 0; c < a.components(); ++c)
    for (std::size_t i = 0; i < a.grid().size(); ++i)
      m = std::max(m, std::abs(a.component(c)[i] - b.component(c)[i]));
  return m;
}

}  // namespace

TEST_CASE("grid geometry") {
  const FrequencyGrid g(0.25, 16);
  CHECK(g.node(8) == 0.0);
  CHECK(g.node(0) == doctest::Approx(-2.0));
  CHECK(g.period() == doctest::Approx(8.0 * kPi));
  CHECK(g.physical_spacing() == doctest::Approx(8.0 * kPi / 16.0));
  CHECK(g.widened(2).points() == 32);
  CHECK_THROWS_AS(FrequencyGrid(0.25, 15), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid(0.25, 6), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid(-1.0, 16), ConfigError);
}

TEST_CASE("psi on the torus matches the Hankel transform") {
  // psi decays slowly in x, so the period has to be a few hundred.
  const SpectralField f = psi_on(1.0 / 64.0, 512);
  const PhysicalField x = to_physical(f);
  const FrequencyGrid& g = f.grid();
  double worst = 0.0;
  for (int m : {256, 257, 259, 264, 280}) {
    const double r = std::abs(g.position(m));
    worst = std::max(worst, std::abs(x.at(0, m, 256).real() - oracle::psi(r)));
  }
  CHECK(worst < 1e-12);
  CHECK(x.at(0, 256, 256).real() == doctest::Approx(oracle::psi(0.0)).epsilon(1e-12));
}

TEST_CASE("round trip and Parseval") {
  const SpectralField f = psi_on(1.0 / 64.0, 512);
  const SpectralField back = to_spectral(to_physical(f));
  CHECK(max_diff(f, back) < 1e-13);
  const double l2 = lp_norm(to_physical(f), 2.0);
  CHECK(l2 * l2 == doctest::Approx(oracle::psi_l2_squared()).epsilon(1e-12));
}

TEST_CASE("aliasing guard") {
  // Support radius 2 on a grid of half extent 2: no margin left.
  CHECK_THROWS_AS(to_physical(psi_on(0.25, 16)), AliasingError);
  CHECK_THROWS_AS(crop(psi_on(1.0 / 8.0, 64), 16), AliasingError);
}

TEST_CASE("zero_pad and crop are inverse") {
  const SpectralField f = psi_on(1.0 / 8.0, 64);
  const SpectralField p = zero_pad(f, 2);
  CHECK(p.grid().points() == 128);
  CHECK(max_diff(crop(p, 64), f) == 0.0);
}

TEST_CASE("spectral_product equals the discrete convolution") {
  // Direct (h / 2 pi)^2 sum_eta fhat(eta) ghat(xi - eta) at a few nodes.
  const double h = 1.0 / 4.0;
  const SpectralField f = psi_on(h, 32);
  const PacketField pk = modulated_potential(1.5);
  const SpectralField g = sample_packets(pk, FrequencyGrid(h, 32));
  const SpectralField fg = spectral_product(f, g);
  const FrequencyGrid& G = fg.grid();
  const int off = (G.points() - 32) / 2;
  for (auto [a, b] : {std::pair{0, 0}, std::pair{3, -2}, std::pair{-6, 5}}) {
    cplx direct = 0.0;
    for (int i1 = 0; i1 < 32; ++i1)
      for (int i2 = 0; i2 < 32; ++i2) {
        const int j1 = a + 16 - (i1 - 16), j2 = b + 16 - (i2 - 16);
        if (j1 < 0 || j1 >= 32 || j2 < 0 || j2 >= 32) continue;
        direct += f.at(0, i1, i2) * g.at(0, j1, j2);
      }
    direct *= std::pow(h / kTwoPi, 2);
    const cplx v = fg.at(0, a + 16 + off, b + 16 + off);
    CHECK(std::abs(v - direct) < 1e-15);
  }
}

TEST_CASE("windowed_convolution matches spectral_product") {
  const FrequencyGrid g(1.0 / 8.0, 64);
  const SpectralField f = sample_symbol(g, psi_hat(), true);
  const SpectralField fg = spectral_product(f, f);
  const SpectralField w = windowed_convolution(f, psi_hat(), Window{fg.grid(), 3.0});
  double num = 0.0, den = 0.0;
  for (int k1 = 0; k1 < fg.grid().points(); ++k1)
    for (int k2 = 0; k2 < fg.grid().points(); ++k2) {
      if (norm(fg.grid().node(k1, k2)) > 3.0) continue;
      num = std::max(num, std::abs(w.at(0, k1, k2) - fg.at(0, k1, k2)));
      den = std::max(den, std::abs(fg.at(0, k1, k2)));
    }
  CHECK(num / den < 1e-12);
}

TEST_CASE("packet fields evaluate as the sum of modulated envelopes") {
  const PacketField u = modulated_potential(20.0, 3.0);
  CHECK(u.real());
  CHECK(u.support_radius() == doctest::Approx(22.0));
  cplx v[1];
  u.evaluate({20.5, 0.0}, v);
  CHECK(v[0].real() == doctest::Approx(1.5));
  u.evaluate({-21.2, 0.3}, v);
  CHECK(v[0].real() == doctest::Approx(1.5 * oracle::theta(std::hypot(1.2, 0.3))).epsilon(1e-14));
  u.evaluate({0.0, 0.0}, v);
  CHECK(v[0] == cplx(0.0));
}

TEST_CASE("resample reproduces the closed form") {
  const SpectralField f = psi_on(1.0 / 128.0, 768);
  const FrequencyGrid target(0.07, 64);
  const SpectralField r = resample(f, target, 2.2);
  double worst = 0.0;
  for (int k1 = 0; k1 < 64; ++k1)
    for (int k2 = 0; k2 < 64; ++k2) {
      const double rr = norm(target.node(k1, k2));
      if (rr > 2.2) continue;
      worst = std::max(worst, std::abs(r.at(0, k1, k2) - oracle::theta(rr)));
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("sample_on_disk rejects singular values") {
  const Symbol bad(1, 1, [](Vec2 xi, std::span<cplx> out) { out[0] = 1.0 / norm(xi); });
  CHECK_THROWS_AS(sample_on_disk(bad, FrequencyGrid(0.1, 16), 0.5), SingularityError);
}
