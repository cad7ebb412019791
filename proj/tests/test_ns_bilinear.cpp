#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sns/multipliers.hpp"
#include "sns/ns_bilinear.hpp"

using namespace sns;

namespace {

// B(u, v)(xi) by direct summation: (2 pi)^{-2} h^2 sum_eta uhat(eta) (x) vhat(xi - eta),
// then (-Delta)^{-1} P i xi . written out by hand.
std::array<cplx, 2> direct_B(const SpectralField& u, const SpectralField& v, int a, int b) {
  const FrequencyGrid& g = u.grid();
  const int K = g.points(), c = K / 2;
  cplx T[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (int i1 = 0; i1 < K; ++i1)
    for (int i2 = 0; i2 < K; ++i2) {
      const int j1 = a + c - (i1 - c), j2 = b + c - (i2 - c);
      if (j1 < 0 || j1 >= K || j2 < 0 || j2 >= K) continue;
      for (int m = 0; m < 2; ++m)
        for (int k = 0; k < 2; ++k) T[m][k] += u.at(m, i1, i2) * v.at(k, j1, j2);
    }
  const double s = std::pow(g.spacing() / kTwoPi, 2);
  const double x1 = a * g.spacing(), x2 = b * g.spacing(), r2 = x1 * x1 + x2 * x2;
  const cplx I(0.0, 1.0);
  const cplx d0 = I * (x1 * T[0][0] + x2 * T[1][0]) * s;
  const cplx d1 = I * (x1 * T[0][1] + x2 * T[1][1]) * s;
  const cplx dot = (x1 * d0 + x2 * d1) / r2;
  return {(d0 - x1 * dot) / r2, (d1 - x2 * dot) / r2};
}

}  // namespace

TEST_CASE("modulated fields are real and solenoidal") {
  const PacketField u = modulated_velocity(16.0, 0.5);
  CHECK(u.real());
  const SpectralField s = sample_packets(u, FrequencyGrid(1.0 / 16.0, 768));
  CHECK(divergence_defect(s) < 1e-15);
  CHECK(s.support_radius() <= 18.0 + 1e-12);
  CHECK_THROWS_AS(modulated_sum({10.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("bilinear_B against term-by-term summation") {
  const FrequencyGrid g(1.0 / 4.0, 40);
  const PacketField pk = modulated_velocity(1.5);
  const SpectralField u = sample_packets(pk, g);
  const SpectralField B = bilinear_B(u, u);
  const int off = (B.grid().points() - 40) / 2;
  for (auto [a, b] : {std::pair{1, 0}, std::pair{2, -3}, std::pair{-5, 4}, std::pair{12, 1}}) {
    const auto d = direct_B(u, u, a, b);
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(B.at(c, a + 20 + off, b + 20 + off) - d[c]) < 1e-14);
  }
}

TEST_CASE("bilinear_B rejects non-solenoidal input") {
  const FrequencyGrid g(1.0 / 8.0, 64);
  const SpectralField w = gradient(sample_symbol(g, psi_hat(), true));
  CHECK_THROWS_AS(bilinear_B(w, w), ConfigError);
}

TEST_CASE("low part agrees with the full product") {
  const PacketField pk = modulated_velocity(16.0);
  const FrequencyGrid g(1.0 / 32.0, 1280);
  const SpectralField B = bilinear_B(sample_packets(pk, g), sample_packets(pk, g));
  const LowBilinear low = bilinear_B_low(pk, pk, 0);
  const SpectralField Bl = low.on_grid();
  const FrequencyGrid& gb = B.grid();
  const FrequencyGrid& gl = Bl.grid();
  double num = 0.0, den = 0.0;
  for (int k1 = 0; k1 < gl.points(); ++k1)
    for (int k2 = 0; k2 < gl.points(); ++k2) {
      if (norm(gl.node(k1, k2)) > low.radius()) continue;
      const int b1 = k1 - gl.points() / 2 + gb.points() / 2;
      const int b2 = k2 - gl.points() / 2 + gb.points() / 2;
      for (int c = 0; c < 2; ++c) {
        num += std::norm(B.at(c, b1, b2) - Bl.at(c, k1, k2));
        den += std::norm(B.at(c, b1, b2));
      }
    }
  CHECK(std::sqrt(num / den) < 1e-12);
  CHECK_THROWS_AS(bilinear_B_low(pk, pk, 3), ConfigError);
}

TEST_CASE("low part of a modulated square is the leading term") {
  const double M = 16.0;
  const PacketField u = modulated_velocity(M);
  const LowBilinear low = bilinear_B_low(u, u, -2);
  const LeadingPair lp = leading_pair(M);
  for (int j : {-6, -3}) {
    const BlockReport a = block_norm(low.sampler(), j, 2.0, 0.0);
    const BlockReport b = block_norm(lp.leading_sampler(0.5 * M * M), j, 2.0, 0.0);
    CHECK(a.norm == doctest::Approx(b.norm).epsilon(1e-12));
    const BlockReport r = block_norm(lp.remainder_sampler(0.5), j, 2.0, 0.0);
    CHECK(r.norm < 1e-12 * a.norm);
  }
  CHECK_THROWS_AS(low.sampler()(block_grid(1), block_radius(1)), ConfigError);
}

TEST_CASE("modulated identity") {
  IdentityOptions o;
  o.jmin = -3;
  o.jmax = 0;
  const IdentityReport r = modulated_identity_check(16.0, o);
  CHECK(r.blocks.size() == 4);
  CHECK(r.max_deviation <= 1e-8);
  CHECK(r.max_deviation <= r.max_deviation_coarse);
  CHECK_THROWS_AS(modulated_identity_check(8.0, o), ConfigError);
}

TEST_CASE("cross terms") {
  CrossTermOptions o;
  o.kmin = -2;
  o.kmax = 0;
  const CrossTermReport r = cross_term_check({160.0, 176.0}, {1.0, 0.5}, {1.0, 2.0}, o);
  CHECK(r.cross_failures == 0);
  CHECK(r.max_deviation <= 1e-8);
  CHECK(r.min_gap == 16.0);
  CHECK_THROWS_AS(cross_term_check({160.0, 165.0}, {1.0, 1.0}, {1.0, 1.0}, o), ConfigError);
  CHECK_THROWS_AS(cross_term_check({9.0, 30.0}, {1.0, 1.0}, {1.0, 1.0}, o), ConfigError);
}
