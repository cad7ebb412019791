#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sns/besov.hpp"
#include "sns/multipliers.hpp"
#include "sns/ns_bilinear.hpp"

using namespace sns;

TEST_CASE("Holder conjugate and parameter checks") {
  CHECK(holder_conjugate(1.0) == kInf);
  CHECK(holder_conjugate(kInf) == 1.0);
  CHECK(holder_conjugate(4.0) == doctest::Approx(4.0 / 3.0));
  CHECK_THROWS_AS((BesovParams{0.5, 2.0, 0.0, -3, -2}.validate()), ConfigError);
  CHECK_THROWS_AS((BesovParams{2.0, 2.0, 0.0, -1, -2}.validate()), ConfigError);
  CHECK_NOTHROW((BesovParams{kInf, kInf, 0.0, -3, -2}.validate()));
}

TEST_CASE("L2 blocks of psi against Parseval") {
  for (int j : {-3, -1, 0, 1}) {
    const BlockReport r = block_norm(psi_hat(), j, 2.0, 0.0);
    CHECK(r.norm == doctest::Approx(std::sqrt(oracle::block_l2_squared(j))).epsilon(1e-9));
    CHECK(r.refinement_error < 1e-9);
  }
}

TEST_CASE("sup blocks of psi sit at the origin") {
  for (int j : {-1, 0}) {
    const BlockReport r = block_norm(psi_hat(), j, kInf, 0.0);
    CHECK(r.norm == doctest::Approx(oracle::block_sup(j)).epsilon(1e-9));
    CHECK(r.sup_inflation >= 1.0);
  }
}

TEST_CASE("weights and empty blocks") {
  const BlockReport r = block_norm(psi_hat(), -1, 2.0, 0.5);
  CHECK(r.weighted == doctest::Approx(std::exp2(-0.5) * r.norm));
  const BlockReport e = block_norm(psi_hat(), 3, 2.0, 0.0);
  CHECK(e.norm == 0.0);
  CHECK(e.method == "empty");
}

TEST_CASE("modulated packets: two-scale quadrature against closed forms") {
  // Block 20 contains the whole packet, so Delta_20 f = f = psi cos(M x1).
  const double M = std::ldexp(1.0, 20);
  const PacketField f = modulated_potential(M);
  CHECK(occupied_blocks(f) == std::vector<int>{19, 20, 21});
  const double w0 = oracle::psi_l2_squared();
  const BlockReport r2 = block_norm(f, 20, 2.0, 0.0);
  CHECK(r2.method == "two-scale");
  CHECK(r2.norm == doctest::Approx(std::sqrt(0.5 * w0)).epsilon(1e-10));
  CHECK(block_norm(f, 19, 2.0, 0.0).norm == 0.0);
  CHECK(block_norm(f, 21, 2.0, 0.0).norm == 0.0);
  // sup |psi cos| = psi(0).
  CHECK(block_norm(f, 20, kInf, 0.0).norm == doctest::Approx(oracle::psi(0.0)).epsilon(1e-9));
}

TEST_CASE("two-scale and explicit quadrature agree") {
  const PacketField f = modulated_potential(64.0);
  BlockOptions ex;
  ex.quadrature = PacketQuadrature::kExplicit;
  for (double p : {2.0, 3.0, 4.0}) {
    const double a = block_norm(f, 6, p, 0.0).norm;
    const double b = block_norm(f, 6, p, 0.0, ex).norm;
    CHECK(a == doctest::Approx(b).epsilon(p == 3.0 ? 1e-3 : 1e-8));
  }
}

TEST_CASE("two-scale matches the symbol path at moderate modulation") {
  const PacketField f = modulated_potential(24.0);
  // The envelope has unit scale, so the reference grid needs a torus period of ~100.
  BlockOptions fine;
  fine.points = 2304;
  fine.nodes_per_unit = 512.0;
  fine.refine = false;
  for (double p : {1.0, 2.0, 4.0, kInf}) {
    const double a = block_norm(f, 5, p, 0.0).norm;
    const double b = block_norm(f.as_symbol(), 5, p, 0.0, fine).norm;
    CHECK(a == doctest::Approx(b).epsilon(p == 1.0 ? 2e-3 : 1e-6));
  }
}

TEST_CASE("l^q aggregation") {
  std::vector<BlockReport> b(3);
  for (int i = 0; i < 3; ++i) {
    b[i].j = -4 + i;
    b[i].weighted = 1.0 + i;
  }
  CHECK(lq_aggregate(b, 1.0) == doctest::Approx(6.0));
  CHECK(lq_aggregate(b, 2.0) == doctest::Approx(std::sqrt(14.0)));
  CHECK(lq_aggregate(b, kInf) == 3.0);
  CHECK(lq_aggregate(b, 2.0, -4, -3) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("partial Besov norm of psi") {
  const BesovParams prm{2.0, 2.0, 0.0, -6, 1};
  const BesovPartial r = besov_partial(psi_hat(), prm);
  double s = 0.0;
  for (int j = -6; j <= 1; ++j) s += oracle::block_l2_squared(j);
  CHECK(r.value == doctest::Approx(std::sqrt(s)).epsilon(1e-9));
  CHECK(r.blocks.size() == 8);
}
