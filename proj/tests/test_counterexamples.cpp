#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sns/counterexamples.hpp"
#include "sns/multipliers.hpp"

using namespace sns;

TEST_CASE("psi constants against radial quadrature") {
  CHECK(psi_l2_squared() == doctest::Approx(oracle::psi_l2_squared()).epsilon(1e-12));
  CHECK(psi_h1_squared() == doctest::Approx(oracle::psi_h1_squared()).epsilon(1e-12));
}

TEST_CASE("scaling limit against the Hankel oracle") {
  const ScalingLimit l2 = scaling_limit(2.0);
  CHECK(l2.profile_norm == doctest::Approx(oracle::profile_l2()).epsilon(1e-9));
  const ScalingLimit li = scaling_limit(kInf);
  CHECK(li.profile_norm == doctest::Approx(oracle::profile_norm(kInf)).epsilon(1e-7));
}

TEST_CASE("leading symbol is homogeneous of degree -1") {
  const Symbol m = leading_symbol();
  cplx a[2], b[2];
  m({0.3, 0.7}, a);
  m({0.9, 2.1}, b);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(a[c] - 3.0 * b[c]) < 1e-14);
  m({0.0, 0.0}, a);
  CHECK(a[0] == cplx(0.0));
}

TEST_CASE("lower bound curve: components and positivity") {
  const LowerBoundCurve c = lower_bound_curve(2.0, -5, -2);
  REQUIRE(c.blocks.size() == 4);
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    CHECK(c.blocks[i].weighted >= c.second[i].weighted);
    CHECK(c.first[i].weighted > 0.0);
    // p = 2: the two components are orthogonal pieces of the norm.
    CHECK(std::hypot(c.first[i].weighted, c.second[i].weighted) ==
          doctest::Approx(c.blocks[i].weighted).epsilon(1e-12));
  }
  CHECK(c.min_a > 0.5 * c.limit.value);
  CHECK_THROWS_AS(lower_bound_curve(2.0, -5, -1), ConfigError);
}

TEST_CASE("case (i) generator") {
  const PacketField u1 = gen_case_i(1, 2.0, 2.0, 16.0);
  const PacketField u4 = gen_case_i(4, 2.0, 2.0, 16.0);
  CHECK(u1.real());
  const SpectralField s = sample_packets(u4, FrequencyGrid(1.0 / 16.0, 768));
  CHECK(divergence_defect(s) < 1e-12);
  CHECK(u4.packets()[0].weight.real() == doctest::Approx(u1.packets()[0].weight.real() / std::sqrt(2.0)));
  CHECK_THROWS_AS(gen_case_i(1, 2.0, kInf, 16.0), ConfigError);
  CHECK_THROWS_AS(gen_case_i(1, 2.0, 2.0, 9.0), ConfigError);
  // Norm bound C M^{2/p} ||psi||_p: the ratio is stable in M.
  std::vector<double> ratio;
  for (double M : {16.0, 32.0, 64.0})
    ratio.push_back(packet_besov_norm(gen_case_i(1, 2.0, 2.0, M), 2.0, 2.0, 0.0).value /
                    (M * std::sqrt(oracle::psi_l2_squared())));
  CHECK(ratio[2] == doctest::Approx(ratio[0]).epsilon(0.1));
  CHECK(ratio[1] == doctest::Approx(ratio[0]).epsilon(0.1));
}

TEST_CASE("case (ii) generator") {
  CHECK_THROWS_AS(gen_case_ii(9), ConfigError);
  const PacketField u = gen_case_ii(16);
  const std::vector<int> js = occupied_blocks(u);
  CHECK(js == std::vector<int>{3, 4, 5});
  const double a = packet_besov_norm(u, 4.0, kInf, -0.5).value;
  const double b = packet_besov_norm(gen_case_ii(64), 4.0, kInf, -0.5).value;
  CHECK(std::log(b / a) / std::log(4.0) == doctest::Approx(-0.5).epsilon(0.05));
}

TEST_CASE("case (iii) generator") {
  CHECK_THROWS_AS(gen_case_iii(4, 2.0, 2.0), ConfigError);
  CHECK_THROWS_AS(gen_case_iii(4, 1.0, 1.5), ConfigError);
  CHECK_THROWS_AS(gen_case_iii(1, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(gen_case_iii(50, 1.0, 2.0), BudgetError);
  const auto [u, v] = gen_case_iii(3, 1.0, 2.0);
  CHECK(u.packets().size() == 8);
  // One block per term: the norm of block 2j is the norm of term j alone.
  const auto M = case_iii_frequencies(3, 2.0);
  CHECK(M.front() == std::ldexp(1.0, 20));
  const double c = 1.0 / std::sqrt(std::log(3.0));
  for (int i = 0; i < 4; ++i) {
    const int j = 10 + i;
    const PacketField term = modulated_velocity(M[i], c * std::pow(M[i], -2.0) / std::sqrt(j));
    CHECK(block_norm(u, 2 * j, 1.0, 1.0).norm ==
          doctest::Approx(block_norm(term, 2 * j, 1.0, 1.0).norm).epsilon(1e-12));
    CHECK(block_norm(u, 2 * j + 1, 1.0, 1.0).norm == 0.0);
  }
}

TEST_CASE("power-law fit") {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  const PowerFit f = fit_power_law(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK(f.half_width < 1e-10);
  // Noisy data: a finite t interval with 2 degrees of freedom.
  const PowerFit g = fit_power_law(x, {1.0, 0.8, 0.45, 0.37});
  CHECK(g.half_width > 0.0);
  CHECK(std::isinf(fit_power_law({1.0, 2.0}, {1.0, 2.0}).half_width));
}
