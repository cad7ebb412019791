#include "sns/ns_bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "sns/multipliers.hpp"

namespace sns {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// (0, i xi_2): the second-component derivative of a scalar.
Symbol second_derivative_column() {
  return Symbol(2, 1, [](Vec2 xi, std::span<cplx> out) {
    out[0] = 0.0;
    out[1] = cplx(0.0, xi.x2);
  });
}

// Window grid for block j: spacing 2^j / npu and enough nodes to hold the
// disc of radius 2^{j+1} inside the band margin.
FrequencyGrid window_grid(int j, double npu) {
  int K = static_cast<int>(std::ceil(4.0 * npu / (1.0 - kBandMargin)));
  K += K & 1;
  return FrequencyGrid(std::ldexp(1.0, j) / npu, std::max(K, 8));
}

int points_for_spacing(double spacing) {
  // Keep the frequency extent at 4 (psi has support radius 2).
  int K = static_cast<int>(std::lround(8.0 / spacing));
  return K + (K & 1);
}

double relative_l2(const SpectralField& a, const SpectralField& b) {
  const double den = window_l2(b);
  const double num = window_l2(a.plus(b.scaled(-1.0)));
  return den > 0.0 ? num / den : num;
}

}  // namespace

PacketField modulated_potential(double M, double amplitude) {
  if (!(M >= 0.0) || !std::isfinite(M)) throw ConfigError("modulation frequency must be finite and >= 0");
  const cplx w(0.5 * amplitude, 0.0);
  return PacketField(smooth_step, 2.0, constant_symbol(1.0), {{{M, 0.0}, w}, {{-M, 0.0}, w}});
}

PacketField modulated_velocity(double M, double amplitude) {
  return modulated_sum({M}, {amplitude});
}

PacketField modulated_sum(const std::vector<double>& M, const std::vector<double>& amplitudes) {
  if (M.size() != amplitudes.size() || M.empty())
    throw ConfigError("frequencies and amplitudes must be non-empty lists of equal length");
  std::vector<PacketField::Packet> packets;
  for (std::size_t j = 0; j < M.size(); ++j) {
    if (!(M[j] >= 0.0) || !std::isfinite(M[j]))
      throw ConfigError("modulation frequency must be finite and >= 0");
    const cplx w(0.5 * amplitudes[j], 0.0);
    packets.push_back({{M[j], 0.0}, w});
    packets.push_back({{-M[j], 0.0}, w});
  }
  return PacketField(smooth_step, 2.0, grad_perp_symbol(), std::move(packets));
}

SpectralField sample_packets(const PacketField& f, const FrequencyGrid& grid) {
  return sample_symbol(grid, f.as_symbol(), f.real());
}

double divergence_defect(const SpectralField& u) {
  if (u.rank() != Rank::kVector) throw ConfigError("divergence_defect expects a vector field");
  const FrequencyGrid& g = u.grid();
  double num = 0.0, rmax = 0.0;
  for (int k1 = 0; k1 < g.points(); ++k1)
    for (int k2 = 0; k2 < g.points(); ++k2) {
      const std::size_t i = g.index(k1, k2);
      if (u.modulus(i) == 0.0) continue;
      const Vec2 xi = g.node(k1, k2);
      rmax = std::max(rmax, norm(xi));
      num = std::max(num, std::abs(xi.x1 * u.component(0)[i] + xi.x2 * u.component(1)[i]));
    }
  const double den = rmax * u.max_modulus();
  return den > 0.0 ? num / den : 0.0;
}

SpectralField bilinear_from_tensor(const SpectralField& T) {
  return inv_laplacian(helmholtz_project(tensor_divergence(T)));
}

SpectralField bilinear_B(const SpectralField& u, const SpectralField& v) {
  for (const SpectralField* f : {&u, &v}) {
    const double d = divergence_defect(*f);
    if (d > kSolenoidalTol) throw ConfigError(fmt("input is not divergence free (defect %.3g)", d));
  }
  return bilinear_from_tensor(outer_product(u, v));
}

// ---------------------------------------------------------------- low part

LowBilinear::LowBilinear(SpectralField tensor, double radius, int jmax)
    : tensor_(std::move(tensor)), radius_(radius), jmax_(jmax) {}

SpectralField LowBilinear::on_grid() const { return bilinear_from_tensor(tensor_); }

BlockSampler LowBilinear::sampler(double scale) const {
  auto self = std::make_shared<const LowBilinear>(*this);
  return [self, scale](const FrequencyGrid& g, double r) {
    if (r > self->radius_ * (1.0 + 1e-12))
      throw ConfigError(fmt("requested radius %.6g exceeds the low-frequency window %.6g", r,
                            self->radius_));
    // Resample T, then differentiate: div T ~ |xi| near 0, and resampling it
    // directly would leave absolute roundoff far above the small-block values.
    SpectralField b = bilinear_from_tensor(resample(self->tensor_, g, r));
    return scale == 1.0 ? b : b.scaled(scale);
  };
}

SpectralField LowBilinear::block(int j, int points, double nodes_per_unit) const {
  const FrequencyGrid g = block_grid(j, points, nodes_per_unit);
  return lp_block(sampler()(g, block_radius(j)), j);
}

LowBilinear bilinear_B_low(const PacketField& u, const PacketField& v, int jmax,
                           const LowOptions& opts) {
  if (jmax > 2) throw ConfigError("bilinear_B_low needs jmax <= 2");
  if (u.components() != 2 || v.components() != 2)
    throw ConfigError("bilinear_B_low expects vector packet fields");
  const double window = block_radius(jmax);
  const FrequencyGrid ge(opts.envelope_spacing, opts.envelope_points);
  const double h = ge.spacing();
  const FrequencyGrid gp = ge.widened(2);
  const double reach = u.envelope_radius() + v.envelope_radius();

  auto local = [&ge](const PacketField& f, std::size_t p) {
    SpectralField out(ge, f.rank(), false);
    std::vector<cplx> buf(static_cast<std::size_t>(f.components()));
    for (int k1 = 0; k1 < ge.points(); ++k1)
      for (int k2 = 0; k2 < ge.points(); ++k2) {
        f.evaluate_local(p, ge.node(k1, k2), buf);
        for (int c = 0; c < f.components(); ++c) out.at(c, k1, k2) = buf[c];
      }
    return out;
  };

  SpectralField T(gp, Rank::kTensor, false);
  for (std::size_t p = 0; p < u.packets().size(); ++p) {
    const Vec2 cp = u.packets()[p].center;
    SpectralField up(ge, Rank::kVector, false);
    bool have_up = false;
    for (std::size_t q = 0; q < v.packets().size(); ++q) {
      const Vec2 cq = v.packets()[q].center;
      const Vec2 s{cp.x1 + cq.x1, cp.x2 + cq.x2};
      if (norm(s) - reach >= window) continue;
      const double n1 = s.x1 / h, n2 = s.x2 / h;
      if (n1 != std::round(n1) || n2 != std::round(n2))
        throw ConfigError(fmt("pair frequency (%g, %g) is off the envelope lattice", s.x1, s.x2));
      if (norm(s) + reach > gp.half_extent() * (1.0 - kBandMargin))
        throw ConfigError(fmt("pair frequency (%g, %g) leaves the product grid", s.x1, s.x2));
      if (!have_up) {
        up = local(u, p);
        have_up = true;
      }
      const SpectralField prod = outer_product(up, local(v, q));
      const int d1 = static_cast<int>(n1), d2 = static_cast<int>(n2);
      const int K = gp.points();
      for (int c = 0; c < 4; ++c)
        for (int k1 = std::max(0, d1); k1 < std::min(K, K + d1); ++k1)
          for (int k2 = std::max(0, d2); k2 < std::min(K, K + d2); ++k2)
            T.at(c, k1, k2) += prod.at(c, k1 - d1, k2 - d2);
    }
  }
  T.set_real(u.real() && v.real());
  return LowBilinear(std::move(T), window, jmax);
}

// ---------------------------------------------------------------- leading pair

SpectralField LeadingPair::leading() const {
  return apply_multiplier(W, second_derivative_column()).scaled(0.5 * M * M);
}

SpectralField LeadingPair::remainder() const { return tensor_divergence(T).scaled(0.5); }

SpectralField LeadingPair::leading_on(const FrequencyGrid& grid, double radius) const {
  return apply_multiplier(resample(W, grid, radius), second_derivative_column());
}

SpectralField LeadingPair::remainder_on(const FrequencyGrid& grid, double radius) const {
  return tensor_divergence(resample(T, grid, radius));
}

BlockSampler LeadingPair::leading_sampler(double scale) const {
  auto self = std::make_shared<const LeadingPair>(*this);
  return [self, scale](const FrequencyGrid& g, double r) {
    return inv_laplacian(helmholtz_project(self->leading_on(g, r))).scaled(scale);
  };
}

BlockSampler LeadingPair::remainder_sampler(double scale) const {
  auto self = std::make_shared<const LeadingPair>(*this);
  return [self, scale](const FrequencyGrid& g, double r) {
    return inv_laplacian(helmholtz_project(self->remainder_on(g, r))).scaled(scale);
  };
}

LeadingPair leading_pair(double M, double spacing, int points) {
  const FrequencyGrid g(spacing, points);
  const SpectralField psi = sample_symbol(g, psi_hat(), true);
  const SpectralField gp = grad_perp(psi);
  return LeadingPair{M, spectral_product(psi, psi), outer_product(gp, gp)};
}

// ---------------------------------------------------------------- identities

double window_l2(const SpectralField& f) {
  double s = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (const cplx& v : f.component(c)) s += std::norm(v);
  return f.grid().spacing() * std::sqrt(s);
}

IdentityReport modulated_identity_check(double M, const IdentityOptions& opts) {
  if (!(M >= kMinModulation))
    throw ConfigError(fmt("the decomposition needs M >= 10 (got %g)", M));
  if (opts.jmin > opts.jmax || opts.jmax > 0) throw ConfigError("block range must satisfy jmin <= jmax <= 0");
  const PacketField u = modulated_velocity(M);
  IdentityReport rep;
  rep.M = M;
  for (int j = opts.jmin; j <= opts.jmax; ++j) rep.blocks.push_back({j, 0.0, 0.0, 0.0});
  for (int level = 0; level < 2; ++level) {
    const double h = opts.coarse_spacing / (1 << level);
    LeadingPair lp = leading_pair(M, h, points_for_spacing(h));
    ConvolutionOptions copts;
    copts.envelope_spacing = h;
    for (auto& b : rep.blocks) {
      const FrequencyGrid wg = window_grid(b.j, opts.window_nodes_per_unit);
      const double r = std::ldexp(1.0, b.j + 1);
      const SpectralField lhs =
          lp_block(tensor_divergence(windowed_convolution(u, u, Window{wg, r}, copts)), b.j);
      const SpectralField rhs = lp_block(
          lp.leading_on(wg, r).scaled(0.5 * M * M).plus(lp.remainder_on(wg, r).scaled(0.5)), b.j);
      const double dev = relative_l2(lhs, rhs);
      if (level == 0) {
        b.deviation_coarse = dev;
      } else {
        b.deviation_refined = dev;
        b.rhs_norm = window_l2(rhs);
      }
    }
    if (level == 1) rep.pair = std::move(lp);
  }
  for (const auto& b : rep.blocks) {
    rep.max_deviation = std::max(rep.max_deviation, b.deviation_refined);
    rep.max_deviation_coarse = std::max(rep.max_deviation_coarse, b.deviation_coarse);
  }
  return rep;
}

CrossTermReport cross_term_check(const std::vector<double>& M, const std::vector<double>& a,
                                 const std::vector<double>& b, const CrossTermOptions& opts) {
  const std::size_t n = M.size();
  if (n == 0 || a.size() != n || b.size() != n)
    throw ConfigError("frequencies and coefficients must be non-empty lists of equal length");
  if (opts.kmin > opts.kmax || opts.kmax > 0) throw ConfigError("block range must satisfy kmin <= kmax <= 0");
  CrossTermReport rep;
  rep.min_gap = kInf;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(M[j] >= kMinModulation)) throw ConfigError(fmt("frequency %g is below 10", M[j]));
    for (std::size_t l = j + 1; l < n; ++l) rep.min_gap = std::min(rep.min_gap, std::abs(M[j] - M[l]));
  }
  if (rep.min_gap < kMinFrequencyGap)
    throw ConfigError(fmt("frequency gap %g is below the required 7", rep.min_gap));

  const double h = opts.envelope_spacing;
  const LeadingPair lp = leading_pair(1.0, h, points_for_spacing(h));
  std::vector<PacketField> us, vs;
  for (std::size_t j = 0; j < n; ++j) {
    us.push_back(modulated_velocity(M[j], a[j]));
    vs.push_back(modulated_velocity(M[j], b[j]));
  }
  const PacketField u = modulated_sum(M, a);
  const PacketField v = modulated_sum(M, b);
  ConvolutionOptions screened;
  screened.envelope_spacing = h;
  ConvolutionOptions full = screened;
  full.screen_pairs = false;

  double lead = 0.0, rem = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    lead += 0.5 * M[j] * M[j] * a[j] * b[j];
    rem += 0.5 * a[j] * b[j];
  }

  for (int k = opts.kmin; k <= opts.kmax; ++k) {
    const FrequencyGrid wg = window_grid(k, opts.window_nodes_per_unit);
    const double r = std::ldexp(1.0, k + 1);
    const Window w{wg, r};
    auto block = [&](const SpectralField& t) { return lp_block(tensor_divergence(t), k); };
    SpectralField diag(wg, Rank::kTensor, true), cross(wg, Rank::kTensor, true);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) {
        if (j == l)
          diag = diag.plus(windowed_convolution(us[j], vs[l], w, screened));
        else
          cross = cross.plus(windowed_convolution(us[j], vs[l], w, full));
      }
    CrossTermBlock cb;
    cb.k = k;
    cb.diagonal_norm = window_l2(block(diag));
    cb.cross_norm = window_l2(block(cross));
    const SpectralField lhs = block(windowed_convolution(u, v, w, screened));
    const SpectralField rhs =
        lp_block(lp.leading_on(wg, r).scaled(lead).plus(lp.remainder_on(wg, r).scaled(rem)), k);
    cb.aggregate_deviation = relative_l2(lhs, rhs);
    if (cb.cross_norm > 1e-10 * cb.diagonal_norm + 1e-12) ++rep.cross_failures;
    if (cb.diagonal_norm > 0.0) rep.max_ratio = std::max(rep.max_ratio, cb.cross_norm / cb.diagonal_norm);
    rep.max_deviation = std::max(rep.max_deviation, cb.aggregate_deviation);
    rep.blocks.push_back(cb);
  }
  return rep;
}

}  // namespace sns
