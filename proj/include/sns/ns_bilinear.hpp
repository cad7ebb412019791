#pragma once

// B(u, v) = (-Delta)^{-1} P div(u (x) v) and the identities behind the
// modulated counterexamples.

#include <optional>
#include <utility>
#include <vector>

#include "sns/besov.hpp"
#include "sns/spectral_core.hpp"

namespace sns {

/// Smallest modulation frequency for which the low/high splitting of
/// products of modulated profiles holds.
inline constexpr double kMinModulation = 10.0;
/// Smallest pairwise frequency gap keeping cross products away from {|xi| <= 2}.
inline constexpr double kMinFrequencyGap = 7.0;
/// Relative divergence accepted for solenoidal inputs.
inline constexpr double kSolenoidalTol = 1e-10;

/// amplitude * psi(x) cos(M x1): packets at +-M e1 with weight amplitude / 2.
PacketField modulated_potential(double M, double amplitude = 1.0);
/// amplitude * grad_perp(psi(x) cos(M x1)).
PacketField modulated_velocity(double M, double amplitude = 1.0);
/// sum_j amplitudes[j] * grad_perp(psi(x) cos(M[j] x1)).
PacketField modulated_sum(const std::vector<double>& M, const std::vector<double>& amplitudes);

/// Closed-form samples of a packet field on a grid.
SpectralField sample_packets(const PacketField& f, const FrequencyGrid& grid);

/// max |xi . uhat(xi)| / (max |xi| * max |uhat|) over the occupied nodes.
double divergence_defect(const SpectralField& u);

/// (-Delta)^{-1} P div T for a tensor transform T, node by node.
SpectralField bilinear_from_tensor(const SpectralField& T);

/// Full-grid B(u, v): the tensor lives on the grid padded by 2. Throws
/// ConfigError for inputs with divergence defect above kSolenoidalTol.
SpectralField bilinear_B(const SpectralField& u, const SpectralField& v);

/// Low-frequency part of B(u, v) for packet inputs, valid on |xi| <= radius().
///
/// Each packet pair (p, q) contributes e^{i(c_p + c_q).x} U_p (x) V_q, where
/// U_p, V_q are the demodulated envelopes; only pairs whose shifted support
/// meets the window are formed, each by a dealiased product on the envelope
/// grid.
class LowBilinear {
 public:
  LowBilinear(SpectralField tensor, double radius, int jmax);

  /// Transform of the retained part of u (x) v (index 2m+k).
  const SpectralField& tensor() const { return tensor_; }
  double radius() const { return radius_; }
  int jmax() const { return jmax_; }

  /// B on the tensor grid; meaningful at nodes with |xi| <= radius().
  SpectralField on_grid() const;
  /// B resampled onto block grids (for block_norm). Rejects radii beyond the
  /// window.
  BlockSampler sampler(double scale = 1.0) const;
  /// Delta_j B on the grid of block j.
  SpectralField block(int j, int points = 512, double nodes_per_unit = 64.0) const;

 private:
  SpectralField tensor_;
  double radius_;
  int jmax_;
};

struct LowOptions {
  double envelope_spacing = 1.0 / 32.0;
  int envelope_points = 256;
};

/// Requires jmax <= 2 and solenoidal packet multipliers.
LowBilinear bilinear_B_low(const PacketField& u, const PacketField& v, int jmax,
                           const LowOptions& opts = {});

/// The two right-hand terms of the low-frequency identity for
/// u = grad_perp(psi cos(M x1)):
///   Delta_j div(u (x) u) = (M^2/2) Delta_j (0, d2(psi^2)) + (1/2) Delta_j div(grad_perp psi (x) grad_perp psi).
struct LeadingPair {
  double M = 0.0;
  /// FT of psi^2.
  SpectralField W;
  /// FT of grad_perp psi (x) grad_perp psi.
  SpectralField T;

  /// (M^2/2) (0, d2(psi^2)).
  SpectralField leading() const;
  /// (1/2) div(grad_perp psi (x) grad_perp psi).
  SpectralField remainder() const;
  /// Samplers of scale * (-Delta)^{-1} P (0, d2(psi^2)) and of
  /// scale * (-Delta)^{-1} P div(grad_perp psi (x) grad_perp psi).
  BlockSampler leading_sampler(double scale = 1.0) const;
  BlockSampler remainder_sampler(double scale = 1.0) const;
  /// The two unscaled terms (0, d2 W) and div T resampled to a grid.
  SpectralField leading_on(const FrequencyGrid& grid, double radius) const;
  SpectralField remainder_on(const FrequencyGrid& grid, double radius) const;
};

/// Builds psi on (spacing, points) and the two products on the padded grid.
LeadingPair leading_pair(double M, double spacing = 1.0 / 32.0, int points = 256);

struct IdentityOptions {
  int jmin = -6;
  int jmax = 0;
  /// Envelope spacing of the coarse level; the refined level halves it.
  double coarse_spacing = 1.0 / 32.0;
  /// Window grid spacing 2^j / this.
  double window_nodes_per_unit = 8.0;
};

struct IdentityBlock {
  int j = 0;
  /// Relative L^2 deviation between the direct left side and the two-term
  /// right side, at the coarse and refined levels.
  double deviation_coarse = 0.0;
  double deviation_refined = 0.0;
  /// L^2 norm of Delta_j of the right side (refined level).
  double rhs_norm = 0.0;
};

struct IdentityReport {
  double M = 0.0;
  /// Products at the refined level.
  std::optional<LeadingPair> pair;
  std::vector<IdentityBlock> blocks;
  double max_deviation = 0.0;
  double max_deviation_coarse = 0.0;
};

/// Left side by direct frequency-space summation of uhat * uhat at window
/// nodes; right side from psi alone. Throws ConfigError for M < 10.
IdentityReport modulated_identity_check(double M, const IdentityOptions& opts = {});

struct CrossTermOptions {
  int kmin = -6;
  int kmax = 0;
  double envelope_spacing = 1.0 / 32.0;
  double window_nodes_per_unit = 8.0;
};

struct CrossTermBlock {
  int k = 0;
  double cross_norm = 0.0;
  double diagonal_norm = 0.0;
  /// Deviation of Delta_k div(u (x) v) from the aggregate two-term identity.
  double aggregate_deviation = 0.0;
};

struct CrossTermReport {
  double min_gap = 0.0;
  std::vector<CrossTermBlock> blocks;
  /// max over k of cross_norm / diagonal_norm.
  double max_ratio = 0.0;
  double max_deviation = 0.0;
  /// Blocks failing cross <= 1e-10 * diagonal + 1e-12.
  int cross_failures = 0;
};

/// For u = sum_j a_j grad_perp(psi cos(M_j x1)) and v likewise with b_j.
/// Throws ConfigError if some M_j < 10 or a pairwise gap is below 7.
CrossTermReport cross_term_check(const std::vector<double>& M, const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 const CrossTermOptions& opts = {});

/// L^2 norm over window nodes (Riemann sum with the grid spacing).
double window_l2(const SpectralField& f);

}  // namespace sns
