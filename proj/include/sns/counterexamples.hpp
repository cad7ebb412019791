#pragma once

// The counterexample sequences for the three parameter regimes, the lower
// bound curve of the leading term and the degeneration experiments.

#include <string>
#include <utility>
#include <vector>

#include "sns/besov.hpp"
#include "sns/ns_bilinear.hpp"

namespace sns {

/// Largest log2 of a case (iii) frequency accepted by default.
inline constexpr double kMaxLog2Frequency = 100.0;

/// ||psi||_{L^2}^2 = What(0), as a lattice sum on (1/128, 544).
double psi_l2_squared();
/// ||psi||_{H^1-dot}^2 = (2 pi)^{-2} int |xi|^2 psi_hat^2 dxi (lattice sum).
double psi_h1_squared();

/// M_vec(z) = (i z2 / |z|^2) (-z1 z2, z1^2) / |z|^2, the homogeneous symbol of
/// (-Delta)^{-1} P (0, i z2 .); value 0 at the origin.
Symbol leading_symbol();

/// a_inf = What(0) ||F^{-1}[phi_hat_0 M_vec]||_{L^p}, on the unit-scale grid.
struct ScalingLimit {
  double p = 2.0;
  double w0 = 0.0;
  double profile_norm = 0.0;
  double value = 0.0;
  BlockReport block;
};
ScalingLimit scaling_limit(double p, const BlockOptions& opts = {});

struct LowerBoundCurve {
  double p = 2.0;
  /// a_j of the full vector (-Delta)^{-1} P (0, d2(psi^2)).
  std::vector<BlockReport> blocks;
  /// Same weighting applied to the second component alone.
  std::vector<BlockReport> second;
  /// Same weighting applied to the first component alone (zero would make
  /// the displayed first entry exact; it is not).
  std::vector<BlockReport> first;
  ScalingLimit limit;
  double min_a = 0.0;
  /// |a_jmin - a_inf| / a_inf.
  double tail_gap = 0.0;
};
/// Throws ConfigError unless jmin <= jmax <= -2.
LowerBoundCurve lower_bound_curve(double p, int jmin, int jmax, const BlockOptions& opts = {});

/// N^{-1/(2q)} grad_perp(psi cos(M x1)); requires q < inf, M >= 10, N >= 1.
PacketField gen_case_i(int N, double p, double q, double M);
/// (1/N) grad_perp(psi cos(N x1)); requires N >= 10.
PacketField gen_case_ii(int N);
/// (u_N, v_N) with frequencies 2^{sigma j}, j = 10..N+10, weights
/// (log N)^{-1/2} M_j^{-2/p} j^{-1/2} and the same with p'. Requires
/// 1 <= p < 2, sigma >= 2, N >= 2 and sigma (N + 10) <= max_log2.
std::pair<PacketField, PacketField> gen_case_iii(int N, double p, double sigma,
                                                 double max_log2 = kMaxLog2Frequency);
/// Frequencies 2^{sigma j}, j = 10..N+10.
std::vector<double> case_iii_frequencies(int N, double sigma);

/// Norm of a packet field in the homogeneous space with smoothness s,
/// aggregated over its occupied blocks.
BesovPartial packet_besov_norm(const PacketField& f, double p, double q, double s,
                               const BlockOptions& opts = {});

/// Least-squares slope of log y against log x with a 95% Student-t interval.
struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;
  int points = 0;
};
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- case (i)

struct CaseIOptions {
  double p = 2.0;
  double q = 2.0;
  double M = 16.0;
  std::vector<int> N = {4, 16, 64};
  /// The remainder table is computed down to j = -dominance_J - 2.
  int dominance_J = 32;
  BlockOptions block;
  LowOptions low;
};

struct CaseIRow {
  int N = 0;
  int J = 0;
  double u_norm = 0.0;
  /// u_norm * N^{1/(2q)}.
  double u_norm_scaled = 0.0;
  /// Partial norm of B(u_1, u_1) over [-J-2, -2]; B(u_N, u_N) carries N^{-1/q}.
  double S = 0.0;
  double S_leading = 0.0;
  /// S / (a_inf (M^2/2) J^{1/q}).
  double normalized = 0.0;
  /// S(u_N) / ||u_N||^2.
  double ratio = 0.0;
  /// ratio / ratio of the previous row.
  double growth = 0.0;
};

struct CaseIReport {
  CaseIOptions options;
  double a_inf = 0.0;
  std::vector<CaseIRow> rows;
  std::vector<BlockReport> b_blocks;
  std::vector<BlockReport> leading_blocks;
  std::vector<BlockReport> remainder_blocks;
  /// Largest relative spread of u_norm_scaled over the rows.
  double prefactor_spread = 0.0;
  /// Leading and remainder partial sums at J = dominance_J and their ratio.
  double dominance_leading = 0.0;
  double dominance_remainder = 0.0;
  double dominance_ratio = 0.0;
  /// Empirical constants: leading >= c0 M^2 J^{1/q}, remainder <= C0 |psi|_{H1}^2 J^{1/q},
  /// and the smallest M with c0 M^2 - C0 |psi|^2 >= c0 (at least 10).
  double c0 = 0.0;
  double C0 = 0.0;
  double M_threshold_raw = 0.0;
  double M_threshold = 0.0;
};
CaseIReport run_case_i(const CaseIOptions& opts);

// ---------------------------------------------------------------- case (ii)

struct CaseIIOptions {
  double p = 4.0;
  std::vector<int> N = {16, 32, 64, 128};
  int jmin = -12;
  int jmax = -2;
  BlockOptions block;
  LowOptions low;
};

struct CaseIIRow {
  int N = 0;
  double u_norm = 0.0;
  /// sup over [jmin, jmax] of the weighted blocks of B(u_N, u_N).
  double sup_block = 0.0;
  /// sup_block minus the N -> inf asymptote (1/2) sup_j a_j.
  double deviation = 0.0;
};

struct CaseIIReport {
  CaseIIOptions options;
  double asymptote = 0.0;
  double remainder_sup = 0.0;
  std::vector<CaseIIRow> rows;
  PowerFit norm_fit;
  /// Fit of |deviation| against N over the rows with nonzero deviation;
  /// points = 0 when no power law is measurable.
  PowerFit deviation_fit;
  /// Largest |deviation| / asymptote.
  double max_relative_deviation = 0.0;
};
CaseIIReport run_case_ii(const CaseIIOptions& opts);

// ---------------------------------------------------------------- case (iii)

struct CaseIIIOptions {
  double p = 1.0;
  double sigma = 2.0;
  std::vector<int> N = {4, 8, 16};
  int jmin = -12;
  int jmax = -2;
  double max_log2 = kMaxLog2Frequency;
  BlockOptions block;
  LowOptions low;
};

struct CaseIIIRow {
  int N = 0;
  double u_norm = 0.0;
  double v_norm = 0.0;
  double u_scaled = 0.0;  // u_norm * sqrt(log N)
  double v_scaled = 0.0;
  /// sup over [jmin, jmax] of the weighted blocks of B(u_N, v_N) (s = 2/p - 1).
  double sup_block = 0.0;
  /// sum_{j=10}^{N+10} 1/j / log N.
  double harmonic_factor = 0.0;
  /// 0.5 * (1/2) a_inf * harmonic_factor.
  double lower_bound = 0.0;
};

struct CaseIIIReport {
  CaseIIIOptions options;
  double a_inf = 0.0;
  std::vector<CaseIIIRow> rows;
  /// (max - min) / min over rows of u_scaled and v_scaled.
  double u_variation = 0.0;
  double v_variation = 0.0;
};
CaseIIIReport run_case_iii(const CaseIIIOptions& opts);

}  // namespace sns
