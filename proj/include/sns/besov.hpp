#pragma once

// Weighted dyadic block norms 2^{sj} ||Delta_j f||_{L^p} and finite partial
// homogeneous Besov norms.

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sns/spectral_core.hpp"

namespace sns {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// p/(p-1), with 1 <-> inf.
double holder_conjugate(double p);

struct BesovParams {
  double p = 2.0;
  double q = 2.0;
  double s = 0.0;
  int jmin = -12;
  int jmax = -2;

  /// Throws ConfigError unless 1 <= p, q <= inf and jmin <= jmax.
  void validate() const;
  double p_conjugate() const { return holder_conjugate(p); }
};

/// How the L^p integral of a modulated block 2 Re(e^{i c.x} E(x)) is taken.
enum class PacketQuadrature {
  /// Two-scale.
  kAuto,
  /// Average over the fast phase in closed form, then integrate over the
  /// envelope grid. Exact for p = 2 and p = 4; asymptotic in |c| otherwise.
  kTwoScale,
  /// Sample the oscillation on a fine line grid along x1.
  kExplicit,
};

struct BlockOptions {
  /// Block grid: spacing 2^j / nodes_per_unit with `points` nodes per axis.
  int points = 512;
  double nodes_per_unit = 64.0;
  /// Relative refinement disagreement above which a block is flagged; above
  /// 100 x tol the quadrature is rejected.
  double tol = 1e-6;
  /// Recompute on the grid with twice the nodes (same spacing).
  bool refine = true;
  /// Tolerance used instead of tol when p is not an even integer or inf:
  /// |f|^p then has kinks on the zero set and the torus tail of |f| decays
  /// slowly, which limits the quadrature to about 1e-4 relative.
  double nonsmooth_tol = 1e-3;
  /// Extra physical upsampling for exponents whose integrand |f|^p has kinks
  /// (p not an even integer); applied before the refinement doubling.
  int oversample_nonsmooth = 2;
  /// Envelope grid for modulated packet fields.
  double envelope_spacing = 1.0 / 32.0;
  int envelope_points = 512;
  PacketQuadrature quadrature = PacketQuadrature::kAuto;
  /// Explicit quadrature: nodes per oscillation period (refinement doubles it).
  int nodes_per_period = 16;
  /// Explicit quadrature: limit on fine samples per level.
  std::size_t explicit_budget = std::size_t{1} << 26;
};

struct BlockReport {
  int j = 0;
  double p = 2.0;
  double s = 0.0;
  /// ||Delta_j f||_{L^p}.
  double norm = 0.0;
  /// 2^{sj} ||Delta_j f||_{L^p}.
  double weighted = 0.0;
  /// Grid used for the reported value.
  double spacing = 0.0;
  int points = 0;
  /// Value at the coarser level and the relative disagreement with it.
  double coarse_norm = 0.0;
  double refinement_error = 0.0;
  bool flagged = false;
  /// For p = inf: sup <= reported lattice max times this factor (Bernstein);
  /// infinite when the bound is vacuous.
  double sup_inflation = 1.0;
  std::string method;
};

/// Produces fhat on a block grid; nodes outside |xi| <= radius may be left zero.
using BlockSampler = std::function<SpectralField(const FrequencyGrid& grid, double radius)>;

BlockReport block_norm(const BlockSampler& sampler, int j, double p, double s,
                       const BlockOptions& opts = {});
BlockReport block_norm(const Symbol& f, int j, double p, double s, const BlockOptions& opts = {});
BlockReport block_norm(const SpectralField& f, int j, double p, double s,
                       const BlockOptions& opts = {});
/// Modulated packets use the envelope grid; unmodulated ones the block grid.
BlockReport block_norm(const PacketField& f, int j, double p, double s,
                       const BlockOptions& opts = {});

/// Block reports for j in [jmin, jmax], computed in parallel.
std::vector<BlockReport> block_table(const std::function<BlockReport(int)>& one, int jmin,
                                     int jmax);

/// l^q aggregation of the weighted norms of the blocks with jmin <= j <= jmax.
double lq_aggregate(const std::vector<BlockReport>& blocks, double q, int jmin, int jmax);
double lq_aggregate(const std::vector<BlockReport>& blocks, double q);

struct BesovPartial {
  double value = 0.0;
  std::vector<BlockReport> blocks;
};

BesovPartial besov_partial(const Symbol& f, const BesovParams& params,
                           const BlockOptions& opts = {});
BesovPartial besov_partial(const SpectralField& f, const BesovParams& params,
                           const BlockOptions& opts = {});
BesovPartial besov_partial(const PacketField& f, const BesovParams& params,
                           const BlockOptions& opts = {});
BesovPartial besov_partial(const BlockSampler& f, const BesovParams& params,
                           const BlockOptions& opts = {});

/// Blocks j >= jfloor whose annulus {2^{j-1} <= |xi| <= 2^{j+1}} meets the
/// packet supports, ascending.
std::vector<int> occupied_blocks(const PacketField& f, int jfloor = -40);

/// Maximum of |f| on R^2 for a band-limited field: lattice maximum polished
/// on the trigonometric interpolant.
double polished_sup(const SpectralField& fhat, const PhysicalField& phys);

}  // namespace sns
