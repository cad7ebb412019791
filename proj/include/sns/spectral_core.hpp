#pragma once

// Band-limited functions on R^2 represented by samples of their continuous
// Fourier transform on uniform square frequency lattices.
//
// Convention: fhat(xi) = int f(x) e^{-i x.xi} dx,
//             f(x)     = (2 pi)^{-2} int fhat(xi) e^{i x.xi} dxi.
//
// A lattice with spacing h and K nodes per axis has nodes xi_k = h (k - K/2)
// and is dual to the torus of period L = 2 pi / h sampled at x_m = dx (m - K/2),
// dx = L / K.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "sns/errors.hpp"

namespace sns {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Relative threshold below which a Fourier sample counts as empty.
inline constexpr double kSupportTol = 1e-13;
/// Minimum relative gap between a field's support and the grid edge.
inline constexpr double kBandMargin = 0.1;

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline double norm(Vec2 v) { return std::sqrt(v.x1 * v.x1 + v.x2 * v.x2); }

class FrequencyGrid {
 public:
  /// Throws ConfigError unless points is even and >= 8 and spacing > 0.
  FrequencyGrid(double spacing, int points);

  double spacing() const { return spacing_; }
  int points() const { return points_; }
  std::size_t size() const {
    return static_cast<std::size_t>(points_) * static_cast<std::size_t>(points_);
  }
  double half_extent() const { return 0.5 * points_ * spacing_; }
  double period() const { return kTwoPi / spacing_; }
  double physical_spacing() const { return period() / points_; }

  double node(int k) const { return spacing_ * (k - points_ / 2); }
  double position(int m) const { return physical_spacing() * (m - points_ / 2); }
  Vec2 node(int k1, int k2) const { return {node(k1), node(k2)}; }
  std::size_t index(int k1, int k2) const {
    return static_cast<std::size_t>(k1) * static_cast<std::size_t>(points_) +
           static_cast<std::size_t>(k2);
  }

  /// Same spacing, `factor` times more nodes (wider frequency extent, finer
  /// physical sampling of the same torus).
  FrequencyGrid widened(int factor) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double spacing_;
  int points_;
};

FrequencyGrid make_grid(double spacing, int points);

enum class Rank { kScalar = 1, kVector = 2, kTensor = 4 };

inline int component_count(Rank r) { return static_cast<int>(r); }
Rank rank_for_components(int n);

/// A closed-form Fourier-side function xi -> C^{rows x cols}, row-major.
///
/// Fields use cols == 1 (rows = number of components). Multipliers use
/// rows x cols matrices; a 1x1 multiplier acts componentwise on any rank.
class Symbol {
 public:
  using Fn = std::function<void(Vec2, std::span<cplx>)>;

  Symbol(int rows, int cols, Fn fn, bool hermitian = true,
         std::optional<std::vector<cplx>> origin_value = std::nullopt);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int entries() const { return rows_ * cols_; }
  /// True when m(-xi) = conj m(xi), so real fields stay real.
  bool hermitian() const { return hermitian_; }
  const std::optional<std::vector<cplx>>& origin_value() const { return origin_; }

  /// Evaluates at xi; the origin uses the declared origin value if any.
  void operator()(Vec2 xi, std::span<cplx> out) const;

 private:
  int rows_;
  int cols_;
  Fn fn_;
  bool hermitian_;
  std::optional<std::vector<cplx>> origin_;
};

namespace detail {

/// Storage shared by the spectral and physical representations.
class GridFunction {
 public:
  GridFunction(FrequencyGrid grid, Rank rank, bool real);

  const FrequencyGrid& grid() const { return grid_; }
  Rank rank() const { return rank_; }
  int components() const { return component_count(rank_); }
  bool real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  std::span<cplx> component(int c) { return values_[static_cast<std::size_t>(c)]; }
  std::span<const cplx> component(int c) const {
    return values_[static_cast<std::size_t>(c)];
  }
  cplx& at(int c, int k1, int k2) {
    return values_[static_cast<std::size_t>(c)][grid_.index(k1, k2)];
  }
  cplx at(int c, int k1, int k2) const {
    return values_[static_cast<std::size_t>(c)][grid_.index(k1, k2)];
  }

  /// max over nodes of the Euclidean modulus across components.
  double max_modulus() const;
  /// Euclidean modulus across components at one node.
  double modulus(std::size_t idx) const;

 protected:
  FrequencyGrid grid_;
  Rank rank_;
  bool real_;
  std::vector<std::vector<cplx>> values_;
};

}  // namespace detail

/// Samples fhat(xi_k) of a continuous Fourier transform.
class SpectralField : public detail::GridFunction {
 public:
  SpectralField(FrequencyGrid grid, Rank rank, bool real)
      : GridFunction(grid, rank, real) {}

  /// Largest |xi_k| with modulus above tol * max modulus (0 for a zero field).
  double support_radius(double tol = kSupportTol) const;

  /// Single component as a scalar field.
  SpectralField extract(int c) const;
  /// Scales every sample.
  SpectralField scaled(cplx factor) const;
  /// Sum of two fields on the same grid and rank.
  SpectralField plus(const SpectralField& other) const;
};

/// Samples f(x_m) on the dual torus.
class PhysicalField : public detail::GridFunction {
 public:
  PhysicalField(FrequencyGrid grid, Rank rank, bool real)
      : GridFunction(grid, rank, real) {}
};

/// Builds a field by evaluating a symbol at every node. With real_flag the
/// result is symmetrized to satisfy fhat(-xi) = conj fhat(xi).
SpectralField sample_symbol(const FrequencyGrid& grid, const Symbol& symbol, bool real_flag);

/// Combines two component fields into a vector field.
SpectralField make_vector(const SpectralField& a, const SpectralField& b);

/// Relative Hermitian-symmetry defect max |f(xi) - conj f(-xi)| / max |f|.
double hermitian_defect(const SpectralField& f);

/// f(x_m) ~ (h / 2 pi)^2 sum_k fhat(xi_k) e^{i x_m . xi_k}, via FFT.
/// Throws AliasingError if the support reaches within the band margin of the
/// grid edge. Real fields drop their imaginary residue, which must be tiny.
PhysicalField to_physical(const SpectralField& f);

/// Inverse of to_physical: fhat(xi_k) ~ dx^2 sum_m f(x_m) e^{-i x_m . xi_k}.
SpectralField to_spectral(const PhysicalField& f);

/// Torus quadrature of the L^p norm, 1 <= p <= inf; vector and tensor
/// fields use the pointwise Euclidean modulus.
double lp_norm(const PhysicalField& f, double p);

/// Embeds a field in a grid with the same spacing and `factor` times more
/// nodes, zero-filling the new frequencies.
SpectralField zero_pad(const SpectralField& f, int factor);

/// Restricts to a grid with the same spacing and fewer nodes. Throws
/// AliasingError if non-negligible content would be dropped.
SpectralField crop(const SpectralField& f, int points);

/// Fourier transform of the pointwise product f g, i.e. (2 pi)^{-2} fhat * ghat,
/// computed by dealiased physical multiplication. One factor may be scalar and
/// the other of any rank. The result lives on the grid padded by a factor 2.
SpectralField spectral_product(const SpectralField& f, const SpectralField& g);

/// Tensor (u (x) v)_{mk} = u_m v_k of two vector fields, entries as in
/// spectral_product. Component index is 2 m + k.
SpectralField outer_product(const SpectralField& u, const SpectralField& v);

/// Real radial profile r -> env(r), vanishing for r >= its radius.
using RadialProfile = double (*)(double);

/// A sum of modulated copies of one radial envelope:
///   fhat(xi) = sum_p w_p * env(|xi - c_p|) * m(xi),
/// where m is a rows x 1 multiplier (the field's components). Evaluating in
/// packet-local coordinates keeps full precision for very large centers.
class PacketField {
 public:
  struct Packet {
    Vec2 center;
    cplx weight;
  };

  PacketField(RadialProfile envelope, double envelope_radius, Symbol multiplier,
              std::vector<Packet> packets);

  Rank rank() const { return rank_for_components(multiplier_.rows()); }
  int components() const { return multiplier_.rows(); }
  const std::vector<Packet>& packets() const { return packets_; }
  RadialProfile envelope() const { return envelope_; }
  const Symbol& multiplier() const { return multiplier_; }
  double envelope_radius() const { return envelope_radius_; }

  /// True when every packet has a mirror at -c with conjugate weight and the
  /// multiplier is Hermitian.
  bool real() const;

  /// Largest |c_p| + envelope radius.
  double support_radius() const;

  /// fhat(xi).
  void evaluate(Vec2 xi, std::span<cplx> out) const;

  /// Contribution of packet p at xi = c_p + delta.
  void evaluate_local(std::size_t p, Vec2 delta, std::span<cplx> out) const {
    const double r2 = delta.x1 * delta.x1 + delta.x2 * delta.x2;
    const double env = r2 < envelope_radius_ * envelope_radius_ ? envelope_(std::sqrt(r2)) : 0.0;
    if (env == 0.0) {
      for (auto& v : out) v = 0.0;
      return;
    }
    const Packet& pk = packets_[p];
    multiplier_({pk.center.x1 + delta.x1, pk.center.x2 + delta.x2}, out);
    const cplx s = env * pk.weight;
    for (auto& v : out) v *= s;
  }

  /// All packet weights multiplied by a factor.
  PacketField scaled(cplx factor) const;
  /// Concatenation of packet lists (same envelope and multiplier).
  PacketField plus(const PacketField& other) const;

  /// The field as a closed-form symbol, for sampling onto grids.
  Symbol as_symbol() const;

 private:
  RadialProfile envelope_;
  double envelope_radius_;
  Symbol multiplier_;
  std::vector<Packet> packets_;
};

/// Nodes of `grid` with |xi| <= radius; the rest of a windowed result is zero.
struct Window {
  FrequencyGrid grid;
  double radius;
};

/// Options for direct-summation convolution.
struct ConvolutionOptions {
  /// Lattice spacing for packet-local summation nodes.
  double envelope_spacing = 1.0 / 16.0;
  /// Maximum active summation nodes.
  std::size_t node_budget = 10'000'000;
  /// Skip packet pairs whose shifted envelopes cannot overlap the node. The
  /// envelope vanishes identically outside its radius, so this only avoids work.
  bool screen_pairs = true;
};

/// (2 pi)^{-2} (fhat * ghat) at window nodes by direct summation over the
/// active nodes of f; g is evaluated pointwise. Vector inputs produce the
/// tensor of entry products, as outer_product does.
SpectralField windowed_convolution(const SpectralField& f, const Symbol& g,
                                   const Window& window,
                                   const ConvolutionOptions& opts = {});

/// Same for two packet fields, summing over a packet-local lattice.
SpectralField windowed_convolution(const PacketField& f, const PacketField& g,
                                   const Window& window,
                                   const ConvolutionOptions& opts = {});

/// Value of a sampled transform at an arbitrary xi by trigonometric
/// interpolation through the physical samples (exact for fields that decay
/// within the torus). O(K^2) per call.
void evaluate_interpolated(const SpectralField& f, Vec2 xi, std::span<cplx> out);

/// Resamples a field onto `target` nodes with |xi| <= radius through its
/// physical samples (separable non-uniform DFT over the non-negligible part
/// of the torus). Throws AliasingError if the target window leaves the source
/// band or the source has not decayed at the torus edge.
SpectralField resample(const SpectralField& src, const FrequencyGrid& target, double radius);

/// Radius 2^{j+1} (1 + margin) beyond which block j needs no samples.
double block_radius(int j);

/// Symbol values at the nodes of `grid` with |xi| <= radius, zero elsewhere.
/// Non-finite values raise SingularityError.
SpectralField sample_on_disk(const Symbol& f, const FrequencyGrid& grid, double radius);

namespace detail {
/// Unnormalized in-place 1D DFT, sign -1 (forward) or +1 (backward).
void dft_1d(std::vector<cplx>& data, int sign);
}  // namespace detail

/// Grid adapted to dyadic block j: spacing 2^j / nodes_per_unit, K_b nodes.
FrequencyGrid block_grid(int j, int points = 512, double nodes_per_unit = 64.0);

/// f sampled on the grid of block j. Symbols are evaluated exactly; fields
/// are resampled through their physical samples. Nodes outside the
/// neighbourhood |xi| <= 2^{j+1} (1 + margin) are left at zero.
SpectralField resample_to_block(const Symbol& f, int j, int points = 512);
SpectralField resample_to_block(const SpectralField& f, int j, int points = 512);

}  // namespace sns
