#include "sns/spectral_core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <string>

#include "sns/parallel.hpp"

namespace sns {

namespace {

std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

// In-place unnormalized 2D DFT of a K x K row-major array.
void fft2d(std::vector<cplx>& data, int K, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(K, K, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

void detail::dft_1d(std::vector<cplx>& data, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

namespace {

inline double parity(int k) { return (k & 1) ? -1.0 : 1.0; }

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

void require_same_grid(const detail::GridFunction& a, const detail::GridFunction& b,
                       const char* what) {
  if (!(a.grid() == b.grid())) throw ConfigError(std::string(what) + ": grids differ");
}

// Physical samples of f on the grid padded by `factor`.
PhysicalField padded_physical(const SpectralField& f, int factor) {
  return to_physical(factor == 1 ? f : zero_pad(f, factor));
}

// Index box [lo, hi] per axis holding every sample above thr * max.
struct Box {
  int lo1, hi1, lo2, hi2;
};

Box significant_box(const PhysicalField& f, double rel) {
  const int K = f.grid().points();
  const double thr = rel * f.max_modulus();
  Box b{K, -1, K, -1};
  for (int m1 = 0; m1 < K; ++m1) {
    for (int m2 = 0; m2 < K; ++m2) {
      if (f.modulus(f.grid().index(m1, m2)) > thr) {
        b.lo1 = std::min(b.lo1, m1);
        b.hi1 = std::max(b.hi1, m1);
        b.lo2 = std::min(b.lo2, m2);
        b.hi2 = std::max(b.hi2, m2);
      }
    }
  }
  if (b.hi1 < 0) b = {K / 2, K / 2, K / 2, K / 2};
  return b;
}

// Largest modulus within the outer band of the torus, relative to the max.
double edge_fraction(const PhysicalField& f) {
  const int K = f.grid().points();
  const int band = std::max(1, K / 16);
  double edge = 0.0;
  for (int m1 = 0; m1 < K; ++m1) {
    const bool row_edge = m1 < band || m1 >= K - band;
    for (int m2 = 0; m2 < K; ++m2) {
      if (row_edge || m2 < band || m2 >= K - band)
        edge = std::max(edge, f.modulus(f.grid().index(m1, m2)));
    }
  }
  const double mx = f.max_modulus();
  return mx > 0.0 ? edge / mx : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- grid

FrequencyGrid::FrequencyGrid(double spacing, int points) : spacing_(spacing), points_(points) {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ConfigError("frequency spacing must be positive and finite");
  if (points < 8 || points % 2 != 0)
    throw ConfigError("points per axis must be even and at least 8, got " +
                      std::to_string(points));
}

FrequencyGrid FrequencyGrid::widened(int factor) const {
  if (factor < 1) throw ConfigError("widening factor must be >= 1");
  return FrequencyGrid(spacing_, points_ * factor);
}

FrequencyGrid make_grid(double spacing, int points) { return FrequencyGrid(spacing, points); }

Rank rank_for_components(int n) {
  switch (n) {
    case 1: return Rank::kScalar;
    case 2: return Rank::kVector;
    case 4: return Rank::kTensor;
    default: throw ConfigError("unsupported component count " + std::to_string(n));
  }
}

// ---------------------------------------------------------------- symbol

Symbol::Symbol(int rows, int cols, Fn fn, bool hermitian,
               std::optional<std::vector<cplx>> origin_value)
    : rows_(rows), cols_(cols), fn_(std::move(fn)), hermitian_(hermitian),
      origin_(std::move(origin_value)) {
  if (rows < 1 || cols < 1) throw ConfigError("symbol shape must be positive");
  if (origin_ && static_cast<int>(origin_->size()) != rows * cols)
    throw ConfigError("origin value has the wrong number of entries");
}

void Symbol::operator()(Vec2 xi, std::span<cplx> out) const {
  if (origin_ && xi.x1 == 0.0 && xi.x2 == 0.0) {
    std::copy(origin_->begin(), origin_->end(), out.begin());
    return;
  }
  fn_(xi, out);
}

// ---------------------------------------------------------------- storage

namespace detail {

GridFunction::GridFunction(FrequencyGrid grid, Rank rank, bool real)
    : grid_(grid), rank_(rank), real_(real),
      values_(static_cast<std::size_t>(component_count(rank)),
              std::vector<cplx>(grid.size(), cplx(0.0, 0.0))) {}

double GridFunction::modulus(std::size_t idx) const {
  if (values_.size() == 1) return std::abs(values_[0][idx]);
  double s = 0.0;
  for (const auto& c : values_) s += std::norm(c[idx]);
  return std::sqrt(s);
}

double GridFunction::max_modulus() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) m = std::max(m, modulus(i));
  return m;
}

}  // namespace detail

double SpectralField::support_radius(double tol) const {
  const double thr = tol * max_modulus();
  if (thr == 0.0) return 0.0;
  const int K = grid_.points();
  double r = 0.0;
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2)
      if (modulus(grid_.index(k1, k2)) > thr) r = std::max(r, norm(grid_.node(k1, k2)));
  return r;
}

SpectralField SpectralField::extract(int c) const {
  if (c < 0 || c >= components()) throw ConfigError("component index out of range");
  SpectralField out(grid_, Rank::kScalar, real_);
  std::copy(component(c).begin(), component(c).end(), out.component(0).begin());
  return out;
}

SpectralField SpectralField::scaled(cplx factor) const {
  SpectralField out = *this;
  for (int c = 0; c < components(); ++c)
    for (auto& v : out.component(c)) v *= factor;
  if (factor.imag() != 0.0) out.set_real(false);
  return out;
}

SpectralField SpectralField::plus(const SpectralField& other) const {
  require_same_grid(*this, other, "plus");
  if (rank() != other.rank()) throw ConfigError("plus: ranks differ");
  SpectralField out = *this;
  for (int c = 0; c < components(); ++c) {
    auto dst = out.component(c);
    auto src = other.component(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  out.set_real(real() && other.real());
  return out;
}

// ---------------------------------------------------------------- sampling

SpectralField sample_symbol(const FrequencyGrid& grid, const Symbol& symbol, bool real_flag) {
  const int n = symbol.entries();
  SpectralField out(grid, rank_for_components(n), real_flag);
  const int K = grid.points();
  std::vector<cplx> buf(static_cast<std::size_t>(n));
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      const Vec2 xi = grid.node(k1, k2);
      symbol(xi, buf);
      for (int c = 0; c < n; ++c) {
        if (!std::isfinite(buf[c].real()) || !std::isfinite(buf[c].imag()))
          throw SingularityError(fmt("symbol is not finite at node (%g, %g)", xi.x1, xi.x2));
        out.at(c, k1, k2) = buf[c];
      }
    }
  }
  if (real_flag) {
    for (int c = 0; c < n; ++c) {
      for (int k1 = 1; k1 < K; ++k1) {
        for (int k2 = 1; k2 < K; ++k2) {
          const std::size_t i = grid.index(k1, k2);
          const std::size_t j = grid.index(K - k1, K - k2);
          if (j < i) continue;
          const cplx a = out.component(c)[i];
          const cplx b = std::conj(out.component(c)[j]);
          const cplx avg = 0.5 * (a + b);
          out.component(c)[i] = avg;
          out.component(c)[j] = std::conj(avg);
        }
      }
    }
  }
  return out;
}

SpectralField make_vector(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "make_vector");
  if (a.rank() != Rank::kScalar || b.rank() != Rank::kScalar)
    throw ConfigError("make_vector expects two scalar fields");
  SpectralField out(a.grid(), Rank::kVector, a.real() && b.real());
  std::copy(a.component(0).begin(), a.component(0).end(), out.component(0).begin());
  std::copy(b.component(0).begin(), b.component(0).end(), out.component(1).begin());
  return out;
}

double hermitian_defect(const SpectralField& f) {
  const double mx = f.max_modulus();
  if (mx == 0.0) return 0.0;
  const int K = f.grid().points();
  double d = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (int k1 = 1; k1 < K; ++k1)
      for (int k2 = 1; k2 < K; ++k2)
        d = std::max(d, std::abs(f.at(c, k1, k2) - std::conj(f.at(c, K - k1, K - k2))));
  return d / mx;
}

// ---------------------------------------------------------------- transforms

PhysicalField to_physical(const SpectralField& f) {
  const FrequencyGrid& g = f.grid();
  const double limit = g.half_extent() * (1.0 - kBandMargin);
  const double r = f.support_radius();
  if (r > limit)
    throw AliasingError(fmt("support radius %.6g exceeds the band limit %.6g", r, limit));
  const int K = g.points();
  const double scale = std::pow(g.spacing() / kTwoPi, 2);
  PhysicalField out(g, f.rank(), f.real());
  const double mx = f.max_modulus();
  // Residue is measured against the whole field: one component may be
  // roundoff next to the others.
  double residue = 0.0;
  double peak = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    std::vector<cplx> buf(f.component(c).begin(), f.component(c).end());
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2)
        if ((k1 + k2) & 1) buf[g.index(k1, k2)] = -buf[g.index(k1, k2)];
    fft2d(buf, K, FFTW_BACKWARD);
    auto dst = out.component(c);
    for (int m1 = 0; m1 < K; ++m1) {
      for (int m2 = 0; m2 < K; ++m2) {
        const std::size_t i = g.index(m1, m2);
        cplx v = buf[i] * (scale * parity(m1 + m2));
        if (f.real()) {
          residue = std::max(residue, std::abs(v.imag()));
          peak = std::max(peak, std::abs(v));
          v = cplx(v.real(), 0.0);
        }
        dst[i] = v;
      }
    }
  }
  if (f.real() && mx > 0.0 && residue > 1e-10 * std::max(peak, 1e-300))
    throw NumericalError(fmt("imaginary residue %.3g of a real field (peak %.3g)", residue, peak));
  return out;
}

SpectralField to_spectral(const PhysicalField& f) {
  const FrequencyGrid& g = f.grid();
  const int K = g.points();
  const double scale = std::pow(g.physical_spacing(), 2);
  SpectralField out(g, f.rank(), f.real());
  for (int c = 0; c < f.components(); ++c) {
    std::vector<cplx> buf(f.component(c).begin(), f.component(c).end());
    for (int m1 = 0; m1 < K; ++m1)
      for (int m2 = 0; m2 < K; ++m2)
        if ((m1 + m2) & 1) buf[g.index(m1, m2)] = -buf[g.index(m1, m2)];
    fft2d(buf, K, FFTW_FORWARD);
    auto dst = out.component(c);
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) {
        const std::size_t i = g.index(k1, k2);
        dst[i] = buf[i] * (scale * parity(k1 + k2));
      }
  }
  return out;
}

double lp_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p exponent must satisfy 1 <= p <= inf");
  const std::size_t n = f.grid().size();
  if (std::isinf(p)) return f.max_modulus();
  const double w = std::pow(f.grid().physical_spacing(), 2);
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) {
      double m2 = 0.0;
      for (int c = 0; c < f.components(); ++c) m2 += std::norm(f.component(c)[i]);
      s += m2;
    }
    return std::sqrt(w * s);
  }
  for (std::size_t i = 0; i < n; ++i) s += std::pow(f.modulus(i), p);
  return std::pow(w * s, 1.0 / p);
}

SpectralField zero_pad(const SpectralField& f, int factor) {
  const FrequencyGrid big = f.grid().widened(factor);
  SpectralField out(big, f.rank(), f.real());
  const int K = f.grid().points();
  const int off = (big.points() - K) / 2;
  for (int c = 0; c < f.components(); ++c)
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) out.at(c, k1 + off, k2 + off) = f.at(c, k1, k2);
  return out;
}

SpectralField crop(const SpectralField& f, int points) {
  const int K = f.grid().points();
  if (points > K) throw ConfigError("crop cannot enlarge a grid");
  const FrequencyGrid small(f.grid().spacing(), points);
  const int off = (K - points) / 2;
  const double thr = kSupportTol * f.max_modulus();
  SpectralField out(small, f.rank(), f.real());
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      const bool inside =
          k1 >= off && k1 < off + points && k2 >= off && k2 < off + points;
      if (inside) {
        for (int c = 0; c < f.components(); ++c)
          out.at(c, k1 - off, k2 - off) = f.at(c, k1, k2);
      } else if (f.modulus(f.grid().index(k1, k2)) > thr) {
        throw AliasingError("crop would drop non-negligible content");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- products

namespace {

void check_product_band(const SpectralField& f, const SpectralField& g) {
  const double rf = f.support_radius();
  const double rg = g.support_radius();
  const double limit = 2.0 * f.grid().half_extent() * (1.0 - kBandMargin);
  if (rf + rg > limit)
    throw AliasingError(fmt("combined support %.6g exceeds the padded band %.6g", rf + rg, limit));
}

SpectralField products_of(const PhysicalField& a, const PhysicalField& b, Rank rank,
                          bool outer) {
  PhysicalField prod(a.grid(), rank, a.real() && b.real());
  const std::size_t n = a.grid().size();
  const int na = a.components();
  const int nb = b.components();
  for (int c = 0; c < component_count(rank); ++c) {
    const int ia = outer ? c / nb : (na == 1 ? 0 : c);
    const int ib = outer ? c % nb : (nb == 1 ? 0 : c);
    auto pa = a.component(ia);
    auto pb = b.component(ib);
    auto dst = prod.component(c);
    for (std::size_t i = 0; i < n; ++i) dst[i] = pa[i] * pb[i];
  }
  return to_spectral(prod);
}

}  // namespace

SpectralField spectral_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g, "spectral_product");
  if (f.rank() != Rank::kScalar && g.rank() != Rank::kScalar && f.rank() != g.rank())
    throw ConfigError("spectral_product needs a scalar factor or equal ranks");
  check_product_band(f, g);
  const Rank rank = f.rank() == Rank::kScalar ? g.rank() : f.rank();
  const PhysicalField pf = padded_physical(f, 2);
  const PhysicalField pg = padded_physical(g, 2);
  return products_of(pf, pg, rank, false);
}

SpectralField outer_product(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u, v, "outer_product");
  if (u.rank() != Rank::kVector || v.rank() != Rank::kVector)
    throw ConfigError("outer_product expects two vector fields");
  check_product_band(u, v);
  const PhysicalField pu = padded_physical(u, 2);
  const PhysicalField pv = padded_physical(v, 2);
  return products_of(pu, pv, Rank::kTensor, true);
}

// ---------------------------------------------------------------- packets

PacketField::PacketField(RadialProfile envelope, double envelope_radius, Symbol multiplier,
                         std::vector<Packet> packets)
    : envelope_(envelope), envelope_radius_(envelope_radius),
      multiplier_(std::move(multiplier)), packets_(std::move(packets)) {
  if (envelope_ == nullptr) throw ConfigError("packet envelope is missing");
  if (multiplier_.cols() != 1) throw ConfigError("packet multiplier must have one column");
  rank_for_components(multiplier_.rows());
  if (!(envelope_radius_ > 0.0)) throw ConfigError("envelope radius must be positive");
}

bool PacketField::real() const {
  if (!multiplier_.hermitian()) return false;
  for (const auto& p : packets_) {
    const bool mirrored = std::any_of(packets_.begin(), packets_.end(), [&](const Packet& q) {
      return q.center.x1 == -p.center.x1 && q.center.x2 == -p.center.x2 &&
             q.weight == std::conj(p.weight);
    });
    if (!mirrored) return false;
  }
  return true;
}

double PacketField::support_radius() const {
  double r = 0.0;
  for (const auto& p : packets_) r = std::max(r, norm(p.center) + envelope_radius_);
  return r;
}

void PacketField::evaluate(Vec2 xi, std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  std::vector<cplx> tmp(out.size());
  for (std::size_t p = 0; p < packets_.size(); ++p) {
    const Vec2 d{xi.x1 - packets_[p].center.x1, xi.x2 - packets_[p].center.x2};
    const double r = norm(d);
    if (r >= envelope_radius_) continue;
    const double env = envelope_(r);
    if (env == 0.0) continue;
    multiplier_(xi, tmp);
    const cplx s = env * packets_[p].weight;
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += s * tmp[c];
  }
}

PacketField PacketField::scaled(cplx factor) const {
  PacketField out = *this;
  for (auto& p : out.packets_) p.weight *= factor;
  return out;
}

PacketField PacketField::plus(const PacketField& other) const {
  if (other.components() != components() || other.envelope_radius_ != envelope_radius_)
    throw ConfigError("packet fields must share envelope and multiplier shape");
  PacketField out = *this;
  out.packets_.insert(out.packets_.end(), other.packets_.begin(), other.packets_.end());
  return out;
}

Symbol PacketField::as_symbol() const {
  auto self = std::make_shared<PacketField>(*this);
  return Symbol(components(), 1, [self](Vec2 xi, std::span<cplx> out) { self->evaluate(xi, out); },
                real());
}

// ---------------------------------------------------------------- convolution

namespace {

// Window nodes processed in row order. For real outputs a node whose mirror
// was already produced is filled by conjugation.
template <class NodeFn>
SpectralField run_window(const Window& window, Rank rank, bool real, NodeFn&& node_fn) {
  const FrequencyGrid& g = window.grid;
  const int K = g.points();
  const int nc = component_count(rank);
  SpectralField out(g, rank, real);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t row) {
    const int k1 = static_cast<int>(row);
    std::vector<cplx> acc(static_cast<std::size_t>(nc));
    for (int k2 = 0; k2 < K; ++k2) {
      const Vec2 xi = g.node(k1, k2);
      if (norm(xi) > window.radius) continue;
      if (real && k1 >= 1 && k2 >= 1 && g.index(K - k1, K - k2) < g.index(k1, k2)) continue;
      std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
      node_fn(xi, acc);
      for (int c = 0; c < nc; ++c) out.at(c, k1, k2) = acc[c];
    }
  });
  if (real) {
    for (int k1 = 1; k1 < K; ++k1)
      for (int k2 = 1; k2 < K; ++k2) {
        const std::size_t i = g.index(k1, k2);
        if (g.index(K - k1, K - k2) < i && norm(g.node(k1, k2)) <= window.radius)
          for (int c = 0; c < nc; ++c) out.at(c, k1, k2) = std::conj(out.at(c, K - k1, K - k2));
      }
  }
  return out;
}

}  // namespace

SpectralField windowed_convolution(const SpectralField& f, const Symbol& g, const Window& window,
                                   const ConvolutionOptions& opts) {
  if (g.cols() != 1) throw ConfigError("convolution factor must be a column symbol");
  const int a = f.components();
  const int b = g.rows();
  const Rank rank = rank_for_components(a * b);
  const FrequencyGrid& fg = f.grid();
  const double thr = kSupportTol * f.max_modulus();
  std::vector<Vec2> nodes;
  std::vector<cplx> vals;
  for (int k1 = 0; k1 < fg.points(); ++k1)
    for (int k2 = 0; k2 < fg.points(); ++k2) {
      const std::size_t i = fg.index(k1, k2);
      if (thr == 0.0 || f.modulus(i) <= thr) continue;
      nodes.push_back(fg.node(k1, k2));
      for (int c = 0; c < a; ++c) vals.push_back(f.component(c)[i]);
    }
  if (nodes.size() > opts.node_budget)
    throw BudgetError("convolution needs " + std::to_string(nodes.size()) +
                      " active nodes, budget is " + std::to_string(opts.node_budget));
  const double w = std::pow(fg.spacing() / kTwoPi, 2);
  return run_window(window, rank, f.real() && g.hermitian(), [&](Vec2 xi, std::vector<cplx>& acc) {
    std::vector<cplx> gv(static_cast<std::size_t>(b));
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      g({xi.x1 - nodes[n].x1, xi.x2 - nodes[n].x2}, gv);
      for (int m = 0; m < a; ++m)
        for (int k = 0; k < b; ++k) acc[m * b + k] += vals[n * a + m] * gv[k];
    }
    for (auto& v : acc) v *= w;
  });
}

SpectralField windowed_convolution(const PacketField& f, const PacketField& g,
                                   const Window& window, const ConvolutionOptions& opts) {
  const int a = f.components();
  const int b = g.components();
  const Rank rank = rank_for_components(a * b);
  const double he = opts.envelope_spacing;
  if (!(he > 0.0)) throw ConfigError("envelope spacing must be positive");
  const double rf = f.envelope_radius();
  const double rg = g.envelope_radius();

  // Packet-local lattice of f with its values (weight and multiplier included).
  struct Local {
    std::vector<Vec2> delta;
    std::vector<cplx> val;
  };
  std::vector<Local> local(f.packets().size());
  const int span = static_cast<int>(std::ceil(rf / he));
  std::size_t total = 0;
  std::vector<cplx> tmp(static_cast<std::size_t>(a));
  for (std::size_t p = 0; p < f.packets().size(); ++p) {
    for (int i = -span; i <= span; ++i)
      for (int j = -span; j <= span; ++j) {
        const Vec2 d{he * i, he * j};
        if (opts.screen_pairs && norm(d) > rf) continue;
        f.evaluate_local(p, d, tmp);
        if (opts.screen_pairs && std::all_of(tmp.begin(), tmp.end(), [](cplx v) { return v == 0.0; }))
          continue;
        local[p].delta.push_back(d);
        local[p].val.insert(local[p].val.end(), tmp.begin(), tmp.end());
      }
    total += local[p].delta.size();
  }
  if (total > opts.node_budget)
    throw BudgetError("convolution needs " + std::to_string(total) +
                      " active nodes, budget is " + std::to_string(opts.node_budget));
  const double w = std::pow(he / kTwoPi, 2);
  return run_window(window, rank, f.real() && g.real(), [&](Vec2 xi, std::vector<cplx>& acc) {
    std::vector<cplx> gv(static_cast<std::size_t>(b));
    for (std::size_t p = 0; p < f.packets().size(); ++p) {
      const Vec2 cp = f.packets()[p].center;
      for (std::size_t q = 0; q < g.packets().size(); ++q) {
        const Vec2 cq = g.packets()[q].center;
        // Position of xi relative to the pair's summed center.
        const Vec2 base{(xi.x1 - cp.x1) - cq.x1, (xi.x2 - cp.x2) - cq.x2};
        if (opts.screen_pairs && norm(base) > rf + rg) continue;
        const Local& L = local[p];
        for (std::size_t n = 0; n < L.delta.size(); ++n) {
          const Vec2 d{base.x1 - L.delta[n].x1, base.x2 - L.delta[n].x2};
          g.evaluate_local(q, d, gv);
          for (int m = 0; m < a; ++m) {
            const cplx fv = L.val[n * a + m];
            for (int k = 0; k < b; ++k) acc[m * b + k] += fv * gv[k];
          }
        }
      }
    }
    for (auto& v : acc) v *= w;
  });
}

// ---------------------------------------------------------------- resampling

namespace {

// Nonuniform transform fhat(xi) = dx^2 sum_m f(x_m) e^{-i x_m . xi} on the
// target nodes with |xi| <= radius, restricted to the significant box.
SpectralField nudft(const PhysicalField& phys, const FrequencyGrid& target, double radius,
                    bool real) {
  const FrequencyGrid& src = phys.grid();
  const Box box = significant_box(phys, 1e-15);
  const double dx = src.physical_spacing();
  std::vector<int> t_idx;
  for (int t = 0; t < target.points(); ++t)
    if (std::abs(target.node(t)) <= radius) t_idx.push_back(t);
  const std::size_t nt = t_idx.size();
  const int n1 = box.hi1 - box.lo1 + 1;
  const int n2 = box.hi2 - box.lo2 + 1;

  auto twiddles = [&](int lo, int n) {
    std::vector<cplx> e(static_cast<std::size_t>(n) * nt);
    for (int m = 0; m < n; ++m) {
      const double x = src.position(lo + m);
      for (std::size_t t = 0; t < nt; ++t) e[m * nt + t] = std::polar(1.0, -x * target.node(t_idx[t]));
    }
    return e;
  };
  const std::vector<cplx> e1 = twiddles(box.lo1, n1);
  const std::vector<cplx> e2 = twiddles(box.lo2, n2);

  SpectralField out(target, phys.rank(), real);
  const double w = dx * dx;
  for (int c = 0; c < phys.components(); ++c) {
    auto f = phys.component(c);
    // Stage 1: transform along x2 for each retained x1 row.
    std::vector<cplx> stage(static_cast<std::size_t>(n1) * nt, cplx(0.0, 0.0));
    parallel_for(static_cast<std::size_t>(n1), [&](std::size_t r) {
      cplx* dst = &stage[r * nt];
      const int m1 = box.lo1 + static_cast<int>(r);
      for (int m2 = 0; m2 < n2; ++m2) {
        const cplx v = f[src.index(m1, box.lo2 + m2)];
        if (v == 0.0) continue;
        const cplx* e = &e2[static_cast<std::size_t>(m2) * nt];
        for (std::size_t t = 0; t < nt; ++t) dst[t] += v * e[t];
      }
    });
    // Stage 2: transform along x1.
    parallel_for(nt, [&](std::size_t t1) {
      std::vector<cplx> row(nt, cplx(0.0, 0.0));
      for (int m1 = 0; m1 < n1; ++m1) {
        const cplx e = e1[static_cast<std::size_t>(m1) * nt + t1];
        const cplx* s = &stage[static_cast<std::size_t>(m1) * nt];
        for (std::size_t t2 = 0; t2 < nt; ++t2) row[t2] += e * s[t2];
      }
      const int k1 = t_idx[t1];
      for (std::size_t t2 = 0; t2 < nt; ++t2) {
        const int k2 = t_idx[t2];
        if (norm(target.node(k1, k2)) <= radius) out.at(c, k1, k2) = w * row[t2];
      }
    });
  }
  return out;
}

PhysicalField decayed_physical(const SpectralField& src) {
  PhysicalField phys = to_physical(src);
  const double edge = edge_fraction(phys);
  if (edge > 1e-8)
    throw AliasingError(fmt("source has not decayed at the torus edge (%.3g of max, period %.6g)",
                            edge, src.grid().period()));
  return phys;
}

}  // namespace

SpectralField resample(const SpectralField& src, const FrequencyGrid& target, double radius) {
  if (radius > src.grid().half_extent())
    throw AliasingError(fmt("target radius %.6g leaves the source band %.6g", radius,
                            src.grid().half_extent()));
  return nudft(decayed_physical(src), target, radius, src.real());
}

void evaluate_interpolated(const SpectralField& f, Vec2 xi, std::span<cplx> out) {
  const PhysicalField phys = decayed_physical(f);
  const FrequencyGrid& g = phys.grid();
  const Box box = significant_box(phys, 1e-15);
  const double w = std::pow(g.physical_spacing(), 2);
  for (int c = 0; c < f.components(); ++c) {
    cplx s(0.0, 0.0);
    for (int m1 = box.lo1; m1 <= box.hi1; ++m1) {
      cplx row(0.0, 0.0);
      for (int m2 = box.lo2; m2 <= box.hi2; ++m2)
        row += phys.at(c, m1, m2) * std::polar(1.0, -g.position(m2) * xi.x2);
      s += row * std::polar(1.0, -g.position(m1) * xi.x1);
    }
    out[c] = w * s;
  }
}

FrequencyGrid block_grid(int j, int points, double nodes_per_unit) {
  if (!(nodes_per_unit > 0.0)) throw ConfigError("nodes per unit must be positive");
  FrequencyGrid g(std::ldexp(1.0, j) / nodes_per_unit, points);
  if (g.half_extent() * (1.0 - kBandMargin) < std::ldexp(1.0, j + 1))
    throw ConfigError("block grid does not cover the annulus of block " + std::to_string(j));
  return g;
}

double block_radius(int j) { return std::ldexp(1.0, j + 1) * (1.0 + kBandMargin); }

SpectralField sample_on_disk(const Symbol& f, const FrequencyGrid& g, double r) {
  const int n = f.entries();
  SpectralField out(g, rank_for_components(n), f.hermitian());
  std::vector<cplx> buf(static_cast<std::size_t>(n));
  for (int k1 = 0; k1 < g.points(); ++k1)
    for (int k2 = 0; k2 < g.points(); ++k2) {
      const Vec2 xi = g.node(k1, k2);
      if (norm(xi) > r) continue;
      f(xi, buf);
      for (int c = 0; c < n; ++c) {
        if (!std::isfinite(buf[c].real()) || !std::isfinite(buf[c].imag()))
          throw SingularityError(fmt("symbol is not finite at node (%g, %g)", xi.x1, xi.x2));
        out.at(c, k1, k2) = buf[c];
      }
    }
  return out;
}

SpectralField resample_to_block(const Symbol& f, int j, int points) {
  return sample_on_disk(f, block_grid(j, points), block_radius(j));
}

SpectralField resample_to_block(const SpectralField& f, int j, int points) {
  return resample(f, block_grid(j, points), block_radius(j));
}

}  // namespace sns
