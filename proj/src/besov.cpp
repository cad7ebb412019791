#include "sns/besov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>

#include <boost/math/special_functions/ellint_2.hpp>

#include "sns/multipliers.hpp"
#include "sns/parallel.hpp"

namespace sns {

double holder_conjugate(double p) {
  if (!(p >= 1.0)) throw ConfigError("Hoelder conjugate needs p >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

void BesovParams::validate() const {
  if (!(p >= 1.0)) throw ConfigError("p must satisfy 1 <= p <= inf");
  if (!(q >= 1.0)) throw ConfigError("q must satisfy 1 <= q <= inf");
  if (!std::isfinite(s)) throw ConfigError("s must be finite");
  if (jmin > jmax) throw ConfigError("empty block range");
}

namespace {

std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// |f|^p is smooth across sign changes only for even integer p.
bool smooth_exponent(double p) {
  return std::isinf(p) || (p == 2.0 * std::round(p / 2.0));
}

// Trigonometric interpolant of a sampled transform:
// f(x) = (h / 2 pi)^2 sum_k fhat(xi_k) e^{i x . xi_k} over the nonzero nodes.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const SpectralField& f) : f_(f), g_(f.grid()) {
    const int K = g_.points();
    for (int k1 = 0; k1 < K; ++k1) {
      bool any = false;
      for (int k2 = 0; k2 < K; ++k2) any = any || f.modulus(g_.index(k1, k2)) != 0.0;
      if (any) rows_.push_back(k1);
    }
    for (int k2 = 0; k2 < K; ++k2) {
      bool any = false;
      for (int k1 : rows_) any = any || f.modulus(g_.index(k1, k2)) != 0.0;
      if (any) cols_.push_back(k2);
    }
    e1_.resize(rows_.size());
    e2_.resize(cols_.size());
  }

  void operator()(Vec2 x, std::span<cplx> out) {
    for (std::size_t a = 0; a < rows_.size(); ++a) e1_[a] = std::polar(1.0, x.x1 * g_.node(rows_[a]));
    for (std::size_t b = 0; b < cols_.size(); ++b) e2_[b] = std::polar(1.0, x.x2 * g_.node(cols_[b]));
    const double scale = std::pow(g_.spacing() / kTwoPi, 2);
    for (int c = 0; c < f_.components(); ++c) {
      auto v = f_.component(c);
      cplx s(0.0, 0.0);
      for (std::size_t a = 0; a < rows_.size(); ++a) {
        cplx row(0.0, 0.0);
        const std::size_t base = g_.index(rows_[a], 0);
        for (std::size_t b = 0; b < cols_.size(); ++b) row += v[base + cols_[b]] * e2_[b];
        s += row * e1_[a];
      }
      out[c] = scale * s;
    }
  }

 private:
  const SpectralField& f_;
  FrequencyGrid g_;
  std::vector<int> rows_, cols_;
  std::vector<cplx> e1_, e2_;
};

// Local maxima of a lattice function, largest first (at most `count`).
std::vector<std::size_t> lattice_peaks(const std::vector<double>& v, int K, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> peaks;
  for (int m1 = 0; m1 < K; ++m1)
    for (int m2 = 0; m2 < K; ++m2) {
      const std::size_t i = static_cast<std::size_t>(m1) * K + m2;
      if (v[i] == 0.0) continue;
      bool top = true;
      for (int d1 = -1; d1 <= 1 && top; ++d1)
        for (int d2 = -1; d2 <= 1 && top; ++d2) {
          if (d1 == 0 && d2 == 0) continue;
          const int n1 = (m1 + d1 + K) % K, n2 = (m2 + d2 + K) % K;
          const std::size_t j = static_cast<std::size_t>(n1) * K + n2;
          top = v[j] < v[i] || (v[j] == v[i] && j > i);
        }
      if (top) peaks.emplace_back(v[i], i);
    }
  std::sort(peaks.begin(), peaks.end(),
            [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < peaks.size() && k < count; ++k) out.push_back(peaks[k].second);
  return out;
}

// Pattern search for a local maximum of `value` starting at x with step dx/2.
template <class Fn>
double climb(Fn&& value, Vec2 x, double dx) {
  double best = value(x);
  double step = 0.5 * dx;
  const double stop = 1e-7 * dx;
  static const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (step > stop) {
    bool moved = false;
    for (const auto& d : dirs) {
      const Vec2 y{x.x1 + d[0] * step, x.x2 + d[1] * step};
      const double v = value(y);
      if (v > best) {
        best = v;
        x = y;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

// Polishes the few largest lattice peaks of value(x) and returns the best.
template <class Fn>
double polish_peaks(Fn&& value, const std::vector<double>& lattice, const FrequencyGrid& g) {
  const int K = g.points();
  double best = *std::max_element(lattice.begin(), lattice.end());
  if (best == 0.0) return 0.0;
  for (std::size_t i : lattice_peaks(lattice, K, 4)) {
    if (lattice[i] < 0.5 * best) break;
    const Vec2 x{g.position(static_cast<int>(i / K)), g.position(static_cast<int>(i % K))};
    best = std::max(best, climb(value, x, g.physical_spacing()));
  }
  return best;
}

// Bernstein: |grad f| <= R sup |f|, and every point lies within dx / sqrt 2
// of a lattice node.
double bernstein_inflation(double radius, double dx) {
  const double t = radius * dx / std::sqrt(2.0);
  return t < 1.0 ? 1.0 / (1.0 - t) : kInf;
}

struct Level {
  double norm = 0.0;
  double spacing = 0.0;
  int points = 0;
  double inflation = 1.0;
};

Level lattice_level(const SpectralField& blk, double p, int factor) {
  const SpectralField f = factor == 1 ? blk : zero_pad(blk, factor);
  const PhysicalField phys = to_physical(f);
  Level l;
  l.spacing = f.grid().spacing();
  l.points = f.grid().points();
  if (std::isinf(p)) {
    l.norm = polished_sup(f, phys);
    l.inflation = bernstein_inflation(f.support_radius(), f.grid().physical_spacing());
  } else {
    l.norm = lp_norm(phys, p);
  }
  return l;
}

void finish(BlockReport& r, const Level& coarse, const Level& fine, const BlockOptions& opts) {
  r.norm = fine.norm;
  r.weighted = std::exp2(r.s * r.j) * fine.norm;
  r.spacing = fine.spacing;
  r.points = fine.points;
  r.sup_inflation = fine.inflation;
  r.coarse_norm = coarse.norm;
  r.refinement_error = fine.norm > 0.0 ? std::abs(fine.norm - coarse.norm) / fine.norm : 0.0;
  const double tol = smooth_exponent(r.p) ? opts.tol : std::max(opts.tol, opts.nonsmooth_tol);
  r.flagged = r.refinement_error > tol;
  if (r.refinement_error > 100.0 * tol)
    throw NumericalError(fmt("block quadrature did not converge: refinement error %.3g at j = %g",
                             r.refinement_error, r.j));
}

BlockReport empty_report(int j, double p, double s) {
  BlockReport r;
  r.j = j;
  r.p = p;
  r.s = s;
  r.method = "empty";
  return r;
}

void check_exponent(double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p exponent must satisfy 1 <= p <= inf");
}

// ---- modulated packets

// Average over the fast phase t of |2 Re(e^{it} E)|^p given R = |E|^2 and
// S = |E . E|: |.|^2 = 2R + 2S cos(2t + a).
double phase_average(double R, double S, double p) {
  if (R <= 0.0) return 0.0;
  if (p == 2.0) return 2.0 * R;
  if (p == 4.0) return 4.0 * R * R + 2.0 * S * S;
  const double top = 2.0 * (R + S);
  if (p == 1.0) {
    const double k = std::sqrt(std::min(1.0, 2.0 * S / (R + S)));
    return std::sqrt(top) * (2.0 / kPi) * boost::math::ellint_2(k);
  }
  constexpr int n = 256;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m2 = std::max(0.0, 2.0 * R + 2.0 * S * std::cos(kTwoPi * i / n));
    acc += std::pow(m2, 0.5 * p);
  }
  return acc / n;
}

struct ActivePacket {
  Vec2 center;
  SpectralField local;  // Ehat on the envelope grid.
  bool mirrored;
};

// Groups packets by center, forms the block-filtered local spectra and drops
// the ones that vanish identically. Returns false when the block cannot be
// treated as one modulated envelope (with or without its mirror).
bool single_modulation(const PacketField& f, int j, const BlockOptions& opts, ActivePacket& out,
                       bool& empty) {
  const FrequencyGrid ge(opts.envelope_spacing, opts.envelope_points);
  const double rho = f.envelope_radius();
  std::map<std::pair<double, double>, cplx> groups;
  for (const auto& pk : f.packets()) groups[{pk.center.x1, pk.center.x2}] += pk.weight;

  struct Local {
    Vec2 c;
    cplx w;
    std::size_t first;
  };
  std::vector<Local> act;
  std::vector<SpectralField> spectra;
  const double lo = std::ldexp(1.0, j - 1), hi = std::ldexp(1.0, j + 1);
  std::vector<cplx> buf(static_cast<std::size_t>(f.components()));
  for (const auto& [key, w] : groups) {
    const Vec2 c{key.first, key.second};
    const double rc = norm(c);
    if (w == 0.0 || rc + rho < lo || rc - rho > hi) continue;
    // Packet index carrying this center, for packet-local multiplier evaluation.
    std::size_t idx = 0;
    while (f.packets()[idx].center.x1 != c.x1 || f.packets()[idx].center.x2 != c.x2) ++idx;
    const cplx w0 = f.packets()[idx].weight;
    SpectralField e(ge, f.rank(), false);
    bool any = false;
    const int K = ge.points();
    for (int k1 = 0; k1 < K; ++k1)
      for (int k2 = 0; k2 < K; ++k2) {
        const Vec2 d = ge.node(k1, k2);
        if (d.x1 * d.x1 + d.x2 * d.x2 >= rho * rho) continue;
        const double phi = lp_block_value(j, norm(Vec2{c.x1 + d.x1, c.x2 + d.x2}));
        if (phi == 0.0) continue;
        f.evaluate_local(idx, d, buf);
        for (int cc = 0; cc < f.components(); ++cc) {
          const cplx v = phi * buf[cc] * (w / w0);
          e.at(cc, k1, k2) = v;
          any = any || v != 0.0;
        }
      }
    if (!any) continue;
    act.push_back({c, w, idx});
    spectra.push_back(std::move(e));
  }
  empty = act.empty();
  if (empty) return true;
  auto modulated = [&](const Local& a) { return norm(a.c) > 2.0 * rho; };
  if (act.size() == 1) {
    if (!modulated(act[0])) return false;
    out = {act[0].c, std::move(spectra[0]), false};
    return true;
  }
  if (act.size() == 2 && modulated(act[0])) {
    const Local& a = act[0];
    const Local& b = act[1];
    const bool mirror = b.c.x1 == -a.c.x1 && b.c.x2 == -a.c.x2 &&
                        std::abs(b.w - std::conj(a.w)) <= 1e-14 * std::abs(a.w) &&
                        f.multiplier().hermitian();
    if (!mirror) return false;
    // Keep the member with the larger first coordinate (then second).
    const bool first = a.c.x1 > b.c.x1 || (a.c.x1 == b.c.x1 && a.c.x2 > b.c.x2);
    out = {first ? a.c : b.c, std::move(spectra[first ? 0 : 1]), true};
    return true;
  }
  return false;
}

Level two_scale_level(const ActivePacket& a, double p, int factor) {
  const SpectralField f = factor == 1 ? a.local : zero_pad(a.local, factor);
  const PhysicalField E = to_physical(f);
  const FrequencyGrid& g = f.grid();
  const std::size_t n = g.size();
  const int nc = f.components();
  Level l;
  l.spacing = g.spacing();
  l.points = g.points();

  auto rs = [&](auto get) {
    double R = 0.0;
    cplx dot(0.0, 0.0);
    for (int c = 0; c < nc; ++c) {
      const cplx v = get(c);
      R += std::norm(v);
      dot += v * v;
    }
    return std::pair<double, double>(R, std::abs(dot));
  };

  if (std::isinf(p)) {
    std::vector<double> lattice(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [R, S] = rs([&](int c) { return E.component(c)[i]; });
      lattice[i] = a.mirrored ? std::sqrt(2.0 * (R + S)) : std::sqrt(R);
    }
    TrigInterpolant interp(f);
    std::vector<cplx> buf(static_cast<std::size_t>(nc));
    auto value = [&](Vec2 x) {
      interp(x, buf);
      const auto [R, S] = rs([&](int c) { return buf[c]; });
      return a.mirrored ? std::sqrt(2.0 * (R + S)) : std::sqrt(R);
    };
    l.norm = polish_peaks(value, lattice, g);
    l.inflation = kInf;
    return l;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [R, S] = rs([&](int c) { return E.component(c)[i]; });
    acc += a.mirrored ? phase_average(R, S, p) : std::pow(R, 0.5 * p);
  }
  l.norm = std::pow(std::pow(g.physical_spacing(), 2) * acc, 1.0 / p);
  return l;
}

// Samples the oscillation along x1 on rows of the envelope grid, upsampling
// each row of E by periodic interpolation.
Level explicit_level(const ActivePacket& a, double p, int nodes_per_period, std::size_t budget) {
  if (a.center.x2 != 0.0)
    throw ConfigError("explicit packet quadrature needs centers on the x1 axis");
  const PhysicalField E = to_physical(a.local);
  const FrequencyGrid& g = E.grid();
  const int K = g.points();
  const double dx = g.physical_spacing();
  const double c1 = a.center.x1;
  const int up = std::max(1, static_cast<int>(std::ceil(std::abs(c1) * dx * nodes_per_period / kTwoPi)));
  const std::size_t nf = static_cast<std::size_t>(K) * static_cast<std::size_t>(up);
  if (nf * static_cast<std::size_t>(K) > budget)
    throw BudgetError(fmt("explicit quadrature needs %.3g samples (budget %.3g)",
                          static_cast<double>(nf) * K, static_cast<double>(budget)));
  const int nc = E.components();
  const double dxf = dx / up;
  const double x0 = g.position(0);
  std::vector<double> rows(static_cast<std::size_t>(K), 0.0);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t m2) {
    std::vector<std::vector<cplx>> fine(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
      std::vector<cplx> row(static_cast<std::size_t>(K));
      for (int m1 = 0; m1 < K; ++m1) row[m1] = E.at(c, m1, static_cast<int>(m2));
      detail::dft_1d(row, -1);
      std::vector<cplx> pad(nf, cplx(0.0, 0.0));
      for (int k = 0; k < K / 2; ++k) pad[k] = row[k];
      for (int k = K / 2; k < K; ++k) pad[nf - K + k] = row[k];
      detail::dft_1d(pad, +1);
      for (auto& v : pad) v /= static_cast<double>(K);
      fine[c] = std::move(pad);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
      const cplx ph = std::polar(1.0, c1 * (x0 + dxf * static_cast<double>(i)));
      double m2sum = 0.0;
      for (int c = 0; c < nc; ++c) {
        const cplx v = ph * fine[c][i];
        m2sum += a.mirrored ? 4.0 * v.real() * v.real() : std::norm(v);
      }
      const double mod = std::sqrt(m2sum);
      acc = std::isinf(p) ? std::max(acc, mod) : acc + std::pow(mod, p);
    }
    rows[m2] = acc;
  });
  Level l;
  l.spacing = g.spacing();
  l.points = K;
  l.inflation = kInf;
  if (std::isinf(p)) {
    l.norm = *std::max_element(rows.begin(), rows.end());
  } else {
    double acc = 0.0;
    for (double r : rows) acc += r;
    l.norm = std::pow(dx * dxf * acc, 1.0 / p);
  }
  return l;
}

}  // namespace

double polished_sup(const SpectralField& fhat, const PhysicalField& phys) {
  const FrequencyGrid& g = phys.grid();
  std::vector<double> lattice(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) lattice[i] = phys.modulus(i);
  TrigInterpolant interp(fhat);
  std::vector<cplx> buf(static_cast<std::size_t>(fhat.components()));
  auto value = [&](Vec2 x) {
    interp(x, buf);
    double m2 = 0.0;
    for (const auto& v : buf) m2 += fhat.real() ? v.real() * v.real() : std::norm(v);
    return std::sqrt(m2);
  };
  return polish_peaks(value, lattice, g);
}

BlockReport block_norm(const BlockSampler& sampler, int j, double p, double s,
                       const BlockOptions& opts) {
  check_exponent(p);
  const FrequencyGrid g = block_grid(j, opts.points, opts.nodes_per_unit);
  const SpectralField blk = lp_block(sampler(g, block_radius(j)), j);
  if (blk.max_modulus() == 0.0) return empty_report(j, p, s);
  BlockReport r = empty_report(j, p, s);
  const int base = smooth_exponent(p) ? 1 : std::max(1, opts.oversample_nonsmooth);
  const Level coarse = lattice_level(blk, p, base);
  const Level fine = opts.refine ? lattice_level(blk, p, 2 * base) : coarse;
  r.method = std::isinf(p) ? "lattice+polish" : "lattice";
  finish(r, coarse, fine, opts);
  return r;
}

BlockReport block_norm(const Symbol& f, int j, double p, double s, const BlockOptions& opts) {
  return block_norm(
      BlockSampler([&f](const FrequencyGrid& g, double r) { return sample_on_disk(f, g, r); }), j,
      p, s, opts);
}

BlockReport block_norm(const SpectralField& f, int j, double p, double s,
                       const BlockOptions& opts) {
  return block_norm(
      BlockSampler([&f](const FrequencyGrid& g, double r) { return resample(f, g, r); }), j, p, s,
      opts);
}

BlockReport block_norm(const PacketField& f, int j, double p, double s, const BlockOptions& opts) {
  check_exponent(p);
  ActivePacket a{{}, SpectralField(FrequencyGrid(1.0, 8), Rank::kScalar, false), false};
  bool empty = false;
  if (!single_modulation(f, j, opts, a, empty)) {
    // Unmodulated content: sample the closed form on the block grid.
    BlockReport r = block_norm(f.as_symbol(), j, p, s, opts);
    r.method = "symbol/" + r.method;
    return r;
  }
  if (empty) return empty_report(j, p, s);
  BlockReport r = empty_report(j, p, s);
  Level coarse, fine;
  if (opts.quadrature == PacketQuadrature::kExplicit) {
    coarse = explicit_level(a, p, opts.nodes_per_period, opts.explicit_budget);
    fine = opts.refine ? explicit_level(a, p, 2 * opts.nodes_per_period, opts.explicit_budget)
                       : coarse;
    r.method = "explicit";
  } else {
    const int base = smooth_exponent(p) ? 1 : std::max(1, opts.oversample_nonsmooth);
    coarse = two_scale_level(a, p, base);
    fine = opts.refine ? two_scale_level(a, p, 2 * base) : coarse;
    r.method = "two-scale";
  }
  finish(r, coarse, fine, opts);
  return r;
}

std::vector<BlockReport> block_table(const std::function<BlockReport(int)>& one, int jmin,
                                     int jmax) {
  if (jmin > jmax) throw ConfigError("empty block range");
  std::vector<BlockReport> out(static_cast<std::size_t>(jmax - jmin + 1));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = one(jmin + static_cast<int>(i)); });
  return out;
}

double lq_aggregate(const std::vector<BlockReport>& blocks, double q, int jmin, int jmax) {
  if (!(q >= 1.0)) throw ConfigError("q must satisfy 1 <= q <= inf");
  std::vector<BlockReport> sorted;
  for (const auto& b : blocks)
    if (b.j >= jmin && b.j <= jmax) sorted.push_back(b);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const BlockReport& a, const BlockReport& b) { return a.j < b.j; });
  double mx = 0.0;
  for (const auto& b : sorted) mx = std::max(mx, b.weighted);
  if (std::isinf(q) || mx == 0.0) return mx;
  double acc = 0.0;
  for (const auto& b : sorted) acc += std::pow(b.weighted / mx, q);
  return mx * std::pow(acc, 1.0 / q);
}

double lq_aggregate(const std::vector<BlockReport>& blocks, double q) {
  if (blocks.empty()) return 0.0;
  int lo = blocks.front().j, hi = blocks.front().j;
  for (const auto& b : blocks) {
    lo = std::min(lo, b.j);
    hi = std::max(hi, b.j);
  }
  return lq_aggregate(blocks, q, lo, hi);
}

namespace {

template <class F>
BesovPartial partial(const F& f, const BesovParams& params, const BlockOptions& opts) {
  params.validate();
  BesovPartial out;
  out.blocks = block_table([&](int j) { return block_norm(f, j, params.p, params.s, opts); },
                           params.jmin, params.jmax);
  out.value = lq_aggregate(out.blocks, params.q, params.jmin, params.jmax);
  return out;
}

}  // namespace

BesovPartial besov_partial(const Symbol& f, const BesovParams& params, const BlockOptions& opts) {
  return partial(f, params, opts);
}
BesovPartial besov_partial(const SpectralField& f, const BesovParams& params,
                           const BlockOptions& opts) {
  return partial(f, params, opts);
}
BesovPartial besov_partial(const PacketField& f, const BesovParams& params,
                           const BlockOptions& opts) {
  return partial(f, params, opts);
}
BesovPartial besov_partial(const BlockSampler& f, const BesovParams& params,
                           const BlockOptions& opts) {
  return partial(f, params, opts);
}

std::vector<int> occupied_blocks(const PacketField& f, int jfloor) {
  std::vector<int> out;
  const double rho = f.envelope_radius();
  for (const auto& pk : f.packets()) {
    if (pk.weight == 0.0) continue;
    const double rc = norm(pk.center);
    const double lo = rc - rho, hi = rc + rho;
    for (int j = static_cast<int>(std::floor(std::log2(hi))) + 1; j >= jfloor; --j) {
      if (std::ldexp(1.0, j - 1) > hi) continue;
      if (std::ldexp(1.0, j + 1) < lo) break;
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace sns
