#include "sns/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "sns/multipliers.hpp"

namespace sns {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double critical_s(double p) { return 2.0 / p - 1.0; }

// Lattice sum (h / 2 pi)^2 sum_k w(|xi_k|) theta(|xi_k|)^2 on (1/128, 544).
double psi_moment(double (*w)(double)) {
  const FrequencyGrid g(1.0 / 128.0, 544);
  double acc = 0.0;
  for (int k1 = 0; k1 < g.points(); ++k1)
    for (int k2 = 0; k2 < g.points(); ++k2) {
      const double r = norm(g.node(k1, k2));
      const double t = smooth_step(r);
      acc += w(r) * t * t;
    }
  const double c = g.spacing() / kTwoPi;
  return c * c * acc;
}

BlockSampler component_of(BlockSampler f, int c) {
  return [f = std::move(f), c](const FrequencyGrid& g, double r) { return f(g, r).extract(c); };
}

double sup_weighted(const std::vector<BlockReport>& blocks) {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, b.weighted);
  return m;
}

std::vector<BlockReport> sampler_table(const BlockSampler& f, double p, double s, int jmin,
                                       int jmax, const BlockOptions& opts) {
  return block_table([&](int j) { return block_norm(f, j, p, s, opts); }, jmin, jmax);
}

double relative_spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? (*hi - *lo) / *lo : kInf;
}

void check_n_list(const std::vector<int>& N, int least) {
  if (N.empty()) throw ConfigError("empty N list");
  for (int n : N)
    if (n < least) throw ConfigError(fmt("N = %g is below the minimum %g", n, least));
}

}  // namespace

double psi_l2_squared() {
  return psi_moment([](double) { return 1.0; });
}

double psi_h1_squared() {
  return psi_moment([](double r) { return r * r; });
}

Symbol leading_symbol() {
  return Symbol(
      2, 1,
      [](Vec2 z, std::span<cplx> out) {
        const double r2 = z.x1 * z.x1 + z.x2 * z.x2;
        const cplx f(0.0, z.x2 / (r2 * r2));
        out[0] = f * (-z.x1 * z.x2);
        out[1] = f * (z.x1 * z.x1);
      },
      true, std::vector<cplx>{0.0, 0.0});
}

ScalingLimit scaling_limit(double p, const BlockOptions& opts) {
  ScalingLimit out;
  out.p = p;
  out.w0 = psi_l2_squared();
  out.block = block_norm(leading_symbol(), 0, p, 0.0, opts);
  out.profile_norm = out.block.norm;
  out.value = out.w0 * out.profile_norm;
  return out;
}

LowerBoundCurve lower_bound_curve(double p, int jmin, int jmax, const BlockOptions& opts) {
  if (jmin > jmax || jmax > -2) throw ConfigError("lower_bound_curve needs jmin <= jmax <= -2");
  if (!(p >= 1.0)) throw ConfigError("p must satisfy 1 <= p <= inf");
  LowerBoundCurve out;
  out.p = p;
  const double s = critical_s(p);
  const BlockSampler g = leading_pair(kMinModulation).leading_sampler(1.0);
  out.blocks = sampler_table(g, p, s, jmin, jmax, opts);
  out.first = sampler_table(component_of(g, 0), p, s, jmin, jmax, opts);
  out.second = sampler_table(component_of(g, 1), p, s, jmin, jmax, opts);
  out.limit = scaling_limit(p, opts);
  out.min_a = kInf;
  for (const auto& b : out.blocks) out.min_a = std::min(out.min_a, b.weighted);
  out.tail_gap = std::abs(out.blocks.front().weighted - out.limit.value) / out.limit.value;
  return out;
}

// ---------------------------------------------------------------- generators

PacketField gen_case_i(int N, double p, double q, double M) {
  if (!(p >= 1.0)) throw ConfigError("case (i) needs 1 <= p <= inf");
  if (!(q >= 1.0) || std::isinf(q)) throw ConfigError("case (i) needs 1 <= q < inf");
  if (!(M >= kMinModulation) || !std::isfinite(M)) throw ConfigError("case (i) needs M >= 10");
  if (N < 1) throw ConfigError("case (i) needs N >= 1");
  return modulated_velocity(M, std::pow(static_cast<double>(N), -1.0 / (2.0 * q)));
}

PacketField gen_case_ii(int N) {
  if (N < kMinModulation) throw ConfigError("case (ii) needs N >= 10");
  return modulated_velocity(N, 1.0 / N);
}

std::vector<double> case_iii_frequencies(int N, double sigma) {
  std::vector<double> M;
  for (int j = 10; j <= N + 10; ++j) M.push_back(std::exp2(sigma * j));
  return M;
}

std::pair<PacketField, PacketField> gen_case_iii(int N, double p, double sigma, double max_log2) {
  if (!(p >= 1.0 && p < 2.0)) throw ConfigError("case (iii) needs 1 <= p < 2");
  if (!(sigma >= 2.0)) throw ConfigError("case (iii) needs sigma >= 2");
  if (N < 2) throw ConfigError("case (iii) needs N >= 2 (the weights carry 1/sqrt(log N))");
  if (sigma * (N + 10) > max_log2)
    throw BudgetError(fmt("largest frequency 2^%g exceeds the budget 2^%g; feasible N <= %g",
                          sigma * (N + 10), max_log2, std::floor(max_log2 / sigma) - 10.0));
  const std::vector<double> M = case_iii_frequencies(N, sigma);
  for (std::size_t i = 1; i < M.size(); ++i)
    if (M[i] - M[i - 1] < kMinFrequencyGap) throw ConfigError("frequency gap below 7");
  const double pc = holder_conjugate(p);
  const double c = 1.0 / std::sqrt(std::log(static_cast<double>(N)));
  std::vector<double> a, b;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double j = 10.0 + static_cast<double>(i);
    a.push_back(c * std::pow(M[i], -2.0 / p) / std::sqrt(j));
    b.push_back(c * (std::isinf(pc) ? 1.0 : std::pow(M[i], -2.0 / pc)) / std::sqrt(j));
  }
  return {modulated_sum(M, a), modulated_sum(M, b)};
}

BesovPartial packet_besov_norm(const PacketField& f, double p, double q, double s,
                               const BlockOptions& opts) {
  const std::vector<int> js = occupied_blocks(f);
  if (js.empty()) return {};
  BesovParams params{p, q, s, js.front(), js.back()};
  return besov_partial(f, params, opts);
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit needs equal-length data");
  PowerFit fit;
  const std::size_t n = x.size();
  fit.points = static_cast<int>(n);
  if (n < 2) {
    fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    fit.half_width = kInf;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n < 3) {
    fit.half_width = kInf;
    return fit;
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
    rss += e * e;
  }
  const double se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  boost::math::students_t t(static_cast<double>(n - 2));
  fit.half_width = boost::math::quantile(boost::math::complement(t, 0.025)) * se;
  return fit;
}

// ---------------------------------------------------------------- case (i)

CaseIReport run_case_i(const CaseIOptions& opts) {
  check_n_list(opts.N, 1);
  if (opts.dominance_J < 1) throw ConfigError("dominance_J must be >= 1");
  const double p = opts.p, q = opts.q, M = opts.M, s = critical_s(p);
  (void)gen_case_i(1, p, q, M);  // validates (p, q, M)
  CaseIReport rep;
  rep.options = opts;
  rep.a_inf = scaling_limit(p, opts.block).value;

  const int jmax = -2;
  const int Jmax = *std::max_element(opts.N.begin(), opts.N.end());
  const PacketField u1 = gen_case_i(1, p, q, M);
  const LowBilinear low = bilinear_B_low(u1, u1, jmax, opts.low);
  rep.b_blocks = sampler_table(low.sampler(), p, s, -Jmax - 2, jmax, opts.block);

  const LeadingPair lp = leading_pair(M, opts.low.envelope_spacing, opts.low.envelope_points);
  const int D = opts.dominance_J;
  rep.leading_blocks = sampler_table(lp.leading_sampler(0.5 * M * M), p, s, -std::max(D, Jmax) - 2,
                                     jmax, opts.block);
  rep.remainder_blocks = sampler_table(lp.remainder_sampler(0.5), p, s, -D - 2, jmax, opts.block);

  std::vector<double> scaled;
  double prev = 0.0;
  for (int N : opts.N) {
    CaseIRow row;
    row.N = N;
    row.J = N;
    row.u_norm = packet_besov_norm(gen_case_i(N, p, q, M), p, q, s, opts.block).value;
    row.u_norm_scaled = row.u_norm * std::pow(static_cast<double>(N), 1.0 / (2.0 * q));
    row.S = lq_aggregate(rep.b_blocks, q, -row.J - 2, jmax);
    row.S_leading = lq_aggregate(rep.leading_blocks, q, -row.J - 2, jmax);
    const double Jq = std::pow(static_cast<double>(row.J), 1.0 / q);
    row.normalized = row.S / (rep.a_inf * 0.5 * M * M * Jq);
    const double SN = std::pow(static_cast<double>(N), -1.0 / q) * row.S;
    row.ratio = SN / (row.u_norm * row.u_norm);
    row.growth = prev > 0.0 ? row.ratio / prev : std::numeric_limits<double>::quiet_NaN();
    prev = row.ratio;
    scaled.push_back(row.u_norm_scaled);
    rep.rows.push_back(row);
  }
  rep.prefactor_spread = relative_spread(scaled);

  rep.dominance_leading = lq_aggregate(rep.leading_blocks, q, -D - 2, jmax);
  rep.dominance_remainder = lq_aggregate(rep.remainder_blocks, q, -D - 2, jmax);
  rep.dominance_ratio = rep.dominance_remainder > 0.0 ? rep.dominance_leading / rep.dominance_remainder
                                                      : kInf;
  const double Dq = std::pow(static_cast<double>(D), 1.0 / q);
  const double h1 = psi_h1_squared();
  rep.c0 = rep.dominance_leading / (M * M * Dq);
  rep.C0 = rep.dominance_remainder / (h1 * Dq);
  rep.M_threshold_raw = std::sqrt(1.0 + rep.C0 * h1 / rep.c0);
  rep.M_threshold = std::max(kMinModulation, rep.M_threshold_raw);
  return rep;
}

// ---------------------------------------------------------------- case (ii)

CaseIIReport run_case_ii(const CaseIIOptions& opts) {
  check_n_list(opts.N, static_cast<int>(kMinModulation));
  if (!(opts.p >= 2.0)) throw ConfigError("case (ii) needs 2 <= p <= inf");
  if (opts.jmin > opts.jmax || opts.jmax > -2) throw ConfigError("case (ii) needs jmin <= jmax <= -2");
  const double p = opts.p, s = critical_s(p);
  CaseIIReport rep;
  rep.options = opts;
  const LeadingPair lp = leading_pair(kMinModulation, opts.low.envelope_spacing,
                                      opts.low.envelope_points);
  rep.asymptote =
      sup_weighted(sampler_table(lp.leading_sampler(0.5), p, s, opts.jmin, opts.jmax, opts.block));
  rep.remainder_sup =
      sup_weighted(sampler_table(lp.remainder_sampler(0.5), p, s, opts.jmin, opts.jmax, opts.block));

  std::vector<double> xs, ns, dx, dy;
  for (int N : opts.N) {
    CaseIIRow row;
    row.N = N;
    const PacketField u = gen_case_ii(N);
    row.u_norm = packet_besov_norm(u, p, kInf, s, opts.block).value;
    const LowBilinear low = bilinear_B_low(u, u, opts.jmax, opts.low);
    row.sup_block =
        sup_weighted(sampler_table(low.sampler(), p, s, opts.jmin, opts.jmax, opts.block));
    row.deviation = row.sup_block - rep.asymptote;
    xs.push_back(N);
    ns.push_back(row.u_norm);
    if (row.deviation != 0.0) {
      dx.push_back(N);
      dy.push_back(std::abs(row.deviation));
    }
    rep.max_relative_deviation =
        std::max(rep.max_relative_deviation, std::abs(row.deviation) / rep.asymptote);
    rep.rows.push_back(row);
  }
  rep.norm_fit = fit_power_law(xs, ns);
  if (dx.size() >= 2) {
    rep.deviation_fit = fit_power_law(dx, dy);
  } else {
    rep.deviation_fit.slope = rep.deviation_fit.intercept = std::numeric_limits<double>::quiet_NaN();
    rep.deviation_fit.half_width = kInf;
    rep.deviation_fit.points = static_cast<int>(dx.size());
  }
  return rep;
}

// ---------------------------------------------------------------- case (iii)

CaseIIIReport run_case_iii(const CaseIIIOptions& opts) {
  check_n_list(opts.N, 2);
  if (opts.jmin > opts.jmax || opts.jmax > -2)
    throw ConfigError("case (iii) needs jmin <= jmax <= -2");
  const double p = opts.p, pc = holder_conjugate(p);
  CaseIIIReport rep;
  rep.options = opts;
  // Validate every N before any compute.
  for (int N : opts.N) (void)gen_case_iii(N, p, opts.sigma, opts.max_log2);
  rep.a_inf = scaling_limit(p, opts.block).value;

  std::vector<double> us, vs;
  for (int N : opts.N) {
    CaseIIIRow row;
    row.N = N;
    const auto [u, v] = gen_case_iii(N, p, opts.sigma, opts.max_log2);
    row.u_norm = packet_besov_norm(u, p, kInf, critical_s(p), opts.block).value;
    row.v_norm = packet_besov_norm(v, pc, kInf, critical_s(pc), opts.block).value;
    const double lg = std::log(static_cast<double>(N));
    row.u_scaled = row.u_norm * std::sqrt(lg);
    row.v_scaled = row.v_norm * std::sqrt(lg);
    const LowBilinear low = bilinear_B_low(u, v, opts.jmax, opts.low);
    row.sup_block = sup_weighted(
        sampler_table(low.sampler(), p, critical_s(p), opts.jmin, opts.jmax, opts.block));
    double h = 0.0;
    for (int j = 10; j <= N + 10; ++j) h += 1.0 / j;
    row.harmonic_factor = h / lg;
    row.lower_bound = 0.25 * rep.a_inf * row.harmonic_factor;
    us.push_back(row.u_scaled);
    vs.push_back(row.v_scaled);
    rep.rows.push_back(row);
  }
  rep.u_variation = relative_spread(us);
  rep.v_variation = relative_spread(vs);
  return rep;
}

}  // namespace sns
