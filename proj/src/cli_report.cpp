#include "sns/cli_report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sns/counterexamples.hpp"
#include "sns/multipliers.hpp"
#include "sns/parallel.hpp"

namespace sns {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double parse_exponent(const std::string& text, const char* name) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "inf" || t == "infinity") return kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ConfigError(std::string("invalid value for --") + name + ": '" + text + "'");
  return v;
}

std::string number_or_inf(double v) { return std::isinf(v) ? "inf" : format_number(v); }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Options {
  BlockOptions block;
  LowOptions low;
};

Options grid_options(const RunConfig& cfg) {
  Options o;
  if (cfg.h > 0.0) {
    o.low.envelope_spacing = cfg.h;
    o.block.envelope_spacing = cfg.h;
  }
  if (cfg.K > 0) o.low.envelope_points = cfg.K;
  if (cfg.Kb > 0) o.block.points = cfg.Kb;
  if (cfg.tol > 0.0) o.block.tol = cfg.tol;
  return o;
}

void check_flags(const std::vector<BlockReport>& blocks, const char* what, RunOutput& out) {
  for (const auto& b : blocks)
    if (b.flagged)
      out.failures.push_back(std::string(what) + fmt(": block %g refinement error %.3g", b.j,
                                                     b.refinement_error));
}

void trace(RunOutput& out, const std::string& column, const std::string& source) {
  out.manifest.emplace_back("trace." + column, source);
}

void result(RunOutput& out, const std::string& key, double v) {
  out.manifest.emplace_back("result." + key, number_or_inf(v));
}

std::string grid_note(const Options& o) {
  return fmt("envelope(h=%.17g,K=", o.low.envelope_spacing) +
         std::to_string(o.low.envelope_points) + ")+block(K_b=" + std::to_string(o.block.points) +
         fmt(",npu=%g)", o.block.nodes_per_unit);
}

// ---------------------------------------------------------------- commands

RunOutput verify_identities(const RunConfig& cfg) {
  RunOutput out;
  out.header = {"identity", "index", "quantity", "value"};
  const IdentityReport lem = modulated_identity_check(cfg.M);
  for (const auto& b : lem.blocks) {
    const std::string j = std::to_string(b.j);
    out.rows.push_back({"modulated_identity", j, "deviation_coarse", format_number(b.deviation_coarse)});
    out.rows.push_back({"modulated_identity", j, "deviation_refined", format_number(b.deviation_refined)});
    out.rows.push_back({"modulated_identity", j, "rhs_norm", format_number(b.rhs_norm)});
    if (!(b.deviation_refined <= 1e-8))
      out.failures.push_back(fmt("identity block %g deviation %.3g > 1e-8", b.j, b.deviation_refined));
  }
  if (!(lem.max_deviation <= lem.max_deviation_coarse))
    out.failures.push_back("identity deviation did not improve under refinement");
  const std::vector<double> M = {10.0 * cfg.M, 11.0 * cfg.M, 12.0 * cfg.M};
  const CrossTermReport cr = cross_term_check(M, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0});
  for (const auto& b : cr.blocks) {
    const std::string k = std::to_string(b.k);
    out.rows.push_back({"cross", k, "cross_norm", format_number(b.cross_norm)});
    out.rows.push_back({"cross", k, "diagonal_norm", format_number(b.diagonal_norm)});
    out.rows.push_back({"cross", k, "aggregate_deviation", format_number(b.aggregate_deviation)});
  }
  if (cr.cross_failures > 0)
    out.failures.push_back(fmt("%g cross-term blocks above 1e-10 of the diagonal", cr.cross_failures));
  if (!(cr.max_deviation <= 1e-8))
    out.failures.push_back(fmt("aggregate identity deviation %.3g > 1e-8", cr.max_deviation));
  result(out, "identity_max_deviation", lem.max_deviation);
  result(out, "identity_max_deviation_coarse", lem.max_deviation_coarse);
  result(out, "cross_max_ratio", cr.max_ratio);
  result(out, "cross_max_deviation", cr.max_deviation);
  out.manifest.emplace_back("cross_frequencies", fmt("%g,%g", M[0], M[1]) + fmt(",%g", M[2]));
  trace(out, "modulated_identity", "ns_bilinear.modulated_identity_check@window(2^j/8)+envelope(1/32,1/64)");
  trace(out, "cross", "ns_bilinear.cross_term_check@window(2^k/8)+envelope(1/32)");
  out.summary = fmt("modulated identity max deviation %.3g (coarse %.3g)\n", lem.max_deviation,
                    lem.max_deviation_coarse) +
                fmt("cross terms: max ratio %.3g, aggregate deviation %.3g\n", cr.max_ratio,
                    cr.max_deviation);
  return out;
}

RunOutput lower_bound(const RunConfig& cfg) {
  RunOutput out;
  const Options o = grid_options(cfg);
  const LowerBoundCurve c = lower_bound_curve(cfg.p, cfg.jmin, cfg.jmax, o.block);
  out.header = {"j", "a_j", "second_component", "first_component", "refinement_error"};
  std::ostringstream s;
  s << "      j  a_j\n";
  PlotSeries ser{"a_j", {}, {}};
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const BlockReport& b = c.blocks[i];
    out.rows.push_back({std::to_string(b.j), format_number(b.weighted),
                        format_number(c.second[i].weighted), format_number(c.first[i].weighted),
                        format_number(b.refinement_error)});
    char line[96];
    std::snprintf(line, sizeof line, "%7d  %.10g\n", b.j, b.weighted);
    s << line;
    ser.x.push_back(b.j);
    ser.y.push_back(b.weighted);
  }
  out.rows.push_back({"inf", format_number(c.limit.value), "", "",
                      format_number(c.limit.block.refinement_error)});
  s << fmt("a_inf = %.10g\n", c.limit.value) << fmt("min a_j = %.10g\n", c.min_a)
    << fmt("|a_jmin - a_inf| / a_inf = %.3g\n", c.tail_gap);
  out.summary = s.str();
  check_flags(c.blocks, "a_j", out);
  if (!(c.min_a > 0.0)) out.failures.push_back("a_j not positive");
  result(out, "a_inf", c.limit.value);
  result(out, "W0", c.limit.w0);
  result(out, "min_a", c.min_a);
  result(out, "tail_gap", c.tail_gap);
  trace(out, "a_j", "counterexamples.lower_bound_curve@" + grid_note(o));
  trace(out, "a_inf", "counterexamples.scaling_limit@block_grid(0)");
  if (cfg.plot) {
    PlotSeries lim{"a_inf", {ser.x.front(), ser.x.back()}, {c.limit.value, c.limit.value}};
    out.plots.emplace_back("plot_lower_bound.svg",
                           svg_plot("Lower bound curve", "j", "a_j", {ser, lim}, false, false));
  }
  return out;
}

RunOutput case_i(const RunConfig& cfg) {
  RunOutput out;
  const Options o = grid_options(cfg);
  CaseIOptions co;
  co.p = cfg.p;
  co.q = cfg.q;
  co.M = cfg.M;
  co.N = cfg.N;
  co.block = o.block;
  co.low = o.low;
  const CaseIReport r = run_case_i(co);
  out.header = {"N", "J", "u_norm", "u_norm_scaled", "S_J", "S_leading", "normalized", "ratio",
                "growth"};
  std::ostringstream s;
  s << "N  J  ||u_N||  ||u_N||*N^(1/2q)  S_J  S_J/(a_inf M^2/2 J^(1/q))  R_N  growth\n";
  PlotSeries sj{"S_J", {}, {}}, ref{"a_inf (M^2/2) J^(1/q)", {}, {}};
  for (const auto& w : r.rows) {
    out.rows.push_back({std::to_string(w.N), std::to_string(w.J), format_number(w.u_norm),
                        format_number(w.u_norm_scaled), format_number(w.S),
                        format_number(w.S_leading), format_number(w.normalized),
                        format_number(w.ratio), format_number(w.growth)});
    char line[256];
    std::snprintf(line, sizeof line, "%d  %d  %.8g  %.12g  %.8g  %.6g  %.6g  %.6g\n", w.N, w.J,
                  w.u_norm, w.u_norm_scaled, w.S, w.normalized, w.ratio, w.growth);
    s << line;
    sj.x.push_back(w.J);
    sj.y.push_back(w.S);
    ref.x.push_back(w.J);
    ref.y.push_back(r.a_inf * 0.5 * cfg.M * cfg.M * std::pow(w.J, 1.0 / cfg.q));
  }
  s << fmt("a_inf = %.10g, prefactor spread %.3g\n", r.a_inf, r.prefactor_spread)
    << fmt("leading %.6g vs remainder %.3g", r.dominance_leading, r.dominance_remainder)
    << fmt(" at J = %g (ratio %.3g)\n", co.dominance_J, r.dominance_ratio)
    << fmt("c0 = %.6g, C0 = %.3g", r.c0, r.C0) << fmt(", M threshold %.4g (raw %.4g)\n",
                                                       r.M_threshold, r.M_threshold_raw);
  out.summary = s.str();
  check_flags(r.b_blocks, "B", out);
  check_flags(r.leading_blocks, "leading", out);
  result(out, "a_inf", r.a_inf);
  result(out, "prefactor_spread", r.prefactor_spread);
  result(out, "dominance_J", co.dominance_J);
  result(out, "dominance_leading", r.dominance_leading);
  result(out, "dominance_remainder", r.dominance_remainder);
  result(out, "dominance_ratio", r.dominance_ratio);
  result(out, "c0", r.c0);
  result(out, "C0", r.C0);
  result(out, "psi_h1_squared", psi_h1_squared());
  result(out, "M_threshold", r.M_threshold);
  result(out, "M_threshold_raw", r.M_threshold_raw);
  trace(out, "u_norm", "counterexamples.packet_besov_norm(gen_case_i)@two-scale envelope grid");
  trace(out, "S_J", "ns_bilinear.bilinear_B_low+besov.block_norm@" + grid_note(o));
  trace(out, "S_leading", "ns_bilinear.LeadingPair.leading_sampler@" + grid_note(o));
  if (cfg.plot)
    out.plots.emplace_back("plot_case_i.svg",
                           svg_plot("Partial sums of B(u_1, u_1)", "J", "S_J", {sj, ref}, true, true));
  return out;
}

RunOutput case_ii(const RunConfig& cfg) {
  RunOutput out;
  const Options o = grid_options(cfg);
  CaseIIOptions co;
  co.p = cfg.p;
  co.N = cfg.N;
  co.jmin = cfg.jmin;
  co.jmax = cfg.jmax;
  co.block = o.block;
  co.low = o.low;
  const CaseIIReport r = run_case_ii(co);
  out.header = {"N", "u_norm", "sup_block", "deviation"};
  std::ostringstream s;
  s << "N  ||u_N||  sup_j block of B  deviation\n";
  PlotSeries ser{"||u_N||", {}, {}};
  for (const auto& w : r.rows) {
    out.rows.push_back({std::to_string(w.N), format_number(w.u_norm), format_number(w.sup_block),
                        format_number(w.deviation)});
    char line[160];
    std::snprintf(line, sizeof line, "%d  %.10g  %.15g  %.3g\n", w.N, w.u_norm, w.sup_block,
                  w.deviation);
    s << line;
    ser.x.push_back(w.N);
    ser.y.push_back(w.u_norm);
  }
  s << fmt("asymptote %.15g, remainder sup %.3g\n", r.asymptote, r.remainder_sup)
    << fmt("norm slope %.6f +- %.3g\n", r.norm_fit.slope, r.norm_fit.half_width)
    << fmt("deviation slope %.4g +- %.3g", r.deviation_fit.slope, r.deviation_fit.half_width)
    << fmt(" (%g points), max relative deviation %.3g\n", r.deviation_fit.points,
           r.max_relative_deviation);
  out.summary = s.str();
  result(out, "asymptote", r.asymptote);
  result(out, "remainder_sup", r.remainder_sup);
  result(out, "norm_slope", r.norm_fit.slope);
  result(out, "norm_slope_ci95", r.norm_fit.half_width);
  result(out, "deviation_slope", r.deviation_fit.slope);
  result(out, "deviation_slope_ci95", r.deviation_fit.half_width);
  result(out, "max_relative_deviation", r.max_relative_deviation);
  trace(out, "u_norm", "counterexamples.packet_besov_norm(gen_case_ii)@two-scale envelope grid");
  trace(out, "sup_block", "ns_bilinear.bilinear_B_low+besov.block_norm@" + grid_note(o));
  if (cfg.plot)
    out.plots.emplace_back("plot_case_ii.svg",
                           svg_plot("Norm decay, case (ii)", "N", "||u_N||", {ser}, true, true));
  return out;
}

RunOutput case_iii(const RunConfig& cfg) {
  RunOutput out;
  const Options o = grid_options(cfg);
  CaseIIIOptions co;
  co.p = cfg.p;
  co.sigma = cfg.sigma;
  co.N = cfg.N;
  co.jmin = cfg.jmin;
  co.jmax = cfg.jmax;
  co.block = o.block;
  co.low = o.low;
  const CaseIIIReport r = run_case_iii(co);
  out.header = {"N",        "u_norm",    "v_norm",          "u_scaled",
                "v_scaled", "sup_block", "harmonic_factor", "lower_bound"};
  std::ostringstream s;
  s << "N  ||u_N||  ||v_N||  sqrt(log N)||u_N||  sqrt(log N)||v_N||  sup block  bound\n";
  PlotSeries pu{"||u_N||", {}, {}}, pv{"||v_N||", {}, {}};
  for (const auto& w : r.rows) {
    out.rows.push_back({std::to_string(w.N), format_number(w.u_norm), format_number(w.v_norm),
                        format_number(w.u_scaled), format_number(w.v_scaled),
                        format_number(w.sup_block), format_number(w.harmonic_factor),
                        format_number(w.lower_bound)});
    char line[200];
    std::snprintf(line, sizeof line, "%d  %.8g  %.8g  %.10g  %.10g  %.8g  %.8g\n", w.N, w.u_norm,
                  w.v_norm, w.u_scaled, w.v_scaled, w.sup_block, w.lower_bound);
    s << line;
    pu.x.push_back(w.N);
    pu.y.push_back(w.u_norm);
    pv.x.push_back(w.N);
    pv.y.push_back(w.v_norm);
  }
  s << fmt("a_inf = %.10g, variation u %.3g", r.a_inf, r.u_variation)
    << fmt(", v %.3g\n", r.v_variation);
  out.summary = s.str();
  result(out, "a_inf", r.a_inf);
  result(out, "u_variation", r.u_variation);
  result(out, "v_variation", r.v_variation);
  out.manifest.emplace_back("frequency_schedule", fmt("M_j = 2^(%g j), j = 10..N+10", cfg.sigma));
  trace(out, "u_norm", "counterexamples.packet_besov_norm(gen_case_iii)@two-scale envelope grid");
  trace(out, "sup_block", "ns_bilinear.bilinear_B_low+besov.block_norm@" + grid_note(o));
  if (cfg.plot)
    out.plots.emplace_back("plot_case_iii.svg",
                           svg_plot("Norm decay, case (iii)", "N", "norm", {pu, pv}, true, true));
  return out;
}

RunOutput selftest(const RunConfig&) {
  RunOutput out;
  out.header = {"check", "value", "threshold", "pass"};
  auto add = [&out](const std::string& name, double v, double thr, bool le = true) {
    const bool ok = le ? v <= thr : v >= thr;
    out.rows.push_back({name, format_number(v), format_number(thr), ok ? "1" : "0"});
    if (!ok) out.failures.push_back(name + fmt(" = %.3g against %.3g", v, thr));
  };

  double pu = 0.0;
  const FrequencyGrid g(1.0 / 16.0, 256);
  for (int k1 = 0; k1 < g.points(); ++k1)
    for (int k2 = 0; k2 < g.points(); ++k2) {
      const double r = norm(g.node(k1, k2));
      if (r < 1.0 / 64.0 || r > 64.0) continue;
      double sum = 0.0;
      for (int j = -8; j <= 8; ++j) sum += lp_block_value(j, r);
      pu = std::max(pu, std::abs(sum - 1.0));
    }
  add("partition_of_unity", pu, 1e-12);

  const SpectralField psi = sample_symbol(FrequencyGrid(1.0 / 8.0, 64), psi_hat(), true);
  const SpectralField gp = grad_perp(psi);
  const SpectralField gr = gradient(psi);
  add("projector_keeps_solenoidal",
      window_l2(helmholtz_project(gp).plus(gp.scaled(-1.0))) / window_l2(gp), 1e-12);
  add("projector_kills_gradient", window_l2(helmholtz_project(gr)) / window_l2(gr), 1e-12);
  add("div_grad_perp", window_l2(divergence(gp)) / window_l2(gradient(psi)), 1e-12);

  IdentityOptions lo;
  lo.jmin = -2;
  lo.jmax = 0;
  add("identity_deviation", modulated_identity_check(16.0, lo).max_deviation, 1e-8);

  const ScalingLimit lim = scaling_limit(2.0);
  const BlockSampler G = leading_pair(kMinModulation).leading_sampler(1.0);
  const BlockReport a8 = block_norm(G, -8, 2.0, 0.0);
  add("a_inf_p2", lim.value, 0.0, false);
  add("a_minus8_vs_a_inf", std::abs(a8.weighted - lim.value) / lim.value, 0.05);

  std::vector<double> scaled;
  for (int N : {1, 4, 16}) {
    const double v = packet_besov_norm(gen_case_i(N, 2.0, 2.0, 16.0), 2.0, 2.0, 0.0).value;
    scaled.push_back(v * std::pow(N, 0.25));
  }
  const auto [lo_it, hi_it] = std::minmax_element(scaled.begin(), scaled.end());
  add("case_i_prefactor_spread", (*hi_it - *lo_it) / *lo_it, 1e-12);
  out.summary = fmt("%g checks, %g failed\n", out.rows.size(), out.failures.size());
  trace(out, "partition_of_unity", "multipliers.lp_block_value@grid(1/16,256)");
  trace(out, "projector", "multipliers.helmholtz_project@grid(1/8,64)");
  trace(out, "modulated_identity", "ns_bilinear.modulated_identity_check@window(2^j/8)");
  trace(out, "a_inf", "counterexamples.scaling_limit@block_grid(0)");
  trace(out, "case_i", "counterexamples.packet_besov_norm@two-scale envelope grid");
  return out;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"verify-identities", "lower-bound", "case-i",
                                             "case-ii",           "case-iii",    "selftest"};
  return c;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

RunConfig parse_run_config(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string p_text, q_text;
  CLI::App app{"Counterexample experiments for the stationary Navier-Stokes bilinear estimate"};
  // -h would clash with the --h grid option.
  app.set_help_flag("--help", "Print this help message and exit");
  app.add_option("command", cfg.command, "Subcommand")
      ->required()
      ->check(CLI::IsMember(commands()));
  app.add_option("--p", p_text, "Integrability exponent (number or inf)");
  app.add_option("--q", q_text, "Summability exponent (number or inf)");
  app.add_option("--M", cfg.M, "Modulation frequency (case i, verify-identities)");
  app.add_option("--N", cfg.N, "Comma-separated list of N")->delimiter(',');
  app.add_option("--sigma", cfg.sigma, "Case (iii) schedule exponent: M_j = 2^(sigma j)");
  app.add_option("--jmin", cfg.jmin, "Lowest block index");
  app.add_option("--jmax", cfg.jmax, "Highest block index");
  app.add_option("--h", cfg.h, "Envelope grid spacing");
  app.add_option("--K", cfg.K, "Envelope grid nodes per axis");
  app.add_option("--Kb", cfg.Kb, "Block grid nodes per axis");
  app.add_option("--tol", cfg.tol, "Block refinement tolerance");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_flag("--plot", cfg.plot, "Write SVG plots");
  app.set_config("--config", "", "Plain key=value configuration file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequest{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  if (auto* c = app.get_config_ptr(); c && c->count() > 0) cfg.config = c->as<std::string>();
  if (!p_text.empty()) cfg.p = parse_exponent(p_text, "p");
  if (!q_text.empty()) cfg.q = parse_exponent(q_text, "q");

  const std::string& c = cfg.command;
  if (std::isnan(cfg.p)) cfg.p = c == "case-ii" ? 4.0 : c == "case-iii" ? 1.0 : 2.0;
  if (std::isnan(cfg.q)) cfg.q = (c == "case-ii" || c == "case-iii") ? kInf : 2.0;
  if (cfg.N.empty()) {
    if (c == "case-i") cfg.N = {4, 16, 64};
    if (c == "case-ii") cfg.N = {16, 32, 64, 128};
    if (c == "case-iii") cfg.N = {4, 8, 16};
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (std::find(commands().begin(), commands().end(), c) == commands().end())
    throw ConfigError("unknown command '" + c + "'");
  if (!(cfg.p >= 1.0)) throw ConfigError("p must satisfy 1 <= p <= inf");
  if (!(cfg.q >= 1.0)) throw ConfigError("q must satisfy 1 <= q <= inf");
  if (cfg.h < 0.0 || cfg.tol < 0.0) throw ConfigError("--h and --tol must be positive");
  if (cfg.K != 0 && (cfg.K < 8 || cfg.K % 2)) throw ConfigError("--K must be even and >= 8");
  if (cfg.Kb != 0 && (cfg.Kb < 8 || cfg.Kb % 2)) throw ConfigError("--Kb must be even and >= 8");
  const bool ranged = c == "lower-bound" || c == "case-ii" || c == "case-iii";
  if (ranged && (cfg.jmin > cfg.jmax || cfg.jmax > -2))
    throw ConfigError("block range must satisfy jmin <= jmax <= -2");
  if ((c == "case-i" || c == "verify-identities") && !(cfg.M >= kMinModulation))
    throw ConfigError("M must be >= 10");
  if (c == "case-i") {
    if (std::isinf(cfg.q)) throw ConfigError("case (i) needs q < inf");
    for (int n : cfg.N)
      if (n < 1) throw ConfigError("case (i) needs N >= 1");
  }
  if (c == "case-ii") {
    if (!(cfg.p >= 2.0)) throw ConfigError("case (ii) needs p >= 2");
    if (!std::isinf(cfg.q)) throw ConfigError("case (ii) needs q = inf");
    for (int n : cfg.N)
      if (n < kMinModulation) throw ConfigError("case (ii) needs N >= 10");
  }
  if (c == "case-iii") {
    if (!(cfg.p < 2.0)) throw ConfigError("case (iii) needs 1 <= p < 2");
    if (!std::isinf(cfg.q)) throw ConfigError("case (iii) needs q = inf");
    if (!(cfg.sigma >= 2.0)) throw ConfigError("case (iii) needs sigma >= 2");
    for (int n : cfg.N) {
      if (n < 2) throw ConfigError("case (iii) needs N >= 2");
      if (cfg.sigma * (n + 10) > kMaxLog2Frequency)
        throw BudgetError(fmt("N = %g needs frequencies up to 2^%g", n, cfg.sigma * (n + 10)) +
                          fmt("; feasible N <= %g", std::floor(kMaxLog2Frequency / cfg.sigma) - 10));
    }
  }
}

RunOutput execute(const RunConfig& cfg) {
  validate(cfg);
  RunOutput out;
  const std::string& c = cfg.command;
  if (c == "verify-identities") out = verify_identities(cfg);
  if (c == "lower-bound") out = lower_bound(cfg);
  if (c == "case-i") out = case_i(cfg);
  if (c == "case-ii") out = case_ii(cfg);
  if (c == "case-iii") out = case_iii(cfg);
  if (c == "selftest") out = selftest(cfg);

  std::vector<std::pair<std::string, std::string>> head = {
      {"command", c},
      {"tool_version", kToolVersion},
      {"p", number_or_inf(cfg.p)},
      {"q", number_or_inf(cfg.q)},
      {"M", format_number(cfg.M)},
      {"N", join(cfg.N)},
      {"sigma", format_number(cfg.sigma)},
      {"jmin", std::to_string(cfg.jmin)},
      {"jmax", std::to_string(cfg.jmax)},
  };
  const Options o = grid_options(cfg);
  head.emplace_back("envelope_spacing", format_number(o.low.envelope_spacing));
  head.emplace_back("envelope_points", std::to_string(o.low.envelope_points));
  head.emplace_back("block_points", std::to_string(o.block.points));
  head.emplace_back("block_nodes_per_unit", format_number(o.block.nodes_per_unit));
  head.emplace_back("block_tol", format_number(o.block.tol));
  head.emplace_back("block_nonsmooth_tol", format_number(o.block.nonsmooth_tol));
  head.emplace_back("config", cfg.config);
  out.manifest.insert(out.manifest.begin(), head.begin(), head.end());
  return out;
}

void write_outputs(const RunConfig& cfg, const RunOutput& out, double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out + ": " + ec.message());
  auto write = [&dir](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    f << text;
  };
  write("results.csv", to_csv(out.header, out.rows));
  std::string m;
  for (const auto& [k, v] : out.manifest) m += k + "=" + v + "\n";
  m += "threads=" + std::to_string(thread_count()) + "\n";
  m += "wall_time_s=" + fmt("%.3f", wall_seconds) + "\n";
  m += "status=" + std::string(out.failures.empty() ? "ok" : "tolerance_failure") + "\n";
  for (std::size_t i = 0; i < out.failures.size(); ++i)
    m += "failure." + std::to_string(i) + "=" + out.failures[i] + "\n";
  write("manifest.txt", m);
  for (const auto& [name, svg] : out.plots) write(name, svg);
}

int run(int argc, const char* const* argv) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = parse_run_config(argc, argv);
    validate(cfg);
  } catch (const HelpRequest& h) {
    std::cout << h.text;
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const RunOutput out = execute(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(cfg, out, wall);
    std::cout << out.summary;
    for (const auto& f : out.failures) std::cerr << "tolerance failure: " << f << "\n";
    return out.failures.empty() ? kExitOk : kExitTolerance;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitTolerance;
  }
}

// ---------------------------------------------------------------- plots

namespace {

std::string escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    if (ch == '&') o += "&amp;";
    else if (ch == '<') o += "&lt;";
    else if (ch == '>') o += "&gt;";
    else o += ch;
  }
  return o;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<PlotSeries>& series, bool logx,
                     bool logy) {
  const double W = 640, H = 420, L = 80, R = 20, T = 40, B = 60;
  auto tx = [logx](double v) { return logx ? std::log10(v) : v; };
  auto ty = [logy](double v) { return logy ? std::log10(v) : v; };
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) {
    const double d = std::max(1e-3, 0.05 * std::abs(y0));
    y0 -= d, y1 += d;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double a) { return L + (a - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double b) { return H - B - (b - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  char buf[256];
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - B);
  o << buf;
  o << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double a = x0 + (x1 - x0) * i / 4.0, b = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.4g</text>\n",
                  px(a), H - B + 18, logx ? std::pow(10.0, a) : a);
    o << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.4g</text>\n",
                  L - 6, py(b) + 4, logy ? std::pow(10.0, b) : b);
    o << buf;
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << escape(xlabel) << (logx ? " (log)" : "") << "</text>\n";
  o << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">" << escape(ylabel) << (logy ? " (log)" : "") << "</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 4];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(a), py(b));
      o << buf;
    }
    o << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", L + 10, T + 16 + 16.0 * k, col,
                  escape(s.label).c_str());
    o << buf;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace sns
