#include "sns/multipliers.hpp"

#include <cmath>
#include <string>

namespace sns {

namespace {

const std::vector<cplx> kZero1{cplx(0.0)};

}  // namespace

double smooth_step(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  // h(2-r) / (h(2-r) + h(r-1)) with h(t) = exp(-1/t), folded into one exp.
  return 1.0 / (1.0 + std::exp(1.0 / (2.0 - r) - 1.0 / (r - 1.0)));
}

Symbol psi_hat() {
  return Symbol(1, 1, [](Vec2 xi, std::span<cplx> out) { out[0] = smooth_step(norm(xi)); });
}

double lp_block_value(int j, double r) {
  return smooth_step(std::ldexp(r, -j)) - smooth_step(std::ldexp(r, 1 - j));
}

Symbol lp_block_symbol(int j) {
  return Symbol(1, 1, [j](Vec2 xi, std::span<cplx> out) { out[0] = lp_block_value(j, norm(xi)); });
}

Symbol constant_symbol(cplx value) {
  return Symbol(1, 1, [value](Vec2, std::span<cplx> out) { out[0] = value; },
                value.imag() == 0.0);
}

Symbol partial_symbol(int axis) {
  if (axis != 0 && axis != 1) throw ConfigError("axis must be 0 or 1");
  return Symbol(1, 1, [axis](Vec2 xi, std::span<cplx> out) {
    out[0] = cplx(0.0, axis == 0 ? xi.x1 : xi.x2);
  });
}

Symbol gradient_symbol() {
  return Symbol(2, 1, [](Vec2 xi, std::span<cplx> out) {
    out[0] = cplx(0.0, xi.x1);
    out[1] = cplx(0.0, xi.x2);
  });
}

Symbol grad_perp_symbol() {
  return Symbol(2, 1, [](Vec2 xi, std::span<cplx> out) {
    out[0] = cplx(0.0, -xi.x2);
    out[1] = cplx(0.0, xi.x1);
  });
}

Symbol divergence_symbol() {
  return Symbol(1, 2, [](Vec2 xi, std::span<cplx> out) {
    out[0] = cplx(0.0, xi.x1);
    out[1] = cplx(0.0, xi.x2);
  });
}

Symbol tensor_divergence_symbol() {
  // Row k, column 2m+k carries i xi_m.
  return Symbol(2, 4, [](Vec2 xi, std::span<cplx> out) {
    const cplx d1(0.0, xi.x1), d2(0.0, xi.x2);
    out[0] = d1; out[1] = 0.0; out[2] = d2; out[3] = 0.0;
    out[4] = 0.0; out[5] = d1; out[6] = 0.0; out[7] = d2;
  });
}

Symbol projector_symbol() {
  return Symbol(
      2, 2,
      [](Vec2 xi, std::span<cplx> out) {
        const double r2 = xi.x1 * xi.x1 + xi.x2 * xi.x2;
        const double off = -xi.x1 * xi.x2 / r2;
        out[0] = xi.x2 * xi.x2 / r2;
        out[1] = off;
        out[2] = off;
        out[3] = xi.x1 * xi.x1 / r2;
      },
      true, std::vector<cplx>{1.0, 0.0, 0.0, 1.0});
}

Symbol inv_laplacian_symbol() {
  return Symbol(
      1, 1,
      [](Vec2 xi, std::span<cplx> out) { out[0] = 1.0 / (xi.x1 * xi.x1 + xi.x2 * xi.x2); }, true,
      kZero1);
}

Symbol laplacian_symbol() {
  return Symbol(1, 1, [](Vec2 xi, std::span<cplx> out) { out[0] = xi.x1 * xi.x1 + xi.x2 * xi.x2; });
}

SpectralField apply_multiplier(const SpectralField& f, const Symbol& m) {
  const int nin = f.components();
  const bool scalar = m.entries() == 1;
  if (!scalar && m.cols() != nin)
    throw ConfigError("multiplier has " + std::to_string(m.cols()) + " columns for a field with " +
                      std::to_string(nin) + " components");
  const int nout = scalar ? nin : m.rows();
  const FrequencyGrid& g = f.grid();
  SpectralField out(g, rank_for_components(nout), f.real() && m.hermitian());
  const double thr = kSupportTol * f.max_modulus();
  std::vector<cplx> sym(static_cast<std::size_t>(m.entries()));
  const int K = g.points();
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2) {
      const std::size_t i = g.index(k1, k2);
      const double mod = f.modulus(i);
      if (mod == 0.0) continue;
      m(g.node(k1, k2), sym);
      bool finite = true;
      for (const auto& v : sym) finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
      if (!finite) {
        if (mod > thr) throw SingularityError("multiplier is not finite at an occupied node");
        continue;
      }
      if (scalar) {
        for (int c = 0; c < nin; ++c) out.component(c)[i] = sym[0] * f.component(c)[i];
      } else {
        for (int r = 0; r < nout; ++r) {
          cplx s(0.0, 0.0);
          for (int c = 0; c < nin; ++c) s += sym[r * nin + c] * f.component(c)[i];
          out.component(r)[i] = s;
        }
      }
    }
  return out;
}

SpectralField helmholtz_project(const SpectralField& u) {
  if (u.rank() != Rank::kVector) throw ConfigError("helmholtz_project expects a vector field");
  return apply_multiplier(u, projector_symbol());
}

SpectralField inv_laplacian(const SpectralField& f, double origin_tol) {
  const FrequencyGrid& g = f.grid();
  const int h = g.points() / 2;
  const double mx = f.max_modulus();
  const double origin = f.modulus(g.index(h, h));
  if (mx > 0.0 && origin > origin_tol * mx)
    throw SingularityError("inverse Laplacian applied to a field with mass at the origin");
  return apply_multiplier(f, inv_laplacian_symbol());
}

SpectralField grad_perp(const SpectralField& g) {
  if (g.rank() != Rank::kScalar) throw ConfigError("grad_perp expects a scalar field");
  return apply_multiplier(g, grad_perp_symbol());
}

SpectralField gradient(const SpectralField& g) {
  if (g.rank() != Rank::kScalar) throw ConfigError("gradient expects a scalar field");
  return apply_multiplier(g, gradient_symbol());
}

SpectralField divergence(const SpectralField& u) {
  if (u.rank() != Rank::kVector) throw ConfigError("divergence expects a vector field");
  return apply_multiplier(u, divergence_symbol());
}

SpectralField tensor_divergence(const SpectralField& T) {
  if (T.rank() != Rank::kTensor) throw ConfigError("tensor_divergence expects a tensor field");
  return apply_multiplier(T, tensor_divergence_symbol());
}

SpectralField lp_block(const SpectralField& f, int j) {
  return apply_multiplier(f, lp_block_symbol(j));
}

}  // namespace sns
