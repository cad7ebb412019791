#pragma once

// The cutoff psi_hat, the Littlewood-Paley family phi_hat_j and the Fourier
// multipliers used by the bilinear operator.

#include "sns/spectral_core.hpp"

namespace sns {

/// Relative mass at the origin node above which (-Delta)^{-1} refuses to act.
inline constexpr double kOriginTol = 1e-10;

/// theta(r): 1 for r <= 1, 0 for r >= 2, smooth and strictly decreasing
/// in between, glued from exp(-1/t).
double smooth_step(double r);

/// psi_hat(xi) = theta(|xi|).
Symbol psi_hat();

/// phi_hat_j(xi) = theta(2^{-j}|xi|) - theta(2^{-j+1}|xi|).
Symbol lp_block_symbol(int j);
double lp_block_value(int j, double r);

/// Constant 1x1 symbol.
Symbol constant_symbol(cplx value);

/// Multiplier of a single partial derivative d/dx_axis (axis 0 or 1): i xi_axis.
Symbol partial_symbol(int axis);

/// (i xi_1, i xi_2) as a 2x1 symbol acting on scalars.
Symbol gradient_symbol();

/// (-i xi_2, i xi_1) as a 2x1 symbol acting on scalars.
Symbol grad_perp_symbol();

/// (i xi_1, i xi_2) as a 1x2 symbol acting on vectors.
Symbol divergence_symbol();

/// Row divergence of a tensor stored as T_{mk} at index 2m+k:
/// (div T)_k = sum_m i xi_m T_{mk}. 2x4 symbol.
Symbol tensor_divergence_symbol();

/// delta_{jk} - xi_j xi_k / |xi|^2, identity at the origin.
Symbol projector_symbol();

/// 1/|xi|^2 with value 0 at the origin.
Symbol inv_laplacian_symbol();

/// |xi|^2.
Symbol laplacian_symbol();

/// Applies a symbol node by node. A 1x1 symbol scales every component;
/// otherwise cols must equal the number of components and the result has
/// rows components. Non-finite symbol values at occupied nodes raise
/// SingularityError.
SpectralField apply_multiplier(const SpectralField& f, const Symbol& m);

SpectralField helmholtz_project(const SpectralField& u);

/// Throws SingularityError if |fhat(0)| > origin_tol * max |fhat|.
SpectralField inv_laplacian(const SpectralField& f, double origin_tol = kOriginTol);

SpectralField grad_perp(const SpectralField& g);
SpectralField gradient(const SpectralField& g);
SpectralField divergence(const SpectralField& u);
SpectralField tensor_divergence(const SpectralField& T);

/// Delta_j f.
SpectralField lp_block(const SpectralField& f, int j);

}  // namespace sns
