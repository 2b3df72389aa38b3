//! Slow reference implementations and numeric helpers used to verify the
//! fast paths. Nothing here shares code with the optimized routines.

use crate::tensor::{ConvKernelBank, Scalar, Tensor3, KERNEL};

/// Direct quadruple-loop zero-padded 3x3 convolution.
///
/// Deliberately naive: per-output-pixel summation with explicit bounds
/// checks, no patch-matrix reformulation. Serves as the oracle for
/// [`crate::tensor::conv2d_forward`].
pub fn conv2d_naive<T: Scalar>(
    input: &Tensor3<T>,
    kernels: &ConvKernelBank<T>,
    pad: usize,
) -> Tensor3<T> {
    assert_eq!(kernels.in_channels(), input.channels(), "channel mismatch");
    let (in_c, h, w) = input.shape();
    let out_h = h + 2 * pad - (KERNEL - 1);
    let out_w = w + 2 * pad - (KERNEL - 1);
    let mut out = Tensor3::zeros(kernels.out_channels(), out_h, out_w);
    for o in 0..kernels.out_channels() {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut acc = kernels.bias()[o];
                for c in 0..in_c {
                    for ky in 0..KERNEL {
                        for kx in 0..KERNEL {
                            let iy = oy as isize + ky as isize - pad as isize;
                            let ix = ox as isize + kx as isize - pad as isize;
                            if iy < 0 || iy >= h as isize || ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += kernels.weight_at(o, c, ky, kx)
                                * input.at(c, iy as usize, ix as usize);
                        }
                    }
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    out
}

/// Central finite difference of a scalar function, step `eps`.
pub fn central_difference(mut f: impl FnMut(f64) -> f64, x: f64, eps: f64) -> f64 {
    (f(x + eps) - f(x - eps)) / (2.0 * eps)
}

/// Relative error with a floor so near-zero gradients do not blow it up.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(1e-8);
    (analytic - numeric).abs() / scale
}

/// Check one analytic gradient entry against central differences of `loss`,
/// where `loss` re-evaluates the full computation with the perturbed value.
///
/// Returns the relative error.
pub fn check_gradient_entry(
    loss: impl FnMut(f64) -> f64,
    value: f64,
    analytic: f64,
    eps: f64,
) -> f64 {
    let numeric = central_difference(loss, value, eps);
    relative_error(analytic, numeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_matches_polynomial_derivative() {
        // d/dx (x^3 - 2x) = 3x^2 - 2
        let err = relative_error(
            central_difference(|x| x * x * x - 2.0 * x, 1.5, 1e-4),
            3.0 * 1.5 * 1.5 - 2.0,
        );
        assert!(err < 1e-8, "err = {err}");
    }

    #[test]
    fn naive_conv_identity_kernel() {
        let mut bank = ConvKernelBank::<f64>::zeros(1, 1);
        bank.set_weight(0, 0, 1, 1, 1.0);
        let input = Tensor3::from_vec(1, 4, 4, (0..16).map(|i| i as f64 * 0.25).collect());
        assert_eq!(conv2d_naive(&input, &bank, 1), input);
    }
}
