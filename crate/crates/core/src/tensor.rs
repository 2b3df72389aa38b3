//! Dense tensors and the differentiable primitives every network here is
//! built from: 3x3 convolution, ReLU and 2x2 max-pooling, each with an
//! analytic backward pass.
//!
//! All operations are pure functions of their inputs; nothing is cached in
//! globals, so concurrent calls on disjoint data are safe. The convolution
//! forward/backward use an im2col + GEMM formulation; the quadruple-loop
//! reference path lives in [`crate::reference`] and the two must agree
//! (see the oracle-equivalence tests).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

use crate::error::{Error, Result};

/// Fixed kernel size for every convolution in this crate.
pub const KERNEL: usize = 3;

/// Scalar element type: f32 for the training path, f64 for gradient checks.
pub trait Scalar:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(x: f64) -> Self;
    fn to_f64_lossy(self) -> f64;

    /// C <- alpha * A @ B + beta * C, row-major strides given explicitly.
    ///
    /// # Safety
    /// Caller guarantees the pointers cover m x k, k x n and m x n matrices
    /// under the given strides.
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Scalar for f32 {
    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// Dense channels x height x width tensor, row-major in (channel, row, col).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T: Scalar> {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        assert!(channels > 0 && height > 0 && width > 0, "empty tensor");
        Tensor3 {
            channels,
            height,
            width,
            data: vec![T::zero(); channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<T>) -> Self {
        assert_eq!(
            data.len(),
            channels * height * width,
            "data length must equal channels * height * width"
        );
        Tensor3 {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: T) -> Self {
        Tensor3 {
            channels,
            height,
            width,
            data: vec![value; channels * height * width],
        }
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }
    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: T) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// One channel as a contiguous row-major slice.
    #[inline]
    pub fn channel(&self, c: usize) -> &[T] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor3 {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise a*self + b*other; shapes must match.
    pub fn scaled_add(&self, a: T, other: &Self, b: T) -> Result<Self> {
        ensure_same_shape(self, other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Tensor3 {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data,
        })
    }

    pub fn cast<U: Scalar>(&self) -> Tensor3<U> {
        Tensor3 {
            channels: self.channels,
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect(),
        }
    }
}

pub(crate) fn ensure_same_shape<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", a.shape()),
            actual: format!("{:?}", b.shape()),
        });
    }
    Ok(())
}

/// Parameters of one convolution layer: 3x3 kernels plus per-filter bias.
///
/// Weights are stored row-major in (out, in, ky, kx) order, the same order
/// the PDNW file format uses.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernelBank<T: Scalar> {
    out_channels: usize,
    in_channels: usize,
    weights: Vec<T>,
    bias: Vec<T>,
}

impl<T: Scalar> ConvKernelBank<T> {
    pub fn zeros(out_channels: usize, in_channels: usize) -> Self {
        assert!(out_channels > 0 && in_channels > 0);
        ConvKernelBank {
            out_channels,
            in_channels,
            weights: vec![T::zero(); out_channels * in_channels * KERNEL * KERNEL],
            bias: vec![T::zero(); out_channels],
        }
    }

    pub fn from_parts(
        out_channels: usize,
        in_channels: usize,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Self {
        assert_eq!(weights.len(), out_channels * in_channels * KERNEL * KERNEL);
        assert_eq!(bias.len(), out_channels);
        ConvKernelBank {
            out_channels,
            in_channels,
            weights,
            bias,
        }
    }

    #[inline]
    pub fn out_channels(&self) -> usize {
        self.out_channels
    }
    #[inline]
    pub fn in_channels(&self) -> usize {
        self.in_channels
    }
    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    #[inline]
    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }
    #[inline]
    pub fn bias(&self) -> &[T] {
        &self.bias
    }
    #[inline]
    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    #[inline]
    pub fn weight_at(&self, o: usize, i: usize, ky: usize, kx: usize) -> T {
        self.weights[((o * self.in_channels + i) * KERNEL + ky) * KERNEL + kx]
    }

    #[inline]
    pub fn set_weight(&mut self, o: usize, i: usize, ky: usize, kx: usize, v: T) {
        self.weights[((o * self.in_channels + i) * KERNEL + ky) * KERNEL + kx] = v;
    }

    /// Weights plus biases.
    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn cast<U: Scalar>(&self) -> ConvKernelBank<U> {
        ConvKernelBank {
            out_channels: self.out_channels,
            in_channels: self.in_channels,
            weights: self.weights.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect(),
            bias: self.bias.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect(),
        }
    }
}

fn conv_output_size(h: usize, w: usize, pad: usize) -> Result<(usize, usize)> {
    let oh = (h + 2 * pad) as isize - (KERNEL - 1) as isize;
    let ow = (w + 2 * pad) as isize - (KERNEL - 1) as isize;
    if oh <= 0 || ow <= 0 {
        return Err(Error::Dimension(format!(
            "input {h}x{w} with pad {pad} yields empty convolution output"
        )));
    }
    Ok((oh as usize, ow as usize))
}

/// Unroll 3x3 patches of `input` into a (in_c*9) x (out_h*out_w) matrix.
fn im2col<T: Scalar>(input: &Tensor3<T>, pad: usize, out_h: usize, out_w: usize) -> Vec<T> {
    let (in_c, h, w) = input.shape();
    let mut col = vec![T::zero(); in_c * KERNEL * KERNEL * out_h * out_w];
    let col_w = out_h * out_w;
    for c in 0..in_c {
        let plane = input.channel(c);
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = (c * KERNEL + ky) * KERNEL + kx;
                let dst_base = row * col_w;
                for oy in 0..out_h {
                    // Input row this kernel tap reads for output row oy.
                    let iy = oy as isize + ky as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src_row = &plane[iy as usize * w..(iy as usize + 1) * w];
                    let dst = &mut col[dst_base + oy * out_w..dst_base + (oy + 1) * out_w];
                    let shift = kx as isize - pad as isize;
                    // Valid output columns: 0 <= ox + shift < w.
                    let x0 = (-shift).max(0) as usize;
                    let x1 = ((w as isize - shift).min(out_w as isize)).max(0) as usize;
                    if x0 < x1 {
                        let s0 = (x0 as isize + shift) as usize;
                        dst[x0..x1].copy_from_slice(&src_row[s0..s0 + (x1 - x0)]);
                    }
                }
            }
        }
    }
    col
}

/// Scatter-add a (in_c*9) x (out_h*out_w) column matrix back onto the input
/// grid; the adjoint of [`im2col`].
fn col2im<T: Scalar>(
    col: &[T],
    in_c: usize,
    h: usize,
    w: usize,
    pad: usize,
    out_h: usize,
    out_w: usize,
) -> Tensor3<T> {
    let mut out = Tensor3::zeros(in_c, h, w);
    let col_w = out_h * out_w;
    let plane = h * w;
    for c in 0..in_c {
        for ky in 0..KERNEL {
            for kx in 0..KERNEL {
                let row = (c * KERNEL + ky) * KERNEL + kx;
                let src_base = row * col_w;
                for oy in 0..out_h {
                    let iy = oy as isize + ky as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let shift = kx as isize - pad as isize;
                    let x0 = (-shift).max(0) as usize;
                    let x1 = ((w as isize - shift).min(out_w as isize)).max(0) as usize;
                    if x0 >= x1 {
                        continue;
                    }
                    let src = &col[src_base + oy * out_w + x0..src_base + oy * out_w + x1];
                    let d0 = c * plane + iy as usize * w + (x0 as isize + shift) as usize;
                    let dst = &mut out.data[d0..d0 + (x1 - x0)];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += *s;
                    }
                }
            }
        }
    }
    out
}

/// Zero-padded 3x3 convolution (cross-correlation) of `input` with `kernels`.
///
/// With `pad = 1` the spatial size is preserved exactly.
pub fn conv2d_forward<T: Scalar>(
    input: &Tensor3<T>,
    kernels: &ConvKernelBank<T>,
    pad: usize,
) -> Result<Tensor3<T>> {
    if kernels.in_channels != input.channels() {
        return Err(Error::ChannelMismatch {
            expected: kernels.in_channels,
            actual: input.channels(),
        });
    }
    let (out_h, out_w) = conv_output_size(input.height(), input.width(), pad)?;
    let col = im2col(input, pad, out_h, out_w);

    let m = kernels.out_channels;
    let k = kernels.in_channels * KERNEL * KERNEL;
    let n = out_h * out_w;

    // Seed the output with per-filter bias, then accumulate the GEMM on top.
    let mut out = Tensor3::zeros(m, out_h, out_w);
    for (o, &b) in kernels.bias.iter().enumerate() {
        out.data[o * n..(o + 1) * n].fill(b);
    }
    unsafe {
        T::gemm(
            m,
            k,
            n,
            T::one(),
            kernels.weights.as_ptr(),
            k as isize,
            1,
            col.as_ptr(),
            n as isize,
            1,
            T::one(),
            out.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(out)
}

/// Gradients of `sum(grad_out * conv2d_forward(saved_input, kernels, pad))`
/// with respect to the input, the weights and the bias.
pub fn conv2d_backward<T: Scalar>(
    grad_out: &Tensor3<T>,
    saved_input: &Tensor3<T>,
    kernels: &ConvKernelBank<T>,
    pad: usize,
) -> Result<(Tensor3<T>, ConvKernelBank<T>)> {
    if kernels.in_channels != saved_input.channels() {
        return Err(Error::ChannelMismatch {
            expected: kernels.in_channels,
            actual: saved_input.channels(),
        });
    }
    let (out_h, out_w) = conv_output_size(saved_input.height(), saved_input.width(), pad)?;
    if grad_out.shape() != (kernels.out_channels, out_h, out_w) {
        return Err(Error::ShapeMismatch {
            expected: format!("{:?}", (kernels.out_channels, out_h, out_w)),
            actual: format!("{:?}", grad_out.shape()),
        });
    }

    let m = kernels.out_channels;
    let k = kernels.in_channels * KERNEL * KERNEL;
    let n = out_h * out_w;

    let mut grads = ConvKernelBank::zeros(kernels.out_channels, kernels.in_channels);

    for (o, gb) in grads.bias.iter_mut().enumerate() {
        *gb = grad_out.data[o * n..(o + 1) * n].iter().copied().sum();
    }

    // dW (m x k) = grad_out (m x n) @ col(saved_input)^T (n x k)
    let col = im2col(saved_input, pad, out_h, out_w);
    unsafe {
        T::gemm(
            m,
            n,
            k,
            T::one(),
            grad_out.data.as_ptr(),
            n as isize,
            1,
            col.as_ptr(),
            1,
            n as isize,
            T::zero(),
            grads.weights.as_mut_ptr(),
            k as isize,
            1,
        );
    }

    // d(col) (k x n) = W^T (k x m) @ grad_out (m x n), then scatter back.
    let mut gcol = vec![T::zero(); k * n];
    unsafe {
        T::gemm(
            k,
            m,
            n,
            T::one(),
            kernels.weights.as_ptr(),
            1,
            k as isize,
            grad_out.data.as_ptr(),
            n as isize,
            1,
            T::zero(),
            gcol.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    let grad_input = col2im(
        &gcol,
        kernels.in_channels,
        saved_input.height(),
        saved_input.width(),
        pad,
        out_h,
        out_w,
    );

    Ok((grad_input, grads))
}

/// Elementwise max(0, x).
pub fn relu_forward<T: Scalar>(input: &Tensor3<T>) -> Tensor3<T> {
    input.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Subgradient of ReLU; the subgradient at exactly 0 is 0.
pub fn relu_backward<T: Scalar>(grad_out: &Tensor3<T>, saved_input: &Tensor3<T>) -> Result<Tensor3<T>> {
    ensure_same_shape(grad_out, saved_input)?;
    let data = grad_out
        .data
        .iter()
        .zip(&saved_input.data)
        .map(|(&g, &x)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Ok(Tensor3 {
        channels: grad_out.channels,
        height: grad_out.height,
        width: grad_out.width,
        data,
    })
}

/// Which input element won each 2x2 pooling window, for the backward pass.
#[derive(Debug, Clone)]
pub struct ArgmaxRecord {
    in_shape: (usize, usize, usize),
    out_shape: (usize, usize, usize),
    winners: Vec<u32>,
}

impl ArgmaxRecord {
    pub fn out_shape(&self) -> (usize, usize, usize) {
        self.out_shape
    }
}

/// 2x2 max-pooling with stride 2. Odd trailing rows/columns are cropped
/// before pooling.
///
/// Ties within a window resolve to the first element in row-major scan
/// order, so the pass is deterministic.
pub fn maxpool2_forward<T: Scalar>(input: &Tensor3<T>) -> Result<(Tensor3<T>, ArgmaxRecord)> {
    let (c, h, w) = input.shape();
    let out_h = h / 2;
    let out_w = w / 2;
    if out_h == 0 || out_w == 0 {
        return Err(Error::Dimension(format!(
            "input {h}x{w} too small to survive 2x2 pooling"
        )));
    }
    let mut out = Tensor3::zeros(c, out_h, out_w);
    let mut winners = vec![0u32; c * out_h * out_w];
    for ch in 0..c {
        let plane = input.channel(ch);
        for oy in 0..out_h {
            for ox in 0..out_w {
                let y0 = oy * 2;
                let x0 = ox * 2;
                let mut best_idx = y0 * w + x0;
                let mut best = plane[best_idx];
                for (dy, dx) in [(0usize, 1usize), (1, 0), (1, 1)] {
                    let idx = (y0 + dy) * w + (x0 + dx);
                    if plane[idx] > best {
                        best = plane[idx];
                        best_idx = idx;
                    }
                }
                out.set(ch, oy, ox, best);
                winners[(ch * out_h + oy) * out_w + ox] = (ch * h * w + best_idx) as u32;
            }
        }
    }
    Ok((
        out,
        ArgmaxRecord {
            in_shape: (c, h, w),
            out_shape: (c, out_h, out_w),
            winners,
        },
    ))
}

/// Route each upstream gradient to its recorded argmax position.
pub fn maxpool2_backward<T: Scalar>(
    grad_out: &Tensor3<T>,
    record: &ArgmaxRecord,
) -> Result<Tensor3<T>> {
    if grad_out.shape() != record.out_shape {
        return Err(Error::StaleRecord(format!(
            "gradient shape {:?} does not match recorded pooling output {:?}",
            grad_out.shape(),
            record.out_shape
        )));
    }
    let (c, h, w) = record.in_shape;
    let mut grad_in = Tensor3::zeros(c, h, w);
    for (&idx, &g) in record.winners.iter().zip(grad_out.data.iter()) {
        grad_in.data[idx as usize] += g;
    }
    Ok(grad_in)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_bank() -> ConvKernelBank<f64> {
        let mut bank = ConvKernelBank::zeros(1, 1);
        bank.set_weight(0, 0, 1, 1, 1.0);
        bank
    }

    #[test]
    fn conv_zero_input_isolates_bias() {
        let input = Tensor3::<f64>::zeros(1, 3, 3);
        let mut bank = ConvKernelBank::zeros(2, 1);
        bank.bias_mut()[0] = 0.75;
        bank.bias_mut()[1] = -1.25;
        for w in bank.weights_mut() {
            *w = 0.3;
        }
        let out = conv2d_forward(&input, &bank, 1).unwrap();
        assert_eq!(out.shape(), (2, 3, 3));
        assert!(out.channel(0).iter().all(|&v| v == 0.75));
        assert!(out.channel(1).iter().all(|&v| v == -1.25));
    }

    #[test]
    fn conv_identity_kernel_preserves_input() {
        let data: Vec<f64> = (0..25).map(|i| (i as f64) * 0.37 - 4.0).collect();
        let input = Tensor3::from_vec(1, 5, 5, data);
        let out = conv2d_forward(&input, &identity_bank(), 1).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn conv_channel_mismatch_rejected() {
        let input = Tensor3::<f64>::zeros(2, 4, 4);
        let bank = ConvKernelBank::<f64>::zeros(1, 3);
        assert!(matches!(
            conv2d_forward(&input, &bank, 1),
            Err(Error::ChannelMismatch { .. })
        ));
    }

    #[test]
    fn conv_zero_sized_output_rejected() {
        let input = Tensor3::<f64>::zeros(1, 2, 2);
        let bank = ConvKernelBank::<f64>::zeros(1, 1);
        assert!(matches!(
            conv2d_forward(&input, &bank, 0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn conv_backward_zero_upstream_gives_zero_grads() {
        let input = Tensor3::from_vec(1, 4, 4, (0..16).map(|i| i as f64).collect());
        let bank = identity_bank();
        let grad_out = Tensor3::<f64>::zeros(1, 4, 4);
        let (gi, gk) = conv2d_backward(&grad_out, &input, &bank, 1).unwrap();
        assert!(gi.data().iter().all(|&v| v == 0.0));
        assert!(gk.weights().iter().all(|&v| v == 0.0));
        assert!(gk.bias().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_backward_identity_kernel_passes_gradient() {
        let input = Tensor3::from_vec(1, 4, 4, (0..16).map(|i| i as f64 * 0.5).collect());
        let grad_out = Tensor3::from_vec(1, 4, 4, (0..16).map(|i| (i as f64).sin()).collect());
        let (gi, _) = conv2d_backward(&grad_out, &input, &identity_bank(), 1).unwrap();
        assert_eq!(gi, grad_out);
    }

    #[test]
    fn conv_backward_bias_gradient_sums_upstream() {
        let input = Tensor3::from_vec(1, 3, 3, vec![0.0; 9]);
        let grad_out = Tensor3::from_vec(1, 3, 3, (1..=9).map(|i| i as f64).collect());
        let (_, gk) = conv2d_backward(&grad_out, &input, &identity_bank(), 1).unwrap();
        assert_eq!(gk.bias()[0], 45.0);
    }

    #[test]
    fn relu_clamps_negatives() {
        let input = Tensor3::from_vec(1, 1, 3, vec![-1.0, 0.0, 2.5]);
        let out = relu_forward(&input);
        assert_eq!(out.data(), &[0.0, 0.0, 2.5]);

        let all_neg = Tensor3::from_vec(1, 1, 3, vec![-3.0, -0.1, -7.0]);
        assert!(relu_forward(&all_neg).data().iter().all(|&v| v == 0.0));

        let nonneg = Tensor3::from_vec(1, 1, 3, vec![0.0, 1.0, 4.0]);
        assert_eq!(relu_forward(&nonneg), nonneg);
    }

    #[test]
    fn relu_backward_masks_by_saved_input() {
        let saved = Tensor3::from_vec(1, 1, 4, vec![1.0, -1.0, 0.0, 2.0]);
        let grad = Tensor3::from_vec(1, 1, 4, vec![5.0, 6.0, 7.0, 8.0]);
        let gi = relu_backward(&grad, &saved).unwrap();
        assert_eq!(gi.data(), &[5.0, 0.0, 0.0, 8.0]);
    }

    #[test]
    fn maxpool_constant_and_tiny_window() {
        let input = Tensor3::<f64>::filled(1, 4, 4, 3.25);
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), (1, 2, 2));
        assert!(out.data().iter().all(|&v| v == 3.25));

        let tiny = Tensor3::from_vec(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let (out, rec) = maxpool2_forward(&tiny).unwrap();
        assert_eq!(out.shape(), (1, 1, 1));
        assert_eq!(out.data()[0], 4.0);

        let grad = Tensor3::from_vec(1, 1, 1, vec![1.0]);
        let gi = maxpool2_backward(&grad, &rec).unwrap();
        assert_eq!(gi.data(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn maxpool_crops_odd_trailing_edges() {
        let input = Tensor3::from_vec(1, 3, 5, (0..15).map(|i| i as f64).collect());
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out.shape(), (1, 1, 2));
        // Windows cover rows 0..2, cols 0..4; max of each 2x2 block.
        assert_eq!(out.data(), &[6.0, 8.0]);
    }

    #[test]
    fn maxpool_backward_rejects_stale_record() {
        let input = Tensor3::<f64>::zeros(1, 4, 4);
        let (_, rec) = maxpool2_forward(&input).unwrap();
        let wrong = Tensor3::<f64>::zeros(1, 3, 3);
        assert!(matches!(
            maxpool2_backward(&wrong, &rec),
            Err(Error::StaleRecord(_))
        ));
    }

    #[test]
    fn maxpool_zero_gradient_routes_zeros() {
        let input = Tensor3::from_vec(1, 4, 4, (0..16).map(|i| (i as f64).cos()).collect());
        let (out, rec) = maxpool2_forward(&input).unwrap();
        let gi =
            maxpool2_backward(&Tensor3::<f64>::zeros(1, out.height(), out.width()), &rec).unwrap();
        assert!(gi.data().iter().all(|&v| v == 0.0));
    }
}
