//! 2D convolution (stride 1, zero padding) and non-overlapping max pooling
//! over `[channels, height, width]` tensors.

use rand::Rng;

use super::param::{Module, Param};
use super::tensor::Tensor;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Conv2d<T: Scalar = f64> {
    /// `[out_channels, in_channels, kernel_h, kernel_w]`
    pub kernel: Param<T>,
    pub bias: Param<T>,
    pub padding: (usize, usize),
}

impl<T: Scalar> Conv2d<T> {
    pub fn new<R: Rng + ?Sized>(
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel: (usize, usize),
        padding: (usize, usize),
        rng: &mut R,
    ) -> Self {
        let fan_in = in_channels * kernel.0 * kernel.1;
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        Conv2d {
            kernel: Param::uniform(
                format!("{name}.kernel"),
                &[out_channels, in_channels, kernel.0, kernel.1],
                bound,
                rng,
            ),
            bias: Param::uniform(format!("{name}.bias"), &[out_channels], bound, rng),
            padding,
        }
    }

    fn dims(&self) -> (usize, usize, usize, usize) {
        let s = self.kernel.shape();
        (s[0], s[1], s[2], s[3])
    }

    pub fn output_shape(&self, input_shape: &[usize]) -> [usize; 3] {
        let (c_out, c_in, kh, kw) = self.dims();
        assert!(
            input_shape.len() == 3
                && input_shape[0] == c_in
                && input_shape[1] + 2 * self.padding.0 >= kh
                && input_shape[2] + 2 * self.padding.1 >= kw,
            "conv2d_forward `{}`: input {:?} incompatible with kernel [{}, {}, {}, {}] padding {:?}",
            self.kernel.name,
            input_shape,
            c_out,
            c_in,
            kh,
            kw,
            self.padding
        );
        [
            c_out,
            input_shape[1] + 2 * self.padding.0 - kh + 1,
            input_shape[2] + 2 * self.padding.1 - kw + 1,
        ]
    }

    pub fn forward(&self, input: &Tensor<T>) -> Tensor<T> {
        let (c_out, c_in, kh, kw) = self.dims();
        let [_, oh, ow] = self.output_shape(input.shape());
        let (h, w) = (input.shape()[1], input.shape()[2]);
        let (ph, pw) = self.padding;
        let x = input.as_slice();
        let k = self.kernel.value.as_slice();
        let b = self.bias.value.as_slice();
        let mut out = vec![T::zero(); c_out * oh * ow];
        for co in 0..c_out {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = b[co];
                    for ci in 0..c_in {
                        for ky in 0..kh {
                            let iy = (oy + ky) as isize - ph as isize;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            let xrow = (ci * h + iy as usize) * w;
                            let krow = ((co * c_in + ci) * kh + ky) * kw;
                            for kx in 0..kw {
                                let ix = (ox + kx) as isize - pw as isize;
                                if ix < 0 || ix >= w as isize {
                                    continue;
                                }
                                acc = acc + k[krow + kx] * x[xrow + ix as usize];
                            }
                        }
                    }
                    out[(co * oh + oy) * ow + ox] = acc;
                }
            }
        }
        Tensor::from_vec(&[c_out, oh, ow], out)
    }

    /// Accumulates kernel/bias gradients and returns the input gradient.
    pub fn backward(&mut self, input: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
        let (c_out, c_in, kh, kw) = self.dims();
        let [_, oh, ow] = self.output_shape(input.shape());
        assert_eq!(grad_out.shape(), &[c_out, oh, ow], "conv2d_backward: grad shape");
        let (h, w) = (input.shape()[1], input.shape()[2]);
        let (ph, pw) = self.padding;
        let x = input.as_slice();
        let g = grad_out.as_slice();
        let k = self.kernel.value.as_slice();
        let gk = self.kernel.grad.as_mut_slice();
        let gb = self.bias.grad.as_mut_slice();
        let mut gx = vec![T::zero(); x.len()];
        for co in 0..c_out {
            for oy in 0..oh {
                for ox in 0..ow {
                    let go = g[(co * oh + oy) * ow + ox];
                    if go == T::zero() {
                        continue;
                    }
                    gb[co] = gb[co] + go;
                    for ci in 0..c_in {
                        for ky in 0..kh {
                            let iy = (oy + ky) as isize - ph as isize;
                            if iy < 0 || iy >= h as isize {
                                continue;
                            }
                            let xrow = (ci * h + iy as usize) * w;
                            let krow = ((co * c_in + ci) * kh + ky) * kw;
                            for kx in 0..kw {
                                let ix = (ox + kx) as isize - pw as isize;
                                if ix < 0 || ix >= w as isize {
                                    continue;
                                }
                                let xi = xrow + ix as usize;
                                gk[krow + kx] = gk[krow + kx] + go * x[xi];
                                gx[xi] = gx[xi] + go * k[krow + kx];
                            }
                        }
                    }
                }
            }
        }
        Tensor::from_vec(input.shape(), gx)
    }
}

impl<T: Scalar> Module<T> for Conv2d<T> {
    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.kernel, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.kernel, &mut self.bias]
    }
}

/// Non-overlapping max pooling with window `(ph, pw)`. Partial windows at
/// the border are kept, so the output is `[c, ceil(h/ph), ceil(w/pw)]`.
///
/// Returns the pooled tensor and, for every output cell, the flat input index
/// of the winning element (first maximum on ties).
pub fn max_pool2d<T: Scalar>(input: &Tensor<T>, window: (usize, usize)) -> (Tensor<T>, Vec<usize>) {
    let s = input.shape();
    assert!(
        s.len() == 3 && window.0 > 0 && window.1 > 0,
        "max_pool2d: input {:?} window {:?}",
        s,
        window
    );
    let (c, h, w) = (s[0], s[1], s[2]);
    let oh = h.div_ceil(window.0);
    let ow = w.div_ceil(window.1);
    let x = input.as_slice();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut arg = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = usize::MAX;
                for y in oy * window.0..((oy + 1) * window.0).min(h) {
                    for xx in ox * window.1..((ox + 1) * window.1).min(w) {
                        let i = (ch * h + y) * w + xx;
                        if best == usize::MAX || x[i] > x[best] {
                            best = i;
                        }
                    }
                }
                out.push(x[best]);
                arg.push(best);
            }
        }
    }
    (Tensor::from_vec(&[c, oh, ow], out), arg)
}

pub fn max_pool2d_backward<T: Scalar>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &[T],
) -> Tensor<T> {
    assert_eq!(argmax.len(), grad_out.len(), "max_pool2d_backward: grad length");
    let mut g = Tensor::zeros(input_shape);
    let gs = g.as_mut_slice();
    for (&i, &go) in argmax.iter().zip(grad_out) {
        gs[i] = gs[i] + go;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_kernel_is_identity() {
        let mut conv = Conv2d::<f64>::new("c", 1, 1, (1, 1), (0, 0), &mut ChaCha8Rng::seed_from_u64(0));
        conv.kernel.set_value(Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]));
        conv.bias.set_value(Tensor::zeros(&[1]));
        let x = Tensor::from_vec(&[1, 2, 3], vec![1.0, -2.0, 3.0, 4.5, 0.0, -6.0]);
        assert_eq!(conv.forward(&x), x);
    }

    #[test]
    fn same_padding_preserves_height() {
        let conv = Conv2d::<f64>::new("c", 2, 4, (3, 1), (1, 0), &mut ChaCha8Rng::seed_from_u64(0));
        let y = conv.forward(&Tensor::zeros(&[2, 5, 1]));
        assert_eq!(y.shape(), &[4, 5, 1]);
    }

    #[test]
    fn max_pool_keeps_partial_windows() {
        let x = Tensor::from_vec(&[1, 3, 1], vec![1.0, 5.0, 2.0]);
        let (y, arg) = max_pool2d(&x, (2, 1));
        assert_eq!(y.as_slice(), &[5.0, 2.0]);
        assert_eq!(arg, vec![1, 2]);
        let g = max_pool2d_backward(x.shape(), &arg, &[1.0, 3.0]);
        assert_eq!(g.as_slice(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    #[should_panic(expected = "conv2d_forward")]
    fn channel_mismatch_panics() {
        let conv = Conv2d::<f64>::new("c", 2, 1, (1, 1), (0, 0), &mut ChaCha8Rng::seed_from_u64(0));
        conv.forward(&Tensor::zeros(&[3, 2, 2]));
    }
}
