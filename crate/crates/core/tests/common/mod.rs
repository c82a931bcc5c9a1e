// Independent reference implementations used as test oracles. Everything here
// is written from the textbook definitions with direct sums; none of it calls
// into the FFT-backed library code.
#![allow(dead_code)]

use std::f64::consts::PI;

use nyqmap::cnnsim::Activation;
use nyqmap::{Complex64, ComplexImage, RealTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexImage {
    ComplexImage::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .unwrap()
}

/// Direct-sum 2-D DFT; `sign = -1` forward, `+1` inverse (unscaled).
pub fn naive_dft2(x: &[Complex64], rows: usize, cols: usize, sign: f64) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); rows * cols];
    for k in 0..rows {
        for l in 0..cols {
            let mut acc = c(0.0, 0.0);
            for m in 0..rows {
                for n in 0..cols {
                    // reduce the phase index exactly before scaling
                    let pm = (k * m) % rows;
                    let pn = (l * n) % cols;
                    let theta =
                        sign * 2.0 * PI * (pm as f64 / rows as f64 + pn as f64 / cols as f64);
                    acc += x[m * cols + n] * Complex64::from_polar(1.0, theta);
                }
            }
            out[k * cols + l] = acc;
        }
    }
    out
}

/// Signed normalized frequency of bin `k` on an axis of `len`, in `[-pi, pi)`.
pub fn signed_freq(k: usize, len: usize) -> f64 {
    let k = k as f64;
    let len_f = len as f64;
    if 2.0 * k >= len_f {
        2.0 * PI * (k - len_f) / len_f
    } else {
        2.0 * PI * k / len_f
    }
}

/// Closed-form Nyquist encoding. Each spectral line at `(w1, w2)` in the open
/// band `(-pi, pi)` maps to the real cosine at
/// `(w1/2 + pi/2, w2/2 + pi/2)` on the doubled grid; lines at `-pi` are
/// dropped.
pub fn nyquist_oracle(x: &ComplexImage) -> RealTensor {
    let (rows, cols) = x.shape();
    let spec = naive_dft2(x.data(), rows, cols, -1.0);
    let scale = 1.0 / (rows * cols) as f64;
    let mut lines = Vec::new();
    for k in 0..rows {
        for l in 0..cols {
            if 2 * k == rows || 2 * l == cols {
                continue;
            }
            let w1 = signed_freq(k, rows) / 2.0 + PI / 2.0;
            let w2 = signed_freq(l, cols) / 2.0 + PI / 2.0;
            lines.push((w1, w2, spec[k * cols + l] * scale));
        }
    }
    RealTensor::from_fn(2 * rows, 2 * cols, 1, |m, n, _| {
        lines
            .iter()
            .map(|&(w1, w2, a)| (a * Complex64::from_polar(1.0, w1 * m as f64 + w2 * n as f64)).re)
            .sum()
    })
    .unwrap()
}

/// Zero-padded 'same' cross-correlation, quadruple loop per channel pair.
pub fn naive_conv(x: &RealTensor, kernels: &[Vec<f64>], biases: &[f64], size: usize) -> RealTensor {
    let (rows, cols, ci) = x.shape();
    let co = biases.len();
    let h = size as isize / 2;
    RealTensor::from_fn(rows, cols, co, |m, n, j| {
        let mut acc = biases[j];
        for i in 0..ci {
            let w = &kernels[i * co + j];
            for p in 0..size {
                for q in 0..size {
                    let r = m as isize + p as isize - h;
                    let s = n as isize + q as isize - h;
                    if r >= 0 && s >= 0 && (r as usize) < rows && (s as usize) < cols {
                        acc += w[p * size + q] * x.get(r as usize, s as usize, i);
                    }
                }
            }
        }
        acc
    })
    .unwrap()
}

/// Coherence magnitude of a single window from its samples.
pub fn window_coherence(a: &[Complex64], b: &[Complex64]) -> f64 {
    let cross: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let pa: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let pb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if pa == 0.0 || pb == 0.0 {
        0.0
    } else {
        cross.norm() / (pa * pb).sqrt()
    }
}

/// Mean and standard error of a sample.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Central difference estimate of the k-th derivative with step `h`.
pub fn central_diff(f: &dyn Fn(f64) -> f64, z0: f64, k: usize, h: f64) -> f64 {
    let half = k as f64 / 2.0;
    let sum: f64 = (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom(k, i) * f(z0 + (half - i as f64) * h)
        })
        .sum();
    sum / h.powi(k as i32)
}

/// Richardson extrapolation of [`central_diff`] over steps h, h/2, h/4, ...
/// (the error expansion is even in h).
pub fn fd_derivative(f: &dyn Fn(f64) -> f64, z0: f64, k: usize, h: f64) -> f64 {
    const LEVELS: usize = 5;
    let mut table: Vec<f64> = (0..LEVELS)
        .map(|j| central_diff(f, z0, k, h / 2f64.powi(j as i32)))
        .collect();
    for level in 1..LEVELS {
        let factor = 4f64.powi(level as i32);
        for j in (level..LEVELS).rev() {
            table[j] = (factor * table[j] - table[j - 1]) / (factor - 1.0);
        }
    }
    table[LEVELS - 1]
}

/// Closed-form first derivative; differencing it instead of the function keeps
/// the fifth-order estimate above double-precision noise.
pub fn first_derivative(act: Activation) -> impl Fn(f64) -> f64 {
    let logistic = |u: f64| 1.0 / (1.0 + (-u).exp());
    move |z| match act {
        Activation::Sigmoid => logistic(z) * logistic(-z),
        Activation::Tanh => 1.0 - z.tanh().powi(2),
        Activation::SoftplusWarped(a) => logistic(a * z),
        Activation::Identity => 1.0,
        Activation::Relu => unreachable!(),
    }
}

pub fn real_fn(act: Activation) -> impl Fn(f64) -> f64 {
    move |z| match act {
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Tanh => z.tanh(),
        Activation::SoftplusWarped(a) => ((a * z).max(0.0) + (-(a * z).abs()).exp().ln_1p()) / a,
        Activation::Identity => z,
        Activation::Relu => z.max(0.0),
    }
}

/// Taylor coefficient `f^(k)(z0) / k!` from finite differences of the
/// closed-form first derivative, with steps scaled to the activation.
pub fn fd_taylor_coeff(act: Activation, z0: f64, k: usize) -> f64 {
    let scale = match act {
        Activation::SoftplusWarped(a) => 1.0 / a,
        _ => 1.0,
    };
    match k {
        0 => real_fn(act)(z0),
        _ => fd_derivative(&first_derivative(act), z0, k - 1, 0.6 * scale) / factorial(k),
    }
}
