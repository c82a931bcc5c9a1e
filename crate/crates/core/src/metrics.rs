//! Interferograms, windowed coherence and the coherence-magnitude loss.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensorio::{ComplexImage, RealTensor};

pub const DEFAULT_WINDOW: usize = 5;

/// Pixelwise `x1 * conj(x2)`.
pub fn interferogram(x1: &ComplexImage, x2: &ComplexImage) -> Result<ComplexImage> {
    same_shape(x1, x2)?;
    let data = x1
        .data()
        .iter()
        .zip(x2.data())
        .map(|(a, b)| a * b.conj())
        .collect();
    Ok(ComplexImage::from_raw(x1.rows(), x1.cols(), data))
}

/// Complex coherence estimates over a `window x window` boxcar.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMap {
    window: usize,
    values: ComplexImage,
}

impl CoherenceMap {
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &ComplexImage {
        &self.values
    }

    pub fn magnitude(&self) -> RealTensor {
        self.values.magnitude()
    }

    pub fn mean_magnitude(&self) -> f64 {
        let v = self.values.data();
        v.iter().map(|z| z.norm()).sum::<f64>() / v.len() as f64
    }
}

/// Boxcar coherence estimate
/// `sum(x1 conj x2) / sqrt(sum |x1|^2 * sum |x2|^2)` per pixel.
///
/// Windows are clipped at the image border. A window in which either power
/// sum vanishes yields 0.
pub fn coherence(x1: &ComplexImage, x2: &ComplexImage, window: usize) -> Result<CoherenceMap> {
    same_shape(x1, x2)?;
    let (rows, cols) = x1.shape();
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "coherence window must be odd and >= 3, got {window}"
        )));
    }
    if window > rows || window > cols {
        return Err(Error::invalid(format!(
            "coherence window {window} larger than {rows}x{cols} image"
        )));
    }
    let cross = interferogram(x1, x2)?;
    let p1: Vec<f64> = x1.data().iter().map(|z| z.norm_sqr()).collect();
    let p2: Vec<f64> = x2.data().iter().map(|z| z.norm_sqr()).collect();
    let half = window / 2;
    let cross_sum = box_sum(cross.data(), rows, cols, half);
    let p1_sum = box_sum(&p1, rows, cols, half);
    let p2_sum = box_sum(&p2, rows, cols, half);
    let values = cross_sum
        .iter()
        .zip(p1_sum.iter().zip(&p2_sum))
        .map(|(&c, (&a, &b))| {
            let denom = (a * b).sqrt();
            if a > 0.0 && b > 0.0 && denom > 0.0 {
                c / denom
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(CoherenceMap {
        window,
        values: ComplexImage::from_raw(rows, cols, values),
    })
}

/// `1 - mean |coherence|`, clamped to `[0, 1]`.
pub fn coherence_loss(x1: &ComplexImage, x2: &ComplexImage, window: usize) -> Result<f64> {
    let map = coherence(x1, x2, window)?;
    Ok((1.0 - map.mean_magnitude()).clamp(0.0, 1.0))
}

/// Separable clipped box sum with half-width `half`.
fn box_sum<T>(data: &[T], rows: usize, cols: usize, half: usize) -> Vec<T>
where
    T: Copy + Send + Sync + Default + std::ops::Add<Output = T>,
{
    let mut horiz = vec![T::default(); rows * cols];
    horiz
        .par_chunks_mut(cols)
        .zip(data.par_chunks(cols))
        .for_each(|(out, row)| {
            for (n, o) in out.iter_mut().enumerate() {
                let lo = n.saturating_sub(half);
                let hi = (n + half).min(cols - 1);
                *o = row[lo..=hi].iter().fold(T::default(), |acc, &v| acc + v);
            }
        });
    let mut out = vec![T::default(); rows * cols];
    out.par_chunks_mut(cols).enumerate().for_each(|(m, dst)| {
        let lo = m.saturating_sub(half);
        let hi = (m + half).min(rows - 1);
        for (n, d) in dst.iter_mut().enumerate() {
            *d = (lo..=hi).fold(T::default(), |acc, r| acc + horiz[r * cols + n]);
        }
    });
    out
}

fn same_shape(a: &ComplexImage, b: &ComplexImage) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}
