use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{ComplexImage, RealTensor};
use crate::error::{Error, Result};

/// Additive floor inside the log-magnitude view.
pub const LOG_MAG_EPS: f64 = 1e-12;
/// Lower clamp of the log-magnitude view, in dB.
pub const LOG_FLOOR_DB: f64 = -240.0;

/// Unnormalized 2-D DFT coefficients of an image.
///
/// Bin `(0, 0)` is DC. Bin `k` along an axis of length `L` sits at normalized
/// frequency `2*pi*k/L`; bins `k >= L/2` are read as negative frequencies
/// `2*pi*k/L - 2*pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    rows: usize,
    cols: usize,
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(rows: usize, cols: usize, bins: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("spectrum dimensions must be nonzero"));
        }
        if bins.len() != rows * cols {
            return Err(Error::invalid(format!(
                "bin count {} does not match {rows}x{cols}",
                bins.len()
            )));
        }
        if bins.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite bins"));
        }
        Ok(Self { rows, cols, bins })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.bins[k * self.cols + l]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, v: Complex64) {
        self.bins[k * self.cols + l] = v;
    }

    /// Total spectral energy `sum |X|^2`.
    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Normalized frequency of bin `k` on an axis of `len` bins, in `[-pi, pi)`.
    pub fn bin_frequency(k: usize, len: usize) -> f64 {
        let w = 2.0 * PI * k as f64 / len as f64;
        if 2 * k >= len {
            w - 2.0 * PI
        } else {
            w
        }
    }

    /// `20*log10(|X| + eps)` clamped at [`LOG_FLOOR_DB`], in bin order.
    pub fn log_magnitude(&self) -> RealTensor {
        RealTensor::from_raw(
            self.rows,
            self.cols,
            1,
            self.bins.iter().map(|z| log_db(z.norm())).collect(),
        )
    }

    /// Log-magnitude with DC moved to the center, for display.
    pub fn shifted_log_magnitude(&self) -> RealTensor {
        let (r, c) = (self.rows, self.cols);
        let mut out = vec![0.0; r * c];
        for k in 0..r {
            for l in 0..c {
                let ks = (k + r / 2) % r;
                let ls = (l + c / 2) % c;
                out[ks * c + ls] = log_db(self.get(k, l).norm());
            }
        }
        RealTensor::from_raw(r, c, 1, out)
    }

    /// The bins viewed as a complex image (for storage in CTEN files).
    pub fn to_image(&self) -> ComplexImage {
        ComplexImage::from_raw(self.rows, self.cols, self.bins.clone())
    }

    pub fn from_image(img: ComplexImage) -> Self {
        let (rows, cols) = img.shape();
        Self {
            rows,
            cols,
            bins: img.into_data(),
        }
    }
}

pub fn log_db(mag: f64) -> f64 {
    (20.0 * (mag + LOG_MAG_EPS).log10()).max(LOG_FLOOR_DB)
}

/// Forward unnormalized 2-D DFT.
pub fn dft2(img: &ComplexImage) -> Spectrum {
    let (rows, cols) = img.shape();
    let mut buf = img.data().to_vec();
    transform2(&mut buf, rows, cols, false);
    Spectrum {
        rows,
        cols,
        bins: buf,
    }
}

/// Inverse 2-D DFT carrying the `1/(M*N)` factor.
pub fn idft2(spec: &Spectrum) -> ComplexImage {
    let (rows, cols) = (spec.rows, spec.cols);
    let mut buf = spec.bins.clone();
    transform2(&mut buf, rows, cols, true);
    let scale = 1.0 / (rows * cols) as f64;
    for z in &mut buf {
        *z *= scale;
    }
    ComplexImage::from_raw(rows, cols, buf)
}

/// Forward unnormalized 1-D DFT.
pub fn dft1(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

fn transform2(buf: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (
            planner.plan_fft_inverse(cols),
            planner.plan_fft_inverse(rows),
        )
    } else {
        (
            planner.plan_fft_forward(cols),
            planner.plan_fft_forward(rows),
        )
    };
    // rows are contiguous
    row_fft.process(buf);
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for l in 0..cols {
        for k in 0..rows {
            column[k] = buf[k * cols + l];
        }
        col_fft.process(&mut column);
        for k in 0..rows {
            buf[k * cols + l] = column[k];
        }
    }
}
