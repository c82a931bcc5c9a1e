//! Tensor types, 2-D DFT, the CTEN on-disk format and raster export.

mod cten;
mod dft;
mod raster;

pub use cten::{load_tensor, read_tensor, save_tensor, write_tensor, MAGIC};
pub use dft::{dft1, dft2, idft2, log_db, Spectrum, LOG_FLOOR_DB, LOG_MAG_EPS};
pub use raster::{export_image, write_image, Normalization};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex image of `rows x cols` samples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    /// Builds an image from row-major samples. All samples must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dims(rows, cols, 1, data.len())?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("complex image contains non-finite samples"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols, 1, rows * cols)?;
        Ok(Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                data.push(f(m, n));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Skips the finiteness scan; for internal producers whose output is
    /// finite by construction.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.cols + n]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| f(z)).collect(),
        )
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z * a).collect(),
        )
    }

    /// Largest absolute sample difference to `other`.
    pub fn max_abs_diff(&self, other: &ComplexImage) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn real_part(&self) -> RealTensor {
        RealTensor::from_raw(
            self.rows,
            self.cols,
            1,
            self.data.iter().map(|z| z.re).collect(),
        )
    }

    pub fn imag_part(&self) -> RealTensor {
        RealTensor::from_raw(
            self.rows,
            self.cols,
            1,
            self.data.iter().map(|z| z.im).collect(),
        )
    }

    pub fn magnitude(&self) -> RealTensor {
        RealTensor::from_raw(
            self.rows,
            self.cols,
            1,
            self.data.iter().map(|z| z.norm()).collect(),
        )
    }

    /// Phase in `[-pi, pi)`.
    pub fn phase(&self) -> RealTensor {
        RealTensor::from_raw(
            self.rows,
            self.cols,
            1,
            self.data.iter().map(|&z| wrapped_arg(z)).collect(),
        )
    }
}

/// `arg(z)` on the half-open interval `[-pi, pi)`; zero maps to 0.
pub fn wrapped_arg(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let a = z.im.atan2(z.re);
    if a >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        a
    }
}

/// A real tensor of `rows x cols x channels`, row-major and channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor {
    rows: usize,
    cols: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RealTensor {
    pub fn new(rows: usize, cols: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, channels, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("real tensor contains non-finite samples"));
        }
        Ok(Self {
            rows,
            cols,
            channels,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize, channels: usize) -> Result<Self> {
        check_dims(rows, cols, channels, rows * cols * channels)?;
        Ok(Self::from_raw(
            rows,
            cols,
            channels,
            vec![0.0; rows * cols * channels],
        ))
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * channels);
        for m in 0..rows {
            for n in 0..cols {
                for c in 0..channels {
                    data.push(f(m, n, c));
                }
            }
        }
        Self::new(rows, cols, channels, data)
    }

    /// Stacks single-channel planes (each `rows * cols`, row-major) into a
    /// channel-last tensor.
    pub fn from_planes(rows: usize, cols: usize, planes: &[Vec<f64>]) -> Result<Self> {
        if planes.iter().any(|p| p.len() != rows * cols) {
            return Err(Error::invalid("plane length does not match rows*cols"));
        }
        let channels = planes.len();
        let mut data = Vec::with_capacity(rows * cols * channels);
        for idx in 0..rows * cols {
            data.extend(planes.iter().map(|p| p[idx]));
        }
        Self::new(rows, cols, channels, data)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols * channels);
        Self {
            rows,
            cols,
            channels,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, c: usize) -> f64 {
        self.data[(m * self.cols + n) * self.channels + c]
    }

    /// Copy of one channel as a row-major plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        assert!(c < self.channels, "channel {c} out of range");
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn channel(&self, c: usize) -> Result<RealTensor> {
        if c >= self.channels {
            return Err(Error::invalid(format!(
                "channel {c} out of range for {} channels",
                self.channels
            )));
        }
        Ok(Self::from_raw(self.rows, self.cols, 1, self.plane(c)))
    }

    /// Channel `c` as a complex image with zero imaginary part.
    pub fn channel_as_complex(&self, c: usize) -> Result<ComplexImage> {
        let ch = self.channel(c)?;
        Ok(ComplexImage::from_raw(
            self.rows,
            self.cols,
            ch.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        ))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &RealTensor) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Either tensor kind, as stored in a CTEN file.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Real(RealTensor),
    Complex(ComplexImage),
}

impl Tensor {
    pub fn into_real(self) -> Result<RealTensor> {
        match self {
            Tensor::Real(t) => Ok(t),
            Tensor::Complex(_) => Err(Error::invalid("expected a real tensor, found complex")),
        }
    }

    pub fn into_complex(self) -> Result<ComplexImage> {
        match self {
            Tensor::Complex(x) => Ok(x),
            Tensor::Real(_) => Err(Error::invalid("expected a complex image, found real")),
        }
    }
}

impl From<RealTensor> for Tensor {
    fn from(t: RealTensor) -> Self {
        Tensor::Real(t)
    }
}

impl From<ComplexImage> for Tensor {
    fn from(x: ComplexImage) -> Self {
        Tensor::Complex(x)
    }
}

fn check_dims(rows: usize, cols: usize, channels: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 || channels == 0 {
        return Err(Error::invalid(format!(
            "dimensions must be nonzero, got {rows}x{cols}x{channels}"
        )));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::invalid("dimensions overflow"))?;
    if expected != len {
        return Err(Error::invalid(format!(
            "data length {len} does not match {rows}x{cols}x{channels}"
        )));
    }
    Ok(())
}
