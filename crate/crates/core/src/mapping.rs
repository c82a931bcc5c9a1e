//! Complex-to-real codecs.
//!
//! Three schemes turn an `M x N` complex image into a real tensor that a
//! real-valued network can consume:
//!
//! * [`MappingScheme::DirectRealImag`]: two channels, real and imaginary part.
//! * [`MappingScheme::DirectMagPhase`]: two channels, magnitude and phase/pi.
//! * [`MappingScheme::Nyquist`]: one `2M x 2N` channel whose spectrum holds
//!   the complex image's full (asymmetric) spectrum in its positive quadrant
//!   and the conjugate mirror in the negative quadrant.
//!
//! Nyquist encoding runs six steps: ideal (frequency-domain zero-padding)
//! upsampling by 2 per axis, modulation by `exp(j*pi*(m+n)/2)`, forward DFT,
//! forced conjugate symmetry `Y = (V + conj(V(-k,-l)))/2`, inverse DFT and
//! removal of the (numerically zero) imaginary residue. The bin at exactly
//! `-pi` on each axis of the input spectrum would land on the DC row/column of
//! the output, where symmetry forces it real, so the encoder zeroes it; the
//! codec is lossless on the remaining `(M-1) x (N-1)` band.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensorio::{dft2, idft2, wrapped_arg, ComplexImage, RealTensor, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingScheme {
    DirectRealImag,
    /// Phase channel carries `arg(x)/pi` in `[-1, 1)`.
    DirectMagPhase,
    Nyquist,
}

impl MappingScheme {
    pub fn encode(self, x: &ComplexImage) -> Result<RealTensor> {
        match self {
            MappingScheme::DirectRealImag => Ok(encode_real_imag(x)),
            MappingScheme::DirectMagPhase => Ok(encode_mag_phase(x)),
            MappingScheme::Nyquist => encode_nyquist(x),
        }
    }

    pub fn decode(self, t: &RealTensor) -> Result<ComplexImage> {
        match self {
            MappingScheme::DirectRealImag => decode_real_imag(t),
            MappingScheme::DirectMagPhase => decode_mag_phase(t),
            MappingScheme::Nyquist => decode_nyquist(t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MappingScheme::DirectRealImag => "reim",
            MappingScheme::DirectMagPhase => "magphase",
            MappingScheme::Nyquist => "nyquist",
        }
    }
}

impl fmt::Display for MappingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reim" | "real-imag" | "realimag" => Ok(MappingScheme::DirectRealImag),
            "magphase" | "mag-phase" => Ok(MappingScheme::DirectMagPhase),
            "nyquist" => Ok(MappingScheme::Nyquist),
            other => Err(Error::invalid(format!(
                "unknown mapping scheme '{other}' (expected nyquist, reim or magphase)"
            ))),
        }
    }
}

pub fn encode_real_imag(x: &ComplexImage) -> RealTensor {
    let data = x.data().iter().flat_map(|z| [z.re, z.im]).collect();
    RealTensor::from_raw(x.rows(), x.cols(), 2, data)
}

pub fn decode_real_imag(t: &RealTensor) -> Result<ComplexImage> {
    expect_channels(t, 2)?;
    let data = t
        .data()
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    Ok(ComplexImage::from_raw(t.rows(), t.cols(), data))
}

pub fn encode_mag_phase(x: &ComplexImage) -> RealTensor {
    let data = x
        .data()
        .iter()
        .flat_map(|&z| [z.norm(), wrapped_arg(z) / PI])
        .collect();
    RealTensor::from_raw(x.rows(), x.cols(), 2, data)
}

/// Inverse of [`encode_mag_phase`]; rejects phase values outside `[-1, 1)`
/// and negative magnitudes.
pub fn decode_mag_phase(t: &RealTensor) -> Result<ComplexImage> {
    expect_channels(t, 2)?;
    let mut data = Vec::with_capacity(t.rows() * t.cols());
    for (idx, p) in t.data().chunks_exact(2).enumerate() {
        let (mag, phase) = (p[0], p[1]);
        if !(-1.0..1.0).contains(&phase) {
            return Err(Error::OutOfRange(format!(
                "phase channel value {phase} at sample {idx} outside [-1, 1)"
            )));
        }
        if mag < 0.0 {
            return Err(Error::OutOfRange(format!(
                "negative magnitude {mag} at sample {idx}"
            )));
        }
        data.push(Complex64::from_polar(mag, PI * phase));
    }
    Ok(ComplexImage::from_raw(t.rows(), t.cols(), data))
}

/// Nyquist-mapped tensor together with the largest imaginary magnitude that
/// was discarded after the inverse DFT.
#[derive(Debug, Clone)]
pub struct NyquistEncoding {
    pub tensor: RealTensor,
    pub imag_residual: f64,
}

pub fn encode_nyquist(x: &ComplexImage) -> Result<RealTensor> {
    encode_nyquist_with_residual(x).map(|e| e.tensor)
}

pub fn encode_nyquist_with_residual(x: &ComplexImage) -> Result<NyquistEncoding> {
    let (m, n) = x.shape();
    if m % 2 != 0 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "Nyquist mapping needs even dimensions, got {m}x{n}"
        )));
    }
    let upsampled = upsample2_ideal(x);
    let modulated = modulate_quarter(&upsampled, 1);
    let spectrum = dft2(&modulated);
    let symmetric = force_conjugate_symmetry(&spectrum);
    let y = idft2(&symmetric);
    let imag_residual = y.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(NyquistEncoding {
        tensor: y.real_part(),
        imag_residual,
    })
}

/// Inverse of [`encode_nyquist`] on its image set: DFT, keep the positive
/// quadrant scaled by 2, demodulate, decimate by 2 in frequency.
pub fn decode_nyquist(t: &RealTensor) -> Result<ComplexImage> {
    expect_channels(t, 1)?;
    let (rows, cols) = (t.rows(), t.cols());
    if rows % 4 != 0 || cols % 4 != 0 {
        return Err(Error::invalid(format!(
            "Nyquist tensor must be 2M x 2N with M, N even, got {rows}x{cols}"
        )));
    }
    let (m, n) = (rows / 2, cols / 2);
    let spectrum = dft2(&t.channel_as_complex(0)?);
    let mut quadrant = Spectrum::zeros(rows, cols)?;
    for k in 0..m {
        for l in 0..n {
            quadrant.set(k, l, 2.0 * spectrum.get(k, l));
        }
    }
    let modulated = idft2(&quadrant);
    let upsampled = modulate_quarter(&modulated, -1);
    Ok(decimate2_ideal(&upsampled))
}

/// Zeroes the bins at normalized frequency `-pi` (index `M/2`, `N/2`) of an
/// even-sized image. Images returned by this function round-trip exactly
/// through the Nyquist codec.
pub fn zero_extreme_bins(x: &ComplexImage) -> Result<ComplexImage> {
    let (m, n) = x.shape();
    if m % 2 != 0 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "extreme bins are defined for even dimensions, got {m}x{n}"
        )));
    }
    let mut s = dft2(x);
    clear_extremes(&mut s);
    Ok(idft2(&s))
}

fn clear_extremes(s: &mut Spectrum) {
    let (m, n) = (s.rows(), s.cols());
    let zero = Complex64::new(0.0, 0.0);
    for l in 0..n {
        s.set(m / 2, l, zero);
    }
    for k in 0..m {
        s.set(k, n / 2, zero);
    }
}

/// Signed index of bin `k` on an axis of even length `len`, in `[-len/2, len/2)`.
fn signed(k: usize, len: usize) -> isize {
    if 2 * k >= len {
        k as isize - len as isize
    } else {
        k as isize
    }
}

fn wrap(k: isize, len: usize) -> usize {
    k.rem_euclid(len as isize) as usize
}

/// Ideal x2 interpolation: the spectrum is zero-padded into a `2M x 2N` grid
/// with gain 4 so that `u(2m, 2n) = x(m, n)`.
fn upsample2_ideal(x: &ComplexImage) -> ComplexImage {
    let (m, n) = x.shape();
    let mut s = dft2(x);
    clear_extremes(&mut s);
    let mut big = Spectrum::zeros(2 * m, 2 * n).expect("nonzero dims");
    for k in 0..m {
        let kk = wrap(signed(k, m), 2 * m);
        for l in 0..n {
            let ll = wrap(signed(l, n), 2 * n);
            big.set(kk, ll, 4.0 * s.get(k, l));
        }
    }
    idft2(&big)
}

/// Inverse of [`upsample2_ideal`]: keeps the bins in `[-M/2, M/2) x [-N/2, N/2)`.
fn decimate2_ideal(u: &ComplexImage) -> ComplexImage {
    let (rows, cols) = u.shape();
    let (m, n) = (rows / 2, cols / 2);
    let big = dft2(u);
    let mut s = Spectrum::zeros(m, n).expect("nonzero dims");
    for k in 0..m {
        let kk = wrap(signed(k, m), rows);
        for l in 0..n {
            let ll = wrap(signed(l, n), cols);
            s.set(k, l, 0.25 * big.get(kk, ll));
        }
    }
    idft2(&s)
}

/// Multiplies by `exp(sign * j*pi*(m+n)/2)` using the exact powers of `j`.
fn modulate_quarter(x: &ComplexImage, sign: i32) -> ComplexImage {
    let (rows, cols) = x.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        for n in 0..cols {
            let q = ((m + n) as i64 * sign as i64).rem_euclid(4);
            let z = x.get(m, n);
            data.push(match q {
                0 => z,
                1 => Complex64::new(-z.im, z.re),
                2 => -z,
                _ => Complex64::new(z.im, -z.re),
            });
        }
    }
    ComplexImage::from_raw(rows, cols, data)
}

fn force_conjugate_symmetry(s: &Spectrum) -> Spectrum {
    let (rows, cols) = (s.rows(), s.cols());
    let mut out = s.clone();
    for k in 0..rows {
        let km = (rows - k) % rows;
        for l in 0..cols {
            let lm = (cols - l) % cols;
            out.set(k, l, 0.5 * (s.get(k, l) + s.get(km, lm).conj()));
        }
    }
    out
}

fn expect_channels(t: &RealTensor, c: usize) -> Result<()> {
    if t.channels() != c {
        return Err(Error::ChannelCount {
            expected: c.to_string(),
            found: t.channels(),
        });
    }
    Ok(())
}

/// Spectral energy split of one channel.
///
/// Quadrants are named by the sign of the row and column frequency: `++`
/// holds bins with `2k < rows` and `2l < cols`, `--` their point mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSupport {
    pub channel: usize,
    /// Energy in quadrants `[++, +-, -+, --]`.
    pub quadrant_energy: [f64; 4],
    pub total_energy: f64,
    /// `||X(k,l) - conj(X(-k,-l))|| / ||X||`, 0 for an all-zero channel.
    pub symmetry_residual: f64,
    /// Energy fraction in the mixed-sign quadrants `+-` and `-+`.
    pub cross_leakage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    pub scheme: MappingScheme,
    pub channels: Vec<ChannelSupport>,
}

pub const QUADRANT_NAMES: [&str; 4] = ["++", "+-", "-+", "--"];

impl SupportReport {
    /// CSV with header `channel,quadrant,energy,residual`; a `total` row per
    /// channel carries the total energy and the cross-quadrant leakage in the
    /// residual column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,quadrant,energy,residual\n");
        for ch in &self.channels {
            for (name, e) in QUADRANT_NAMES.iter().zip(ch.quadrant_energy) {
                out.push_str(&format!(
                    "{},{},{:e},{:e}\n",
                    ch.channel, name, e, ch.symmetry_residual
                ));
            }
            out.push_str(&format!(
                "{},total,{:e},{:e}\n",
                ch.channel, ch.total_energy, ch.cross_leakage
            ));
        }
        out
    }
}

/// Per-channel quadrant energies and conjugate-symmetry residual of an
/// encoded tensor. For a Nyquist-mapped tensor the residual is at rounding
/// level and the mixed quadrants are empty.
pub fn spectrum_support(t: &RealTensor, scheme: MappingScheme) -> Result<SupportReport> {
    let channels = (0..t.channels())
        .map(|c| {
            let s = dft2(&t.channel_as_complex(c)?);
            Ok(channel_support(c, &s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SupportReport { scheme, channels })
}

pub(crate) fn channel_support(channel: usize, s: &Spectrum) -> ChannelSupport {
    let (rows, cols) = (s.rows(), s.cols());
    let mut quadrant_energy = [0.0; 4];
    let mut diff = 0.0;
    for k in 0..rows {
        let km = (rows - k) % rows;
        for l in 0..cols {
            let lm = (cols - l) % cols;
            let z = s.get(k, l);
            let q = (usize::from(2 * k >= rows) << 1) | usize::from(2 * l >= cols);
            quadrant_energy[q] += z.norm_sqr();
            diff += (z - s.get(km, lm).conj()).norm_sqr();
        }
    }
    let total_energy: f64 = quadrant_energy.iter().sum();
    let (symmetry_residual, cross_leakage) = if total_energy > 0.0 {
        (
            (diff / total_energy).sqrt(),
            (quadrant_energy[1] + quadrant_energy[2]) / total_energy,
        )
    } else {
        (0.0, 0.0)
    };
    ChannelSupport {
        channel,
        quadrant_energy,
        total_energy,
        symmetry_residual,
        cross_leakage,
    }
}
