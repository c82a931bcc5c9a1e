//! Forward-only CNN layer simulator.
//!
//! A layer is a bank of `I x J` FIR kernels followed by a per-output bias, a
//! pointwise activation and optional unfiltered resampling. The simulator
//! records spectra after each stage so the harmonics created by activations
//! and the aliases created by resampling can be measured and compared with
//! the folding rule in [`predict_alias`].

mod config;

pub use config::{parse_chain, CannedKernel};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::taylor::softplus_warped_unchecked;
use crate::tensorio::{dft1, dft2, ComplexImage, RealTensor, Spectrum};

/// Default peak threshold above the median spectral floor, in dB.
pub const DEFAULT_PEAK_THRESHOLD_DB: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
    /// `(1/alpha) * ln(1 + exp(alpha * z))`.
    SoftplusWarped(f64),
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::SoftplusWarped(alpha) => softplus_warped_unchecked(z, alpha),
        }
    }

    fn validate(self) -> Result<()> {
        if let Activation::SoftplusWarped(alpha) = self {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::invalid(format!(
                    "softplus alpha must be > 0, got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

/// Logistic function, evaluated without overflow for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => f.write_str("identity"),
            Activation::Relu => f.write_str("relu"),
            Activation::Sigmoid => f.write_str("sigmoid"),
            Activation::Tanh => f.write_str("tanh"),
            Activation::SoftplusWarped(a) => write!(f, "softplus:{a}"),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    /// `identity`, `relu`, `sigmoid`, `tanh` or `softplus:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let act = match s.as_str() {
            "identity" | "linear" | "none" => Activation::Identity,
            "relu" => Activation::Relu,
            "sigmoid" => Activation::Sigmoid,
            "tanh" => Activation::Tanh,
            other => {
                let alpha = other
                    .strip_prefix("softplus:")
                    .ok_or_else(|| Error::invalid(format!("unknown activation '{other}'")))?;
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad softplus alpha '{alpha}'")))?;
                Activation::SoftplusWarped(alpha)
            }
        };
        act.validate()?;
        Ok(act)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    None,
    /// Keep every second row and column, no anti-alias filter.
    Down2,
    /// Zero insertion, no interpolation filter.
    Up2,
}

impl FromStr for Resample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Resample::None),
            "down2" => Ok(Resample::Down2),
            "up2" => Ok(Resample::Up2),
            other => Err(Error::invalid(format!("unknown resample mode '{other}'"))),
        }
    }
}

impl fmt::Display for Resample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resample::None => "none",
            Resample::Down2 => "down2",
            Resample::Up2 => "up2",
        })
    }
}

/// One convolutional layer.
///
/// `kernels[i * out_channels + j]` holds the weight kernel `w_ij` mapping
/// input channel `i` to output channel `j`, `kernel_size^2` values row-major.
/// The layer applies it as a cross-correlation, which is a convolution with
/// the impulse response `h_ij = rot180(w_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    in_channels: usize,
    out_channels: usize,
    kernel_size: usize,
    kernels: Vec<Vec<f64>>,
    biases: Vec<f64>,
    activation: Activation,
    resample: Resample,
}

impl LayerSpec {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        kernels: Vec<Vec<f64>>,
        biases: Vec<f64>,
        activation: Activation,
        resample: Resample,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::invalid("layer channel counts must be nonzero"));
        }
        if kernel_size == 0 || kernel_size.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "kernel side must be odd, got {kernel_size}"
            )));
        }
        if kernels.len() != in_channels * out_channels {
            return Err(Error::invalid(format!(
                "expected {} kernels, got {}",
                in_channels * out_channels,
                kernels.len()
            )));
        }
        if kernels.iter().any(|k| k.len() != kernel_size * kernel_size) {
            return Err(Error::invalid(format!(
                "every kernel needs {} values",
                kernel_size * kernel_size
            )));
        }
        if biases.len() != out_channels {
            return Err(Error::invalid(format!(
                "expected {out_channels} biases, got {}",
                biases.len()
            )));
        }
        if kernels
            .iter()
            .flatten()
            .chain(&biases)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("kernel and bias values must be finite"));
        }
        activation.validate()?;
        Ok(Self {
            in_channels,
            out_channels,
            kernel_size,
            kernels,
            biases,
            activation,
            resample,
        })
    }

    /// Single-channel layer built from one canned kernel.
    pub fn canned(
        kernel: CannedKernel,
        kernel_size: usize,
        bias: f64,
        activation: Activation,
        resample: Resample,
    ) -> Result<Self> {
        Self::new(
            1,
            1,
            kernel_size,
            vec![kernel.weights(kernel_size)?],
            vec![bias],
            activation,
            resample,
        )
    }

    /// 1-in, 1-out layer with a centered unit impulse and no bias.
    pub fn identity(activation: Activation) -> Self {
        Self::canned(CannedKernel::Impulse, 1, 0.0, activation, Resample::None)
            .expect("identity layer is valid")
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn kernel(&self, i: usize, j: usize) -> &[f64] {
        &self.kernels[i * self.out_channels + j]
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn resample(&self) -> Resample {
        self.resample
    }
}

/// Ordered, channel-compatible layers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerChain {
    layers: Vec<LayerSpec>,
}

impl LayerChain {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_channels != pair[1].in_channels {
                return Err(Error::invalid(format!(
                    "layer {k} emits {} channels but layer {} expects {}",
                    pair[0].out_channels,
                    k + 1,
                    pair[1].in_channels
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Checks that an input of `rows x cols` survives every resampling step
    /// with even dimensions where `Down2` needs them.
    pub fn check_input(&self, rows: usize, cols: usize, channels: usize) -> Result<()> {
        if let Some(first) = self.layers.first() {
            if first.in_channels != channels {
                return Err(Error::ChannelCount {
                    expected: first.in_channels.to_string(),
                    found: channels,
                });
            }
        }
        let (mut r, mut c) = (rows, cols);
        for (k, layer) in self.layers.iter().enumerate() {
            match layer.resample {
                Resample::Down2 => {
                    if r % 2 != 0 || c % 2 != 0 || r < 2 || c < 2 {
                        return Err(Error::invalid(format!(
                            "layer {k} downsamples a {r}x{c} signal"
                        )));
                    }
                    r /= 2;
                    c /= 2;
                }
                Resample::Up2 => {
                    r *= 2;
                    c *= 2;
                }
                Resample::None => {}
            }
        }
        Ok(())
    }
}

/// Multichannel FIR filtering without bias, 'same' size with zero padding.
pub fn convolve(x: &RealTensor, spec: &LayerSpec) -> Result<RealTensor> {
    if x.channels() != spec.in_channels {
        return Err(Error::ChannelCount {
            expected: spec.in_channels.to_string(),
            found: x.channels(),
        });
    }
    let (rows, cols) = (x.rows(), x.cols());
    let k = spec.kernel_size;
    let c = (k / 2) as isize;
    let inputs: Vec<Vec<f64>> = (0..spec.in_channels).map(|i| x.plane(i)).collect();
    let outputs: Vec<Vec<f64>> = (0..spec.out_channels)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; rows * cols];
            for (i, plane) in inputs.iter().enumerate() {
                let w = spec.kernel(i, j);
                for m in 0..rows {
                    for n in 0..cols {
                        let mut acc = 0.0;
                        for p in 0..k {
                            let r = m as isize + p as isize - c;
                            if r < 0 || r >= rows as isize {
                                continue;
                            }
                            let row = &plane[r as usize * cols..(r as usize + 1) * cols];
                            for q in 0..k {
                                let s = n as isize + q as isize - c;
                                if s < 0 || s >= cols as isize {
                                    continue;
                                }
                                acc += row[s as usize] * w[p * k + q];
                            }
                        }
                        out[m * cols + n] += acc;
                    }
                }
            }
            out
        })
        .collect();
    RealTensor::from_planes(rows, cols, &outputs)
}

fn add_bias(z: &RealTensor, biases: &[f64]) -> RealTensor {
    let ch = z.channels();
    let data = z
        .data()
        .iter()
        .enumerate()
        .map(|(idx, &v)| v + biases[idx % ch])
        .collect();
    RealTensor::from_raw(z.rows(), z.cols(), ch, data)
}

/// `z_j = sum_i x_i * h_ij + b_j`.
pub fn conv_layer(x: &RealTensor, spec: &LayerSpec) -> Result<RealTensor> {
    let z = convolve(x, spec)?;
    Ok(add_bias(&z, &spec.biases))
}

/// Pointwise activation.
pub fn activate(z: &RealTensor, activation: Activation) -> Result<RealTensor> {
    activation.validate()?;
    z.map(|v| activation.apply(v))
}

/// Unfiltered resampling.
pub fn resample(x: &RealTensor, mode: Resample) -> Result<RealTensor> {
    let (rows, cols, ch) = x.shape();
    match mode {
        Resample::None => Ok(x.clone()),
        Resample::Down2 => {
            if rows % 2 != 0 || cols % 2 != 0 {
                return Err(Error::invalid(format!(
                    "Down2 needs even dimensions, got {rows}x{cols}"
                )));
            }
            let (r2, c2) = (rows / 2, cols / 2);
            RealTensor::from_fn(r2, c2, ch, |m, n, c| x.get(2 * m, 2 * n, c))
        }
        Resample::Up2 => RealTensor::from_fn(2 * rows, 2 * cols, ch, |m, n, c| {
            if m % 2 == 0 && n % 2 == 0 {
                x.get(m / 2, n / 2, c)
            } else {
                0.0
            }
        }),
    }
}

/// `omega - omega_s * round(omega / omega_s)` with ties rounded up, so the
/// result lies in `[-omega_s/2, omega_s/2)`.
pub fn predict_alias(omega: f64, omega_s: f64) -> f64 {
    debug_assert!(omega_s > 0.0);
    let mut f = omega - omega_s * (omega / omega_s + 0.5).floor();
    let half = 0.5 * omega_s;
    if f >= half {
        f -= omega_s;
    } else if f < -half {
        f += omega_s;
    }
    f
}

/// DFT bin (in `0..len`) nearest to normalized frequency `omega`.
pub fn frequency_bin(omega: f64, len: usize) -> usize {
    let b = (predict_alias(omega, 2.0 * PI) * len as f64 / (2.0 * PI)).round() as i64;
    b.rem_euclid(len as i64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    PostConv,
    PostBias,
    PostActivation,
    PostResample,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::PostConv => "post-conv",
            Stage::PostBias => "post-bias",
            Stage::PostActivation => "post-activation",
            Stage::PostResample => "post-resample",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub bin: usize,
    pub magnitude: f64,
    /// `20*log10(magnitude + eps)`, floored like [`Spectrum::log_magnitude`].
    pub level_db: f64,
}

/// Local maxima (strictly above both circular neighbours) that stand at
/// least `threshold_db` above the median log-magnitude, sorted by descending
/// magnitude.
pub fn find_peaks(spectrum: &[Complex64], threshold_db: f64) -> Vec<Peak> {
    let len = spectrum.len();
    if len == 0 {
        return Vec::new();
    }
    let mags: Vec<f64> = spectrum.iter().map(|z| z.norm()).collect();
    let levels: Vec<f64> = mags.iter().map(|&m| crate::tensorio::log_db(m)).collect();
    let floor = median(&levels);
    let mut peaks: Vec<Peak> = (0..len)
        .filter(|&k| {
            let prev = mags[(k + len - 1) % len];
            let next = mags[(k + 1) % len];
            let local = len == 1 || (mags[k] > prev && mags[k] > next);
            local && levels[k] >= floor + threshold_db
        })
        .map(|k| Peak {
            bin: k,
            magnitude: mags[k],
            level_db: levels[k],
        })
        .collect();
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.bin.cmp(&b.bin)));
    peaks
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Spectrum of one channel at one stage of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProbe {
    pub layer: usize,
    pub stage: Stage,
    pub channel: usize,
    /// Full 2-D DFT of the channel.
    pub spectrum: Spectrum,
    /// 1-D DFT of the row `m = rows/2`.
    pub slice: Vec<Complex64>,
    /// Peaks of `slice`.
    pub peaks: Vec<Peak>,
}

impl SpectralProbe {
    fn capture(
        layer: usize,
        stage: Stage,
        t: &RealTensor,
        threshold_db: f64,
    ) -> Result<Vec<SpectralProbe>> {
        (0..t.channels())
            .map(|c| {
                let img = t.channel_as_complex(c)?;
                let slice = row_slice_spectrum(&img);
                let peaks = find_peaks(&slice, threshold_db);
                Ok(SpectralProbe {
                    layer,
                    stage,
                    channel: c,
                    spectrum: dft2(&img),
                    slice,
                    peaks,
                })
            })
            .collect()
    }

    /// CSV peak table with header `rank,bin,omega,magnitude,level_db`.
    pub fn peaks_csv(&self) -> String {
        let len = self.slice.len();
        let mut out = String::from("rank,bin,omega,magnitude,level_db\n");
        for (rank, p) in self.peaks.iter().enumerate() {
            out.push_str(&format!(
                "{rank},{},{},{:e},{}\n",
                p.bin,
                Spectrum::bin_frequency(p.bin, len),
                p.magnitude,
                p.level_db
            ));
        }
        out
    }
}

fn row_slice_spectrum(img: &ComplexImage) -> Vec<Complex64> {
    let m = img.rows() / 2;
    let row: Vec<Complex64> = (0..img.cols()).map(|n| img.get(m, n)).collect();
    dft1(&row)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub threshold_db: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            threshold_db: DEFAULT_PEAK_THRESHOLD_DB,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub output: RealTensor,
    pub probes: Vec<SpectralProbe>,
}

/// Runs every layer in order, probing with the default peak threshold when
/// `probe` is set.
pub fn run_chain(x: &RealTensor, chain: &LayerChain, probe: bool) -> Result<ChainOutput> {
    run_chain_with(x, chain, probe.then(ProbeOptions::default))
}

pub fn run_chain_with(
    x: &RealTensor,
    chain: &LayerChain,
    probe: Option<ProbeOptions>,
) -> Result<ChainOutput> {
    chain.check_input(x.rows(), x.cols(), x.channels())?;
    let mut probes = Vec::new();
    let mut cur = x.clone();
    for (idx, layer) in chain.layers.iter().enumerate() {
        let conv = convolve(&cur, layer)?;
        let biased = add_bias(&conv, &layer.biases);
        let activated = activate(&biased, layer.activation)?;
        if let Some(opts) = probe {
            probes.extend(SpectralProbe::capture(
                idx,
                Stage::PostConv,
                &conv,
                opts.threshold_db,
            )?);
            probes.extend(SpectralProbe::capture(
                idx,
                Stage::PostBias,
                &biased,
                opts.threshold_db,
            )?);
            probes.extend(SpectralProbe::capture(
                idx,
                Stage::PostActivation,
                &activated,
                opts.threshold_db,
            )?);
        }
        cur = activated;
        if layer.resample != Resample::None {
            cur = resample(&cur, layer.resample)?;
            if let Some(opts) = probe {
                probes.extend(SpectralProbe::capture(
                    idx,
                    Stage::PostResample,
                    &cur,
                    opts.threshold_db,
                )?);
            }
        }
    }
    Ok(ChainOutput {
        output: cur,
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicStatus {
    Ok,
    /// The fundamental is not on a DFT bin; leakage makes matching unreliable.
    NotBinAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicRow {
    pub k: usize,
    /// Fold of `k * omega0` into `[-pi, pi)`.
    pub predicted_omega: f64,
    pub predicted_bin: usize,
    /// Nearest detected peak (circular distance), if any.
    pub measured_bin: Option<usize>,
    /// Level at the predicted bin relative to the fundamental, in dB.
    pub level_db: f64,
    /// A detected peak lies within one bin of the prediction.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicReport {
    pub status: HarmonicStatus,
    pub len: usize,
    pub rows: Vec<HarmonicRow>,
    pub peaks: Vec<Peak>,
}

impl HarmonicReport {
    pub fn row(&self, k: usize) -> Option<&HarmonicRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("k,predicted_omega,predicted_bin,measured_bin,level_db,matched\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k,
                r.predicted_omega,
                r.predicted_bin,
                r.measured_bin.map(|b| b.to_string()).unwrap_or_default(),
                r.level_db,
                r.matched
            ));
        }
        out
    }
}

/// Compares the harmonics `k * omega0` (`k = 0..=k_max`) predicted by the
/// folding rule with the measured spectrum of the row `m = rows/2` of a
/// single-channel tensor.
pub fn harmonic_report(y: &RealTensor, omega0: f64, k_max: usize) -> Result<HarmonicReport> {
    harmonic_report_with(y, omega0, k_max, DEFAULT_PEAK_THRESHOLD_DB)
}

pub fn harmonic_report_with(
    y: &RealTensor,
    omega0: f64,
    k_max: usize,
    threshold_db: f64,
) -> Result<HarmonicReport> {
    if y.channels() != 1 {
        return Err(Error::ChannelCount {
            expected: "1".into(),
            found: y.channels(),
        });
    }
    let slice = row_slice_spectrum(&y.channel_as_complex(0)?);
    Ok(harmonic_report_from_slice(
        &slice,
        omega0,
        k_max,
        threshold_db,
    ))
}

pub(crate) fn harmonic_report_from_slice(
    slice: &[Complex64],
    omega0: f64,
    k_max: usize,
    threshold_db: f64,
) -> HarmonicReport {
    let len = slice.len();
    let exact = omega0 * len as f64 / (2.0 * PI);
    let status = if (exact - exact.round()).abs() <= 1e-9 {
        HarmonicStatus::Ok
    } else {
        HarmonicStatus::NotBinAligned
    };
    let peaks = find_peaks(slice, threshold_db);
    let fundamental = slice[frequency_bin(omega0, len)].norm();
    let rows = (0..=k_max)
        .map(|k| {
            let predicted_omega = predict_alias(k as f64 * omega0, 2.0 * PI);
            let predicted_bin = frequency_bin(predicted_omega, len);
            let measured_bin = peaks
                .iter()
                .map(|p| p.bin)
                .min_by_key(|&b| circular_distance(b, predicted_bin, len));
            let matched =
                measured_bin.is_some_and(|b| circular_distance(b, predicted_bin, len) <= 1);
            let level_db = 20.0
                * ((slice[predicted_bin].norm() + crate::tensorio::LOG_MAG_EPS)
                    / (fundamental + crate::tensorio::LOG_MAG_EPS))
                    .log10();
            HarmonicRow {
                k,
                predicted_omega,
                predicted_bin,
                measured_bin,
                level_db,
                matched,
            }
        })
        .collect();
    HarmonicReport {
        status,
        len,
        rows,
        peaks,
    }
}

fn circular_distance(a: usize, b: usize, len: usize) -> usize {
    let d = a.abs_diff(b) % len;
    d.min(len - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize, cols: usize) -> RealTensor {
        RealTensor::from_fn(rows, cols, 1, |m, n, _| (m * cols + n) as f64 * 0.1 - 1.0).unwrap()
    }

    fn cos_tone(rows: usize, cols: usize, k0: usize, amp: f64) -> RealTensor {
        RealTensor::from_fn(rows, cols, 1, |_, n, _| {
            amp * (2.0 * PI * (k0 * n) as f64 / cols as f64).cos()
        })
        .unwrap()
    }

    #[test]
    fn impulse_kernel_is_identity() {
        let x = ramp(6, 7);
        let layer = LayerSpec::canned(
            CannedKernel::Impulse,
            3,
            0.0,
            Activation::Identity,
            Resample::None,
        )
        .unwrap();
        let z = conv_layer(&x, &layer).unwrap();
        assert!(z.max_abs_diff(&x).unwrap() <= 1e-14);
    }

    #[test]
    fn zero_kernel_leaves_bias() {
        let x = ramp(4, 4);
        let layer = LayerSpec::new(
            1,
            2,
            3,
            vec![vec![0.0; 9]; 2],
            vec![0.25, -3.0],
            Activation::Identity,
            Resample::None,
        )
        .unwrap();
        let z = conv_layer(&x, &layer).unwrap();
        assert!(z.plane(0).iter().all(|&v| v == 0.25));
        assert!(z.plane(1).iter().all(|&v| v == -3.0));
    }

    #[test]
    fn weights_act_as_correlation() {
        // w = [1, 2, 3] along a row; correlation picks x(n-1)*1 + x(n)*2 + x(n+1)*3
        let x = RealTensor::new(1, 3, 1, vec![1.0, 10.0, 100.0]).unwrap();
        let mut w = vec![0.0; 9];
        w[3..6].copy_from_slice(&[1.0, 2.0, 3.0]);
        let layer = LayerSpec::new(
            1,
            1,
            3,
            vec![w],
            vec![0.0],
            Activation::Identity,
            Resample::None,
        )
        .unwrap();
        let z = conv_layer(&x, &layer).unwrap();
        assert_eq!(z.data(), &[2.0 + 30.0, 1.0 + 20.0 + 300.0, 10.0 + 200.0]);
    }

    #[test]
    fn layer_validation() {
        let ok = |k: usize, kernels: usize, biases: usize| {
            LayerSpec::new(
                1,
                2,
                k,
                vec![vec![0.0; k * k]; kernels],
                vec![0.0; biases],
                Activation::Relu,
                Resample::None,
            )
        };
        assert!(ok(3, 2, 2).is_ok());
        assert!(ok(2, 2, 2).is_err());
        assert!(ok(3, 1, 2).is_err());
        assert!(ok(3, 2, 1).is_err());
        let x = RealTensor::zeros(4, 4, 2).unwrap();
        assert!(matches!(
            conv_layer(&x, &ok(3, 2, 2).unwrap()),
            Err(Error::ChannelCount { .. })
        ));
    }

    #[test]
    fn activation_values() {
        assert_eq!(Activation::Relu.apply(-1.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.0), 2.0);
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        let sp = Activation::SoftplusWarped(100.0).apply(0.0);
        assert!((sp - 2f64.ln() / 100.0).abs() < 1e-15);
        assert!((sp - 0.0069315).abs() < 1e-7);
        assert_eq!(Activation::Sigmoid.apply(-1000.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(1000.0), 1.0);
    }

    #[test]
    fn activation_parsing() {
        assert_eq!("ReLU".parse::<Activation>().unwrap(), Activation::Relu);
        assert_eq!(
            "softplus:50".parse::<Activation>().unwrap(),
            Activation::SoftplusWarped(50.0)
        );
        assert!("softplus:-1".parse::<Activation>().is_err());
        assert!("gelu".parse::<Activation>().is_err());
        assert_eq!(Activation::SoftplusWarped(2.5).to_string(), "softplus:2.5");
    }

    #[test]
    fn up2_inserts_zeros() {
        let x = RealTensor::new(1, 1, 1, vec![1.0]).unwrap();
        let y = resample(&x, Resample::Up2).unwrap();
        assert_eq!(y.shape(), (2, 2, 1));
        assert_eq!(y.data(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn down2_requires_even() {
        assert!(resample(&ramp(3, 4), Resample::Down2).is_err());
        let y = resample(&ramp(4, 4), Resample::Down2).unwrap();
        let expect = [-1.0, -0.8, -0.2, 0.0];
        assert!(y
            .data()
            .iter()
            .zip(expect)
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn down2_folds_tone() {
        // 0.3 * fs on 40 samples is bin 12; after Down2 the tone sits at 0.6 of
        // the new rate, which folds to -0.4, i.e. bin 12 of 20
        let x = cos_tone(4, 40, 12, 1.0);
        let y = resample(&x, Resample::Down2).unwrap();
        let predicted = predict_alias(2.0 * 2.0 * PI * 0.3, 2.0 * PI);
        assert!((predicted + 0.4 * 2.0 * PI).abs() < 1e-12);
        let bin = frequency_bin(predicted, 20);
        assert_eq!(bin, 12);
        let peaks = find_peaks(&row_slice_spectrum(&y.channel_as_complex(0).unwrap()), 6.0);
        assert!(peaks.iter().any(|p| p.bin == bin));
    }

    #[test]
    fn up2_then_baseband_projection_recovers_input() {
        let x = ramp(4, 6);
        let up = resample(&x, Resample::Up2).unwrap();
        let big = dft2(&up.channel_as_complex(0).unwrap());
        let mut base = Spectrum::zeros(4, 6).unwrap();
        for k in 0..4usize {
            for l in 0..6usize {
                let kk = if 2 * k >= 4 { k + 4 } else { k };
                let ll = if 2 * l >= 6 { l + 6 } else { l };
                base.set(k, l, big.get(kk, ll));
            }
        }
        let back = crate::tensorio::idft2(&base).real_part();
        assert!(back.max_abs_diff(&x).unwrap() <= 1e-10);
    }

    #[test]
    fn alias_examples() {
        let ws = 2.0 * PI;
        assert!((predict_alias(0.7 * ws, ws) + 0.3 * ws).abs() < 1e-12);
        assert_eq!(predict_alias(0.5 * ws, ws), -0.5 * ws);
        assert!((predict_alias(1.2 * ws, ws) - 0.2 * ws).abs() < 1e-12);
        assert_eq!(predict_alias(0.5, 1.0), -0.5);
        assert_eq!(predict_alias(-0.5, 1.0), -0.5);
    }

    #[test]
    fn empty_and_identity_chains() {
        let x = ramp(4, 4);
        let out = run_chain(&x, &LayerChain::default(), true).unwrap();
        assert_eq!(out.output, x);
        assert!(out.probes.is_empty());

        let chain = LayerChain::new(vec![LayerSpec::identity(Activation::Identity)]).unwrap();
        let out = run_chain(&x, &chain, true).unwrap();
        assert!(out.output.max_abs_diff(&x).unwrap() <= 1e-14);
        let stages: Vec<Stage> = out.probes.iter().map(|p| p.stage).collect();
        assert_eq!(
            stages,
            vec![Stage::PostConv, Stage::PostBias, Stage::PostActivation]
        );
    }

    #[test]
    fn chain_compatibility() {
        let a = LayerSpec::new(
            1,
            2,
            1,
            vec![vec![1.0]; 2],
            vec![0.0; 2],
            Activation::Relu,
            Resample::Down2,
        )
        .unwrap();
        let b = LayerSpec::identity(Activation::Relu);
        assert!(LayerChain::new(vec![a.clone(), b]).is_err());
        let chain = LayerChain::new(vec![a.clone(), a.clone()]);
        assert!(chain.is_err());
        let chain = LayerChain::new(vec![a]).unwrap();
        assert!(run_chain(&RealTensor::zeros(3, 4, 1).unwrap(), &chain, false).is_err());
        let out = run_chain(&RealTensor::zeros(4, 4, 1).unwrap(), &chain, true).unwrap();
        assert_eq!(out.output.shape(), (2, 2, 2));
        assert_eq!(out.probes.len(), 8);
    }

    #[test]
    fn peaks_sorted_descending() {
        let mut s = vec![Complex64::new(0.0, 0.0); 32];
        s[3] = Complex64::new(5.0, 0.0);
        s[9] = Complex64::new(0.0, 7.0);
        s[20] = Complex64::new(1.0, 0.0);
        let p = find_peaks(&s, 6.0);
        assert_eq!(p.iter().map(|p| p.bin).collect::<Vec<_>>(), vec![9, 3, 20]);
    }

    #[test]
    fn relu_tone_harmonics_match_prediction() {
        let (cols, k0) = (128, 5);
        let omega0 = 2.0 * PI * k0 as f64 / cols as f64;
        let x = cos_tone(4, cols, k0, 1.0);
        let chain = LayerChain::new(vec![LayerSpec::identity(Activation::Relu)]).unwrap();
        let out = run_chain(&x, &chain, true).unwrap();
        let post = out
            .probes
            .iter()
            .find(|p| p.stage == Stage::PostActivation)
            .unwrap();
        let report = harmonic_report(&out.output, omega0, 8).unwrap();
        assert_eq!(report.status, HarmonicStatus::Ok);
        for k in [0usize, 1, 2, 4, 6, 8] {
            let row = report.row(k).unwrap();
            assert!(row.matched, "k={k}: {row:?}");
            assert!(post.peaks.iter().any(|p| p.bin == row.predicted_bin));
        }
    }

    #[test]
    fn misaligned_tone_warns() {
        let x = cos_tone(2, 64, 3, 1.0);
        let r = harmonic_report(&x, 2.0 * PI * 3.3 / 64.0, 3).unwrap();
        assert_eq!(r.status, HarmonicStatus::NotBinAligned);
        assert!(harmonic_report(&RealTensor::zeros(2, 2, 2).unwrap(), 0.1, 1).is_err());
    }
}
