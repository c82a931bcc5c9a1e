//! Figure-style Onetone panel set.
//!
//! A Onetone patch plays the "real" image. The "fake" is the same patch with
//! an optional perturbation, so the interferometric metric chain can be
//! exercised without a trained generator. Metrics are computed on the
//! complex pair itself; the Nyquist rasters show how each image looks after
//! mapping.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mapping::{decode_nyquist, encode_nyquist, zero_extreme_bins};
use crate::metrics::{coherence, interferogram, DEFAULT_WINDOW};
use crate::rng;
use crate::scenegen::{gen_onetone, OnetoneSpec};
use crate::tensorio::{dft2, export_image, save_tensor, ComplexImage, Normalization, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// Multiply every sample by `exp(j*phi)`, `phi ~ N(0, sigma^2)` i.i.d.
    PhaseNoise {
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigOptions {
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub window: usize,
    pub perturbation: Perturbation,
}

impl Default for FigOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            rows: 128,
            cols: 128,
            window: DEFAULT_WINDOW,
            perturbation: Perturbation::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigSummary {
    pub patch_seed: u64,
    pub mean_coherence: f64,
    pub coherence_loss: f64,
    /// Max-abs error of the Nyquist round trip of the real patch against its
    /// band-limited version.
    pub nyquist_roundtrip_error: f64,
    pub files: Vec<String>,
}

impl FigSummary {
    fn to_csv(&self, opts: &FigOptions) -> String {
        let (name, sigma) = match opts.perturbation {
            Perturbation::None => ("none", 0.0),
            Perturbation::PhaseNoise { sigma } => ("phase-noise", sigma),
        };
        let mut out = String::from("key,value\n");
        let _ = writeln!(out, "seed,{}", opts.seed);
        let _ = writeln!(out, "patch_seed,{}", self.patch_seed);
        let _ = writeln!(out, "rows,{}", opts.rows);
        let _ = writeln!(out, "cols,{}", opts.cols);
        let _ = writeln!(out, "window,{}", opts.window);
        let _ = writeln!(out, "perturbation,{name}");
        let _ = writeln!(out, "sigma,{sigma}");
        let _ = writeln!(out, "mean_coherence,{}", self.mean_coherence);
        let _ = writeln!(out, "coherence_loss,{}", self.coherence_loss);
        let _ = writeln!(
            out,
            "nyquist_roundtrip_error,{:e}",
            self.nyquist_roundtrip_error
        );
        out
    }
}

/// Applies `perturbation` to `x` with noise drawn from `seed`.
pub fn perturb(x: &ComplexImage, perturbation: Perturbation, seed: u64) -> Result<ComplexImage> {
    match perturbation {
        Perturbation::None => Ok(x.clone()),
        Perturbation::PhaseNoise { sigma } => {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::invalid(format!(
                    "phase noise sigma must be >= 0, got {sigma}"
                )));
            }
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::invalid(format!("phase noise sigma {sigma}: {e}")))?;
            let mut r = rng::from_seed(seed);
            let data = x
                .data()
                .iter()
                .map(|&z| z * Complex64::from_polar(1.0, normal.sample(&mut r)))
                .collect();
            ComplexImage::new(x.rows(), x.cols(), data)
        }
    }
}

/// Writes the Onetone panel set into `out_dir` and returns summary metrics.
pub fn fig_onetone(opts: &FigOptions, out_dir: impl AsRef<Path>) -> Result<FigSummary> {
    fig_onetone_against(opts, None, out_dir)
}

/// Like [`fig_onetone`], but compares the real patch against `fake` when one
/// is given instead of perturbing the patch. `fake` must be `rows x cols`.
pub fn fig_onetone_against(
    opts: &FigOptions,
    fake: Option<&ComplexImage>,
    out_dir: impl AsRef<Path>,
) -> Result<FigSummary> {
    let out_dir = out_dir.as_ref();
    if !opts.rows.is_multiple_of(2) || !opts.cols.is_multiple_of(2) {
        return Err(Error::invalid(
            "figure patches need even dimensions for Nyquist mapping",
        ));
    }
    fs::create_dir_all(out_dir)?;
    let patch_seed = rng::sub_seed(opts.seed, 0);
    let onetone = gen_onetone(&OnetoneSpec::from_seed(opts.rows, opts.cols, patch_seed))?;
    let real = onetone.patch;
    let fake = match fake {
        Some(f) if f.shape() != real.shape() => {
            return Err(Error::DimensionMismatch(format!(
                "fake image is {:?}, patch is {:?}",
                f.shape(),
                real.shape()
            )))
        }
        Some(f) => f.clone(),
        None => perturb(&real, opts.perturbation, rng::sub_seed(opts.seed, 1))?,
    };

    let mut files = Vec::new();
    let mut raster = |t: &crate::RealTensor, name: &str, norm: Normalization| -> Result<()> {
        export_image(t, out_dir.join(name), norm)?;
        files.push(name.to_string());
        Ok(())
    };
    let unit = Normalization::Fixed(-1.0, 1.0);

    raster(
        &onetone.conditioning,
        "conditioning.ppm",
        Normalization::Fixed(0.0, 1.0),
    )?;
    raster(&real.real_part(), "real_re.pgm", unit)?;
    raster(&real.imag_part(), "real_im.pgm", unit)?;
    raster(&fake.real_part(), "fake_re.pgm", unit)?;
    raster(&fake.imag_part(), "fake_im.pgm", unit)?;

    let real_ny = encode_nyquist(&real)?;
    let fake_ny = encode_nyquist(&fake)?;
    raster(&real_ny, "real_nyquist.pgm", Normalization::MinMax)?;
    raster(&fake_ny, "fake_nyquist.pgm", Normalization::MinMax)?;
    raster(
        &dft2(&real).shifted_log_magnitude(),
        "real_spectrum.pgm",
        Normalization::MinMax,
    )?;
    raster(
        &dft2(&fake).shifted_log_magnitude(),
        "fake_spectrum.pgm",
        Normalization::MinMax,
    )?;
    raster(
        &dft2(&real_ny.channel_as_complex(0)?).shifted_log_magnitude(),
        "real_nyquist_spectrum.pgm",
        Normalization::MinMax,
    )?;
    raster(
        &dft2(&fake_ny.channel_as_complex(0)?).shifted_log_magnitude(),
        "fake_nyquist_spectrum.pgm",
        Normalization::MinMax,
    )?;

    let ifg = interferogram(&real, &fake)?;
    raster(
        &ifg.phase(),
        "interferogram_phase.pgm",
        Normalization::Fixed(-PI, PI),
    )?;
    let coh = coherence(&real, &fake, opts.window)?;
    let coh_mag = coh.magnitude();
    raster(&coh_mag, "coherence.pgm", Normalization::Fixed(0.0, 1.0))?;

    let tensors: [(&str, Tensor); 7] = [
        ("real.cten", Tensor::Complex(real.clone())),
        ("fake.cten", Tensor::Complex(fake)),
        ("conditioning.cten", Tensor::Real(onetone.conditioning)),
        ("real_nyquist.cten", Tensor::Real(real_ny.clone())),
        ("fake_nyquist.cten", Tensor::Real(fake_ny)),
        ("interferogram.cten", Tensor::Complex(ifg)),
        ("coherence.cten", Tensor::Real(coh_mag)),
    ];
    for (name, t) in &tensors {
        save_tensor(t, out_dir.join(name))?;
        files.push(name.to_string());
    }

    let nyquist_roundtrip_error =
        decode_nyquist(&real_ny)?.max_abs_diff(&zero_extreme_bins(&real)?)?;
    let mean_coherence = coh.mean_magnitude();
    let mut summary = FigSummary {
        patch_seed,
        mean_coherence,
        coherence_loss: (1.0 - mean_coherence).clamp(0.0, 1.0),
        nyquist_roundtrip_error,
        files,
    };
    fs::write(out_dir.join("summary.csv"), summary.to_csv(opts))?;
    summary.files.push("summary.csv".into());
    Ok(summary)
}
