//! Flat-earth scene synthesis and the Onetone stripe dataset.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::tensorio::{save_tensor, ComplexImage, RealTensor, Tensor};

/// Flat-earth geometry with unity reflectivity.
///
/// Column `n` sits at slant range `r(n) = r0 + dr * n`, giving the scene
/// response `exp(j * 4*pi/lambda * r(n))` and a constant fringe frequency
/// `4*pi*dr/lambda` rad/sample along columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatEarthScene {
    wavelength: f64,
    slant_range_origin: f64,
    slant_range_step: f64,
}

impl FlatEarthScene {
    pub fn new(wavelength: f64, slant_range_origin: f64, slant_range_step: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid(format!(
                "wavelength must be > 0, got {wavelength}"
            )));
        }
        if !(slant_range_origin.is_finite() && slant_range_origin >= 0.0) {
            return Err(Error::invalid(format!(
                "slant range origin must be >= 0, got {slant_range_origin}"
            )));
        }
        if !slant_range_step.is_finite() {
            return Err(Error::invalid("slant range step must be finite"));
        }
        let scene = Self {
            wavelength,
            slant_range_origin,
            slant_range_step,
        };
        if !scene.fringe_frequency().is_finite() {
            return Err(Error::invalid("fringe frequency is not finite"));
        }
        Ok(scene)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn slant_range_origin(&self) -> f64 {
        self.slant_range_origin
    }

    pub fn slant_range_step(&self) -> f64 {
        self.slant_range_step
    }

    /// `4*pi*dr/lambda`, rad per column.
    pub fn fringe_frequency(&self) -> f64 {
        4.0 * PI * self.slant_range_step / self.wavelength
    }

    /// Interferometric phase at slant range `r`.
    pub fn phase_at(&self, r: f64) -> f64 {
        4.0 * PI * r / self.wavelength
    }
}

/// Complex response of a flat-earth scene sampled on `rows x cols`.
pub fn scene_response(scene: &FlatEarthScene, rows: usize, cols: usize) -> Result<ComplexImage> {
    let phase0 = scene.phase_at(scene.slant_range_origin);
    let w0 = scene.fringe_frequency();
    let row: Vec<Complex64> = (0..cols)
        .map(|n| Complex64::from_polar(1.0, phase0 + w0 * n as f64))
        .collect();
    ComplexImage::from_fn(rows, cols, |_, n| row[n])
}

/// One horizontal band of a Onetone patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stripe {
    /// Normalized column frequency in `[-pi, pi)`.
    pub omega: f64,
    pub amplitude: f64,
}

pub const ONETONE_STRIPES: usize = 8;
pub const AMPLITUDE_RANGE: Range<f64> = 0.25..1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OnetoneSpec {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub stripes: Vec<Stripe>,
}

impl OnetoneSpec {
    /// Draws [`ONETONE_STRIPES`] stripes from `seed`: frequencies i.i.d.
    /// uniform on `[-pi, pi)`, amplitudes i.i.d. uniform on `[0.25, 1)`.
    pub fn from_seed(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = rng::from_seed(seed);
        let stripes = (0..ONETONE_STRIPES)
            .map(|_| {
                let omega = rng.random_range(-PI..PI);
                let amplitude = rng.random_range(AMPLITUDE_RANGE);
                Stripe { omega, amplitude }
            })
            .collect();
        Self {
            rows,
            cols,
            seed,
            stripes,
        }
    }

    pub fn with_stripes(rows: usize, cols: usize, stripes: Vec<Stripe>) -> Self {
        Self {
            rows,
            cols,
            seed: 0,
            stripes,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = self.stripes.len();
        if s == 0 {
            return Err(Error::invalid("at least one stripe is required"));
        }
        if self.rows < s {
            return Err(Error::invalid(format!(
                "{} rows cannot hold {s} stripes",
                self.rows
            )));
        }
        if self.cols == 0 {
            return Err(Error::invalid("cols must be nonzero"));
        }
        for st in &self.stripes {
            if !(-PI..PI).contains(&st.omega) {
                return Err(Error::OutOfRange(format!(
                    "stripe frequency {} outside [-pi, pi)",
                    st.omega
                )));
            }
            if !(st.amplitude.is_finite() && st.amplitude > 0.0) {
                return Err(Error::OutOfRange(format!(
                    "stripe amplitude {} must be > 0",
                    st.amplitude
                )));
            }
        }
        Ok(())
    }
}

/// Row ranges of `stripes` near-equal horizontal bands (heights differ by at
/// most one row).
pub fn stripe_rows(rows: usize, stripes: usize) -> Vec<Range<usize>> {
    (0..stripes)
        .map(|s| (s * rows / stripes)..((s + 1) * rows / stripes))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnetonePatch {
    pub patch: ComplexImage,
    /// Channel 0: `(omega + pi) / (2*pi)`; channel 1: amplitude over the
    /// patch maximum; channel 2: background, all zero.
    pub conditioning: RealTensor,
}

pub fn gen_onetone(spec: &OnetoneSpec) -> Result<OnetonePatch> {
    spec.validate()?;
    let (rows, cols) = (spec.rows, spec.cols);
    let a_max = spec.stripes.iter().map(|s| s.amplitude).fold(0.0, f64::max);
    let mut patch = Vec::with_capacity(rows * cols);
    let mut cond = Vec::with_capacity(rows * cols * 3);
    for (stripe, range) in spec
        .stripes
        .iter()
        .zip(stripe_rows(rows, spec.stripes.len()))
    {
        let line: Vec<Complex64> = (0..cols)
            .map(|n| Complex64::from_polar(stripe.amplitude, stripe.omega * n as f64))
            .collect();
        let c0 = (stripe.omega + PI) / (2.0 * PI);
        let c1 = stripe.amplitude / a_max;
        for _ in range {
            patch.extend_from_slice(&line);
            for _ in 0..cols {
                cond.extend_from_slice(&[c0, c1, 0.0]);
            }
        }
    }
    Ok(OnetonePatch {
        patch: ComplexImage::new(rows, cols, patch)?,
        conditioning: RealTensor::new(rows, cols, 3, cond)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub index: usize,
    pub sub_seed: u64,
    pub stripes: Vec<Stripe>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.csv";

pub fn patch_file_name(index: usize) -> String {
    format!("patch_{index:05}.cten")
}

pub fn conditioning_file_name(index: usize) -> String {
    format!("cond_{index:05}.cten")
}

impl Manifest {
    /// Header `index,sub_seed,omega_0,amp_0,...,omega_7,amp_7`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,sub_seed");
        for s in 0..ONETONE_STRIPES {
            let _ = write!(out, ",omega_{s},amp_{s}");
        }
        out.push('\n');
        for e in &self.entries {
            let _ = write!(out, "{},{}", e.index, e.sub_seed);
            for st in &e.stripes {
                let _ = write!(out, ",{},{}", st.omega, st.amplitude);
            }
            out.push('\n');
        }
        out
    }
}

/// Writes `count` (patch, conditioning) CTEN pairs and `manifest.csv` into
/// `out_dir`. Patch `i` is drawn from `sub_seed(seed, i)`, so the output is
/// identical however the work is scheduled.
pub fn gen_onetone_dataset(
    count: usize,
    rows: usize,
    cols: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    if rows < ONETONE_STRIPES {
        return Err(Error::invalid(format!(
            "{rows} rows cannot hold {ONETONE_STRIPES} stripes"
        )));
    }
    fs::create_dir_all(out_dir)?;
    let entries = (0..count)
        .into_par_iter()
        .map(|index| {
            let sub_seed = rng::sub_seed(seed, index as u64);
            let spec = OnetoneSpec::from_seed(rows, cols, sub_seed);
            let pair = gen_onetone(&spec)?;
            save_tensor(
                &Tensor::Complex(pair.patch),
                out_dir.join(patch_file_name(index)),
            )?;
            save_tensor(
                &Tensor::Real(pair.conditioning),
                out_dir.join(conditioning_file_name(index)),
            )?;
            Ok(ManifestEntry {
                index,
                sub_seed,
                stripes: spec.stripes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { entries };
    fs::write(out_dir.join(MANIFEST_FILE), manifest.to_csv())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorio::{dft1, dft2};

    #[test]
    fn zero_step_gives_constant_image() {
        let scene = FlatEarthScene::new(0.056, 850.0, 0.0).unwrap();
        let x = scene_response(&scene, 3, 5).unwrap();
        let expect = Complex64::from_polar(1.0, 4.0 * PI * 850.0 / 0.056);
        assert!(x.data().iter().all(|z| (z - expect).norm() < 1e-12));
    }

    #[test]
    fn unit_fringe_frequency_is_exp_jn() {
        let dr = 0.01;
        let scene = FlatEarthScene::new(4.0 * PI * dr, 0.0, dr).unwrap();
        assert!((scene.fringe_frequency() - 1.0).abs() < 1e-15);
        let x = scene_response(&scene, 4, 16).unwrap();
        for m in 0..4 {
            for n in 0..16 {
                let expect = Complex64::from_polar(1.0, n as f64);
                assert!((x.get(m, n) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bin_aligned_scene_is_one_line() {
        let (rows, cols, k0) = (8, 32, 5);
        let w0 = 2.0 * PI * k0 as f64 / cols as f64;
        let lambda = 0.031;
        let scene = FlatEarthScene::new(lambda, 0.0, w0 * lambda / (4.0 * PI)).unwrap();
        let s = dft2(&scene_response(&scene, rows, cols).unwrap());
        for k in 0..rows {
            for l in 0..cols {
                let mag = s.get(k, l).norm();
                if (k, l) == (0, k0) {
                    assert!((mag - (rows * cols) as f64).abs() < 1e-9);
                } else {
                    assert!(mag < 1e-9, "leak at ({k},{l}): {mag}");
                }
            }
        }
    }

    #[test]
    fn scene_rejects_bad_wavelength() {
        assert!(FlatEarthScene::new(0.0, 0.0, 1.0).is_err());
        assert!(FlatEarthScene::new(-1.0, 0.0, 1.0).is_err());
        assert!(FlatEarthScene::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn stripe_heights_differ_by_at_most_one() {
        for rows in 8..40 {
            let r = stripe_rows(rows, 8);
            assert_eq!(r[0].start, 0);
            assert_eq!(r[7].end, rows);
            let h: Vec<usize> = r.iter().map(|x| x.len()).collect();
            assert!(h.iter().max().unwrap() - h.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn flat_stripes_give_ones() {
        let spec = OnetoneSpec::with_stripes(
            16,
            8,
            vec![
                Stripe {
                    omega: 0.0,
                    amplitude: 1.0
                };
                8
            ],
        );
        let out = gen_onetone(&spec).unwrap();
        assert!(out
            .patch
            .data()
            .iter()
            .all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(out.conditioning.plane(0).iter().all(|&v| v == 0.5));
        assert!(out.conditioning.plane(1).iter().all(|&v| v == 1.0));
        assert!(out.conditioning.plane(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_patch() {
        let a = gen_onetone(&OnetoneSpec::from_seed(32, 32, 42)).unwrap();
        let b = gen_onetone(&OnetoneSpec::from_seed(32, 32, 42)).unwrap();
        assert_eq!(a, b);
        let c = gen_onetone(&OnetoneSpec::from_seed(32, 32, 43)).unwrap();
        assert_ne!(a.patch, c.patch);
    }

    #[test]
    fn drawn_stripes_are_in_range() {
        for seed in 0..50 {
            let spec = OnetoneSpec::from_seed(8, 8, seed);
            assert_eq!(spec.stripes.len(), 8);
            for s in &spec.stripes {
                assert!((-PI..PI).contains(&s.omega));
                assert!(AMPLITUDE_RANGE.contains(&s.amplitude));
            }
        }
    }

    #[test]
    fn stripe_row_spectrum_peaks_at_its_bin() {
        let cols = 64;
        let bins = [3usize, 60, 17, 0, 31, 32, 5, 45];
        let stripes = bins
            .iter()
            .map(|&k| {
                let mut w = 2.0 * PI * k as f64 / cols as f64;
                if w >= PI {
                    w -= 2.0 * PI;
                }
                Stripe {
                    omega: w,
                    amplitude: 0.5,
                }
            })
            .collect();
        let out = gen_onetone(&OnetoneSpec::with_stripes(24, cols, stripes)).unwrap();
        for (s, range) in stripe_rows(24, 8).into_iter().enumerate() {
            let row: Vec<Complex64> = (0..cols).map(|n| out.patch.get(range.start, n)).collect();
            let spec = dft1(&row);
            let argmax = (0..cols)
                .max_by(|&a, &b| spec[a].norm().total_cmp(&spec[b].norm()))
                .unwrap();
            assert_eq!(argmax, bins[s]);
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        assert!(gen_onetone(&OnetoneSpec::from_seed(7, 8, 1)).is_err());
    }

    #[test]
    fn empty_dataset_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let m = gen_onetone_dataset(0, 16, 16, 9, dir.path()).unwrap();
        assert!(m.entries.is_empty());
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let csv = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("index,sub_seed,omega_0,amp_0"));
    }
}
