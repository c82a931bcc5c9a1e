//! Warped softplus, Taylor expansions of smooth activations and checks of
//! the harmonic content they predict.
//!
//! ReLU has no Taylor series at 0. It is reached through the warped softplus
//! `(1/alpha) * ln(1 + exp(alpha*z))`, which converges uniformly to ReLU with
//! a largest gap of `ln(2)/alpha` at `z = 0`.
//!
//! Coefficients come from closed-form derivative recurrences. With
//! `s = sigmoid(u)` and `q = 1 - s = sigmoid(-u)`, every derivative of the
//! sigmoid is a polynomial in `(s, q)` obtained from
//! `d/du s^a q^b = a s^a q^(b+1) - b s^(a+1) q^b`. Tanh and softplus reduce to
//! it: `tanh^(k)(z) = 2^(k+1) sigmoid^(k)(2z)` for `k >= 1`, and the warped
//! softplus has `f^(k)(z) = alpha^(k-1) sigmoid^(k-1)(alpha z)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cnnsim::{
    frequency_bin, harmonic_report_from_slice, predict_alias, sigmoid, Activation, HarmonicStatus,
    DEFAULT_PEAK_THRESHOLD_DB,
};
use crate::error::{Error, Result};
use crate::tensorio::{dft1, LOG_MAG_EPS};

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 12;

/// Level (dB, relative to the fundamental) below which a spectral line
/// counts as absent.
pub const HARMONIC_FLOOR_DB: f64 = -200.0;

/// Overflow-safe `(1/alpha) * ln(1 + exp(alpha*z))`.
pub fn softplus_warped(z: f64, alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(softplus_warped_unchecked(z, alpha))
}

#[inline]
pub(crate) fn softplus_warped_unchecked(z: f64, alpha: f64) -> f64 {
    z.max(0.0) + (-alpha * z.abs()).exp().ln_1p() / alpha
}

/// Truncated Taylor series `sum c_k (z - center)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    center: f64,
    coeffs: Vec<f64>,
}

impl TaylorSeries {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a series needs at least one coefficient"));
        }
        if !center.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "series center and coefficients must be finite",
            ));
        }
        Ok(Self { center, coeffs })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, z: f64) -> f64 {
        let d = z - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * d + c)
    }
}

pub fn taylor_eval(series: &TaylorSeries, z: f64) -> f64 {
    series.eval(z)
}

/// Bivariate polynomial in `(s, q)` keyed by exponents.
type SqPoly = BTreeMap<(u32, u32), f64>;

/// `sigmoid^(k)` as polynomials in `(s, q)` for `k = 0..=order`.
fn sigmoid_derivative_polys(order: usize) -> Vec<SqPoly> {
    let mut polys = Vec::with_capacity(order + 1);
    let mut cur: SqPoly = BTreeMap::from([((1, 0), 1.0)]);
    polys.push(cur.clone());
    for _ in 0..order {
        let mut next = SqPoly::new();
        for (&(a, b), &c) in &cur {
            if a > 0 {
                *next.entry((a, b + 1)).or_insert(0.0) += a as f64 * c;
            }
            if b > 0 {
                *next.entry((a + 1, b)).or_insert(0.0) -= b as f64 * c;
            }
        }
        next.retain(|_, c| *c != 0.0);
        polys.push(next.clone());
        cur = next;
    }
    polys
}

fn eval_sq(poly: &SqPoly, s: f64, q: f64) -> f64 {
    poly.iter()
        .map(|(&(a, b), &c)| c * s.powi(a as i32) * q.powi(b as i32))
        .sum()
}

/// `sigmoid^(k)(u)` for `k = 0..=order`.
fn sigmoid_derivatives(u: f64, order: usize) -> Vec<f64> {
    let (s, q) = (sigmoid(u), sigmoid(-u));
    sigmoid_derivative_polys(order)
        .iter()
        .map(|p| eval_sq(p, s, q))
        .collect()
}

/// Derivatives `a^(k)(z0)` for `k = 0..=order`.
pub fn activation_derivatives(activation: Activation, z0: f64, order: usize) -> Result<Vec<f64>> {
    if order > MAX_ORDER {
        return Err(Error::invalid(format!(
            "order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if !z0.is_finite() {
        return Err(Error::invalid("expansion point must be finite"));
    }
    let d = match activation {
        Activation::Sigmoid => sigmoid_derivatives(z0, order),
        Activation::Tanh => {
            let s = sigmoid_derivatives(2.0 * z0, order);
            (0..=order)
                .map(|k| {
                    if k == 0 {
                        z0.tanh()
                    } else {
                        2f64.powi(k as i32 + 1) * s[k]
                    }
                })
                .collect()
        }
        Activation::SoftplusWarped(alpha) => {
            let f0 = softplus_warped(z0, alpha)?;
            let s = sigmoid_derivatives(alpha * z0, order.saturating_sub(1));
            (0..=order)
                .map(|k| {
                    if k == 0 {
                        f0
                    } else {
                        alpha.powi(k as i32 - 1) * s[k - 1]
                    }
                })
                .collect()
        }
        Activation::Identity => (0..=order)
            .map(|k| match k {
                0 => z0,
                1 => 1.0,
                _ => 0.0,
            })
            .collect(),
        Activation::Relu => {
            return Err(Error::invalid(
                "ReLU is not smooth at 0; expand SoftplusWarped(alpha) instead",
            ))
        }
    };
    Ok(d)
}

/// Taylor coefficients `c_k = a^(k)(z0) / k!` for `k = 0..=order`.
pub fn taylor_coeffs(activation: Activation, z0: f64, order: usize) -> Result<TaylorSeries> {
    let d = activation_derivatives(activation, z0, order)?;
    let mut fact = 1.0;
    let coeffs = d
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect();
    TaylorSeries::new(z0, coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluGapRow {
    pub alpha: f64,
    /// `max over z_grid of softplus_warped(z, alpha) - relu(z)`.
    pub sup_gap: f64,
    pub argmax_z: f64,
    /// `ln(2)/alpha`.
    pub bound: f64,
    pub within_bound: bool,
    /// `sup_gap / previous sup_gap`, absent on the first row.
    pub gap_ratio: Option<f64>,
    /// `previous alpha / alpha`, the ratio implied by the bound.
    pub expected_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluLimitReport {
    pub rows: Vec<ReluGapRow>,
}

impl ReluLimitReport {
    /// True when every measured gap respects the bound and successive gap
    /// ratios match `alpha_prev/alpha` within `tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| {
            r.within_bound
                && match (r.gap_ratio, r.expected_ratio) {
                    (Some(g), Some(e)) => (g - e).abs() <= tol,
                    _ => true,
                }
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("alpha,sup_gap,argmax_z,bound,within_bound,gap_ratio,expected_ratio\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.alpha,
                r.sup_gap,
                r.argmax_z,
                r.bound,
                r.within_bound,
                opt(r.gap_ratio),
                opt(r.expected_ratio)
            ));
        }
        out
    }
}

/// Measures the softplus/ReLU gap on `z_grid` for each (strictly increasing,
/// positive) warping factor.
pub fn relu_limit_check(alphas: &[f64], z_grid: &[f64]) -> Result<ReluLimitReport> {
    if alphas.is_empty() || z_grid.is_empty() {
        return Err(Error::invalid("alpha list and z grid must be non-empty"));
    }
    if alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::invalid("every alpha must be positive"));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("alpha list must be strictly increasing"));
    }
    let mut rows: Vec<ReluGapRow> = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let (argmax_z, sup_gap) = z_grid
            .iter()
            .map(|&z| (z, softplus_warped_unchecked(z, alpha) - z.max(0.0)))
            .fold((z_grid[0], f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        let bound = 2f64.ln() / alpha;
        let (gap_ratio, expected_ratio) = match rows.last() {
            Some(prev) => (Some(sup_gap / prev.sup_gap), Some(prev.alpha / alpha)),
            None => (None, None),
        };
        rows.push(ReluGapRow {
            alpha,
            sup_gap,
            argmax_z,
            bound,
            within_bound: sup_gap <= bound + 1e-12,
            gap_ratio,
            expected_ratio,
        });
    }
    Ok(ReluLimitReport { rows })
}

/// A bin-aligned test tone `z(n) = z0 + amplitude * cos(omega0 * n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneProbe {
    pub len: usize,
    pub omega0: f64,
    pub amplitude: f64,
    pub z0: f64,
}

impl ToneProbe {
    /// Tone on bin `k0` of a `len`-point DFT.
    pub fn on_bin(len: usize, k0: usize, amplitude: f64, z0: f64) -> Self {
        Self {
            len,
            omega0: 2.0 * PI * k0 as f64 / len as f64,
            amplitude,
            z0,
        }
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.len)
            .map(|n| self.z0 + self.amplitude * (self.omega0 * n as f64).cos())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCountRow {
    pub k: usize,
    pub predicted_bin: usize,
    /// Level of the truncated polynomial's line, dB relative to its fundamental.
    pub poly_db: f64,
    /// Level of the full activation's line, dB relative to its fundamental.
    pub full_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCountReport {
    pub status: HarmonicStatus,
    pub order: usize,
    pub rows: Vec<HarmonicCountRow>,
    /// Bins of the polynomial output above [`HARMONIC_FLOOR_DB`] that are not
    /// a fold of `k * omega0` for any `k <= order`.
    pub stray_bins: Vec<usize>,
}

impl HarmonicCountReport {
    pub fn row(&self, k: usize) -> Option<&HarmonicCountRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,predicted_bin,poly_db,full_db\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.k, r.predicted_bin, r.poly_db, r.full_db
            ));
        }
        out
    }
}

/// Applies the order-`order` Taylor polynomial of `activation` (centered on
/// the tone's offset `z0`) and the full activation to the same tone, and
/// tabulates the harmonic lines `k = 0..=order + 3` of both.
pub fn harmonic_count_check(
    activation: Activation,
    tone: &ToneProbe,
    order: usize,
) -> Result<HarmonicCountReport> {
    if tone.len < 2 {
        return Err(Error::invalid("tone needs at least two samples"));
    }
    let series = taylor_coeffs(activation, tone.z0, order)?;
    let z = tone.samples();
    let poly: Vec<Complex64> = z
        .iter()
        .map(|&v| Complex64::new(series.eval(v), 0.0))
        .collect();
    let full: Vec<Complex64> = z
        .iter()
        .map(|&v| Complex64::new(activation.apply(v), 0.0))
        .collect();
    let poly_spec = dft1(&poly);
    let full_spec = dft1(&full);
    let k_max = order + 3;
    let poly_rep =
        harmonic_report_from_slice(&poly_spec, tone.omega0, k_max, DEFAULT_PEAK_THRESHOLD_DB);
    let full_rep =
        harmonic_report_from_slice(&full_spec, tone.omega0, k_max, DEFAULT_PEAK_THRESHOLD_DB);
    let rows = poly_rep
        .rows
        .iter()
        .zip(&full_rep.rows)
        .map(|(p, f)| HarmonicCountRow {
            k: p.k,
            predicted_bin: p.predicted_bin,
            poly_db: p.level_db,
            full_db: f.level_db,
        })
        .collect();

    let len = tone.len;
    let allowed: Vec<usize> = (0..=order)
        .flat_map(|k| {
            let w = predict_alias(k as f64 * tone.omega0, 2.0 * PI);
            [frequency_bin(w, len), frequency_bin(-w, len)]
        })
        .collect();
    let reference = poly_spec[frequency_bin(tone.omega0, len)].norm() + LOG_MAG_EPS;
    let stray_bins = (0..len)
        .filter(|b| !allowed.contains(b))
        .filter(|&b| {
            20.0 * ((poly_spec[b].norm() + LOG_MAG_EPS) / reference).log10() > HARMONIC_FLOOR_DB
        })
        .collect();
    Ok(HarmonicCountReport {
        status: poly_rep.status,
        order,
        rows,
        stray_bins,
    })
}
