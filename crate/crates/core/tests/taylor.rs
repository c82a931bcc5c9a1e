mod common;

use std::f64::consts::PI;

use common::{fd_taylor_coeff, real_fn};

use nyqmap::cnnsim::{Activation, HarmonicStatus};
use nyqmap::taylor::{
    harmonic_count_check, relu_limit_check, softplus_warped, taylor_coeffs, ToneProbe,
    HARMONIC_FLOOR_DB, MAX_ORDER,
};
use nyqmap::Complex64;
use proptest::prelude::*;

fn complex_fn(act: Activation) -> impl Fn(Complex64) -> Complex64 {
    move |z| match act {
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Tanh => z.tanh(),
        Activation::SoftplusWarped(a) => (1.0 + (a * z).exp()).ln() / a,
        Activation::Identity => z,
        Activation::Relu => unreachable!(),
    }
}

/// Taylor coefficients from the trapezoid rule on a circle of radius r.
fn cauchy_coeffs(act: Activation, z0: f64, order: usize, r: f64) -> Vec<f64> {
    const POINTS: usize = 128;
    let f = complex_fn(act);
    let samples: Vec<Complex64> = (0..POINTS)
        .map(|j| f(z0 + Complex64::from_polar(r, 2.0 * PI * j as f64 / POINTS as f64)))
        .collect();
    (0..=order)
        .map(|k| {
            let acc: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / POINTS as f64)
                })
                .sum();
            acc.re / POINTS as f64 / r.powi(k as i32)
        })
        .collect()
}

const SMOOTH: [Activation; 5] = [
    Activation::Sigmoid,
    Activation::Tanh,
    Activation::SoftplusWarped(1.0),
    Activation::SoftplusWarped(4.0),
    Activation::Identity,
];

/// Relative agreement with a floor for coefficients that vanish.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-3)
}

#[test]
fn coefficients_match_finite_differences() {
    for act in SMOOTH {
        for z0 in [-1.0, 0.0, 1.0] {
            let series = taylor_coeffs(act, z0, 5).unwrap();
            for k in 0..=5 {
                let fd = fd_taylor_coeff(act, z0, k);
                let an = series.coeffs()[k];
                assert!(close(an, fd, 1e-6), "{act} z0={z0} k={k}: {an} vs {fd}");
            }
        }
    }
}

#[test]
fn coefficients_match_contour_integral_to_max_order() {
    for act in SMOOTH {
        let r = match act {
            Activation::SoftplusWarped(a) => 1.0 / a,
            _ => 0.5,
        };
        for z0 in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let series = taylor_coeffs(act, z0, MAX_ORDER).unwrap();
            let oracle = cauchy_coeffs(act, z0, MAX_ORDER, r);
            for (k, (a, b)) in series.coeffs().iter().zip(&oracle).enumerate() {
                let tol = 1e-10 / r.powi(k as i32);
                assert!((a - b).abs() <= tol, "{act} z0={z0} k={k}: {a} vs {b}");
            }
        }
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn truncation_error_has_expected_order() {
    let act = Activation::SoftplusWarped(1.0);
    let z0 = 1.0;
    let deltas: Vec<f64> = (0..9).map(|i| 0.02 * (5f64).powf(i as f64 / 8.0)).collect();
    for order in 1..=4 {
        let series = taylor_coeffs(act, z0, order).unwrap();
        let errs: Vec<f64> = deltas
            .iter()
            .map(|d| {
                (softplus_warped(z0 + d, 1.0).unwrap() - series.eval(z0 + d))
                    .abs()
                    .ln()
            })
            .collect();
        let logd: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
        let s = slope(&logd, &errs);
        assert!(
            (s - (order + 1) as f64).abs() <= 0.2,
            "K={order}: slope {s}"
        );
    }
}

#[test]
fn relu_gap_matches_bound_and_halves() {
    let grid: Vec<f64> = (-200..=200).map(|i| i as f64 / 100.0).collect();
    let alphas = [1.0, 2.0, 4.0, 8.0, 100.0, 200.0];
    let rep = relu_limit_check(&alphas, &grid).unwrap();
    for row in &rep.rows {
        assert_eq!(row.argmax_z, 0.0);
        assert!((row.sup_gap - 2f64.ln() / row.alpha).abs() <= 1e-12);
    }
    for pair in rep.rows.windows(2) {
        if pair[1].alpha == 2.0 * pair[0].alpha {
            assert!((pair[1].sup_gap - pair[0].sup_gap / 2.0).abs() <= 1e-12);
        }
    }
    assert!(rep.consistent(1e-12));
    assert!(relu_limit_check(&[2.0, 1.0], &grid).is_err());
}

#[test]
fn truncated_polynomial_creates_at_most_order_harmonics() {
    let tone = ToneProbe::on_bin(256, 3, 0.8, 0.2);
    for order in 1..=6 {
        let rep = harmonic_count_check(Activation::Sigmoid, &tone, order).unwrap();
        assert_eq!(rep.status, HarmonicStatus::Ok);
        assert!(
            rep.stray_bins.is_empty(),
            "order {order}: {:?}",
            rep.stray_bins
        );
        for row in rep.rows.iter().filter(|r| r.k > order) {
            assert!(
                row.poly_db < HARMONIC_FLOOR_DB,
                "order {order}: k={} {}",
                row.k,
                row.poly_db
            );
            assert!(row.full_db > HARMONIC_FLOOR_DB);
        }
    }
}

proptest! {
    #[test]
    fn softplus_bounds(z in -50.0..50.0f64, alpha in 0.1..1e4f64) {
        let v = softplus_warped(z, alpha).unwrap();
        prop_assert!(v >= z.max(0.0) - 1e-12);
        prop_assert!(v - z.max(0.0) <= 2f64.ln() / alpha + 1e-12);
    }

    #[test]
    fn series_reproduces_value_at_center(z0 in -3.0..3.0f64, order in 0..=MAX_ORDER) {
        for act in SMOOTH {
            let s = taylor_coeffs(act, z0, order).unwrap();
            prop_assert!((s.eval(z0) - real_fn(act)(z0)).abs() <= 1e-15);
        }
    }
}

#[test]
fn invalid_requests_are_rejected() {
    assert!(taylor_coeffs(Activation::Relu, 0.0, 2).is_err());
    assert!(taylor_coeffs(Activation::Sigmoid, 0.0, MAX_ORDER + 1).is_err());
    assert!(taylor_coeffs(Activation::SoftplusWarped(-1.0), 0.0, 2).is_err());
}
