//! Python bindings. Complex images travel as 2-D `complex128` arrays and real
//! tensors as 3-D `float64` arrays of shape `(rows, cols, channels)`.

use numpy::ndarray::{Array2, Array3};
use numpy::{IntoPyArray, PyArray2, PyArray3, PyReadonlyArray2, PyReadonlyArray3};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use nyqmap_core::cnnsim::{self, Activation};
use nyqmap_core::mapping::{self, MappingScheme};
use nyqmap_core::scenegen::{self, FlatEarthScene, OnetoneSpec};
use nyqmap_core::tensorio::{self, Tensor};
use nyqmap_core::{metrics, taylor, Complex64, ComplexImage, RealTensor};

fn err(e: nyqmap_core::Error) -> PyErr {
    match e {
        nyqmap_core::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn complex_in(a: PyReadonlyArray2<'_, Complex64>) -> PyResult<ComplexImage> {
    let v = a.as_array();
    let (rows, cols) = v.dim();
    ComplexImage::new(rows, cols, v.iter().copied().collect()).map_err(err)
}

fn real_in(a: PyReadonlyArray3<'_, f64>) -> PyResult<RealTensor> {
    let v = a.as_array();
    let (rows, cols, channels) = v.dim();
    RealTensor::new(rows, cols, channels, v.iter().copied().collect()).map_err(err)
}

fn complex_out<'py>(py: Python<'py>, x: &ComplexImage) -> Bound<'py, PyArray2<Complex64>> {
    Array2::from_shape_vec(x.shape(), x.data().to_vec())
        .expect("shape matches data")
        .into_pyarray(py)
}

fn real_out<'py>(py: Python<'py>, t: &RealTensor) -> Bound<'py, PyArray3<f64>> {
    Array3::from_shape_vec(t.shape(), t.data().to_vec())
        .expect("shape matches data")
        .into_pyarray(py)
}

fn scheme(name: &str) -> PyResult<MappingScheme> {
    name.parse().map_err(err)
}

/// Map a complex image to a real tensor with `scheme` (nyquist, reim, magphase).
#[pyfunction]
#[pyo3(signature = (x, scheme="nyquist"))]
fn encode<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, Complex64>,
    scheme: &str,
) -> PyResult<Bound<'py, PyArray3<f64>>> {
    let s = self::scheme(scheme)?;
    let t = s.encode(&complex_in(x)?).map_err(err)?;
    Ok(real_out(py, &t))
}

#[pyfunction]
#[pyo3(signature = (t, scheme="nyquist"))]
fn decode<'py>(
    py: Python<'py>,
    t: PyReadonlyArray3<'py, f64>,
    scheme: &str,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let s = self::scheme(scheme)?;
    let x = s.decode(&real_in(t)?).map_err(err)?;
    Ok(complex_out(py, &x))
}

/// Zero the rows and columns at normalized frequency -pi, the part of the
/// spectrum the Nyquist mapping cannot carry.
#[pyfunction]
fn zero_extreme_bins<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, Complex64>,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let y = mapping::zero_extreme_bins(&complex_in(x)?).map_err(err)?;
    Ok(complex_out(py, &y))
}

/// Unnormalized forward 2-D DFT.
#[pyfunction]
fn dft2<'py>(
    py: Python<'py>,
    x: PyReadonlyArray2<'py, Complex64>,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let s = tensorio::dft2(&complex_in(x)?);
    let spec = ComplexImage::new(s.rows(), s.cols(), s.bins().to_vec()).map_err(err)?;
    Ok(complex_out(py, &spec))
}

#[pyfunction]
fn scene_response<'py>(
    py: Python<'py>,
    wavelength: f64,
    slant_range_origin: f64,
    slant_range_step: f64,
    rows: usize,
    cols: usize,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let scene =
        FlatEarthScene::new(wavelength, slant_range_origin, slant_range_step).map_err(err)?;
    let x = scenegen::scene_response(&scene, rows, cols).map_err(err)?;
    Ok(complex_out(py, &x))
}

type PatchPair<'py> = (Bound<'py, PyArray2<Complex64>>, Bound<'py, PyArray3<f64>>);

/// Seeded Onetone stripe patch; returns `(patch, conditioning)`.
#[pyfunction]
#[pyo3(signature = (rows=128, cols=128, seed=0))]
fn gen_onetone<'py>(
    py: Python<'py>,
    rows: usize,
    cols: usize,
    seed: u64,
) -> PyResult<PatchPair<'py>> {
    let p = scenegen::gen_onetone(&OnetoneSpec::from_seed(rows, cols, seed)).map_err(err)?;
    Ok((complex_out(py, &p.patch), real_out(py, &p.conditioning)))
}

#[pyfunction]
fn interferogram<'py>(
    py: Python<'py>,
    a: PyReadonlyArray2<'py, Complex64>,
    b: PyReadonlyArray2<'py, Complex64>,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let i = metrics::interferogram(&complex_in(a)?, &complex_in(b)?).map_err(err)?;
    Ok(complex_out(py, &i))
}

/// Windowed complex coherence map.
#[pyfunction]
#[pyo3(signature = (a, b, window=5))]
fn coherence<'py>(
    py: Python<'py>,
    a: PyReadonlyArray2<'py, Complex64>,
    b: PyReadonlyArray2<'py, Complex64>,
    window: usize,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let map = metrics::coherence(&complex_in(a)?, &complex_in(b)?, window).map_err(err)?;
    Ok(complex_out(py, map.values()))
}

#[pyfunction]
#[pyo3(signature = (a, b, window=5))]
fn coherence_loss(
    a: PyReadonlyArray2<'_, Complex64>,
    b: PyReadonlyArray2<'_, Complex64>,
    window: usize,
) -> PyResult<f64> {
    metrics::coherence_loss(&complex_in(a)?, &complex_in(b)?, window).map_err(err)
}

#[pyfunction]
fn predict_alias(omega: f64, omega_s: f64) -> f64 {
    cnnsim::predict_alias(omega, omega_s)
}

#[pyfunction]
fn softplus_warped(z: f64, alpha: f64) -> PyResult<f64> {
    taylor::softplus_warped(z, alpha).map_err(err)
}

/// Taylor coefficients `f^(k)(z0) / k!` for `k = 0..=order`. `activation` is
/// `identity`, `sigmoid`, `tanh` or `softplus:<alpha>`.
#[pyfunction]
#[pyo3(signature = (activation, z0=0.0, order=4))]
fn taylor_coeffs(activation: &str, z0: f64, order: usize) -> PyResult<Vec<f64>> {
    let act: Activation = activation.parse().map_err(err)?;
    let series = taylor::taylor_coeffs(act, z0, order).map_err(err)?;
    Ok(series.coeffs().to_vec())
}

/// Write a complex 2-D or real 3-D array as a CTEN file.
#[pyfunction]
fn save_tensor(path: &str, array: &Bound<'_, PyAny>) -> PyResult<()> {
    let t = if let Ok(x) = array.extract::<PyReadonlyArray2<'_, Complex64>>() {
        Tensor::Complex(complex_in(x)?)
    } else if let Ok(x) = array.extract::<PyReadonlyArray3<'_, f64>>() {
        Tensor::Real(real_in(x)?)
    } else {
        return Err(PyValueError::new_err(
            "expected a 2-D complex128 or 3-D float64 array",
        ));
    };
    tensorio::save_tensor(&t, path).map_err(err)
}

#[pyfunction]
fn load_tensor(py: Python<'_>, path: &str) -> PyResult<Py<PyAny>> {
    Ok(match tensorio::load_tensor(path).map_err(err)? {
        Tensor::Complex(x) => complex_out(py, &x).into_any().unbind(),
        Tensor::Real(t) => real_out(py, &t).into_any().unbind(),
    })
}

#[pymodule]
fn nyqmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(zero_extreme_bins, m)?)?;
    m.add_function(wrap_pyfunction!(dft2, m)?)?;
    m.add_function(wrap_pyfunction!(scene_response, m)?)?;
    m.add_function(wrap_pyfunction!(gen_onetone, m)?)?;
    m.add_function(wrap_pyfunction!(interferogram, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_loss, m)?)?;
    m.add_function(wrap_pyfunction!(predict_alias, m)?)?;
    m.add_function(wrap_pyfunction!(softplus_warped, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(save_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(load_tensor, m)?)?;
    Ok(())
}
