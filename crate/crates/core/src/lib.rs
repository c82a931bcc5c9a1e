//! Tools for synthesizing, encoding and analyzing complex-valued InSAR patches.
//!
//! The crate is organized around two tensor types, [`ComplexImage`] and
//! [`RealTensor`], and a handful of modules operating on them:
//!
//! * [`tensorio`]: tensor types, 2-D DFT, the CTEN file format and raster export
//! * [`mapping`]: complex-to-real codecs (real/imag, mag/phase, Nyquist)
//! * [`scenegen`]: flat-earth scene response and the Onetone stripe dataset
//! * [`metrics`]: interferograms, windowed coherence and the coherence loss
//! * [`cnnsim`]: forward-only CNN layer simulator with spectral probes
//! * [`taylor`]: warped softplus and Taylor expansions of smooth activations
//! * [`pipeline`]: figure-style end-to-end pipelines built from the above

pub mod cnnsim;
pub mod error;
pub mod mapping;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod scenegen;
pub mod taylor;
pub mod tensorio;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tensorio::{ComplexImage, RealTensor, Spectrum, Tensor};
