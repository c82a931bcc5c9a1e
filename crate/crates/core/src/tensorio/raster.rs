use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::RealTensor;
use crate::error::{Error, Result};

/// How sample values map onto the 8-bit range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Stretch the tensor's own min..max (over all channels) to 0..255.
    MinMax,
    /// Map `lo..hi` to 0..255, clamping values outside.
    Fixed(f64, f64),
}

/// Writes a 1-channel tensor as binary PGM (P5) or a 3-channel tensor as
/// binary PPM (P6).
///
/// A degenerate range (`hi == lo`) renders as mid-gray 128.
pub fn write_image<W: Write>(t: &RealTensor, mut w: W, norm: Normalization) -> Result<()> {
    let magic = match t.channels() {
        1 => "P5",
        3 => "P6",
        c => {
            return Err(Error::ChannelCount {
                expected: "1 or 3".into(),
                found: c,
            })
        }
    };
    let (lo, hi) = match norm {
        Normalization::MinMax => t
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            }),
        Normalization::Fixed(lo, hi) => {
            if !(lo.is_finite() && hi.is_finite()) || hi < lo {
                return Err(Error::invalid(format!("bad fixed range ({lo}, {hi})")));
            }
            (lo, hi)
        }
    };
    let pixels: Vec<u8> = t.data().iter().map(|&v| quantize(v, lo, hi)).collect();
    write!(w, "{magic}\n{} {}\n255\n", t.cols(), t.rows())?;
    w.write_all(&pixels)?;
    w.flush()?;
    Ok(())
}

pub fn export_image(t: &RealTensor, path: impl AsRef<Path>, norm: Normalization) -> Result<()> {
    let file = fs::File::create(path)?;
    write_image(t, BufWriter::new(file), norm)
}

fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    if hi == lo {
        return 128;
    }
    let unit = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (255.0 * unit + 0.5).floor() as u8
}
