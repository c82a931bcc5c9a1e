//! Text configuration for layer chains.
//!
//! ```text
//! # comments start with '#'
//! [layer]
//! in = 1                 # input channels (required)
//! out = 2                # output channels (required)
//! size = 3               # odd kernel side, default 3
//! kernel = identity      # canned kernel for every (i, j), default identity
//! kernel.0.1 = 0 1 0 1 -4 1 0 1 0   # inline w_ij, size*size values row-major
//! bias = 0.1 -0.2        # one value (broadcast) or one per output channel
//! activation = relu      # identity | relu | sigmoid | tanh | softplus:<alpha>
//! resample = down2       # none | down2 | up2
//! ```
//!
//! Canned kernels: `impulse` (centered unit impulse on every pair),
//! `identity` (impulse where `i == j`, zero elsewhere), `average`,
//! `diff_h`, `diff_v` (first differences) and `zero`.

use std::str::FromStr;

use super::{Activation, LayerChain, LayerSpec, Resample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CannedKernel {
    Impulse,
    Identity,
    Average,
    DiffH,
    DiffV,
    Zero,
}

impl CannedKernel {
    /// Weights of a `size x size` kernel. `Identity` is the impulse; the
    /// channel-diagonal rule is applied by the chain parser.
    pub fn weights(self, size: usize) -> Result<Vec<f64>> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "kernel side must be odd, got {size}"
            )));
        }
        let c = size / 2;
        let mut w = vec![0.0; size * size];
        match self {
            CannedKernel::Impulse | CannedKernel::Identity => w[c * size + c] = 1.0,
            CannedKernel::Average => w.fill(1.0 / (size * size) as f64),
            CannedKernel::DiffH | CannedKernel::DiffV if size < 3 => {
                return Err(Error::invalid("difference kernels need size >= 3"));
            }
            CannedKernel::DiffH => {
                w[c * size + c] = -1.0;
                w[c * size + c + 1] = 1.0;
            }
            CannedKernel::DiffV => {
                w[c * size + c] = -1.0;
                w[(c + 1) * size + c] = 1.0;
            }
            CannedKernel::Zero => {}
        }
        Ok(w)
    }
}

impl FromStr for CannedKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "impulse" => Ok(CannedKernel::Impulse),
            "identity" => Ok(CannedKernel::Identity),
            "average" | "mean" => Ok(CannedKernel::Average),
            "diff_h" => Ok(CannedKernel::DiffH),
            "diff_v" => Ok(CannedKernel::DiffV),
            "zero" => Ok(CannedKernel::Zero),
            other => Err(Error::invalid(format!("unknown canned kernel '{other}'"))),
        }
    }
}

#[derive(Default)]
struct Draft {
    start_line: usize,
    in_channels: Option<usize>,
    out_channels: Option<usize>,
    size: Option<usize>,
    canned: Option<CannedKernel>,
    inline: Vec<(usize, usize, usize, Vec<f64>)>,
    bias: Option<Vec<f64>>,
    activation: Option<Activation>,
    resample: Option<Resample>,
}

impl Draft {
    fn build(self) -> Result<LayerSpec> {
        let line = self.start_line;
        let err = |msg: String| Error::Config { line, msg };
        let ic = self
            .in_channels
            .ok_or_else(|| err("layer is missing 'in'".into()))?;
        let oc = self
            .out_channels
            .ok_or_else(|| err("layer is missing 'out'".into()))?;
        let size = self.size.unwrap_or(3);
        let canned = self.canned.unwrap_or(CannedKernel::Identity);
        let base = canned.weights(size).map_err(|e| err(e.to_string()))?;
        let zero = vec![0.0; size * size];
        let mut kernels = Vec::with_capacity(ic * oc);
        for i in 0..ic {
            for j in 0..oc {
                let w = if canned == CannedKernel::Identity && i != j {
                    zero.clone()
                } else {
                    base.clone()
                };
                kernels.push(w);
            }
        }
        for (at, i, j, values) in self.inline {
            if i >= ic || j >= oc {
                return Err(Error::Config {
                    line: at,
                    msg: format!("kernel.{i}.{j} outside {ic}x{oc} bank"),
                });
            }
            if values.len() != size * size {
                return Err(Error::Config {
                    line: at,
                    msg: format!(
                        "kernel.{i}.{j} needs {} values, got {}",
                        size * size,
                        values.len()
                    ),
                });
            }
            kernels[i * oc + j] = values;
        }
        let biases = match self.bias {
            None => vec![0.0; oc],
            Some(b) if b.len() == 1 => vec![b[0]; oc],
            Some(b) => b,
        };
        LayerSpec::new(
            ic,
            oc,
            size,
            kernels,
            biases,
            self.activation.unwrap_or(Activation::Identity),
            self.resample.unwrap_or(Resample::None),
        )
        .map_err(|e| err(e.to_string()))
    }
}

/// Parses a chain configuration (see the module docs for the format).
pub fn parse_chain(text: &str) -> Result<LayerChain> {
    let mut layers = Vec::new();
    let mut current: Option<Draft> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cfg_err = |msg: String| Error::Config { line: line_no, msg };
        if line.eq_ignore_ascii_case("[layer]") {
            if let Some(d) = current.take() {
                layers.push(d.build()?);
            }
            current = Some(Draft {
                start_line: line_no,
                ..Draft::default()
            });
            continue;
        }
        let draft = current
            .as_mut()
            .ok_or_else(|| cfg_err("setting outside a [layer] section".into()))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        let count = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| cfg_err(format!("'{key}' expects a count, got '{v}'")))
        };
        let floats = |v: &str| -> Result<Vec<f64>> {
            v.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| cfg_err(format!("bad number '{s}' in '{key}'")))
                })
                .collect()
        };
        match key.as_str() {
            "in" => draft.in_channels = Some(count(value)?),
            "out" => draft.out_channels = Some(count(value)?),
            "size" => draft.size = Some(count(value)?),
            "kernel" => {
                draft.canned = Some(value.parse().map_err(|e: Error| cfg_err(e.to_string()))?)
            }
            "bias" => draft.bias = Some(floats(value)?),
            "activation" => {
                draft.activation = Some(value.parse().map_err(|e: Error| cfg_err(e.to_string()))?)
            }
            "resample" => {
                draft.resample = Some(value.parse().map_err(|e: Error| cfg_err(e.to_string()))?)
            }
            k if k.starts_with("kernel.") => {
                let parts: Vec<&str> = k["kernel.".len()..].split('.').collect();
                let [i, j] = parts.as_slice() else {
                    return Err(cfg_err(format!("expected kernel.<i>.<j>, got '{k}'")));
                };
                let (i, j) = (count(i)?, count(j)?);
                draft.inline.push((line_no, i, j, floats(value)?));
            }
            other => return Err(cfg_err(format!("unknown key '{other}'"))),
        }
    }
    if let Some(d) = current.take() {
        layers.push(d.build()?);
    }
    LayerChain::new(layers)
}
