//! `nyqmap` command-line tool.
//!
//! Exit codes: 0 on success (including `--help`), 1 on usage errors, 2 on
//! data, format or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nyqmap::cnnsim::{self, parse_chain, Activation, ProbeOptions, DEFAULT_PEAK_THRESHOLD_DB};
use nyqmap::mapping::{spectrum_support, MappingScheme};
use nyqmap::metrics::{self, DEFAULT_WINDOW};
use nyqmap::pipeline::{self, FigOptions, Perturbation};
use nyqmap::scenegen;
use nyqmap::taylor;
use nyqmap::tensorio::{export_image, load_tensor, save_tensor, Normalization};
use nyqmap::{ComplexImage, Tensor};

#[derive(Parser, Debug)]
#[command(
    name = "nyqmap",
    version,
    about = "Complex InSAR patch synthesis, mapping and spectral analysis"
)]
struct Cli {
    /// Print progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a Onetone stripe dataset of (patch, conditioning) CTEN pairs.
    GenOnetone {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 128)]
        rows: usize,
        #[arg(long, default_value_t = 128)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a complex CTEN image to a real tensor.
    Encode(CodecArgs),
    /// Map a real tensor back to a complex CTEN image.
    Decode(CodecArgs),
    /// Report per-channel quadrant energies of an encoded tensor as CSV.
    Spectrum {
        /// Scheme the tensor was encoded with.
        #[arg(long)]
        scheme: MappingScheme,
        input: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pixelwise interferogram a * conj(b).
    Interferogram {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the wrapped phase as a PGM raster.
        #[arg(long)]
        phase_image: Option<PathBuf>,
    },
    /// Windowed complex coherence map.
    Coherence {
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        a: PathBuf,
        b: PathBuf,
        /// Complex coherence map (CTEN).
        #[arg(long)]
        out: PathBuf,
        /// Also write |coherence| as a PGM raster on [0, 1].
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Print the coherence loss 1 - mean|coherence| of two images.
    Cohloss {
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        a: PathBuf,
        b: PathBuf,
    },
    /// Run a layer chain over a real tensor and dump per-stage spectra.
    SimulateLayer {
        /// Chain configuration file.
        #[arg(long)]
        chain: PathBuf,
        /// Real input tensor (CTEN).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        probe_dir: PathBuf,
        /// Peak threshold above the median slice level, in dB.
        #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD_DB)]
        threshold_db: f64,
    },
    /// Taylor coefficients of the warped softplus and its gap to ReLU, as CSV.
    ReluTaylor {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z0: f64,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Write the Onetone figure panel set for a real/fake patch pair.
    FigOnetone(FigArgs),
}

#[derive(Args, Debug)]
struct CodecArgs {
    #[arg(long)]
    scheme: MappingScheme,
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PerturbKind {
    None,
    PhaseNoise,
}

#[derive(Args, Debug)]
struct FigArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 128)]
    rows: usize,
    #[arg(long, default_value_t = 128)]
    cols: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// How the fake image is derived from the real patch.
    #[arg(long, value_enum, default_value_t = PerturbKind::None)]
    perturb: PerturbKind,
    /// Phase noise standard deviation in radians.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Use this complex CTEN image as the fake instead of perturbing.
    #[arg(long, conflicts_with = "perturb")]
    fake: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(nyqmap::Error),
}

impl From<nyqmap::Error> for Failure {
    fn from(e: nyqmap::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Log(u8);

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if self.0 > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let log = Log(cli.verbose);
    match cli.command {
        Command::GenOnetone {
            count,
            rows,
            cols,
            seed,
            out,
        } => {
            let manifest = scenegen::gen_onetone_dataset(count, rows, cols, seed, &out)?;
            log.info(format!(
                "wrote {} pairs of {rows}x{cols} to {}",
                manifest.entries.len(),
                out.display()
            ));
        }
        Command::Encode(args) => {
            let x = load_complex(&args.input)?;
            let t = args.scheme.encode(&x)?;
            save_tensor(&Tensor::Real(t), &args.out)?;
            log.info(format!(
                "encoded with {} -> {}",
                args.scheme,
                args.out.display()
            ));
        }
        Command::Decode(args) => {
            let t = load_tensor(&args.input)?.into_real()?;
            let x = args.scheme.decode(&t)?;
            save_tensor(&Tensor::Complex(x), &args.out)?;
            log.info(format!(
                "decoded with {} -> {}",
                args.scheme,
                args.out.display()
            ));
        }
        Command::Spectrum { scheme, input, out } => {
            let t = load_tensor(&input)?.into_real()?;
            let csv = spectrum_support(&t, scheme)?.to_csv();
            write_or_print(out.as_deref(), &csv)?;
        }
        Command::Interferogram {
            a,
            b,
            out,
            phase_image,
        } => {
            let ifg = metrics::interferogram(&load_complex(&a)?, &load_complex(&b)?)?;
            if let Some(path) = phase_image {
                let pi = std::f64::consts::PI;
                export_image(&ifg.phase(), path, Normalization::Fixed(-pi, pi))?;
            }
            save_tensor(&Tensor::Complex(ifg), &out)?;
        }
        Command::Coherence {
            window,
            a,
            b,
            out,
            image,
        } => {
            let map = metrics::coherence(&load_complex(&a)?, &load_complex(&b)?, window)?;
            if let Some(path) = image {
                export_image(&map.magnitude(), path, Normalization::Fixed(0.0, 1.0))?;
            }
            log.info(format!("mean |coherence| = {}", map.mean_magnitude()));
            save_tensor(&Tensor::Complex(map.values().clone()), &out)?;
        }
        Command::Cohloss { window, a, b } => {
            let loss = metrics::coherence_loss(&load_complex(&a)?, &load_complex(&b)?, window)?;
            println!("{loss:.12}");
        }
        Command::SimulateLayer {
            chain,
            input,
            probe_dir,
            threshold_db,
        } => simulate_layer(&chain, &input, &probe_dir, threshold_db, &log)?,
        Command::ReluTaylor { alpha, z0, order } => relu_taylor(alpha, z0, order)?,
        Command::FigOnetone(args) => fig_onetone(args, &log)?,
    }
    Ok(())
}

fn load_complex(path: &Path) -> Result<ComplexImage, Failure> {
    Ok(load_tensor(path)?.into_complex()?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate_layer(
    chain_path: &Path,
    input: &Path,
    probe_dir: &Path,
    threshold_db: f64,
    log: &Log,
) -> Outcome {
    let chain = parse_chain(&fs::read_to_string(chain_path)?)?;
    let x = match load_tensor(input)? {
        Tensor::Real(t) => t,
        Tensor::Complex(_) => {
            return Err(Failure::Data(nyqmap::Error::InvalidInput(
                "simulate-layer needs a real tensor; encode complex images first".into(),
            )))
        }
    };
    let run = cnnsim::run_chain_with(&x, &chain, Some(ProbeOptions { threshold_db }))?;
    fs::create_dir_all(probe_dir)?;
    let mut index = String::from("layer,stage,channel,rows,cols,peaks,file_stem\n");
    for p in &run.probes {
        let stem = format!("layer{}_{}_ch{}", p.layer, p.stage.name(), p.channel);
        save_tensor(
            &Tensor::Complex(p.spectrum.to_image()),
            probe_dir.join(format!("{stem}_spectrum.cten")),
        )?;
        export_image(
            &p.spectrum.shifted_log_magnitude(),
            probe_dir.join(format!("{stem}_spectrum.pgm")),
            Normalization::MinMax,
        )?;
        fs::write(probe_dir.join(format!("{stem}_peaks.csv")), p.peaks_csv())?;
        index.push_str(&format!(
            "{},{},{},{},{},{},{stem}\n",
            p.layer,
            p.stage.name(),
            p.channel,
            p.spectrum.rows(),
            p.spectrum.cols(),
            p.peaks.len()
        ));
    }
    fs::write(probe_dir.join("probes.csv"), index)?;
    save_tensor(&Tensor::Real(run.output), probe_dir.join("output.cten"))?;
    log.info(format!(
        "{} layers, {} probes -> {}",
        chain.layers().len(),
        run.probes.len(),
        probe_dir.display()
    ));
    Ok(())
}

fn relu_taylor(alpha: f64, z0: f64, order: usize) -> Outcome {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Failure::Usage(format!(
            "--alpha must be positive, got {alpha}"
        )));
    }
    if order > taylor::MAX_ORDER {
        return Err(Failure::Usage(format!(
            "--order must be at most {}, got {order}",
            taylor::MAX_ORDER
        )));
    }
    let series = taylor::taylor_coeffs(Activation::SoftplusWarped(alpha), z0, order)?;
    let mut out = String::from("k,coefficient\n");
    for (k, c) in series.coeffs().iter().enumerate() {
        out.push_str(&format!("{k},{c:e}\n"));
    }
    // z grid on [-1, 1] in steps of 1e-3, containing 0 exactly
    let grid: Vec<f64> = (0..=2000).map(|i| (i as f64 - 1000.0) / 1000.0).collect();
    let report = taylor::relu_limit_check(&[alpha, 2.0 * alpha, 4.0 * alpha], &grid)?;
    out.push('\n');
    out.push_str(&report.to_csv());
    print!("{out}");
    Ok(())
}

fn fig_onetone(args: FigArgs, log: &Log) -> Outcome {
    let perturbation = match args.perturb {
        PerturbKind::None => Perturbation::None,
        PerturbKind::PhaseNoise => Perturbation::PhaseNoise { sigma: args.sigma },
    };
    let opts = FigOptions {
        seed: args.seed,
        rows: args.rows,
        cols: args.cols,
        window: args.window,
        perturbation,
    };
    let fake = args.fake.as_deref().map(load_complex).transpose()?;
    let summary = pipeline::fig_onetone_against(&opts, fake.as_ref(), &args.out)?;
    log.info(format!(
        "mean |coherence| = {}, loss = {}, {} files -> {}",
        summary.mean_coherence,
        summary.coherence_loss,
        summary.files.len(),
        args.out.display()
    ));
    Ok(())
}
