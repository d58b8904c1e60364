use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use mimqbp::de::{default_bracket, find_threshold, load_spec, run_design, save_spec, write_atomic, DesignConfig};
use mimqbp::sim::{rows_to_csv, run_monte_carlo, CodewordMode, RunOptions, SimConfig, DEFAULT_MAX_FRAMES};
use mimqbp::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_DESIGN: u8 = 3;
const EXIT_IO: u8 = 4;

/// Design and simulate mutual-information-maximizing quantized belief
/// propagation decoders for regular LDPC codes.
#[derive(Parser)]
#[command(name = "mimqbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a decoder by density evolution and write its spec file.
    Design {
        #[command(flatten)]
        code: CodeArgs,
        /// Design noise standard deviation.
        #[arg(long)]
        sigma_d: f64,
        #[arg(long, default_value = "spec.toml")]
        out: PathBuf,
    },
    /// Bisect for the largest noise level at which the design converges.
    Threshold {
        #[command(flatten)]
        code: CodeArgs,
        /// Lower bracket end; defaults to half the Shannon-limit sigma.
        #[arg(long)]
        lo: Option<f64>,
        /// Upper bracket end; defaults to 1.5 times the Shannon-limit sigma.
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Monte-Carlo error rates of a designed decoder on an alist code.
    Simulate {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Eb/N0 points in dB, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        snr: Vec<f64>,
        /// Frame errors to collect per point.
        #[arg(long, default_value_t = 100)]
        min_ferr: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_FRAMES)]
        max_frames: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// Also run floating-point BP and write `<out stem>_bp.csv`.
        #[arg(long)]
        baseline_bp: bool,
        /// Transmit the all-zero codeword instead of random codewords.
        #[arg(long)]
        all_zero: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the per-iteration tables and diagnostics of a spec file.
    Inspect {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    dv: usize,
    #[arg(long)]
    dc: usize,
    /// Sets all three alphabet sizes to 2^bits.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
    bits: u32,
    /// Channel alphabet size, overriding --bits.
    #[arg(long)]
    l_size: Option<usize>,
    /// Variable-to-check alphabet size, overriding --bits.
    #[arg(long)]
    r_size: Option<usize>,
    /// Check-to-variable alphabet size, overriding --bits.
    #[arg(long)]
    s_size: Option<usize>,
    /// Check-node accumulator width in bits.
    #[arg(long)]
    qc: u32,
    /// Variable-node accumulator width in bits.
    #[arg(long)]
    qv: u32,
    #[arg(long)]
    iters: usize,
}

impl CodeArgs {
    fn config(&self, sigma_d: f64) -> DesignConfig {
        let mut cfg = DesignConfig::with_bits(self.dv, self.dc, self.bits, self.qc, self.qv, sigma_d, self.iters);
        cfg.l_size = self.l_size.unwrap_or(cfg.l_size);
        cfg.r_size = self.r_size.unwrap_or(cfg.r_size);
        cfg.s_size = self.s_size.unwrap_or(cfg.s_size);
        cfg
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Alist { .. } | Error::SpecFormat(_) | Error::SpecVersion { .. } => EXIT_IO,
            Error::Parameter(_) | Error::Bracket(_) | Error::Incompatible(_) => EXIT_USAGE,
            _ => EXIT_DESIGN,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: String) -> Failure {
    Failure { code: EXIT_USAGE, msg }
}

fn check_output_dir(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() && !d.is_dir() => {
            Err(Failure { code: EXIT_IO, msg: format!("output directory {} does not exist", d.display()) })
        }
        _ => Ok(()),
    }
}

fn check_input(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_IO, msg: format!("cannot read {}", path.display()) })
    }
}

fn baseline_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_bp.{}", ext.to_string_lossy()),
        None => format!("{stem}_bp"),
    };
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Design { code, sigma_d, out } => {
            let cfg = code.config(sigma_d);
            cfg.validate()?;
            check_output_dir(&out)?;
            let spec = run_design(&cfg)?;
            save_spec(&spec, &out)?;
            println!(
                "wrote {} ({} iterations, final I(X;R) = {:.6})",
                out.display(),
                spec.iterations.len(),
                spec.final_mi()
            );
        }
        Command::Threshold { code, lo, hi, tol } => {
            let cfg = code.config(1.0);
            cfg.validate()?;
            let (dlo, dhi) = default_bracket(&cfg)?;
            let (lo, hi) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
            info!("bisecting sigma in [{lo}, {hi}] to width {tol}");
            println!("{}", find_threshold(&cfg, lo, hi, tol)?);
        }
        Command::Simulate { code, spec, snr, min_ferr, max_frames, seed, workers, baseline_bp, all_zero, out } => {
            check_input(&code)?;
            check_input(&spec)?;
            check_output_dir(&out)?;
            let workers = match workers {
                Some(w) => w,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let codeword = if all_zero { CodewordMode::AllZero } else { CodewordMode::Random };
            let options = RunOptions { min_frame_errors: min_ferr, max_frames, seed, workers, codeword };
            if snr.iter().any(|s| !s.is_finite()) {
                return Err(usage("SNR points must be finite".into()));
            }
            let cfg = SimConfig { code_path: code, spec_path: spec, snr_points: snr, options, baseline: baseline_bp };
            let report = run_monte_carlo(&cfg)?;
            write_atomic(&out, rows_to_csv(&report.rows).as_bytes())?;
            if baseline_bp {
                write_atomic(&baseline_path(&out), rows_to_csv(&report.baseline_rows).as_bytes())?;
            }
            let m = &report.metadata;
            println!("code {} spec sha256 {} seed {} wall time {:.2} s", m.code_id, m.spec_hash, m.seed, m.wall_time_s);
            for r in &report.rows {
                println!("{:>7.3} dB  BER {:.3e}  FER {:.3e}  frames {}", r.snr_db, r.ber, r.fer, r.frames);
            }
        }
        Command::Inspect { spec } => {
            let spec = load_spec(&spec)?;
            let c = &spec.config;
            let mut out = std::io::stdout().lock();
            let mut w = || -> std::io::Result<()> {
                writeln!(
                    out,
                    "({}, {}) code, |L| = {}, |R| = {}, |S| = {}, q_c = {}, q_v = {}, sigma_d = {}",
                    c.d_v, c.d_c, c.l_size, c.r_size, c.s_size, c.q_c, c.q_v, c.sigma_d
                )?;
                writeln!(out, "channel thresholds: {:?}", spec.channel_boundaries)?;
                writeln!(out, "initial map L -> R: {:?}", spec.initial_r_map)?;
                writeln!(out, "{:>4}  {:>12}  {:>12}  {:>8}", "t", "I(X;S)", "I(X;R)", "gamma_e")?;
                for (t, r) in spec.iterations.iter().enumerate() {
                    writeln!(out, "{:>4}  {:>12.8}  {:>12.8}  {:>8}", t + 1, r.mi_s, r.mi_r, r.gamma_e)?;
                }
                for (t, r) in spec.iterations.iter().enumerate() {
                    writeln!(out, "\niteration {}", t + 1)?;
                    writeln!(out, "  phi_c   {:?}", r.phi_c)?;
                    writeln!(out, "  gamma_c {:?}", r.gamma_c)?;
                    writeln!(out, "  phi_v   {:?}", r.phi_v)?;
                    writeln!(out, "  phi_ch  {:?}", r.phi_ch)?;
                    writeln!(out, "  gamma_v {:?}", r.gamma_v)?;
                }
                Ok(())
            };
            w().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MIMQBP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
