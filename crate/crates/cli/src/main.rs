//! `fscap`: link budgets, capacity bounds, operator spectra and array designs
//! for aperture-constrained free-space links.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fscap_core::array_synth::{achieved_efficiency, synthesize_array};
use fscap_core::bounds::{
    capacity_bounds, lower_bound_at_area, AreaChoice, BoundsReport, SpectrumSettings,
};
use fscap_core::link_model::LinkBudget;
use fscap_core::report::{link_report, run_sweep, sweep_csv, sweep_json, SweepGrid};
use fscap_core::spectrum::{assemble_spectrum, DiscGeometry, SpectrumCache, Truncation, TruncationOverride};
use fscap_core::verify::{check_names, run_checks, Golden, DEFAULT_SEED};
use fscap_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "fscap", version, about = "Capacity bounds and array synthesis for free-space links")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    link: LinkArgs,

    #[command(flatten)]
    truncation: TruncationArgs,

    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized verification scenes.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SISO capacity and both bounds for one link.
    Link(AreaArgs),
    /// Bounds over a grid of received SNR values; the power is rescaled per row.
    Sweep {
        /// `min:max:points[:log|lin]` in received SNR.
        #[arg(long, default_value = "0.01:1e6:25:log")]
        grid: String,
    },
    /// Operator spectrum of the synthesis disc.
    Spectrum(AreaArgs),
    /// Upper and lower capacity bounds.
    Bounds(AreaArgs),
    /// Finite distributed array realizing the lower bound.
    Array {
        #[command(flatten)]
        area: AreaArgs,
        /// Equal-area cells (elements per side).
        #[arg(long, default_value_t = 1024)]
        cells: usize,
        /// Spatial streams; defaults to the waterfill count at the chosen area.
        #[arg(long)]
        streams: Option<usize>,
    },
    /// Runs the acceptance checks.
    Verify {
        /// Print check names without running them.
        #[arg(long)]
        list: bool,
        /// Golden-value file replacing the built-in one.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Comma-separated check ids to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Args, Debug, Clone)]
struct LinkArgs {
    /// Transmit power P [W].
    #[arg(long, global = true, default_value_t = LinkBudget::default().power)]
    power: f64,
    /// Bandwidth B [Hz].
    #[arg(long, global = true, default_value_t = LinkBudget::default().bandwidth)]
    bandwidth: f64,
    /// Noise PSD N0 [W/Hz].
    #[arg(long, global = true, default_value_t = LinkBudget::default().noise_psd)]
    noise_psd: f64,
    /// Wavelength [m].
    #[arg(long, global = true, default_value_t = LinkBudget::default().wavelength)]
    wavelength: f64,
    /// Range d [m].
    #[arg(long, global = true, default_value_t = LinkBudget::default().range)]
    range: f64,
    /// Loss factor L in (0, 1].
    #[arg(long, global = true, default_value_t = LinkBudget::default().loss)]
    loss: f64,
    /// Total transmit aperture A_T [m²].
    #[arg(long, global = true, default_value_t = LinkBudget::default().aperture_tx)]
    aperture_tx: f64,
    /// Total receive aperture A_R [m²].
    #[arg(long, global = true, default_value_t = LinkBudget::default().aperture_rx)]
    aperture_rx: f64,
}

impl LinkArgs {
    fn budget(&self) -> LinkBudget {
        LinkBudget {
            power: self.power,
            bandwidth: self.bandwidth,
            noise_psd: self.noise_psd,
            wavelength: self.wavelength,
            range: self.range,
            loss: self.loss,
            aperture_tx: self.aperture_tx,
            aperture_rx: self.aperture_rx,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct TruncationArgs {
    /// Gauss–Legendre order of the radial solves.
    #[arg(long, global = true)]
    quadrature_order: Option<usize>,
    /// Largest angular order |N|.
    #[arg(long, global = true)]
    max_angular: Option<u32>,
    /// Radial modes kept per angular order.
    #[arg(long, global = true)]
    max_radial: Option<u32>,
}

impl TruncationArgs {
    fn overrides(&self) -> TruncationOverride {
        TruncationOverride {
            max_angular: self.max_angular,
            max_radial: self.max_radial,
            quadrature_order: self.quadrature_order,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct AreaArgs {
    /// Synthesis disc area |S| [m²].
    #[arg(long, conflicts_with = "optimize_area")]
    area: Option<f64>,
    /// Search the disc area maximizing the lower bound (the default).
    #[arg(long)]
    optimize_area: bool,
}

impl AreaArgs {
    fn choice(&self) -> AreaChoice {
        match self.area {
            Some(a) => AreaChoice::Fixed(a),
            None => AreaChoice::Optimize,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Validation(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let link = cli.link.budget();
    let settings = SpectrumSettings {
        overrides: cli.truncation.overrides(),
    };
    let cache = SpectrumCache::new();
    let format = |default| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Link(area) => {
            let r = link_report(&link, &area.choice(), &cache, &settings)?;
            let text = match format(Format::Json) {
                Format::Json => json(&r),
                Format::Csv => {
                    let b = &r.bounds;
                    let mut out = String::from(
                        "g,gamma,gamma_g,siso_bits,capacity_bps,regime,lower,upper,approx,K,best_area\n",
                    );
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.g,
                        r.gamma,
                        r.gamma_g,
                        r.siso_bits,
                        r.capacity_bps,
                        regime_name(b),
                        b.lower,
                        b.upper,
                        opt(b.approx),
                        b.active_k,
                        opt(b.best_area)
                    );
                    out
                }
            };
            emit(cli, &text)
        }
        Command::Sweep { grid } => {
            let grid: SweepGrid = grid.parse()?;
            let rows = run_sweep(&link, &grid, &cache, &settings)?;
            let text = match format(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Json => sweep_json(&rows) + "\n",
            };
            emit(cli, &text)
        }
        Command::Bounds(area) => {
            let b = BoundsReport::from(&capacity_bounds(&link, &area.choice(), &cache, &settings)?);
            let text = match format(Format::Json) {
                Format::Json => json(&b),
                Format::Csv => format!(
                    "gamma_g,regime,lower,upper,approx,K,best_area,eps0\n{},{},{},{},{},{},{},{}\n",
                    b.gamma_g,
                    regime_name(&b),
                    b.lower,
                    b.upper,
                    opt(b.approx),
                    b.active_k,
                    opt(b.best_area),
                    b.eps0
                ),
            };
            emit(cli, &text)
        }
        Command::Spectrum(area) => {
            let a = resolve_area(&link, area, &cache, &settings)?;
            let geometry = DiscGeometry::for_link(a, &link)?;
            let t = settings.overrides.apply(Truncation::default_for(geometry.c_param));
            let export = assemble_spectrum(&geometry, t)?.export();
            let text = match format(Format::Json) {
                Format::Json => json(&export),
                Format::Csv => {
                    let mut out = String::from("N,m,beta,nu_sq\n");
                    for e in &export.entries {
                        let _ = writeln!(out, "{},{},{},{}", e.angular, e.m, e.beta, e.nu_sq);
                    }
                    out
                }
            };
            emit(cli, &text)
        }
        Command::Array { area, cells, streams } => {
            let a = resolve_area(&link, area, &cache, &settings)?;
            let streams = match streams {
                Some(k) => *k,
                None => lower_bound_at_area(a, &link, &cache, &settings)?.1,
            };
            let geometry = DiscGeometry::for_link(a, &link)?;
            let t = settings.overrides.apply(Truncation::default_for(geometry.c_param));
            let spectrum = assemble_spectrum(&geometry, t)?;
            let design = synthesize_array(&spectrum, a, streams, *cells, &link)?;
            log::info!(
                "array with {} streams on {} cells achieves {} b/s/Hz",
                streams,
                cells,
                achieved_efficiency(&design, &geometry, &link)?
            );
            let export = design.export();
            let text = match format(Format::Json) {
                Format::Json => json(&export),
                Format::Csv => {
                    let mut out = String::from("side,stream,element,x,y,area,weight_re,weight_im\n");
                    for (side, elements, weights) in [
                        ("tx", &export.tx_elements, &export.tx_weights),
                        ("rx", &export.rx_elements, &export.rx_weights),
                    ] {
                        for (k, row) in weights.iter().enumerate() {
                            for (i, (e, w)) in elements.iter().zip(row).enumerate() {
                                let _ = writeln!(
                                    out,
                                    "{side},{k},{i},{},{},{},{},{}",
                                    e.x, e.y, e.area, w[0], w[1]
                                );
                            }
                        }
                    }
                    out
                }
            };
            emit(cli, &text)
        }
        Command::Verify { list, golden, only } => {
            if *list {
                let mut out = String::new();
                for (id, name) in check_names() {
                    let _ = writeln!(out, "{id:02} {name}");
                }
                return emit(cli, &out);
            }
            let golden = match golden {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Failure::Validation(format!("invalid golden: {}: {e}", path.display()))
                    })?;
                    Golden::parse(&text)?
                }
                None => Golden::embedded(),
            };
            let ids = if only.is_empty() { None } else { Some(only.as_slice()) };
            if let Some(ids) = ids {
                let known = check_names().len();
                if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > known) {
                    return Err(Failure::Validation(format!(
                        "invalid only: no check {bad} (ids run 1..={known})"
                    )));
                }
            }
            let report = run_checks(&golden, cli.seed, ids);
            let text = match cli.format {
                Some(Format::Json) => json(&report),
                Some(Format::Csv) => {
                    let mut out = String::from("id,name,passed,seconds\n");
                    for c in &report.checks {
                        let _ = writeln!(out, "{},{},{},{}", c.id, c.name, c.passed, c.seconds);
                    }
                    out
                }
                None => {
                    let mut out = String::new();
                    for c in &report.checks {
                        let _ = writeln!(out, "{}", c.line());
                    }
                    out
                }
            };
            emit(cli, &text)?;
            let failed: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{:02} {}", c.id, c.name))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verify(failed.join(", ")))
            }
        }
    }
}

/// `--area` if given, else the optimized disc, else the smallest admissible one.
fn resolve_area(
    link: &LinkBudget,
    area: &AreaArgs,
    cache: &SpectrumCache,
    settings: &SpectrumSettings,
) -> Result<f64, Failure> {
    if let Some(a) = area.area {
        return Ok(a);
    }
    let b = capacity_bounds(link, &AreaChoice::Optimize, cache, settings)?;
    Ok(b.best_area.unwrap_or_else(|| link.max_aperture()))
}

fn regime_name(b: &BoundsReport) -> String {
    serde_json::to_value(b.regime)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Validation(format!("invalid out: {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                // A closed pipe (`| head`) is not an error worth reporting.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Validation(format!("invalid out: stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}
