//! Command-line front end. Every subcommand loads one scenario (a TOML file
//! or a shipped preset), runs one pipeline stage and writes plot-ready files
//! into the output directory.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputFormat, ScenarioConfig, PRESETS};
use crate::dynamics::{
    amplitude_trace, build_transfer_function, classify_regime, coherence_spectrum, find_poles, spectral_peaks,
    stationary_photon_spectrum, time_grid, AmplitudeTrace,
};
use crate::error::{Error, Result};
use crate::greens::{kernel_spectrum, KernelSpectrum};
use crate::mie::cross_sections;
use crate::oracle::{band_truncation, memory_depth, solve_ide_direct, time_kernel};
use crate::pseudomode::{fit_kernel, fit_kernel_auto, LorentzianSet};
use crate::units::MEV_PER_EV;
use crate::validate;

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "plexdyn", version, about = "Emitter dynamics near bare and coated silver nanospheres")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped scenario: bare-paper or coated-paper.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory, overriding the scenario's.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Multipole cut-off, overriding the scenario's.
    #[arg(long, global = true, value_name = "N")]
    nmax: Option<usize>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Far-field extinction and scattering cross sections.
    Xsec,
    /// Near-field kernel spectrum K(ω) at the emitter position.
    Kernel,
    /// Multi-Lorentzian fit of the kernel spectrum.
    Fit {
        /// Number of Lorentzian terms (default: numerics.fit_terms).
        #[arg(long)]
        terms: Option<usize>,
        /// Add terms until the residual stops improving, up to --terms.
        #[arg(long)]
        auto: bool,
    },
    /// Pole decomposition, population trace and spectra for one emitter energy.
    Dynamics {
        /// Lorentzian set (JSON) to use instead of fitting the computed kernel.
        #[arg(long, value_name = "PATH")]
        fit: Option<PathBuf>,
        /// Emitter energy in eV, overriding the scenario's.
        #[arg(long, value_name = "EV")]
        omega_e: Option<f64>,
    },
    /// Direct solve of the amplitude equation with the exact kernel.
    Oracle {
        #[arg(long, value_name = "EV")]
        omega_e: Option<f64>,
    },
    /// Population and coherence maps over a range of emitter energies.
    Sweep {
        #[arg(long, value_name = "PATH")]
        fit: Option<PathBuf>,
        #[arg(long, value_name = "EV")]
        min: Option<f64>,
        #[arg(long, value_name = "EV")]
        max: Option<f64>,
        #[arg(long, value_name = "EV")]
        step: Option<f64>,
    },
    /// Run the acceptance checks and report pass/fail per criterion.
    Validate {
        /// Only run the given criteria (repeatable).
        #[arg(long = "criterion", value_name = "N")]
        criteria: Vec<usize>,
    },
    /// Print the resolved scenario as TOML.
    Show,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    pool.install(|| match dispatch(&cli) {
        Ok(code) => code,
        Err((stage, e)) => {
            eprintln!("error: {stage}: {e}");
            e.exit_code()
        }
    })
}

type StageResult<T> = std::result::Result<T, (&'static str, Error)>;

trait Stage<T> {
    fn at(self, stage: &'static str) -> StageResult<T>;
}

impl<T> Stage<T> for Result<T> {
    fn at(self, stage: &'static str) -> StageResult<T> {
        self.map_err(|e| (stage, e))
    }
}

fn dispatch(cli: &Cli) -> StageResult<i32> {
    if let Command::Validate { criteria } = &cli.command {
        return Ok(run_validate(criteria));
    }
    let cfg = load_config(&cli.global).at("config")?;
    let out = Output::new(&cfg, cli.global.out.as_deref());
    match &cli.command {
        Command::Xsec => run_xsec(&cfg, &out),
        Command::Kernel => run_kernel(&cfg, &out),
        Command::Fit { terms, auto } => run_fit(&cfg, &out, terms.unwrap_or(cfg.numerics.fit_terms), *auto),
        Command::Dynamics { fit, omega_e } => run_dynamics(&cfg, &out, fit.as_deref(), *omega_e),
        Command::Oracle { omega_e } => run_oracle(&cfg, &out, *omega_e),
        Command::Sweep { fit, min, max, step } => {
            let mut cfg = cfg.clone();
            let n = &mut cfg.numerics;
            n.sweep_min = min.unwrap_or(n.sweep_min);
            n.sweep_max = max.unwrap_or(n.sweep_max);
            n.sweep_step = step.unwrap_or(n.sweep_step);
            cfg.validate().at("config")?;
            run_sweep(&cfg, &out, fit.as_deref())
        }
        Command::Show => {
            let _ = write!(
                std::io::stdout(),
                "{}",
                toml::to_string(&cfg).map_err(|e| Error::Config(e.to_string())).at("config")?
            );
            Ok(())
        }
        Command::Validate { .. } => unreachable!("handled above"),
    }
    .map(|()| EXIT_OK)
}

fn load_config(g: &GlobalArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&g.config, &g.preset) {
        (Some(path), _) => ScenarioConfig::from_path(path)?,
        (None, Some(name)) => ScenarioConfig::preset(name)?,
        (None, None) => {
            return Err(Error::Config(format!(
                "no scenario given; pass --config PATH or --preset NAME ({})",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(n) = g.nmax {
        cfg.numerics.n_max = n;
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Output directory plus the provenance line written atop every CSV.
struct Output {
    dir: PathBuf,
    header: String,
    csv: bool,
    json: bool,
}

#[derive(Serialize)]
struct Meta<'a, T: Serialize> {
    plexdyn_version: &'static str,
    config_sha256: &'a str,
    scenario: Option<&'a str>,
    #[serde(flatten)]
    data: T,
}

impl Output {
    fn new(cfg: &ScenarioConfig, dir: Option<&Path>) -> Self {
        Output {
            dir: dir.map_or_else(|| PathBuf::from(&cfg.outputs.directory), Path::to_path_buf),
            header: format!("# plexdyn {} config-sha256={}", env!("CARGO_PKG_VERSION"), cfg.hash()),
            csv: cfg.outputs.wants(OutputFormat::Csv),
            json: cfg.outputs.wants(OutputFormat::Json),
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)?;
        say!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut buf = Vec::new();
        writeln!(buf, "{}", self.header)?;
        body(&mut buf)?;
        self.write(name, &buf)
    }

    fn json<T: Serialize>(&self, name: &str, cfg: &ScenarioConfig, data: T) -> Result<()> {
        if !self.json {
            return Ok(());
        }
        let hash = cfg.hash();
        let meta = Meta {
            plexdyn_version: env!("CARGO_PKG_VERSION"),
            config_sha256: &hash,
            scenario: cfg.name.as_deref(),
            data,
        };
        let mut s = serde_json::to_string_pretty(&meta)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Bare JSON without the metadata block, for files meant to be read back.
    fn raw_json(&self, name: &str, s: String) -> Result<()> {
        if !self.json {
            return Ok(());
        }
        self.write(name, format!("{s}\n").as_bytes())
    }
}

fn series_csv(w: &mut Vec<u8>, column: &str, grid: &[f64], values: &[f64]) -> Result<()> {
    writeln!(w, "omega_eV,{column}")?;
    for (g, v) in grid.iter().zip(values) {
        writeln!(w, "{g:.6},{v:.10e}")?;
    }
    Ok(())
}

fn run_xsec(cfg: &ScenarioConfig, out: &Output) -> StageResult<()> {
    let stack = cfg.stack().at("materials")?;
    let grid = cfg.energy_grid().at("config")?;
    let xs = grid
        .par_iter()
        .map(|&w| cross_sections(&stack, w, cfg.numerics.n_max))
        .collect::<Result<Vec<_>>>()
        .at("mie")?;
    out.csv("xsec.csv", |w| {
        writeln!(w, "omega_eV,sigma_ext_nm2,sigma_sca_nm2")?;
        for x in &xs {
            writeln!(w, "{:.6},{:.10e},{:.10e}", x.omega, x.sigma_ext, x.sigma_sca)?;
        }
        Ok(())
    })
    .at("output")?;
    let ext: Vec<f64> = xs.iter().map(|x| x.sigma_ext).collect();
    let peaks = spectral_peaks(&grid, &ext);
    for p in &peaks {
        say!("extinction maximum {:.4} eV  {:.1} nm²", p.omega, p.value);
    }
    #[derive(Serialize)]
    struct Peaks<'a> {
        extinction_peaks: &'a [crate::dynamics::SpectralPeak],
    }
    out.json("xsec_peaks.json", cfg, Peaks { extinction_peaks: &peaks }).at("output")
}

fn compute_kernel(cfg: &ScenarioConfig) -> StageResult<KernelSpectrum> {
    let stack = cfg.stack().at("materials")?;
    let grid = cfg.energy_grid().at("config")?;
    kernel_spectrum(&stack, &cfg.emitter(), &grid, cfg.numerics.n_max).at("greens")
}

fn run_kernel(cfg: &ScenarioConfig, out: &Output) -> StageResult<()> {
    let kernel = compute_kernel(cfg)?;
    let (missing, fraction) = band_truncation(&kernel);
    let (w_max, k_max) = kernel.argmax();
    say!("kernel maximum {w_max:.4} eV  {k_max:.4} meV; area {:.1} meV²", kernel.area());
    say!("estimated weight outside the band {missing:.1} meV² ({:.2}%)", 100.0 * fraction);
    out.csv("kernel.csv", |w| kernel.write_csv(w)).at("output")?;
    #[derive(Serialize)]
    struct KernelOut<'a> {
        area_mev2: f64,
        argmax_ev: f64,
        tail_weight_mev2: f64,
        tail_fraction: f64,
        spectrum: &'a KernelSpectrum,
    }
    let data = KernelOut {
        area_mev2: kernel.area(),
        argmax_ev: w_max,
        tail_weight_mev2: missing,
        tail_fraction: fraction,
        spectrum: &kernel,
    };
    out.json("kernel.json", cfg, data).at("output")
}

fn run_fit(cfg: &ScenarioConfig, out: &Output, terms: usize, auto: bool) -> StageResult<()> {
    let kernel = compute_kernel(cfg)?;
    let opts = &cfg.numerics.fit;
    let (set, report) =
        if auto { fit_kernel_auto(&kernel, terms, opts) } else { fit_kernel(&kernel, terms, None, opts) }
            .at("pseudomode")?;
    say!("{} terms, relative residual {:.4}, converged {}", set.len(), report.residual_rms, report.converged);
    say!("  j  Omega_eV   B_meV     A_meV2    2A/B²");
    for (j, t) in set.terms().iter().enumerate() {
        say!(
            "{:>3}  {:.4}  {:>8.2}  {:>9.1}  {:>6.2}",
            j + 1,
            t.omega,
            t.width,
            t.area,
            crate::pseudomode::criterion_ratio(t)
        );
    }
    for w in &report.warnings {
        say!("warning: {w}");
    }
    out.raw_json("fit.json", set.to_json().at("output")?).at("output")?;
    out.json("fit_report.json", cfg, &report).at("output")?;
    out.csv("fit.csv", |w| {
        writeln!(w, "j,Omega_eV,B_eV,A_meV2")?;
        for (j, t) in set.terms().iter().enumerate() {
            writeln!(w, "{},{:.6},{:.6},{:.4}", j + 1, t.omega, t.width / MEV_PER_EV, t.area)?;
        }
        Ok(())
    })
    .at("output")
}

/// Lorentzian set from a file, or fitted to the computed kernel, with the
/// scenario's memory convention applied.
fn dynamics_set(cfg: &ScenarioConfig, fit: Option<&Path>) -> StageResult<LorentzianSet> {
    let set = match fit {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
                .at("config")?;
            LorentzianSet::from_json(&src)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
                .at("config")?
        }
        None => {
            let kernel = compute_kernel(cfg)?;
            fit_kernel(&kernel, cfg.numerics.fit_terms, None, &cfg.numerics.fit).at("pseudomode")?.0
        }
    };
    cfg.numerics.memory_convention.apply(&set).at("dynamics")
}

fn run_dynamics(cfg: &ScenarioConfig, out: &Output, fit: Option<&Path>, omega_e: Option<f64>) -> StageResult<()> {
    let omega_e = omega_e.unwrap_or(cfg.emitter.omega_e);
    if !(omega_e > 0.0) {
        return Err(("config", Error::Config(format!("--omega-e must be positive, got {omega_e}"))));
    }
    let set = dynamics_set(cfg, fit)?;
    let tf = build_transfer_function(&set, omega_e);
    let decomp = find_poles(&tf).at("dynamics")?;
    let t = time_grid(cfg.numerics.t_max, cfg.numerics.t_step).at("config")?;
    let trace = amplitude_trace(&decomp, &t).at("dynamics")?;
    let grid = cfg.energy_grid().at("config")?;
    let coherence = coherence_spectrum(&decomp, &grid);
    let delta: Vec<f64> = grid.iter().map(|w| (w - omega_e) * MEV_PER_EV).collect();
    let stationary = stationary_photon_spectrum(&set, &tf, &delta);
    let report = classify_regime(&decomp, &cfg.numerics.classifier);

    say!("omega_e {omega_e:.4} eV: regime {}", report.regime.label());
    say!("  m  gamma_meV  omega_meV  |R|");
    for (m, row) in decomp.rows().iter().enumerate().take(5) {
        say!("{:>3}  {:>9.3}  {:>9.3}  {:.3}", m + 1, row.gamma_meV, row.omega_meV, row.abs_R);
    }

    out.csv("trace.csv", |w| trace.write_csv(w)).at("output")?;
    out.csv("coherence.csv", |w| series_csv(w, "coherence_fs", &grid, &coherence)).at("output")?;
    out.csv("stationary.csv", |w| series_csv(w, "photon_density_per_meV", &grid, &stationary)).at("output")?;
    out.json("poles.json", cfg, PolesOut { omega_e_eV: omega_e, poles: decomp.rows() }).at("output")?;
    out.json("regime.json", cfg, &report).at("output")
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct PolesOut {
    omega_e_eV: f64,
    poles: Vec<crate::dynamics::PoleRow>,
}

fn run_oracle(cfg: &ScenarioConfig, out: &Output, omega_e: Option<f64>) -> StageResult<()> {
    let omega_e = omega_e.unwrap_or(cfg.emitter.omega_e);
    let kernel = cfg.numerics.memory_convention.apply_spectrum(&compute_kernel(cfg)?);
    let t = time_grid(cfg.numerics.t_max, cfg.numerics.t_step).at("config")?;
    let trace = solve_ide_direct(&kernel, omega_e, &t, cfg.numerics.tail_limit).at("oracle")?;
    let tk = time_kernel(&kernel, omega_e, &t, cfg.numerics.tail_limit).at("oracle")?;
    if let Some((t_min, p_min)) = trace.first_minimum() {
        say!("first population minimum {p_min:.4} at {t_min:.2} fs");
    }
    match memory_depth(&tk, 0.01) {
        Some(d) => say!("kernel memory below 1% after {d:.1} fs"),
        None => say!("kernel memory stays above 1% over the {} fs window", cfg.numerics.t_max),
    }
    out.csv("oracle_trace.csv", |w| trace.write_csv(w)).at("output")
}

/// Population recovery after a minimum that counts as a visible fringe.
const FRINGE_CONTRAST: f64 = 0.01;

/// Mean spacing of successive visible population minima, fs. A minimum is
/// visible when the population climbs back by `FRINGE_CONTRAST` before the
/// next one.
fn fringe_period(trace: &AmplitudeTrace) -> Option<f64> {
    let p = &trace.population;
    let mut minima = Vec::new();
    let mut i = 1;
    while i + 1 < p.len() {
        if p[i] < p[i - 1] && p[i] <= p[i + 1] {
            let mut peak = p[i];
            let mut j = i + 1;
            while j < p.len() && p[j] >= p[j - 1] {
                peak = p[j];
                j += 1;
            }
            if peak - p[i] > FRINGE_CONTRAST {
                minima.push(trace.t_fs[i]);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    (minima.len() >= 2).then(|| (minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64)
}

#[derive(Serialize)]
struct SweepRow {
    omega_e: f64,
    regime: &'static str,
    gamma1_mev: f64,
    omega1_mev: f64,
    abs_r1: f64,
    omega_r_mev: Option<f64>,
    fringe_period_fs: Option<f64>,
    first_minimum_fs: Option<f64>,
    first_minimum_population: Option<f64>,
}

fn run_sweep(cfg: &ScenarioConfig, out: &Output, fit: Option<&Path>) -> StageResult<()> {
    let set = dynamics_set(cfg, fit)?;
    let energies = cfg.sweep_grid().at("config")?;
    let t = time_grid(cfg.numerics.t_max, cfg.numerics.sweep_t_step).at("config")?;
    let grid = cfg.energy_grid().at("config")?;
    let rows = energies
        .par_iter()
        .map(|&we| -> Result<_> {
            let decomp = find_poles(&build_transfer_function(&set, we))?;
            let trace = amplitude_trace(&decomp, &t)?;
            let coherence = coherence_spectrum(&decomp, &grid);
            let report = classify_regime(&decomp, &cfg.numerics.classifier);
            let row = SweepRow {
                omega_e: we,
                regime: report.regime.label(),
                gamma1_mev: decomp.gamma(0),
                omega1_mev: decomp.omega(0),
                abs_r1: decomp.residues[0].norm(),
                omega_r_mev: report.omega_r,
                fringe_period_fs: fringe_period(&trace),
                first_minimum_fs: trace.first_minimum().map(|m| m.0),
                first_minimum_population: trace.first_minimum().map(|m| m.1),
            };
            Ok((trace.population, coherence, row))
        })
        .collect::<Result<Vec<_>>>()
        .at("dynamics")?;

    let deepest = rows
        .iter()
        .filter_map(|(_, _, r)| Some((r.omega_e, r.first_minimum_fs?, r.first_minimum_population?)))
        .min_by(|a, b| a.2.total_cmp(&b.2));
    if let Some((we, t_min, p_min)) = deepest {
        say!("deepest population collapse at omega_e {we:.3} eV: {p_min:.2e} after {t_min:.2} fs");
    }
    out.csv("population_map.csv", |w| write_matrix(w, "t_fs", &energies, &t, |i| &rows[i].0)).at("output")?;
    out.csv("coherence_map.csv", |w| write_matrix(w, "omega_eV", &energies, &grid, |i| &rows[i].1)).at("output")?;
    out.csv("sweep_summary.csv", |w| {
        writeln!(w, "omega_e_eV,regime,gamma1_meV,omega1_meV,abs_R1,omega_R_meV,fringe_period_fs,first_minimum_fs,first_minimum_population")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        for (_, _, r) in &rows {
            writeln!(
                w,
                "{:.6},{},{:.6},{:.6},{:.6},{},{},{},{}",
                r.omega_e,
                r.regime,
                r.gamma1_mev,
                r.omega1_mev,
                r.abs_r1,
                opt(r.omega_r_mev),
                opt(r.fringe_period_fs),
                opt(r.first_minimum_fs),
                opt(r.first_minimum_population)
            )?;
        }
        Ok(())
    })
    .at("output")?;
    let summary: Vec<&SweepRow> = rows.iter().map(|(_, _, r)| r).collect();
    #[derive(Serialize)]
    struct SweepOut<'a> {
        rows: Vec<&'a SweepRow>,
    }
    out.json("sweep_summary.json", cfg, SweepOut { rows: summary }).at("output")
}

/// Matrix with one row per emitter energy and one column per `cols` entry.
fn write_matrix<'a>(
    w: &mut Vec<u8>,
    axis: &str,
    energies: &[f64],
    cols: &[f64],
    row: impl Fn(usize) -> &'a [f64],
) -> Result<()> {
    write!(w, "omega_e_eV\\{axis}")?;
    for c in cols {
        write!(w, ",{c:.6}")?;
    }
    writeln!(w)?;
    for (i, we) in energies.iter().enumerate() {
        write!(w, "{we:.6}")?;
        for v in row(i) {
            write!(w, ",{v:.8e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn run_validate(criteria: &[usize]) -> i32 {
    let results: Vec<_> = if criteria.is_empty() {
        validate::run_all()
    } else {
        let mut v = Vec::new();
        for &id in criteria {
            match validate::criterion(id) {
                Some(r) => v.push(r),
                None => {
                    eprintln!("error: config: no acceptance criterion {id}");
                    return EXIT_CONFIG;
                }
            }
        }
        v
    };
    let mut all = true;
    for r in &results {
        say!("{}", r.summary());
        for line in &r.details {
            say!("    {line}");
        }
        all &= r.passed;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    say!("{} of {} criteria passed", results.len() - failed, results.len());
    if all {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}
