//! The `cryoamp` command line.
//!
//! Exit codes: 0 on success, 2 for bad input (missing files, parse errors,
//! circuit diagnostics, invalid arguments), 3 when a solver did not converge.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ac::{self, design_l_match_with, input_impedance, Topology};
use crate::dc::{self, DcError};
use crate::device::{fit_statz, read_iv_csv, FitOptions};
use crate::netlist::{self, validate, DcSweep, Netlist};
use crate::output::{Cell, Table};
use crate::physics::{self, Grid, QubitParams, WellAssignment};
use crate::svg::{Marker, Plot, Series};
use crate::units::{format_engineering, parse_number, sig9};

/// Environment variable naming the directory for output files when `--out`
/// is not given.
pub const OUT_DIR_ENV: &str = "CRYOAMP_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cryoamp", version, about = "Cryogenic HEMT amplifier and measuring-cell calculator")]
pub struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the summary on standard error.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operating point or supply sweep of a netlist.
    Dc(DcArgs),
    /// Small-signal frequency sweep of a netlist.
    Ac(AcArgs),
    /// Fit beta and U_T of the FET model to measured I-V data.
    Fit(FitArgs),
    /// Flux-qubit energy levels.
    Spectrum(SpectrumArgs),
    /// Thermal photon rates inside the shield cavity.
    Photons(PhotonArgs),
    /// Brightness temperature of the amplifier input.
    Brightness(BrightnessArgs),
    /// L-section matching network.
    Match(MatchArgs),
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn number_or_inf(s: &str) -> Result<f64, String> {
    match s.trim().to_lowercase().as_str() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => number(s),
    }
}

#[derive(Debug, Args)]
pub struct DcArgs {
    /// Circuit deck.
    pub netlist: PathBuf,
    /// Sweep SOURCE from START to STOP in steps of STEP (overrides `.dc`).
    #[arg(long, num_args = 4, value_names = ["SOURCE", "START", "STOP", "STEP"], allow_negative_numbers = true)]
    pub sweep: Option<Vec<String>>,
    /// Solve only the operating point even if the netlist has a `.dc` directive.
    #[arg(long)]
    pub op: bool,
}

#[derive(Debug, Args)]
pub struct AcArgs {
    /// Circuit deck.
    pub netlist: PathBuf,
    /// Start frequency, Hz (overrides `.ac`).
    #[arg(long, value_parser = number)]
    pub fstart: Option<f64>,
    /// Stop frequency, Hz (overrides `.ac`).
    #[arg(long, value_parser = number)]
    pub fstop: Option<f64>,
    /// Points per decade.
    #[arg(long)]
    pub points: Option<usize>,
    /// Frequency whose gains are reported in the summary.
    #[arg(long, value_parser = number, default_value = "450meg")]
    pub f0: f64,
    /// Force every FET transconductance to zero.
    #[arg(long)]
    pub passive: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns `u_gs,u_ds,i_d` in SI units.
    pub data: PathBuf,
    /// Starting beta, A/V².
    #[arg(long, value_parser = number, default_value = "0.1")]
    pub beta0: f64,
    /// Starting threshold voltage, V.
    #[arg(long, value_parser = number, default_value = "-0.55", allow_negative_numbers = true)]
    pub vto0: f64,
    /// Channel-length modulation, 1/V (held fixed).
    #[arg(long, value_parser = number, default_value = "0")]
    pub lambda: f64,
    /// Knee parameter, 1/V (held fixed).
    #[arg(long, value_parser = number, default_value = "2")]
    pub alpha: f64,
    /// Input capacitance written to the model line, F.
    #[arg(long, value_parser = number, default_value = "0")]
    pub cin: f64,
    /// Input resistance written to the model line, Ω.
    #[arg(long, value_parser = number, default_value = "0")]
    pub rin: f64,
    /// Model name.
    #[arg(long, default_value = "MGF4937")]
    pub name: String,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// JSON file with `l`, `c`, `beta_l`, `phi_e`; flags below override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Loop inductance, H.
    #[arg(long, value_parser = number)]
    pub l: Option<f64>,
    /// Junction capacitance, F.
    #[arg(long, value_parser = number)]
    pub c: Option<f64>,
    /// Screening parameter.
    #[arg(long, value_parser = number)]
    pub beta_l: Option<f64>,
    /// External flux, flux quanta.
    #[arg(long, value_parser = number, allow_negative_numbers = true)]
    pub phi_e: Option<f64>,
    /// Grid points including both ends.
    #[arg(long, default_value_t = Grid::DEFAULT_POINTS)]
    pub points: usize,
    /// Grid spans phi_e ± this many flux quanta.
    #[arg(long, value_parser = number, default_value = "1.2")]
    pub half_width: f64,
    /// Number of levels to compute.
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Emit the potential `phi,potential_K` instead of the levels.
    #[arg(long)]
    pub potential: bool,
}

#[derive(Debug, Args)]
pub struct PhotonArgs {
    /// Frequency, Hz.
    #[arg(long, value_parser = number, required_unless_present_any = ["table", "reduction"])]
    pub f: Option<f64>,
    /// Temperature, K.
    #[arg(long, value_parser = number)]
    pub t: Option<f64>,
    /// Radiating area, m².
    #[arg(long, value_parser = number, default_value = "1.25e-2")]
    pub area: f64,
    /// Bandwidth, Hz; defaults to f/Q.
    #[arg(long, value_parser = number)]
    pub bandwidth: Option<f64>,
    /// Quality factor used when the bandwidth is not given.
    #[arg(long, value_parser = number, default_value = "10")]
    pub q: f64,
    /// Rates over 8, 10, 12, 15 GHz and 10, 20, 30 mK.
    #[arg(long, conflicts_with = "reduction")]
    pub table: bool,
    /// Radiance reduction from T_HOT to T_COLD at each `--f` (or 450 MHz and 10 GHz).
    #[arg(long, num_args = 2, value_names = ["T_HOT", "T_COLD"], value_parser = number)]
    pub reduction: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct BrightnessArgs {
    /// Generator (source) temperature, K.
    #[arg(value_parser = number)]
    pub t_g: f64,
    /// Drain electron temperature, K.
    #[arg(value_parser = number)]
    pub t_d: f64,
    /// Reverse transmission S12, dB (`-inf` for none).
    #[arg(value_parser = number_or_inf, allow_hyphen_values = true)]
    pub s12_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    LowPass,
    HighPass,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Resistance the network must present, Ω.
    #[arg(value_parser = number)]
    pub r_source: f64,
    /// Resistance terminating the network, Ω.
    #[arg(value_parser = number)]
    pub r_load: f64,
    /// Design frequency, Hz.
    #[arg(value_parser = number)]
    pub f: f64,
    #[arg(long, value_enum, default_value = "low-pass")]
    pub topology: TopologyArg,
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<DcError> for CliError {
    fn from(e: DcError) -> Self {
        let code = match &e {
            DcError::NonConvergence(_) => EXIT_NONCONVERGENCE,
            DcError::Sweep { source, .. } if matches!(**source, DcError::NonConvergence(_)) => EXIT_NONCONVERGENCE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// What a subcommand produced.
struct Outcome {
    body: String,
    extension: &'static str,
    summary: Vec<String>,
    /// Exit code when the body was still written.
    code: i32,
}

impl Outcome {
    fn new(body: String, extension: &'static str) -> Self {
        Self {
            body,
            extension,
            summary: Vec::new(),
            code: EXIT_OK,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Dc(a) => cmd_dc(a, cli.format),
        Command::Ac(a) => cmd_ac(a, cli.format),
        Command::Fit(a) => cmd_fit(a, cli.format),
        Command::Spectrum(a) => cmd_spectrum(a, cli.format),
        Command::Photons(a) => cmd_photons(a, cli.format),
        Command::Brightness(a) => cmd_brightness(a, cli.format),
        Command::Match(a) => cmd_match(a, cli.format),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            return e.code;
        }
    };
    if !cli.quiet {
        for line in &outcome.summary {
            let _ = writeln!(stderr, "{line}");
        }
    }
    let target = cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{}.{}", command_name(&cli.command), outcome.extension)))
    });
    match target {
        Some(path) => {
            if let Err(e) = fs::write(&path, &outcome.body) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
        None => {
            if let Err(e) = stdout.write_all(outcome.body.as_bytes()) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INPUT;
            }
        }
    }
    outcome.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Dc(_) => "dc",
        Command::Ac(_) => "ac",
        Command::Fit(_) => "fit",
        Command::Spectrum(_) => "spectrum",
        Command::Photons(_) => "photons",
        Command::Brightness(_) => "brightness",
        Command::Match(_) => "match",
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::input(format!("{}: no such file", path.display()))
        } else {
            CliError::input(format!("{}: {e}", path.display()))
        }
    })
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = read_text(path)?;
    let n = netlist::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let diagnostics = validate(&n);
    if !diagnostics.is_empty() {
        let list: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(CliError::input(format!("{}: {}", path.display(), list.join("; "))));
    }
    Ok(n)
}

/// Renders a table, or rejects `svg` for outputs that have no plot.
fn render(table: &Table, format: Option<Format>, plot: Option<Plot>) -> Result<Outcome, CliError> {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Outcome::new(table.to_csv(), "csv")),
        Format::Json => Ok(Outcome::new(table.to_json(), "json")),
        Format::Svg => match plot {
            Some(p) => Ok(Outcome::new(p.render(), "svg")),
            None => Err(CliError::input("svg output is only available for sweeps and spectra")),
        },
    }
}

pub fn cmd_dc_table(n: &Netlist, sweep: &DcSweep) -> Result<(Table, dc::SweepTable), DcError> {
    let table = dc::sweep_supply(n, sweep)?;
    let (fet, bias) = dc::summary_selection(n);
    let mut out = Table::new(&["u_supply", "i_d", "u_ds", "p_hemt", "p_bias"]);
    for s in table.summary(fet.as_deref(), &bias) {
        out.push(vec![s.u_supply.into(), s.i_d.into(), s.u_ds.into(), s.p_hemt.into(), s.p_bias.into()]);
    }
    Ok((out, table))
}

fn cmd_dc(a: &DcArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let n = load_netlist(&a.netlist)?;
    let sweep = match &a.sweep {
        Some(v) => {
            let num = |s: &String| parse_number(s).map_err(|e| CliError::input(format!("--sweep: {e}")));
            let s = DcSweep {
                source: v[0].to_uppercase(),
                start: num(&v[1])?,
                stop: num(&v[2])?,
                step: num(&v[3])?,
            };
            if !(s.step > 0.0 && s.stop >= s.start) {
                return Err(CliError::input("--sweep needs STEP > 0 and STOP >= START"));
            }
            Some(s)
        }
        None if a.op => None,
        None => n.dc_sweep().cloned(),
    };

    let op = dc::solve_op(&n)?;
    let mut summary = op_summary(&n, &op);
    let Some(sweep) = sweep else {
        let mut headers = Vec::new();
        let mut row = Vec::new();
        for (node, v) in op.node_voltages.iter().filter(|(k, _)| k.as_str() != netlist::GROUND) {
            headers.push(format!("v({node})"));
            row.push(Cell::Number(*v));
        }
        for (src, i) in &op.source_currents {
            headers.push(format!("i({})", src.to_lowercase()));
            row.push(Cell::Number(*i));
        }
        for f in &op.fets {
            let name = f.name.to_lowercase();
            for (q, v) in [("u_gs", f.u_gs), ("u_ds", f.u_ds), ("i_d", f.i_d), ("p_hemt", f.p_hemt)] {
                headers.push(format!("{q}({name})"));
                row.push(Cell::Number(v));
            }
        }
        let mut t = Table::new(&headers);
        t.push(row);
        let mut o = render(&t, format, None)?;
        o.summary = summary;
        return Ok(o);
    };

    let (table, raw) = cmd_dc_table(&n, &sweep)?;
    let col = |name: &str| table.column(name).unwrap_or_default();
    let x = col("u_supply");
    let plot = Plot {
        title: format!("DC sweep of {}", raw.source),
        x_label: "U_supply, V".into(),
        y_label: "µA, mV, µW".into(),
        log_x: false,
        series: vec![
            Series { label: "I_d, µA".into(), x: x.clone(), y: col("i_d").iter().map(|v| v * 1e6).collect() },
            Series { label: "U_ds, mV".into(), x: x.clone(), y: col("u_ds").iter().map(|v| v * 1e3).collect() },
            Series { label: "P_HEMT, µW".into(), x: x.clone(), y: col("p_hemt").iter().map(|v| v * 1e6).collect() },
            Series { label: "P_bias, µW".into(), x, y: col("p_bias").iter().map(|v| v * 1e6).collect() },
        ],
        markers: Vec::new(),
    };
    let mut o = render(&table, format, Some(plot))?;
    summary.insert(0, format!("swept {} over {} points", raw.source, raw.rows.len()));
    o.summary = summary;
    Ok(o)
}

fn op_summary(n: &Netlist, op: &dc::OperatingPoint) -> Vec<String> {
    let mut lines = vec![format!(
        "operating point: {} Newton iterations, KCL residual {} A",
        op.iterations,
        sig9(op.kcl_residual)
    )];
    for f in &op.fets {
        lines.push(format!(
            "  {}: U_gs = {}V  U_ds = {}V  I_d = {}A  P_HEMT = {}W  g_m = {}S  g_ds = {}S",
            f.name,
            format_engineering(f.u_gs, 4),
            format_engineering(f.u_ds, 4),
            format_engineering(f.i_d, 4),
            format_engineering(f.p_hemt, 4),
            format_engineering(f.g_m, 4),
            format_engineering(f.g_ds, 4),
        ));
    }
    let (_, bias) = dc::summary_selection(n);
    if !bias.is_empty() {
        let probed: f64 = bias.iter().filter_map(|r| op.resistor_power.get(r)).sum();
        let total: f64 = op.resistor_power.values().sum();
        lines.push(format!(
            "  P_bias of {} = {}W, all resistors = {}W",
            bias.join("+"),
            format_engineering(probed, 4),
            format_engineering(total, 4)
        ));
    }
    lines
}

fn cmd_ac(a: &AcArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let n = load_netlist(&a.netlist)?;
    let directive = n.ac_sweep();
    let f_start = a.fstart.or(directive.map(|s| s.f_start)).unwrap_or(1e8);
    let f_stop = a.fstop.or(directive.map(|s| s.f_stop)).unwrap_or(2e9);
    let points = a.points.or(directive.map(|s| s.points_per_decade)).unwrap_or(100);
    let op = dc::solve_op(&n)?;
    let mut lin = ac::linearize(&n, &op).map_err(|e| CliError::input(e.to_string()))?;
    if a.passive {
        lin = lin.without_transconductance();
    }
    let freqs = ac::log_grid(f_start, f_stop, points).map_err(|e| CliError::input(e.to_string()))?;
    let r = ac::sweep_ac_with(&lin, &freqs, crate::Execution::default()).map_err(|e| CliError::input(e.to_string()))?;
    if r.gp.is_empty() {
        return Err(CliError::input(
            "netlist needs `.probe V(in) I(src) V(out) I(load)` to designate the gain ports",
        ));
    }
    let mut table = Table::new(&["f_hz", "gv_db", "gi_db", "gp_db"]);
    for k in 0..r.frequencies.len() {
        table.push(vec![r.frequencies[k].into(), r.gv[k].into(), r.gi[k].into(), r.gp[k].into()]);
    }
    let plot = Plot {
        title: "small-signal gains".into(),
        x_label: "f, Hz".into(),
        y_label: "dB".into(),
        log_x: true,
        series: vec![
            Series { label: "G_V".into(), x: r.frequencies.clone(), y: r.gv.clone() },
            Series { label: "G_I".into(), x: r.frequencies.clone(), y: r.gi.clone() },
            Series { label: "G_P".into(), x: r.frequencies.clone(), y: r.gp.clone() },
        ],
        markers: Vec::new(),
    };
    let mut o = render(&table, format, Some(plot))?;
    match lin.gains_at(a.f0) {
        Ok(Some(g)) => o.summary.push(format!(
            "at {:.3} MHz: G_V = {:.2} dB, G_I = {:.2} dB, G_P = {:.2} dB (active-power gain {:.2} dB)",
            a.f0 / 1e6,
            g.gv,
            g.gi,
            g.gp,
            g.gp_real
        )),
        Ok(None) => {}
        Err(e) => o.summary.push(format!("at {:.3} MHz: {e}", a.f0 / 1e6)),
    }
    if let Some(p) = r.peak {
        o.summary.push(format!(
            "peak G_P = {:.2} dB at {:.3} MHz, -3 dB bandwidth {:.3} MHz",
            p.g_p_peak,
            p.f_peak / 1e6,
            p.bw_3db / 1e6
        ));
        let step = p.f_peak * (10f64.powf(1.0 / points as f64) - 1.0);
        if p.bw_3db < 3.0 * step {
            o.summary.push(format!(
                "warning: peak spans fewer than 3 grid steps ({:.3} MHz each); raise --points",
                step / 1e6
            ));
        }
    }
    for f in &r.failures {
        o.summary.push(format!("warning: {}", f.reason));
    }
    if !r.failures.is_empty() {
        o.code = EXIT_NONCONVERGENCE;
    }
    Ok(o)
}

fn cmd_fit(a: &FitArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let text = read_text(&a.data)?;
    let samples = read_iv_csv(text.as_bytes()).map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    let opts = FitOptions {
        lambda: a.lambda,
        alpha: a.alpha,
        init_beta: a.beta0,
        init_u_t: a.vto0,
        c_in: a.cin,
        r_in: a.rin,
        max_iterations: a.max_iterations,
        ..FitOptions::default()
    };
    let report = fit_statz(&samples, &opts).map_err(|e| CliError::input(e.to_string()))?;
    let p = report.params;
    let mut o = match format {
        None => Outcome::new(format!("{}\n", p.model_line(&a.name.to_uppercase())), "cir"),
        Some(f) => {
            let mut t = Table::new(&["beta", "vto", "lambda", "alpha", "rms_a", "iterations", "converged"]);
            t.push(vec![
                p.beta.into(),
                p.u_t.into(),
                p.lambda.into(),
                p.alpha.into(),
                report.rms.into(),
                report.iterations.into(),
                Cell::Text(report.converged.to_string()),
            ]);
            render(&t, Some(f), None)?
        }
    };
    o.summary.push(format!(
        "{} samples, {} iterations, rms residual {}A",
        samples.len(),
        report.iterations,
        format_engineering(report.rms, 4)
    ));
    if !report.converged {
        o.summary.push("warning: iteration budget exhausted before convergence".into());
        o.code = EXIT_NONCONVERGENCE;
    }
    Ok(o)
}

fn qubit_params(a: &SpectrumArgs) -> Result<QubitParams, CliError> {
    let mut q = match &a.params {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => QubitParams::working_point(),
    };
    if let Some(v) = a.l {
        q.l = v;
    }
    if let Some(v) = a.c {
        q.c = v;
    }
    if let Some(v) = a.beta_l {
        q.beta_l = v;
    }
    if let Some(v) = a.phi_e {
        q.phi_e = v;
    }
    q.check().map_err(|e| CliError::input(e.to_string()))?;
    Ok(q)
}

fn cmd_spectrum(a: &SpectrumArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let q = qubit_params(a)?;
    let grid = Grid::centered(q.phi_e, a.half_width, a.points);
    let h = physics::build_hamiltonian(&q, &grid).map_err(|e| CliError::input(e.to_string()))?;
    let s = physics::eigensolve(&h, a.levels).map_err(|e| CliError::input(e.to_string()))?;

    let table = if a.potential {
        let mut t = Table::new(&["phi", "potential_K"]);
        for (phi, u) in s.grid.iter().zip(&s.potential_k) {
            t.push(vec![(*phi).into(), (*u).into()]);
        }
        t
    } else {
        let mut t = Table::new(&["level", "energy_K", "energy_GHz", "flux_expect_phi0"]);
        for l in &s.levels {
            t.push(vec![l.index.into(), l.energy_k.into(), l.energy_ghz.into(), l.flux_expect.into()]);
        }
        t
    };
    let markers = s
        .levels
        .iter()
        .filter_map(|l| {
            let inside: Vec<f64> = s
                .grid
                .iter()
                .zip(&s.potential_k)
                .filter(|(_, u)| **u <= l.energy_k)
                .map(|(x, _)| *x)
                .collect();
            Some(Marker { x0: *inside.first()?, x1: *inside.last()?, y: l.energy_k })
        })
        .collect();
    // show the potential up to a little above the highest level
    let top = s.levels.last().map_or(f64::INFINITY, |l| l.energy_k);
    let bottom = s.potential_k.iter().copied().fold(f64::INFINITY, f64::min);
    let ceiling = top + 0.5 * (top - bottom);
    let (px, pu): (Vec<f64>, Vec<f64>) = s
        .grid
        .iter()
        .zip(&s.potential_k)
        .filter(|(_, u)| **u <= ceiling)
        .map(|(x, u)| (*x, *u))
        .unzip();
    let plot = Plot {
        title: format!("beta_L = {}, phi_e = {}", q.beta_l, q.phi_e),
        x_label: "flux, Φ₀".into(),
        y_label: "U / k_B, K".into(),
        log_x: false,
        series: vec![Series { label: "potential".into(), x: px, y: pu }],
        markers,
    };
    let mut o = render(&table, format, Some(plot))?;
    o.summary.push(format!(
        "I_c = {}A, E_L/k_B = {}K, grid {} points, spacing {} Φ₀",
        format_engineering(q.critical_current(), 4),
        format_engineering(q.energy_unit() / crate::constants::BOLTZMANN, 4),
        grid.n,
        format_engineering(grid.spacing(), 3)
    ));
    if s.coarse_grid {
        o.summary.push("warning: grid is coarse for the potential range; increase --points".into());
    }
    for m in &s.minima {
        o.summary.push(format!("  minimum at φ = {:.4} ({:.3} K)", m.phi, m.potential_k));
    }
    for b in &s.barriers {
        o.summary.push(format!("  barrier at φ = {:.4} ({:.3} K)", b.phi, b.potential_k));
    }
    for l in &s.levels {
        let well = match l.well {
            WellAssignment::Well(i) => format!("well {i}"),
            WellAssignment::Delocalized => "delocalized".into(),
        };
        o.summary.push(format!(
            "  level {}: {:.4} K, {:.4} GHz, <φ> = {:.4}, {well}",
            l.index, l.energy_k, l.energy_ghz, l.flux_expect
        ));
    }
    if let Some(d) = physics::well_flux_separation(&s) {
        o.summary.push(format!("flux change between wells: {d:.4} Φ₀"));
    }
    Ok(o)
}

fn cmd_photons(a: &PhotonArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let err = |e: physics::PhotonError| CliError::input(e.to_string());
    if let Some(r) = &a.reduction {
        let freqs = match a.f {
            Some(f) => vec![f],
            None => vec![450e6, 10e9],
        };
        let mut t = Table::new(&["f_hz", "t_hot_k", "t_cold_k", "ratio", "orders", "wideband_ratio", "wideband_orders"]);
        for f in freqs {
            let red = physics::radiance_reduction(f, r[0], r[1]).map_err(err)?;
            t.push(vec![
                f.into(),
                r[0].into(),
                r[1].into(),
                red.ratio.into(),
                red.orders.into(),
                red.wideband_ratio.into(),
                red.wideband_orders.into(),
            ]);
        }
        return render(&t, format, None);
    }
    let headers = ["f_hz", "t_k", "area_m2", "bandwidth_hz", "radiance", "power_density", "rate"];
    let mut t = Table::new(&headers);
    let mut summary = Vec::new();
    let bandwidth = |f: f64| a.bandwidth.unwrap_or(f / a.q);
    let mut push = |b: physics::PhotonBudget| {
        t.push(vec![
            b.f.into(),
            b.t.into(),
            b.area.into(),
            b.bandwidth.into(),
            b.radiance.into(),
            b.power_density.into(),
            b.rate.into(),
        ])
    };
    match a.bandwidth {
        Some(bw) => summary.push(format!("bandwidth {}Hz at every frequency", format_engineering(bw, 4))),
        None => summary.push(format!("bandwidth assumption: f/Q with Q = {}", a.q)),
    }
    if a.table {
        for t_k in [0.010, 0.020, 0.030] {
            for f in [8e9, 10e9, 12e9, 15e9] {
                push(physics::photon_rate(f, t_k, a.area, bandwidth(f)).map_err(err)?);
            }
        }
    } else {
        let f = a.f.ok_or_else(|| CliError::input("--f is required"))?;
        let t_k = a.t.ok_or_else(|| CliError::input("--t is required"))?;
        push(physics::photon_rate(f, t_k, a.area, bandwidth(f)).map_err(err)?);
    }
    let mut o = render(&t, format, None)?;
    o.summary = summary;
    Ok(o)
}

fn cmd_brightness(a: &BrightnessArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    if !(a.t_g >= 0.0 && a.t_d >= 0.0) || !a.t_g.is_finite() || !a.t_d.is_finite() {
        return Err(CliError::input("temperatures must be finite and non-negative"));
    }
    if !(a.s12_db <= 0.0) {
        return Err(CliError::input("s12_db must be <= 0 dB"));
    }
    let t_b = physics::brightness_temperature(a.t_g, a.t_d, a.s12_db);
    let mut t = Table::new(&["t_g", "t_d", "s12_db", "t_b"]);
    t.push(vec![a.t_g.into(), a.t_d.into(), a.s12_db.into(), t_b.into()]);
    render(&t, format, None)
}

fn cmd_match(a: &MatchArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let topology = match a.topology {
        TopologyArg::LowPass => Topology::LowPass,
        TopologyArg::HighPass => Topology::HighPass,
    };
    let d = design_l_match_with(a.r_source, a.r_load, a.f, topology).map_err(|e| CliError::input(e.to_string()))?;
    let z = input_impedance(&d, a.f);
    let mut o = match format {
        None => Outcome::new(d.netlist_fragment("src", "load"), "cir"),
        Some(f) => {
            let mut t = Table::new(&[
                "r_source",
                "r_load",
                "f_hz",
                "topology",
                "q_match",
                "series_kind",
                "series_value",
                "shunt_kind",
                "shunt_value",
                "z_in_re",
                "z_in_im",
            ]);
            t.push(vec![
                d.r_source.into(),
                d.r_load.into(),
                d.f.into(),
                Cell::Text(format!("{:?}", d.topology).to_lowercase()),
                d.q_match.into(),
                Cell::Text(d.series_element.letter().to_string()),
                d.series_element.value().into(),
                Cell::Text(d.shunt_element.letter().to_string()),
                d.shunt_element.value().into(),
                z.re.into(),
                z.im.into(),
            ]);
            render(&t, Some(f), None)?
        }
    };
    o.summary.push(format!(
        "input impedance {:.4} {:+.4}j ohm at {}Hz",
        z.re,
        z.im,
        format_engineering(a.f, 4)
    ));
    Ok(o)
}
