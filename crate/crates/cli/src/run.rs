//! Executes a validated scenario and writes its artifacts.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value as Json};

use resonance_lab::basis::Grid;
use resonance_lab::constants::{fine_structure, OscillatorUnits, CODATA_2018};
use resonance_lab::export::write_table;
use resonance_lab::kinematics::{
    compton_sweep, first_order_infeasibility, pair_threshold, photoelectric_velocity,
};
use resonance_lab::packets::{
    breathing_density, breathing_energy_stats, coherent_density, coherent_energy_stats,
    displaced_gaussian, squeezed_gaussian, BreathingPacketParams, CoherentPacketParams,
};
use resonance_lab::perturbation::{
    default_probe_time, measure_rabi_period, rabi_period, rabi_population, resonance_scan,
    two_level_integrate, Coupling, PerturbationSpec, TwoLevelDrive,
};
use resonance_lab::tdse::{
    evolve_with, mean_energy_numeric, EvolutionConfig, Hamiltonian, KineticStencil, Stepper,
};
use resonance_lab::timescales::hierarchy_report;
use resonance_lab::{Error, GridWaveFunction};

use crate::config::{Format, ScenarioConfig, ScenarioKind};
use crate::plot::gnuplot_script;

/// Column data produced by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataTable {
    pub header: Json,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Everything a scenario computes before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub data: DataTable,
    /// Additional JSON documents, by file name.
    pub extras: Vec<(String, Json)>,
    pub summary: Json,
}

#[derive(Debug)]
pub enum RunError {
    Numeric(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn to_json(&self, kind: Option<ScenarioKind>) -> Json {
        let (tag, message) = match self {
            RunError::Numeric(e) => (e.kind(), e.to_string()),
            RunError::Io(e) => ("Io", e.to_string()),
        };
        json!({
            "status": "error",
            "error": tag,
            "message": message,
            "scenario": kind.map(|k| k.name()),
        })
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numeric(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Files written by [`run_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub data_file: PathBuf,
    pub manifest: Json,
}

fn units(cfg: &ScenarioConfig) -> Result<OscillatorUnits, Error> {
    OscillatorUnits::new(cfg.f("mass"), cfg.f("omega_c"), cfg.f("hbar"))
}

fn stepper(cfg: &ScenarioConfig) -> Stepper {
    match cfg.s("stepper") {
        "crank_nicolson" => Stepper::CrankNicolson,
        _ => Stepper::Pade4,
    }
}

fn stencil(cfg: &ScenarioConfig) -> KineticStencil {
    match cfg.s("stencil") {
        "second" => KineticStencil::SecondOrder,
        "fourth" => KineticStencil::FourthOrder,
        _ => KineticStencil::SixthOrder,
    }
}

/// Evolves `psi0` and samples ρ against the closed-form density.
fn packet_run(
    cfg: &ScenarioConfig,
    u: &OscillatorUnits,
    psi0: &GridWaveFunction,
    exact: impl Fn(f64, f64) -> f64,
    header: Json,
) -> Result<(DataTable, Json), Error> {
    let grid = *psi0.grid();
    let dt = cfg.float("dt").unwrap_or(1e-3 / u.omega_c());
    let t_end = cfg.float("t_end").unwrap_or(2.0 * PI / u.omega_c());
    let n_steps = EvolutionConfig::steps_for(t_end, dt).max(1);
    let evolution = EvolutionConfig {
        dt,
        n_steps,
        hamiltonian: Hamiltonian::harmonic(u, grid, stencil(cfg))?,
        drive: None,
        stepper: stepper(cfg),
    };
    let frames = cfg.i("frames") as usize;
    let stride = n_steps.div_ceil(frames).max(1);
    let x_stride = cfg.i("x_stride") as usize;
    let xs = grid.points();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let last = evolve_with(psi0, &evolution, |step, t, psi| {
        let rho = psi.density();
        for (r, &x) in rho.iter().zip(&xs) {
            worst = worst.max((r - exact(x, t)).abs());
        }
        if step % stride == 0 || step == n_steps {
            for i in (0..xs.len()).step_by(x_stride) {
                rows.push(vec![t, xs[i], rho[i], exact(xs[i], t)]);
            }
        }
    })?;
    let energy_start = mean_energy_numeric(psi0, &evolution.hamiltonian);
    let energy_end = mean_energy_numeric(&last, &evolution.hamiltonian);
    let mut header = header;
    header["evolution"] = evolution.describe();
    let summary = json!({
        "max_density_error": worst,
        "norm_drift": (last.norm_sqr() - psi0.norm_sqr()).abs(),
        "mean_energy_start": energy_start,
        "mean_energy_end": energy_end,
        "mean_energy_drift": (energy_end - energy_start).abs(),
        "steps": n_steps,
    });
    Ok((
        DataTable {
            header,
            columns: vec!["t", "x", "rho", "rho_exact"],
            rows,
        },
        summary,
    ))
}

fn run_packet(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let u = units(cfg)?;
    let p = CoherentPacketParams::new(cfg.f("a"), u)?;
    let grid = Grid::symmetric(p.a.abs() + 10.0 / u.alpha(), cfg.i("points") as usize)?;
    let psi0 = displaced_gaussian(&p, grid)?;
    let (data, mut summary) = packet_run(
        cfg,
        &u,
        &psi0,
        |x, t| coherent_density(x, t, &p),
        header(cfg),
    )?;
    let stats = coherent_energy_stats(&p);
    summary["closed_form_energy"] = json!(stats);
    Ok(ScenarioResult {
        data,
        extras: Vec::new(),
        summary,
    })
}

fn run_breathing(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let u = units(cfg)?;
    let p = BreathingPacketParams::new(cfg.f("beta"), u)?;
    let half = p.half_width();
    let grid = Grid::symmetric(half, cfg.i("points") as usize)?;
    let psi0 = squeezed_gaussian(&p, grid)?;
    let (data, mut summary) = packet_run(
        cfg,
        &u,
        &psi0,
        |x, t| breathing_density(x, t, &p),
        header(cfg),
    )?;
    summary["closed_form_energy"] = json!(breathing_energy_stats(&p));
    Ok(ScenarioResult {
        data,
        extras: Vec::new(),
        summary,
    })
}

fn run_rabi(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let eta = cfg.f("eta");
    let omega_nm = cfg.f("omega_nm");
    let detuning = cfg.f("detuning");
    let drive = TwoLevelDrive {
        eta,
        omega_nm,
        omega: omega_nm + detuning,
    };
    let t_end = cfg.float("t_end").unwrap_or(2.0 * rabi_period(eta));
    let traj = two_level_integrate(drive, t_end, cfg.i("samples") as usize)?;
    let rows: Vec<Vec<f64>> = (0..traj.times.len())
        .map(|i| {
            let t = traj.times[i];
            vec![t, traj.upper[i], traj.lower[i], rabi_population(eta, t)]
        })
        .collect();
    let deviation = rows.iter().map(|r| (r[1] - r[3]).abs()).fold(0.0, f64::max);
    let measured = measure_rabi_period(&traj, 2.0 * PI / drive.omega);
    let summary = json!({
        "predicted_period": rabi_period(eta),
        "measured_period": measured,
        "max_deviation_from_rabi": deviation,
        "max_norm_error": traj.max_norm_error(),
        "resonant": detuning == 0.0,
    });
    Ok(ScenarioResult {
        data: DataTable {
            header: header(cfg),
            columns: vec!["t", "upper", "lower", "rabi"],
            rows,
        },
        extras: Vec::new(),
        summary,
    })
}

fn run_scan(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let u = units(cfg)?;
    let coupling = Coupling::parse(cfg.s("coupling")).expect("schema restricts couplings");
    let (lo, hi, step) = (cfg.f("omega_min"), cfg.f("omega_max"), cfg.f("omega_step"));
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let omegas: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let me = PerturbationSpec::new(coupling, cfg.f("amplitude"), lo)?
        .matrix_elements(&u, cfg.i("n_max") as usize)?;
    let level = cfg.i("level") as usize;
    let t_probe = match cfg.float("t_probe") {
        Some(t) => t,
        None => default_probe_time(&me, level).ok_or_else(|| Error::InvalidParameter {
            name: "coupling",
            reason: "no transitions out of the initial level".into(),
        })?,
    };
    let scan = resonance_scan(&me, level, &omegas, t_probe)?;
    let peak = scan.peak().expect("scan has at least one point");
    let rows = scan
        .points
        .iter()
        .map(|p| vec![p.omega, p.transfer_probability])
        .collect();
    let summary = json!({
        "peak_omega": peak.omega,
        "peak_transfer_probability": peak.transfer_probability,
        "peak_in_units_of_omega_c": peak.omega / u.omega_c(),
        "t_probe": t_probe,
        "flag_count": scan.flags.len(),
        "flagged_omegas": scan.flags.iter().map(|f| f.omega).collect::<Vec<_>>(),
    });
    Ok(ScenarioResult {
        data: DataTable {
            header: header(cfg),
            columns: vec!["omega", "transfer_probability"],
            rows,
        },
        extras: vec![("flags.json".into(), json!(scan.flags))],
        summary,
    })
}

fn run_compton(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let c = CODATA_2018;
    let omega = c.omega_from_ev(cfg.f("energy_kev") * 1e3);
    let (lo, hi, step) = (
        cfg.f("theta_min_deg"),
        cfg.f("theta_max_deg"),
        cfg.f("theta_step_deg"),
    );
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let angles: Vec<f64> = (0..count)
        .map(|i| (lo + step * i as f64).min(180.0))
        .collect();
    let solutions = compton_sweep(omega, &angles, &c)?;
    let rows = solutions
        .iter()
        .zip(&angles)
        .map(|(s, deg)| {
            vec![
                *deg,
                s.omega_prime,
                s.wavelength_shift(&c) * 1e-2,
                c.erg_to_ev(s.electron_kinetic_energy(&c)) * 1e-3,
            ]
        })
        .collect();
    let worst = solutions
        .iter()
        .map(|s| s.max_residual(&c))
        .fold(0.0, f64::max);
    let summary = json!({
        "omega": omega,
        "max_conservation_residual": worst,
        "compton_wavelength_m": c.planck() / (c.electron_mass * c.light_speed) * 1e-2,
        "first_order_infeasibility": first_order_infeasibility(&c),
    });
    Ok(ScenarioResult {
        data: DataTable {
            header: header(cfg),
            columns: vec!["theta_deg", "omega_prime", "delta_lambda_m", "electron_keV"],
            rows,
        },
        extras: Vec::new(),
        summary,
    })
}

fn run_photo(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let c = CODATA_2018;
    let w_ev = cfg.f("work_function_ev");
    let lo = cfg.float("energy_min_ev").unwrap_or(w_ev);
    let hi = cfg.f("energy_max_ev");
    let n = cfg.i("points") as usize;
    let work = c.ev_to_erg(w_ev);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let e = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let omega = c.omega_from_ev(e);
        rows.push(vec![e, omega, photoelectric_velocity(omega, work, &c)?]);
    }
    let summary = json!({
        "threshold_omega": c.omega_from_ev(w_ev),
        "pair_threshold_omega": pair_threshold(&c),
        "pair_threshold_mev": c.erg_to_ev(c.hbar * pair_threshold(&c)) * 1e-6,
    });
    Ok(ScenarioResult {
        data: DataTable {
            header: header(cfg),
            columns: vec!["photon_ev", "omega", "velocity_cm_s"],
            rows,
        },
        extras: Vec::new(),
        summary,
    })
}

fn run_timescales(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    let c = CODATA_2018;
    let report = hierarchy_report(cfg.f("size_angstrom") * 1e-8, &c)?;
    let alpha = fine_structure(&c);
    let summary = json!({
        "report": report,
        "fine_structure": alpha,
        "inverse_fine_structure": 1.0 / alpha,
        "ed_over_q_in_alpha": report.ed_over_q / alpha,
        "r_over_ed_in_alpha2": report.r_over_ed / (alpha * alpha),
    });
    Ok(ScenarioResult {
        data: DataTable {
            header: header(cfg),
            columns: vec![
                "size_cm",
                "tau_q_s",
                "tau_ed_s",
                "tau_r_s",
                "ed_over_q",
                "r_over_ed",
            ],
            rows: vec![vec![
                report.size,
                report.tau_q,
                report.tau_ed,
                report.tau_r,
                report.ed_over_q,
                report.r_over_ed,
            ]],
        },
        extras: vec![("report.json".into(), json!(report))],
        summary,
    })
}

fn header(cfg: &ScenarioConfig) -> Json {
    json!({
        "scenario": cfg.kind.name(),
        "params": cfg.params,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Computes a scenario without writing anything.
pub fn compute(cfg: &ScenarioConfig) -> Result<ScenarioResult, Error> {
    match cfg.kind {
        ScenarioKind::Packet => run_packet(cfg),
        ScenarioKind::Breathing => run_breathing(cfg),
        ScenarioKind::Rabi => run_rabi(cfg),
        ScenarioKind::Scan => run_scan(cfg),
        ScenarioKind::Compton => run_compton(cfg),
        ScenarioKind::Photo => run_photo(cfg),
        ScenarioKind::Timescales => run_timescales(cfg),
    }
}

/// Output directory for a config read from `config_path`.
pub fn output_dir(cfg: &ScenarioConfig, config_path: &Path) -> PathBuf {
    let base = config_path.parent().unwrap_or(Path::new("."));
    match &cfg.output_path {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => base.join(p),
        None => {
            let stem = config_path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario");
            base.join(format!("{stem}-out"))
        }
    }
}

fn write_data(path: &Path, data: &DataTable, format: Format) -> Result<(), RunError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_table(
            &mut buf,
            &data.header,
            &data.columns,
            data.rows.iter().cloned(),
        )?,
        Format::Json => {
            serde_json::to_writer(&mut buf, data).map_err(|e| RunError::Numeric(e.into()))?;
            buf.push(b'\n');
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

fn remove_stale(path: &Path) -> std::io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

fn write_json(path: &Path, value: &Json) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs `cfg` and writes the data file, gnuplot script, extra documents
/// and `manifest.json` into `dir`. On a numeric failure `error.json` is
/// written instead and the error returned.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    dir: &Path,
    config_file: Option<&Path>,
) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let result = match compute(cfg) {
        Ok(r) => {
            remove_stale(&dir.join("error.json"))?;
            r
        }
        Err(e) => {
            remove_stale(&dir.join("manifest.json"))?;
            let err = RunError::Numeric(e);
            write_json(&dir.join("error.json"), &err.to_json(Some(cfg.kind)))?;
            return Err(err);
        }
    };
    let name = cfg.kind.name();
    let data_name = format!("{name}.{}", cfg.format.extension());
    let data_file = dir.join(&data_name);
    write_data(&data_file, &result.data, cfg.format)?;
    let mut outputs = vec![data_name.clone()];
    if cfg.format == Format::Csv {
        let script = format!("{name}.gp");
        fs::write(dir.join(&script), gnuplot_script(cfg.kind, &data_name))?;
        outputs.push(script);
    }
    for (file, doc) in &result.extras {
        write_json(&dir.join(file), doc)?;
        outputs.push(file.clone());
    }
    let manifest = json!({
        "status": "ok",
        "tool": "resonance-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": resonance_lab::VERSION,
        "config_file": config_file.map(|p| p.display().to_string()),
        "config": cfg,
        "outputs": outputs,
        "rows": result.data.rows.len(),
        "summary": result.summary,
        "threads": rayon::current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        data_file,
        manifest,
    })
}
