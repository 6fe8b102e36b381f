use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::path::Path;
use std::time::Instant;

use cca_core::dynamics::{state_fidelity, StateVector, UnitaryPropagator};
use cca_core::effective::{gate_time, ideal_sqrt_swap};
use cca_core::gate::{average_fidelity, chi_overlap, chi_tomography, reconstruct_channels, GateChannel};
use cca_core::hilbert::{build_hamiltonian, enumerate_sector, BasisState, Level, ModelParams};
use cca_core::lattice::{closed_form_sums, coupling_sums, direct_diagonalize, dispersion_scan, ChainSpec};
use nalgebra::DVector;
use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, Scenario, ScenarioConfig};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
    Io(io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<cca_core::Error> for RunError {
    fn from(e: cca_core::Error) -> Self {
        use cca_core::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidChain(_) | E::ZeroDetuning | E::ConditionViolated { .. } => {
                RunError::Config(ConfigError(vec![e.to_string()]))
            }
            other => RunError::Numerical(other.to_string()),
        }
    }
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub results: Map<String, Value>,
}

struct Output {
    files: Vec<(String, String)>,
    results: Map<String, Value>,
    failure: Option<String>,
}

impl Output {
    fn new() -> Self {
        Self { files: Vec::new(), results: Map::new(), failure: None }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn result(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.to_string(), v.into());
    }
}

#[derive(Serialize)]
struct ParamsReport {
    n_cavities: usize,
    g: f64,
    j: f64,
    delta: f64,
    omega1: f64,
    omega2: f64,
    kappa: f64,
    gamma: f64,
    open: bool,
}

fn model_params(c: &ScenarioConfig) -> Result<ModelParams, RunError> {
    let (o1, o2) = c.drives();
    Ok(ModelParams::new(c.n_cavities, c.g, c.j, c.delta, o1, o2, c.kappa, c.gamma)?)
}

fn params_report(c: &ScenarioConfig, p: &ModelParams) -> ParamsReport {
    ParamsReport {
        n_cavities: p.n_cavities,
        g: p.g,
        j: p.j,
        delta: p.delta,
        omega1: p.omega1,
        omega2: p.omega2,
        kappa: p.kappa,
        gamma: p.gamma,
        open: c.open,
    }
}

fn time_grid(c: &ScenarioConfig, t_gate: f64) -> Vec<f64> {
    let n = c.samples - 1;
    (0..=n).map(|k| c.t_max * t_gate * k as f64 / n as f64).collect()
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

fn spectrum(c: &ScenarioConfig, out: &mut Output) -> Result<(), RunError> {
    let deltas: Vec<f64> = (0..=c.steps)
        .map(|k| c.delta_min + (c.delta_max - c.delta_min) * k as f64 / c.steps as f64)
        .collect();
    let table = dispersion_scan(c.m, c.j, &deltas)?;
    out.result("rows", table.rows.len());
    out.file("spectrum.csv", table.to_csv());
    Ok(())
}

fn identities(c: &ScenarioConfig, out: &mut Output) -> Result<(), RunError> {
    let mut magnitudes: Vec<f64> = c.deltas.iter().map(|d| d.abs()).collect();
    magnitudes.sort_by(f64::total_cmp);
    magnitudes.dedup();
    let mut csv = String::from("m,delta,cross,cross_expected,local,local_expected,residual,pass\n");
    let (mut checked, mut failed, mut skipped) = (0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for m in 3..=c.m_max {
        for &d in &magnitudes {
            for delta in [d, -d] {
                let chain = ChainSpec::symmetric(m, c.j, delta)?;
                let expected = match closed_form_sums(&chain) {
                    Ok(s) => s,
                    Err(cca_core::Error::EvenChainResonance(_)) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let got = coupling_sums(&direct_diagonalize(&chain))?;
                let residual = (got.cross - expected.cross)
                    .abs()
                    .max((got.local_first - expected.local_first).abs())
                    .max((got.local_last - expected.local_last).abs());
                let pass = residual < c.tolerance;
                checked += 1;
                failed += usize::from(!pass);
                worst = worst.max(residual);
                let _ = writeln!(
                    csv,
                    "{m},{delta:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{residual:.3e},{pass}",
                    got.cross, expected.cross, got.local_first, expected.local_first
                );
            }
        }
    }
    out.file("identities.csv", csv);
    out.result("checked", checked);
    out.result("failed", failed);
    out.result("skipped_resonant", skipped);
    out.result("max_residual", worst);
    if failed > 0 {
        out.failure = Some(format!("{failed} of {checked} identity checks exceed tolerance {:e}", c.tolerance));
    }
    Ok(())
}

fn evolve(c: &ScenarioConfig, out: &mut Output) -> Result<(), RunError> {
    let p = model_params(c)?;
    let t_gate = gate_time(&p)?;
    let n = p.n_cavities;
    let basis = enumerate_sector(n, 1)?;
    let prop = UnitaryPropagator::new(&build_hamiltonian(&p, &basis)?);
    let position = |a, b| basis.position(&BasisState::vacuum(a, b, n)).expect("computational state in sector 1");
    let (i01, i10) = (position(Level::Zero, Level::One), position(Level::One, Level::Zero));
    let psi0 = StateVector::basis(vec![1], basis.dim(), i01);
    let mut target = DVector::zeros(basis.dim());
    target[i01] = C::new(0.5, 0.5);
    target[i10] = C::new(0.5, -0.5);
    let target = StateVector::new(vec![1], target);

    let fidelity = |t: f64| -> Result<f64, RunError> { Ok(state_fidelity(&prop.propagate(&psi0, t)?, &target)?) };
    let mut csv = String::from("t_over_T,t,fidelity\n");
    for t in time_grid(c, t_gate) {
        let _ = writeln!(csv, "{:.16e},{t:.16e},{:.16e}", t / t_gate, fidelity(t)?);
    }
    out.file("evolve.csv", csv);
    let t_report = c.t.unwrap_or(t_gate);
    out.result("gate_time", t_gate);
    out.result("t", t_report);
    out.result("fidelity", fidelity(t_report)?);
    Ok(())
}

/// Channels on the curve grid plus one at the report time, from a single
/// sorted pass.
fn channels(p: &ModelParams, open: bool, grid: &[f64], t_report: f64) -> Result<(Vec<GateChannel>, GateChannel), RunError> {
    let mut times: Vec<f64> = grid.to_vec();
    times.push(t_report);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    let mut slots: Vec<Option<GateChannel>> = vec![None; times.len()];
    for (ch, &i) in reconstruct_channels(p, &sorted, open)?.into_iter().zip(&order) {
        slots[i] = Some(ch);
    }
    let report = slots.pop().flatten().expect("report channel");
    Ok((slots.into_iter().map(|s| s.expect("grid channel")).collect(), report))
}

fn report_json(c: &ScenarioConfig, p: &ModelParams, t: f64, ch: &GateChannel, out: &mut Output) -> Result<(), RunError> {
    let ideal = ideal_sqrt_swap();
    let f = average_fidelity(ch, &ideal);
    let overlap = chi_overlap(&chi_tomography(&GateChannel::from_unitary(&ideal)), &chi_tomography(ch))?;
    let leakage = ch.leakage();
    out.file(
        "report.json",
        to_json(&json!({
            "params": params_report(c, p),
            "t": t,
            "avg_fidelity": f,
            "chi_overlap": overlap,
            "leakage": leakage,
        })),
    );
    out.result("t", t);
    out.result("avg_fidelity", f);
    out.result("chi_overlap", overlap);
    out.result("leakage", leakage);
    Ok(())
}

fn gate_fidelity(c: &ScenarioConfig, out: &mut Output) -> Result<(), RunError> {
    let p = model_params(c)?;
    let t_gate = gate_time(&p)?;
    let grid = time_grid(c, t_gate);
    let t_report = c.t.unwrap_or(t_gate);
    let (curve, at_report) = channels(&p, c.open, &grid, t_report)?;
    let ideal = ideal_sqrt_swap();
    let mut csv = String::from("t_over_T,t,avg_fidelity,leakage\n");
    for (t, ch) in grid.iter().zip(&curve) {
        let _ = writeln!(csv, "{:.16e},{t:.16e},{:.16e},{:.16e}", t / t_gate, average_fidelity(ch, &ideal), ch.leakage());
    }
    out.file("gate_fidelity.csv", csv);
    out.result("gate_time", t_gate);
    report_json(c, &p, t_report, &at_report, out)
}

fn tomography(c: &ScenarioConfig, out: &mut Output) -> Result<(), RunError> {
    let p = model_params(c)?;
    let t_gate = gate_time(&p)?;
    let t_report = c.t.unwrap_or(t_gate);
    let ch = reconstruct_channels(&p, &[t_report], c.open)?.remove(0);
    let chi = chi_tomography(&ch);
    out.file("chi_real.csv", chi.to_csv(false));
    out.file("chi_imag.csv", chi.to_csv(true));
    out.result("gate_time", t_gate);
    report_json(c, &p, t_report, &ch, out)
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

/// Runs one scenario and writes its files plus `run.json` into `config.out`.
/// Files are written even when the scenario reports a tolerance failure, so
/// the residuals can be inspected.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let mut out = Output::new();
    match config.scenario {
        Scenario::Spectrum => spectrum(config, &mut out)?,
        Scenario::Identities => identities(config, &mut out)?,
        Scenario::Evolve => evolve(config, &mut out)?,
        Scenario::GateFidelity => gate_fidelity(config, &mut out)?,
        Scenario::Tomography => tomography(config, &mut out)?,
    }
    let compute = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&config.out)?;
    for (name, contents) in &out.files {
        write_atomic(&config.out, name, contents)?;
    }
    let mut outputs: Vec<String> = out.files.iter().map(|(n, _)| n.clone()).collect();
    let weak_drive = match config.scenario {
        Scenario::Evolve | Scenario::GateFidelity | Scenario::Tomography => Some(model_params(config)?.weak_drive()),
        _ => None,
    };
    let manifest = json!({
        "scenario": config.scenario,
        "config": config,
        "weak_drive": weak_drive,
        "results": out.results,
        "outputs": outputs,
        "versions": { "cca-cli": env!("CARGO_PKG_VERSION"), "cca-core": cca_core::VERSION },
        "timings": { "compute_seconds": compute, "total_seconds": start.elapsed().as_secs_f64() },
    });
    write_atomic(&config.out, "run.json", &to_json(&manifest))?;
    outputs.push("run.json".into());

    if let Some(msg) = out.failure {
        return Err(RunError::Numerical(msg));
    }
    Ok(RunSummary { outputs, results: out.results })
}
