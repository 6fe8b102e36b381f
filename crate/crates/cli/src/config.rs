//! Scenario configuration: a flat TOML table of scalars (and one list), with
//! command-line flags merged on top.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Spectrum,
    Identities,
    Evolve,
    GateFidelity,
    Tomography,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Spectrum, Scenario::Identities, Scenario::Evolve, Scenario::GateFidelity, Scenario::Tomography];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::Identities => "identities",
            Scenario::Evolve => "evolve",
            Scenario::GateFidelity => "gate-fidelity",
            Scenario::Tomography => "tomography",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    fn needs_gate_time(self) -> bool {
        matches!(self, Scenario::Evolve | Scenario::GateFidelity | Scenario::Tomography)
    }
}

/// Every field-level problem found, not just the first.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for p in &self.0 {
            write!(f, "\n  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved run configuration. Energies and rates are in units of the
/// hopping `j`; when `hz_reference` is set, `kappa` and `gamma` have already
/// been divided by it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub seedless: bool,

    pub n_cavities: usize,
    pub g: f64,
    pub j: f64,
    pub delta: f64,
    pub omega: f64,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub kappa: f64,
    pub gamma: f64,
    pub open: bool,
    pub hz_reference: Option<f64>,

    /// Curve sampling: `samples` points over `[0, t_max * T]`.
    pub samples: usize,
    pub t_max: f64,
    /// Report time in units of `1/j`; the gate time when absent.
    pub t: Option<f64>,

    pub m: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub steps: usize,

    pub m_max: usize,
    pub deltas: Vec<f64>,
    pub tolerance: f64,
}

impl ScenarioConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        Self {
            scenario,
            out: PathBuf::from("out"),
            seedless: false,
            n_cavities: 5,
            g: 1.0,
            j: 1.0,
            delta: 1.0,
            omega: 0.03,
            omega1: None,
            omega2: None,
            kappa: 0.0,
            gamma: 0.0,
            open: false,
            hz_reference: None,
            samples: 200,
            t_max: 1.2,
            t: None,
            m: 7,
            delta_min: -10.0,
            delta_max: 10.0,
            steps: 400,
            m_max: 101,
            deltas: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            tolerance: 1e-10,
        }
    }

    /// Drive amplitudes `(Omega_1, Omega_2)`: explicit values when given,
    /// otherwise the gate condition for `omega`.
    pub fn drives(&self) -> (f64, f64) {
        match (self.omega1, self.omega2) {
            (Some(a), Some(b)) => (a, b),
            _ => (cca_core::hilbert::gate_sign(self.n_cavities) * self.omega, self.omega),
        }
    }

    fn validate(&self, problems: &mut Vec<String>) {
        let mut bad = |cond: bool, msg: String| {
            if cond {
                problems.push(msg);
            }
        };
        bad(self.n_cavities < 1, "n_cavities: must be >= 1".into());
        bad(!(self.g > 0.0 && self.g.is_finite()), format!("g: must be > 0, got {}", self.g));
        bad(self.j != 1.0, format!("j: the hopping is the energy unit and must be 1, got {}", self.j));
        bad(!self.delta.is_finite(), "delta: must be finite".into());
        for (name, v) in [("kappa", self.kappa), ("gamma", self.gamma)] {
            bad(!(v >= 0.0 && v.is_finite()), format!("{name}: must be >= 0, got {v}"));
        }
        if let Some(h) = self.hz_reference {
            bad(!(h > 0.0 && h.is_finite()), format!("hz_reference: must be > 0, got {h}"));
        }
        bad(self.samples < 2, format!("samples: need at least 2, got {}", self.samples));
        bad(!(self.t_max > 0.0 && self.t_max.is_finite()), format!("t_max: must be > 0, got {}", self.t_max));
        if let Some(t) = self.t {
            bad(!(t > 0.0 && t.is_finite()), format!("t: must be > 0, got {t}"));
        }
        if self.scenario.needs_gate_time() {
            bad(self.delta == 0.0, "delta: must be nonzero for the gate scenarios".into());
            match (self.omega1, self.omega2) {
                (None, None) => {
                    bad(!(self.omega != 0.0 && self.omega.is_finite()), format!("omega: must be nonzero, got {}", self.omega));
                }
                (Some(a), Some(b)) => bad(
                    !(a.is_finite() && b.is_finite() && a != 0.0 && (a.abs() - b.abs()).abs() <= 1e-12),
                    format!("omega1, omega2: need |omega1| = |omega2| > 0, got {a} and {b}"),
                ),
                _ => bad(true, "omega1, omega2: give both or neither".into()),
            }
            let decays = self.kappa > 0.0 || self.gamma > 0.0;
            match self.scenario {
                Scenario::Evolve => {
                    bad(self.open || decays, "open, kappa, gamma: evolve is closed-system only".into());
                }
                _ => bad(decays && !self.open, "kappa, gamma: nonzero rates need open = true".into()),
            }
        }
        match self.scenario {
            Scenario::Spectrum => {
                bad(self.m < 2, format!("m: need at least 2 sites, got {}", self.m));
                bad(
                    !(self.delta_min.is_finite() && self.delta_max.is_finite() && self.delta_min < self.delta_max),
                    format!("delta_min, delta_max: need finite delta_min < delta_max, got {} and {}", self.delta_min, self.delta_max),
                );
                bad(self.steps < 1, "steps: must be >= 1".into());
            }
            Scenario::Identities => {
                bad(self.m_max < 3, format!("m_max: must be >= 3, got {}", self.m_max));
                bad(self.deltas.is_empty(), "deltas: need at least one value".into());
                bad(
                    self.deltas.iter().any(|d| !(d.is_finite() && *d != 0.0)),
                    "deltas: values must be finite and nonzero".into(),
                );
                bad(!(self.tolerance > 0.0), format!("tolerance: must be > 0, got {}", self.tolerance));
            }
            _ => {}
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

struct Reader<'a> {
    problems: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn wrong(&mut self, key: &str, want: &str, v: &Value) {
        self.problems.push(format!("{key}: expected {want}, got {}", type_name(v)));
    }

    fn float(&mut self, key: &str, v: &Value, slot: &mut f64) {
        match as_f64(v) {
            Some(x) => *slot = x,
            None => self.wrong(key, "a number", v),
        }
    }

    fn uint(&mut self, key: &str, v: &Value, slot: &mut usize) {
        match v {
            Value::Integer(i) if *i >= 0 => *slot = *i as usize,
            Value::Integer(i) => self.problems.push(format!("{key}: must be non-negative, got {i}")),
            _ => self.wrong(key, "an integer", v),
        }
    }

    fn boolean(&mut self, key: &str, v: &Value, slot: &mut bool) {
        match v {
            Value::Boolean(b) => *slot = *b,
            _ => self.wrong(key, "true or false", v),
        }
    }
}

const KEYS: [&str; 24] = [
    "scenario", "out", "seedless", "n_cavities", "g", "j", "delta", "omega", "omega1", "omega2", "kappa", "gamma",
    "open", "hz_reference", "samples", "t_max", "t", "m", "delta_min", "delta_max", "steps", "m_max", "deltas",
    "tolerance",
];

/// Builds a validated configuration from a parsed table.
pub fn from_table(table: &Table) -> Result<ScenarioConfig, ConfigError> {
    let mut problems = Vec::new();
    let valid_names = || Scenario::ALL.map(Scenario::name).join(", ");
    let scenario = match table.get("scenario") {
        None => {
            problems.push(format!("scenario: missing; expected one of {}", valid_names()));
            None
        }
        Some(Value::String(s)) => {
            let found = Scenario::from_name(s);
            if found.is_none() {
                problems.push(format!("scenario: unknown name `{s}`; expected one of {}", valid_names()));
            }
            found
        }
        Some(v) => {
            problems.push(format!("scenario: expected a string, got {}", type_name(v)));
            None
        }
    };
    let mut c = ScenarioConfig::defaults(scenario.unwrap_or(Scenario::GateFidelity));

    let mut r = Reader { problems: &mut problems };
    for (key, v) in table {
        let k = key.as_str();
        match k {
            "scenario" => {}
            "out" => match v {
                Value::String(s) => c.out = PathBuf::from(s),
                _ => r.wrong(k, "a path string", v),
            },
            "seedless" => r.boolean(k, v, &mut c.seedless),
            "open" => r.boolean(k, v, &mut c.open),
            "n_cavities" => r.uint(k, v, &mut c.n_cavities),
            "samples" => r.uint(k, v, &mut c.samples),
            "m" => r.uint(k, v, &mut c.m),
            "steps" => r.uint(k, v, &mut c.steps),
            "m_max" => r.uint(k, v, &mut c.m_max),
            "g" => r.float(k, v, &mut c.g),
            "j" => r.float(k, v, &mut c.j),
            "delta" => r.float(k, v, &mut c.delta),
            "omega" => r.float(k, v, &mut c.omega),
            "kappa" => r.float(k, v, &mut c.kappa),
            "gamma" => r.float(k, v, &mut c.gamma),
            "t_max" => r.float(k, v, &mut c.t_max),
            "delta_min" => r.float(k, v, &mut c.delta_min),
            "delta_max" => r.float(k, v, &mut c.delta_max),
            "tolerance" => r.float(k, v, &mut c.tolerance),
            "omega1" | "omega2" | "hz_reference" | "t" => {
                let mut x = f64::NAN;
                r.float(k, v, &mut x);
                let slot = match k {
                    "omega1" => &mut c.omega1,
                    "omega2" => &mut c.omega2,
                    "hz_reference" => &mut c.hz_reference,
                    _ => &mut c.t,
                };
                *slot = Some(x);
            }
            "deltas" => match v {
                Value::Array(items) => {
                    let parsed: Vec<Option<f64>> = items.iter().map(as_f64).collect();
                    if parsed.iter().all(Option::is_some) {
                        c.deltas = parsed.into_iter().flatten().collect();
                    } else {
                        r.problems.push("deltas: every entry must be a number".into());
                    }
                }
                _ => r.wrong(k, "an array of numbers", v),
            },
            _ => r.problems.push(format!("{k}: unknown key; valid keys are {}", KEYS.join(", "))),
        }
    }

    c.validate(&mut problems);
    if !problems.is_empty() {
        return Err(ConfigError(problems));
    }
    if let Some(h) = c.hz_reference {
        c.kappa /= h;
        c.gamma /= h;
    }
    Ok(c)
}

pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| ConfigError(vec![format!("syntax: {}", e.message())]))
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    from_table(&parse_table(text)?)
}

/// Overlays `overrides` on `base`, key by key.
pub fn merge(mut base: Table, overrides: Table) -> Table {
    base.extend(overrides);
    base
}
