use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::config::{from_table, merge, parse_table, ConfigError, Scenario};
use crate::run::{run_scenario, RunError};

#[derive(Debug, Parser)]
#[command(name = "cca", version, about = "Coupled-cavity-array sqrt(swap) gate simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chain spectrum against the impurity detuning.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        delta_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Coupling-sum identities against their closed forms.
    Identities {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m_max: Option<usize>,
        /// Comma-separated detunings; each is checked with both signs.
        #[arg(long = "delta", value_delimiter = ',', allow_hyphen_values = true)]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// State fidelity of |01> against the ideal sqrt(swap) image over time.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
    },
    /// Average gate fidelity and leakage over time, with a report at T.
    GateFidelity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
    },
    /// Process matrix of the gate at T.
    Tomography {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file of flat `key = value` settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reserved: the runs use no random numbers.
    #[arg(long)]
    pub seedless: bool,
}

#[derive(Debug, Args)]
pub struct Model {
    #[arg(long = "n")]
    pub n_cavities: Option<usize>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub open: bool,
    /// Divide kappa and gamma by this reference coupling (e.g. g in Hz).
    #[arg(long)]
    pub hz_reference: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Curve end in units of the gate time.
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Report time in units of 1/J.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

fn put<T: Into<Value>>(t: &mut Table, key: &str, v: Option<T>) {
    if let Some(v) = v {
        t.insert(key.to_string(), v.into());
    }
}

fn put_uint(t: &mut Table, key: &str, v: Option<usize>) {
    put(t, key, v.map(|x| i64::try_from(x).unwrap_or(i64::MAX)));
}

impl Common {
    fn overrides(&self, t: &mut Table) {
        put(t, "out", self.out.as_ref().map(|p| p.to_string_lossy().into_owned()));
        if self.seedless {
            put(t, "seedless", Some(true));
        }
    }
}

impl Model {
    fn overrides(&self, t: &mut Table) {
        put_uint(t, "n_cavities", self.n_cavities);
        for (key, v) in [
            ("g", self.g),
            ("j", self.j),
            ("delta", self.delta),
            ("omega", self.omega),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("hz_reference", self.hz_reference),
            ("t_max", self.t_max),
            ("t", self.t),
        ] {
            put(t, key, v);
        }
        if self.open {
            put(t, "open", Some(true));
        }
        put_uint(t, "samples", self.samples);
    }
}

impl Command {
    fn scenario(&self) -> Scenario {
        match self {
            Command::Spectrum { .. } => Scenario::Spectrum,
            Command::Identities { .. } => Scenario::Identities,
            Command::Evolve { .. } => Scenario::Evolve,
            Command::GateFidelity { .. } => Scenario::GateFidelity,
            Command::Tomography { .. } => Scenario::Tomography,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common, .. }
            | Command::Identities { common, .. }
            | Command::Evolve { common, .. }
            | Command::GateFidelity { common, .. }
            | Command::Tomography { common, .. } => common,
        }
    }

    /// Flag values as config keys. The subcommand fixes the scenario.
    pub fn overrides(&self) -> Table {
        let mut t = Table::new();
        t.insert("scenario".into(), Value::String(self.scenario().name().into()));
        self.common().overrides(&mut t);
        match self {
            Command::Spectrum { m, delta_min, delta_max, steps, .. } => {
                put_uint(&mut t, "m", *m);
                put(&mut t, "delta_min", *delta_min);
                put(&mut t, "delta_max", *delta_max);
                put_uint(&mut t, "steps", *steps);
            }
            Command::Identities { m_max, deltas, tolerance, .. } => {
                put_uint(&mut t, "m_max", *m_max);
                put(&mut t, "deltas", deltas.clone());
                put(&mut t, "tolerance", *tolerance);
            }
            Command::Evolve { model, .. } | Command::GateFidelity { model, .. } | Command::Tomography { model, .. } => {
                model.overrides(&mut t)
            }
        }
        t
    }
}

fn resolve(cli: &Cli) -> Result<crate::ScenarioConfig, RunError> {
    let base = match &cli.command.common().config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(ConfigError(vec![format!("config: cannot read {}: {e}", path.display())]))
            })?;
            parse_table(&text).map_err(RunError::Config)?
        }
        None => Table::new(),
    };
    from_table(&merge(base, cli.command.overrides())).map_err(RunError::Config)
}

/// Runs the parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = resolve(cli).and_then(|config| {
        let summary = run_scenario(&config);
        if let Ok(s) = &summary {
            for name in &s.outputs {
                println!("{}", config.out.join(name).display());
            }
        }
        summary
    });
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("cca: {e}");
            e.exit_code()
        }
    }
}
