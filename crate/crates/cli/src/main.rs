use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardylab_cli::config::{build_config, parse_raw, Command, RawConfig};
use hardylab_cli::{estimate, run, Outcome, RunError};

#[derive(Parser)]
#[command(name = "hardylab", version, about = "Experiments on integer parts of smooth functions")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run an experiment config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    Classify(Flags),
    Sequence(Flags),
    SumsetGaps(Flags),
    BasisOrder(Flags),
    Residues(Flags),
    Density(Flags),
    CircleCheck(Flags),
    ExpsumScan(Flags),
    VdcScan(Flags),
    HkSolve(Flags),
    Represent(Flags),
    RepresentScan(Flags),
}

#[derive(Args)]
struct Common {
    /// Print a cost estimate and exit without computing.
    #[arg(long)]
    dry_run: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    parallelism: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_parser = ["double", "extended"])]
    precision: Option<String>,
}

/// Flags for a single command; each named flag maps to the config key of the same name.
#[derive(Args)]
struct Flags {
    #[arg(long)]
    function: Option<String>,
    /// Declared profile, e.g. "class=I;d_f=2;c_f=1".
    #[arg(long)]
    profile: Option<String>,
    /// Any command key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    s: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    xmax: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    panel_budget: Option<String>,
    #[arg(long)]
    lo: Option<String>,
    #[arg(long)]
    hi: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    bins: Option<String>,
    #[arg(long)]
    count: Option<String>,
    #[arg(long)]
    n_start: Option<String>,
    #[arg(long)]
    s_max: Option<String>,
}

impl Flags {
    fn named(&self) -> Vec<(&'static str, &'static str, &Option<String>)> {
        vec![
            ("s", "s", &self.s),
            ("N", "N", &self.n),
            ("k", "k", &self.k),
            ("targets", "targets", &self.targets),
            ("xmax", "xmax", &self.xmax),
            ("delta", "delta", &self.delta),
            ("grid", "grid", &self.grid),
            ("samples", "samples", &self.samples),
            ("sigma", "sigma", &self.sigma),
            ("panel_budget", "panel-budget", &self.panel_budget),
            ("lo", "lo", &self.lo),
            ("hi", "hi", &self.hi),
            ("q", "q", &self.q),
            ("n_max", "n-max", &self.n_max),
            ("bins", "bins", &self.bins),
            ("count", "count", &self.count),
            ("n_start", "n-start", &self.n_start),
            ("s_max", "s-max", &self.s_max),
        ]
    }
}

fn apply_common(raw: &mut RawConfig, c: &Common) {
    if let Some(p) = &c.parallelism {
        raw.set_top("parallelism", p, "parallelism");
    }
    if let Some(o) = &c.out {
        raw.set_top("output", o, "out");
    }
    if let Some(p) = &c.precision {
        raw.set_top("precision", p, "precision");
    }
}

fn from_flags(command: Command, f: &Flags) -> Result<RawConfig, RunError> {
    let mut raw = RawConfig { source: "command line".into(), ..RawConfig::default() };
    raw.set_top("command", command.name(), command.name());
    if let Some(text) = &f.function {
        raw.set_top("function", text, "function");
    }
    if let Some(p) = &f.profile {
        for item in p.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = split_pair(item, "profile")?;
            raw.set_profile(k, v, "profile");
        }
    }
    for (key, flag, value) in f.named() {
        if let Some(v) = value {
            raw.set_param(command, key, v, flag);
        }
    }
    for item in &f.set {
        let (k, v) = split_pair(item, "set")?;
        raw.set_param(command, k, v, "set");
    }
    apply_common(&mut raw, &f.common);
    Ok(raw)
}

fn split_pair<'a>(item: &'a str, flag: &str) -> Result<(&'a str, &'a str), RunError> {
    item.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| {
        RunError::Config(hardylab_cli::ConfigError {
            source: "command line".into(),
            origin: hardylab_cli::config::Origin::Flag(flag.into()),
            message: format!("expected key=value, found `{item}`"),
            expected: Some("key \"=\" value".into()),
            suggestion: None,
        })
    })
}

fn execute(cli: Cli) -> Result<Outcome, RunError> {
    let (raw, common) = match &cli.action {
        Action::Run { config, common } => {
            let source = config.display().to_string();
            let text = std::fs::read_to_string(config).map_err(|e| {
                RunError::Config(hardylab_cli::ConfigError {
                    source: source.clone(),
                    origin: hardylab_cli::config::Origin::Line(0),
                    message: format!("cannot read config: {e}"),
                    expected: None,
                    suggestion: None,
                })
            })?;
            let mut raw = parse_raw(&text, &source)?;
            apply_common(&mut raw, common);
            (raw, common)
        }
        Action::Classify(f) => (from_flags(Command::Classify, f)?, &f.common),
        Action::Sequence(f) => (from_flags(Command::Sequence, f)?, &f.common),
        Action::SumsetGaps(f) => (from_flags(Command::SumsetGaps, f)?, &f.common),
        Action::BasisOrder(f) => (from_flags(Command::BasisOrder, f)?, &f.common),
        Action::Residues(f) => (from_flags(Command::Residues, f)?, &f.common),
        Action::Density(f) => (from_flags(Command::Density, f)?, &f.common),
        Action::CircleCheck(f) => (from_flags(Command::CircleCheck, f)?, &f.common),
        Action::ExpsumScan(f) => (from_flags(Command::ExpsumScan, f)?, &f.common),
        Action::VdcScan(f) => (from_flags(Command::VdcScan, f)?, &f.common),
        Action::HkSolve(f) => (from_flags(Command::HkSolve, f)?, &f.common),
        Action::Represent(f) => (from_flags(Command::Represent, f)?, &f.common),
        Action::RepresentScan(f) => (from_flags(Command::RepresentScan, f)?, &f.common),
    };
    let cfg = build_config(raw)?;
    if common.dry_run {
        println!("{}", serde_json::to_string_pretty(&estimate(&cfg)?).expect("json"));
        return Ok(Outcome::Ok);
    }
    let report = run(&cfg)?;
    for c in &report.checks {
        let status = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let limit = c.limit.as_ref().map(|l| format!(" (limit {l})")).unwrap_or_default();
        println!("{status} {}: {}{limit}", c.name, c.measured);
    }
    println!("wrote {} files to {}", report.manifest.len(), cfg.output.display());
    Ok(report.outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::BudgetExceeded) => {
            eprintln!("{}", serde_json::json!({ "status": "budget_exceeded", "kind": "budget", "exit_code": 4 }));
            ExitCode::from(4)
        }
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}", e.structured());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
