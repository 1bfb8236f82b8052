use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use spin_transfer::{IterationMode, QutritPairState, SearchBudget};

/// Invalid user input. Mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn bad<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Fig2,
    Fig3,
    Fig4,
    Iterate,
    Maximize,
    Verify,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Fig2 => "fig2",
            CommandKind::Fig3 => "fig3",
            CommandKind::Fig4 => "fig4",
            CommandKind::Iterate => "iterate",
            CommandKind::Maximize => "maximize",
            CommandKind::Verify => "verify",
        }
    }

    fn default_format(self) -> Format {
        match self {
            CommandKind::Maximize | CommandKind::Verify => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> ConfigResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bad(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Parses an angle in radians. Accepts plain numbers and multiples of pi
/// such as `pi`, `pi/4`, `3pi/32`, `2*pi/3`, `-pi/8` or `π/4`.
pub fn parse_angle(raw: &str) -> ConfigResult<f64> {
    let s: String = raw
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase()
        .replace('π', "pi");
    if s.is_empty() {
        return bad("empty angle");
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d
                .parse()
                .map_err(|_| ConfigError(format!("bad angle denominator in '{raw}'")))?;
            if d == 0.0 || !d.is_finite() {
                return bad(format!("bad angle denominator in '{raw}'"));
            }
            (n.to_string(), d)
        }
        None => (s.clone(), 1.0),
    };
    let value = match num.split_once("pi") {
        Some((coef, rest)) => {
            if !rest.is_empty() {
                return bad(format!("cannot parse angle '{raw}'"));
            }
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("cannot parse angle '{raw}'")))?,
            };
            c * PI
        }
        None => num
            .parse::<f64>()
            .map_err(|_| ConfigError(format!("cannot parse angle '{raw}'")))?,
    };
    let v = value / den;
    if !v.is_finite() {
        return bad(format!("angle '{raw}' is not finite"));
    }
    Ok(v)
}

/// Source pair selector from `--sp`.
pub fn parse_sp(raw: &str) -> ConfigResult<QutritPairState> {
    match raw.trim().to_ascii_uppercase().as_str() {
        "A" => return Ok(QutritPairState::maximally_entangled()),
        "B" => return Ok(QutritPairState::two_term()),
        "C" => return Ok(QutritPairState::product()),
        _ => {}
    }
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return bad(format!("--sp expects A, B, C or k0,k1,k2; got '{raw}'"));
    }
    let mut k = [0.0; 3];
    for (slot, p) in k.iter_mut().zip(&parts) {
        *slot = p
            .parse::<f64>()
            .map_err(|_| ConfigError(format!("bad amplitude '{p}' in --sp")))?;
        if !slot.is_finite() {
            return bad(format!("bad amplitude '{p}' in --sp"));
        }
    }
    let norm: f64 = k.iter().map(|x| x * x).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return bad(format!(
            "--sp amplitudes have squared norm {norm}, expected 1"
        ));
    }
    if (norm - 1.0).abs() > 1e-12 {
        log::warn!("renormalizing --sp amplitudes (squared norm {norm})");
    }
    QutritPairState::normalized(k[0], k[1], k[2]).map_err(|e| ConfigError(e.to_string()))
}

/// `GRID[:REFINEMENTS]`, for example `60:3`.
pub fn parse_budget(raw: &str) -> ConfigResult<SearchBudget> {
    let mut budget = SearchBudget::default();
    let (grid, refinements) = match raw.trim().split_once(':') {
        Some((g, r)) => (g, Some(r)),
        None => (raw.trim(), None),
    };
    budget.grid_points = grid
        .parse()
        .map_err(|_| ConfigError(format!("bad --budget '{raw}' (expected GRID:REFINEMENTS)")))?;
    if let Some(r) = refinements {
        budget.refinements = r.parse().map_err(|_| {
            ConfigError(format!("bad --budget '{raw}' (expected GRID:REFINEMENTS)"))
        })?;
    }
    budget.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(budget)
}

/// A JSON value that may be written as a number or as an expression string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    fn angle(&self) -> ConfigResult<f64> {
        match self {
            NumOrText::Num(x) => Ok(*x),
            NumOrText::Text(s) => parse_angle(s),
        }
    }

    fn text(&self) -> String {
        match self {
            NumOrText::Num(x) => x.to_string(),
            NumOrText::Text(s) => s.clone(),
        }
    }
}

/// Every setting as it may appear in a `--config` file or on the command
/// line. Unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub command: Option<String>,
    pub theta1: Option<NumOrText>,
    pub theta2: Option<NumOrText>,
    pub sp: Option<NumOrText>,
    pub t_start: Option<NumOrText>,
    pub t_stop: Option<NumOrText>,
    pub t_points: Option<usize>,
    pub e0: Option<f64>,
    pub steps: Option<usize>,
    pub mode: Option<String>,
    pub budget: Option<NumOrText>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub samples: Option<usize>,
    pub theta_points: Option<usize>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> ConfigResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn overlay(self, top: Overrides) -> Overrides {
        Overrides {
            command: top.command.or(self.command),
            theta1: top.theta1.or(self.theta1),
            theta2: top.theta2.or(self.theta2),
            sp: top.sp.or(self.sp),
            t_start: top.t_start.or(self.t_start),
            t_stop: top.t_stop.or(self.t_stop),
            t_points: top.t_points.or(self.t_points),
            e0: top.e0.or(self.e0),
            steps: top.steps.or(self.steps),
            mode: top.mode.or(self.mode),
            budget: top.budget.or(self.budget),
            seed: top.seed.or(self.seed),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
            samples: top.samples.or(self.samples),
            theta_points: top.theta_points.or(self.theta_points),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

/// Fully resolved settings for one command run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub theta1: f64,
    pub theta2: f64,
    pub sp: Option<QutritPairState>,
    pub t_start: f64,
    pub t_stop: Option<f64>,
    pub t_points: usize,
    pub e0: f64,
    pub steps: usize,
    pub mode: IterationMode,
    pub budget: SearchBudget,
    pub seed: u64,
    pub destination: Destination,
    pub format: Format,
    pub samples: usize,
    pub theta_points: usize,
    pub tolerance: f64,
}

pub const TOLERANCE_ENV: &str = "SPIN_TRANSFER_TOL";

pub fn tolerance_from_env(value: Option<String>) -> ConfigResult<f64> {
    match value {
        None => Ok(1e-10),
        Some(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => bad(format!(
                "{TOLERANCE_ENV} must be a positive number, got '{s}'"
            )),
        },
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, o: Overrides, tolerance: f64) -> ConfigResult<Self> {
        if let Some(c) = &o.command {
            if c != command.name() {
                return bad(format!(
                    "config file is for command '{c}' but '{}' was requested",
                    command.name()
                ));
            }
        }
        let theta1 = o
            .theta1
            .as_ref()
            .map(NumOrText::angle)
            .transpose()?
            .unwrap_or(0.0);
        let theta2 = o
            .theta2
            .as_ref()
            .map(NumOrText::angle)
            .transpose()?
            .unwrap_or(PI / 4.0);
        let sp = o.sp.as_ref().map(|v| parse_sp(&v.text())).transpose()?;
        let t_start = o
            .t_start
            .as_ref()
            .map(NumOrText::angle)
            .transpose()?
            .unwrap_or(0.0);
        let t_stop = o.t_stop.as_ref().map(NumOrText::angle).transpose()?;
        let t_points = o.t_points.unwrap_or(601);
        if t_points < 2 {
            return bad("--t-points must be at least 2");
        }
        if let Some(stop) = t_stop {
            if stop <= t_start || stop.is_nan() {
                return bad(format!(
                    "--t-stop ({stop}) must exceed --t-start ({t_start})"
                ));
            }
        }
        let e0 = o.e0.unwrap_or(0.2);
        if !(0.0..=1.0).contains(&e0) {
            return bad(format!("--e0 must lie in [0, 1], got {e0}"));
        }
        let steps = o.steps.unwrap_or(4);
        if steps == 0 {
            return bad("--steps must be at least 1");
        }
        let mode = match &o.mode {
            Some(m) => m
                .parse::<IterationMode>()
                .map_err(|e| ConfigError(e.to_string()))?,
            None => IterationMode::PureReset,
        };
        let budget = match &o.budget {
            Some(b) => parse_budget(&b.text())?,
            None => SearchBudget::default(),
        };
        let format = match &o.format {
            Some(f) => f.parse()?,
            None => command.default_format(),
        };
        let samples = o.samples.unwrap_or(2000);
        if samples < 100 {
            return bad(format!("--samples must be at least 100, got {samples}"));
        }
        let theta_points = o.theta_points.unwrap_or(33);
        if theta_points < 2 {
            return bad("--theta-points must be at least 2");
        }
        if command == CommandKind::Maximize && !(0.0..=PI / 4.0 + 1e-12).contains(&theta1) {
            return bad(format!(
                "--theta1 must lie in [0, pi/4] for maximize, got {theta1}"
            ));
        }
        let destination = match &o.out {
            Some(p) if p.as_os_str() == "-" => Destination::Stdout,
            Some(p) => Destination::File(p.clone()),
            None => Destination::File(PathBuf::from(format!(
                "{}.{}",
                command.name(),
                format.extension()
            ))),
        };
        Ok(RunConfig {
            command,
            theta1,
            theta2,
            sp,
            t_start,
            t_stop,
            t_points,
            e0,
            steps,
            mode,
            budget,
            seed: o.seed.unwrap_or(0),
            destination,
            format,
            samples,
            theta_points,
            tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        let cases = [
            ("pi/4", PI / 4.0),
            ("3pi/32", 3.0 * PI / 32.0),
            ("2*pi/3", 2.0 * PI / 3.0),
            ("-pi/8", -PI / 8.0),
            ("π", PI),
            ("0.5", 0.5),
            ("1/2", 0.5),
            (" PI / 2 ", PI / 2.0),
        ];
        for (s, v) in cases {
            assert!((parse_angle(s).unwrap() - v).abs() < 1e-15, "{s}");
        }
        for s in ["", "pi/0", "pie", "abc", "2pi3"] {
            assert!(parse_angle(s).is_err(), "{s}");
        }
    }

    #[test]
    fn source_states() {
        assert_eq!(
            parse_sp("a").unwrap(),
            QutritPairState::maximally_entangled()
        );
        assert_eq!(parse_sp("B").unwrap(), QutritPairState::two_term());
        let k = parse_sp("0.6, 0.8, 0").unwrap();
        assert!((k.k[1] - 0.8).abs() < 1e-15);
        assert!(parse_sp("0.577,0.577,0.577").is_err());
        assert!(parse_sp("0.5773503,0.5773503,0.5773503").is_ok());
        assert!(parse_sp("1,0").is_err());
        assert!(parse_sp("D").is_err());
    }

    #[test]
    fn budgets() {
        let b = parse_budget("30:2").unwrap();
        assert_eq!((b.grid_points, b.refinements), (30, 2));
        assert_eq!(parse_budget("40").unwrap().refinements, 3);
        assert!(parse_budget("1:3").is_err());
        assert!(parse_budget("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: Overrides =
            serde_json::from_str(r#"{"theta1": "pi/8", "steps": 7, "e0": 0.3}"#).unwrap();
        let flags = Overrides {
            steps: Some(2),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(CommandKind::Iterate, file.overlay(flags), 1e-10).unwrap();
        assert_eq!(cfg.steps, 2);
        assert_eq!(cfg.e0, 0.3);
        assert!((cfg.theta1 - PI / 8.0).abs() < 1e-15);
        assert_eq!(cfg.destination, Destination::File("iterate.csv".into()));
    }

    #[test]
    fn rejects_bad_values() {
        let run =
            |json: &str, cmd| RunConfig::resolve(cmd, serde_json::from_str(json).unwrap(), 1e-10);
        assert!(run(r#"{"e0": 1.5}"#, CommandKind::Iterate).is_err());
        assert!(run(r#"{"steps": 0}"#, CommandKind::Iterate).is_err());
        assert!(run(r#"{"t_points": 1}"#, CommandKind::Fig2).is_err());
        assert!(run(r#"{"t_start": 2, "t_stop": 1}"#, CommandKind::Fig2).is_err());
        assert!(run(r#"{"samples": 10}"#, CommandKind::Fig3).is_err());
        assert!(run(r#"{"theta1": 1.0}"#, CommandKind::Maximize).is_err());
        assert!(run(r#"{"mode": "sideways"}"#, CommandKind::Iterate).is_err());
        assert!(run(r#"{"command": "fig3"}"#, CommandKind::Fig2).is_err());
        assert!(serde_json::from_str::<Overrides>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn tolerance_env() {
        assert_eq!(tolerance_from_env(None).unwrap(), 1e-10);
        assert_eq!(tolerance_from_env(Some("1e-8".into())).unwrap(), 1e-8);
        assert!(tolerance_from_env(Some("-1".into())).is_err());
        assert!(tolerance_from_env(Some("x".into())).is_err());
    }
}
