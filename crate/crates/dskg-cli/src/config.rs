//! Flat `key = value` experiment configs with `[section]` headers.
//! Numbers are decimal, lists comma-separated, exponents exact rationals
//! (`4`, `4/3`, `0.5`, `inf`).

use dskg_core::harness::{Exponent, ExponentTriple};
use dskg_core::geometry::{AlphaChoice, ModelParams};
use dskg_core::propagators::KernelOp;
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Raw parsed file: section -> key -> (line, value).
#[derive(Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (usize, String)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = RawConfig::default();
        let mut section = String::from("");
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(err(Some(lineno), "section", "unterminated section header"));
                }
                section = line[1..line.len() - 1].trim().to_string();
                out.sections.entry(section.clone()).or_default();
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(err(Some(lineno), "line", "expected `key = value`"));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(err(Some(lineno), "line", "empty key"));
            }
            out.sections
                .entry(section.clone())
                .or_default()
                .insert(key, (lineno, value));
        }
        Ok(out)
    }

    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.sections.get(section).and_then(|m| m.get(key))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| err(Some(*line), key, format!("`{v}` is not a number"))),
        }
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| err(Some(*line), key, format!("`{v}` is not a nonnegative integer"))),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| err(Some(*line), key, format!("`{v}` is not an integer"))),
        }
    }

    pub fn string(&self, section: &str, key: &str) -> Option<String> {
        self.get(section, key).map(|(_, v)| v.clone())
    }

    pub fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| err(Some(*line), key, format!("`{tok}` is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    pub fn exponent_list(&self, section: &str, key: &str) -> Result<Option<Vec<Exponent>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|tok| parse_exponent(tok.trim()).map_err(|m| err(Some(*line), key, m)))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    pub fn exponent(&self, section: &str, key: &str) -> Result<Option<Exponent>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((line, v)) => parse_exponent(v).map(Some).map_err(|m| err(Some(*line), key, m)),
        }
    }

    pub fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key).map(|(l, _)| *l)
    }
}

/// Parse an exponent as an exact rational: integer, `a/b`, decimal, or `inf`.
pub fn parse_exponent(tok: &str) -> Result<Exponent, String> {
    if tok.eq_ignore_ascii_case("inf") || tok.eq_ignore_ascii_case("infinity") {
        return Ok(Exponent::Infinity);
    }
    if let Some((a, b)) = tok.split_once('/') {
        let num: i64 = a.trim().parse().map_err(|_| format!("bad numerator in `{tok}`"))?;
        let den: i64 = b.trim().parse().map_err(|_| format!("bad denominator in `{tok}`"))?;
        if den == 0 {
            return Err(format!("zero denominator in `{tok}`"));
        }
        return Ok(Exponent::Finite(Ratio::new(num, den)));
    }
    if let Some((int_part, frac_part)) = tok.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') { -1 } else { 1 };
        let ip: i64 = if int_part.is_empty() || int_part == "-" {
            0
        } else {
            int_part.parse().map_err(|_| format!("`{tok}` is not a number"))?
        };
        let digits = frac_part.trim();
        if digits.is_empty() || digits.len() > 12 || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("`{tok}` is not a decimal"));
        }
        let fp: i64 = digits.parse().unwrap();
        let den = 10i64.pow(digits.len() as u32);
        return Ok(Exponent::Finite(
            Ratio::new(ip * den + sign * fp, den),
        ));
    }
    tok.parse::<i64>()
        .map(|v| Exponent::Finite(Ratio::from_integer(v)))
        .map_err(|_| format!("`{tok}` is not an exponent"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Energy,
    Dispersive,
    StrichartzHomog,
    StrichartzInhomog,
    Obstruction,
    Semilinear,
    OracleSuite,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, String> {
        Ok(match s {
            "energy" => Self::Energy,
            "dispersive" => Self::Dispersive,
            "strichartz-homog" => Self::StrichartzHomog,
            "strichartz-inhomog" => Self::StrichartzInhomog,
            "obstruction" => Self::Obstruction,
            "semilinear" => Self::Semilinear,
            "oracle-suite" => Self::OracleSuite,
            other => {
                return Err(format!(
                    "unknown experiment `{other}` (expected energy | dispersive | strichartz-homog | strichartz-inhomog | obstruction | semilinear | oracle-suite)"
                ))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Energy => "energy",
            Self::Dispersive => "dispersive",
            Self::StrichartzHomog => "strichartz-homog",
            Self::StrichartzInhomog => "strichartz-inhomog",
            Self::Obstruction => "obstruction",
            Self::Semilinear => "semilinear",
            Self::OracleSuite => "oracle-suite",
        }
    }
}

/// Fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: ModelParams,
    pub alpha: Option<AlphaChoice>,
    pub exponents: Vec<ExponentTriple>,
    pub t0_list: Vec<f64>,
    pub horizon: f64,
    pub horizons: Vec<f64>,
    pub ensemble: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub r: f64,
    pub window: (f64, f64),
    pub t_range: (f64, f64),
    pub which: KernelOp,
    pub eps_ladder: Vec<f64>,
    pub output_dir: String,
    pub sweep_p: Vec<Exponent>,
    pub sweep_q: Vec<Exponent>,
    pub sweep_eps: Exponent,
}

pub fn load(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;

    let kind_str = raw
        .string("experiment", "kind")
        .ok_or_else(|| err(raw.line_of("experiment", "kind"), "kind", "missing [experiment] kind"))?;
    let kind = ExperimentKind::parse(&kind_str)
        .map_err(|m| err(raw.line_of("experiment", "kind"), "kind", m))?;

    let n = raw.usize("model", "n")?.unwrap_or(3);
    let lambda = raw.f64("model", "lambda")?.unwrap_or(3.25);
    let a = raw.f64("model", "a")?.unwrap_or(0.0);
    let grid = raw.usize("model", "grid")?.unwrap_or(32);
    let t0 = raw.f64("model", "t0")?.unwrap_or(1.0);
    let period = raw.f64("model", "period")?.unwrap_or(std::f64::consts::TAU);
    let params = ModelParams::with_period(n, lambda, a, grid, t0, period).map_err(|e| {
        let field = match e {
            dskg_core::error::GeometryError::NonPositiveMass(_) => "lambda",
            dskg_core::error::GeometryError::BadDimension(_) => "n",
            dskg_core::error::GeometryError::BadGrid(_) => "grid",
            dskg_core::error::GeometryError::BadPerturbation(_) => "a",
            dskg_core::error::GeometryError::BadInitialSlice(_) => "t0",
            dskg_core::error::GeometryError::BadPeriod(_) => "period",
            _ => "model",
        };
        err(raw.line_of("model", field), field, e.to_string())
    })?;

    let seed = raw
        .u64("experiment", "seed")?
        .ok_or_else(|| err(None, "seed", "seed is mandatory"))?;

    let alpha = match raw.f64("experiment", "alpha")? {
        Some(v) => Some(AlphaChoice::new(v, lambda, n).map_err(|e| {
            err(raw.line_of("experiment", "alpha"), "alpha", e.to_string())
        })?),
        None => None,
    };

    let eps = raw
        .exponent("experiment", "eps")?
        .unwrap_or(Exponent::from_int(0));
    let eps_ratio = match eps {
        Exponent::Finite(r) => r,
        Exponent::Infinity => {
            return Err(err(raw.line_of("experiment", "eps"), "eps", "eps must be finite"))
        }
    };
    let mut exponents = Vec::new();
    if let (Some(p), Some(q)) = (
        raw.exponent("experiment", "p")?,
        raw.exponent("experiment", "q")?,
    ) {
        exponents.push(ExponentTriple::derive(p, q, eps_ratio, n));
    }

    let which = match raw.string("experiment", "which").as_deref() {
        None | Some("dtUv") => KernelOp::DtUv,
        Some("sqrtLapUv") => KernelOp::SqrtLapUv,
        Some("Uv") => KernelOp::Uv,
        Some(other) => {
            return Err(err(
                raw.line_of("experiment", "which"),
                "which",
                format!("unknown kernel operator `{other}` (dtUv | sqrtLapUv | Uv)"),
            ))
        }
    };

    let window_list = raw.f64_list("experiment", "window")?.unwrap_or(vec![0.05, 0.8]);
    if window_list.len() != 2 || window_list[0] <= 0.0 || window_list[1] <= window_list[0] {
        return Err(err(
            raw.line_of("experiment", "window"),
            "window",
            "window must be `lo, hi` with 0 < lo < hi",
        ));
    }
    let trange_list = raw.f64_list("experiment", "t_range")?.unwrap_or(vec![5.0, 15.0]);
    if trange_list.len() != 2 || trange_list[0] <= 0.0 || trange_list[1] <= trange_list[0] {
        return Err(err(
            raw.line_of("experiment", "t_range"),
            "t_range",
            "t_range must be `lo, hi` with 0 < lo < hi",
        ));
    }

    let horizons = raw
        .f64_list("experiment", "T_list")?
        .unwrap_or(vec![1.0, 2.0, 4.0]);

    Ok(ExperimentConfig {
        kind,
        params,
        alpha,
        exponents,
        t0_list: raw.f64_list("experiment", "t0_list")?.unwrap_or(vec![t0]),
        horizon: raw.f64("experiment", "T")?.unwrap_or(4.0),
        horizons,
        ensemble: raw.usize("experiment", "ensemble")?.unwrap_or(10),
        seed,
        tolerance: raw.f64("experiment", "tolerance")?.unwrap_or(0.15),
        r: raw.f64("experiment", "r")?.unwrap_or((n as f64 + 1.0) / 2.0 + 0.1),
        window: (window_list[0], window_list[1]),
        t_range: (trange_list[0], trange_list[1]),
        which,
        eps_ladder: raw
            .f64_list("experiment", "eps_ladder")?
            .unwrap_or(vec![1e-3, 1e-2, 1e-1, 1.0]),
        output_dir: raw
            .string("experiment", "output_dir")
            .unwrap_or_else(|| "out".to_string()),
        sweep_p: raw
            .exponent_list("sweep", "p_list")?
            .unwrap_or_else(|| vec![Exponent::from_int(2), Exponent::from_int(4), Exponent::from_int(8), Exponent::Infinity]),
        sweep_q: raw
            .exponent_list("sweep", "q_list")?
            .unwrap_or_else(|| vec![Exponent::from_int(2), Exponent::from_int(4), Exponent::from_int(8)]),
        sweep_eps: raw
            .exponent("sweep", "eps")?
            .unwrap_or(Exponent::from_int(0)),
    })
}
