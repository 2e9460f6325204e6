//! Model configuration: JSON file contents merged with command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use qes_core::expr::Expr;
use qes_core::families::Family;
use qes_core::{method_a_build, method_b_build, GeneratorFunction, QesModel, Tolerances};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    PolyWplus,
    PolyPhi,
    PolyPhiCes,
    SinhWplus,
    /// W₊ (or φ, when epsilon is given) from --expr.
    Custom,
}

impl FamilyName {
    pub fn builtin(self) -> Option<Family> {
        match self {
            FamilyName::PolyWplus => Some(Family::PolyWplus),
            FamilyName::PolyPhi => Some(Family::PolyPhi),
            FamilyName::PolyPhiCes => Some(Family::PolyPhiCes),
            FamilyName::SinhWplus => Some(Family::SinhWplus),
            FamilyName::Custom => None,
        }
    }

    fn name(self) -> &'static str {
        match self.builtin() {
            Some(f) => f.name(),
            None => "custom",
        }
    }
}

/// Keys accepted by the custom family.
const CUSTOM_KEYS: [&str; 2] = ["epsilon", "scale"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverride {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<TableFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ModelConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| CliError::Config { path: path.into(), source })
    }

    /// Checks keys and fills family defaults. The result echoes into reports.
    pub fn validated(mut self) -> Result<Self, CliError> {
        let family = self.family.ok_or_else(|| CliError::Usage("no family given (use --family or \"family\")".into()))?;
        match family.builtin() {
            Some(f) => {
                if self.expr.is_some() {
                    return Err(CliError::Usage("--expr is only valid with --family custom".into()));
                }
                check_keys(&self.params, f.required_keys(), family)?;
                for (k, v) in f.defaults() {
                    self.params.entry(k).or_insert(v);
                }
            }
            None => {
                if self.expr.is_none() {
                    return Err(CliError::Usage("family custom requires --expr".into()));
                }
                check_keys(&self.params, &CUSTOM_KEYS, family)?;
                let s = *self.params.entry("scale".into()).or_insert(1.0);
                if !(s > 0.0 && s.is_finite()) {
                    return Err(CliError::Usage(format!("scale must be > 0 (got {s})")));
                }
            }
        }
        for (k, v) in &self.params {
            if !v.is_finite() {
                return Err(CliError::Usage(format!("{k} must be finite (got {v})")));
            }
        }
        if let Some(g) = self.grid {
            if let Some(n) = g.points {
                if n < 3 || n % 2 == 0 {
                    return Err(CliError::Usage(format!("grid N must be odd and >= 3 (got {n})")));
                }
            }
            if let Some(l) = g.half_width {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(CliError::Usage(format!("grid L must be > 0 (got {l})")));
                }
            }
        }
        let t = *self.tolerances.get_or_insert_with(Tolerances::default);
        let named = [
            ("energy", t.energy),
            ("cosine", t.cosine),
            ("orthogonality", t.orthogonality),
            ("riccati", t.riccati),
            ("schrodinger", t.schrodinger),
            ("target_decay", t.target_decay),
        ];
        for (k, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("tolerance {k} must be > 0 (got {v})")));
            }
        }
        Ok(self)
    }

    pub fn family(&self) -> FamilyName {
        self.family.expect("validated config has a family")
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn build_model(&self) -> Result<QesModel, CliError> {
        match self.family().builtin() {
            Some(f) => Ok(f.build(&self.params)?),
            None => {
                let gen = self.custom_generator()?;
                Ok(match self.params.get("epsilon") {
                    Some(&eps) => method_b_build(&gen, eps)?,
                    None => method_a_build(&gen)?,
                })
            }
        }
    }

    /// φ and ε for the cross-check.
    pub fn phi(&self) -> Result<(GeneratorFunction, f64), CliError> {
        match (self.family().builtin(), self.params.get("epsilon")) {
            (Some(f), _) => Ok(f.phi(&self.params)?),
            (None, Some(&eps)) => Ok((self.custom_generator()?, eps)),
            (None, None) => Err(CliError::Usage("crosscheck requires a φ-based family (custom needs epsilon)".into())),
        }
    }

    fn custom_generator(&self) -> Result<GeneratorFunction, CliError> {
        let src = self.expr.as_deref().unwrap_or_default();
        let scale = self.params.get("scale").copied().unwrap_or(1.0);
        Ok(Expr::parse(src)?.into_generator(scale))
    }
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str], family: FamilyName) -> Result<(), CliError> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::Usage(format!(
            "unknown parameter '{k}' for family {} (expected {})",
            family.name(),
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

/// `KEY=START:STOP:STEPS`, evaluated at STEPS evenly spaced values
/// including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let d = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.stop } else { self.start + d * i as f64 }).collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("sweep must look like KEY=START:STOP:STEPS (got '{s}')");
        let (key, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if key.is_empty() || parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if steps == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Sweep { key: key.trim().to_string(), start, stop, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "b=0.5:2:4".parse().unwrap();
        assert_eq!(s.key, "b");
        assert_eq!(s.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!("a=1:1:1".parse::<Sweep>().unwrap().values(), vec![1.0]);
        assert!("b=1:2".parse::<Sweep>().is_err());
        assert!("=1:2:3".parse::<Sweep>().is_err());
        assert!("b=1:2:0".parse::<Sweep>().is_err());
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c = ModelConfig { family: Some(FamilyName::PolyWplus), ..Default::default() }.validated().unwrap();
        assert_eq!(c.params.get("a"), Some(&2.0));
        assert_eq!(c.params.get("b"), Some(&1.0));
    }

    #[test]
    fn unknown_keys_are_named() {
        let mut c = ModelConfig { family: Some(FamilyName::PolyWplus), ..Default::default() };
        c.params.insert("alpha".into(), 1.0);
        let err = c.validated().unwrap_err().to_string();
        assert!(err.contains("'alpha'"), "{err}");
    }

    #[test]
    fn config_file_shape() {
        let text = r#"{"family": "sinh-wplus", "params": {"A": 2}, "grid": {"L": 6, "N": 801},
            "tolerances": {"energy": 2e-5}, "output": {"format": "csv", "path": "t.csv"}}"#;
        let c: ModelConfig = serde_json::from_str(text).unwrap();
        let c = c.validated().unwrap();
        assert_eq!(c.params["A"], 2.0);
        assert_eq!(c.params["alpha"], 1.0);
        assert_eq!(c.tolerances().energy, 2e-5);
        assert_eq!(c.tolerances().cosine, 1e-6);
        assert!(serde_json::from_str::<ModelConfig>(r#"{"family": "poly-phi", "extra": 1}"#).is_err());
    }

    #[test]
    fn custom_requires_expression() {
        let c = ModelConfig { family: Some(FamilyName::Custom), ..Default::default() };
        assert!(c.validated().is_err());
        let c = ModelConfig { family: Some(FamilyName::Custom), expr: Some("2*x + x^3".into()), ..Default::default() };
        let m = c.validated().unwrap().build_model().unwrap();
        assert_eq!(m.epsilon, 1.0);
    }
}
