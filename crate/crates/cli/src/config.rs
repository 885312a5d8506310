//! Run configuration: one JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cpes_core::data::{RTS24_SCENARIO, RTS24_SCORE};
use cpes_core::opf::AlphaPolicy;
use cpes_core::{parse_case, CyberGate, CyberScenario, Network, ScoreConfig};

use crate::CliError;

/// A section given inline or as a path to a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<PathBuf>,
    /// Ordered criteria with singleton weights; the order selects the factors.
    pub weights: Option<Source<ScoreConfig>>,
    pub scenario: Option<Source<CyberScenario>>,
    /// Gate settings: threshold, alpha policy and per-generator zeta rules.
    pub gate: Option<Source<CyberGate>>,
    pub rho: Option<f64>,
    pub alpha_policy: Option<AlphaPolicy>,
    pub output_dir: Option<PathBuf>,
}

/// Values taken from the command line; these win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub case: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub zeta_file: Option<PathBuf>,
    pub rho: Option<f64>,
    pub alpha_policy: Option<AlphaPolicy>,
    pub output_dir: Option<PathBuf>,
}

pub struct Settings {
    pub net: Network,
    pub score: ScoreConfig,
    pub scenario: CyberScenario,
    pub gate: CyberGate,
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_RHO: f64 = 0.2;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", what.display())))
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    parse_json(&read(path)?, path)
}

fn resolve<T: DeserializeOwned>(src: Source<T>, base: &Path) -> Result<T, CliError> {
    match src {
        Source::Inline(v) => Ok(v),
        Source::Path(p) => load(&base.join(p)),
    }
}

/// `minimum`, `fixed:<a>` or a bare number.
pub fn parse_alpha_policy(s: &str) -> Result<AlphaPolicy, String> {
    let fixed = |v: &str| {
        v.parse::<f64>()
            .map(AlphaPolicy::Fixed)
            .map_err(|_| format!("invalid alpha policy '{s}' (expected minimum, fixed:<a> or <a>)"))
    };
    match s {
        "minimum" | "min" => Ok(AlphaPolicy::Minimum),
        _ => fixed(s.strip_prefix("fixed:").unwrap_or(s)),
    }
}

impl Settings {
    pub fn load(config: Option<&Path>, over: Overrides) -> Result<Settings, CliError> {
        let (file, base) = match config {
            Some(p) => (
                load::<FileConfig>(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (FileConfig::default(), PathBuf::new()),
        };

        let case = match (over.case, file.case) {
            (Some(p), _) => p,
            (None, Some(p)) => base.join(p),
            (None, None) => return Err(CliError::Input("no case file given (use --case or a config file)".into())),
        };
        let net = parse_case(&read(&case)?).map_err(|e| CliError::Input(format!("{}: {e}", case.display())))?;

        let score = match (over.weights, file.weights) {
            (Some(p), _) => load(&p)?,
            (None, Some(s)) => resolve(s, &base)?,
            (None, None) => ScoreConfig::from_json(RTS24_SCORE)?,
        };
        let scenario = match (over.scenario, file.scenario) {
            (Some(p), _) => load(&p)?,
            (None, Some(s)) => resolve(s, &base)?,
            (None, None) => {
                let bundled = CyberScenario::from_json(RTS24_SCENARIO)?;
                CyberScenario::uniform(bundled.default)
            }
        };
        let mut gate = match (over.zeta_file, file.gate) {
            (Some(p), _) => load(&p)?,
            (None, Some(s)) => resolve(s, &base)?,
            (None, None) => CyberGate::new(DEFAULT_RHO),
        };
        if let Some(rho) = over.rho.or(file.rho) {
            gate.rho = rho;
        }
        if let Some(a) = over.alpha_policy.or(file.alpha_policy) {
            gate.alpha_policy = a;
        }
        let output_dir = over.output_dir.or(file.output_dir.map(|p| base.join(p)));

        Ok(Settings {
            net,
            score,
            scenario,
            gate,
            output_dir,
        })
    }

    /// Checks every section against the case.
    pub fn validate(&self) -> Result<(), CliError> {
        self.net.validate()?;
        self.score.validate()?;
        self.scenario.validate(&self.net)?;
        self.gate.validate()?;
        if !(self.gate.rho > 0.0 && self.gate.rho <= 1.0) {
            return Err(CliError::Input(format!("rho {} must lie in (0, 1]", self.gate.rho)));
        }
        for rule in &self.gate.generators {
            let Some(b) = self.net.bus_id(rule.bus) else {
                return Err(CliError::Input(format!("gate rule names unknown bus {}", rule.bus)));
            };
            if !self.net.generators.iter().any(|g| g.bus == b) {
                return Err(CliError::Input(format!("gate rule bus {} hosts no generator", rule.bus)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_policy_forms() {
        assert_eq!(parse_alpha_policy("minimum"), Ok(AlphaPolicy::Minimum));
        assert_eq!(parse_alpha_policy("fixed:0.25"), Ok(AlphaPolicy::Fixed(0.25)));
        assert_eq!(parse_alpha_policy("0.5"), Ok(AlphaPolicy::Fixed(0.5)));
        assert!(parse_alpha_policy("half").is_err());
    }

    #[test]
    fn sections_accept_paths_or_objects() {
        let c: FileConfig = serde_json::from_str(r#"{"weights": "w.json", "gate": {"rho": 0.3}}"#).unwrap();
        assert!(matches!(c.weights, Some(Source::Path(_))));
        assert!(matches!(c.gate, Some(Source::Inline(ref g)) if g.rho == 0.3));
        assert!(serde_json::from_str::<FileConfig>(r#"{"cases": "x"}"#).is_err());
    }
}
