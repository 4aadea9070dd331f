use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xplab::distortion::PairSample;
use xplab::inequality::{EvalParams, Registry, Route};
use xplab::search::{ScanWitness, Strategy, WitnessSpec};
use xplab::subsets::SubsetPolicy;
use xplab::ResourceCaps;

/// Problems found before any computation starts.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid override {0:?}: expected key=value")]
    Override(String),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    #[default]
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetSection {
    #[serde(default)]
    pub mode: SubsetMode,
    pub count: Option<usize>,
}

/// Witness for single evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WitnessChoice {
    ExtremalExponential,
    Random {
        support: Option<usize>,
        dense_limit: Option<u128>,
        max_word_len: Option<usize>,
    },
    /// A witness stored as JSON, either bare or inside a report.
    File {
        path: PathBuf,
    },
}

impl Default for WitnessChoice {
    fn default() -> Self {
        WitnessChoice::ExtremalExponential
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub evaluator: String,
    pub budget: usize,
    #[serde(default)]
    pub strategy: Strategy,
    pub perturbation: Option<f64>,
    pub max_climb_steps: Option<usize>,
    #[serde(default)]
    pub keep_trace: bool,
    #[serde(default)]
    pub witness: WitnessSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub evaluator: String,
    pub n: Vec<usize>,
    pub k: usize,
    pub m: Vec<u32>,
    #[serde(default = "extremal")]
    pub witness: ScanWitness,
}

fn extremal() -> ScanWitness {
    ScanWitness::ExtremalExponential
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistortionSection {
    /// Closed-form bounds on the grid `n x m`, plus the snowflake exponent.
    Bound { n: Vec<u64>, m: Vec<u64>, p: f64, q: f64 },
    /// Exhaustive comparability constants of the circle map.
    HComparability { m: Vec<u32>, n: usize, q: Vec<f64> },
    /// Distortion of the identity `[m]_q^n -> l_p^n`.
    Identity {
        m: u32,
        n: usize,
        q: f64,
        p: f64,
        #[serde(default)]
        sample: Option<PairSample>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// An evaluator id, `search`, `sharpness-scan` or `distortion`.
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    pub params: Option<EvalParams>,
    #[serde(default)]
    pub witness: WitnessChoice,
    #[serde(default)]
    pub subsets: SubsetSection,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub caps: ResourceCaps,
    /// Run family validation before generic evaluations.
    #[serde(default = "yes")]
    pub validate_family: bool,
    pub search: Option<SearchSection>,
    pub scan: Option<ScanSection>,
    pub distortion: Option<DistortionSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn yes() -> bool {
    true
}

pub const SEARCH: &str = "search";
pub const SCAN: &str = "sharpness-scan";
pub const DISTORTION: &str = "distortion";

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `a.b.c=value` to the table, creating sections as needed.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(spec.to_string()));
    }
    let mut cur = table;
    for part in &path[..path.len() - 1] {
        let slot = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = slot
            .as_table_mut()
            .ok_or_else(|| field(key, format!("{part} is not a section")))?;
    }
    cur.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn subset_policy(&self) -> Result<SubsetPolicy, ConfigError> {
        let seed = self.seed;
        match (self.subsets.mode, self.subsets.count) {
            (SubsetMode::Auto, None) => Ok(SubsetPolicy::Auto { seed }),
            (SubsetMode::Exact, None) => Ok(SubsetPolicy::Exact),
            (SubsetMode::Sampled, Some(count)) if count > 0 => Ok(SubsetPolicy::Sampled { count, seed }),
            (SubsetMode::Sampled, _) => Err(field("subsets.count", "sampled mode needs a positive count")),
            (_, Some(_)) => Err(field("subsets.count", "only sampled mode takes a count")),
        }
    }

    pub fn params(&self) -> Result<&EvalParams, ConfigError> {
        self.params
            .as_ref()
            .ok_or_else(|| field("params", format!("kind {} needs a [params] section", self.kind)))
    }

    /// Every check that can fail without running an experiment.
    pub fn validate(&self, registry: &Registry) -> Result<(), ConfigError> {
        self.subset_policy()?;
        let sections = [
            ("search", self.search.is_some(), SEARCH),
            ("scan", self.scan.is_some(), SCAN),
            ("distortion", self.distortion.is_some(), DISTORTION),
        ];
        for (name, present, kind) in sections {
            if present != (self.kind == kind) {
                return Err(field(
                    name,
                    if present {
                        format!("section is only used by kind = {kind:?}")
                    } else {
                        format!("kind = {kind:?} needs this section")
                    },
                ));
            }
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(field("output.name", "must be a plain file stem"));
            }
        }
        match self.kind.as_str() {
            SEARCH => {
                let s = self.search.as_ref().expect("checked above");
                let ev = evaluator(registry, &s.evaluator, "search.evaluator")?;
                check_params(self.params()?, "params")?;
                domain_ok(ev, self.params()?)?;
                if s.budget == 0 {
                    return Err(field("search.budget", "must be at least 1"));
                }
                if let Some(p) = s.perturbation {
                    if !(p.is_finite() && p > 0.0) {
                        return Err(field("search.perturbation", "must be positive"));
                    }
                }
                if s.witness.support == 0 || s.witness.max_word_len == 0 {
                    return Err(field("search.witness", "support and max_word_len must be at least 1"));
                }
            }
            SCAN => {
                let s = self.scan.as_ref().expect("checked above");
                let ev = evaluator(registry, &s.evaluator, "scan.evaluator")?;
                if s.n.is_empty() {
                    return Err(field("scan.n", "needs at least one value"));
                }
                if s.m.is_empty() {
                    return Err(field("scan.m", "needs at least one value"));
                }
                let base = self.params.clone().unwrap_or_else(|| EvalParams::new(s.n[0], s.k, 4.0));
                for &n in &s.n {
                    for &m in &s.m {
                        let p = EvalParams {
                            n,
                            k: s.k,
                            m,
                            ..base.clone()
                        };
                        check_params(&p, "scan").map_err(|e| match e {
                            ConfigError::Field { field, message } if field == "scan.k" => ConfigError::Field {
                                field,
                                message: format!("{message} (n = {n})"),
                            },
                            e => e,
                        })?;
                        domain_ok(ev, &p)?;
                    }
                }
                if let ScanWitness::Search { budget: 0, .. } = s.witness {
                    return Err(field("scan.witness.budget", "must be at least 1"));
                }
            }
            DISTORTION => match self.distortion.as_ref().expect("checked above") {
                DistortionSection::Bound { n, m, p, q } => {
                    order(*p, *q)?;
                    if n.is_empty() || m.is_empty() || n.contains(&0) || m.contains(&0) {
                        return Err(field("distortion.n", "n and m lists must be non-empty and positive"));
                    }
                }
                DistortionSection::HComparability { m, n, q } => {
                    if m.is_empty() || m.iter().any(|&v| v < 2) {
                        return Err(field("distortion.m", "values must be at least 2"));
                    }
                    if *n == 0 {
                        return Err(field("distortion.n", "must be at least 1"));
                    }
                    if q.is_empty() || q.iter().any(|v| !(v.is_finite() && *v >= 1.0)) {
                        return Err(field("distortion.q", "values must be >= 1"));
                    }
                }
                DistortionSection::Identity { m, n, q, p, .. } => {
                    if *m == 0 || *n == 0 {
                        return Err(field("distortion.m", "m and n must be at least 1"));
                    }
                    if !(q.is_finite() && *q >= 2.0) {
                        return Err(field("distortion.q", "must be >= 2"));
                    }
                    if !(p.is_finite() && *p >= 1.0) {
                        return Err(field("distortion.p", "must be >= 1"));
                    }
                }
            },
            id => {
                let ev = evaluator(registry, id, "kind")?;
                check_params(self.params()?, "params")?;
                domain_ok(ev, self.params()?)?;
                if let WitnessChoice::Random { support: Some(0), .. } = self.witness {
                    return Err(field("witness.support", "must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

fn evaluator<'r>(
    registry: &'r Registry,
    id: &str,
    name: &str,
) -> Result<&'r dyn xplab::inequality::Evaluator, ConfigError> {
    registry.get(id).map_err(|e| field(name, e.to_string()))
}

fn domain_ok(ev: &dyn xplab::inequality::Evaluator, p: &EvalParams) -> Result<(), ConfigError> {
    ev.domain(p).map(|_| ()).map_err(|e| field("params", e.to_string()))
}

fn check_params(p: &EvalParams, section: &str) -> Result<(), ConfigError> {
    let f = |name: &str| format!("{section}.{name}");
    if p.n == 0 {
        return Err(field(&f("n"), "must be at least 1"));
    }
    if p.k == 0 {
        return Err(field(&f("k"), "must be at least 1"));
    }
    if p.k > p.n {
        return Err(field(&f("k"), format!("k = {} exceeds n = {}", p.k, p.n)));
    }
    if !(p.p.is_finite() && p.p >= 2.0) {
        return Err(field(&f("p"), format!("must be a finite real >= 2, got {}", p.p)));
    }
    if p.m == 0 {
        return Err(field(&f("m"), "must be at least 1"));
    }
    if p.ell == 0 {
        return Err(field(&f("ell"), "must be at least 1"));
    }
    if p.d == 0 {
        return Err(field(&f("d"), "must be at least 1"));
    }
    Ok(())
}

fn order(p: f64, q: f64) -> Result<(), ConfigError> {
    if !(p.is_finite() && q.is_finite() && 2.0 < q && q < p) {
        return Err(field("distortion.q", format!("need 2 < q < p, got p = {p}, q = {q}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CYCLIC: &str = "kind = \"cyclic\"\nseed = 3\n[params]\nn = 4\nk = 1\np = 4\nm = 2\n";

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_toml(CYCLIC, &[]).unwrap();
        assert_eq!(c.params.as_ref().unwrap().m, 2);
        c.validate(&Registry::standard()).unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{CYCLIC}bogus = 1\n");
        assert!(matches!(
            ExperimentConfig::from_toml(&text, &[]),
            Err(ConfigError::Parse(_))
        ));
        let text = "kind = \"cyclic\"\nsed = 3\n";
        assert!(ExperimentConfig::from_toml(text, &[]).is_err());
    }

    #[test]
    fn k_above_n_names_the_field() {
        let c = ExperimentConfig::from_toml(CYCLIC, &["params.k=5".into()]).unwrap();
        let e = c.validate(&Registry::standard()).unwrap_err();
        assert!(e.to_string().starts_with("params.k"), "{e}");
    }

    #[test]
    fn overrides_create_nested_keys() {
        let c = ExperimentConfig::from_toml(
            CYCLIC,
            &[
                "params.torus_variant=sign-eta".into(),
                "output.name=run1".into(),
                "seed=9".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.output.name.as_deref(), Some("run1"));
        assert!(ExperimentConfig::from_toml(CYCLIC, &["novalue".into()]).is_err());
    }

    #[test]
    fn sections_must_match_the_kind() {
        let text = format!("{CYCLIC}[search]\nevaluator = \"np\"\nbudget = 3\n");
        let c = ExperimentConfig::from_toml(&text, &[]).unwrap();
        assert!(c.validate(&Registry::standard()).is_err());
    }
}
