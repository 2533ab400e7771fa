//! TOML experiment configuration.

use std::f64::consts::FRAC_PI_8;
use std::fmt;
use std::path::{Path, PathBuf};

use csplab_core::analytic::optimize_beta;
use csplab_core::csp::WeightDistribution;
use csplab_core::qaoa::{CostPolicy, QaoaParams, DEFAULT_MAX_QUBITS};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Validate,
    #[serde(rename = "ensemble-2xor")]
    Ensemble2xor,
    ScanD,
    ScanG,
    GreedyStudy,
    VarianceStudy,
    LambdaMin,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Ensemble2xor => "ensemble-2xor",
            Self::ScanD => "scan-d",
            Self::ScanG => "scan-g",
            Self::GreedyStudy => "greedy-study",
            Self::VarianceStudy => "variance-study",
            Self::LambdaMin => "lambda-min",
        }
    }

    fn needs_state_vector(self) -> bool {
        matches!(
            self,
            Self::Validate | Self::Ensemble2xor | Self::VarianceStudy | Self::LambdaMin
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateFamily {
    Xor,
    Sat,
    Cut,
    WeightedXor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    #[default]
    Bounded,
    NoOverlap,
    TriangleFree,
    /// Disjoint copies of a complete graph.
    Cliques,
}

/// How scan points are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    /// Closed form for 2XOR families, state vector otherwise.
    #[default]
    Auto,
    Analytic,
    StateVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: PredicateFamily,
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    /// `D`: every variable lies in at most `D + 1` constraints.
    pub excess_degree: usize,
    /// Constraint count; defaults to `fill · n(D+1)/k`.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_fill")]
    pub fill: f64,
    #[serde(default)]
    pub structure: Structure,
    /// Clique order for [`Structure::Cliques`]; defaults to `D + 1`.
    #[serde(default)]
    pub clique_size: Option<usize>,
    #[serde(default = "default_one")]
    pub copies: usize,
    #[serde(default)]
    pub weights: Option<WeightDistribution>,
    /// Draw a new scope set per replication.
    #[serde(default = "default_true")]
    pub resample_scopes: bool,
}

impl FamilyConfig {
    pub fn arity(&self) -> usize {
        match self.kind {
            PredicateFamily::Cut => 2,
            _ => self.k,
        }
    }

    pub fn weights(&self) -> WeightDistribution {
        self.weights
            .unwrap_or(WeightDistribution::Gaussian { sigma: 1.0 })
    }

    /// Variance of a single predicate drawn from the family.
    pub fn predicate_variance(&self) -> f64 {
        match self.kind {
            PredicateFamily::Xor | PredicateFamily::Cut => 0.25,
            PredicateFamily::Sat => {
                let p = 0.5f64.powi(self.k as i32);
                p * (1.0 - p)
            }
            PredicateFamily::WeightedXor => self.weights().variance(),
        }
    }

    pub fn variables_at(&self, d: usize) -> usize {
        match self.structure {
            Structure::Cliques => self.clique_size.unwrap_or(d + 1) * self.copies,
            _ => self.n,
        }
    }

    pub fn constraints_at(&self, d: usize) -> usize {
        match self.structure {
            Structure::Cliques => {
                let q = self.clique_size.unwrap_or(d + 1);
                self.copies * q * (q - 1) / 2
            }
            _ => self.m.unwrap_or_else(|| {
                (self.fill * (self.n * (d + 1)) as f64 / self.arity() as f64).floor() as usize
            }),
        }
    }

    pub fn is_two_xor(&self) -> bool {
        self.kind == PredicateFamily::Xor && self.k == 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleConfig {
    /// Mixer angle; defaults to π/8 for arity 2 and to the bound-optimal
    /// value otherwise.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_g")]
    pub g: f64,
    /// Explicit phase angle; otherwise `g/√D`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Maximize the scored advantage over `(β, γ)` at each scan point.
    #[serde(default)]
    pub optimize: bool,
    #[serde(default = "default_policy")]
    pub policy: CostPolicy,
}

impl Default for AngleConfig {
    fn default() -> Self {
        Self {
            beta: None,
            g: default_g(),
            gamma: None,
            optimize: false,
            policy: default_policy(),
        }
    }
}

impl AngleConfig {
    pub fn resolve_beta(&self, family: &FamilyConfig, g: f64) -> f64 {
        self.beta.unwrap_or_else(|| {
            if family.arity() == 2 {
                FRAC_PI_8
            } else {
                let var = family.predicate_variance();
                optimize_beta(family.arity(), g, var)
            }
        })
    }

    pub fn params(&self, family: &FamilyConfig, d: usize, g: f64) -> QaoaParams {
        let beta = self.resolve_beta(family, g);
        match self.gamma {
            Some(gamma) => QaoaParams::new(beta, gamma),
            None => QaoaParams::from_g(beta, g, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub d_values: Vec<usize>,
    #[serde(default)]
    pub g_values: Vec<f64>,
}

/// Pass/fail thresholds. Unset fields take the experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Analytic vs state-vector discrepancy.
    pub discrepancy: Option<f64>,
    /// Zero-angle baseline and phase-offset invariance.
    pub baseline: Option<f64>,
    /// Standard errors allowed between ensemble mean and prediction.
    pub sigma: Option<f64>,
    /// Standard errors by which a mean advantage must exceed zero.
    pub positivity_sigma: Option<f64>,
    /// Window for the ratio of scaled advantage at consecutive `D`.
    pub ratio_window: Option<[f64; 2]>,
    /// Relative deviation of scaled advantage from `1/(2√e)` at the largest `D`.
    pub prefactor_rel: Option<f64>,
    /// Window for the `g` maximizing the scaled advantage.
    pub g_window: Option<[f64; 2]>,
    /// Scaled advantage must strictly decrease along the `D` grid.
    pub decreasing: Option<bool>,
    /// Best sampled energy must be at most `−c·m/√D`.
    pub lambda_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub family: FamilyConfig,
    #[serde(default)]
    pub angles: AngleConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_one")]
    pub replications: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
    /// Greedy restarts per replication.
    #[serde(default = "default_one")]
    pub restarts: usize,
    #[serde(default)]
    pub evaluator: Evaluator,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Worker threads; all cores when unset.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Summary path. Rows go next to it with a `.rows.jsonl` extension.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub csv: bool,
    /// Adds per-row wall time, which makes output run-dependent.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// `D` values an experiment sweeps: the grid, or the family's own `D`.
    pub fn d_points(&self) -> Vec<usize> {
        if self.grid.d_values.is_empty() {
            vec![self.family.excess_degree]
        } else {
            self.grid.d_values.clone()
        }
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let f = &self.family;
        if self.replications == 0 {
            return config_err("replications must be at least 1");
        }
        if self.shots == 0 {
            return config_err("shots must be at least 1");
        }
        if f.arity() == 0 || f.arity() > csplab_core::boolfn::DEFAULT_MAX_ARITY {
            return config_err(format!("arity {} unsupported", f.arity()));
        }
        if f.kind == PredicateFamily::Cut && f.k != 2 {
            return config_err("cut predicates have arity 2");
        }
        if !(f.fill > 0.0 && f.fill <= 1.0) {
            return config_err(format!("fill {} outside (0, 1]", f.fill));
        }
        if f.copies == 0 {
            return config_err("copies must be at least 1");
        }
        if self.workers == Some(0) {
            return config_err("workers must be at least 1");
        }
        if self.max_qubits > DEFAULT_MAX_QUBITS {
            return config_err(format!("max_qubits above {DEFAULT_MAX_QUBITS}"));
        }
        match kind {
            ExperimentKind::ScanG if self.grid.g_values.is_empty() => {
                return config_err("scan-g needs grid.g_values");
            }
            ExperimentKind::ScanD if self.grid.d_values.is_empty() => {
                return config_err("scan-d needs grid.d_values");
            }
            _ => {}
        }
        if self.evaluator == Evaluator::Analytic && !f.is_two_xor() {
            return config_err("the analytic evaluator covers 2XOR families only");
        }
        let scans = matches!(kind, ExperimentKind::ScanD | ExperimentKind::ScanG);
        let simulates = kind.needs_state_vector() || (scans && self.uses_state_vector());
        for d in self.d_points() {
            let n = f.variables_at(d);
            if n < f.arity() {
                return config_err(format!("n = {n} below arity {}", f.arity()));
            }
            if simulates && n > self.max_qubits {
                return config_err(format!(
                    "n = {n} exceeds the {}-qubit simulator cap",
                    self.max_qubits
                ));
            }
        }
        Ok(())
    }

    /// Whether scans score points by simulation.
    pub fn uses_state_vector(&self) -> bool {
        match self.evaluator {
            Evaluator::Auto => !self.family.is_two_xor(),
            Evaluator::Analytic => false,
            Evaluator::StateVector => true,
        }
    }
}

fn default_k() -> usize {
    2
}

fn default_fill() -> f64 {
    0.5
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_g() -> f64 {
    1.0
}

fn default_shots() -> usize {
    1000
}

fn default_max_qubits() -> usize {
    DEFAULT_MAX_QUBITS
}

fn default_policy() -> CostPolicy {
    CostPolicy::Full
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [family]
        kind = "xor"
        n = 14
        excess_degree = 4
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.replications, 1);
        assert_eq!(c.family.k, 2);
        assert_eq!(c.family.constraints_at(4), 17);
        assert_eq!(c.d_points(), vec![4]);
        assert!(!c.uses_state_vector());
        let p = c.angles.params(&c.family, 4, 1.0);
        assert_eq!(p.beta, FRAC_PI_8);
        assert!((p.gamma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.replications = 0;
        assert!(c.validate(ExperimentKind::Validate).is_err());
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.family.n = 30;
        assert!(c.validate(ExperimentKind::Validate).is_err());
        assert!(c.validate(ExperimentKind::GreedyStudy).is_ok());
        assert!(c.validate(ExperimentKind::ScanG).is_err());
        assert!(ExperimentConfig::from_toml(
            "[family]\nkind = \"xor\"\nn = 3\nexcess_degree = 1\nbogus = 1"
        )
        .is_err());
    }

    #[test]
    fn weights_parse() {
        let text = format!("{MINIMAL}\nkind = \"weighted-xor\"");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = r#"
            [family]
            kind = "weighted-xor"
            k = 3
            n = 18
            excess_degree = 9
            weights = { kind = "uniform", half_width = 2.0 }
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(
            c.family.weights(),
            WeightDistribution::Uniform { half_width: 2.0 }
        );
        assert!((c.family.predicate_variance() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clique_sizes() {
        let text = r#"
            [family]
            kind = "cut"
            n = 0
            excess_degree = 3
            structure = "cliques"
            copies = 2
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.family.variables_at(5), 12);
        assert_eq!(c.family.constraints_at(5), 30);
    }
}
