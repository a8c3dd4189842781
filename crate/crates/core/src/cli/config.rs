//! JSON scenario configuration.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral_app::{BoundForm, ForcingForm, IntegralProblem, KernelForm};
use crate::order_metric::{GeraghtyBeta, NaturalOrder, PartialOrder, RealLine, ReversedOrder};
use crate::triple::{MappingTriple, Section, SelfMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Check,
    Solve,
    Oracle,
    Integral,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Check => "check",
            Mode::Solve => "solve",
            Mode::Oracle => "oracle",
            Mode::Integral => "integral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Must match the mode given on the command line when present.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub space: SpaceSpec,
    #[serde(default)]
    pub order: OrderSpec,
    #[serde(default)]
    pub f: Option<MapSpec>,
    /// Defaults to `f`.
    #[serde(default)]
    pub g: Option<MapSpec>,
    /// Defaults to the identity.
    #[serde(default)]
    pub h: Option<MapSpec>,
    #[serde(default)]
    pub beta: Option<BetaSpec>,
    #[serde(default)]
    pub iteration: Option<IterationConfig>,
    #[serde(default)]
    pub check: Option<CheckConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub integral: Option<IntegralConfig>,
    /// Overridden by `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    RealLine {
        #[serde(default)]
        eq_tolerance: Option<f64>,
    },
}

impl Default for SpaceSpec {
    fn default() -> Self {
        SpaceSpec::RealLine { eq_tolerance: None }
    }
}

impl SpaceSpec {
    pub fn build(&self) -> Result<RealLine> {
        match *self {
            SpaceSpec::RealLine { eq_tolerance: None } => Ok(RealLine::default()),
            SpaceSpec::RealLine {
                eq_tolerance: Some(tol),
            } => {
                if !(tol >= 0.0) || !tol.is_finite() {
                    return Err(Error::Config(format!("eq_tolerance must be nonnegative, got {tol}")));
                }
                Ok(RealLine { eq_tolerance: tol })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSpec {
    #[default]
    Natural,
    Reversed,
}

impl OrderSpec {
    pub fn build(self) -> Arc<dyn PartialOrder<f64>> {
        match self {
            OrderSpec::Natural => Arc::new(NaturalOrder),
            OrderSpec::Reversed => Arc::new(ReversedOrder),
        }
    }
}

/// Built-in self-maps of the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    /// `a * x + b`
    Affine {
        a: f64,
        b: f64,
    },
    /// `x / (1 + x)`
    Ratio,
    Constant {
        c: f64,
    },
    /// `x * x`
    Square,
}

impl MapSpec {
    pub fn build(&self) -> Arc<dyn SelfMap<f64>> {
        match *self {
            MapSpec::Identity => Arc::new(|x: &f64| *x),
            MapSpec::Affine { a, b } => Arc::new(move |x: &f64| a * x + b),
            MapSpec::Ratio => Arc::new(|x: &f64| x / (1.0 + x)),
            MapSpec::Constant { c } => Arc::new(move |_: &f64| c),
            MapSpec::Square => Arc::new(|x: &f64| x * x),
        }
    }

    /// A right inverse on the range, used when the map plays the role of `H`.
    pub fn section(&self, eq_tolerance: f64) -> Section<f64> {
        match *self {
            MapSpec::Identity => Arc::new(|y: &f64| Some(*y)),
            MapSpec::Affine { a, b } => Arc::new(move |y: &f64| (a != 0.0).then(|| (y - b) / a)),
            MapSpec::Ratio => Arc::new(|y: &f64| (*y != 1.0).then(|| y / (1.0 - y))),
            MapSpec::Constant { c } => Arc::new(move |y: &f64| ((y - c).abs() <= eq_tolerance).then_some(0.0)),
            MapSpec::Square => Arc::new(|y: &f64| (*y >= 0.0).then(|| y.sqrt())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaSpec {
    Constant { c: f64 },
    Reciprocal,
    LogSqrt,
}

impl BetaSpec {
    pub fn build(&self) -> Result<GeraghtyBeta> {
        match *self {
            BetaSpec::Constant { c } => GeraghtyBeta::constant(c).map_err(|e| Error::Config(e.to_string())),
            BetaSpec::Reciprocal => Ok(GeraghtyBeta::reciprocal()),
            BetaSpec::LogSqrt => Ok(GeraghtyBeta::log_sqrt()),
        }
    }
}

fn default_max_iter() -> usize {
    1000
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationConfig {
    pub x0: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Extra starting points for a multistart comparison.
    #[serde(default)]
    pub starts: Vec<f64>,
}

fn default_compat_tolerance() -> f64 {
    1e-6
}

fn default_preimage_budget() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Sample points are `count` equispaced values over `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    #[serde(default = "default_compat_tolerance")]
    pub compat_tolerance: f64,
    #[serde(default = "default_preimage_budget")]
    pub preimage_budget: usize,
    #[serde(default)]
    pub beta_probe: Option<BetaProbeConfig>,
}

impl CheckConfig {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaProbeConfig {
    pub delta: f64,
    pub t_max: f64,
    pub samples: usize,
}

fn default_density() -> f64 {
    0.3
}

fn default_oracle_max_iter() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub seed_start: u64,
    pub seed_count: u64,
    /// Fixed model size; alternatively give `n_min` and `n_max`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_min: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_oracle_max_iter")]
    pub max_iter: usize,
}

impl OracleConfig {
    pub fn size_range(&self) -> Result<(usize, usize)> {
        let (lo, hi) = match (self.n, self.n_min, self.n_max) {
            (Some(n), None, None) => (n, n),
            (None, Some(lo), Some(hi)) => (lo, hi),
            _ => {
                return Err(Error::Config(
                    "oracle needs either `n` or both `n_min` and `n_max`".into(),
                ))
            }
        };
        if lo < 1 || hi > crate::finite_oracle::MAX_MODEL_SIZE || lo > hi {
            return Err(Error::Config(format!(
                "model sizes must satisfy 1 <= n_min <= n_max <= {}",
                crate::finite_oracle::MAX_MODEL_SIZE
            )));
        }
        Ok((lo, hi))
    }
}

fn default_hypothesis_samples() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralConfig {
    pub first_kernel: KernelForm,
    /// Defaults to `first_kernel`.
    #[serde(default)]
    pub second_kernel: Option<KernelForm>,
    pub forcing: ForcingForm,
    /// Defaults to the constant `1 / horizon`.
    #[serde(default)]
    pub bound: Option<BoundForm>,
    pub horizon: f64,
    /// Number of grid nodes.
    pub grid_n: usize,
    /// Starting function; defaults to the forcing term.
    #[serde(default)]
    pub u0: Option<ForcingForm>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_hypothesis_samples")]
    pub hypothesis_samples: usize,
}

impl IntegralConfig {
    pub fn problem(&self) -> Result<IntegralProblem> {
        let bound = self.bound.clone().unwrap_or(BoundForm::Constant {
            value: 1.0 / self.horizon,
        });
        IntegralProblem::from_forms(
            &self.first_kernel,
            self.second_kernel.as_ref().unwrap_or(&self.first_kernel),
            &self.forcing,
            &bound,
            self.horizon,
            self.grid_n,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }
}

fn check_iteration(it: &IterationConfig) -> Result<()> {
    if it.max_iter < 2 {
        return Err(Error::Config("iteration.max_iter must be at least 2".into()));
    }
    if !(it.tol > 0.0) {
        return Err(Error::Config("iteration.tol must be positive".into()));
    }
    Ok(())
}

fn require<'a, T>(field: &'a Option<T>, name: &str, mode: Mode) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::Config(format!("mode `{}` requires `{name}`", mode.as_str())))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that the fields `mode` needs are present and sane.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(Error::Config(format!(
                    "config is for mode `{}` but `{}` was requested",
                    m.as_str(),
                    mode.as_str()
                )));
            }
        }
        self.space.build()?;
        match mode {
            Mode::Check | Mode::Solve => {
                require(&self.f, "f", mode)?;
                require(&self.beta, "beta", mode)?.build()?;
                check_iteration(require(&self.iteration, "iteration", mode)?)?;
                if mode == Mode::Check {
                    let c = require(&self.check, "check", mode)?;
                    if c.count < 2 || !(c.lo < c.hi) {
                        return Err(Error::Config("check needs count >= 2 and lo < hi".into()));
                    }
                    if !(c.compat_tolerance > 0.0) {
                        return Err(Error::Config("check.compat_tolerance must be positive".into()));
                    }
                }
            }
            Mode::Oracle => {
                let o = require(&self.oracle, "oracle", mode)?;
                o.size_range()?;
                if !(0.0..=1.0).contains(&o.density) {
                    return Err(Error::Config("oracle.density must lie in [0, 1]".into()));
                }
                if o.max_iter < 2 {
                    return Err(Error::Config("oracle.max_iter must be at least 2".into()));
                }
                if let Some(b) = &self.beta {
                    b.build()?;
                }
            }
            Mode::Integral => {
                let i = require(&self.integral, "integral", mode)?;
                i.problem()?;
                if i.max_iter < 2 || !(i.tol > 0.0) {
                    return Err(Error::Config("integral needs max_iter >= 2 and tol > 0".into()));
                }
            }
        }
        Ok(())
    }

    /// The real-line triple described by `f`, `g`, `h`, `order` and `beta`.
    pub fn real_triple(&self) -> Result<MappingTriple<f64>> {
        let space = self.space.build()?;
        let eq_tol = space.eq_tolerance;
        let f = self.f.as_ref().ok_or_else(|| Error::Config("missing `f`".into()))?;
        let g = self.g.as_ref().unwrap_or(f);
        let beta = self
            .beta
            .as_ref()
            .ok_or_else(|| Error::Config("missing `beta`".into()))?
            .build()?;
        let triple = MappingTriple::with_identity(Arc::new(space), self.order.build(), beta, f.build(), g.build());
        Ok(match &self.h {
            Some(h) => triple.with_h(h.build(), h.section(eq_tol)),
            None => triple,
        })
    }
}
