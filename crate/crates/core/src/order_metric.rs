//! Metric, partial order and Geraghty-class contracts shared by every other module.
//!
//! Spaces and orders are object-safe traits over a point type `P` so that the
//! real line, finite tables and sampled function spaces can all drive the same
//! checkers and solver.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default equality slack for floating-point spaces.
pub const DEFAULT_EQ_TOLERANCE: f64 = 1e-10;

/// A metric on points of type `P`.
///
/// Two points are treated as equal when their distance is at most
/// [`Metric::eq_tolerance`].
pub trait Metric<P>: Send + Sync {
    fn distance(&self, x: &P, y: &P) -> f64;

    fn eq_tolerance(&self) -> f64;

    fn approx_eq(&self, x: &P, y: &P) -> bool {
        self.distance(x, y) <= self.eq_tolerance()
    }
}

/// A partial order on points of type `P`.
pub trait PartialOrder<P>: Send + Sync {
    fn leq(&self, x: &P, y: &P) -> bool;
}

impl<P, M: Metric<P> + ?Sized> Metric<P> for Arc<M> {
    fn distance(&self, x: &P, y: &P) -> f64 {
        (**self).distance(x, y)
    }
    fn eq_tolerance(&self) -> f64 {
        (**self).eq_tolerance()
    }
}

impl<P, O: PartialOrder<P> + ?Sized> PartialOrder<P> for Arc<O> {
    fn leq(&self, x: &P, y: &P) -> bool {
        (**self).leq(x, y)
    }
}

/// The real line with `|x - y|`.
#[derive(Debug, Clone, Copy)]
pub struct RealLine {
    pub eq_tolerance: f64,
}

impl Default for RealLine {
    fn default() -> Self {
        Self {
            eq_tolerance: DEFAULT_EQ_TOLERANCE,
        }
    }
}

impl Metric<f64> for RealLine {
    fn distance(&self, x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }
    fn eq_tolerance(&self) -> f64 {
        self.eq_tolerance
    }
}

/// `x ⪯ y` iff `x <= y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaturalOrder;

impl PartialOrder<f64> for NaturalOrder {
    fn leq(&self, x: &f64, y: &f64) -> bool {
        x <= y
    }
}

/// `x ⪯ y` iff `y <= x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReversedOrder;

impl PartialOrder<f64> for ReversedOrder {
    fn leq(&self, x: &f64, y: &f64) -> bool {
        y <= x
    }
}

/// Only `x ⪯ x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscreteOrder;

impl<P: PartialEq> PartialOrder<P> for DiscreteOrder {
    fn leq(&self, x: &P, y: &P) -> bool {
        x == y
    }
}

/// Outcome of comparing two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    LessEqual,
    GreaterEqual,
    Equal,
    Incomparable,
}

impl Comparison {
    pub fn is_comparable(self) -> bool {
        self != Comparison::Incomparable
    }
}

/// Classifies the pair `(x, y)` under `order`.
pub fn compare<P, O>(order: &O, x: &P, y: &P) -> Comparison
where
    O: PartialOrder<P> + ?Sized,
{
    match (order.leq(x, y), order.leq(y, x)) {
        (true, true) => Comparison::Equal,
        (true, false) => Comparison::LessEqual,
        (false, true) => Comparison::GreaterEqual,
        (false, false) => Comparison::Incomparable,
    }
}

/// A violated metric axiom, with the offending points given by position.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonZeroSelfDistance { i: usize, distance: f64 },
    Negative { i: usize, j: usize, distance: f64 },
    Asymmetric { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

/// A violated partial-order axiom, with the offending points given by position.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderViolation {
    NotReflexive { i: usize },
    NotAntisymmetric { i: usize, j: usize, distance: f64 },
    NotTransitive { i: usize, j: usize, k: usize },
}

/// Checks the metric axioms on every pair and triple of `points`.
///
/// Symmetry and the triangle inequality are allowed `slack`.
pub fn validate_metric<P, M>(space: &M, points: &[P], slack: f64) -> std::result::Result<(), MetricViolation>
where
    M: Metric<P> + ?Sized,
{
    let n = points.len();
    for i in 0..n {
        let d = space.distance(&points[i], &points[i]);
        if d > slack {
            return Err(MetricViolation::NonZeroSelfDistance { i, distance: d });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = space.distance(&points[i], &points[j]);
            if dij < 0.0 || dij.is_nan() {
                return Err(MetricViolation::Negative { i, j, distance: dij });
            }
            if (dij - space.distance(&points[j], &points[i])).abs() > slack {
                return Err(MetricViolation::Asymmetric { i, j });
            }
            for k in 0..n {
                let excess = space.distance(&points[i], &points[k]) - dij - space.distance(&points[j], &points[k]);
                if excess > slack {
                    return Err(MetricViolation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    Ok(())
}

/// Checks reflexivity, antisymmetry (up to the space's equality slack) and
/// transitivity of `order` on `points`. Preorders fail the antisymmetry test.
pub fn validate_partial_order<P, O, M>(order: &O, space: &M, points: &[P]) -> std::result::Result<(), OrderViolation>
where
    O: PartialOrder<P> + ?Sized,
    M: Metric<P> + ?Sized,
{
    let n = points.len();
    for i in 0..n {
        if !order.leq(&points[i], &points[i]) {
            return Err(OrderViolation::NotReflexive { i });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if order.leq(&points[i], &points[j]) && order.leq(&points[j], &points[i]) {
                let distance = space.distance(&points[i], &points[j]);
                if distance > space.eq_tolerance() {
                    return Err(OrderViolation::NotAntisymmetric { i, j, distance });
                }
            }
            if !order.leq(&points[i], &points[j]) {
                continue;
            }
            for k in 0..n {
                if order.leq(&points[j], &points[k]) && !order.leq(&points[i], &points[k]) {
                    return Err(OrderViolation::NotTransitive { i, j, k });
                }
            }
        }
    }
    Ok(())
}

type BetaFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A member of the Geraghty class: a map `[0, ∞) → [0, 1)` whose values can
/// only approach 1 along sequences tending to 0.
///
/// The closure is arbitrary; the codomain is enforced at every evaluation and
/// the limit condition is only probed on bounded ranges (see
/// [`beta_admissibility_probe`]).
#[derive(Clone)]
pub struct GeraghtyBeta {
    name: String,
    eval: Arc<BetaFn>,
}

impl fmt::Debug for GeraghtyBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeraghtyBeta").field("name", &self.name).finish()
    }
}

impl GeraghtyBeta {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `β ≡ c`. Fails unless `0 <= c < 1`.
    pub fn constant(c: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::BetaCodomain {
                name: format!("constant({c})"),
                t: 0.0,
                value: c,
            });
        }
        Ok(Self::new(format!("constant({c})"), move |_| c))
    }

    /// `β(t) = 1 / (1 + t)` for `t > 0`, with `β(0) = 0`.
    ///
    /// The value at 0 only ever multiplies a zero distance, so any choice in
    /// `[0, 1)` is admissible there.
    pub fn reciprocal() -> Self {
        Self::new("reciprocal", |t| {
            if t == 0.0 {
                0.0
            } else {
                (1.0 / (1.0 + t)).min(BELOW_ONE)
            }
        })
    }

    /// `β(t) = √(log(t² + 1)) / t`, with `β(0) = 0`.
    ///
    /// Below `t ≈ 1e-8` the exact value rounds to 1.0 in `f64`; the result is
    /// then pinned to the largest double below 1.
    pub fn log_sqrt() -> Self {
        Self::new("log_sqrt", log_sqrt_beta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates `β(t)`, enforcing the domain `t >= 0` and the codomain `[0, 1)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::BetaDomain {
                name: self.name.clone(),
                t,
            });
        }
        let value = (self.eval)(t);
        if !(0.0..1.0).contains(&value) {
            return Err(Error::BetaCodomain {
                name: self.name.clone(),
                t,
                value,
            });
        }
        Ok(value)
    }
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn log_sqrt_beta(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let v = (t * t).ln_1p().sqrt() / t;
    v.min(BELOW_ONE)
}

/// Free-function form of [`GeraghtyBeta::eval`].
pub fn beta_eval(beta: &GeraghtyBeta, t: f64) -> Result<f64> {
    beta.eval(t)
}

/// Result of sampling `β` over `[delta, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub max_value: f64,
    pub argmax: f64,
    pub admissible: bool,
}

/// Samples `β` on an equispaced grid over `[delta, t_max]`.
///
/// `admissible` means the sampled maximum stays below 1, i.e. `β` is bounded
/// away from 1 on this range. This is evidence for the Geraghty condition,
/// never a proof of it.
pub fn beta_admissibility_probe(
    beta: &GeraghtyBeta,
    delta: f64,
    t_max: f64,
    n_samples: usize,
) -> Result<AdmissibilityReport> {
    if !(delta > 0.0 && delta < t_max && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "admissibility probe needs 0 < delta < t_max, got delta = {delta}, t_max = {t_max}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "admissibility probe needs at least 2 samples".into(),
        ));
    }
    let step = (t_max - delta) / (n_samples - 1) as f64;
    let mut max_value = f64::NEG_INFINITY;
    let mut argmax = delta;
    let mut nonnegative = true;
    for i in 0..n_samples {
        let t = if i + 1 == n_samples {
            t_max
        } else {
            delta + step * i as f64
        };
        let v = beta.eval(t)?;
        nonnegative &= v >= 0.0;
        if v > max_value {
            max_value = v;
            argmax = t;
        }
    }
    Ok(AdmissibilityReport {
        max_value,
        argmax,
        admissible: nonnegative && max_value < 1.0,
    })
}
