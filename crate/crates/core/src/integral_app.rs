//! Fredholm systems `u = ∫ K(t, s, u(s)) ds + h(t)` on a uniform grid over
//! `[0, T]`, with the sup metric, the pointwise order and composite trapezoid
//! quadrature.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order_metric::{GeraghtyBeta, Metric, PartialOrder};
use crate::solver::{extract_coincidence, iterate_sequence, Extraction, IterationStatus, IterationTrace};
use crate::triple::{CheckOutcome, MappingTriple, SelfMap, Side, Verdict};

/// Equality slack for grid functions.
pub const GRID_EQ_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on node spacing.
const SPACING_TOLERANCE: f64 = 1e-12;

/// Node positions `t_i = T i / (n - 1)`, with both endpoints exact.
pub fn uniform_nodes(horizon: f64, n_nodes: usize) -> Vec<f64> {
    let last = (n_nodes - 1) as f64;
    (0..n_nodes)
        .map(|i| {
            if i + 1 == n_nodes {
                horizon
            } else {
                horizon * i as f64 / last
            }
        })
        .collect()
}

#[derive(Deserialize)]
struct RawGrid {
    t_nodes: Vec<f64>,
    values: Vec<f64>,
}

/// Values of a function on equispaced nodes `0 = t_0 < … < t_n = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridFunction {
    t_nodes: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridFunction::new(raw.t_nodes, raw.values)
    }
}

impl GridFunction {
    pub fn new(t_nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t_nodes.len() < 2 {
            return Err(Error::InvalidArgument("a grid needs at least 2 nodes".into()));
        }
        if t_nodes.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} nodes but {} values",
                t_nodes.len(),
                values.len()
            )));
        }
        if t_nodes[0] != 0.0 {
            return Err(Error::InvalidArgument("the first node must be 0".into()));
        }
        let horizon = *t_nodes.last().unwrap();
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(
                "the last node must be a positive horizon".into(),
            ));
        }
        let spacing = horizon / (t_nodes.len() - 1) as f64;
        for w in t_nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
            }
            if (w[1] - w[0] - spacing).abs() > SPACING_TOLERANCE * horizon {
                return Err(Error::InvalidArgument("nodes must be equispaced".into()));
            }
        }
        Ok(Self { t_nodes, values })
    }

    /// Samples `f` on `n_nodes` equispaced nodes over `[0, horizon]`.
    pub fn sample(horizon: f64, n_nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::InvalidArgument("a grid needs at least 2 nodes".into()));
        }
        let t_nodes = uniform_nodes(horizon, n_nodes);
        let values = t_nodes.iter().map(|&t| f(t)).collect();
        Self::new(t_nodes, values)
    }

    pub fn constant(horizon: f64, n_nodes: usize, value: f64) -> Result<Self> {
        Self::sample(horizon, n_nodes, |_| value)
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.t_nodes.last().unwrap()
    }

    pub fn spacing(&self) -> f64 {
        self.horizon() / (self.len() - 1) as f64
    }

    /// Same values, new grid-compatible copy with `values` replaced.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        Ok(Self {
            t_nodes: self.t_nodes.clone(),
            values,
        })
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len()
            && self
                .t_nodes
                .iter()
                .zip(&other.t_nodes)
                .all(|(a, b)| (a - b).abs() <= SPACING_TOLERANCE * self.horizon().max(other.horizon()))
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    /// Writes `t,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.t_nodes.iter().zip(&self.values) {
            writeln!(out, "{t:?},{v:?}")?;
        }
        Ok(())
    }
}

/// `max_i |u_i - v_i|`.
pub fn sup_metric(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_grid(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `u_i <= v_i + GRID_EQ_TOLERANCE` at every node.
pub fn pointwise_leq(u: &GridFunction, v: &GridFunction) -> Result<bool> {
    u.check_grid(v)?;
    Ok(u.values.iter().zip(&v.values).all(|(a, b)| *a <= b + GRID_EQ_TOLERANCE))
}

/// Composite trapezoid rule on equispaced values. Fewer than two values
/// span an empty interval and integrate to 0.
pub fn quadrature(values: &[f64], spacing: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => spacing * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Sup metric as a [`Metric`]; grids that do not match are infinitely far apart.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridSpace;

impl Metric<GridFunction> for GridSpace {
    fn distance(&self, x: &GridFunction, y: &GridFunction) -> f64 {
        sup_metric(x, y).unwrap_or(f64::INFINITY)
    }

    fn eq_tolerance(&self) -> f64 {
        GRID_EQ_TOLERANCE
    }
}

/// Pointwise order; functions on different grids are incomparable.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointwiseOrder;

impl PartialOrder<GridFunction> for PointwiseOrder {
    fn leq(&self, x: &GridFunction, y: &GridFunction) -> bool {
        pointwise_leq(x, y).unwrap_or(false)
    }
}

pub type Kernel = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type Forcing = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type BoundFunction = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Built-in kernels `K(t, s, u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelForm {
    Zero,
    /// `a * u`
    Linear {
        a: f64,
    },
    /// `s`
    Additive,
    /// `a * u + b * s`
    Affine {
        a: f64,
        b: f64,
    },
    /// `scale * sqrt(ln(1 + u^2))`
    LogSqrt {
        scale: f64,
    },
    /// `coefficients[i][j] * u + offsets[i][j]` at the node pair nearest `(t, s)`.
    Table {
        coefficients: Vec<Vec<f64>>,
        offsets: Vec<Vec<f64>>,
    },
}

fn nearest_node(x: f64, horizon: f64, n_nodes: usize) -> usize {
    let i = (x / horizon * (n_nodes - 1) as f64).round();
    (i.max(0.0) as usize).min(n_nodes - 1)
}

fn check_table(name: &str, rows: &[Vec<f64>], n_nodes: usize) -> Result<()> {
    if rows.len() != n_nodes || rows.iter().any(|r| r.len() != n_nodes) {
        return Err(Error::InvalidArgument(format!(
            "{name} table must be {n_nodes} x {n_nodes}"
        )));
    }
    Ok(())
}

impl KernelForm {
    pub fn build(&self, horizon: f64, n_nodes: usize) -> Result<Kernel> {
        Ok(match self.clone() {
            KernelForm::Zero => Arc::new(|_, _, _| 0.0),
            KernelForm::Linear { a } => Arc::new(move |_, _, u| a * u),
            KernelForm::Additive => Arc::new(|_, s, _| s),
            KernelForm::Affine { a, b } => Arc::new(move |_, s, u| a * u + b * s),
            KernelForm::LogSqrt { scale } => Arc::new(move |_, _, u| scale * (u * u).ln_1p().sqrt()),
            KernelForm::Table { coefficients, offsets } => {
                check_table("coefficient", &coefficients, n_nodes)?;
                check_table("offset", &offsets, n_nodes)?;
                Arc::new(move |t, s, u| {
                    let i = nearest_node(t, horizon, n_nodes);
                    let j = nearest_node(s, horizon, n_nodes);
                    coefficients[i][j] * u + offsets[i][j]
                })
            }
        })
    }
}

/// Built-in forcing terms `h(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingForm {
    Constant {
        value: f64,
    },
    /// `slope * t + intercept`
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// One value per node.
    Table {
        values: Vec<f64>,
    },
}

impl ForcingForm {
    pub fn build(&self, horizon: f64, n_nodes: usize) -> Result<Forcing> {
        Ok(match self.clone() {
            ForcingForm::Constant { value } => Arc::new(move |_| value),
            ForcingForm::Linear { slope, intercept } => Arc::new(move |t| slope * t + intercept),
            ForcingForm::Table { values } => {
                if values.len() != n_nodes {
                    return Err(Error::InvalidArgument(format!(
                        "forcing table has {} values for {n_nodes} nodes",
                        values.len()
                    )));
                }
                Arc::new(move |t| values[nearest_node(t, horizon, n_nodes)])
            }
        })
    }
}

/// Built-in bound functions `G(t, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundForm {
    Constant { value: f64 },
}

impl BoundForm {
    pub fn build(&self) -> Result<BoundFunction> {
        match *self {
            BoundForm::Constant { value } => {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::InvalidArgument("bound function must be nonnegative".into()));
                }
                Ok(Arc::new(move |_, _| value))
            }
        }
    }
}

/// The system `u = ∫₀ᵀ K_1(t, s, u(s)) ds + h(t)`, `u = ∫₀ᵀ K_2(t, s, u(s)) ds + h(t)`
/// on `grid_n` nodes.
#[derive(Clone)]
pub struct IntegralProblem {
    pub first_kernel: Kernel,
    pub second_kernel: Kernel,
    pub forcing: Forcing,
    pub bound: BoundFunction,
    pub horizon: f64,
    pub grid_n: usize,
}

impl fmt::Debug for IntegralProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralProblem")
            .field("horizon", &self.horizon)
            .field("grid_n", &self.grid_n)
            .finish_non_exhaustive()
    }
}

impl IntegralProblem {
    pub fn new(
        first_kernel: Kernel,
        second_kernel: Kernel,
        forcing: Forcing,
        bound: BoundFunction,
        horizon: f64,
        grid_n: usize,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if grid_n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid_n must be at least 2, got {grid_n}"
            )));
        }
        Ok(Self {
            first_kernel,
            second_kernel,
            forcing,
            bound,
            horizon,
            grid_n,
        })
    }

    /// Both equations with the same kernel.
    pub fn symmetric(
        kernel: Kernel,
        forcing: Forcing,
        bound: BoundFunction,
        horizon: f64,
        grid_n: usize,
    ) -> Result<Self> {
        Self::new(kernel.clone(), kernel, forcing, bound, horizon, grid_n)
    }

    pub fn from_forms(
        first: &KernelForm,
        second: &KernelForm,
        forcing: &ForcingForm,
        bound: &BoundForm,
        horizon: f64,
        grid_n: usize,
    ) -> Result<Self> {
        if grid_n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid_n must be at least 2, got {grid_n}"
            )));
        }
        Self::new(
            first.build(horizon, grid_n)?,
            second.build(horizon, grid_n)?,
            forcing.build(horizon, grid_n)?,
            bound.build()?,
            horizon,
            grid_n,
        )
    }

    pub fn kernel(&self, side: Side) -> &Kernel {
        match side {
            Side::F => &self.first_kernel,
            Side::G => &self.second_kernel,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        uniform_nodes(self.horizon, self.grid_n)
    }

    pub fn spacing(&self) -> f64 {
        self.horizon / (self.grid_n - 1) as f64
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::sample(self.horizon, self.grid_n, f)
    }

    /// `h` on the problem grid.
    pub fn forcing_on_grid(&self) -> Result<GridFunction> {
        let h = self.sample(|t| (self.forcing)(t))?;
        if let Some(i) = h.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "forcing is not finite at t = {}",
                h.t_nodes()[i]
            )));
        }
        Ok(h)
    }

    fn check_on_grid(&self, u: &GridFunction) -> Result<()> {
        if u.len() != self.grid_n || (u.horizon() - self.horizon).abs() > SPACING_TOLERANCE * self.horizon {
            return Err(Error::GridMismatch {
                left: self.grid_n,
                right: u.len(),
            });
        }
        Ok(())
    }
}

/// `t_i ↦ Σ_j w_j K(t_i, s_j, u_j) + h(t_i)` with trapezoid weights `w_j`,
/// using `K_1` for [`Side::F`] and `K_2` for [`Side::G`].
pub fn apply_operator(side: Side, problem: &IntegralProblem, u: &GridFunction) -> Result<GridFunction> {
    problem.check_on_grid(u)?;
    let kernel = problem.kernel(side);
    let nodes = u.t_nodes();
    let spacing = u.spacing();
    let values = nodes
        .par_iter()
        .map(|&t| {
            let mut integrand = Vec::with_capacity(nodes.len());
            for (&s, &us) in nodes.iter().zip(u.values()) {
                let k = kernel(t, s, us);
                if !k.is_finite() {
                    return Err(Error::NonFiniteKernel { t, s, u: us });
                }
                integrand.push(k);
            }
            let h = (problem.forcing)(t);
            if !h.is_finite() {
                return Err(Error::InvalidArgument(format!("forcing is not finite at t = {t}")));
            }
            Ok(quadrature(&integrand, spacing) + h)
        })
        .collect::<Result<Vec<f64>>>()?;
    u.with_values(values)
}

/// One of the two integral operators as a [`SelfMap`].
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    pub problem: Arc<IntegralProblem>,
    pub side: Side,
}

impl SelfMap<GridFunction> for IntegralOperator {
    fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        apply_operator(self.side, &self.problem, x)
    }
}

/// The triple `(f, g, id)` on the grid space with `β(t) = sqrt(ln(1 + t²)) / t`.
pub fn integral_triple(problem: &IntegralProblem) -> MappingTriple<GridFunction> {
    let problem = Arc::new(problem.clone());
    MappingTriple::with_identity(
        Arc::new(GridSpace),
        Arc::new(PointwiseOrder),
        GeraghtyBeta::log_sqrt(),
        Arc::new(IntegralOperator {
            problem: problem.clone(),
            side: Side::F,
        }),
        Arc::new(IntegralOperator { problem, side: Side::G }),
    )
}

/// Which of the two order-preservation inequalities failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderInequality {
    /// `K_1(t, s, u(t)) <= K_2(t, s, f(u)(s))`
    FirstBelowSecond,
    /// `K_2(t, s, u(t)) <= K_1(t, s, g(u)(s))`
    SecondBelowFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderPreservationWitness {
    /// Index into the probe functions.
    pub probe: usize,
    pub inequality: OrderInequality,
    pub t_index: usize,
    pub s_index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundWitness {
    pub t: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundIntegralWitness {
    pub t: f64,
    pub integral: f64,
    pub limit: f64,
}

/// Verdicts for the kernel conditions of the integral system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHypothesisReport {
    pub order_preservation: CheckOutcome<OrderPreservationWitness>,
    pub kernel_bound: CheckOutcome<KernelBoundWitness>,
    pub bound_square_integral: CheckOutcome<BoundIntegralWitness>,
    pub notes: Vec<String>,
}

impl KernelHypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.order_preservation.verdict.is_fail() {
            out.push("order_preservation");
        }
        if self.kernel_bound.verdict.is_fail() {
            out.push("kernel_bound");
        }
        if self.bound_square_integral.verdict.is_fail() {
            out.push("bound_square_integral");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheckOptions {
    pub seed: u64,
    /// Random `(t, s, x, y)` draws for the kernel bound.
    pub samples: usize,
    /// Range for `x, y`. Defaults to the hull of the probe values and their
    /// images, widened by 1 on each side.
    pub value_range: Option<(f64, f64)>,
}

impl Default for KernelCheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 2000,
            value_range: None,
        }
    }
}

/// Evaluates the order-preservation inequality named by `witness`; true when it fails.
pub fn order_witness_fails(
    problem: &IntegralProblem,
    probe: &GridFunction,
    witness: &OrderPreservationWitness,
) -> Result<bool> {
    let (own, other, side) = match witness.inequality {
        OrderInequality::FirstBelowSecond => (&problem.first_kernel, &problem.second_kernel, Side::F),
        OrderInequality::SecondBelowFirst => (&problem.second_kernel, &problem.first_kernel, Side::G),
    };
    let image = apply_operator(side, problem, probe)?;
    let t = probe.t_nodes()[witness.t_index];
    let s = probe.t_nodes()[witness.s_index];
    let lhs = own(t, s, probe.values()[witness.t_index]);
    let rhs = other(t, s, image.values()[witness.s_index]);
    Ok(!(lhs <= rhs + GRID_EQ_TOLERANCE))
}

/// `|K_1(t, s, x) - K_2(t, s, y)|` against `G(t, s) sqrt(ln(1 + (x - y)²))`.
/// Returns `(lhs, bound)`.
pub fn kernel_bound_at(problem: &IntegralProblem, t: f64, s: f64, x: f64, y: f64) -> (f64, f64) {
    let lhs = ((problem.first_kernel)(t, s, x) - (problem.second_kernel)(t, s, y)).abs();
    let d = x - y;
    let bound = (problem.bound)(t, s) * (d * d).ln_1p().sqrt();
    (lhs, bound)
}

pub fn kernel_bound_fails(problem: &IntegralProblem, witness: &KernelBoundWitness) -> bool {
    let (lhs, bound) = kernel_bound_at(problem, witness.t, witness.s, witness.x, witness.y);
    !(lhs <= bound + GRID_EQ_TOLERANCE)
}

/// Trapezoid estimate of `∫₀ᵀ G(t, s)² ds` on the problem grid.
pub fn bound_square_integral_at(problem: &IntegralProblem, t: f64) -> f64 {
    let squares: Vec<f64> = problem
        .nodes()
        .iter()
        .map(|&s| {
            let g = (problem.bound)(t, s);
            g * g
        })
        .collect();
    quadrature(&squares, problem.spacing())
}

pub fn bound_integral_fails(problem: &IntegralProblem, witness: &BoundIntegralWitness) -> bool {
    !(bound_square_integral_at(problem, witness.t) <= 1.0 / problem.horizon + GRID_EQ_TOLERANCE)
}

fn check_order_preservation(
    problem: &IntegralProblem,
    probes: &[GridFunction],
) -> Result<CheckOutcome<OrderPreservationWitness>> {
    let nodes = problem.nodes();
    let mut checked = 0;
    for (p, u) in probes.iter().enumerate() {
        let fu = apply_operator(Side::F, problem, u)?;
        let gu = apply_operator(Side::G, problem, u)?;
        for (i, &t) in nodes.iter().enumerate() {
            for (j, &s) in nodes.iter().enumerate() {
                let cases = [
                    (
                        OrderInequality::FirstBelowSecond,
                        (problem.first_kernel)(t, s, u.values()[i]),
                        (problem.second_kernel)(t, s, fu.values()[j]),
                    ),
                    (
                        OrderInequality::SecondBelowFirst,
                        (problem.second_kernel)(t, s, u.values()[i]),
                        (problem.first_kernel)(t, s, gu.values()[j]),
                    ),
                ];
                for (inequality, lhs, rhs) in cases {
                    checked += 1;
                    if !(lhs <= rhs + GRID_EQ_TOLERANCE) {
                        return Ok(CheckOutcome {
                            verdict: Verdict::Fails(OrderPreservationWitness {
                                probe: p,
                                inequality,
                                t_index: i,
                                s_index: j,
                                lhs,
                                rhs,
                            }),
                            checked,
                            skipped: 0,
                            notes: Vec::new(),
                        });
                    }
                }
            }
        }
    }
    Ok(CheckOutcome {
        verdict: Verdict::SampledOk,
        checked,
        skipped: 0,
        notes: vec![format!("checked on {} probe functions only", probes.len())],
    })
}

fn probe_value_range(problem: &IntegralProblem, probes: &[GridFunction]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for u in probes {
        for w in [
            u.clone(),
            apply_operator(Side::F, problem, u)?,
            apply_operator(Side::G, problem, u)?,
        ] {
            for &v in w.values() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    Ok((lo - 1.0, hi + 1.0))
}

fn check_kernel_bound(
    problem: &IntegralProblem,
    range: (f64, f64),
    options: &KernelCheckOptions,
) -> CheckOutcome<KernelBoundWitness> {
    let nodes = problem.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (lo, hi) = range;
    for k in 0..options.samples {
        let t = nodes[rng.random_range(0..nodes.len())];
        let s = nodes[rng.random_range(0..nodes.len())];
        let a = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let b = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let (x, y) = if a >= b { (a, b) } else { (b, a) };
        let (lhs, bound) = kernel_bound_at(problem, t, s, x, y);
        if !(lhs <= bound + GRID_EQ_TOLERANCE) {
            return CheckOutcome {
                verdict: Verdict::Fails(KernelBoundWitness { t, s, x, y, lhs, bound }),
                checked: k + 1,
                skipped: 0,
                notes: Vec::new(),
            };
        }
    }
    CheckOutcome {
        verdict: Verdict::SampledOk,
        checked: options.samples,
        skipped: 0,
        notes: vec![format!("values sampled from [{lo}, {hi}]")],
    }
}

fn check_bound_square_integral(problem: &IntegralProblem) -> CheckOutcome<BoundIntegralWitness> {
    let limit = 1.0 / problem.horizon;
    let nodes = problem.nodes();
    for (i, &t) in nodes.iter().enumerate() {
        let integral = bound_square_integral_at(problem, t);
        if !(integral <= limit + GRID_EQ_TOLERANCE) {
            return CheckOutcome {
                verdict: Verdict::Fails(BoundIntegralWitness { t, integral, limit }),
                checked: i + 1,
                skipped: 0,
                notes: Vec::new(),
            };
        }
    }
    CheckOutcome {
        verdict: Verdict::Holds,
        checked: nodes.len(),
        skipped: 0,
        notes: vec!["exact for the grid and trapezoid rule, not for the continuum integral".into()],
    }
}

/// Checks order preservation on `probes`, the kernel bound on random samples
/// and the square-integral bound on the grid.
pub fn check_kernel_hypotheses(
    problem: &IntegralProblem,
    probes: &[GridFunction],
    options: &KernelCheckOptions,
) -> Result<KernelHypothesisReport> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("at least one probe function is required".into()));
    }
    for u in probes {
        problem.check_on_grid(u)?;
    }
    let range = match options.value_range {
        Some(r) => r,
        None => probe_value_range(problem, probes)?,
    };
    Ok(KernelHypothesisReport {
        order_preservation: check_order_preservation(problem, probes)?,
        kernel_bound: check_kernel_bound(problem, range, options),
        bound_square_integral: check_bound_square_integral(problem),
        notes: vec!["continuity of the kernels and forcing is assumed".into()],
    })
}

/// A finished run of the alternating scheme on the integral system.
#[derive(Debug, Clone)]
pub struct IntegralRun {
    pub trace: IterationTrace<GridFunction>,
    pub extraction: Extraction<GridFunction>,
}

/// Runs the scheme from `u0` (default: `h` on the grid) without turning
/// failures into errors.
pub fn run_integral(
    problem: &IntegralProblem,
    u0: Option<GridFunction>,
    max_iter: usize,
    tol: f64,
) -> Result<IntegralRun> {
    let u0 = match u0 {
        Some(u) => {
            problem.check_on_grid(&u)?;
            u
        }
        None => problem.forcing_on_grid()?,
    };
    let triple = integral_triple(problem);
    let trace = iterate_sequence(&triple, u0, max_iter, tol)?;
    let extraction = extract_coincidence(&triple, &trace, tol)?;
    Ok(IntegralRun { trace, extraction })
}

#[derive(Debug, Clone)]
pub struct IntegralSolution {
    pub solution: GridFunction,
    pub trace: IterationTrace<GridFunction>,
    pub residual_f: f64,
    pub residual_g: f64,
}

/// Common fixed point of the two integral operators, with
/// `sup |f(u*) - u*| <= tol` and `sup |g(u*) - u*| <= tol`.
pub fn solve_integral(
    problem: &IntegralProblem,
    u0: Option<GridFunction>,
    max_iter: usize,
    tol: f64,
) -> Result<IntegralSolution> {
    let IntegralRun { trace, extraction } = run_integral(problem, u0, max_iter, tol)?;
    match trace.status {
        IterationStatus::Converged => {}
        IterationStatus::OrderViolation => {
            return Err(Error::OrderViolation { step: trace.steps() });
        }
        IterationStatus::ContractionViolation => {
            let step = trace.violation.map_or(trace.steps(), |v| v.step);
            return Err(Error::ContractionViolation { step });
        }
        IterationStatus::MaxIterations => {
            return Err(Error::NotConverged {
                iterations: trace.steps(),
                last_step: trace.distance_limit_estimate,
            });
        }
    }
    match extraction {
        Extraction::Found(point) => Ok(IntegralSolution {
            solution: point.u,
            trace,
            residual_f: point.residual_fh,
            residual_g: point.residual_gh,
        }),
        Extraction::NotFound {
            residual_fh,
            residual_gh,
            ..
        } => Err(Error::ResidualTooLarge {
            residual_f: residual_fh.unwrap_or(f64::NAN),
            residual_g: residual_gh.unwrap_or(f64::NAN),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_kernel() -> Kernel {
        Arc::new(|_, _, _| 0.0)
    }

    fn constant_forcing(c: f64) -> Forcing {
        Arc::new(move |_| c)
    }

    fn constant_bound(c: f64) -> BoundFunction {
        Arc::new(move |_, _| c)
    }

    fn linear_problem(a: f64, h: f64, grid_n: usize) -> IntegralProblem {
        IntegralProblem::symmetric(
            Arc::new(move |_, _, u| a * u),
            constant_forcing(h),
            constant_bound(1.0),
            1.0,
            grid_n,
        )
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 0.6, 1.0], vec![0.0; 3]).is_err());
        assert!(GridFunction::new(vec![0.1, 0.5, 0.9], vec![0.0; 3]).is_err());
        assert!(GridFunction::new(vec![0.0], vec![0.0]).is_err());
        let nodes = uniform_nodes(3.0, 31);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[30], 3.0);
        assert!(GridFunction::new(nodes, vec![0.0; 31]).is_ok());
    }

    #[test]
    fn json_rejects_uneven_nodes() {
        let ok: GridFunction = serde_json::from_str(r#"{"t_nodes":[0.0,0.5,1.0],"values":[1,2,3]}"#).unwrap();
        assert_eq!(ok.values(), &[1.0, 2.0, 3.0]);
        assert!(serde_json::from_str::<GridFunction>(r#"{"t_nodes":[0.0,0.7,1.0],"values":[1,2,3]}"#).is_err());
    }

    #[test]
    fn sup_metric_examples() {
        let one = GridFunction::constant(1.0, 11, 1.0).unwrap();
        let zero = GridFunction::constant(1.0, 11, 0.0).unwrap();
        assert_eq!(sup_metric(&one, &zero).unwrap(), 1.0);
        assert_eq!(sup_metric(&one, &one).unwrap(), 0.0);

        let u = GridFunction::sample(1.0, 11, |t| t).unwrap();
        let v = GridFunction::sample(1.0, 11, |t| t * t).unwrap();
        // max of t - t² over {0, 0.1, ..., 1}
        let oracle = (0..=10)
            .map(|i| {
                let t = i as f64 / 10.0;
                t - t * t
            })
            .fold(0.0, f64::max);
        assert_eq!(oracle, 0.25);
        assert_eq!(sup_metric(&u, &v).unwrap(), oracle);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = GridFunction::constant(1.0, 11, 0.0).unwrap();
        let b = GridFunction::constant(1.0, 21, 0.0).unwrap();
        let c = GridFunction::constant(2.0, 11, 0.0).unwrap();
        assert!(matches!(
            sup_metric(&a, &b),
            Err(Error::GridMismatch { left: 11, right: 21 })
        ));
        assert!(matches!(pointwise_leq(&a, &c), Err(Error::GridMismatch { .. })));
        assert_eq!(GridSpace.distance(&a, &b), f64::INFINITY);
        assert!(!PointwiseOrder.leq(&a, &c));
    }

    #[test]
    fn pointwise_order_examples() {
        let zero = GridFunction::constant(1.0, 2, 0.0).unwrap();
        let one = GridFunction::constant(1.0, 2, 1.0).unwrap();
        assert!(pointwise_leq(&zero, &one).unwrap());
        assert!(pointwise_leq(&one, &one).unwrap());
        let up = GridFunction::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let down = GridFunction::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(!pointwise_leq(&up, &down).unwrap());
        assert!(!pointwise_leq(&down, &up).unwrap());
    }

    #[test]
    fn quadrature_examples() {
        assert_eq!(quadrature(&[2.5; 11], 0.3), 2.5 * 3.0);
        assert_eq!(quadrature(&[0.0, 0.5, 1.0], 0.5), 0.5);
        let squares: Vec<f64> = uniform_nodes(1.0, 101).iter().map(|t| t * t).collect();
        let est = quadrature(&squares, 0.01);
        assert!((est - 1.0 / 3.0).abs() <= 2e-5);
        // composite trapezoid error for t² with h = 0.01 is h²/6
        assert!((est - 1.0 / 3.0 - 1e-4 / 6.0).abs() < 1e-14);
        assert_eq!(quadrature(&[4.0], 1.0), 0.0);
    }

    #[test]
    fn operator_examples() {
        let any_u = GridFunction::sample(1.0, 21, |t| (5.0 * t).sin()).unwrap();
        let zero =
            IntegralProblem::symmetric(zero_kernel(), constant_forcing(1.0), constant_bound(0.0), 1.0, 21).unwrap();
        let out = apply_operator(Side::F, &zero, &any_u).unwrap();
        assert!(out.values().iter().all(|&v| v == 1.0));

        let linear = linear_problem(0.1, 1.0, 101);
        let one = GridFunction::constant(1.0, 101, 1.0).unwrap();
        let out = apply_operator(Side::G, &linear, &one).unwrap();
        assert!(out.values().iter().all(|&v| (v - 1.1).abs() < 1e-14));

        let additive = IntegralProblem::symmetric(
            Arc::new(|_, s, _| s),
            constant_forcing(0.0),
            constant_bound(1.0),
            1.0,
            101,
        )
        .unwrap();
        let out = apply_operator(Side::F, &additive, &one).unwrap();
        assert!(out.values().iter().all(|&v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn operator_selects_kernel() {
        let p = IntegralProblem::new(
            Arc::new(|_, _, _| 1.0),
            Arc::new(|_, _, _| 2.0),
            constant_forcing(0.0),
            constant_bound(1.0),
            2.0,
            5,
        )
        .unwrap();
        let u = GridFunction::constant(2.0, 5, 0.0).unwrap();
        assert_eq!(apply_operator(Side::F, &p, &u).unwrap().values(), &[2.0; 5]);
        assert_eq!(apply_operator(Side::G, &p, &u).unwrap().values(), &[4.0; 5]);
    }

    #[test]
    fn non_finite_kernel_reports_coordinates() {
        let p = IntegralProblem::symmetric(
            Arc::new(|_, s, u| if s > 0.7 { u / 0.0 } else { 0.0 }),
            constant_forcing(0.0),
            constant_bound(1.0),
            1.0,
            11,
        )
        .unwrap();
        let u = GridFunction::constant(1.0, 11, 1.0).unwrap();
        match apply_operator(Side::F, &p, &u) {
            Err(Error::NonFiniteKernel { s, u, .. }) => {
                assert!((s - 0.8).abs() < 1e-12);
                assert_eq!(u, 1.0);
            }
            other => panic!("expected NonFiniteKernel, got {other:?}"),
        }
    }

    #[test]
    fn operator_rejects_foreign_grid() {
        let p = linear_problem(0.1, 1.0, 11);
        let u = GridFunction::constant(1.0, 12, 1.0).unwrap();
        assert!(matches!(
            apply_operator(Side::F, &p, &u),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn problem_validation() {
        assert!(
            IntegralProblem::symmetric(zero_kernel(), constant_forcing(0.0), constant_bound(0.0), 0.0, 11).is_err()
        );
        assert!(IntegralProblem::symmetric(zero_kernel(), constant_forcing(0.0), constant_bound(0.0), 1.0, 1).is_err());
    }

    #[test]
    fn kernel_forms() {
        let k = KernelForm::Affine { a: 2.0, b: 3.0 }.build(1.0, 3).unwrap();
        assert_eq!(k(0.0, 0.5, 1.0), 3.5);
        let k = KernelForm::LogSqrt { scale: 2.0 }.build(1.0, 3).unwrap();
        assert!((k(0.0, 0.0, 1.0) - 2.0 * 2f64.ln().sqrt()).abs() < 1e-15);
        let table = KernelForm::Table {
            coefficients: vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]],
            offsets: vec![vec![0.0; 3]; 3],
        };
        let k = table.build(1.0, 3).unwrap();
        assert_eq!(k(0.5, 1.0, 2.0), 12.0);
        assert!(table.build(1.0, 4).is_err());
        let f = ForcingForm::Table {
            values: vec![1.0, 2.0, 3.0],
        }
        .build(2.0, 3)
        .unwrap();
        assert_eq!(f(1.0), 2.0);
        assert!(BoundForm::Constant { value: -1.0 }.build().is_err());
        let parsed: KernelForm = serde_json::from_str(r#"{"form":"linear","a":0.1}"#).unwrap();
        assert_eq!(parsed, KernelForm::Linear { a: 0.1 });
        assert!(serde_json::from_str::<KernelForm>(r#"{"form":"linear","a":0.1,"b":1}"#).is_err());
    }

    #[test]
    fn hypotheses_trivial_zero_kernels() {
        let p = IntegralProblem::symmetric(zero_kernel(), constant_forcing(3.0), constant_bound(0.0), 1.0, 11).unwrap();
        let probes = vec![
            p.forcing_on_grid().unwrap(),
            GridFunction::sample(1.0, 11, |t| -t).unwrap(),
        ];
        let r = check_kernel_hypotheses(&p, &probes, &KernelCheckOptions::default()).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.bound_square_integral.verdict, Verdict::Holds);
        assert_eq!(r.order_preservation.verdict, Verdict::SampledOk);
        assert_eq!(r.kernel_bound.verdict, Verdict::SampledOk);
    }

    #[test]
    fn square_integral_exact_at_boundary() {
        let p =
            IntegralProblem::symmetric(zero_kernel(), constant_forcing(0.0), constant_bound(1.0), 1.0, 101).unwrap();
        assert_eq!(bound_square_integral_at(&p, 0.3), 1.0);
        let probes = vec![p.forcing_on_grid().unwrap()];
        let r = check_kernel_hypotheses(&p, &probes, &KernelCheckOptions::default()).unwrap();
        assert_eq!(r.bound_square_integral.verdict, Verdict::Holds);

        let p = IntegralProblem::symmetric(zero_kernel(), constant_forcing(0.0), constant_bound(1.0), 2.0, 21).unwrap();
        let r = check_kernel_hypotheses(&p, &[p.forcing_on_grid().unwrap()], &KernelCheckOptions::default()).unwrap();
        let w = r.bound_square_integral.verdict.witness().unwrap().clone();
        assert_eq!(w.integral, 2.0);
        assert_eq!(w.limit, 0.5);
        assert!(bound_integral_fails(&p, &w));
    }

    #[test]
    fn kernel_bound_fails_for_identity_kernels_without_bound() {
        let p = IntegralProblem::new(
            Arc::new(|_, _, x| x),
            Arc::new(|_, _, y| y),
            constant_forcing(0.0),
            constant_bound(0.0),
            1.0,
            11,
        )
        .unwrap();
        let probes = vec![p.forcing_on_grid().unwrap()];
        let r = check_kernel_hypotheses(&p, &probes, &KernelCheckOptions::default()).unwrap();
        let w = r.kernel_bound.verdict.witness().expect("must fail").clone();
        assert!(w.x > w.y);
        assert_eq!(w.lhs, w.x - w.y);
        assert_eq!(w.bound, 0.0);
        assert!(kernel_bound_fails(&p, &w));
    }

    #[test]
    fn order_preservation_witness_replays() {
        // K_1 = 1 everywhere, K_2 = 0: the first inequality fails at once.
        let p = IntegralProblem::new(
            Arc::new(|_, _, _| 1.0),
            Arc::new(|_, _, _| 0.0),
            constant_forcing(0.0),
            constant_bound(1.0),
            1.0,
            5,
        )
        .unwrap();
        let probe = GridFunction::constant(1.0, 5, 0.0).unwrap();
        let r = check_kernel_hypotheses(&p, std::slice::from_ref(&probe), &KernelCheckOptions::default()).unwrap();
        let w = r.order_preservation.verdict.witness().unwrap().clone();
        assert_eq!(w.inequality, OrderInequality::FirstBelowSecond);
        assert!(order_witness_fails(&p, &probe, &w).unwrap());
        assert_eq!(r.failures()[0], "order_preservation");
    }

    #[test]
    fn solve_zero_kernel_in_one_step() {
        let p = IntegralProblem::symmetric(zero_kernel(), constant_forcing(1.0), constant_bound(0.0), 1.0, 11).unwrap();
        let sol = solve_integral(&p, None, 50, 1e-10).unwrap();
        assert_eq!(sol.trace.steps(), 1);
        assert!(sol.solution.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn solve_linear_kernel_closed_form() {
        let p = linear_problem(0.1, 1.0, 101);
        let sol = solve_integral(&p, None, 200, 1e-12).unwrap();
        let exact = 1.0 / (1.0 - 0.1);
        assert!(sol.solution.values().iter().all(|&v| (v - exact).abs() <= 1e-6));
        assert!(sol.residual_f <= 1e-12 && sol.residual_g <= 1e-12);
    }

    #[test]
    fn solve_additive_kernel() {
        let p = IntegralProblem::symmetric(
            Arc::new(|_, s, _| s),
            constant_forcing(0.0),
            constant_bound(1.0),
            1.0,
            101,
        )
        .unwrap();
        let sol = solve_integral(&p, None, 50, 1e-10).unwrap();
        // y_0 = 0.5, then a zero step confirms it
        assert_eq!(sol.trace.steps(), 1);
        assert!(sol.solution.values().iter().all(|&v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn solve_reports_order_violation() {
        // K = -0.5 u with h = 1 from u0 = h: 0.5, 0.75, 0.625, ...
        let p = linear_problem(-0.5, 1.0, 11);
        match solve_integral(&p, None, 100, 1e-10) {
            Err(Error::OrderViolation { step }) => assert_eq!(step, 2),
            other => panic!("expected OrderViolation, got {other:?}"),
        }
    }

    #[test]
    fn solve_reports_non_convergence() {
        let p = linear_problem(0.1, 1.0, 11);
        assert!(matches!(
            solve_integral(&p, None, 3, 1e-14),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn solve_reports_contraction_violation() {
        // K = 1.5 u from u0 = 100: the first step has d = 75 > sqrt(ln(1 + 50²)).
        let p = linear_problem(1.5, 0.0, 11);
        let u0 = GridFunction::constant(1.0, 11, 100.0).unwrap();
        assert!(matches!(
            solve_integral(&p, Some(u0), 100, 1e-10),
            Err(Error::ContractionViolation { step: 1 })
        ));
    }

    #[test]
    fn refinement_is_second_order() {
        // K = 0.1 u(s) + s², h = 0: the grid solution is the constant
        // (1/3 + h²/6) / 0.9 against 1/3 / 0.9 in the continuum.
        let kernel: Kernel = Arc::new(|_, s, u| 0.1 * u + s * s);
        let exact = (1.0 / 3.0) / 0.9;
        let mut errors = Vec::new();
        for n in [101, 201] {
            let p =
                IntegralProblem::symmetric(kernel.clone(), constant_forcing(0.0), constant_bound(1.0), 1.0, n).unwrap();
            let sol = solve_integral(&p, None, 500, 1e-14).unwrap();
            let spacing = 1.0 / (n - 1) as f64;
            let discrete = (1.0 / 3.0 + spacing * spacing / 6.0) / 0.9;
            let err_discrete = sol
                .solution
                .values()
                .iter()
                .map(|v| (v - discrete).abs())
                .fold(0.0, f64::max);
            assert!(err_discrete < 1e-12, "grid {n}: {err_discrete}");
            errors.push(
                sol.solution
                    .values()
                    .iter()
                    .map(|v| (v - exact).abs())
                    .fold(0.0, f64::max),
            );
        }
        let ratio = errors[0] / errors[1];
        assert!((ratio - 4.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn csv_output() {
        let u = GridFunction::sample(1.0, 3, |t| 2.0 * t).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n0.0,0.0\n0.5,1.0\n1.0,2.0\n");
    }

    fn comparable_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(0.0f64..3.0, n),
            )
                .prop_map(|(u, bump)| {
                    let v = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
                    (u, v)
                })
        })
    }

    proptest! {
        #[test]
        fn operator_is_monotone((u, v) in comparable_pair(), a in 0.0f64..2.0, b in -1.0f64..1.0) {
            let n = u.len();
            let p = IntegralProblem::new(
                Arc::new(move |_, s, x| a * x + b * s),
                Arc::new(move |t, _, x| a * x.tanh() + t),
                constant_forcing(0.3),
                constant_bound(1.0),
                1.5,
                n,
            ).unwrap();
            let gu = GridFunction::new(uniform_nodes(1.5, n), u).unwrap();
            let gv = gu.with_values(v).unwrap();
            prop_assert!(pointwise_leq(&gu, &gv).unwrap());
            for side in [Side::F, Side::G] {
                let fu = apply_operator(side, &p, &gu).unwrap();
                let fv = apply_operator(side, &p, &gv).unwrap();
                prop_assert!(pointwise_leq(&fu, &fv).unwrap());
            }
        }

        #[test]
        fn log_sqrt_kernel_realizes_contraction((u, v) in comparable_pair(), horizon in 0.2f64..3.0) {
            let n = u.len();
            let scale = 1.0 / horizon;
            let p = IntegralProblem::symmetric(
                KernelForm::LogSqrt { scale }.build(horizon, n).unwrap(),
                constant_forcing(1.0),
                constant_bound(scale),
                horizon,
                n,
            ).unwrap();
            let gu = GridFunction::new(uniform_nodes(horizon, n), u).unwrap();
            let gv = gu.with_values(v).unwrap();
            let d = sup_metric(&gu, &gv).unwrap();
            let lhs = sup_metric(
                &apply_operator(Side::F, &p, &gu).unwrap(),
                &apply_operator(Side::G, &p, &gv).unwrap(),
            ).unwrap();
            prop_assert!(lhs <= (d * d).ln_1p().sqrt() + 1e-12);
        }

        #[test]
        fn solution_independent_of_start(a in 0.0f64..0.5, c in 0.0f64..2.0) {
            let p = linear_problem(a, c, 21);
            let tol = 1e-11;
            let from_h = solve_integral(&p, None, 500, tol).unwrap();
            let zero = GridFunction::constant(1.0, 21, 0.0).unwrap();
            let from_zero = solve_integral(&p, Some(zero), 500, tol).unwrap();
            prop_assert!(sup_metric(&from_h.solution, &from_zero.solution).unwrap() <= 10.0 * tol);
        }
    }
}
