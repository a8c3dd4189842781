//! Alternating iteration `H x_{2n+1} = f x_{2n} = y_{2n}`,
//! `H x_{2n+2} = g x_{2n+1} = y_{2n+1}` with runtime monitors, and extraction
//! of coincidence / common fixed points from converged traces.

use std::fmt::Debug;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order_metric::{compare, Metric, PartialOrder};
use crate::triple::{MappingTriple, Side};

/// Tails longer than this are sampled in [`cauchy_diagnostics`].
pub const EXHAUSTIVE_TAIL_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationStatus {
    Converged,
    MaxIterations,
    OrderViolation,
    ContractionViolation,
}

/// The contraction inequality observed to fail at a step of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepViolation {
    pub step: usize,
    pub lhs: f64,
    pub bound: f64,
}

/// The sequences `{x_n}` and `{y_n}` of the alternating scheme.
///
/// `y_seq[k]` is `f(x_seq[k])` for even `k` and `g(x_seq[k])` for odd `k`;
/// `step_distance[k]` and `order_ok[k]` describe the pair `(y_k, y_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace<P> {
    pub x_seq: Vec<P>,
    pub y_seq: Vec<P>,
    pub step_distance: Vec<f64>,
    pub order_ok: Vec<bool>,
    /// Last observed step distance, the estimate of `lim d(y_{n+1}, y_n)`.
    pub distance_limit_estimate: f64,
    pub status: IterationStatus,
    pub eq_tolerance: f64,
    pub violation: Option<StepViolation>,
}

impl<P> IterationTrace<P> {
    pub fn steps(&self) -> usize {
        self.step_distance.len()
    }

    pub fn last_x(&self) -> &P {
        self.x_seq.last().expect("trace always holds x_0")
    }

    pub fn last_y(&self) -> &P {
        self.y_seq.last().expect("trace always holds y_0")
    }

    /// Builds a trace from a y-sequence alone (x-sequence equal to it), as for
    /// `H = id` with a known orbit. Used for diagnostics on external data.
    pub fn from_y_sequence(y_seq: Vec<P>, space: &dyn Metric<P>) -> Self
    where
        P: Clone,
    {
        let step_distance: Vec<f64> = y_seq.windows(2).map(|w| space.distance(&w[0], &w[1])).collect();
        Self {
            x_seq: y_seq.clone(),
            order_ok: vec![true; step_distance.len()],
            distance_limit_estimate: step_distance.last().copied().unwrap_or(0.0),
            y_seq,
            step_distance,
            status: IterationStatus::MaxIterations,
            eq_tolerance: space.eq_tolerance(),
            violation: None,
        }
    }
}

fn side_at(k: usize) -> Side {
    if k.is_multiple_of(2) {
        Side::F
    } else {
        Side::G
    }
}

/// Runs the alternating scheme from `x0`.
///
/// Each step picks `x_{k} = section(y_{k-1})` and evaluates `f` on even and
/// `g` on odd indices. Stops with `Converged` when a step distance is within
/// both the space's equality slack and `tol` (an exact repeat) or two consecutive step
/// distances fall below `tol`; with `OrderViolation` when `y_{k-1} ⪯ y_k`
/// fails; with `ContractionViolation` when the contraction inequality for the
/// pair `(x_{k-1}, x_k)` fails; otherwise after `max_iter` steps.
pub fn iterate_sequence<P>(triple: &MappingTriple<P>, x0: P, max_iter: usize, tol: f64) -> Result<IterationTrace<P>>
where
    P: Clone,
{
    if max_iter < 2 {
        return Err(Error::InvalidArgument("max_iter must be at least 2".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let eq_tol = triple.eq_tolerance();
    let y0 = triple.f.apply(&x0)?;
    let mut h_prev = triple.apply_h(&x0)?;
    let mut trace = IterationTrace {
        x_seq: vec![x0],
        y_seq: vec![y0],
        step_distance: Vec::new(),
        order_ok: Vec::new(),
        distance_limit_estimate: f64::NAN,
        status: IterationStatus::MaxIterations,
        eq_tolerance: eq_tol,
        violation: None,
    };
    let mut small_steps = 0;

    for k in 1..=max_iter {
        let y_prev = trace.y_seq[k - 1].clone();
        let x_k = (triple.section)(&y_prev).ok_or(Error::SectionFailure {
            step: k,
            residual: f64::INFINITY,
        })?;
        let h_k = triple.apply_h(&x_k)?;
        let residual = triple.space.distance(&h_k, &y_prev);
        if !(residual <= eq_tol) {
            return Err(Error::SectionFailure { step: k, residual });
        }
        let y_k = triple.apply(side_at(k), &x_k)?;
        let d = triple.space.distance(&y_prev, &y_k);
        let ordered = triple.order.leq(&y_prev, &y_k);

        trace.x_seq.push(x_k);
        trace.y_seq.push(y_k);
        trace.step_distance.push(d);
        trace.order_ok.push(ordered);
        trace.distance_limit_estimate = d;

        if !ordered {
            trace.status = IterationStatus::OrderViolation;
            return Ok(trace);
        }

        // f is applied at the even index of the pair, g at the odd one.
        let (h_f, h_g) = if k % 2 == 0 { (&h_k, &h_prev) } else { (&h_prev, &h_k) };
        if compare(triple.order.as_ref(), h_f, h_g).is_comparable() {
            let dh = triple.space.distance(h_f, h_g);
            let bound = triple.beta.eval(dh)? * dh;
            if !(d <= bound + eq_tol) {
                trace.violation = Some(StepViolation { step: k, lhs: d, bound });
                trace.status = IterationStatus::ContractionViolation;
                return Ok(trace);
            }
        }
        h_prev = h_k;

        if d <= eq_tol.min(tol) {
            trace.status = IterationStatus::Converged;
            return Ok(trace);
        }
        if d < tol {
            small_steps += 1;
            if small_steps >= 2 {
                trace.status = IterationStatus::Converged;
                return Ok(trace);
            }
        } else {
            small_steps = 0;
        }
    }
    Ok(trace)
}

/// Index `k` of the first pair with `y_k ⋠ y_{k+1}`.
pub fn first_order_break<P>(trace: &IterationTrace<P>, order: &dyn PartialOrder<P>) -> Option<usize> {
    trace.y_seq.windows(2).position(|w| !order.leq(&w[0], &w[1]))
}

/// `y_0 ⪯ y_1 ⪯ …` along the whole trace.
pub fn monitor_order_chain<P>(trace: &IterationTrace<P>, order: &dyn PartialOrder<P>) -> bool {
    first_order_break(trace, order).is_none()
}

/// Step distances are non-increasing, up to the trace's equality slack.
pub fn monitor_distance_monotone<P>(trace: &IterationTrace<P>) -> Result<bool> {
    if trace.step_distance.len() < 2 {
        return Err(Error::InvalidArgument(
            "distance monotonicity needs a trace with at least 3 points".into(),
        ));
    }
    Ok(trace
        .step_distance
        .windows(2)
        .all(|w| w[1] <= w[0] + trace.eq_tolerance))
}

/// Spread of the tail `{y_n : n >= tail_start}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyDiagnostics {
    pub tail_start: usize,
    /// Largest sampled `d(y_m, y_n)` with `m, n >= tail_start`.
    pub tail_spread: f64,
    /// Largest sampled distance within the odd-indexed tail terms, i.e. the
    /// subsequence `H x_{2k}` on which the Cauchy argument runs.
    pub epsilon_estimate: f64,
    /// Argmax pair `(m, n)`, `m < n`, for `tail_spread`.
    pub witness_indices: (usize, usize),
    pub sampled: bool,
}

/// Measures how far the tail of `{y_n}` is from being Cauchy.
///
/// Tails of at most [`EXHAUSTIVE_TAIL_LIMIT`] points are scanned exhaustively;
/// longer tails use that many evenly spaced indices, always including both
/// ends of the tail.
pub fn cauchy_diagnostics<P>(
    trace: &IterationTrace<P>,
    space: &dyn Metric<P>,
    tail_start: usize,
) -> Result<CauchyDiagnostics> {
    let len = trace.y_seq.len();
    if tail_start + 1 >= len {
        return Err(Error::InvalidArgument(format!(
            "tail_start {tail_start} leaves fewer than 2 points in a trace of {len}"
        )));
    }
    let count = len - tail_start;
    let sampled = count > EXHAUSTIVE_TAIL_LIMIT;
    let indices: Vec<usize> = if sampled {
        let m = EXHAUSTIVE_TAIL_LIMIT;
        let mut v: Vec<usize> = (0..m)
            .map(|i| tail_start + (i * (count - 1) + (m - 1) / 2) / (m - 1))
            .collect();
        v.dedup();
        v
    } else {
        (tail_start..len).collect()
    };

    let mut tail_spread = 0.0;
    let mut witness = (indices[0], indices[0]);
    let mut epsilon_estimate: f64 = 0.0;
    for (a, &m) in indices.iter().enumerate() {
        for &n in &indices[a + 1..] {
            let d = space.distance(&trace.y_seq[m], &trace.y_seq[n]);
            if d > tail_spread {
                tail_spread = d;
                witness = (m, n);
            }
            if m % 2 == 1 && n % 2 == 1 {
                epsilon_estimate = epsilon_estimate.max(d);
            }
        }
    }
    Ok(CauchyDiagnostics {
        tail_start,
        tail_spread,
        epsilon_estimate,
        witness_indices: witness,
        sampled,
    })
}

/// A point `u` with `f(u) = g(u) = H(u)` up to the reported residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePoint<P> {
    pub u: P,
    /// The common value `H(u)`.
    pub value: P,
    pub residual_fh: f64,
    pub residual_gh: f64,
    /// `d(u, H(u))`; small when `u` is also a common fixed point.
    pub residual_fixed: f64,
}

impl<P> CoincidencePoint<P> {
    pub fn max_residual(&self) -> f64 {
        self.residual_fh.max(self.residual_gh)
    }

    pub fn is_common_fixed_point(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.residual_fixed <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotFoundReason {
    NotConverged,
    ResidualTooLarge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Extraction<P> {
    Found(CoincidencePoint<P>),
    NotFound {
        reason: NotFoundReason,
        status: IterationStatus,
        residual_fh: Option<f64>,
        residual_gh: Option<f64>,
    },
}

impl<P> Extraction<P> {
    pub fn point(&self) -> Option<&CoincidencePoint<P>> {
        match self {
            Extraction::Found(p) => Some(p),
            Extraction::NotFound { .. } => None,
        }
    }
}

/// Takes the last x-iterate as the limit candidate `u` of a converged trace
/// and accepts it when `d(f(u), H(u))` and `d(g(u), H(u))` are both within `tol`.
pub fn extract_coincidence<P: Clone>(
    triple: &MappingTriple<P>,
    trace: &IterationTrace<P>,
    tol: f64,
) -> Result<Extraction<P>> {
    if trace.status != IterationStatus::Converged {
        return Ok(Extraction::NotFound {
            reason: NotFoundReason::NotConverged,
            status: trace.status,
            residual_fh: None,
            residual_gh: None,
        });
    }
    let u = trace.last_x().clone();
    let hu = triple.apply_h(&u)?;
    let residual_fh = triple.space.distance(&triple.f.apply(&u)?, &hu);
    let residual_gh = triple.space.distance(&triple.g.apply(&u)?, &hu);
    if !(residual_fh <= tol && residual_gh <= tol) {
        return Ok(Extraction::NotFound {
            reason: NotFoundReason::ResidualTooLarge,
            status: trace.status,
            residual_fh: Some(residual_fh),
            residual_gh: Some(residual_gh),
        });
    }
    let residual_fixed = triple.space.distance(&u, &hu);
    Ok(Extraction::Found(CoincidencePoint {
        u,
        value: hu,
        residual_fh,
        residual_gh,
        residual_fixed,
    }))
}

/// Per-start result of [`multistart_uniqueness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome<P> {
    pub start: P,
    pub steps: Option<usize>,
    pub extraction: Option<Extraction<P>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartReport<P> {
    pub outcomes: Vec<StartOutcome<P>>,
    pub points: Vec<CoincidencePoint<P>>,
    /// Every start produced a point and all coincidence values `H(u)` lie
    /// within `10 * tol` of each other.
    pub all_agree: bool,
    /// Largest pairwise distance between coincidence values.
    pub spread: f64,
    pub notes: Vec<String>,
}

/// Runs the scheme from every start and compares the resulting points of
/// coincidence `H(u)`. Starts are processed in parallel; the report keeps the
/// input order. Agreement is evidence for uniqueness, not a proof.
pub fn multistart_uniqueness<P>(
    triple: &MappingTriple<P>,
    starts: &[P],
    max_iter: usize,
    tol: f64,
) -> Result<MultistartReport<P>>
where
    P: Clone + Send + Sync,
{
    if starts.is_empty() {
        return Err(Error::InvalidArgument("multistart needs at least one start".into()));
    }
    let outcomes: Vec<StartOutcome<P>> = starts
        .par_iter()
        .map(|x0| {
            let run = iterate_sequence(triple, x0.clone(), max_iter, tol)
                .and_then(|trace| Ok((trace.steps(), extract_coincidence(triple, &trace, tol)?)));
            match run {
                Ok((steps, extraction)) => StartOutcome {
                    start: x0.clone(),
                    steps: Some(steps),
                    extraction: Some(extraction),
                    error: None,
                },
                Err(e) => StartOutcome {
                    start: x0.clone(),
                    steps: None,
                    extraction: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let points: Vec<CoincidencePoint<P>> = outcomes
        .iter()
        .filter_map(|o| o.extraction.as_ref().and_then(|e| e.point().cloned()))
        .collect();
    let mut spread: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            spread = spread.max(triple.space.distance(&a.value, &b.value));
        }
    }
    let mut notes =
        vec!["directedness (a common upper bound for any two images of f) is assumed, not verified".to_string()];
    let failed = outcomes.len() - points.len();
    if failed > 0 {
        notes.push(format!(
            "{failed} of {} starts produced no coincidence point",
            outcomes.len()
        ));
    }
    let all_agree = failed == 0 && spread <= 10.0 * tol;
    if !all_agree && failed == 0 {
        notes.push("distinct coincidence values found; the uniqueness hypotheses cannot all hold".into());
    }
    Ok(MultistartReport {
        outcomes,
        points,
        all_agree,
        spread,
        notes,
    })
}

#[derive(Serialize)]
struct TraceRecord<'a, P> {
    n: usize,
    y_repr: &'a P,
    step_distance: Option<f64>,
    order_ok: Option<bool>,
}

/// Writes one JSON object per y-iterate: `{n, y_repr, step_distance, order_ok}`,
/// where the step fields describe `(y_{n-1}, y_n)` and are null for `n = 0`.
pub fn write_trace_jsonl<P: Serialize, W: Write>(trace: &IterationTrace<P>, mut out: W) -> Result<()> {
    for (n, y) in trace.y_seq.iter().enumerate() {
        let record = TraceRecord {
            n,
            y_repr: y,
            step_distance: n.checked_sub(1).map(|k| trace.step_distance[k]),
            order_ok: n.checked_sub(1).map(|k| trace.order_ok[k]),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::order_metric::{GeraghtyBeta, NaturalOrder, RealLine, ReversedOrder};
    use crate::triple::SelfMap;
    use proptest::prelude::*;

    fn triple(
        f: impl Fn(&f64) -> f64 + Send + Sync + 'static,
        order: Arc<dyn PartialOrder<f64>>,
        beta: GeraghtyBeta,
    ) -> MappingTriple<f64> {
        let f: Arc<dyn SelfMap<f64>> = Arc::new(f);
        MappingTriple::with_identity(Arc::new(RealLine::default()), order, beta, f.clone(), f)
    }

    fn halfway() -> MappingTriple<f64> {
        triple(
            |x| (x + 1.0) / 2.0,
            Arc::new(NaturalOrder),
            GeraghtyBeta::constant(0.5).unwrap(),
        )
    }

    fn ratio(order: Arc<dyn PartialOrder<f64>>) -> MappingTriple<f64> {
        triple(|x| x / (1.0 + x), order, GeraghtyBeta::reciprocal())
    }

    #[test]
    fn identity_converges_immediately() {
        let t = triple(|x| *x, Arc::new(NaturalOrder), GeraghtyBeta::constant(0.5).unwrap());
        let tr = iterate_sequence(&t, 5.0, 10, 1e-8).unwrap();
        assert_eq!(tr.status, IterationStatus::Converged);
        assert_eq!(tr.steps(), 1);
        assert!(tr.y_seq.iter().all(|&y| y == 5.0));
        assert!(tr.step_distance.iter().all(|&d| d == 0.0));
        let found = extract_coincidence(&t, &tr, 1e-12).unwrap();
        let p = found.point().unwrap();
        assert_eq!(
            (p.u, p.residual_fh, p.residual_gh, p.residual_fixed),
            (5.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn halfway_map_closed_form() {
        let t = halfway();
        let tr = iterate_sequence(&t, 0.0, 200, 1e-10).unwrap();
        assert_eq!(tr.status, IterationStatus::Converged);
        for (n, y) in tr.y_seq.iter().enumerate() {
            assert!((y - (1.0 - 0.5f64.powi(n as i32 + 1))).abs() < 1e-15);
        }
        for (k, x) in tr.x_seq.iter().enumerate().skip(1) {
            assert_eq!(*x, tr.y_seq[k - 1]);
        }
        assert!(monitor_order_chain(&tr, &NaturalOrder));
        assert!(monitor_distance_monotone(&tr).unwrap());
        for w in tr.step_distance.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
        }
        let p = extract_coincidence(&t, &tr, 1e-6).unwrap();
        let p = p.point().unwrap();
        assert!((p.u - 1.0).abs() < 1e-6);
        assert!(p.is_common_fixed_point(1e-6));
    }

    #[test]
    fn ratio_map_slow_decay() {
        let t = ratio(Arc::new(ReversedOrder));
        let tr = iterate_sequence(&t, 1.0, 5000, 1e-6).unwrap();
        for (n, y) in tr.y_seq.iter().enumerate() {
            assert!((y - 1.0 / (n as f64 + 2.0)).abs() < 1e-12);
        }
        assert_eq!(tr.status, IterationStatus::Converged);
        // 1/((n+2)(n+3)) < 1e-6 first at n = 998.
        assert!(tr.steps() > 990 && tr.steps() < 1010, "{}", tr.steps());
        assert!(monitor_order_chain(&tr, &ReversedOrder));
        assert_eq!(first_order_break(&tr, &NaturalOrder), Some(0));
        assert!(!monitor_order_chain(&tr, &NaturalOrder));
    }

    #[test]
    fn order_violation_is_a_hard_stop() {
        let t = ratio(Arc::new(NaturalOrder));
        let tr = iterate_sequence(&t, 1.0, 100, 1e-9).unwrap();
        assert_eq!(tr.status, IterationStatus::OrderViolation);
        assert_eq!(tr.steps(), 1);
        assert_eq!(tr.order_ok, vec![false]);
        let e = extract_coincidence(&t, &tr, 1e-6).unwrap();
        assert!(matches!(
            e,
            Extraction::NotFound {
                reason: NotFoundReason::NotConverged,
                ..
            }
        ));
    }

    #[test]
    fn contraction_violation_is_detected() {
        let t = triple(
            |x| 2.0 * x + 1.0,
            Arc::new(NaturalOrder),
            GeraghtyBeta::constant(0.5).unwrap(),
        );
        let tr = iterate_sequence(&t, 0.0, 100, 1e-9).unwrap();
        assert_eq!(tr.status, IterationStatus::ContractionViolation);
        let v = tr.violation.unwrap();
        assert!(v.lhs > v.bound);
    }

    #[test]
    fn section_failure_aborts() {
        let t = halfway().with_h(Arc::new(|x: &f64| 2.0 * x), Arc::new(|y: &f64| Some(*y)));
        assert!(matches!(
            iterate_sequence(&t, 0.0, 10, 1e-9),
            Err(Error::SectionFailure { step: 1, .. })
        ));
        let t = halfway().with_h(Arc::new(|x: &f64| 2.0 * x), Arc::new(|_: &f64| None));
        assert!(matches!(
            iterate_sequence(&t, 0.0, 10, 1e-9),
            Err(Error::SectionFailure { .. })
        ));
    }

    #[test]
    fn non_identity_h() {
        // H(x) = 2x, f = g = x + 1: coincidence where x + 1 = 2x, i.e. u = 1.
        let f: Arc<dyn SelfMap<f64>> = Arc::new(|x: &f64| 0.5 * x + 1.5);
        let t = MappingTriple::with_identity(
            Arc::new(RealLine::default()),
            Arc::new(NaturalOrder),
            GeraghtyBeta::constant(0.5).unwrap(),
            f.clone(),
            f,
        )
        .with_h(Arc::new(|x: &f64| 2.0 * x), Arc::new(|y: &f64| Some(y / 2.0)));
        // 0.5x + 1.5 = 2x at x = 1.
        let tr = iterate_sequence(&t, 0.0, 200, 1e-12).unwrap();
        assert_eq!(tr.status, IterationStatus::Converged);
        let p = extract_coincidence(&t, &tr, 1e-9).unwrap();
        let p = p.point().unwrap();
        assert!((p.u - 1.0).abs() < 1e-9);
        assert!((p.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_converged_is_not_found() {
        let t = ratio(Arc::new(ReversedOrder));
        let tr = iterate_sequence(&t, 1.0, 10, 1e-9).unwrap();
        assert_eq!(tr.status, IterationStatus::MaxIterations);
        assert!(extract_coincidence(&t, &tr, 1.0).unwrap().point().is_none());
    }

    #[test]
    fn bad_arguments() {
        let t = halfway();
        assert!(iterate_sequence(&t, 0.0, 1, 1e-9).is_err());
        assert!(iterate_sequence(&t, 0.0, 10, 0.0).is_err());
    }

    #[test]
    fn distance_monotone_examples() {
        let space = RealLine::default();
        let constant = IterationTrace::from_y_sequence(vec![2.0; 6], &space);
        assert!(monitor_distance_monotone(&constant).unwrap());
        let mut hand = IterationTrace::from_y_sequence(vec![0.0, 1.0, 1.5, 2.2], &space);
        hand.step_distance = vec![1.0, 0.5, 0.7];
        assert!(!monitor_distance_monotone(&hand).unwrap());
        let short = IterationTrace::from_y_sequence(vec![0.0, 1.0], &space);
        assert!(monitor_distance_monotone(&short).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let space = RealLine::default();
        let t = halfway();
        let tr = iterate_sequence(&t, 0.0, 60, 1e-15).unwrap();
        let len = tr.y_seq.len();
        for n in [0usize, 3, 10] {
            let c = cauchy_diagnostics(&tr, &space, n).unwrap();
            let expected = 0.5f64.powi(n as i32 + 1) - 0.5f64.powi(len as i32);
            assert!((c.tail_spread - expected).abs() < 1e-15, "{n}");
            assert_eq!(c.witness_indices, (n, len - 1));
            assert!(!c.sampled);
        }

        let constant = IterationTrace::from_y_sequence(vec![3.0; 5], &space);
        assert_eq!(cauchy_diagnostics(&constant, &space, 0).unwrap().tail_spread, 0.0);

        let diverging = IterationTrace::from_y_sequence((0..10).map(f64::from).collect(), &space);
        let c = cauchy_diagnostics(&diverging, &space, 0).unwrap();
        assert_eq!(c.tail_spread, 9.0);
        assert_eq!(c.witness_indices, (0, 9));
        assert_eq!(c.epsilon_estimate, 8.0);
        assert!(cauchy_diagnostics(&diverging, &space, 9).is_err());
    }

    #[test]
    fn cauchy_sampling_keeps_tail_ends() {
        let space = RealLine::default();
        let ys: Vec<f64> = (0..2000).map(|n| 1.0 / (n as f64 + 2.0)).collect();
        let tr = IterationTrace::from_y_sequence(ys, &space);
        let c = cauchy_diagnostics(&tr, &space, 7).unwrap();
        assert!(c.sampled);
        assert_eq!(c.witness_indices, (7, 1999));
        assert!((c.tail_spread - (1.0 / 9.0 - 1.0 / 2001.0)).abs() < 1e-15);
    }

    #[test]
    fn multistart_examples() {
        let t = halfway();
        let r = multistart_uniqueness(&t, &[0.0, 0.3, 0.9], 200, 1e-9).unwrap();
        assert!(r.all_agree);
        assert_eq!(r.points.len(), 3);
        assert!(r.points.iter().all(|p| (p.u - 1.0).abs() < 1e-8));

        let id = triple(|x| *x, Arc::new(NaturalOrder), GeraghtyBeta::constant(0.5).unwrap());
        let r = multistart_uniqueness(&id, &[0.0, 1.0], 10, 1e-9).unwrap();
        assert!(!r.all_agree);
        assert_eq!(r.points.iter().map(|p| p.u).collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(r.spread, 1.0);

        let r = multistart_uniqueness(&id, &[4.0], 10, 1e-9).unwrap();
        assert!(r.all_agree);
        assert_eq!(r.spread, 0.0);
        assert!(multistart_uniqueness(&id, &[], 10, 1e-9).is_err());
    }

    #[test]
    fn multistart_reports_per_start_failures() {
        let t = ratio(Arc::new(NaturalOrder));
        let r = multistart_uniqueness(&t, &[0.0, 1.0], 100, 1e-9).unwrap();
        assert!(!r.all_agree);
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.outcomes.len(), 2);
    }

    #[test]
    fn trace_jsonl_records() {
        let tr = iterate_sequence(&halfway(), 0.0, 3, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_trace_jsonl(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], r#"{"n":0,"y_repr":0.5,"step_distance":null,"order_ok":null}"#);
        assert_eq!(
            lines[1],
            r#"{"n":1,"y_repr":0.75,"step_distance":0.25,"order_ok":true}"#
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        // Affine contractions x -> a x + b on [0, 1] with a in (0, 1), started
        // below the fixed point so the natural order is preserved.
        #[test]
        fn admissible_affine_traces_are_distance_monotone(a in 0.05f64..0.95, p in 0.0f64..1.0, s in 0.0f64..1.0) {
            let b = (1.0 - a) * p;
            let t = triple(move |x| a * x + b, Arc::new(NaturalOrder), GeraghtyBeta::constant(a).unwrap());
            let x0 = s * p;
            let tr = iterate_sequence(&t, x0, 500, 1e-12).unwrap();
            let pairs: Vec<(f64, f64)> = tr.x_seq.windows(2).map(|w| (w[0], w[1])).collect();
            let verdict = crate::triple::check_contraction(&t, &pairs, crate::triple::Coverage::Sampled).unwrap().verdict;
            prop_assert!(!verdict.is_fail());
            if tr.y_seq.len() >= 3 {
                prop_assert!(monitor_distance_monotone(&tr).unwrap());
            }
        }

        #[test]
        fn tail_spread_non_increasing(a in 0.05f64..0.9, x0 in 0.0f64..0.5) {
            let t = triple(move |x| a * x + (1.0 - a), Arc::new(NaturalOrder), GeraghtyBeta::constant(a).unwrap());
            let tr = iterate_sequence(&t, x0, 500, 1e-12).unwrap();
            prop_assert_eq!(tr.status, IterationStatus::Converged);
            let space = RealLine::default();
            let mut prev = f64::INFINITY;
            for n in 0..tr.y_seq.len() - 1 {
                let c = cauchy_diagnostics(&tr, &space, n).unwrap();
                prop_assert!(c.tail_spread <= prev);
                prev = c.tail_spread;
            }
        }

        #[test]
        fn multistart_is_order_insensitive(starts in proptest::collection::vec(0.0f64..1.0, 1..6)) {
            let t = halfway();
            let fwd = multistart_uniqueness(&t, &starts, 200, 1e-9).unwrap();
            let rev_starts: Vec<f64> = starts.iter().rev().copied().collect();
            let rev = multistart_uniqueness(&t, &rev_starts, 200, 1e-9).unwrap();
            let mut a: Vec<_> = fwd.points.iter().map(|p| (p.u.to_bits(), p.residual_fh.to_bits())).collect();
            let mut b: Vec<_> = rev.points.iter().map(|p| (p.u.to_bits(), p.residual_fh.to_bits())).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert_eq!(fwd.all_agree, rev.all_agree);
        }

        #[test]
        fn identity_setting_yields_fixed_point(a in 0.05f64..0.95, c in -5.0f64..5.0) {
            // g = f, H = id: the extracted point p has d(f(p), p) <= tol.
            let p_star = c / (1.0 - a);
            let t = triple(move |x| a * x + c, Arc::new(NaturalOrder), GeraghtyBeta::constant(a).unwrap());
            let tr = iterate_sequence(&t, p_star - 1.0, 2000, 1e-10).unwrap();
            let e = extract_coincidence(&t, &tr, 1e-8).unwrap();
            let p = e.point().unwrap();
            prop_assert!(((a * p.u + c) - p.u).abs() <= 1e-8);
        }
    }
}
