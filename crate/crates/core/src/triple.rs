//! The mapping triple `(f, g, H)` and checkers for its hypotheses.
//!
//! Checkers run in one of two modes. With [`Coverage::Exhaustive`] the whole
//! point universe is known (finite models) and a passing check returns
//! [`Verdict::Holds`]. With [`Coverage::Sampled`] preimages of `H` are realized
//! through the triple's section and a passing check only returns
//! [`Verdict::SampledOk`]. A failing check always carries a witness that fails
//! again when fed back through the same checker.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::order_metric::{compare, GeraghtyBeta, Metric, PartialOrder};

/// A (possibly fallible) self-map of the point universe.
pub trait SelfMap<P>: Send + Sync {
    fn apply(&self, x: &P) -> Result<P>;
}

impl<P, F> SelfMap<P> for F
where
    F: Fn(&P) -> P + Send + Sync,
{
    fn apply(&self, x: &P) -> Result<P> {
        Ok(self(x))
    }
}

/// Right inverse of `H` on its range: `H(section(y)) = y` for `y ∈ HX`.
/// Returns `None` when `y` is known to lie outside `HX`.
pub type Section<P> = Arc<dyn Fn(&P) -> Option<P> + Send + Sync>;

/// Which of the two contracted maps a witness refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    F,
    G,
}

/// The maps `f, g, H`, a section of `H`, and the ambient ordered metric space.
#[derive(Clone)]
pub struct MappingTriple<P> {
    pub f: Arc<dyn SelfMap<P>>,
    pub g: Arc<dyn SelfMap<P>>,
    pub h: Arc<dyn SelfMap<P>>,
    pub section: Section<P>,
    pub space: Arc<dyn Metric<P>>,
    pub order: Arc<dyn PartialOrder<P>>,
    pub beta: GeraghtyBeta,
}

impl<P: Clone + Send + Sync + 'static> MappingTriple<P> {
    /// A triple with `H` the identity (and the identity as its section).
    pub fn with_identity(
        space: Arc<dyn Metric<P>>,
        order: Arc<dyn PartialOrder<P>>,
        beta: GeraghtyBeta,
        f: Arc<dyn SelfMap<P>>,
        g: Arc<dyn SelfMap<P>>,
    ) -> Self {
        Self {
            f,
            g,
            h: Arc::new(|x: &P| x.clone()),
            section: Arc::new(|y: &P| Some(y.clone())),
            space,
            order,
            beta,
        }
    }

    /// Replaces `H` and its section.
    pub fn with_h(mut self, h: Arc<dyn SelfMap<P>>, section: Section<P>) -> Self {
        self.h = h;
        self.section = section;
        self
    }
}

impl<P> MappingTriple<P> {
    pub fn apply(&self, side: Side, x: &P) -> Result<P> {
        match side {
            Side::F => self.f.apply(x),
            Side::G => self.g.apply(x),
        }
    }

    pub fn apply_h(&self, x: &P) -> Result<P> {
        self.h.apply(x)
    }

    pub fn eq_tolerance(&self) -> f64 {
        self.space.eq_tolerance()
    }

    /// `d(H(section(y)), y)`, or `None` if the section has no preimage for `y`.
    pub fn section_residual(&self, y: &P) -> Result<Option<f64>> {
        match (self.section)(y) {
            Some(x) => Ok(Some(self.space.distance(&self.h.apply(&x)?, y))),
            None => Ok(None),
        }
    }
}

/// Tri-state verdict of a hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum Verdict<W> {
    /// Verified on the whole (finite) universe or by an exact grid computation.
    Holds,
    /// No violation found on the supplied samples.
    SampledOk,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    /// Combines partial verdicts: a failure dominates, `Holds` needs unanimity.
    pub fn merge(self, other: Verdict<W>) -> Verdict<W> {
        match (self, other) {
            (Verdict::Fails(w), _) | (_, Verdict::Fails(w)) => Verdict::Fails(w),
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::SampledOk,
        }
    }
}

/// A checker's verdict with bookkeeping on how many items it looked at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome<W> {
    pub verdict: Verdict<W>,
    pub checked: usize,
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl<W> CheckOutcome<W> {
    fn pass(exhaustive: bool, checked: usize, skipped: usize, notes: Vec<String>) -> Self {
        Self {
            verdict: if exhaustive { Verdict::Holds } else { Verdict::SampledOk },
            checked,
            skipped,
            notes,
        }
    }

    fn fail(witness: W, checked: usize, skipped: usize, notes: Vec<String>) -> Self {
        Self {
            verdict: Verdict::Fails(witness),
            checked,
            skipped,
            notes,
        }
    }
}

/// How preimages under `H` are enumerated.
#[derive(Debug, Clone, Copy)]
pub enum Coverage<'a, P> {
    /// The slice is the whole point universe.
    Exhaustive(&'a [P]),
    /// Preimages come from the triple's section (plus optional candidates).
    Sampled,
}

impl<P> Coverage<'_, P> {
    fn is_exhaustive(&self) -> bool {
        matches!(self, Coverage::Exhaustive(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeWitness<P> {
    pub x: P,
    pub side: Side,
    pub image: P,
    /// Distance from the image to the nearest available value of `H`
    /// (infinite when the section has no preimage).
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakIncreaseWitness<P> {
    pub x: P,
    /// A preimage under `H` of the image of `x`.
    pub y: P,
    /// `F`: `f(x) ⋠ g(y)` with `H(y) = f(x)`; `G`: `g(x) ⋠ f(y)` with `H(y) = g(x)`.
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionWitness<P> {
    pub x: P,
    pub y: P,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityWitness<P> {
    pub side: Side,
    pub sequence: Vec<P>,
    pub commutators: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectednessWitness<P> {
    pub x: P,
    pub y: P,
}

/// Verdicts for the hypotheses of the coincidence theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport<P> {
    pub range_inclusion: Verdict<RangeWitness<P>>,
    pub weakly_increasing: Verdict<WeakIncreaseWitness<P>>,
    pub contraction: Verdict<ContractionWitness<P>>,
    pub compatibility: Verdict<CompatibilityWitness<P>>,
    /// Only decidable on finite universes.
    pub directedness: Option<Verdict<DirectednessWitness<P>>>,
    pub notes: Vec<String>,
}

impl<P> HypothesisReport<P> {
    /// Range inclusion, weak increase, contraction and compatibility all pass.
    pub fn coincidence_hypotheses_hold(&self) -> bool {
        !self.range_inclusion.is_fail()
            && !self.weakly_increasing.is_fail()
            && !self.contraction.is_fail()
            && !self.compatibility.is_fail()
    }

    /// Coincidence hypotheses plus a passing directedness check.
    pub fn uniqueness_hypotheses_hold(&self) -> bool {
        self.coincidence_hypotheses_hold() && matches!(&self.directedness, Some(v) if !v.is_fail())
    }

    /// Names of the failing hypotheses.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.range_inclusion.is_fail() {
            out.push("range_inclusion");
        }
        if self.weakly_increasing.is_fail() {
            out.push("weakly_increasing");
        }
        if self.contraction.is_fail() {
            out.push("contraction");
        }
        if self.compatibility.is_fail() {
            out.push("compatibility");
        }
        if matches!(&self.directedness, Some(v) if v.is_fail()) {
            out.push("directedness");
        }
        out
    }
}

/// `fX ⊆ HX` and `gX ⊆ HX`, checked at `domain_points`.
pub fn check_range_inclusion<P: Clone>(
    triple: &MappingTriple<P>,
    domain_points: &[P],
    coverage: Coverage<'_, P>,
) -> Result<CheckOutcome<RangeWitness<P>>> {
    let tol = triple.eq_tolerance();
    let h_values = match coverage {
        Coverage::Exhaustive(universe) => Some(universe.iter().map(|z| triple.apply_h(z)).collect::<Result<Vec<_>>>()?),
        Coverage::Sampled => None,
    };
    let mut checked = 0;
    for x in domain_points {
        for side in [Side::F, Side::G] {
            let image = triple.apply(side, x)?;
            let gap = match &h_values {
                Some(hs) => hs
                    .iter()
                    .map(|hz| triple.space.distance(hz, &image))
                    .fold(f64::INFINITY, f64::min),
                None => triple.section_residual(&image)?.unwrap_or(f64::INFINITY),
            };
            checked += 1;
            if !(gap <= tol) {
                let witness = RangeWitness {
                    x: x.clone(),
                    side,
                    image,
                    gap,
                };
                return Ok(CheckOutcome::fail(witness, checked, 0, Vec::new()));
            }
        }
    }
    Ok(CheckOutcome::pass(coverage.is_exhaustive(), checked, 0, Vec::new()))
}

/// Weak increase of `f` and `g` with respect to `H`.
///
/// For each `x` and each preimage `y` of `f(x)` under `H`, requires
/// `f(x) ⪯ g(y)`; symmetrically `g(x) ⪯ f(y)` for preimages of `g(x)`.
/// In sampled mode the preimages are `section(f(x))` plus up to
/// `preimage_budget` entries of `candidates` that `H` maps onto `f(x)`.
pub fn check_weakly_increasing<P: Clone>(
    triple: &MappingTriple<P>,
    domain_points: &[P],
    coverage: Coverage<'_, P>,
    candidates: &[P],
    preimage_budget: usize,
) -> Result<CheckOutcome<WeakIncreaseWitness<P>>> {
    let tol = triple.eq_tolerance();
    let mut checked = 0;
    let mut skipped = 0;
    let mut notes = Vec::new();
    for x in domain_points {
        for side in [Side::F, Side::G] {
            let image = triple.apply(side, x)?;
            let mut preimages = Vec::new();
            match coverage {
                Coverage::Exhaustive(universe) => {
                    for z in universe {
                        if triple.space.distance(&triple.apply_h(z)?, &image) <= tol {
                            preimages.push(z.clone());
                        }
                    }
                }
                Coverage::Sampled => {
                    match (triple.section)(&image) {
                        Some(s) => preimages.push(s),
                        None => {
                            skipped += 1;
                            notes.push("section has no preimage for an image point".into());
                        }
                    }
                    let mut taken = 0;
                    for c in candidates {
                        if taken == preimage_budget {
                            break;
                        }
                        if triple.space.distance(&triple.apply_h(c)?, &image) <= tol {
                            preimages.push(c.clone());
                            taken += 1;
                        }
                    }
                }
            }
            let other = match side {
                Side::F => Side::G,
                Side::G => Side::F,
            };
            for y in preimages {
                checked += 1;
                let target = triple.apply(other, &y)?;
                if !triple.order.leq(&image, &target) {
                    let witness = WeakIncreaseWitness { x: x.clone(), y, side };
                    return Ok(CheckOutcome::fail(witness, checked, skipped, notes));
                }
            }
        }
    }
    notes.dedup();
    Ok(CheckOutcome::pass(coverage.is_exhaustive(), checked, skipped, notes))
}

/// The contraction `d(fx, gy) <= β(d(Hx, Hy)) d(Hx, Hy)` for every pair whose
/// `H`-images are comparable. Incomparable pairs are skipped and counted.
pub fn check_contraction<P: Clone>(
    triple: &MappingTriple<P>,
    pairs: &[(P, P)],
    coverage: Coverage<'_, P>,
) -> Result<CheckOutcome<ContractionWitness<P>>> {
    let tol = triple.eq_tolerance();
    let mut checked = 0;
    let mut skipped = 0;
    for (x, y) in pairs {
        let hx = triple.apply_h(x)?;
        let hy = triple.apply_h(y)?;
        if !compare(triple.order.as_ref(), &hx, &hy).is_comparable() {
            skipped += 1;
            continue;
        }
        checked += 1;
        let dh = triple.space.distance(&hx, &hy);
        let bound = triple.beta.eval(dh)? * dh;
        let lhs = triple.space.distance(&triple.f.apply(x)?, &triple.g.apply(y)?);
        if !(lhs <= bound + tol) {
            let witness = ContractionWitness {
                x: x.clone(),
                y: y.clone(),
                lhs,
                bound,
            };
            return Ok(CheckOutcome::fail(witness, checked, skipped, Vec::new()));
        }
    }
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} of {} pairs skipped as incomparable", pairs.len()));
    }
    Ok(CheckOutcome::pass(coverage.is_exhaustive(), checked, skipped, notes))
}

/// The single-map Geraghty contraction `d(Tx, Ty) <= β(d(x, y)) d(x, y)` for
/// comparable `x, y`. Independent of [`check_contraction`]; with `g = f` and
/// `H = id` the two must agree.
pub fn check_geraghty_contraction<P: Clone>(
    space: &dyn Metric<P>,
    order: &dyn PartialOrder<P>,
    map: &dyn SelfMap<P>,
    beta: &GeraghtyBeta,
    pairs: &[(P, P)],
) -> Result<Verdict<ContractionWitness<P>>> {
    for (x, y) in pairs {
        if !(order.leq(x, y) || order.leq(y, x)) {
            continue;
        }
        let d = space.distance(x, y);
        let bound = beta.eval(d)? * d;
        let lhs = space.distance(&map.apply(x)?, &map.apply(y)?);
        if !(lhs <= bound + space.eq_tolerance()) {
            return Ok(Verdict::Fails(ContractionWitness {
                x: x.clone(),
                y: y.clone(),
                lhs,
                bound,
            }));
        }
    }
    Ok(Verdict::SampledOk)
}

/// Falsification probe for compatibility of `{map_a, map_b}` along `sequence`.
///
/// Looks at the tail (last third, at least 3 points). If `d(a x_n, b x_n)` is
/// not non-increasing there or does not end within `tail_tolerance`, the
/// premise `lim a x_n = lim b x_n` is not evidenced and the probe passes
/// vacuously with a note. Otherwise it fails when every commutator
/// `d(a(b x_n), b(a x_n))` in the tail exceeds `tail_tolerance`.
/// Compatibility itself can never be established by sampling.
pub fn compatibility_probe<P: Clone>(
    map_a: &dyn SelfMap<P>,
    map_b: &dyn SelfMap<P>,
    space: &dyn Metric<P>,
    sequence: &[P],
    tail_tolerance: f64,
    side: Side,
) -> Result<CheckOutcome<CompatibilityWitness<P>>> {
    if sequence.len() < 3 {
        return Err(crate::Error::InvalidArgument(
            "compatibility probe needs at least 3 sequence points".into(),
        ));
    }
    if !(tail_tolerance > 0.0) {
        return Err(crate::Error::InvalidArgument(
            "compatibility probe needs a positive tail tolerance".into(),
        ));
    }
    let tail_len = (sequence.len() / 3).max(3);
    let tail = &sequence[sequence.len() - tail_len..];
    let slack = space.eq_tolerance();

    let mut gaps = Vec::with_capacity(tail_len);
    let mut commutators = Vec::with_capacity(tail_len);
    for x in tail {
        let ax = map_a.apply(x)?;
        let bx = map_b.apply(x)?;
        gaps.push(space.distance(&ax, &bx));
        commutators.push(space.distance(&map_a.apply(&bx)?, &map_b.apply(&ax)?));
    }
    let premise = gaps.windows(2).all(|w| w[1] <= w[0] + slack) && gaps.last().is_some_and(|&g| g <= tail_tolerance);
    if !premise {
        return Ok(CheckOutcome::pass(
            false,
            0,
            tail_len,
            vec!["images do not approach a common limit on this sequence; probe vacuous".into()],
        ));
    }
    if commutators.iter().all(|&c| c > tail_tolerance) {
        let witness = CompatibilityWitness {
            side,
            sequence: tail.to_vec(),
            commutators,
        };
        return Ok(CheckOutcome::fail(witness, tail_len, 0, Vec::new()));
    }
    Ok(CheckOutcome::pass(false, tail_len, 0, Vec::new()))
}

/// Compatibility on a discrete (finite) space, where convergent sequences are
/// eventually constant: at every `x` with `f(x) = H(x)` we need
/// `f(H(x)) = H(f(x))`, and likewise for `g`.
pub fn check_compatibility_discrete<P: Clone>(
    triple: &MappingTriple<P>,
    points: &[P],
) -> Result<CheckOutcome<CompatibilityWitness<P>>> {
    let tol = triple.eq_tolerance();
    let mut checked = 0;
    let mut skipped = 0;
    for x in points {
        let hx = triple.apply_h(x)?;
        for side in [Side::F, Side::G] {
            let mx = triple.apply(side, x)?;
            if triple.space.distance(&mx, &hx) > tol {
                skipped += 1;
                continue;
            }
            checked += 1;
            let commutator = triple.space.distance(&triple.apply(side, &hx)?, &triple.apply_h(&mx)?);
            if commutator > tol {
                let witness = CompatibilityWitness {
                    side,
                    sequence: vec![x.clone()],
                    commutators: vec![commutator],
                };
                return Ok(CheckOutcome::fail(witness, checked, skipped, Vec::new()));
            }
        }
    }
    Ok(CheckOutcome::pass(true, checked, skipped, Vec::new()))
}

/// For each pair `(x, y)`, some `u` in `universe` has `f(x) ⪯ f(u)` and
/// `f(y) ⪯ f(u)`.
pub fn check_directedness<P: Clone>(
    triple: &MappingTriple<P>,
    pairs: &[(P, P)],
    universe: &[P],
) -> Result<CheckOutcome<DirectednessWitness<P>>> {
    let fu = universe.iter().map(|u| triple.f.apply(u)).collect::<Result<Vec<_>>>()?;
    let mut checked = 0;
    for (x, y) in pairs {
        checked += 1;
        let fx = triple.f.apply(x)?;
        let fy = triple.f.apply(y)?;
        let bounded = fu.iter().any(|b| triple.order.leq(&fx, b) && triple.order.leq(&fy, b));
        if !bounded {
            let witness = DirectednessWitness {
                x: x.clone(),
                y: y.clone(),
            };
            return Ok(CheckOutcome::fail(witness, checked, 0, Vec::new()));
        }
    }
    Ok(CheckOutcome::pass(true, checked, 0, Vec::new()))
}

/// Checks that the section inverts `H` at `H(x)` for each sample `x`.
pub fn check_section<P: Clone + Debug>(triple: &MappingTriple<P>, samples: &[P]) -> Result<Option<P>> {
    for x in samples {
        let hx = triple.apply_h(x)?;
        match triple.section_residual(&hx)? {
            Some(r) if r <= triple.eq_tolerance() => {}
            _ => return Ok(Some(x.clone())),
        }
    }
    Ok(None)
}
