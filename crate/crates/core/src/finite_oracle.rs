//! Exhaustive ground truth on small finite models.
//!
//! A finite metric space is complete and discrete, so continuity, closedness
//! of `HX` and regularity of the order hold automatically; every remaining
//! hypothesis is decided exactly by table scans.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order_metric::{GeraghtyBeta, Metric, PartialOrder};
use crate::solver::{extract_coincidence, iterate_sequence, multistart_uniqueness};
use crate::triple::{
    check_compatibility_discrete, check_contraction, check_directedness, check_range_inclusion,
    check_weakly_increasing, Coverage, HypothesisReport, MappingTriple, SelfMap,
};

/// Largest supported model.
pub const MAX_MODEL_SIZE: usize = 8;

/// An explicit finite ordered metric space with map tables, points `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteModel {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub leq: Vec<Vec<bool>>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    #[serde(rename = "H")]
    pub h: Vec<usize>,
}

impl Metric<usize> for FiniteModel {
    fn distance(&self, x: &usize, y: &usize) -> f64 {
        self.dist[*x][*y]
    }
    fn eq_tolerance(&self) -> f64 {
        0.0
    }
}

impl PartialOrder<usize> for FiniteModel {
    fn leq(&self, x: &usize, y: &usize) -> bool {
        self.leq[*x][*y]
    }
}

struct Table(Vec<usize>);

impl SelfMap<usize> for Table {
    fn apply(&self, x: &usize) -> Result<usize> {
        Ok(self.0[*x])
    }
}

impl FiniteModel {
    /// Checks table shapes, index ranges, the metric axioms (exactly) and the
    /// partial-order axioms.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if n == 0 {
            return bad("model has no points".into());
        }
        if self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return bad(format!("dist must be {n}x{n}"));
        }
        if self.leq.len() != n || self.leq.iter().any(|r| r.len() != n) {
            return bad(format!("leq must be {n}x{n}"));
        }
        for (name, tab) in [("f", &self.f), ("g", &self.g), ("H", &self.h)] {
            if tab.len() != n {
                return bad(format!("{name} must have {n} entries"));
            }
            if let Some(v) = tab.iter().find(|&&v| v >= n) {
                return bad(format!("{name} maps to {v}, outside 0..{n}"));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = self.dist[i][j];
                if !d.is_finite() || d < 0.0 {
                    return bad(format!("dist[{i}][{j}] = {d} is not a nonnegative real"));
                }
                if (i == j) != (d == 0.0) {
                    return bad(format!("dist[{i}][{j}] = {d} breaks identity of indiscernibles"));
                }
                if d != self.dist[j][i] {
                    return bad(format!("dist is asymmetric at ({i}, {j})"));
                }
                for k in 0..n {
                    if self.dist[i][k] > d + self.dist[j][k] {
                        return bad(format!("triangle inequality fails for ({i}, {j}, {k})"));
                    }
                }
            }
        }
        let points: Vec<usize> = (0..n).collect();
        crate::order_metric::validate_partial_order(self, self, &points)
            .map_err(|v| Error::InvalidModel(format!("leq is not a partial order: {v:?}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: FiniteModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn universe(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    /// Smallest index `x` with `H(x) = y`.
    pub fn smallest_preimage(&self, y: usize) -> Option<usize> {
        self.h.iter().position(|&v| v == y)
    }

    /// The model as a mapping triple whose section picks the smallest-index
    /// preimage under `H`.
    pub fn triple(&self, beta: GeraghtyBeta) -> MappingTriple<usize> {
        let shared = Arc::new(self.clone());
        let h_tab = self.h.clone();
        MappingTriple {
            f: Arc::new(Table(self.f.clone())),
            g: Arc::new(Table(self.g.clone())),
            h: Arc::new(Table(self.h.clone())),
            section: Arc::new(move |y: &usize| h_tab.iter().position(|v| v == y)),
            space: shared.clone(),
            order: shared,
            beta,
        }
    }

    fn all_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|x| (0..self.n).map(move |y| (x, y))).collect()
    }
}

/// All `x` with `f(x) = g(x) = H(x)`, ascending.
pub fn enumerate_coincidence_points(model: &FiniteModel) -> Vec<usize> {
    (0..model.n)
        .filter(|&x| model.f[x] == model.g[x] && model.g[x] == model.h[x])
        .collect()
}

/// All `x` with `f(x) = g(x) = H(x) = x`, ascending.
pub fn enumerate_common_fixed_points(model: &FiniteModel) -> Vec<usize> {
    (0..model.n)
        .filter(|&x| model.f[x] == x && model.g[x] == x && model.h[x] == x)
        .collect()
}

/// Exact verdicts for range inclusion, weak increase with respect to `H`, the
/// contraction over all comparable pairs, compatibility and directedness.
pub fn verify_hypotheses(model: &FiniteModel, beta: &GeraghtyBeta) -> Result<HypothesisReport<usize>> {
    let triple = model.triple(beta.clone());
    let universe = model.universe();
    let pairs = model.all_pairs();
    let exhaustive = Coverage::Exhaustive(&universe);

    let range = check_range_inclusion(&triple, &universe, exhaustive)?;
    let weak = check_weakly_increasing(&triple, &universe, exhaustive, &[], 0)?;
    let contraction = check_contraction(&triple, &pairs, exhaustive)?;
    let compat = check_compatibility_discrete(&triple, &universe)?;
    let directed = check_directedness(&triple, &pairs, &universe)?;

    let mut notes = vec![
        "finite metric spaces are complete and discrete: continuity, closedness of HX and regularity hold automatically".to_string(),
    ];
    notes.extend(contraction.notes);
    Ok(HypothesisReport {
        range_inclusion: range.verdict,
        weakly_increasing: weak.verdict,
        contraction: contraction.verdict,
        compatibility: compat.verdict,
        directedness: Some(directed.verdict),
        notes,
    })
}

/// Re-runs each checker on its own witness alone. Returns the names of
/// witnesses that did *not* reproduce a failure (empty when all are sound).
pub fn replay_witnesses(
    model: &FiniteModel,
    beta: &GeraghtyBeta,
    report: &HypothesisReport<usize>,
) -> Result<Vec<&'static str>> {
    let triple = model.triple(beta.clone());
    let universe = model.universe();
    let exhaustive = Coverage::Exhaustive(&universe);
    let mut unsound = Vec::new();
    if let Some(w) = report.range_inclusion.witness() {
        if !check_range_inclusion(&triple, &[w.x], exhaustive)?.verdict.is_fail() {
            unsound.push("range_inclusion");
        }
    }
    if let Some(w) = report.weakly_increasing.witness() {
        if !check_weakly_increasing(&triple, &[w.x], exhaustive, &[], 0)?
            .verdict
            .is_fail()
        {
            unsound.push("weakly_increasing");
        }
    }
    if let Some(w) = report.contraction.witness() {
        if !check_contraction(&triple, &[(w.x, w.y)], exhaustive)?.verdict.is_fail() {
            unsound.push("contraction");
        }
    }
    if let Some(w) = report.compatibility.witness() {
        if !check_compatibility_discrete(&triple, &w.sequence)?.verdict.is_fail() {
            unsound.push("compatibility");
        }
    }
    if let Some(w) = report.directedness.as_ref().and_then(|v| v.witness()) {
        if !check_directedness(&triple, &[(w.x, w.y)], &universe)?.verdict.is_fail() {
            unsound.push("directedness");
        }
    }
    Ok(unsound)
}

/// Seeded random model on `n` points.
///
/// The metric is the shortest-path closure of random integer edge weights in
/// `1..=9`, so the triangle inequality holds exactly. The order is the
/// reflexive-transitive closure of a random DAG (each forward edge of a random
/// topological order kept with probability `density`). `H` is the identity
/// half of the time; `f` draws from a random subset of `H`'s range or, when
/// `H` is the identity, may instead be a retraction or send each point to a
/// random upper bound; `g` equals `f`
/// three times in four, otherwise it is drawn like `f`.
pub fn random_model(seed: u64, n: usize, density: f64) -> Result<FiniteModel> {
    if !(2..=MAX_MODEL_SIZE).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "model size must be in 2..={MAX_MODEL_SIZE}, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidArgument(format!(
            "density must be in [0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = f64::from(rng.random_range(1u32..=9));
            dist[i][j] = w;
            dist[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }

    let mut topo: Vec<usize> = (0..n).collect();
    topo.shuffle(&mut rng);
    let mut leq = vec![vec![false; n]; n];
    for (a, &i) in topo.iter().enumerate() {
        leq[i][i] = true;
        for &j in &topo[a + 1..] {
            if rng.random_bool(density) {
                leq[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }

    let identity_h = rng.random_bool(0.5);
    let h: Vec<usize> = if identity_h {
        (0..n).collect()
    } else {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    };
    let mut range: Vec<usize> = h.clone();
    range.sort_unstable();
    range.dedup();
    let draw_map = |rng: &mut ChaCha8Rng| {
        let mut support = range.clone();
        support.shuffle(rng);
        support.truncate(rng.random_range(1..=range.len()));
        (0..n)
            .map(|_| support[rng.random_range(0..support.len())])
            .collect::<Vec<usize>>()
    };
    let mut f = draw_map(&mut rng);
    if identity_h {
        match rng.random_range(0..3) {
            0 => {
                // Retraction onto the image: f(f(x)) = f(x).
                let image = f.clone();
                for &v in &image {
                    f[v] = v;
                }
            }
            1 => {
                // Each point moves to one of its upper bounds.
                for (x, fx) in f.iter_mut().enumerate() {
                    let ups: Vec<usize> = (0..n).filter(|&y| leq[x][y]).collect();
                    *fx = ups[rng.random_range(0..ups.len())];
                }
            }
            _ => {}
        }
    }
    let g = if rng.random_bool(0.75) {
        f.clone()
    } else {
        draw_map(&mut rng)
    };

    let model = FiniteModel { n, dist, leq, f, g, h };
    model.validate()?;
    Ok(model)
}

/// Solver-versus-enumeration verdict for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVerdict {
    pub seed: u64,
    pub n: usize,
    pub hypotheses_hold: bool,
    pub directed: bool,
    pub failed_hypotheses: Vec<String>,
    pub coincidence_points: Vec<usize>,
    pub common_fixed_points: Vec<usize>,
    /// Extracted coincidence point per start index, `None` where the solver
    /// produced nothing.
    pub solver_points: Vec<Option<usize>>,
    /// Every start converged to a member of `coincidence_points` (only
    /// required when the hypotheses hold).
    pub consistent: bool,
    /// Exactly one common fixed point, matching the agreed multistart value
    /// (only evaluated on directed models).
    pub unique_ok: Option<bool>,
    /// Witnesses that failed to reproduce when replayed.
    pub unsound_witnesses: Vec<String>,
    pub report: HypothesisReport<usize>,
}

/// Verifies the hypotheses of `model` and cross-checks the solver against
/// exhaustive enumeration.
pub fn check_model(seed: u64, model: &FiniteModel, beta: &GeraghtyBeta, max_iter: usize) -> Result<ModelVerdict> {
    let report = verify_hypotheses(model, beta)?;
    let unsound_witnesses = replay_witnesses(model, beta, &report)?
        .into_iter()
        .map(String::from)
        .collect();
    let coincidence_points = enumerate_coincidence_points(model);
    let common_fixed_points = enumerate_common_fixed_points(model);
    let triple = model.triple(beta.clone());
    let hypotheses_hold = report.coincidence_hypotheses_hold();
    let directed = report.uniqueness_hypotheses_hold();

    let mut solver_points = Vec::with_capacity(model.n);
    for x0 in 0..model.n {
        let point = match iterate_sequence(&triple, x0, max_iter, f64::MIN_POSITIVE) {
            Ok(trace) => extract_coincidence(&triple, &trace, 0.0)?.point().map(|p| p.u),
            Err(Error::SectionFailure { .. }) => None,
            Err(e) => return Err(e),
        };
        solver_points.push(point);
    }
    let consistent = !hypotheses_hold
        || solver_points
            .iter()
            .all(|p| p.is_some_and(|u| coincidence_points.contains(&u)));

    let unique_ok = if directed {
        let multi = multistart_uniqueness(&triple, &model.universe(), max_iter, f64::MIN_POSITIVE)?;
        let agreed = multi.points.first().map(|p| p.value);
        Some(common_fixed_points.len() == 1 && multi.all_agree && agreed == Some(common_fixed_points[0]))
    } else {
        None
    };

    Ok(ModelVerdict {
        seed,
        n: model.n,
        hypotheses_hold,
        directed,
        failed_hypotheses: report.failures().into_iter().map(String::from).collect(),
        coincidence_points,
        common_fixed_points,
        solver_points,
        consistent,
        unique_ok,
        unsound_witnesses,
        report,
    })
}

/// Parameters of a seeded sweep over random models.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub seed_start: u64,
    pub seed_count: u64,
    /// Model size for seed `s` is `n_min + s % (n_max - n_min + 1)`.
    pub n_min: usize,
    pub n_max: usize,
    pub density: f64,
    pub beta: GeraghtyBeta,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed_start: u64,
    pub seed_count: u64,
    pub beta: String,
    pub density: f64,
    /// Models whose coincidence hypotheses all hold.
    pub hits: usize,
    pub hit_rate: f64,
    pub directed_hits: usize,
    pub inconsistent_seeds: Vec<u64>,
    pub non_unique_seeds: Vec<u64>,
    pub unsound_witness_seeds: Vec<u64>,
    pub verdicts: Vec<ModelVerdict>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.inconsistent_seeds.is_empty() && self.non_unique_seeds.is_empty() && self.unsound_witness_seeds.is_empty()
    }
}

/// Runs [`check_model`] over a seed range in parallel; verdicts keep seed order.
pub fn oracle_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.n_min > config.n_max {
        return Err(Error::InvalidArgument("n_min exceeds n_max".into()));
    }
    let span = (config.n_max - config.n_min + 1) as u64;
    let verdicts: Vec<ModelVerdict> = (config.seed_start..config.seed_start + config.seed_count)
        .into_par_iter()
        .map(|seed| {
            let n = config.n_min + (seed % span) as usize;
            let model = random_model(seed, n, config.density)?;
            check_model(seed, &model, &config.beta, config.max_iter)
        })
        .collect::<Result<_>>()?;

    let hits = verdicts.iter().filter(|v| v.hypotheses_hold).count();
    let seeds_where = |pred: &dyn Fn(&ModelVerdict) -> bool| -> Vec<u64> {
        verdicts.iter().filter(|v| pred(v)).map(|v| v.seed).collect()
    };
    Ok(SweepReport {
        seed_start: config.seed_start,
        seed_count: config.seed_count,
        beta: config.beta.name().to_string(),
        density: config.density,
        hits,
        hit_rate: if verdicts.is_empty() {
            0.0
        } else {
            hits as f64 / verdicts.len() as f64
        },
        directed_hits: verdicts.iter().filter(|v| v.directed).count(),
        inconsistent_seeds: seeds_where(&|v| !v.consistent),
        non_unique_seeds: seeds_where(&|v| v.unique_ok == Some(false)),
        unsound_witness_seeds: seeds_where(&|v| !v.unsound_witnesses.is_empty()),
        verdicts,
    })
}
