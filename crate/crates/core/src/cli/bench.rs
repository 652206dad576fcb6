//! Repeated build-and-query runs with ground-truth labels.

use std::fmt;

use crate::calc::CollisionProbs;
use crate::error::Result;
use crate::families::universal::derive_seed;
use crate::families::{HashFamily, Sensitivity};
use crate::index::build_index;
use crate::oracle::{hoeffding_bound, linear_scan, McEstimate};
use crate::par::Execution;
use crate::schemes::{derive_params, HashSource, Overrides, SchemeKind, SchemeParams};
use crate::sketch::{derive_sketch_params, sketch_distance, SketchParams, Sketcher};

const BUILD_STREAM: u64 = 31;
const SKETCH_STREAM: u64 = 32;

#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub kind: SchemeKind,
    pub overrides: Overrides,
    pub seed: u64,
    pub trials: u64,
    /// Filter candidates by sketch distance instead of true distance.
    pub sketch: bool,
    pub exec: Execution,
}

/// Seed of the index built in trial `t`.
pub fn bench_build_seed(seed: u64, t: u64) -> u64 {
    derive_seed(seed, BUILD_STREAM, t)
}

/// Seed of the sketcher used in trial `t`.
pub fn bench_sketch_seed(seed: u64, t: u64) -> u64 {
    derive_seed(seed, SKETCH_STREAM, t)
}

/// Aggregates over `trials x queries` query runs.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub kind: SchemeKind,
    pub params: SchemeParams,
    pub sketch: Option<SketchParams>,
    pub n: usize,
    pub queries: usize,
    /// Queries with a point within `r1`; only these count toward success.
    pub eligible_queries: usize,
    pub trials: u64,
    pub successes: u64,
    pub returns: u64,
    /// Returned points at true distance `>= r2`.
    pub false_returns: u64,
    /// Returned points whose label disagrees with the linear scan.
    pub label_mismatches: u64,
    pub total_lookups: u64,
    pub total_distance_computations: u64,
    pub total_sketch_comparisons: u64,
    pub total_base_evaluations: u64,
    pub min_base_evaluations: u64,
    pub max_base_evaluations: u64,
}

impl BenchReport {
    fn runs(&self) -> u64 {
        self.trials * self.queries as u64
    }

    /// Success frequency over eligible query runs, if there were any.
    pub fn success(&self) -> Option<McEstimate> {
        let attempts = self.trials * self.eligible_queries as u64;
        (attempts > 0).then(|| McEstimate::new(attempts, self.successes))
    }

    fn mean(&self, total: u64) -> f64 {
        if self.runs() == 0 {
            0.0
        } else {
            total as f64 / self.runs() as f64
        }
    }

    pub fn mean_lookups(&self) -> f64 {
        self.mean(self.total_lookups)
    }

    pub fn mean_distance_computations(&self) -> f64 {
        self.mean(self.total_distance_computations)
    }

    pub fn mean_sketch_comparisons(&self) -> f64 {
        self.mean(self.total_sketch_comparisons)
    }

    pub fn mean_base_evaluations(&self) -> f64 {
        self.mean(self.total_base_evaluations)
    }
}

/// One-line parameter summary such as `k=15 m=86 L=11 H=1290 eps=1/4`.
pub fn describe_params(p: &SchemeParams) -> String {
    let l = p.lookups().map_or("overflow".into(), |v| v.to_string());
    let h = p.hash_count().map_or("overflow".into(), |v| v.to_string());
    match p {
        SchemeParams::Im(q) => format!("k={} L={l} H={h}", q.k),
        SchemeParams::Ai(q) => format!(
            "k={} t={} k1={} k2={} m1={} m2={} eta={} L={l} H={h}",
            q.k, q.t, q.k1, q.k2, q.m1, q.m2, q.eta
        ),
        SchemeParams::Dkt(q) => format!("k={} m={} L={l} H={h} eps={}", q.k, q.m, q.eps),
        SchemeParams::Hybrid(q) => format!(
            "k={} k1={} k2={} m1={} m2={} L1={} L2={} L={l} H={h} eps={}",
            q.k, q.first.k, q.second.k, q.first.m, q.second.m, q.first.l, q.second.l, q.eps
        ),
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scheme: {}", self.kind)?;
        writeln!(f, "params: {}", describe_params(&self.params))?;
        if let Some(s) = &self.sketch {
            writeln!(f, "sketch: b={} lambda={} theta={}", s.b, s.lambda, s.theta)?;
        }
        writeln!(
            f,
            "points: {}  queries: {} ({} with a point within r1)  trials: {}",
            self.n, self.queries, self.eligible_queries, self.trials
        )?;
        match self.success() {
            Some(e) => writeln!(
                f,
                "success: {:.6} ({}/{}, stderr {:.6})",
                e.frequency, e.successes, e.trials, e.stderr
            )?,
            None => writeln!(f, "success: n/a (no query has a point within r1)")?,
        }
        writeln!(
            f,
            "returns: {}  false returns: {}  label mismatches: {}",
            self.returns, self.false_returns, self.label_mismatches
        )?;
        writeln!(f, "mean lookups: {:.6}", self.mean_lookups())?;
        writeln!(f, "mean distance computations: {:.6}", self.mean_distance_computations())?;
        if self.sketch.is_some() {
            writeln!(f, "mean sketch comparisons: {:.6}", self.mean_sketch_comparisons())?;
        }
        write!(
            f,
            "mean base hash evaluations: {:.6} (min {}, max {})",
            self.mean_base_evaluations(),
            self.min_base_evaluations,
            self.max_base_evaluations
        )
    }
}

#[derive(Default)]
struct TrialTotals {
    successes: u64,
    returns: u64,
    false_returns: u64,
    label_mismatches: u64,
    lookups: u64,
    distance_computations: u64,
    sketch_comparisons: u64,
    base_evaluations: u64,
    min_base: u64,
    max_base: u64,
}

struct Truth {
    /// Some point lies within `r1`.
    eligible: bool,
    /// Ids at distance `< r2`, ascending.
    near_r2: Vec<u64>,
}

/// Builds a fresh index per trial and runs every query against it.
pub fn run_bench<F: HashFamily>(
    family: &F,
    points: &[F::Point],
    queries: &[F::Point],
    s: &Sensitivity,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    for x in points.iter().chain(queries) {
        family.check_point(x)?;
    }
    let probs = CollisionProbs::from_f64(s.p1(), s.p2())?;
    let n = points.len().max(2) as u64;
    let mut overrides = cfg.overrides;
    overrides.sketching |= cfg.sketch;
    let params = derive_params(cfg.kind, n, &probs, &overrides)?;
    let sketch = if cfg.sketch {
        Some(derive_sketch_params(n, &probs)?)
    } else {
        None
    };
    let labelled: Vec<(u64, F::Point)> = points.iter().cloned().enumerate().map(|(i, x)| (i as u64, x)).collect();
    let truth: Vec<Truth> = queries
        .iter()
        .map(|q| {
            let mut near_r2: Vec<u64> = linear_scan(family, &labelled, q, s.r2())
                .into_iter()
                .filter(|&(_, d)| d < s.r2())
                .map(|(id, _)| id)
                .collect();
            near_r2.sort_unstable();
            Truth {
                eligible: !linear_scan(family, &labelled, q, s.r1()).is_empty(),
                near_r2,
            }
        })
        .collect();
    // fail fast on build errors before fanning out
    HashSource::build(family.clone(), params, bench_build_seed(cfg.seed, 0))?;

    let run_trial = |t: u64| -> Result<TrialTotals> {
        let source = HashSource::build(family.clone(), params, bench_build_seed(cfg.seed, t))?;
        let index = build_index(labelled.iter().cloned(), source, *s)?;
        let sketching = match &sketch {
            Some(sp) => {
                let sk = Sketcher::new(family.clone(), sp.b, bench_sketch_seed(cfg.seed, t))?;
                let stored = index.sketch_points(&sk)?;
                Some((sk, stored, sp.theta))
            }
            None => None,
        };
        let mut tot = TrialTotals {
            min_base: u64::MAX,
            ..TrialTotals::default()
        };
        for (q, truth) in queries.iter().zip(&truth) {
            let (hit, stats) = match &sketching {
                Some((sk, stored, theta)) => index.query_with_sketches(q, sk, stored, *theta)?,
                None => index.query(q)?,
            };
            tot.lookups += stats.lookups;
            tot.distance_computations += stats.distance_computations;
            tot.sketch_comparisons += stats.sketch_comparisons;
            tot.base_evaluations += stats.base_hash_evaluations;
            tot.min_base = tot.min_base.min(stats.base_hash_evaluations);
            tot.max_base = tot.max_base.max(stats.base_hash_evaluations);
            if let Some(id) = hit {
                tot.returns += 1;
                let close = truth.near_r2.binary_search(&id).is_ok();
                let exact = family.distance(q, &points[id as usize]) < s.r2();
                if close != exact {
                    tot.label_mismatches += 1;
                }
                if !close {
                    tot.false_returns += 1;
                } else if truth.eligible {
                    tot.successes += 1;
                }
            }
        }
        Ok(tot)
    };
    let trials = cfg.exec.map_trials(cfg.trials, run_trial);

    let mut report = BenchReport {
        kind: cfg.kind,
        params,
        sketch,
        n: points.len(),
        queries: queries.len(),
        eligible_queries: truth.iter().filter(|t| t.eligible).count(),
        trials: cfg.trials,
        successes: 0,
        returns: 0,
        false_returns: 0,
        label_mismatches: 0,
        total_lookups: 0,
        total_distance_computations: 0,
        total_sketch_comparisons: 0,
        total_base_evaluations: 0,
        min_base_evaluations: if queries.is_empty() || cfg.trials == 0 { 0 } else { u64::MAX },
        max_base_evaluations: 0,
    };
    for t in trials {
        let t = t?;
        report.successes += t.successes;
        report.returns += t.returns;
        report.false_returns += t.false_returns;
        report.label_mismatches += t.label_mismatches;
        report.total_lookups += t.lookups;
        report.total_distance_computations += t.distance_computations;
        report.total_sketch_comparisons += t.sketch_comparisons;
        report.total_base_evaluations += t.base_evaluations;
        report.min_base_evaluations = report.min_base_evaluations.min(t.min_base);
        report.max_base_evaluations = report.max_base_evaluations.max(t.max_base);
    }
    Ok(report)
}

/// Sketch error rates over seeded sketchers for all (query, point) pairs
/// classified as near (`<= r1`) or far (`>= r2`).
#[derive(Clone, Debug, PartialEq)]
pub struct SketchBenchReport {
    pub params: SketchParams,
    pub trials: u64,
    pub near_pairs: u64,
    pub far_pairs: u64,
    pub near_rejections: u64,
    pub far_acceptances: u64,
    /// `exp(-b (p1 - p2)^2 / 8)`.
    pub bound: f64,
}

impl SketchBenchReport {
    pub fn near_reject_rate(&self) -> Option<McEstimate> {
        (self.near_pairs > 0).then(|| McEstimate::new(self.near_pairs * self.trials, self.near_rejections))
    }

    pub fn far_accept_rate(&self) -> Option<McEstimate> {
        (self.far_pairs > 0).then(|| McEstimate::new(self.far_pairs * self.trials, self.far_acceptances))
    }
}

impl fmt::Display for SketchBenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "sketch: b={} lambda={} theta={}", p.b, p.lambda, p.theta)?;
        writeln!(
            f,
            "trials: {}  near pairs: {}  far pairs: {}",
            self.trials, self.near_pairs, self.far_pairs
        )?;
        let rate = |e: Option<McEstimate>| match e {
            Some(e) => format!("{:.6} ({}/{}, stderr {:.6})", e.frequency, e.successes, e.trials, e.stderr),
            None => "n/a".into(),
        };
        writeln!(f, "near reject rate: {}", rate(self.near_reject_rate()))?;
        writeln!(f, "far accept rate: {}", rate(self.far_accept_rate()))?;
        write!(f, "per-pair bound: {:e}", self.bound)
    }
}

/// Runs `trials` sketchers of `params.b` bits over every (query, point) pair.
#[allow(clippy::too_many_arguments)]
pub fn run_sketch_bench<F: HashFamily>(
    family: &F,
    points: &[F::Point],
    queries: &[F::Point],
    s: &Sensitivity,
    params: SketchParams,
    seed: u64,
    trials: u64,
    exec: Execution,
) -> Result<SketchBenchReport> {
    for x in points.iter().chain(queries) {
        family.check_point(x)?;
    }
    let mut near = Vec::new();
    let mut far = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        for (xi, x) in points.iter().enumerate() {
            let d = family.distance(q, x);
            if d <= s.r1() {
                near.push((qi, xi));
            } else if d >= s.r2() {
                far.push((qi, xi));
            }
        }
    }
    let outcomes = exec.map_trials(trials, |t| -> Result<(u64, u64)> {
        let sk = Sketcher::new(family.clone(), params.b, bench_sketch_seed(seed, t))?;
        let sq = queries.iter().map(|q| sk.sketch(q)).collect::<Result<Vec<_>>>()?;
        let sp = points.iter().map(|x| sk.sketch(x)).collect::<Result<Vec<_>>>()?;
        let mut rejected = 0;
        for &(qi, xi) in &near {
            rejected += u64::from(!params.accepts(sketch_distance(&sq[qi], &sp[xi])?));
        }
        let mut accepted = 0;
        for &(qi, xi) in &far {
            accepted += u64::from(params.accepts(sketch_distance(&sq[qi], &sp[xi])?));
        }
        Ok((rejected, accepted))
    });
    let (mut near_rejections, mut far_acceptances) = (0, 0);
    for o in outcomes {
        let (r, a) = o?;
        near_rejections += r;
        far_acceptances += a;
    }
    Ok(SketchBenchReport {
        params,
        trials,
        near_pairs: near.len() as u64,
        far_pairs: far.len() as u64,
        near_rejections,
        far_acceptances,
        bound: hoeffding_bound(params.b as u64, s.p1(), s.p2()),
    })
}
