//! Pruned enumeration of echo assignments.
//!
//! Slots are filled one at a time with a triple `(a, b, c)` of echo indices,
//! `a` strictly increasing so each unordered wall set is visited once. A
//! triple survives only if both of its cosines are feasible and one of its
//! four turn candidates stays within `angular_tol` of a turn every earlier
//! slot can also reach. The reachable turns are tracked as a set of arcs.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::signs::sign_families;
use super::{
    candidate_from_family, count_assignments, feasible_cosine, CandidateSolution, EchoAssignment, PhiDomain,
    ReconstructError, Result, SignSearch, SlamConfig,
};

/// Counters from one reconstruction.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SlamStats {
    /// Echo triples examined over all wall counts tried.
    pub examined: u64,
    /// Wall count of the returned solution.
    pub k: Option<usize>,
    pub per_k: Vec<KStats>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KStats {
    pub k: usize,
    pub examined: u64,
    pub leaves: u64,
    pub candidates: usize,
}

const FLUSH_EVERY: u64 = 4096;

/// Disjoint sorted arcs inside `[-π, π]`.
#[derive(Debug, Clone, Default)]
struct Arcs(Vec<(f64, f64)>);

impl Arcs {
    fn initial(domain: PhiDomain, tol: f64) -> Self {
        match domain {
            PhiDomain::Full => Arcs(vec![(-PI, PI)]),
            PhiDomain::UpperHalf => Arcs::from_pieces(split(-tol, PI + tol)),
        }
    }

    /// Union of `[v - tol, v + tol]` over the given turns.
    fn windows(values: &[f64], tol: f64) -> Self {
        let mut pieces = Vec::with_capacity(values.len() * 2);
        for &v in values {
            pieces.extend(split(v - tol, v + tol));
        }
        Arcs::from_pieces(pieces)
    }

    fn from_pieces(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Arcs(out)
    }

    fn intersect(&self, other: &Arcs) -> Arcs {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Arcs(out)
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Splits `[lo, hi]` (width below 2π, endpoints within 2π of the range) into
/// pieces inside `[-π, π]`.
fn split(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    if lo < -PI {
        vec![(lo + 2.0 * PI, PI), (-PI, hi)]
    } else if hi > PI {
        vec![(lo, PI), (-PI, hi - 2.0 * PI)]
    } else {
        vec![(lo, hi)]
    }
}

struct Problem<'a> {
    r1: &'a [f64],
    r2: &'a [f64],
    r3: &'a [f64],
    d12: f64,
    d23: f64,
    k: usize,
    cfg: &'a SlamConfig,
    /// Clamped `α` per `(a, b)`, row-major.
    alpha: Vec<Option<f64>>,
    /// Clamped `β` per `(b, c)`, row-major.
    beta: Vec<Option<f64>>,
    examined: AtomicU64,
    aborted: AtomicBool,
}

struct Worker<'p, 'a> {
    problem: &'p Problem<'a>,
    pending: u64,
    leaves: u64,
    path: Vec<[usize; 3]>,
    found: Vec<CandidateSolution>,
}

impl<'a> Problem<'a> {
    fn new(r1: &'a [f64], r2: &'a [f64], r3: &'a [f64], d12: f64, d23: f64, k: usize, cfg: &'a SlamConfig) -> Self {
        let mut alpha = Vec::with_capacity(r1.len() * r2.len());
        for &x in r1 {
            for &y in r2 {
                alpha.push(feasible_cosine(-(y - x) / d12, cfg.eps));
            }
        }
        let mut beta = Vec::with_capacity(r2.len() * r3.len());
        for &y in r2 {
            for &z in r3 {
                beta.push(feasible_cosine(-(z - y) / d23, cfg.eps));
            }
        }
        Self { r1, r2, r3, d12, d23, k, cfg, alpha, beta, examined: AtomicU64::new(0), aborted: AtomicBool::new(false) }
    }

    fn cosines(&self, t: [usize; 3]) -> Option<(f64, f64)> {
        let a = self.alpha[t[0] * self.r2.len() + t[1]]?;
        let b = self.beta[t[1] * self.r3.len() + t[2]]?;
        Some((a, b))
    }

    fn turns(alpha: f64, beta: f64) -> [f64; 4] {
        let (ta, tb) = (alpha.acos(), beta.acos());
        [ta - tb, ta + tb, -ta - tb, -ta + tb]
    }

    fn over_budget(&self, n: u64) -> bool {
        let total = self.examined.fetch_add(n, AtomicOrdering::Relaxed) + n;
        match self.cfg.budget {
            Some(b) if total > b => {
                self.aborted.store(true, AtomicOrdering::Relaxed);
                true
            }
            _ => false,
        }
    }

    fn first_level(&self) -> Vec<[usize; 3]> {
        let last_a = self.r1.len() - self.k;
        let mut out = Vec::new();
        for a in 0..=last_a {
            for b in 0..self.r2.len() {
                for c in 0..self.r3.len() {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

impl<'p, 'a> Worker<'p, 'a> {
    fn new(problem: &'p Problem<'a>) -> Self {
        Self { problem, pending: 0, leaves: 0, path: Vec::with_capacity(problem.k), found: Vec::new() }
    }

    fn tick(&mut self) -> bool {
        self.pending += 1;
        if self.pending >= FLUSH_EVERY {
            let n = std::mem::take(&mut self.pending);
            if self.problem.over_budget(n) {
                return false;
            }
        }
        !self.problem.aborted.load(AtomicOrdering::Relaxed)
    }

    fn flush(&mut self) {
        let n = std::mem::take(&mut self.pending);
        self.problem.over_budget(n);
    }

    /// Tries `t` as the next slot; returns false once the search is aborted.
    fn visit(&mut self, t: [usize; 3], arcs: &Arcs, used_b: u64, used_c: u64) -> bool {
        if !self.tick() {
            return false;
        }
        let p = self.problem;
        let Some((alpha, beta)) = p.cosines(t) else {
            return true;
        };
        let arcs = match p.cfg.sign_search {
            SignSearch::Clustered => {
                let next = arcs.intersect(&Arcs::windows(&Problem::turns(alpha, beta), p.cfg.angular_tol));
                if next.is_empty() {
                    return true;
                }
                next
            }
            SignSearch::Exhaustive => arcs.clone(),
        };
        self.path.push(t);
        let go_on = if self.path.len() == p.k {
            self.leaf();
            true
        } else {
            self.descend(&arcs, used_b | 1 << t[1], used_c | 1 << t[2])
        };
        self.path.pop();
        go_on
    }

    fn descend(&mut self, arcs: &Arcs, used_b: u64, used_c: u64) -> bool {
        let p = self.problem;
        let slot = self.path.len();
        let first_a = self.path.last().map_or(0, |t| t[0] + 1);
        let last_a = p.r1.len() - (p.k - slot);
        for a in first_a..=last_a {
            for b in (0..p.r2.len()).filter(|b| used_b & 1 << b == 0) {
                for c in (0..p.r3.len()).filter(|c| used_c & 1 << c == 0) {
                    if !self.visit([a, b, c], arcs, used_b, used_c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn leaf(&mut self) {
        self.leaves += 1;
        let p = self.problem;
        let cfg = p.cfg;
        let echoes: Vec<[f64; 3]> = self.path.iter().map(|t| [p.r1[t[0]], p.r2[t[1]], p.r3[t[2]]]).collect();
        let (alphas, betas): (Vec<f64>, Vec<f64>) = self.path.iter().map(|&t| p.cosines(t).expect("feasible")).unzip();
        for family in sign_families(&alphas, &betas, cfg.sign_search, cfg.angular_tol) {
            if !(family.var < cfg.v_th) || !cfg.admits_turn(family.phi) {
                continue;
            }
            let assignment = EchoAssignment { slots: self.path.clone() };
            if let Ok(c) = candidate_from_family(&echoes, &alphas, &betas, &family, assignment, p.d12, p.d23, cfg) {
                self.found.push(c);
            }
        }
    }

    fn root(&mut self, t: [usize; 3]) -> bool {
        let p = self.problem;
        let arcs = Arcs::initial(p.cfg.phi_domain, p.cfg.angular_tol);
        self.visit(t, &arcs, 0, 0)
    }
}

struct Chunk {
    found: Vec<CandidateSolution>,
    leaves: u64,
}

fn run_chunk(problem: &Problem<'_>, t: [usize; 3]) -> Chunk {
    let mut w = Worker::new(problem);
    w.root(t);
    w.flush();
    Chunk { found: w.found, leaves: w.leaves }
}

fn run_sequential(problem: &Problem<'_>, roots: &[[usize; 3]]) -> Vec<Chunk> {
    let mut out = Vec::with_capacity(roots.len());
    for &t in roots {
        if problem.aborted.load(AtomicOrdering::Relaxed) {
            break;
        }
        out.push(run_chunk(problem, t));
    }
    out
}

#[cfg(feature = "parallel")]
fn run_parallel(problem: &Problem<'_>, roots: &[[usize; 3]], jobs: Option<usize>) -> Vec<Chunk> {
    let work = || roots.par_iter().map(|&t| run_chunk(problem, t)).collect();
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => run_sequential(problem, roots),
        },
        None => work(),
    }
}

/// All candidates with `k` walls and `Var[φ] < v_th`, in enumeration order.
pub(super) fn search_k(
    r1: &[f64],
    r2: &[f64],
    r3: &[f64],
    d12: f64,
    d23: f64,
    k: usize,
    cfg: &SlamConfig,
    stats: &mut SlamStats,
) -> Result<Vec<CandidateSolution>> {
    if k == 0 || k > r1.len().min(r2.len()).min(r3.len()) {
        return Ok(Vec::new());
    }
    let problem = Problem::new(r1, r2, r3, d12, d23, k, cfg);
    problem.examined.store(stats.examined, AtomicOrdering::Relaxed);
    let roots = problem.first_level();

    #[cfg(feature = "parallel")]
    let chunks =
        if cfg.jobs == Some(1) { run_sequential(&problem, &roots) } else { run_parallel(&problem, &roots, cfg.jobs) };
    #[cfg(not(feature = "parallel"))]
    let chunks = run_sequential(&problem, &roots);

    let total = problem.examined.load(AtomicOrdering::Relaxed);
    let before = stats.examined;
    stats.examined = total;
    if let Some(budget) = cfg.budget {
        if total > budget {
            let raw = count_assignments(r1.len(), r2.len(), r3.len(), k)
                .map(|n| n.to_string())
                .unwrap_or_else(|_| "overflow".into());
            return Err(ReconstructError::BudgetExceeded { budget, k, raw });
        }
    }
    let leaves = chunks.iter().map(|c| c.leaves).sum();
    let found: Vec<CandidateSolution> = chunks.into_iter().flat_map(|c| c.found).collect();
    stats.per_k.push(KStats { k, examined: total - before, leaves, candidates: found.len() });
    Ok(found)
}

fn strictly_contains(outer: &CandidateSolution, inner: &CandidateSolution) -> bool {
    outer.room.contains_room(&inner.room) && !inner.room.contains_room(&outer.room)
}

fn upper_half(phi: f64) -> bool {
    phi > 0.0 && phi < PI
}

fn prefer(a: &CandidateSolution, b: &CandidateSolution, tol: f64) -> Ordering {
    let (pa, pb) = (a.room.perimeter(), b.room.perimeter());
    let by_size = if (pa - pb).abs() > tol { pa.total_cmp(&pb) } else { Ordering::Equal };
    by_size
        .then_with(|| upper_half(b.phi).cmp(&upper_half(a.phi)))
        .then_with(|| {
            let ta = a.room.walls().iter().map(|w| w.normal_angle);
            let tb = b.room.walls().iter().map(|w| w.normal_angle);
            ta.zip(tb)
                .map(|(x, y)| if (x - y).abs() > tol { x.total_cmp(&y) } else { Ordering::Equal })
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.assignment.cmp(&b.assignment))
        .then_with(|| a.signs.cmp(&b.signs))
}

/// Minimum-variance candidate. Among variance ties, rooms that strictly
/// contain another tied room are dropped, then the smallest perimeter wins.
pub(super) fn select_best(found: Vec<CandidateSolution>, cfg: &SlamConfig) -> Option<CandidateSolution> {
    let vmin = found.iter().map(|c| c.var_phi).fold(f64::INFINITY, f64::min);
    if !vmin.is_finite() {
        return None;
    }
    let tied: Vec<CandidateSolution> = found.into_iter().filter(|c| c.var_phi <= vmin + cfg.var_tie_tol).collect();
    let minimal: Vec<&CandidateSolution> =
        tied.iter().filter(|c| !tied.iter().any(|o| strictly_contains(c, o))).collect();
    let pool = if minimal.is_empty() { tied.iter().collect() } else { minimal };
    pool.into_iter().min_by(|a, b| prefer(a, b, cfg.geometry_tol)).cloned()
}
