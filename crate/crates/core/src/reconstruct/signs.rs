//! Sign resolution for a fixed echo assignment.

use std::cmp::Ordering;
use std::f64::consts::PI;

use super::{phi_from_signs, ReconstructError, Result, SignAssignment, SignPair, SignSearch};
use crate::geometry::wrap_angle;

/// One sign vector with the wall and turn angles it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct SignFamily {
    pub signs: SignAssignment,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Circular mean of `phis`.
    pub phi: f64,
    /// Mean squared wrapped deviation from `phi`.
    pub var: f64,
}

impl SignFamily {
    fn from_choices(choices: &[(SignPair, f64, f64)]) -> Self {
        let phis: Vec<f64> = choices.iter().map(|c| c.2).collect();
        let (phi, var) = circular_mean_var(&phis);
        Self {
            signs: choices.iter().map(|c| c.0).collect(),
            thetas: choices.iter().map(|c| c.1).collect(),
            phis,
            phi,
            var,
        }
    }
}

/// Circular mean and variance of angles. The variance uses deviations
/// wrapped to `(-π, π]`, so it agrees with the ordinary variance for
/// tightly clustered angles.
pub fn circular_mean_var(angles: &[f64]) -> (f64, f64) {
    if angles.is_empty() {
        return (0.0, 0.0);
    }
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let mean = if s == 0.0 && c == 0.0 { 0.0 } else { s.atan2(c) };
    let var = angles.iter().map(|a| wrap_angle(a - mean).powi(2)).sum::<f64>() / angles.len() as f64;
    (wrap_angle(mean), var)
}

fn slot_choices(alpha: f64, beta: f64) -> [(SignPair, f64, f64); 4] {
    SignPair::ALL.map(|s| {
        let (theta, phi) = phi_from_signs(alpha, beta, s);
        (s, theta, phi)
    })
}

fn nearest(choices: &[(SignPair, f64, f64); 4], target: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in choices.iter().enumerate() {
        let d = wrap_angle(c.2 - target).abs();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Candidate sign vectors for the given cosines.
///
/// `Exhaustive` returns all `4^K` vectors. `Clustered` seeds on each of the
/// `4K` per-wall turn candidates, picks for every wall the candidate nearest
/// the seed (giving up when none lies within `2 * tol`), re-centers once on
/// the resulting mean, and returns the distinct outcomes.
pub fn sign_families(alphas: &[f64], betas: &[f64], search: SignSearch, tol: f64) -> Vec<SignFamily> {
    assert_eq!(alphas.len(), betas.len());
    let k = alphas.len();
    if k == 0 {
        return Vec::new();
    }
    let choices: Vec<_> = alphas.iter().zip(betas).map(|(&a, &b)| slot_choices(a, b)).collect();
    match search {
        SignSearch::Exhaustive => {
            let total = 4usize.checked_pow(k as u32).expect("too many walls for exhaustive sign search");
            (0..total)
                .map(|mut code| {
                    let picked: Vec<_> = (0..k)
                        .map(|i| {
                            let c = choices[i][code % 4];
                            code /= 4;
                            c
                        })
                        .collect();
                    SignFamily::from_choices(&picked)
                })
                .collect()
        }
        SignSearch::Clustered => {
            let mut out: Vec<SignFamily> = Vec::new();
            for seed in choices.iter().flat_map(|c| c.iter().map(|x| x.2)) {
                let Some(family) = cluster_around(&choices, seed, 2.0 * tol) else {
                    continue;
                };
                if !out.iter().any(|f| f.signs == family.signs) {
                    out.push(family);
                }
            }
            out
        }
    }
}

fn cluster_around(choices: &[[(SignPair, f64, f64); 4]], seed: f64, radius: f64) -> Option<SignFamily> {
    let mut picked = Vec::with_capacity(choices.len());
    for c in choices {
        let (i, d) = nearest(c, seed);
        if d > radius {
            return None;
        }
        picked.push(c[i]);
    }
    let first = SignFamily::from_choices(&picked);
    for (p, c) in picked.iter_mut().zip(choices) {
        *p = c[nearest(c, first.phi).0];
    }
    Some(SignFamily::from_choices(&picked))
}

fn upper_half(phi: f64) -> bool {
    phi > 0.0 && phi < PI
}

/// Preference order among families: lower variance (ties within `tie_tol`),
/// then a turn in `(0, π)`, then the lexicographically smallest sign vector.
pub(crate) fn best_family(families: &[SignFamily], tie_tol: f64) -> Option<&SignFamily> {
    let vmin = families.iter().map(|f| f.var).filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
    if !vmin.is_finite() {
        return None;
    }
    families.iter().filter(|f| f.var <= vmin + tie_tol).min_by(|a, b| {
        upper_half(b.phi).cmp(&upper_half(a.phi)).then_with(|| a.signs.cmp(&b.signs)).then(Ordering::Equal)
    })
}

/// Minimum-variance sign vector for cosines already in `[-1, 1]`.
pub fn resolve_signs(alphas: &[f64], betas: &[f64], search: SignSearch, tol: f64) -> Result<SignFamily> {
    if alphas.len() != betas.len() || alphas.is_empty() {
        return Err(ReconstructError::Input("need one alpha and one beta per wall"));
    }
    if alphas.iter().chain(betas).any(|x| !(-1.0..=1.0).contains(x)) {
        return Err(ReconstructError::Infeasible);
    }
    let families = sign_families(alphas, betas, search, tol);
    best_family(&families, 1e-12).cloned().ok_or(ReconstructError::NoFeasibleSigns)
}
