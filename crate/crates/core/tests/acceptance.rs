//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion.

mod common;

use std::time::Instant;

use common::*;
use echoslam::ambiguity::{congruent_in_frame, one_distance_counterexample, AmbiguityError};
use echoslam::forward::{image_distance, WallSequence};
use echoslam::geometry::{hausdorff, wrap_angle, Point2};
use echoslam::pipeline::{observed_echoes, run_pipeline, simulate};
use echoslam::reconstruct::{
    alpha_beta, count_assignments, feasible_cosine, sign_families, slam, slam_candidates, slam_with_stats,
    CandidateSolution, PhiDomain, ReconstructError, SignSearch, SlamConfig,
};
use echoslam::scenario::ScenarioSpec;
use echoslam::EchoSet;

fn report(id: u32, pass: bool, detail: &str) {
    println!("criterion {id}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

// criterion 1
const C1_INSTANCES_PER_K: usize = 50;
const C1_VERTEX_TOL: f64 = 1e-6;
const C1_O3_TOL: f64 = 1e-6;
const C1_PHI_TOL: f64 = 1e-8;
const C1_VAR_TOL: f64 = 1e-12;
const C1_RUNTIME_K5_S: f64 = 60.0;

/// Instance `i` of the noiseless round-trip family; every fourth K = 4
/// instance is a parallelogram.
fn round_trip_instance(k: usize, i: usize) -> Instance {
    let mut r = rng(1000 * k as u64 + i as u64);
    let parallelogram = k == 4 && i % 4 == 0;
    let make = |r: &mut _| if parallelogram { random_parallelogram(r) } else { random_polygon(r, k) };
    let (room, pts) = room_with_trajectory(&mut r, make, 0.3, 1.0, 0.05);
    instance(&room, pts)
}

#[test]
fn criterion_1_noiseless_round_trip() {
    let cfg = SlamConfig::default();
    let mut failures = Vec::new();
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut k5_runtime = 0.0;
    for k in 3..=6 {
        for i in 0..C1_INSTANCES_PER_K {
            let inst = round_trip_instance(k, i);
            let [r1, r2, r3] = &inst.echoes;
            let start = Instant::now();
            let result = slam(r1, r2, r3, inst.geometry.d12, inst.geometry.d23, &cfg);
            if k <= 5 {
                k5_runtime += start.elapsed().as_secs_f64();
            }
            match result {
                Ok(sol) => {
                    let v = hausdorff(sol.room.vertices(), inst.room.vertices());
                    let o3 = sol.o3().distance(inst.geometry.o3());
                    let phi = (sol.phi - inst.geometry.phi).abs();
                    worst = (worst.0.max(v), worst.1.max(o3), worst.2.max(phi), worst.3.max(sol.var_phi));
                    if !(v < C1_VERTEX_TOL && o3 < C1_O3_TOL && phi < C1_PHI_TOL && sol.var_phi < C1_VAR_TOL) {
                        failures.push(format!(
                            "K={k} #{i}: vertex {v:.2e} o3 {o3:.2e} phi {phi:.2e} var {:.2e}",
                            sol.var_phi
                        ));
                    }
                }
                Err(e) => failures.push(format!("K={k} #{i}: {e}")),
            }
        }
    }
    let pass = failures.is_empty() && k5_runtime < C1_RUNTIME_K5_S;
    report(
        1,
        pass,
        &format!(
            "{} instances, {} failures, worst vertex {:.1e} m, O3 {:.1e} m, phi {:.1e} rad, var {:.1e}; K<=5 runtime {:.2} s",
            4 * C1_INSTANCES_PER_K,
            failures.len(),
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            k5_runtime
        ),
    );
    assert!(pass, "{failures:#?}");
}

/// Echo indices of each true wall at the three points.
fn true_slots(inst: &Instance) -> Vec<[usize; 3]> {
    let pts = inst.geometry.points();
    (0..inst.room.len())
        .map(|w| {
            let mut s = [0; 3];
            for j in 0..3 {
                let d = inst.room.walls()[w].clearance(pts[j]);
                s[j] = inst.echoes[j].distances().iter().position(|&x| (x - d).abs() < 1e-12).unwrap();
            }
            s
        })
        .collect()
}

fn distinct_rooms(cands: &[CandidateSolution]) -> Vec<&CandidateSolution> {
    let mut out: Vec<&CandidateSolution> = Vec::new();
    for c in cands {
        if !out.iter().any(|o| hausdorff(o.room.vertices(), c.room.vertices()) < 1e-6) {
            out.push(c);
        }
    }
    out
}

// criterion 2
const C2_ZERO_VAR: f64 = 1e-12;
const C2_SAME_ANGLE: f64 = 1e-9;

#[test]
fn criterion_2_reflection_ambiguity() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 3..=5 {
        for i in 0..C1_INSTANCES_PER_K {
            let inst = round_trip_instance(k, i);
            checked += 1;
            let g = inst.geometry;
            let slots = true_slots(&inst);
            let (alphas, betas): (Vec<f64>, Vec<f64>) = slots
                .iter()
                .map(|s| {
                    let r = [0, 1, 2].map(|j| inst.echoes[j].distances()[s[j]]);
                    let (a, b) = alpha_beta(r[0], r[1], r[2], g.d12, g.d23);
                    (feasible_cosine(a, 0.05).unwrap(), feasible_cosine(b, 0.05).unwrap())
                })
                .unzip();
            let zero: Vec<_> = sign_families(&alphas, &betas, SignSearch::Exhaustive, 0.02)
                .into_iter()
                .filter(|f| f.var < C2_ZERO_VAR)
                .collect();
            let mut outcomes: Vec<(Vec<f64>, f64)> = Vec::new();
            for f in &zero {
                let same = |o: &(Vec<f64>, f64)| {
                    (o.1 - f.phi).abs() < C2_SAME_ANGLE
                        && o.0.iter().zip(&f.thetas).all(|(a, b)| wrap_angle(a - b).abs() < C2_SAME_ANGLE)
                };
                if !outcomes.iter().any(same) {
                    outcomes.push((f.thetas.clone(), f.phi));
                }
            }
            let mirrored = outcomes.len() == 2
                && (outcomes[0].1 + outcomes[1].1).abs() < C2_SAME_ANGLE
                && outcomes[0].0.iter().zip(&outcomes[1].0).all(|(a, b)| wrap_angle(a + b).abs() < C2_SAME_ANGLE);
            if !mirrored {
                failures.push(format!("K={k} #{i}: {} zero-variance sign outcomes", outcomes.len()));
                continue;
            }
            let strict = |domain| SlamConfig { v_th: C2_ZERO_VAR, phi_domain: domain, ..SlamConfig::default() };
            let [r1, r2, r3] = &inst.echoes;
            let full = slam_candidates(r1, r2, r3, g.d12, g.d23, k, &strict(PhiDomain::Full)).unwrap();
            let full = distinct_rooms(&full);
            let full_ok = full.len() == 2
                && hausdorff(full[0].room.mirrored().vertices(), full[1].room.vertices()) < 1e-6
                && congruent_in_frame(&full[0].room, &inst.room);
            let upper = slam_candidates(r1, r2, r3, g.d12, g.d23, k, &strict(PhiDomain::UpperHalf)).unwrap();
            let upper = distinct_rooms(&upper);
            let upper_ok = upper.len() == 1 && hausdorff(upper[0].room.vertices(), inst.room.vertices()) < 1e-6;
            if !(full_ok && upper_ok) {
                failures.push(format!("K={k} #{i}: {} rooms unconstrained, {} in upper half", full.len(), upper.len()));
            }
        }
    }
    let pass = failures.is_empty();
    report(2, pass, &format!("{checked} instances (K<=5), {} failures", failures.len()));
    assert!(pass, "{failures:#?}");
}

// criterion 3
const C3_TRIALS: u64 = 100;
const C3_VERTEX_TOL: f64 = 1e-6;
/// Zero variance for exact data. At the default threshold a K = 6 labeling
/// that mixes the extra echoes in can pass first.
const C3_V_TH: f64 = 1e-12;

#[test]
fn criterion_3_parallel_wall_inflation() {
    let strict = SlamConfig { v_th: C3_V_TH, ..SlamConfig::default() };
    let mut failures = Vec::new();
    let mut default_ok = 0;
    for seed in 0..C3_TRIALS {
        let mut r = rng(30_000 + seed);
        let (room, pts) = room_with_trajectory(&mut r, |r| random_parallelogram(r), 0.3, 1.0, 0.05);
        let inst = instance(&room, pts);
        let g = inst.geometry;
        let (i, k) = (0, 2);
        let extra = |p: Point2| {
            [vec![i, k, i], vec![k, i, k]].map(|s| image_distance(&inst.room, p, &WallSequence::new(s).unwrap()))
        };
        let sets: Vec<EchoSet> =
            g.points().iter().zip(&inst.echoes).map(|(&p, e)| e.extended(&extra(p)).unwrap()).collect();
        let cands = slam_candidates(&sets[0], &sets[1], &sets[2], g.d12, g.d23, 4, &strict).unwrap();
        let inflated = cands.iter().any(|c| c.room.contains_room(&inst.room) && !inst.room.contains_room(&c.room));
        let is_truth = |sol: &CandidateSolution| hausdorff(sol.room.vertices(), inst.room.vertices()) < C3_VERTEX_TOL;
        if slam(&sets[0], &sets[1], &sets[2], g.d12, g.d23, &SlamConfig::default()).is_ok_and(|s| is_truth(&s)) {
            default_ok += 1;
        }
        match slam(&sets[0], &sets[1], &sets[2], g.d12, g.d23, &strict) {
            Ok(sol) if inflated && is_truth(&sol) => {}
            Ok(sol) => failures.push(format!(
                "seed {seed}: inflated candidate {inflated}, vertex error {:.2e}",
                hausdorff(sol.room.vertices(), inst.room.vertices())
            )),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = failures.is_empty();
    report(
        3,
        pass,
        &format!(
            "{}/{C3_TRIALS} trials select the true room at V_th {C3_V_TH:e}; {default_ok}/{C3_TRIALS} at the default V_th",
            C3_TRIALS as usize - failures.len()
        ),
    );
    assert!(pass, "{failures:#?}");
}

// criterion 4
const C4_INSTANCES: usize = 50;
const C4_RESIDUAL_TOL: f64 = 1e-9;
const C4_MIN_GAP: f64 = 1e-3;
const C4_SECOND_LEG_MIN: f64 = 1e-3;

/// True when trading the O1 labels of some parallel pair keeps the first-leg
/// cosine in `[-1, 1]`, the precondition of the construction.
fn swap_feasible(inst: &Instance) -> bool {
    let walls = inst.room.walls();
    let d = inst.room.wall_distances(Point2::ORIGIN).unwrap();
    [(0, 2), (1, 3)].iter().any(|&(i, k)| {
        let c = walls[i].normal_angle.cos() + (d[k] - d[i]) / inst.geometry.d12;
        c.abs() < 0.999
    })
}

#[test]
fn criterion_4_one_distance_counterexample() {
    let mut failures = Vec::new();
    let (mut found, mut seed, mut rejected) = (0, 0u64, 0);
    let mut tightest = f64::INFINITY;
    while found < C4_INSTANCES {
        seed += 1;
        let mut r = rng(40_000 + seed);
        let (room, pts) = room_with_trajectory(&mut r, |r| random_parallelogram(r), 0.3, 1.0, 0.05);
        let inst = instance(&room, pts);
        if !swap_feasible(&inst) {
            rejected += 1;
            continue;
        }
        found += 1;
        match one_distance_counterexample(&room, pts[0], pts[1], pts[2], inst.geometry.d12) {
            Ok(alt) => {
                tightest = tightest.min(alt.second_leg_residual_best_phi);
                let ok = alt.rank_a == 2
                    && alt.rank_ab == 2
                    && alt.first_leg_residual <= C4_RESIDUAL_TOL
                    && alt.direct_residual <= C4_RESIDUAL_TOL
                    && alt.gap >= C4_MIN_GAP
                    && alt.second_leg_residual_true_d23 > C4_SECOND_LEG_MIN;
                if !ok {
                    failures.push(format!(
                        "seed {seed}: ranks {}/{}, residuals {:.1e}/{:.1e}, gap {:.1e}, second leg {:.1e}",
                        alt.rank_a,
                        alt.rank_ab,
                        alt.first_leg_residual,
                        alt.direct_residual,
                        alt.gap,
                        alt.second_leg_residual_true_d23
                    ));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = failures.is_empty();
    report(
        4,
        pass,
        &format!(
            "{C4_INSTANCES} parallelograms ({rejected} draws skipped: label trade infeasible), {} failures; \
             smallest second-leg residual over any turn angle {tightest:.1e} m",
            failures.len()
        ),
    );
    assert!(pass, "{failures:#?}");
    assert!(matches!(
        one_distance_counterexample(
            &random_polygon(&mut rng(4), 5),
            Point2::ORIGIN,
            Point2::new(0.3, 0.0),
            Point2::new(0.3, 0.3),
            0.3
        ),
        Err(AmbiguityError::NotParallelogram)
    ));
}

/// Number of slot lists with increasing first indices and distinct second
/// and third indices, by explicit enumeration.
fn brute_force_count(n: [usize; 3], k: usize) -> u128 {
    fn go(n: [usize; 3], k: usize, last_a: Option<usize>, used_b: u32, used_c: u32) -> u128 {
        if k == 0 {
            return 1;
        }
        let mut total = 0;
        let first = last_a.map_or(0, |a| a + 1);
        for a in first..n[0] {
            for b in (0..n[1]).filter(|b| used_b & 1 << b == 0) {
                for c in (0..n[2]).filter(|c| used_c & 1 << c == 0) {
                    total += go(n, k - 1, Some(a), used_b | 1 << b, used_c | 1 << c);
                }
            }
        }
        total
    }
    go(n, k, None, 0, 0)
}

#[test]
fn criterion_5_combination_count() {
    let headline = count_assignments(8, 8, 8, 4).unwrap();
    let mut mismatches = Vec::new();
    for n1 in 1..=6 {
        for n2 in 1..=6 {
            for n3 in 1..=6 {
                for k in 1..=4.min(n1.min(n2).min(n3)) {
                    let want = brute_force_count([n1, n2, n3], k);
                    let got = count_assignments(n1, n2, n3, k).unwrap();
                    if got != want {
                        mismatches.push((n1, n2, n3, k, got, want));
                    }
                }
            }
        }
    }
    let pass = headline == 197_568_000 && headline > 10_000_000 && mismatches.is_empty();
    report(5, pass, &format!("count(8,8,8,4) = {headline}, {} brute-force mismatches", mismatches.len()));
    assert!(pass, "{mismatches:?}");
}

// criterion 6
const C6_RUNS: u64 = 100;
const C6_DISTANCE_TOL: f64 = 0.01;
const C6_VERTEX_TOL: f64 = 0.02;
const C6_MIN_GOOD: usize = 95;

/// Points keep the four echoes at least 0.25 m apart. They are deliberately
/// not rotations of one another about the center: that layout gives equal
/// echo sets at all three points and an exact second solution.
fn acoustic_scenario(seed: u64) -> ScenarioSpec {
    ScenarioSpec::from_json(&format!(
        r#"{{
            "room": {{"vertices": [[0.5,0.5],[-0.5,0.5],[-0.5,-0.5],[0.5,-0.5]]}},
            "points": [[-0.40,-0.13],[0.14,-0.43],[0.42,0.15]],
            "echoes": {{"max_order": 1, "d_max": 6.5}},
            "acoustics": {{
                "f0_hz": 30, "f1_hz": 8000, "fs_hz": 96000, "c": 346, "snr_db": 20,
                "peaks": {{"d_min": 0.05, "d_max": 6.5, "min_separation": 0.5, "c": 346}}
            }},
            "seed": {seed}
        }}"#
    ))
    .unwrap()
}

#[test]
fn criterion_6_acoustic_pipeline() {
    let cfg = SlamConfig::default();
    let (mut distance_ok, mut vertex_ok) = (0, 0);
    let mut worst_distance = 0.0f64;
    let mut notes = Vec::new();
    for seed in 0..C6_RUNS {
        let spec = acoustic_scenario(seed);
        let sim = simulate(&spec).unwrap();
        let detected = observed_echoes(&spec, &sim).unwrap();
        let within = detected.iter().zip(&sim.echoes).all(|(d, t)| {
            d.len() == t.len() && d.distances().iter().zip(t.distances()).all(|(a, b)| (a - b).abs() <= C6_DISTANCE_TOL)
        });
        for (d, t) in detected.iter().zip(&sim.echoes) {
            if d.len() == t.len() {
                for (a, b) in d.distances().iter().zip(t.distances()) {
                    worst_distance = worst_distance.max((a - b).abs());
                }
            }
        }
        distance_ok += within as usize;
        match run_pipeline(&spec, &cfg) {
            Ok(rep) if rep.score.vertex_error_m < C6_VERTEX_TOL => vertex_ok += 1,
            Ok(rep) => notes.push(format!("seed {seed}: vertex error {:.3}", rep.score.vertex_error_m)),
            Err(e) => notes.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = distance_ok == C6_RUNS as usize && vertex_ok >= C6_MIN_GOOD;
    report(
        6,
        pass,
        &format!(
            "distances within 1 cm in {distance_ok}/{C6_RUNS} runs (worst {:.2} mm), vertex error < 2 cm in {vertex_ok}/{C6_RUNS}",
            worst_distance * 1e3
        ),
    );
    assert!(pass, "{notes:#?}");
}

// criterion 7
const C7_TRIALS: u64 = 100;
const C7_SIGMA: f64 = 0.03;
const C7_SPURIOUS: usize = 2;
const C7_MIN_GOOD: usize = 90;
const C7_PHI_TOL: f64 = 0.05;
const C7_TOPOLOGY_TOL_DEG: f64 = 10.0;

/// Settings for centimeter-level distance errors. A sweep of eps in
/// [0.05, 0.3], v_th in [5e-4, 3e-2] and angular_tol in [0.02, 0.25] found no
/// better topology rate than the defaults, which recover K most often.
fn noisy_config() -> SlamConfig {
    SlamConfig::default()
}

fn noisy_scenario(seed: u64) -> ScenarioSpec {
    let mut r = rng(70_000 + seed);
    let (room, pts) = room_with_trajectory(&mut r, |r| random_polygon(r, 4), 1.5, 2.5, 0.3);
    let spec = serde_json::json!({
        "room": echoslam::formats::RoomSpec::from_room(&room),
        "points": pts.map(|p| [p.x, p.y]),
        "noise": {"sigma_m": C7_SIGMA, "n_spurious": C7_SPURIOUS, "spurious_range_m": [0.3, 6.0]},
        "seed": seed,
    });
    ScenarioSpec::from_json(&spec.to_string()).unwrap()
}

#[test]
fn criterion_7_noise_robustness() {
    let cfg = noisy_config();
    let (mut good, mut phi_ok) = (0, 0);
    let mut notes = Vec::new();
    let mut worst_phi = 0.0f64;
    for seed in 0..C7_TRIALS {
        let spec = noisy_scenario(seed);
        match run_pipeline(&spec, &cfg) {
            Ok(rep) => {
                let s = &rep.score;
                if s.topology_matches(C7_TOPOLOGY_TOL_DEG) {
                    good += 1;
                } else {
                    notes.push(format!("seed {seed}: K={} walls {:?}", s.k, s.wall_angle_errors_deg));
                }
                worst_phi = worst_phi.max(s.phi_error_rad);
                phi_ok += (s.phi_error_rad <= C7_PHI_TOL) as usize;
            }
            Err(e) => notes.push(format!("seed {seed}: {e}")),
        }
    }
    let pass = good >= C7_MIN_GOOD && phi_ok == C7_TRIALS as usize;
    report(
        7,
        pass,
        &format!("correct K and topology in {good}/{C7_TRIALS}, phi within 0.05 rad in {phi_ok}/{C7_TRIALS} (worst {worst_phi:.3})"),
    );
    assert!(pass, "{notes:#?}");
}

// criterion 8
const C8_NOISELESS_TOL: f64 = 1e-9;

/// Slack for the two leg relations at a returned noisy solution.
fn noisy_slack(sol: &CandidateSolution, eps: f64, sigma: f64) -> (f64, f64) {
    let g = sol.geometry;
    let k = sol.k() as f64;
    let first = 1e-9 + eps * g.d12;
    let second = 1e-9 + g.d23 * ((k * sol.var_phi).sqrt() + eps) + 3.0 * 2f64.sqrt() * sigma;
    (first, second)
}

#[test]
fn criterion_8_residual_invariants() {
    let cfg = SlamConfig::default();
    let mut failures = Vec::new();
    let mut worst_clean = 0.0f64;
    for k in 3..=6 {
        for i in 0..C1_INSTANCES_PER_K {
            let inst = round_trip_instance(k, i);
            let [r1, r2, r3] = &inst.echoes;
            if let Ok(sol) = slam(r1, r2, r3, inst.geometry.d12, inst.geometry.d23, &cfg) {
                let worst = sol.max_first_leg_residual().max(sol.max_second_leg_residual());
                worst_clean = worst_clean.max(worst);
                if worst > C8_NOISELESS_TOL {
                    failures.push(format!("noiseless K={k} #{i}: {worst:.2e}"));
                }
            }
        }
    }
    let noisy_cfg = noisy_config();
    let mut worst_ratio = 0.0f64;
    for seed in 0..C7_TRIALS {
        let spec = noisy_scenario(seed);
        let sim = simulate(&spec).unwrap();
        let g = sim.truth.geometry;
        let [r1, r2, r3] = &sim.echoes;
        let sol = match slam_with_stats(r1, r2, r3, g.d12, g.d23, &noisy_cfg) {
            Ok((s, _)) => s,
            Err(ReconstructError::NoSolution) => continue,
            Err(e) => panic!("{e}"),
        };
        let (first, second) = noisy_slack(&sol, noisy_cfg.eps, C7_SIGMA);
        let (a, b) = (sol.max_first_leg_residual(), sol.max_second_leg_residual());
        worst_ratio = worst_ratio.max(a / first).max(b / second);
        if a > first || b > second {
            failures.push(format!("noisy seed {seed}: {a:.2e} > {first:.2e} or {b:.2e} > {second:.2e}"));
        }
    }
    let pass = failures.is_empty();
    report(
        8,
        pass,
        &format!("worst noiseless residual {worst_clean:.1e} m, worst noisy residual/slack {worst_ratio:.2}"),
    );
    assert!(pass, "{failures:#?}");
}
