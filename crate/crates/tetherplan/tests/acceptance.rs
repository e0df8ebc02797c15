//! Acceptance criteria. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed.
//!
//! Run with `cargo test -p tetherplan --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tetherplan::outcome::Label;
use tetherplan::scene::Scene;
use tetherplan::sweep::{run_sweep, Mode, SweepConfig, SweepReport};
use tetherplan_core::cable::{bend_angle, BalancerSpec};
use tetherplan_core::collision::segment_segment_distance;
use tetherplan_core::geometry::{Pose, Rot3, Vec3};
use tetherplan_core::presets::{self, ur3_arm, HOME_LEFT};
use tetherplan_core::robot::{IkOptions, JointConfig};
use tetherplan_core::torque::{cable_wrench, joint_torques, CableWrench};

const SEED: u64 = 0;
const RUNTIME_LIMIT: Duration = Duration::from_secs(600);

struct Verdict {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        Self { name, pass, detail }
    }
}

fn soundness(report: &SweepReport, elapsed: Duration) -> Verdict {
    let planned: Vec<_> = report.cells_for(Mode::Constrained).filter(|c| c.planned).collect();
    let dirty: Vec<_> = planned
        .iter()
        .filter(|c| c.label != Label::Success || c.other_violations > 0)
        .map(|c| format!("({}, {})", c.pitch_deg, c.roll_deg))
        .collect();
    Verdict::new(
        "1 soundness",
        dirty.is_empty() && elapsed < RUNTIME_LIMIT,
        format!(
            "{} constrained plans audited, {} with violations {:?}; sweep took {:.1?} (limit {:?})",
            planned.len(),
            dirty.len(),
            dirty,
            elapsed,
            RUNTIME_LIMIT
        ),
    )
}

fn relevance(report: &SweepReport) -> Verdict {
    let bent = report.count(Mode::Unconstrained, Label::BendViolation);
    let hit = report.count(Mode::Unconstrained, Label::CableCollision);
    Verdict::new(
        "2 constraint relevance",
        bent >= 1 && hit >= 1,
        format!("unconstrained sweep has {bent} x and {hit} *"),
    )
}

fn rate_dominance(report: &SweepReport) -> Verdict {
    let rate = |m| report.success_rate(m).unwrap_or(0.0) * 100.0;
    let (c, u) = (rate(Mode::Constrained), rate(Mode::Unconstrained));
    Verdict::new(
        "3 rate dominance",
        c >= u,
        format!("constrained {c:.1}%, unconstrained {u:.1}% (published: 77.5% and 57.5%)"),
    )
}

/// Torque is linear in the load and unchanged when the whole scene is moved
/// rigidly.
fn torque_properties() -> Result<(), String> {
    let tool = presets::screwdriver();
    let bal = presets::balancer(presets::ANCHOR);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let q = JointConfig(core::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
        let arm = ur3_arm(Pose::from_translation(presets::LEFT_BASE));
        let object = arm.fk(&q);
        let w = cable_wrench(&object, &tool, &bal).map_err(|e| e.to_string())?;
        let k = rng.gen_range(0.1..5.0);
        let scaled = joint_torques(&arm, &q, &CableWrench { point: w.point, force: w.force * k });
        let base = joint_torques(&arm, &q, &w);
        if (0..6).any(|i| (scaled[i] - k * base[i]).abs() > 1e-9 * (1.0 + base[i].abs() * k)) {
            return Err("torque is not linear in the load".into());
        }
        let world = Pose::from_xyz_rpy(
            Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-3.0..3.0),
        );
        let moved_arm = ur3_arm(world.compose(&Pose::from_translation(presets::LEFT_BASE)));
        let moved_bal = BalancerSpec::new(
            world.transform_point(bal.anchor),
            world.transform_vector(bal.reference_dir),
            bal.max_load,
            bal.cable_radius,
        )
        .map_err(|e| e.to_string())?;
        let mw = cable_wrench(&world.compose(&object), &tool, &moved_bal).map_err(|e| e.to_string())?;
        let moved = joint_torques(&moved_arm, &q, &mw);
        if (0..6).any(|i| (moved[i] - base[i]).abs() > 1e-9) {
            return Err("torque changes under a rigid motion of the scene".into());
        }
    }
    Ok(())
}

fn torque_reduction(report: &SweepReport) -> Verdict {
    let t = report.torque_summary();
    let props = torque_properties();
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:+.2}%"));
    let pass = t.mean_reduction.iter().all(|r| r.is_some_and(|v| v > 0.0)) && props.is_ok();
    Verdict::new(
        "4 torque reduction",
        pass,
        format!(
            "mean peak reduction left {} over {} cells, right {} over {} cells (published: 26.1% and 20.5%); linearity and frame invariance: {}",
            fmt(t.mean_reduction[0]),
            t.cells[0],
            fmt(t.mean_reduction[1]),
            t.cells[1],
            props.err().unwrap_or_else(|| "ok".into())
        ),
    )
}

fn jacobian_error() -> f64 {
    let arm = ur3_arm(Pose::from_translation(presets::LEFT_BASE));
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = JointConfig(core::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
        let j = arm.jacobian(&q);
        for i in 0..6 {
            let (mut qp, mut qm) = (q, q);
            qp.0[i] += h;
            qm.0[i] -= h;
            let (fp, fm) = (arm.fk(&qp), arm.fk(&qm));
            let lin = (fp.translation - fm.translation) * (1.0 / (2.0 * h));
            let d = (fp.rotation * fm.rotation.transpose()).m;
            let ang = [d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]].map(|v| v / (4.0 * h));
            let fd = [lin.x, lin.y, lin.z, ang[0], ang[1], ang[2]];
            let diff = (0..6).map(|r| (j[r][i] - fd[r]).powi(2)).sum::<f64>().sqrt();
            let scale = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
            worst = worst.max(diff / scale);
        }
    }
    worst
}

fn ik_rate() -> f64 {
    let arm = ur3_arm(Pose::from_translation(presets::LEFT_BASE));
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut solved = 0;
    for k in 0..1000 {
        let q = JointConfig(core::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
        let target = arm.fk(&q);
        if let Ok(sol) = arm.ik(&target, &HOME_LEFT, &IkOptions { seed: k, ..IkOptions::default() }) {
            let (pos, ori) = arm.fk(&sol).error_to(&target);
            if pos < 1e-4 && ori < 1e-3 {
                solved += 1;
            }
        }
    }
    solved as f64 / 1000.0
}

/// Convex minimisation on [0, 1] by sampling then ternary search.
fn minimise(f: impl Fn(f64) -> f64) -> f64 {
    let n: u32 = 64;
    let at = |k: u32| f(f64::from(k) / f64::from(n));
    let best = (0..=n).min_by(|&a, &b| at(a).total_cmp(&at(b))).unwrap();
    let (mut lo, mut hi) = (f64::from(best.saturating_sub(1)) / f64::from(n), f64::from((best + 1).min(n)) / f64::from(n));
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(at(best))
}

fn segment_distance_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut v = || Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let lerp = |a: Vec3, b: Vec3, t: f64| a + (b - a) * t;
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let (p1, p2, q1) = (v(), v(), v());
        let q2 = if k % 4 == 1 { q1 + (p2 - p1) * 0.7 } else { v() };
        let d = segment_segment_distance(p1, p2, q1, q2);
        let oracle = minimise(|s| {
            let p = lerp(p1, p2, s);
            minimise(|t| (p - lerp(q1, q2, t)).norm())
        });
        worst = worst.max((d - oracle).abs());
    }
    worst
}

fn bend_error() -> f64 {
    let tool = presets::screwdriver();
    let bal = presets::balancer(presets::ANCHOR);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q: [f64; 4] = loop {
            let q: [f64; 4] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.1 && n <= 1.0 {
                break q.map(|v| v / n);
            }
        };
        let [w, x, y, z] = q;
        let r = Rot3::from_rows([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]);
        let pose = Pose::new(r, Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.0..0.6)));
        // b = q b_t q*, expanded: b_t + 2w (u × b_t) + 2 u × (u × b_t) with u = (x, y, z).
        let (u, bt) = (Vec3::new(x, y, z), tool.connector_dir);
        let c = u.cross(bt);
        let b = bt + c * (2.0 * w) + u.cross(c) * 2.0;
        let a = bal.reference_dir;
        // atan2 of |a × b| and a · b stays accurate near 0 and π.
        let oracle = a.cross(b).norm().atan2(a.dot(b));
        worst = worst.max((bend_angle(&pose, &tool, &bal).unwrap() - oracle).abs());
    }
    worst
}

fn kernels() -> Verdict {
    let (jac, ik, seg, bend) = (jacobian_error(), ik_rate(), segment_distance_error(), bend_error());
    Verdict::new(
        "5 numerical kernels",
        jac < 1e-4 && ik >= 0.99 && seg < 1e-6 && bend < 1e-9,
        format!(
            "jacobian rel. error {jac:.1e} (< 1e-4), ik success {:.1}% (>= 99%), segment distance error {seg:.1e} (< 1e-6), bend angle error {bend:.1e} (< 1e-9)",
            100.0 * ik
        ),
    )
}

fn csv_bytes(report: &SweepReport) -> Vec<u8> {
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    buf
}

fn determinism(scene: &Scene, reference: &SweepReport) -> Verdict {
    let other = run_sweep(scene, &SweepConfig { seed: SEED, threads: Some(2) }).unwrap();
    let (a, b) = (csv_bytes(reference), csv_bytes(&other));
    Verdict::new(
        "6 determinism",
        a == b,
        format!("sweep CSV on 1 and 2 threads: {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    )
}

#[test]
fn acceptance() {
    let scene = Scene::default_scene().unwrap();
    let started = Instant::now();
    let report = run_sweep(&scene, &SweepConfig { seed: SEED, threads: Some(1) }).unwrap();
    let elapsed = started.elapsed();
    println!("{}\n{}", report.grid_text(), report.summary_text());

    let verdicts = [
        soundness(&report, elapsed),
        relevance(&report),
        rate_dominance(&report),
        torque_reduction(&report),
        kernels(),
        determinism(&scene, &report),
    ];
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.pass).map(|v| format!("{}: {}", v.name, v.detail)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
