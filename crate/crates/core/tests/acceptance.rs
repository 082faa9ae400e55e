//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits non-zero if any fails.
//!
//! Criteria 8 to 11 run the full synthetic-expert experiment twice in serial
//! mode, which takes several minutes on one core.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use common::*;
use hwgail::baseline::{train_predictor, training_pairs};
use hwgail::cli::{run_cli, SmokeReport, EXIT_OK};
use hwgail::dataset::{build_dataset, load_dataset, Dataset, Split};
use hwgail::eval::{curvature_at, CurvatureHistogram, QMap};
use hwgail::gail::{
    q_value, reward_of, ActorLoss, BellmanLoss, DiscriminatorLoss, OptimizerKind, TrainingConfig, Transition,
};
use hwgail::nn::{
    actor_forward, checkpoint, critic_forward, discriminator_forward, Head, CONV1_CHANNELS, CONV2_CHANNELS,
};
use hwgail::synthetic::{synthetic_experts, synthetic_raw, SyntheticConfig};
use hwgail::trajectory::{env_step, make_state, Action, Point, Trajectory};
use rand::Rng;
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_environment() -> Outcome {
    let started = Instant::now();
    let mut r = rng(101);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let horizon = r.random_range(2..=60);
        let s = random_open_state(&mut r, horizon);
        let a = Action::new(r.random(), r.random());
        let next = env_step(&s, a).unwrap();
        let mut list: Vec<[f64; 3]> = s.points().iter().map(|p| [p.x, p.y, 1.0]).collect();
        list.push([a.0.x, a.0.y, 1.0]);
        list.resize(horizon, [0.0; 3]);
        if next.slots() != list.as_slice() || next.len() != s.len() + 1 {
            mismatches += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 10.0,
        format!("10000 pairs, {mismatches} mismatches, {secs:.2}s"),
    )
}

/// Coordinates on a 2^-26 lattice, so squared side lengths are exact
/// integers in units of 2^-52 and Heron's formula can be evaluated exactly.
fn lattice_point(r: &mut impl Rng) -> (i128, i128) {
    (r.random_range(0..1 << 26), r.random_range(0..1 << 26))
}

const LATTICE: f64 = (1u64 << 26) as f64;

/// `4K / (abc)` with `16 K^2 = 4 A B - (A + B - C)^2` over the squared sides,
/// computed in integers before the single rounding to floating point.
fn heron_curvature(p: [(i128, i128); 3]) -> f64 {
    let sq = |u: (i128, i128), v: (i128, i128)| (u.0 - v.0).pow(2) + (u.1 - v.1).pow(2);
    let (a2, b2, c2) = (sq(p[0], p[1]), sq(p[1], p[2]), sq(p[2], p[0]));
    let k16 = 4 * a2 * b2 - (a2 + b2 - c2).pow(2);
    let area = (k16 as f64).sqrt() / 4.0;
    let sides = (a2 as f64).sqrt() * (b2 as f64).sqrt() * (c2 as f64).sqrt();
    // Lattice units cancel up to one factor of the spacing.
    4.0 * area / sides * LATTICE
}

fn c2_curvature() -> Outcome {
    let started = Instant::now();
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    for _ in 0..1_000 {
        let p = [lattice_point(&mut r), lattice_point(&mut r), lattice_point(&mut r)];
        let pts: Vec<Point> = p.iter().map(|&(x, y)| Point::new(x as f64 / LATTICE, y as f64 / LATTICE)).collect();
        let k = curvature_at(&Trajectory::new(pts), 1, 1).unwrap();
        let expected = heron_curvature(p);
        if expected == 0.0 {
            degenerate += 1;
            worst = worst.max(k);
        } else {
            worst = worst.max((k - expected).abs() / expected);
        }
    }
    let mut nonzero = 0;
    for _ in 0..100 {
        let a = random_point(&mut r);
        let b = random_point(&mut r);
        let (u, v) = (r.random_range(0.1..0.9), r.random_range(1.0..2.0));
        let on = |s: f64| Point::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
        if curvature_at(&Trajectory::new(vec![a, on(u), on(v)]), 1, 1).unwrap() != 0.0 {
            nonzero += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && nonzero == 0 && secs < 5.0,
        format!(
            "worst relative error {worst:.2e} over 1000 triples ({degenerate} degenerate), {nonzero}/100 collinear non-zero, {secs:.2}s"
        ),
    )
}

fn c3_forward() -> Outcome {
    let mut r = rng(303);
    let horizon = 50;
    let widths = (CONV1_CHANNELS, CONV2_CHANNELS);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let s = random_open_state(&mut r, horizon);
        let actor = random_params(Head::Actor, horizon, widths, 3 * k);
        let critic = random_params(Head::Critic, horizon, widths, 3 * k + 1);
        let disc = random_params(Head::Discriminator, horizon, widths, 3 * k + 2);
        let a = actor_forward(&actor, &s).unwrap();
        let z = naive_logits(&actor, &s);
        worst = worst.max((a.0.x - logistic(z[0])).abs()).max((a.0.y - logistic(z[1])).abs());
        worst = worst.max((critic_forward(&critic, &s).unwrap() - naive_logits(&critic, &s)[0]).abs());
        worst = worst.max((discriminator_forward(&disc, &s).unwrap() - logistic(naive_logits(&disc, &s)[0])).abs());
    }
    outcome(
        worst <= 1e-6,
        format!("20 pairs per network at widths {}/{}, worst abs error {worst:.2e}", widths.0, widths.1),
    )
}

fn c4_gradients() -> Outcome {
    let started = Instant::now();
    let horizon = 50;
    let widths = (CONV1_CHANNELS, CONV2_CHANNELS);
    let mut r = rng(404);
    let states: Vec<_> = (0..4).map(|_| random_open_state(&mut r, horizon)).collect();
    let others: Vec<_> = (0..4).map(|_| random_open_state(&mut r, horizon)).collect();
    let actor = random_params(Head::Actor, horizon, widths, 41);
    let critic = random_params(Head::Critic, horizon, widths, 42);
    let target = random_params(Head::Critic, horizon, widths, 43);
    let disc = random_params(Head::Discriminator, horizon, widths, 44);
    let transitions: Vec<Transition> = states
        .iter()
        .map(|s| Transition::new(s.clone(), Action::new(r.random(), r.random())).unwrap())
        .collect();

    let (h, tol) = (1e-4, 1e-3);
    let bce = grad_check(&DiscriminatorLoss { real: &states, fake: &others }, &disc, 200, h, tol, 45);
    let bellman = grad_check(&BellmanLoss::new(&disc, &target, &transitions, 0.9).unwrap(), &critic, 200, h, tol, 46);
    let objective = ActorLoss { critic: &critic, disc: &disc, states: &states, gamma: 0.9 };
    let q = grad_check(&objective, &actor, 200, h, tol, 47);
    let secs = started.elapsed().as_secs_f64();
    let pass = [&bce, &bellman, &q].iter().all(|c| c.fraction() >= 0.95) && secs < 300.0;
    outcome(
        pass,
        format!(
            "agreeing of 200: cross-entropy {}, Bellman {}, Q objective {}, {secs:.1}s",
            bce.agreeing, bellman.agreeing, q.agreeing
        ),
    )
}

fn c5_bellman() -> Outcome {
    let mut r = rng(505);
    let mut worst: f64 = 0.0;
    for k in 0..1_000 {
        let horizon = r.random_range(2..20);
        let widths = (r.random_range(1..6), r.random_range(1..5));
        let critic = random_params(Head::Critic, horizon, widths, 2 * k);
        let disc = random_params(Head::Discriminator, horizon, widths, 2 * k + 1);
        let s = random_open_state(&mut r, horizon);
        let a = Action::new(r.random(), r.random());
        let gamma = r.random_range(0.0..1.0);
        let next = env_step(&s, a).unwrap();
        let residual = q_value(&critic, &disc, &s, a, gamma).unwrap()
            - reward_of(&disc, &next).unwrap()
            - gamma * critic_forward(&critic, &next).unwrap();
        worst = worst.max(residual.abs());
    }
    outcome(worst <= 1e-9, format!("1000 tuples, worst residual {worst:.2e}"))
}

fn c6_dataset() -> Outcome {
    let cfg = SyntheticConfig { count: 11_078, ..SyntheticConfig::default() };
    let raw = synthetic_raw(&cfg, 7).unwrap();
    let split = build_dataset(&raw, 50, 0.8, 99).unwrap();
    let shapes_ok = split
        .train
        .samples
        .iter()
        .chain(&split.test.samples)
        .all(|t| t.len() == 50 && t.points.iter().all(|p| p.in_unit_square()));
    let same = build_dataset(&raw, 50, 0.8, 99).unwrap() == split;
    let reseeded = build_dataset(&raw, 50, 0.8, 100).unwrap();
    let differs = reseeded.train.samples != split.train.samples;
    let sizes = (split.train.len(), split.test.len());
    outcome(
        sizes == (8_862, 2_216) && shapes_ok && same && differs,
        format!(
            "split {}/{}, all length 50 in unit square: {shapes_ok}, same seed identical: {same}, other seed differs: {differs}",
            sizes.0, sizes.1
        ),
    )
}

fn predictor_config(steps: u64, batch_size: usize) -> TrainingConfig {
    TrainingConfig {
        optimizer: OptimizerKind::Adam,
        actor_lr: 3e-3,
        final_lr_scale: 0.01,
        total_steps: steps,
        batch_size,
        conv1_channels: 16,
        conv2_channels: 8,
        ..TrainingConfig::default()
    }
}

fn c7_baseline() -> Outcome {
    let started = Instant::now();
    let experts = synthetic_experts(&SyntheticConfig { count: 1, ..SyntheticConfig::default() }, 70).unwrap();
    let single = Dataset::new(50, Split::Train, 70, experts).unwrap();
    let fit = train_predictor(&predictor_config(3_000, 64), &single, None).unwrap();
    let single_loss = *fit.loss_curve.last().unwrap();

    let lines = SyntheticConfig { line_fraction: 1.0, ..SyntheticConfig::default() };
    let family = synthetic_experts(&lines, 71).unwrap();
    let (train, test) = family.split_at(400);
    let train = Dataset::new(50, Split::Train, 71, train.to_vec()).unwrap();
    let test = Dataset::new(50, Split::Test, 71, test.to_vec()).unwrap();
    let model = train_predictor(&predictor_config(20_000, 32), &train, None).unwrap();
    let pairs = training_pairs(&test).unwrap();
    let mse = pairs
        .iter()
        .map(|(s, p)| {
            let a = actor_forward(&model.params, s).unwrap().point();
            (a.x - p.x).powi(2) + (a.y - p.y).powi(2)
        })
        .sum::<f64>()
        / pairs.len() as f64;
    let rmse = mse.sqrt();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        single_loss < 1e-4 && rmse < 0.01 && secs < 600.0,
        format!("single-trajectory loss {single_loss:.2e}, held-out line RMSE {rmse:.4}, {secs:.0}s"),
    )
}

fn smoke(dir: &Path) -> i32 {
    run_cli(["hwgail", "--workers", "1", "--out", dir.to_str().unwrap(), "smoke-test"])
}

fn c8_smoke(dir: &Path, code: i32, secs: f64) -> Outcome {
    if code != EXIT_OK {
        return outcome(false, format!("smoke-test exited with {code}"));
    }
    let report: SmokeReport = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    outcome(
        report.improvement >= 0.3 && report.gail_mode_delta10 == 0,
        format!(
            "distance gail {:.4} vs untrained {:.4} ({:.1}% lower), at start of adversarial training {:.4}, baseline {:.4}, mode bin at scale 10: {}, mean step gail {:.4} expert {:.4}, {secs:.0}s",
            report.distance_gail,
            report.distance_untrained,
            100.0 * report.improvement,
            report.distance_initial,
            report.distance_baseline,
            report.gail_mode_delta10,
            report.gail_mean_step,
            report.expert_mean_step
        ),
    )
}

fn c9_harness(dir: &Path) -> Outcome {
    let out = dir.join("comparison");
    let arg = |name: &str| dir.join(name).to_str().unwrap().to_owned();
    let code = run_cli([
        "hwgail".to_owned(),
        "--workers".into(),
        "1".into(),
        "--out".into(),
        out.to_str().unwrap().to_owned(),
        "eval-curvature".into(),
        "--expert".into(),
        arg("test.jsonl"),
        "--gail".into(),
        arg("generated_gail.jsonl"),
        "--baseline".into(),
        arg("generated_baseline.jsonl"),
    ]);
    if code != EXIT_OK {
        return outcome(false, format!("eval-curvature exited with {code}"));
    }
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    let mut images = 0;
    let mut missing = Vec::new();
    for name in ["expert", "gail", "baseline"] {
        let text = fs::read_to_string(out.join(format!("hist_{name}.csv"))).unwrap();
        for row in CurvatureHistogram::parse_csv_rows(&text).unwrap() {
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            rows += 1;
        }
        let png = out.join("images").join(format!("hist_{name}.png"));
        if image_ok(&png) {
            images += 1;
        } else {
            missing.push(png);
        }
    }
    for name in ["expert", "gail", "baseline"] {
        for k in 0..15 {
            let png = dir.join("images").join(format!("{name}_{k:03}.png"));
            if image_ok(&png) {
                images += 1;
            } else {
                missing.push(png);
            }
        }
    }
    outcome(
        rows == 60 && worst <= 1e-9 && missing.is_empty(),
        format!("{rows} rows, worst |sum - 1| {worst:.2e}, {images} images rendered, {} missing", missing.len()),
    )
}

fn image_ok(path: &Path) -> bool {
    fs::read(path).map(|b| b.starts_with(b"\x89PNG")).unwrap_or(false)
}

fn c10_qmaps(dir: &Path) -> Outcome {
    let ckpts = dir.join("gail").join("checkpoints");
    let mut steps: Vec<_> = fs::read_dir(&ckpts).unwrap().map(|e| e.unwrap().path()).collect();
    steps.sort();
    let last = steps.last().unwrap();
    let (critic, manifest) = checkpoint::load(&last.join("critic.ckpt")).unwrap();
    let (disc, _) = checkpoint::load(&last.join("discriminator.ckpt")).unwrap();
    let gamma = manifest.extra["gamma"].as_f64().unwrap();
    let test = load_dataset(&dir.join("test.jsonl")).unwrap();
    let mut r = rng(1010);
    let mut worst: f64 = 0.0;
    let mut maps = 0;
    for (k, sample) in test.samples.iter().enumerate() {
        let Ok(text) = fs::read_to_string(dir.join("qmaps").join(format!("qmap_{k:03}.csv"))) else {
            break;
        };
        let rows: Vec<Vec<f64>> =
            text.lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        let grid = rows.len();
        let state = make_state(&sample.points[..20], test.horizon).unwrap();
        for _ in 0..10 {
            let (i, j) = (r.random_range(0..grid), r.random_range(0..grid));
            let q = q_value(&critic, &disc, &state, QMap::cell_action(grid, i, j), gamma).unwrap();
            worst = worst.max((rows[i][j] - q).abs());
        }
        maps += 1;
    }
    outcome(
        maps > 0 && worst <= 1e-9,
        format!("{maps} maps, 10 cells each, worst difference {worst:.2e}"),
    )
}

fn metrics_without_clock(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_seconds");
            v
        })
        .collect()
}

fn c11_reproducibility(a: &Path, b: &Path, code: i32) -> Outcome {
    if code != EXIT_OK {
        return outcome(false, format!("second smoke-test exited with {code}"));
    }
    let mut same = true;
    let mut lines = 0;
    for log in ["gail/metrics.jsonl", "baseline/metrics.jsonl"] {
        let (x, y) = (metrics_without_clock(&a.join(log)), metrics_without_clock(&b.join(log)));
        lines += x.len();
        same &= x == y;
    }
    let reports = fs::read(a.join("report.json")).unwrap() == fs::read(b.join("report.json")).unwrap();
    outcome(
        same && reports,
        format!("{lines} metrics records identical apart from wall clock: {same}, reports identical: {reports}"),
    )
}

fn main() {
    // `cargo test -- <filter>` passes arguments; a filter that does not name
    // this suite skips it.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut failed = 0;
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, c1_environment());
    report(2, c2_curvature());
    report(3, c3_forward());
    report(4, c4_gradients());
    report(5, c5_bellman());
    report(6, c6_dataset());
    report(7, c7_baseline());

    let tmp = TempDir::new().unwrap();
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    let started = Instant::now();
    let code = smoke(&first);
    let secs = started.elapsed().as_secs_f64();
    report(8, c8_smoke(&first, code, secs));
    if code == EXIT_OK {
        report(9, c9_harness(&first));
        report(10, c10_qmaps(&first));
    } else {
        report(9, outcome(false, "no smoke output"));
        report(10, outcome(false, "no smoke output"));
    }
    let code = smoke(&second);
    report(11, c11_reproducibility(&first, &second, code));

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
