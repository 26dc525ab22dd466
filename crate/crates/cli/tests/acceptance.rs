//! Acceptance criteria, one line of output each.
//!
//! Runs without the libtest harness so every verdict is printed even when
//! output capture is on. Exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use opdiv::funcs::builtin;
use opdiv::hermitian::{HermitianMatrix, PositiveDefiniteMatrix};
use opdiv::lab::gen::{random_pd_from, trial_rng};
use opdiv::lab::{check_ids, run_check, run_check_with, ExecMode, GenConfig, RunOptions};
use opdiv::perspective::{perspective, theta_divergence, FieldEntry, WeightedOperatorField};
use opdiv::posmap::compression_fixture;
use opdiv::ToleranceConfig;
use opdiv_cli::compare_example;

/// Entrywise agreement required of the exact example.
const EXAMPLE_TOL: f64 = 1e-9;
/// Relative agreement required of the closed-form perspectives.
const CLOSED_FORM_REL_TOL: f64 = 1e-9;
/// Relative agreement required of the one-dimensional divergence.
const CSISZAR_REL_TOL: f64 = 1e-12;
/// Loewner tolerance for randomized checks: `abs + rel * scale`.
const LOEWNER_ABS: f64 = 1e-8;
const LOEWNER_REL: f64 = 1e-8;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::new(LOEWNER_ABS, LOEWNER_REL).unwrap()
}

fn within(elapsed: Duration, limit: Duration) -> String {
    format!(
        "{:.2}s of {:.0}s",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    )
}

fn example_exact() -> Verdict {
    let start = Instant::now();
    let cmp = compare_example(&compression_fixture()).unwrap();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(1);
    let gaps_ok = cmp.gaps.iter().all(|&g| g > 0.0);
    Verdict {
        pass: cmp.max_deviation <= EXAMPLE_TOL && gaps_ok && elapsed < limit,
        detail: format!(
            "max deviation {:.2e} (<= {EXAMPLE_TOL:e}), gaps {:?}, {}",
            cmp.max_deviation,
            cmp.gaps,
            within(elapsed, limit)
        ),
    }
}

fn rel_dev(a: &opdiv::hermitian::DenseMatrix, b: &opdiv::hermitian::DenseMatrix) -> f64 {
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

fn closed_forms() -> Verdict {
    let start = Instant::now();
    let square = builtin("square", &[]).unwrap();
    let inverse = builtin("power", &[-1.0]).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let dim = 2 + (i % 5) as usize;
        let mut rng = trial_rng(2024, "acceptance/closed_forms", i);
        let l = random_pd_from(&mut rng, dim, (0.1, 4.0), 1e4).unwrap();
        let r = random_pd_from(&mut rng, dim, (0.1, 4.0), 1e4).unwrap();
        let (lm, rm) = (l.as_hermitian().matrix(), r.as_hermitian().matrix());
        // Oracles use LU inverses rather than the spectral route.
        let r_inv = rm.clone().lu().try_inverse().unwrap();
        let l_inv = lm.clone().lu().try_inverse().unwrap();
        let g2 = perspective(&square, l.as_hermitian(), &r).unwrap();
        let gi = perspective(&inverse, l.as_hermitian(), &r).unwrap();
        worst = worst.max(rel_dev(g2.matrix(), &(lm * r_inv * lm)));
        worst = worst.max(rel_dev(gi.matrix(), &(rm * l_inv * rm)));
    }
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(5);
    Verdict {
        pass: worst <= CLOSED_FORM_REL_TOL && elapsed < limit,
        detail: format!(
            "worst relative deviation {worst:.2e} (<= {CLOSED_FORM_REL_TOL:e}) over 100 pairs, dims 2-6, {}",
            within(elapsed, limit)
        ),
    }
}

fn full_registry() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in [1u64, 42, 2024] {
        for dim in 2..=5 {
            let gen = GenConfig::new(dim, seed, 100);
            for id in check_ids() {
                let r = run_check(id, &gen, &tol()).unwrap();
                runs += 1;
                if r.violations > 0 {
                    let parts: Vec<String> = r
                        .parts
                        .iter()
                        .filter(|p| p.violations > 0)
                        .map(|p| format!("{}:{}", p.name, p.violations))
                        .collect();
                    failures.push(format!("{id}@dim{dim}/seed{seed}[{}]", parts.join(",")));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(120);
    let mut failing_ids: Vec<&str> = failures
        .iter()
        .map(|f| f.split('@').next().unwrap())
        .collect();
    failing_ids.dedup();
    failing_ids.sort();
    failing_ids.dedup();
    Verdict {
        pass: failures.is_empty() && elapsed < limit,
        detail: format!(
            "{runs} check runs, {} with violations (checks: {}), {}; first: {}",
            failures.len(),
            if failing_ids.is_empty() {
                "none".to_string()
            } else {
                failing_ids.join(", ")
            },
            within(elapsed, limit),
            failures.first().map(String::as_str).unwrap_or("-")
        ),
    }
}

fn falsification() -> Verdict {
    let start = Instant::now();
    let opts = RunOptions {
        function: Some(builtin("quartic", &[]).unwrap()),
        mode: ExecMode::Parallel,
    };
    let r = run_check_with("THM2_1", &GenConfig::new(2, 42, 1000), &tol(), &opts).unwrap();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(10);
    Verdict {
        pass: r.violations >= 1 && elapsed < limit,
        detail: format!(
            "t^4 at dim 2: {} violations in {} trials, worst margin {:.3e}, {}",
            r.violations,
            r.trials,
            r.worst_margin,
            within(elapsed, limit)
        ),
    }
}

fn scalar_reduction() -> Verdict {
    let fs = ["square", "neg_log", "t_log_t", "identity"]
        .iter()
        .map(|id| builtin(id, &[]).unwrap())
        .chain([
            builtin("power", &[-1.0]).unwrap(),
            builtin("power", &[1.5]).unwrap(),
        ])
        .collect::<Vec<_>>();
    let mut worst_rel: f64 = 0.0;
    let mut jensen_failures = 0;
    for t in 0..1000u64 {
        let mut rng = trial_rng(7, "acceptance/csiszar", t);
        let f = &fs[(t % fs.len() as u64) as usize];
        let n = rng.random_range(1..=8);
        let pq: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0)))
            .collect();
        let entries = pq
            .iter()
            .map(|&(p, q)| FieldEntry {
                w: 1.0,
                a: HermitianMatrix::from_diagonal(&[p]),
                b: PositiveDefiniteMatrix::from_diagonal(&[q]).unwrap(),
            })
            .collect();
        let field = WeightedOperatorField::new(entries, false).unwrap();
        let theta = theta_divergence(f, &field).unwrap().entry(0, 0).re;
        let direct: f64 = pq.iter().map(|&(p, q)| q * f.eval(p / q)).sum();
        worst_rel = worst_rel.max((theta - direct).abs() / direct.abs().max(f64::MIN_POSITIVE));
        let (sp, sq) = pq.iter().fold((0.0, 0.0), |(a, b), &(p, q)| (a + p, b + q));
        let lower = sq * f.eval(sp / sq);
        if lower > theta + tol().at_scale(lower.abs().max(theta.abs())) {
            jensen_failures += 1;
        }
    }
    Verdict {
        pass: worst_rel <= CSISZAR_REL_TOL && jensen_failures == 0,
        detail: format!(
            "1000 tuples: worst relative deviation {worst_rel:.2e} (<= {CSISZAR_REL_TOL:e}), {jensen_failures} Jensen failures"
        ),
    }
}

fn ky_fan_norms() -> Verdict {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut example_parts = 0;
    for dim in 2..=6 {
        let r = run_check("THM3_8_NORM", &GenConfig::new(dim, 42, 200), &tol()).unwrap();
        violations += r.violations;
        worst = worst.min(r.worst_margin);
        example_parts += r
            .parts
            .iter()
            .filter(|p| p.name == "example/trace" || p.name == "example/spectral")
            .count();
    }
    Verdict {
        pass: violations == 0 && example_parts == 10,
        detail: format!(
            "dims 2-6, 200 trials, f in {{t^2, t^-1, -log t}} plus trace/spectral example: {violations} violations, worst margin {worst:.3e}"
        ),
    }
}

fn determinism() -> Verdict {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_opdiv"))
            .args(["verify", "--suite", "all", "--seed", "42"])
            .output()
            .expect("binary runs");
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON report");
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    let (a, b) = (run(), run());
    Verdict {
        pass: a == b,
        detail: format!(
            "two `verify --suite all --seed 42` runs {}",
            if a == b {
                "identical modulo wall_ms"
            } else {
                "differ"
            }
        ),
    }
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("example exact reproduction", example_exact),
        ("closed-form perspectives", closed_forms),
        ("full registry baseline", full_registry),
        ("falsification power", falsification),
        ("scalar reduction", scalar_reduction),
        ("Ky Fan norm inequality", ky_fan_norms),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failed += !v.pass as usize;
        println!(
            "criterion {} {name}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
