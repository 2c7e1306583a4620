//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Run with `cargo test --test acceptance`.

mod common;

use std::path::Path;
use std::time::Instant;

use abperc::bounds::{asymptotic_constant, bound_row, mu_bound_optimized, q_coupling, BoundInputs};
use abperc::connectivity::{lln_sweep, min_degree_diagnostic, rho_threshold, SweepConfig};
use abperc::geomgraph::is_connected_g1;
use abperc::harness::run_cli;
use abperc::latticecoupling::{binomial_two_sided_p, sample_coupled_fields, MarginalCounts};
use abperc::percolation::{estimate_lambda_c, estimate_mu_c, BoxSetup, LambdaSearch, MuOptions, MuOutcome};
use abperc::Region;
use common::*;
use rand::Rng;

const SEED: u64 = 20240601;
const LAMBDA_C_REF: f64 = 0.35911;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut g = rng(SEED);
    let mut mismatches = 0;
    for _ in 0..100 {
        let m = g.random_range(0..=40);
        let k = g.random_range(0..=40);
        let x = uniform_pattern(Region::unit_square(), m, &mut g);
        let y = uniform_pattern(Region::unit_square(), k, &mut g);
        if rho_threshold(&x, &y).unwrap() != rho_by_scan(&x, &y) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches in 100 instances, {secs:.2}s"))
}

fn g1_equivalence() -> Outcome {
    let start = Instant::now();
    let mut g = rng(SEED + 1);
    let mut mismatches = 0;
    for _ in 0..200 {
        let m = g.random_range(0..=30);
        let k = g.random_range(0..=30);
        let r = g.random_range(0.05..0.5);
        let x = uniform_pattern(Region::unit_square(), m, &mut g);
        let y = uniform_pattern(Region::unit_square(), k, &mut g);
        if is_connected_g1(&x, &y, r).unwrap() != matrix_connected(&g1_matrix(&x, &y, r)) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches in 200 instances, {secs:.2}s"))
}

fn lambda_search(r: f64, threads: usize) -> LambdaSearch {
    let scale = r * r;
    let setup = BoxSetup::new(r, 30.0 * r, 400, SEED);
    pool(threads).install(|| estimate_lambda_c(&setup, 0.02 / scale, None)).unwrap()
}

fn one_type_critical(s: &LambdaSearch) -> Outcome {
    let e = &s.estimate;
    let pass = (0.287..=0.431).contains(&e.estimate) && e.width() <= 0.02;
    outcome(pass, format!("lambda_hat = {:.4} in [{:.4}, {:.4}]", e.estimate, e.low, e.high))
}

fn scaling_law(r1: &LambdaSearch, r2: &LambdaSearch) -> Outcome {
    let (a, b) = (&r1.estimate, &r2.estimate);
    let (lo, hi) = (4.0 * b.low, 4.0 * b.high);
    let overlap = lo <= a.high && a.low <= hi;
    outcome(
        overlap,
        format!("r=1: [{:.5}, {:.5}], 4 x (r=2): [{lo:.5}, {hi:.5}], r=2 estimate {:.5}", a.low, a.high, b.estimate),
    )
}

fn mu_setup() -> BoxSetup {
    BoxSetup::new(1.0, 30.0, 400, SEED + 2)
}

fn mu_empirics(lambda_hat: f64) -> (Outcome, Option<f64>) {
    let setup = mu_setup();
    let opts = MuOptions::default();
    let above = estimate_mu_c(&setup, 2.0 * lambda_hat, 0.05, &opts).unwrap();
    let below = estimate_mu_c(&setup, 0.5 * lambda_hat, 0.05, &opts).unwrap();
    let mu_hat = above.estimate().map(|e| e.estimate);
    let none_below = matches!(below.outcome, MuOutcome::NoPercolation { .. });
    let detail = format!(
        "mu_hat(2 lambda_hat) = {}, 0.5 lambda_hat: {}",
        mu_hat.map(|m| format!("{m:.4}")).unwrap_or_else(|| "none".into()),
        if none_below { "no percolation up to mu_max".to_string() } else { format!("{:?}", below.outcome) }
    );
    (outcome(mu_hat.is_some_and(f64::is_finite) && none_below, detail), mu_hat)
}

fn bound_dominance(lambda_hat: f64, mu_hat: Option<f64>) -> Outcome {
    let Some(mu_hat) = mu_hat else {
        return outcome(false, "no finite mu_hat to compare against".into());
    };
    let with_hat = mu_bound_optimized(&BoundInputs::new(2, 1.0, 2.0 * lambda_hat, lambda_hat)).unwrap().mu_hat;
    let with_ref = mu_bound_optimized(&BoundInputs::new(2, 1.0, 2.0 * LAMBDA_C_REF, LAMBDA_C_REF)).unwrap().mu_hat;
    outcome(
        with_hat > mu_hat && with_ref > mu_hat,
        format!("bound {with_hat:.4e} (lambda_c = lambda_hat), {with_ref:.4e} (reference) vs mu_hat {mu_hat:.4}"),
    )
}

fn divergence_rate() -> Outcome {
    let start = Instant::now();
    let c = asymptotic_constant(1.0, LAMBDA_C_REF, 2);
    let values: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&d| mu_bound_optimized(&BoundInputs::new(2, 1.0, LAMBDA_C_REF + d, LAMBDA_C_REF)).unwrap().normalized())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let last = values[2] <= 1.5 * c;
    outcome(
        monotone && last && secs < 1.0,
        format!(
            "normalized {:.2}, {:.2}, {:.2}; C = {c:.2}, 1.5C = {:.2}; {secs:.3}s",
            values[0],
            values[1],
            values[2],
            1.5 * c
        ),
    )
}

fn lln_trend() -> Outcome {
    let main = lln_sweep(&SweepConfig { n_grid: vec![1e3, 1e4, 1e5], tau_grid: vec![4.0], trials: 30, seed: SEED + 3 })
        .unwrap();
    let side =
        lln_sweep(&SweepConfig { n_grid: vec![1e4], tau_grid: vec![1.0, 16.0], trials: 30, seed: SEED + 3 }).unwrap();
    let med: Vec<f64> = [1e3, 1e4, 1e5].iter().map(|&n| main.cell(n, 4.0).unwrap().median).collect();
    let m1 = side.cell(1e4, 1.0).unwrap().median;
    let m16 = side.cell(1e4, 16.0).unwrap().median;
    let pass = med.windows(2).all(|w| w[1] <= w[0]) && med.iter().all(|&m| m >= 0.25) && med[2] <= 0.6 && m1 > m16;
    outcome(
        pass,
        format!("tau=4 medians {:.3}, {:.3}, {:.3}; n=1e4 tau=1 {m1:.3} vs tau=16 {m16:.3}", med[0], med[1], med[2]),
    )
}

fn min_degree() -> Outcome {
    let low = min_degree_diagnostic(1e5, 1.0, 0.5, 30, SEED + 4).unwrap();
    let high = min_degree_diagnostic(1e5, 1.0, 3.0, 30, SEED + 4).unwrap();
    let (fl, fh) = (low.fraction.unwrap(), high.fraction.unwrap());
    outcome(fl >= 0.9 && fh <= 0.1, format!("zero min degree: alpha=0.5 {fl:.3}, alpha=3 {fh:.3}"))
}

fn coupling_laws() -> Outcome {
    // (extent, epsilon, t, p_lambda, p_nu, fields)
    let mut cases =
        vec![(200usize, 1.0, 1.0, 0.5, 0.2, 4u64), (150, 1.0, 2.0, 0.3, 0.25, 4), (120, 0.5, 1.2, 0.8, 0.1, 4)];
    // parameters of one bound evaluation: d=2, r=1, lambda=2 lambda_c, alpha=0.5
    let row = bound_row(&BoundInputs::new(2, 1.0, 2.0 * LAMBDA_C_REF, LAMBDA_C_REF), 0.5).unwrap();
    cases.push((80, row.epsilon, row.t, row.p_lambda, row.p_nu, 3));

    let mut worst = 1.0f64;
    let mut violations = 0;
    for (i, &(extent, eps, t, pl, pn, fields)) in cases.iter().enumerate() {
        let mut total = MarginalCounts::default();
        let mut delta = 0;
        for f in 0..fields {
            let field = sample_coupled_fields(&[extent, extent], eps, t, pl, pn, SEED + 100 * i as u64 + f).unwrap();
            total += field.interior_counts();
            violations += field.implication_violations();
            delta = field.delta();
        }
        let q = q_coupling(pn, pl, delta).unwrap();
        for (ones, p) in [(total.t_ones, pl), (total.v_ones, pn), (total.w_ones, q)] {
            worst = worst.min(binomial_two_sided_p(ones, total.sites, p));
        }
    }
    outcome(
        worst >= 1e-3 && violations == 0,
        format!("smallest p-value {worst:.4} over {} cases, {violations} implication violations", cases.len()),
    )
}

fn csv_data(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn reproducibility(full_runs_match: bool) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 7] = [
        &["sample", "--intensity", "200"],
        &["percolate", "--side", "10", "--trials", "60", "--tol", "0.05"],
        &["mu-c", "--side", "10", "--trials", "60", "--lambda", "0.7", "--tol", "0.1"],
        &["bound", "--lambda", "0.5", "--lambda-c", "0.35911"],
        &["lln", "--n", "1000,4000", "--tau", "1,4", "--trials", "6"],
        &["mindeg", "--n", "5000", "--tau", "1", "--alpha", "0.8", "--trials", "8"],
        &["couple-test", "--extent", "60", "--t", "1.5", "--p-lambda", "0.5", "--p-nu", "0.3", "--fields", "3"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let mut data = Vec::new();
        for jobs in ["1", "2", "3"] {
            let out = dir.path().join(format!("{}-{jobs}", args[0]));
            let mut argv = vec!["abperc", "--seed", "77", "--jobs", jobs, "--out", out.to_str().unwrap()];
            argv.extend_from_slice(args);
            let run = run_cli(argv).unwrap();
            data.push(csv_data(&run.data));
        }
        if data.windows(2).any(|w| w[0] != w[1]) {
            differing.push(args[0]);
        }
    }
    outcome(
        differing.is_empty() && full_runs_match,
        format!("7 subcommands x 3 thread counts; differing: {differing:?}; full lambda search 1 vs 2 threads identical: {full_runs_match}"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id, name, o: Outcome| {
        println!("{} criterion {id:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    record(1, "threshold oracle", oracle_equivalence());
    record(2, "G1 equivalence", g1_equivalence());

    let r1 = lambda_search(1.0, 1);
    let lambda_hat = r1.estimate.estimate;
    record(3, "one-type critical intensity", one_type_critical(&r1));
    let r2 = lambda_search(2.0, 1);
    record(4, "scaling law", scaling_law(&r1, &r2));

    let (o5, mu_hat) = mu_empirics(lambda_hat);
    record(5, "critical mu empirics", o5);
    record(6, "bound dominance", bound_dominance(lambda_hat, mu_hat));
    record(7, "bound divergence rate", divergence_rate());
    record(8, "threshold trend", lln_trend());
    record(9, "minimum degree", min_degree());
    record(10, "coupling laws", coupling_laws());

    let again = lambda_search(1.0, 2);
    let same = serde_json::to_string(&again.probes).unwrap() == serde_json::to_string(&r1.probes).unwrap();
    record(11, "reproducibility", reproducibility(same));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
