//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use csplab::experiments::two_xor_prefactor;
use csplab::family::instance_for;
use csplab::{
    run_ensemble_2xor, run_greedy_study, run_lambda_min, run_scan_d, run_scan_g, run_validate,
    run_variance_study, ExperimentConfig, ResultRecord,
};
use csplab_core::boolfn::MultilinearPoly;
use csplab_core::csp::PredicateDistribution;
use csplab_core::greedy::conditional_expectations;
use csplab_core::qaoa::{qaoa_state, CostPolicy, QaoaParams};
use csplab_core::rng::derive_seed;

const BASELINE_TOL: f64 = 1e-12;
const NO_OVERLAP_TOL: f64 = 1e-10;
const ENSEMBLE_SIGMA: f64 = 3.0;
const PREFACTOR_REL: f64 = 0.25;
const G_WINDOW: [f64; 2] = [0.8, 1.2];
const TYPICALITY_TOL: f64 = 1e-12;
const GREEDY_SIGMA: f64 = 5.0;
const GREEDY_RATIO: [f64; 2] = [0.6, 1.6];
const LAMBDA_C: f64 = 0.1;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("acceptance configs parse")
}

fn failed(record: &ResultRecord) -> String {
    record
        .failed_checks()
        .map(|c| format!("{}={:.4e}", c.name, c.value))
        .collect::<Vec<_>>()
        .join(", ")
}

fn zero_angle_baseline() -> Outcome {
    let families = [
        "[family]\nkind = \"sat\"\nk = 3\nn = 12\nexcess_degree = 3\n",
        "[family]\nkind = \"xor\"\nk = 2\nn = 14\nexcess_degree = 4\nfill = 0.9\n",
        "[family]\nkind = \"weighted-xor\"\nk = 3\nn = 10\nexcess_degree = 2\n",
        "[family]\nkind = \"cut\"\nn = 0\nexcess_degree = 5\nstructure = \"cliques\"\ncopies = 2\n",
        "[family]\nkind = \"xor\"\nk = 4\nn = 16\nexcess_degree = 2\nstructure = \"no-overlap\"\n",
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, text) in families.iter().enumerate() {
        let f = config(text).family;
        for r in 0..4 {
            let inst = instance_for(&f, f.excess_degree, 100 + i as u64, 0, r).unwrap();
            let value = qaoa_state(&inst, CostPolicy::Full, QaoaParams::new(0.0, 0.0))
                .unwrap()
                .expectation(&inst)
                .unwrap();
            worst = worst.max((value - inst.mu() * inst.m() as f64).abs());
            count += 1;
        }
    }
    outcome(
        worst <= BASELINE_TOL,
        format!("{count} instances, max |E - mu*m| = {worst:.2e}"),
    )
}

fn no_overlap_oracle() -> Outcome {
    let c = config(&format!(
        r#"
        seed = 2
        replications = 24
        [family]
        kind = "xor"
        k = 3
        n = 18
        excess_degree = 3
        structure = "triangle-free"
        [angles]
        beta = 0.3
        g = 1.0
        [tolerances]
        discrepancy = {NO_OVERLAP_TOL:e}
        "#
    ));
    let rec = run_validate(&c).unwrap();
    let triangle_free = (0..c.replications as u64).all(|r| {
        instance_for(&c.family, 3, c.seed, 0, r)
            .unwrap()
            .is_triangle_free()
    });
    let covered = rec.metric("analytic_rows") == Some(c.replications as f64);
    outcome(
        rec.passed() && covered && triangle_free,
        format!(
            "{} instances n = 18, max discrepancy {:.2e} (tol {NO_OVERLAP_TOL:e}) {}",
            c.replications,
            rec.metric("max_discrepancy").unwrap_or(f64::NAN),
            failed(&rec)
        ),
    )
}

fn two_xor_ensemble() -> Outcome {
    let c = config(&format!(
        r#"
        seed = 3
        replications = 500
        [family]
        kind = "xor"
        k = 2
        n = 14
        excess_degree = 4
        m = 30
        [angles]
        g = 1.0
        [tolerances]
        sigma = {ENSEMBLE_SIGMA:?}
        "#
    ));
    let rec = run_ensemble_2xor(&c).unwrap();
    let gamma_ok = (rec.rows[0].gamma - 0.5).abs() < 1e-15
        && (rec.rows[0].beta - std::f64::consts::FRAC_PI_8).abs() < 1e-15;
    let predicted = rec.metric("analytic_mean").unwrap_or(f64::NAN);
    let a = rec.aggregate;
    outcome(
        rec.passed() && gamma_ok,
        format!(
            "mean {:.5} +/- {:.5} vs analytic {predicted:.5} ({:.2} SE)",
            a.mean,
            a.standard_error,
            (a.mean - predicted).abs() / a.standard_error
        ),
    )
}

fn prefactor() -> Outcome {
    let family = r#"
        [family]
        kind = "xor"
        n = 18
        excess_degree = 16
        structure = "cliques"
        clique_size = 18
    "#;
    let d = config(&format!(
        "{family}\n[grid]\nd_values = [16]\n[tolerances]\nprefactor_rel = {PREFACTOR_REL:?}\n"
    ));
    let g = config(&format!(
        "{family}\n[grid]\ng_values = [0.4, 0.6, 0.8, 0.9, 1.0, 1.1, 1.2, 1.4, 1.6]\n[tolerances]\ng_window = [{:?}, {:?}]\n",
        G_WINDOW[0], G_WINDOW[1]
    ));
    let scan_d = run_scan_d(&d).unwrap();
    let scan_g = run_scan_g(&g).unwrap();
    let scaled = scan_d.metric("scaled[D=16]").unwrap_or(f64::NAN);
    let argmax = scan_g.metric("argmax_g").unwrap_or(f64::NAN);
    outcome(
        scan_d.passed() && scan_g.passed(),
        format!(
            "advantage*sqrt(D) = {scaled:.4} vs {:.4} ({:+.1}%), argmax g = {argmax:.3}",
            two_xor_prefactor(),
            100.0 * (scaled / two_xor_prefactor() - 1.0)
        ),
    )
}

fn variance_bound() -> Outcome {
    let c = config(
        r#"
        seed = 4
        replications = 500
        [family]
        kind = "xor"
        k = 3
        n = 14
        excess_degree = 4
        m = 20
        [grid]
        d_values = [4]
        "#,
    );
    let rec = run_variance_study(&c).unwrap();
    outcome(
        rec.passed(),
        format!(
            "variance {:.3e} <= bound {:.0}, failure fraction {:.3}",
            rec.metric("variance[D=4]").unwrap_or(f64::NAN),
            rec.metric("variance_bound[D=4]").unwrap_or(f64::NAN),
            rec.metric("failure_fraction[D=4]").unwrap_or(f64::NAN)
        ),
    )
}

fn typicality() -> Outcome {
    let mut ok = true;
    for k in 1..=3 {
        ok &= PredicateDistribution::kxor(k)
            .unwrap()
            .is_typical(TYPICALITY_TOL);
        ok &= PredicateDistribution::ksat(k)
            .unwrap()
            .is_typical(TYPICALITY_TOL);
    }
    let cut_typical = PredicateDistribution::cut().is_typical(TYPICALITY_TOL);
    outcome(
        ok && !cut_typical,
        format!("xor/sat k = 1..3 typical: {ok}, cut typical: {cut_typical}"),
    )
}

fn boolean_predicates(k: usize) -> impl Iterator<Item = MultilinearPoly> {
    let len = 1usize << k;
    (0u64..1 << len).map(move |bits| {
        let table: Vec<f64> = (0..len).map(|i| (bits >> i & 1) as f64).collect();
        MultilinearPoly::fourier_transform(&table).unwrap()
    })
}

fn derivative_variance_floor() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for k in 2..=3usize {
        let floor = 2f64.powi(-(k as i32) - 2);
        for p in boolean_predicates(k).filter(|p| p.depends_on_all()) {
            for i in 0..k {
                let v = p.derivative(i).unwrap().variance();
                tightest = tightest.min(v / floor);
                if v < floor - 1e-15 {
                    violations += 1;
                }
            }
            checked += 1;
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!("{checked} predicates, {violations} violations, min ratio to floor {tightest:.3}"),
    )
}

fn fraction_above_mean_floor() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for k in 1..=3usize {
        let floor = 0.25 * (-2.0 * k as f64).exp();
        for p in boolean_predicates(k).filter(|p| p.variance() > 0.0) {
            if p.fraction_above_mean() < floor {
                violations += 1;
            }
            checked += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{checked} nonconstant predicates, {violations} violations"),
    )
}

fn greedy_scaling() -> Outcome {
    let c = config(&format!(
        r#"
        seed = 1
        replications = 2000
        [family]
        kind = "xor"
        k = 3
        n = 400
        excess_degree = 4
        structure = "triangle-free"
        [grid]
        d_values = [4, 9, 16]
        [tolerances]
        positivity_sigma = {GREEDY_SIGMA:?}
        ratio_window = [{:?}, {:?}]
        "#,
        GREEDY_RATIO[0], GREEDY_RATIO[1]
    ));
    let rec = run_greedy_study(&c).unwrap();
    let detail = rec
        .points
        .iter()
        .map(|p| {
            format!(
                "D={}: {:.4} ({:.0} SE)",
                p.excess_degree,
                p.scaled.mean,
                p.advantage.mean / p.advantage.standard_error
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        rec.passed(),
        format!("advantage*sqrt(D) {detail} {}", failed(&rec)),
    )
}

fn conditional_expectation_guarantee() -> Outcome {
    let mut exceptions = 0;
    let mut worst = f64::INFINITY;
    for i in 0..1000u64 {
        let s = derive_seed(10, 0, i);
        let n = 10 + (s % 31) as usize;
        let d = 1 + (s >> 8) as usize % 6;
        let f = config(&format!(
            "[family]\nkind = \"sat\"\nk = 3\nn = {n}\nexcess_degree = {d}\n"
        ))
        .family;
        let inst = instance_for(&f, d, s, 0, 0).unwrap();
        let (_, value) = conditional_expectations(&inst);
        let target = 0.875 * inst.m() as f64;
        worst = worst.min(value - target);
        if value < target - 1e-9 {
            exceptions += 1;
        }
    }
    outcome(
        exceptions == 0,
        format!("1000 instances, {exceptions} below 7/8 m, min margin {worst:.3}"),
    )
}

fn lambda_min() -> Outcome {
    let c = config(&format!(
        r#"
        seed = 5
        replications = 20
        shots = 1000
        [family]
        kind = "weighted-xor"
        k = 3
        n = 18
        excess_degree = 9
        weights = {{ kind = "gaussian", sigma = 1.0 }}
        [tolerances]
        lambda_c = {LAMBDA_C:?}
        "#
    ));
    let rec = run_lambda_min(&c).unwrap();
    outcome(
        rec.passed(),
        format!(
            "min over instances of -best*sqrt(D)/m = {:.3} (threshold {LAMBDA_C}), min gap to brute force {:.2e}",
            rec.metric("measured_c").unwrap_or(f64::NAN),
            rec.metric("min_gap_to_minimum").unwrap_or(f64::NAN)
        ),
    )
}

fn clique_negative_control() -> Outcome {
    let c = config(
        r#"
        [family]
        kind = "cut"
        n = 0
        excess_degree = 3
        structure = "cliques"
        [angles]
        optimize = true
        [grid]
        d_values = [3, 5, 7]
        [tolerances]
        decreasing = true
        "#,
    );
    let rec = run_scan_d(&c).unwrap();
    let detail = rec
        .points
        .iter()
        .map(|p| format!("D={}: {:.4}", p.excess_degree, p.scaled.mean))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        rec.passed(),
        format!("optimized advantage*sqrt(D) {detail}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "zero-angle baseline", zero_angle_baseline),
        (2, "no-overlap oracle", no_overlap_oracle),
        (3, "2XOR ensemble mean", two_xor_ensemble),
        (4, "2XOR prefactor and g argmax", prefactor),
        (5, "variance bound", variance_bound),
        (6, "typicality classifier", typicality),
        (7, "derivative variance floor", derivative_variance_floor),
        (8, "fraction above mean floor", fraction_above_mean_floor),
        (9, "greedy positivity and scaling", greedy_scaling),
        (
            10,
            "conditional expectations 7/8",
            conditional_expectation_guarantee,
        ),
        (11, "lambda_min sampling", lambda_min),
        (12, "clique negative control", clique_negative_control),
    ];
    let mut failures = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {id:>2}: {verdict} [{name}] {} ({:.1}s)",
            o.detail.trim_end(),
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
