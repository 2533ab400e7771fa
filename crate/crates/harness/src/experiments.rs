//! Experiment runners. Each returns a [`ResultRecord`] whose checks decide
//! the exit status.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use csplab_core::analytic::{
    avg_advantage_2xor, edge_excess_degrees, golden_section_max, no_overlap_advantage,
};
use csplab_core::csp::Instance;
use csplab_core::greedy::run_greedy_restarts;
use csplab_core::qaoa::{advantage, build_cost, evolve, qaoa_state, QaoaParams};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{config_err, Result};
use crate::family::{instance_for, job_seed, lane, predicates_on, scopes_for};
use crate::record::{scale, Aggregate, Check, ResultRecord, Row};

/// `1/(2√e)`, the large-`D` limit of the 2XOR scaled advantage at `g = 1`.
pub fn two_xor_prefactor() -> f64 {
    0.5 * (-0.5f64).exp()
}

const DEFAULT_DISCREPANCY: f64 = 1e-10;
const DEFAULT_BASELINE: f64 = 1e-12;
const DEFAULT_SIGMA: f64 = 3.0;
const DEFAULT_POSITIVITY_SIGMA: f64 = 5.0;
const DEFAULT_RATIO_WINDOW: [f64; 2] = [0.6, 1.6];
const DEFAULT_PREFACTOR_REL: f64 = 0.25;
const DEFAULT_G_WINDOW: [f64; 2] = [0.8, 1.2];
const DEFAULT_LAMBDA_C: f64 = 0.1;
/// Shift applied to the phase operator in the offset-invariance check.
const OFFSET_SHIFT: f64 = 1.75;
const ANGLE_GRID: usize = 24;
const REFINE_ROUNDS: usize = 3;
const REFINE_TOL: f64 = 1e-6;

pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate(kind)?;
    if kind == ExperimentKind::ScanG && config.angles.optimize {
        return config_err("scan-g fixes γ through g; angles.optimize is not supported");
    }
    with_pool(config, || match kind {
        ExperimentKind::Validate => validate(config),
        ExperimentKind::Ensemble2xor => ensemble(config),
        ExperimentKind::ScanD => scan_d(config),
        ExperimentKind::ScanG => scan_g(config),
        ExperimentKind::GreedyStudy => greedy_study(config),
        ExperimentKind::VarianceStudy => variance_study(config),
        ExperimentKind::LambdaMin => lambda_min(config),
    })
}

pub fn run_validate(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::Validate, config)
}

pub fn run_ensemble_2xor(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::Ensemble2xor, config)
}

pub fn run_scan_d(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::ScanD, config)
}

pub fn run_scan_g(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::ScanG, config)
}

pub fn run_greedy_study(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::GreedyStudy, config)
}

pub fn run_variance_study(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::VarianceStudy, config)
}

pub fn run_lambda_min(config: &ExperimentConfig) -> Result<ResultRecord> {
    run(ExperimentKind::LambdaMin, config)
}

/// The instance `gen` writes: replication 0 at the family's own `D`.
pub fn generate(config: &ExperimentConfig) -> Result<Instance> {
    let f = &config.family;
    instance_for(f, f.excess_degree, config.seed, 0, 0)
}

fn with_pool<T: Send>(
    config: &ExperimentConfig,
    job: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = config.workers {
        builder = builder.num_threads(workers);
    }
    builder.build()?.install(job)
}

/// Runs `job` for every replication in parallel, keeping replication order.
fn replicate(
    config: &ExperimentConfig,
    job: impl Fn(u64) -> Result<Row> + Sync,
) -> Result<Vec<Row>> {
    (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let mut row = job(r)?;
            if config.record_timing {
                row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(row)
        })
        .collect()
}

fn base_row(
    point: usize,
    r: u64,
    seed: u64,
    d: usize,
    m: usize,
    params: QaoaParams,
    g: f64,
) -> Row {
    Row {
        point,
        replication: r,
        seed,
        excess_degree: d,
        m,
        beta: params.beta,
        gamma: params.gamma,
        g,
        ..Row::default()
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

fn validate(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let d = f.excess_degree;
    let g = config.angles.g;
    let params = config.angles.params(f, d, g);
    let policy = config.angles.policy;
    let rows = replicate(config, |r| {
        let seed = job_seed(config.seed, lane::PREDICATES, 0, r);
        let inst = instance_for(f, d, config.seed, 0, r)?;
        let cost = build_cost(&inst, policy)?;
        let state = evolve(&cost, params)?;
        let expectation = state.expectation(&inst)?;
        let mut row = base_row(0, r, seed, d, inst.m(), params, g);
        row.expectation = Some(expectation);
        row.set_advantage(expectation - inst.constant_total());
        if let Ok(analytic) = no_overlap_advantage(&inst, params.beta, params.gamma) {
            row.analytic = Some(analytic);
            row.discrepancy = Some((row.advantage - analytic).abs());
        }
        let zero = qaoa_state(&inst, policy, QaoaParams::new(0.0, 0.0))?.expectation(&inst)?;
        row.baseline_error = Some((zero - inst.constant_total()).abs());
        let shifted = evolve(&cost.shifted(OFFSET_SHIFT), params)?.probabilities();
        let shift = state
            .probabilities()
            .iter()
            .zip(&shifted)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        row.shift_error = Some(shift);
        Ok(row)
    })?;

    let tol = &config.tolerances;
    let mut record = ResultRecord::new(ExperimentKind::Validate, config, rows);
    let analytic_rows = record
        .rows
        .iter()
        .filter(|r| r.discrepancy.is_some())
        .count();
    record
        .metrics
        .insert("analytic_rows".into(), analytic_rows as f64);
    let baseline = max_of(record.rows.iter().filter_map(|r| r.baseline_error));
    let shift = max_of(record.rows.iter().filter_map(|r| r.shift_error));
    record.metrics.insert("max_baseline_error".into(), baseline);
    record.metrics.insert("max_shift_error".into(), shift);
    let baseline_tol = tol.baseline.unwrap_or(DEFAULT_BASELINE);
    if analytic_rows > 0 {
        let worst = max_of(record.rows.iter().filter_map(|r| r.discrepancy));
        record.metrics.insert("max_discrepancy".into(), worst);
        let limit = tol.discrepancy.unwrap_or(DEFAULT_DISCREPANCY);
        record
            .checks
            .push(Check::at_most("max_discrepancy", worst, limit));
    }
    record.checks.push(Check::at_most(
        "zero_angle_baseline",
        baseline,
        baseline_tol,
    ));
    record
        .checks
        .push(Check::at_most("offset_invariance", shift, baseline_tol));
    Ok(record)
}

/// `R` predicate resamples on one scope set drawn for `point`.
fn fixed_scope_rows(
    config: &ExperimentConfig,
    point: usize,
    d: usize,
) -> Result<(Vec<Row>, Instance)> {
    let f = &config.family;
    let g = config.angles.g;
    let params = config.angles.params(f, d, g);
    let scopes = scopes_for(f, d, job_seed(config.seed, lane::SCOPES, point, 0))?;
    let rows = replicate(config, |r| {
        let seed = job_seed(config.seed, lane::PREDICATES, point, r);
        let inst = predicates_on(f, &scopes, seed)?;
        let expectation = qaoa_state(&inst, config.angles.policy, params)?.expectation(&inst)?;
        let mut row = base_row(point, r, seed, d, inst.m(), params, g);
        row.expectation = Some(expectation);
        row.set_advantage(expectation - inst.constant_total());
        Ok(row)
    })?;
    let probe = predicates_on(
        f,
        &scopes,
        job_seed(config.seed, lane::PREDICATES, point, 0),
    )?;
    Ok((rows, probe))
}

/// `m(k(k−1)D + k)(D + 1)`.
pub fn variance_bound(m: usize, k: usize, d: usize) -> f64 {
    (m * (k * (k - 1) * d + k) * (d + 1)) as f64
}

fn variance_check(
    record: &mut ResultRecord,
    rows: &[Row],
    label: &str,
    m: usize,
    k: usize,
    d: usize,
) {
    let variance = Aggregate::of(rows.iter().filter_map(|r| r.expectation)).variance;
    let bound = variance_bound(m, k, d);
    record.metrics.insert(format!("variance{label}"), variance);
    record
        .metrics
        .insert(format!("variance_bound{label}"), bound);
    record
        .checks
        .push(Check::at_most(format!("variance{label}"), variance, bound));
}

fn ensemble(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let d = f.excess_degree;
    let (rows, probe) = fixed_scope_rows(config, 0, d)?;
    let mut record = ResultRecord::new(ExperimentKind::Ensemble2xor, config, rows);
    let rows = std::mem::take(&mut record.rows);
    variance_check(&mut record, &rows, "", probe.m(), f.arity(), d);
    if f.is_two_xor() {
        let p = config.angles.params(f, d, config.angles.g);
        let predicted = avg_advantage_2xor(&edge_excess_degrees(&probe)?, p.beta, p.gamma);
        let agg = record.aggregate;
        let sigma = config.tolerances.sigma.unwrap_or(DEFAULT_SIGMA);
        record.metrics.insert("analytic_mean".into(), predicted);
        record
            .metrics
            .insert("analytic_scaled".into(), scale(predicted, probe.m(), d));
        let deviation = (agg.mean - predicted).abs();
        record.checks.push(Check::at_most(
            "mean_vs_analytic",
            deviation,
            sigma * agg.standard_error,
        ));
    }
    record.rows = rows;
    Ok(record)
}

fn variance_study(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let mut all = Vec::new();
    let mut per_point = Vec::new();
    for (p, d) in config.d_points().into_iter().enumerate() {
        let (rows, probe) = fixed_scope_rows(config, p, d)?;
        per_point.push((d, probe.m(), rows.clone()));
        all.extend(rows);
    }
    let mut record = ResultRecord::new(ExperimentKind::VarianceStudy, config, all);
    for (d, m, rows) in per_point {
        let label = format!("[D={d}]");
        variance_check(&mut record, &rows, &label, m, f.arity(), d);
        // A replication fails when it keeps less than half the ensemble-mean advantage.
        let mean = Aggregate::of(rows.iter().map(|r| r.advantage)).mean;
        let failures = rows.iter().filter(|r| r.advantage < 0.5 * mean).count();
        record.metrics.insert(
            format!("failure_fraction{label}"),
            failures as f64 / rows.len() as f64,
        );
        record
            .metrics
            .insert(format!("d3_over_m{label}"), (d as f64).powi(3) / m as f64);
    }
    Ok(record)
}

/// Advantage of a point's instances as a function of the angles.
enum Scorer {
    Analytic(Vec<Vec<(usize, usize)>>),
    StateVector(Vec<Instance>),
}

impl Scorer {
    fn build(
        config: &ExperimentConfig,
        d: usize,
        point: usize,
    ) -> Result<(Self, Vec<(u64, usize)>)> {
        let f = &config.family;
        let instances = (0..config.replications as u64)
            .into_par_iter()
            .map(|r| instance_for(f, d, config.seed, point, r))
            .collect::<Result<Vec<_>>>()?;
        let meta = instances
            .iter()
            .enumerate()
            .map(|(r, inst)| {
                (
                    job_seed(config.seed, lane::PREDICATES, point, r as u64),
                    inst.m(),
                )
            })
            .collect();
        let scorer = if config.uses_state_vector() {
            Self::StateVector(instances)
        } else {
            Self::Analytic(
                instances
                    .iter()
                    .map(edge_excess_degrees)
                    .collect::<csplab_core::Result<_>>()?,
            )
        };
        Ok((scorer, meta))
    }

    fn score(&self, config: &ExperimentConfig, i: usize, params: QaoaParams) -> Result<f64> {
        match self {
            Self::Analytic(edges) => Ok(avg_advantage_2xor(&edges[i], params.beta, params.gamma)),
            Self::StateVector(instances) => {
                Ok(advantage(&instances[i], config.angles.policy, params)?)
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Self::Analytic(e) => e.len(),
            Self::StateVector(i) => i.len(),
        }
    }

    fn mean(&self, config: &ExperimentConfig, params: QaoaParams) -> f64 {
        let total: f64 = (0..self.len())
            .map(|i| self.score(config, i, params).unwrap_or(f64::NAN))
            .sum();
        total / self.len() as f64
    }

    fn rows(
        &self,
        config: &ExperimentConfig,
        meta: &[(u64, usize)],
        point: usize,
        d: usize,
        g: f64,
        params: QaoaParams,
    ) -> Result<Vec<Row>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let (seed, m) = meta[i];
                let start = Instant::now();
                let value = self.score(config, i, params)?;
                let mut row = base_row(point, i as u64, seed, d, m, params, g);
                row.set_advantage(value);
                if matches!(self, Self::Analytic(_)) {
                    row.analytic = Some(value);
                }
                if config.record_timing {
                    row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                Ok(row)
            })
            .collect()
    }
}

/// Grid search over `β ∈ [0, π/2]`, `γ ∈ [0, π]` followed by alternating
/// golden-section refinement.
fn optimize_angles(objective: impl Fn(QaoaParams) -> f64 + Sync) -> QaoaParams {
    let step_b = FRAC_PI_2 / ANGLE_GRID as f64;
    let step_g = PI / ANGLE_GRID as f64;
    let (mut best, _) = (0..=ANGLE_GRID)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..=ANGLE_GRID).map(move |j| QaoaParams::new(i as f64 * step_b, j as f64 * step_g))
        })
        .map(|p| (p, objective(p)))
        .reduce(
            || (QaoaParams::new(0.0, 0.0), f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && (b.0.beta, b.0.gamma) < (a.0.beta, a.0.gamma)) {
                    b
                } else {
                    a
                }
            },
        );
    for _ in 0..REFINE_ROUNDS {
        let gamma = best.gamma;
        best.beta = golden_section_max(
            |b| objective(QaoaParams::new(b, gamma)),
            best.beta - step_b,
            best.beta + step_b,
            REFINE_TOL,
        )
        .0;
        let beta = best.beta;
        best.gamma = golden_section_max(
            |c| objective(QaoaParams::new(beta, c)),
            best.gamma - step_g,
            best.gamma + step_g,
            REFINE_TOL,
        )
        .0;
    }
    best
}

fn scan_d(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let g = config.angles.g;
    let mut rows = Vec::new();
    for (p, d) in config.d_points().into_iter().enumerate() {
        let (scorer, meta) = Scorer::build(config, d, p)?;
        let params = if config.angles.optimize {
            optimize_angles(|q| scorer.mean(config, q))
        } else {
            config.angles.params(f, d, g)
        };
        rows.extend(scorer.rows(config, &meta, p, d, g, params)?);
    }
    let mut record = ResultRecord::new(ExperimentKind::ScanD, config, rows);
    let means: Vec<(usize, f64)> = record
        .points
        .iter()
        .map(|p| (p.excess_degree, p.scaled.mean))
        .collect();
    for &(d, s) in &means {
        record.metrics.insert(format!("scaled[D={d}]"), s);
    }
    let tol = &config.tolerances;
    let prefactor = if f.is_two_xor() && !config.angles.optimize {
        Some(tol.prefactor_rel.unwrap_or(DEFAULT_PREFACTOR_REL))
    } else {
        tol.prefactor_rel
    };
    if let (Some(rel), Some(&(d, s))) = (prefactor, means.iter().max_by_key(|(d, _)| *d)) {
        let target = two_xor_prefactor();
        record.checks.push(Check::at_most(
            format!("prefactor[D={d}]"),
            (s - target).abs() / target,
            rel,
        ));
    }
    if tol.decreasing.unwrap_or(false) {
        let decreasing = means.windows(2).all(|w| w[1].1 < w[0].1);
        record
            .checks
            .push(Check::holds("strictly_decreasing", decreasing));
    }
    Ok(record)
}

fn scan_g(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let d = f.excess_degree;
    let (scorer, meta) = Scorer::build(config, d, 0)?;
    let mut rows = Vec::new();
    for (p, &g) in config.grid.g_values.iter().enumerate() {
        rows.extend(scorer.rows(config, &meta, p, d, g, config.angles.params(f, d, g))?);
    }
    let mut record = ResultRecord::new(ExperimentKind::ScanG, config, rows);
    let gs = &config.grid.g_values;
    let best = record
        .points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.scaled.mean.total_cmp(&b.1.scaled.mean))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = gs[best.saturating_sub(1)];
    let hi = gs[(best + 1).min(gs.len() - 1)];
    let m_mean = meta.iter().map(|&(_, m)| m as f64).sum::<f64>() / meta.len() as f64;
    let (argmax, max) = if lo < hi {
        golden_section_max(
            |g| scorer.mean(config, config.angles.params(f, d, g)) / m_mean * (d as f64).sqrt(),
            lo,
            hi,
            REFINE_TOL,
        )
    } else {
        (gs[best], record.points[best].scaled.mean)
    };
    record.metrics.insert("grid_argmax_g".into(), gs[best]);
    record.metrics.insert("argmax_g".into(), argmax);
    record.metrics.insert("max_scaled".into(), max);
    let window = match config.tolerances.g_window {
        Some(w) => Some(w),
        None if f.is_two_xor() => Some(DEFAULT_G_WINDOW),
        None => None,
    };
    if let Some([a, b]) = window {
        record
            .checks
            .push(Check::within("argmax_g", argmax, Some(a), Some(b)));
    }
    Ok(record)
}

fn greedy_study(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let mut rows = Vec::new();
    for (p, d) in config.d_points().into_iter().enumerate() {
        rows.extend(replicate(config, |r| {
            let inst = instance_for(f, d, config.seed, p, r)?;
            let seed = job_seed(config.seed, lane::GREEDY, p, r);
            let outcome = run_greedy_restarts(&inst, seed, config.restarts);
            let mut row = base_row(p, r, seed, d, inst.m(), QaoaParams::new(0.0, 0.0), 0.0);
            row.greedy_value = Some(outcome.best.value);
            row.set_advantage(outcome.best.value - inst.constant_total());
            Ok(row)
        })?);
    }
    let mut record = ResultRecord::new(ExperimentKind::GreedyStudy, config, rows);
    let tol = &config.tolerances;
    let z = tol.positivity_sigma.unwrap_or(DEFAULT_POSITIVITY_SIGMA);
    let [lo, hi] = tol.ratio_window.unwrap_or(DEFAULT_RATIO_WINDOW);
    let points = record.points.clone();
    for p in &points {
        let d = p.excess_degree;
        record
            .metrics
            .insert(format!("scaled[D={d}]"), p.scaled.mean);
        let z_score = p.advantage.mean / p.advantage.standard_error;
        record
            .checks
            .push(Check::at_least(format!("positivity_z[D={d}]"), z_score, z));
    }
    for w in points.windows(2) {
        let ratio = w[1].scaled.mean / w[0].scaled.mean;
        let name = format!("ratio[D={}/D={}]", w[1].excess_degree, w[0].excess_degree);
        record
            .checks
            .push(Check::within(name, ratio, Some(lo), Some(hi)));
    }
    Ok(record)
}

fn lambda_min(config: &ExperimentConfig) -> Result<ResultRecord> {
    let f = &config.family;
    let d = f.excess_degree;
    let g = config.angles.g;
    let params = config.angles.params(f, d, g);
    let rows = replicate(config, |r| {
        let inst = instance_for(f, d, config.seed, 0, r)?;
        let energy = build_cost(&inst, config.angles.policy)?;
        let state = evolve(&energy.negated(), params)?;
        let shots_seed = job_seed(config.seed, lane::SHOTS, 0, r);
        let best = state
            .sample(config.shots, shots_seed)?
            .into_iter()
            .map(|z| energy.evaluate(z) + energy.constant_offset())
            .fold(f64::INFINITY, f64::min);
        let expected = state.cost_expectation(&energy)?;
        let mut row = base_row(0, r, shots_seed, d, inst.m(), params, g);
        row.expectation = Some(expected);
        row.set_advantage(energy.constant_offset() - expected);
        row.best_sample = Some(best);
        row.brute_force = Some(energy.extremes()?.min);
        Ok(row)
    })?;
    let mut record = ResultRecord::new(ExperimentKind::LambdaMin, config, rows);
    let c = config.tolerances.lambda_c.unwrap_or(DEFAULT_LAMBDA_C);
    let sqrt_d = (d as f64).sqrt();
    let measured = record
        .rows
        .iter()
        .map(|r| -r.best_sample.unwrap_or(f64::NAN) * sqrt_d / r.m as f64)
        .fold(f64::INFINITY, f64::min);
    let gap = record
        .rows
        .iter()
        .map(|r| r.best_sample.unwrap_or(f64::NAN) - r.brute_force.unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    let ratio = Aggregate::of(
        record
            .rows
            .iter()
            .map(|r| r.best_sample.unwrap_or(f64::NAN) / r.brute_force.unwrap_or(f64::NAN)),
    );
    record.metrics.insert("measured_c".into(), measured);
    record.metrics.insert("min_gap_to_minimum".into(), gap);
    record
        .metrics
        .insert("mean_best_over_minimum".into(), ratio.mean);
    record
        .checks
        .push(Check::at_least("best_energy_scaled", measured, c));
    record.checks.push(Check::at_least(
        "not_below_minimum",
        gap,
        -DEFAULT_BASELINE * record.rows.len() as f64,
    ));
    Ok(record)
}
