//! Exact state-vector simulation of single-layer QAOA.
//!
//! Basis index `z` encodes the assignment with `z_i = +1` when bit `i` is
//! clear. The state is `e^{-iβB} e^{-iγC} |s⟩` with `B = Σ X_i` and `C` a
//! diagonal sum of weighted `Z`-monomials.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{character, spin_at};
use crate::csp::Instance;
use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

/// Default ceiling on simulated variables (2^24 amplitudes ≈ 256 MiB).
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Below this many qubits the sweeps run on the calling thread.
const PARALLEL_MIN_QUBITS: usize = 14;

/// Which monomials of each predicate drive the phase separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostPolicy {
    /// Every nonconstant monomial of every predicate.
    Full,
    /// One highest-degree monomial per predicate.
    Truncated,
}

/// Diagonal operator `Σ w_K Z^K + constant_offset` over `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CostOperator {
    n: usize,
    terms: Vec<(u64, f64)>,
    constant_offset: f64,
}

impl CostOperator {
    /// Merges repeated masks and folds the empty mask into the offset.
    pub fn from_terms(
        n: usize,
        terms: impl IntoIterator<Item = (u64, f64)>,
        constant_offset: f64,
    ) -> Result<Self> {
        if n > 64 {
            return Err(Error::Resource(format!(
                "cost operators support at most 64 variables, got {n}"
            )));
        }
        let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
        let mut offset = constant_offset;
        for (mask, w) in terms {
            if n < 64 && mask >> n != 0 {
                return invalid(format!("mask {mask:#b} mentions variables beyond n = {n}"));
            }
            if mask == 0 {
                offset += w;
            } else {
                *merged.entry(mask).or_insert(0.0) += w;
            }
        }
        Ok(Self {
            n,
            terms: merged.into_iter().collect(),
            constant_offset: offset,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(mask, weight)` pairs in ascending mask order.
    pub fn terms(&self) -> &[(u64, f64)] {
        &self.terms
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    /// `C(z)` without the constant offset.
    pub fn evaluate(&self, z: u64) -> f64 {
        self.terms
            .iter()
            .map(|&(mask, w)| w * character(mask, z))
            .sum()
    }

    /// `C(z)` for all `2^n` basis states, offset excluded.
    pub fn diagonal(&self) -> Vec<f64> {
        let len = 1usize << self.n;
        let mut out = vec![0.0; len];
        let fill = |(chunk_index, chunk): (usize, &mut [f64])| {
            let base = (chunk_index * CHUNK) as u64;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = self.evaluate(base + i as u64);
            }
        };
        if self.n >= PARALLEL_MIN_QUBITS {
            out.par_chunks_mut(CHUNK).enumerate().for_each(fill);
        } else {
            out.chunks_mut(CHUNK).enumerate().for_each(fill);
        }
        out
    }

    /// Same terms plus `delta` on the offset.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            constant_offset: self.constant_offset + delta,
            ..self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|&(m, w)| (m, -w)).collect(),
            constant_offset: -self.constant_offset,
        }
    }

    /// Exhaustive extremes of `C(z) + offset`.
    pub fn extremes(&self) -> Result<Extremes> {
        check_qubits(self.n, DEFAULT_MAX_QUBITS)?;
        Ok(Extremes::of_diagonal(
            &self.diagonal(),
            self.constant_offset,
        ))
    }
}

const CHUNK: usize = 4096;

/// Builds the phase-separator operator of an instance.
///
/// Scope-local masks are mapped to global variable masks. With
/// [`CostPolicy::Truncated`] each constraint keeps one highest-degree
/// monomial, ties going to the numerically smallest global mask. Monomials
/// shared by several constraints are merged by adding weights.
pub fn build_cost(instance: &Instance, policy: CostPolicy) -> Result<CostOperator> {
    let mut terms = Vec::new();
    let mut offset = 0.0;
    for c in instance.constraints() {
        let poly = c.predicate();
        offset += poly.mean();
        let nonconstant = poly.terms().filter(|&(mask, _)| mask != 0);
        match policy {
            CostPolicy::Full => terms.extend(nonconstant.map(|(mask, w)| (c.global_mask(mask), w))),
            CostPolicy::Truncated => {
                let best = nonconstant
                    .map(|(mask, w)| (mask.count_ones(), c.global_mask(mask), w))
                    .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                if let Some((_, mask, w)) = best {
                    terms.push((mask, w));
                }
            }
        }
    }
    CostOperator::from_terms(instance.n(), terms, offset)
}

/// Maximum and minimum of a diagonal objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub argmax: u64,
    pub max: f64,
    pub argmin: u64,
    pub min: f64,
}

impl Extremes {
    fn of_diagonal(diagonal: &[f64], offset: f64) -> Self {
        let mut out = Self {
            argmax: 0,
            max: f64::NEG_INFINITY,
            argmin: 0,
            min: f64::INFINITY,
        };
        for (z, &v) in diagonal.iter().enumerate() {
            let v = v + offset;
            if v > out.max {
                out.max = v;
                out.argmax = z as u64;
            }
            if v < out.min {
                out.min = v;
                out.argmin = z as u64;
            }
        }
        out
    }
}

/// Exhaustive optimum of the full objective `Σ_l ψ_l(z)`.
pub fn brute_force_optimum(instance: &Instance) -> Result<Extremes> {
    build_cost(instance, CostPolicy::Full)?.extremes()
}

/// Spin vector for basis index `z`.
pub fn assignment_from_index(z: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| spin_at(z, i)).collect()
}

/// Angles of a single QAOA layer, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub beta: f64,
    pub gamma: f64,
}

impl QaoaParams {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }

    /// `γ = g / sqrt(D)`.
    pub fn from_g(beta: f64, g: f64, excess_degree: usize) -> Self {
        Self {
            beta,
            gamma: g / (excess_degree.max(1) as f64).sqrt(),
        }
    }
}

fn check_qubits(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return invalid("state needs at least one variable");
    }
    if n > cap {
        return Err(Error::Resource(format!(
            "{n} variables exceed the state-vector cap of {cap}"
        )));
    }
    Ok(())
}

/// Amplitudes over the `2^n` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl QaoaState {
    /// `|s⟩`, the uniform superposition.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::uniform_with_cap(n, DEFAULT_MAX_QUBITS)
    }

    pub fn uniform_with_cap(n: usize, cap: usize) -> Result<Self> {
        check_qubits(n, cap)?;
        let len = 1usize << n;
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(Self {
            n,
            amplitudes: vec![a; len],
        })
    }

    /// The basis state `|z⟩`.
    pub fn basis(n: usize, z: u64) -> Result<Self> {
        check_qubits(n, DEFAULT_MAX_QUBITS)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        let slot = amplitudes
            .get_mut(z as usize)
            .ok_or_else(|| Error::InvalidInput(format!("basis index {z} out of range")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    /// Wraps raw amplitudes; the norm must be 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() || amplitudes.len() < 2 {
            return invalid("amplitude count must be a power of two ≥ 2");
        }
        let n = amplitudes.len().trailing_zeros() as usize;
        let state = Self { n, amplitudes };
        if (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return invalid(format!("state norm² is {}", state.norm_sqr()));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `z` by `exp(-iγ C(z))`; the offset is a global phase and is skipped.
    pub fn apply_phase(&mut self, cost: &CostOperator, gamma: f64) -> Result<()> {
        self.check_n(cost.n())?;
        let diagonal = cost.diagonal();
        self.apply_phase_diagonal(&diagonal, gamma)
    }

    /// As [`Self::apply_phase`] with a precomputed diagonal.
    pub fn apply_phase_diagonal(&mut self, diagonal: &[f64], gamma: f64) -> Result<()> {
        if diagonal.len() != self.amplitudes.len() {
            return invalid("diagonal length does not match the state");
        }
        let rotate = |(a, &c): (&mut Complex64, &f64)| *a *= Complex64::from_polar(1.0, -gamma * c);
        if self.n >= PARALLEL_MIN_QUBITS {
            self.amplitudes
                .par_iter_mut()
                .zip(diagonal.par_iter())
                .for_each(rotate);
        } else {
            self.amplitudes
                .iter_mut()
                .zip(diagonal.iter())
                .for_each(rotate);
        }
        Ok(())
    }

    /// Applies `exp(-iβX)` on every variable.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (c, s) = (beta.cos(), beta.sin());
        let minus_i_sin = Complex64::new(0.0, -s);
        let rotate_pair = move |lo: &mut Complex64, hi: &mut Complex64| {
            let (a, b) = (*lo, *hi);
            *lo = a * c + b * minus_i_sin;
            *hi = b * c + a * minus_i_sin;
        };
        let parallel = self.n >= PARALLEL_MIN_QUBITS;
        for q in 0..self.n {
            let half = 1usize << q;
            let rotate_block = |block: &mut [Complex64]| {
                let (lo, hi) = block.split_at_mut(half);
                lo.iter_mut()
                    .zip(hi.iter_mut())
                    .for_each(|(a, b)| rotate_pair(a, b));
            };
            let blocks = self.amplitudes.len() / (2 * half);
            if !parallel {
                self.amplitudes.chunks_mut(2 * half).for_each(rotate_block);
            } else if blocks >= 64 {
                self.amplitudes
                    .par_chunks_mut(2 * half)
                    .for_each(rotate_block);
            } else {
                for block in self.amplitudes.chunks_mut(2 * half) {
                    let (lo, hi) = block.split_at_mut(half);
                    lo.par_iter_mut()
                        .zip(hi.par_iter_mut())
                        .for_each(|(a, b)| rotate_pair(a, b));
                }
            }
        }
    }

    /// `Σ_z |amp(z)|² (C(z) + offset)`.
    pub fn cost_expectation(&self, cost: &CostOperator) -> Result<f64> {
        self.check_n(cost.n())?;
        let probs = self.probabilities();
        let mut total = cost.constant_offset();
        for &(mask, w) in cost.terms() {
            total += w * z_expectation(&probs, mask);
        }
        Ok(total)
    }

    /// `⟨Σ_l ψ_l(Z)⟩` over the full predicates, constants included.
    pub fn expectation(&self, instance: &Instance) -> Result<f64> {
        Ok(self.per_constraint_expectation(instance)?.iter().sum())
    }

    /// `⟨ψ_l(Z)⟩` for every constraint `l`.
    pub fn per_constraint_expectation(&self, instance: &Instance) -> Result<Vec<f64>> {
        self.check_n(instance.n())?;
        let probs = self.probabilities();
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let values = instance
            .constraints()
            .iter()
            .map(|c| {
                c.predicate()
                    .terms()
                    .map(|(local, w)| {
                        let mask = c.global_mask(local);
                        let z = *cache
                            .entry(mask)
                            .or_insert_with(|| z_expectation(&probs, mask));
                        w * z
                    })
                    .sum()
            })
            .collect();
        Ok(values)
    }

    /// `shots` i.i.d. basis indices drawn from `|amp(z)|²`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return invalid("shots must be at least 1");
        }
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut rng = rng_from_seed(seed);
        Ok((0..shots).map(|_| dist.sample(&mut rng) as u64).collect())
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n {
            return invalid(format!(
                "operator on {n} variables applied to a {}-variable state",
                self.n
            ));
        }
        Ok(())
    }
}

/// `Σ_z p(z) χ_mask(z)`.
fn z_expectation(probs: &[f64], mask: u64) -> f64 {
    if mask == 0 {
        return probs.iter().sum();
    }
    let chunk_sum = |(c, chunk): (usize, &[f64])| -> f64 {
        let base = (c * CHUNK) as u64;
        chunk
            .iter()
            .enumerate()
            .map(|(i, p)| p * character(mask, base + i as u64))
            .sum()
    };
    // Fixed chunking keeps the summation order, and so the result bits,
    // independent of the thread count.
    let partials: Vec<f64> = if probs.len() >= 1 << PARALLEL_MIN_QUBITS {
        probs.par_chunks(CHUNK).enumerate().map(chunk_sum).collect()
    } else {
        probs.chunks(CHUNK).enumerate().map(chunk_sum).collect()
    };
    partials.iter().sum()
}

/// `e^{-iβB} e^{-iγC} |s⟩` for the given cost operator.
pub fn evolve(cost: &CostOperator, params: QaoaParams) -> Result<QaoaState> {
    let mut state = QaoaState::uniform(cost.n())?;
    state.apply_phase(cost, params.gamma)?;
    state.apply_mixer(params.beta);
    Ok(state)
}

/// Builds the cost for `policy` and evolves the uniform state.
pub fn qaoa_state(
    instance: &Instance,
    policy: CostPolicy,
    params: QaoaParams,
) -> Result<QaoaState> {
    evolve(&build_cost(instance, policy)?, params)
}

/// `⟨Σ_l ψ_l⟩ − μm` for one QAOA layer.
pub fn advantage(instance: &Instance, policy: CostPolicy, params: QaoaParams) -> Result<f64> {
    let state = qaoa_state(instance, policy, params)?;
    Ok(state.expectation(instance)? - instance.constant_total())
}

/// The highest-scoring sample and its objective value.
pub fn best_of(samples: &[u64], instance: &Instance) -> Result<(Vec<i8>, f64)> {
    let mut best: Option<(u64, f64)> = None;
    for &z in samples {
        let value: f64 = instance
            .constraints()
            .iter()
            .map(|c| c.evaluate_global_index(z))
            .sum();
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((z, value));
        }
    }
    let (z, value) = best.ok_or_else(|| Error::InvalidInput("no samples".into()))?;
    Ok((assignment_from_index(z, instance.n()), value))
}
