//! Classical baselines: the random-partition greedy algorithm and the
//! method of conditional expectations.

use std::collections::BTreeMap;

use rand::Rng;

use crate::csp::Instance;
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed, SeededRng};

const TIE_EPS: f64 = 1e-12;

/// Split of the variables into a fixed part `F`, assigned at random, and a
/// greedy part `G`, assigned from `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    in_greedy: Vec<bool>,
    fixed_values: Vec<i8>,
}

impl Partition {
    /// `greedy` lists the variables of `G`; `fixed_values` holds `±1` for
    /// every variable, of which only entries in `F` are used.
    pub fn new(n: usize, greedy: &[usize], fixed_values: Vec<i8>) -> Result<Self> {
        if fixed_values.len() != n {
            return invalid("fixed assignment length differs from n");
        }
        if fixed_values.iter().any(|&x| x != 1 && x != -1) {
            return invalid("fixed assignment entries must be ±1");
        }
        let mut in_greedy = vec![false; n];
        for &v in greedy {
            if v >= n {
                return invalid(format!("greedy variable {v} out of range"));
            }
            in_greedy[v] = true;
        }
        Ok(Self {
            in_greedy,
            fixed_values,
        })
    }

    /// Each variable joins `G` with probability 1/2; `F` values are uniform.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let in_greedy = (0..n).map(|_| rng.gen::<bool>()).collect();
        let fixed_values = (0..n)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Self {
            in_greedy,
            fixed_values,
        }
    }

    pub fn is_greedy(&self, v: usize) -> bool {
        self.in_greedy[v]
    }

    pub fn greedy_set(&self) -> Vec<usize> {
        (0..self.in_greedy.len())
            .filter(|&v| self.in_greedy[v])
            .collect()
    }

    pub fn fixed_set(&self) -> Vec<usize> {
        (0..self.in_greedy.len())
            .filter(|&v| !self.in_greedy[v])
            .collect()
    }

    pub fn fixed_values(&self) -> &[i8] {
        &self.fixed_values
    }
}

/// Sparse polynomial over global variables, keyed by sorted variable lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparsePoly {
    terms: BTreeMap<Vec<usize>, f64>,
}

impl SparsePoly {
    pub fn add_term(&mut self, vars: Vec<usize>, value: f64) {
        *self.terms.entry(vars).or_insert(0.0) += value;
    }

    pub fn constant(&self) -> f64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn evaluate(&self, x: &[i8]) -> f64 {
        self.terms
            .iter()
            .map(|(vars, c)| c * vars.iter().map(|&v| x[v] as f64).product::<f64>())
            .sum()
    }
}

/// Active constraints of one greedy variable and its score polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveEntry {
    pub var: usize,
    /// `N_j`: active constraints containing the variable.
    pub constraints: Vec<usize>,
    /// `Q̃_j = Σ_{l∈N_j} ∂_j ψ_l`, over `F` variables only.
    pub q_tilde: SparsePoly,
    /// `θ_j = E_x[Q̃_j]`.
    pub theta: f64,
}

/// Classifies constraints as active (exactly one scope variable in `G`)
/// and builds one entry per greedy variable, in ascending order.
pub fn active_set(instance: &Instance, partition: &Partition) -> Vec<ActiveEntry> {
    let mut entries: BTreeMap<usize, ActiveEntry> = partition
        .greedy_set()
        .into_iter()
        .map(|var| {
            (
                var,
                ActiveEntry {
                    var,
                    constraints: Vec::new(),
                    q_tilde: SparsePoly::default(),
                    theta: 0.0,
                },
            )
        })
        .collect();
    for (l, c) in instance.constraints().iter().enumerate() {
        let mut greedy = c
            .scope()
            .iter()
            .enumerate()
            .filter(|(_, &v)| partition.is_greedy(v));
        let (Some((local, &var)), None) = (greedy.next(), greedy.next()) else {
            continue;
        };
        let entry = entries.get_mut(&var).expect("greedy variable has an entry");
        entry.constraints.push(l);
        let derivative = c
            .predicate()
            .derivative(local)
            .expect("local coordinate in range");
        for (mask, value) in derivative.terms() {
            let mut vars: Vec<usize> = (0..c.arity())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| c.scope()[i])
                .collect();
            vars.sort_unstable();
            entry.q_tilde.add_term(vars, value);
        }
    }
    entries
        .into_values()
        .map(|mut e| {
            e.theta = e.q_tilde.constant();
            e
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub assignment: Vec<i8>,
    pub value: f64,
    pub active_constraints: usize,
}

/// One run of the partition algorithm; deterministic per seed.
pub fn run_greedy(instance: &Instance, seed: u64) -> GreedyOutcome {
    let mut rng = rng_from_seed(seed);
    let partition = Partition::random(instance.n(), &mut rng);
    run_greedy_with_partition(instance, &partition, &mut rng)
}

/// Completes `partition` greedily: `x_j = sgn(Q̃_j(x_F) − θ_j)`, with zero
/// broken by a fair coin from `rng`.
pub fn run_greedy_with_partition(
    instance: &Instance,
    partition: &Partition,
    rng: &mut SeededRng,
) -> GreedyOutcome {
    let mut assignment = partition.fixed_values().to_vec();
    let entries = active_set(instance, partition);
    // Q̃_j mentions F variables only, so assignment order is irrelevant.
    let mut chosen = Vec::with_capacity(entries.len());
    for e in &entries {
        let score = e.q_tilde.evaluate(partition.fixed_values()) - e.theta;
        let x = if score > TIE_EPS {
            1
        } else if score < -TIE_EPS {
            -1
        } else if rng.gen::<bool>() {
            1
        } else {
            -1
        };
        chosen.push((e.var, x));
    }
    for (var, x) in chosen {
        assignment[var] = x;
    }
    let value = instance
        .count_satisfied(&assignment)
        .expect("full ±1 assignment");
    GreedyOutcome {
        assignment,
        value,
        active_constraints: entries.iter().map(|e| e.constraints.len()).sum(),
    }
}

/// Independent restarts of [`run_greedy`] with the best outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRestarts {
    pub best: GreedyOutcome,
    pub values: Vec<f64>,
}

pub fn run_greedy_restarts(instance: &Instance, seed: u64, restarts: usize) -> GreedyRestarts {
    let outcomes: Vec<GreedyOutcome> = (0..restarts.max(1) as u64)
        .map(|r| run_greedy(instance, derive_seed(seed, 0x67726565, r)))
        .collect();
    let values = outcomes.iter().map(|o| o.value).collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");
    GreedyRestarts { best, values }
}

/// Fixes variables in ascending order, each to the value with the larger
/// conditional expectation of `Σ ψ_l` (ties to `+1`). The result is never
/// below `μ·m`.
pub fn conditional_expectations(instance: &Instance) -> (Vec<i8>, f64) {
    let n = instance.n();
    // 0 marks a free variable, whose conditional mean is 0.
    let mut x = vec![0i8; n];
    for var in 0..n {
        let mut score = 0.0;
        for &l in instance.constraints_at(var) {
            let c = &instance.constraints()[l];
            let local = c.position(var).expect("incidence lists are consistent");
            for (mask, value) in c
                .predicate()
                .terms()
                .filter(|(mask, _)| mask >> local & 1 == 1)
            {
                let rest: f64 = (0..c.arity())
                    .filter(|&i| i != local && mask >> i & 1 == 1)
                    .map(|i| x[c.scope()[i]] as f64)
                    .product();
                score += value * rest;
            }
        }
        x[var] = if score >= 0.0 { 1 } else { -1 };
    }
    let value = instance.count_satisfied(&x).expect("full ±1 assignment");
    (x, value)
}
