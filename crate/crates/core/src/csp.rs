//! CSP instances: predicates, predicate distributions, scope generators,
//! independent constraint sampling, structural validators and scoring.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::boolfn::{character, MultilinearPoly, Subset, DEFAULT_MAX_ARITY};
use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

const PROBABILITY_TOL: f64 = 1e-12;

/// Attempts allowed per requested scope before generation gives up.
const REJECTION_BUDGET_PER_SCOPE: usize = 1000;

/// A finite distribution over predicates of a common arity.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDistribution {
    arity: usize,
    items: Vec<(MultilinearPoly, f64)>,
}

impl PredicateDistribution {
    pub fn new(items: Vec<(MultilinearPoly, f64)>) -> Result<Self> {
        let Some(arity) = items.first().map(|(p, _)| p.arity()) else {
            return invalid("predicate distribution is empty");
        };
        if items.iter().any(|(p, _)| p.arity() != arity) {
            return invalid("predicates in a distribution must share one arity");
        }
        if items.iter().any(|(_, w)| w.is_nan() || *w < 0.0) {
            return invalid("probabilities must be non-negative");
        }
        let total: f64 = items.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return invalid(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self { arity, items })
    }

    /// `1/2 ± 1/2·x_1⋯x_k`, each sign with probability 1/2.
    pub fn kxor(k: usize) -> Result<Self> {
        check_predicate_arity(k)?;
        let full = (1u64 << k) - 1;
        let items = [1.0, -1.0]
            .into_iter()
            .map(|sign| {
                MultilinearPoly::from_terms(k, [(0, 0.5), (full, 0.5 * sign)]).map(|p| (p, 0.5))
            })
            .collect::<Result<_>>()?;
        Self::new(items)
    }

    /// `1 − ∏(1 + s_i x_i)/2` over all `2^k` sign vectors `s`, uniformly.
    ///
    /// Literal `i` is false exactly when `x_i = s_i`; with all `s_i = +1`
    /// the clause is violated only by the all-`+1` input.
    pub fn ksat(k: usize) -> Result<Self> {
        check_predicate_arity(k)?;
        let p = 1.0 / (1u64 << k) as f64;
        let items = (0..1u64 << k)
            .map(|negated| {
                let signs: Vec<f64> = (0..k)
                    .map(|i| if negated >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                MultilinearPoly::from_fn(k, |x| {
                    let violated: f64 = x
                        .iter()
                        .zip(&signs)
                        .map(|(&xi, s)| (1.0 + s * xi as f64) / 2.0)
                        .product();
                    1.0 - violated
                })
                .map(|poly| (poly, p))
            })
            .collect::<Result<_>>()?;
        Self::new(items)
    }

    /// The single cut predicate `(1 − x_1 x_2)/2`.
    pub fn cut() -> Self {
        let poly =
            MultilinearPoly::from_terms(2, [(0, 0.5), (0b11, -0.5)]).expect("arity 2 is valid");
        Self {
            arity: 2,
            items: vec![(poly, 1.0)],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn items(&self) -> &[(MultilinearPoly, f64)] {
        &self.items
    }

    /// Probability-weighted mean of each Fourier coefficient.
    pub fn mean_coefficients(&self) -> Vec<f64> {
        let mut mean = vec![0.0; 1 << self.arity];
        for (poly, p) in &self.items {
            for (m, c) in mean.iter_mut().zip(poly.coeffs()) {
                *m += p * c;
            }
        }
        mean
    }

    /// Every nonconstant coefficient has mean zero, up to `tol`.
    pub fn is_typical(&self, tol: f64) -> bool {
        self.mean_coefficients()[1..].iter().all(|c| c.abs() <= tol)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &MultilinearPoly {
        let mut u: f64 = rng.gen();
        for (poly, p) in &self.items {
            if u < *p {
                return poly;
            }
            u -= p;
        }
        // Rounding in the cumulative sum.
        &self
            .items
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .expect("some mass")
            .0
    }
}

fn check_predicate_arity(k: usize) -> Result<()> {
    if k == 0 || k > DEFAULT_MAX_ARITY {
        return invalid(format!(
            "predicate arity {k} outside 1..={DEFAULT_MAX_ARITY}"
        ));
    }
    Ok(())
}

/// Zero-mean weight distributions for generalized XOR instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightDistribution {
    /// `±magnitude` with probability 1/2 each.
    Rademacher {
        magnitude: f64,
    },
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    Gaussian {
        sigma: f64,
    },
}

impl WeightDistribution {
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Rademacher { magnitude } => magnitude * magnitude,
            Self::Uniform { half_width } => half_width * half_width / 3.0,
            Self::Gaussian { sigma } => sigma * sigma,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Rademacher { magnitude } => {
                if rng.gen::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            Self::Uniform { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-half_width..=half_width)
                }
            }
            Self::Gaussian { sigma } => Normal::new(0.0, sigma)
                .map(|d| d.sample(rng))
                .unwrap_or(0.0),
        }
    }
}

/// A predicate applied to an ordered tuple of distinct variables.
///
/// Local coordinate `i` of the predicate is variable `scope[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    scope: Vec<usize>,
    predicate: MultilinearPoly,
}

impl Constraint {
    pub fn new(scope: Vec<usize>, predicate: MultilinearPoly) -> Result<Self> {
        if scope.len() != predicate.arity() {
            return invalid(format!(
                "scope of length {} paired with a predicate of arity {}",
                scope.len(),
                predicate.arity()
            ));
        }
        if scope.iter().collect::<HashSet<_>>().len() != scope.len() {
            return invalid(format!("scope {scope:?} repeats a variable"));
        }
        Ok(Self { scope, predicate })
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn predicate(&self) -> &MultilinearPoly {
        &self.predicate
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    /// Local coordinate of `var` in this scope.
    pub fn position(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    /// Maps a scope-local subset to a global variable mask (`n ≤ 64`).
    pub fn global_mask(&self, local: Subset) -> u64 {
        self.scope
            .iter()
            .enumerate()
            .filter(|(i, _)| local >> i & 1 == 1)
            .fold(0u64, |acc, (_, &v)| acc | 1 << v)
    }

    /// Value at a global assignment.
    pub fn evaluate(&self, assignment: &[i8]) -> f64 {
        let local = self
            .scope
            .iter()
            .enumerate()
            .filter(|(_, &v)| assignment[v] < 0)
            .fold(0u64, |acc, (i, _)| acc | 1 << i);
        self.predicate.evaluate_index(local)
    }

    /// Value at a global basis index (`n ≤ 64`).
    pub fn evaluate_global_index(&self, z: u64) -> f64 {
        self.predicate
            .terms()
            .map(|(mask, c)| c * character(self.global_mask(mask), z))
            .sum()
    }

    fn scope_set(&self) -> Vec<usize> {
        let mut s = self.scope.clone();
        s.sort_unstable();
        s
    }
}

/// A collection of scopes over `n` variables with a per-variable occurrence cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeSet {
    pub n: usize,
    /// Each variable occurs in at most this many scopes (`D + 1`).
    pub max_degree: usize,
    pub scopes: Vec<Vec<usize>>,
}

impl ScopeSet {
    pub fn new(n: usize, max_degree: usize, scopes: Vec<Vec<usize>>) -> Result<Self> {
        let set = Self {
            n,
            max_degree,
            scopes,
        };
        validate_scopes(n, max_degree, set.scopes.iter().map(|s| s.as_slice()))?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.scopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scopes.is_empty()
    }

    /// Any two scopes share at most one variable.
    pub fn has_no_overlap(&self) -> bool {
        no_overlap(self.scopes.iter().map(|s| s.as_slice()))
    }
}

fn validate_scopes<'a>(
    n: usize,
    max_degree: usize,
    scopes: impl Iterator<Item = &'a [usize]>,
) -> Result<()> {
    let mut seen = HashSet::new();
    let mut degree = vec![0usize; n];
    for scope in scopes {
        let mut sorted = scope.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid(format!("scope {scope:?} repeats a variable"));
        }
        if let Some(&v) = sorted.last().filter(|&&v| v >= n) {
            return invalid(format!("variable {v} out of range for n = {n}"));
        }
        for &v in &sorted {
            degree[v] += 1;
            if degree[v] > max_degree {
                return invalid(format!(
                    "variable {v} occurs in more than {max_degree} constraints"
                ));
            }
        }
        if !seen.insert(sorted) {
            return invalid(format!("scope {scope:?} appears twice"));
        }
    }
    Ok(())
}

fn no_overlap<'a>(scopes: impl Iterator<Item = &'a [usize]>) -> bool {
    let mut pairs = HashSet::new();
    for scope in scopes {
        for (i, &a) in scope.iter().enumerate() {
            for &b in &scope[i + 1..] {
                if !pairs.insert((a.min(b), a.max(b))) {
                    return false;
                }
            }
        }
    }
    true
}

/// Structural classes the scope generators can enforce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeStructure {
    /// Distinct scopes under the degree cap.
    Bounded,
    /// Additionally, two scopes share at most one variable.
    NoOverlap,
    /// No overlap, and no three scopes pairwise meeting in three distinct
    /// variables (no Berge triangle).
    TriangleFree,
}

/// `m` distinct `k`-subsets of `0..n`, each variable in at most `max_degree`.
pub fn gen_scopes_bounded(
    n: usize,
    m: usize,
    k: usize,
    max_degree: usize,
    seed: u64,
) -> Result<ScopeSet> {
    gen_scopes(n, m, k, max_degree, ScopeStructure::Bounded, seed)
}

/// As [`gen_scopes_bounded`], with pairwise intersections of size at most one.
pub fn gen_scopes_no_overlap(
    n: usize,
    m: usize,
    k: usize,
    max_degree: usize,
    seed: u64,
) -> Result<ScopeSet> {
    gen_scopes(n, m, k, max_degree, ScopeStructure::NoOverlap, seed)
}

/// As [`gen_scopes_no_overlap`], additionally free of Berge triangles.
pub fn gen_scopes_triangle_free(
    n: usize,
    m: usize,
    k: usize,
    max_degree: usize,
    seed: u64,
) -> Result<ScopeSet> {
    gen_scopes(n, m, k, max_degree, ScopeStructure::TriangleFree, seed)
}

/// Rejection sampler shared by the scope generators.
///
/// Candidates are drawn uniformly among variables with spare capacity.
/// A dead end (fewer than `k` such variables) restarts from scratch; the
/// attempt budget of `1000·m` spans restarts.
pub fn gen_scopes(
    n: usize,
    m: usize,
    k: usize,
    max_degree: usize,
    structure: ScopeStructure,
    seed: u64,
) -> Result<ScopeSet> {
    if k == 0 || k > n {
        return Err(Error::Generation(format!(
            "scope size {k} infeasible for n = {n}"
        )));
    }
    if m.saturating_mul(k) > n.saturating_mul(max_degree) {
        return Err(Error::Generation(format!(
            "{m} scopes of size {k} exceed capacity n·max_degree = {}",
            n * max_degree
        )));
    }
    let mut rng = rng_from_seed(seed);
    let budget = REJECTION_BUDGET_PER_SCOPE * m.max(1);
    let mut attempts = 0usize;
    let mut stamp = vec![0u32; n];
    let mut round = 0u32;

    'restart: loop {
        let mut scopes: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(m);
        let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut available: Vec<usize> = (0..n).collect();
        while scopes.len() < m {
            if available.len() < k {
                if attempts >= budget {
                    break 'restart;
                }
                continue 'restart;
            }
            attempts += 1;
            if attempts > budget {
                break 'restart;
            }
            let mut candidate: Vec<usize> = index::sample(&mut rng, available.len(), k)
                .into_iter()
                .map(|i| available[i])
                .collect();
            candidate.sort_unstable();
            if seen.contains(&candidate) {
                continue;
            }
            let acceptable = match structure {
                ScopeStructure::Bounded => true,
                ScopeStructure::NoOverlap => !overlaps_existing(&candidate, &scopes, &incidence),
                ScopeStructure::TriangleFree => {
                    !overlaps_existing(&candidate, &scopes, &incidence)
                        && !closes_triangle(&candidate, &scopes, &incidence, &mut stamp, &mut round)
                }
            };
            if !acceptable {
                continue;
            }
            let id = scopes.len();
            for &v in &candidate {
                incidence[v].push(id);
            }
            if candidate.iter().any(|&v| incidence[v].len() >= max_degree) {
                available.retain(|&v| incidence[v].len() < max_degree);
            }
            seen.insert(candidate.clone());
            scopes.push(candidate);
        }
        return Ok(ScopeSet {
            n,
            max_degree,
            scopes,
        });
    }
    Err(Error::Generation(format!(
        "placed fewer than {m} scopes within {budget} attempts (n = {n}, k = {k}, cap = {max_degree})"
    )))
}

fn overlaps_existing(candidate: &[usize], scopes: &[Vec<usize>], incidence: &[Vec<usize>]) -> bool {
    candidate.iter().any(|&v| {
        incidence[v]
            .iter()
            .any(|&s| scopes[s].iter().filter(|w| candidate.contains(w)).count() >= 2)
    })
}

/// Would adding `candidate` create scopes `l ∋ a`, `l' ∋ b` (a ≠ b in the
/// candidate) that meet outside the candidate?
fn closes_triangle(
    candidate: &[usize],
    scopes: &[Vec<usize>],
    incidence: &[Vec<usize>],
    stamp: &mut [u32],
    round: &mut u32,
) -> bool {
    for (i, &a) in candidate.iter().enumerate() {
        *round += 1;
        let mark = *round;
        for &s in &incidence[a] {
            for &w in &scopes[s] {
                if !candidate.contains(&w) {
                    stamp[w] = mark;
                }
            }
        }
        for &b in &candidate[i + 1..] {
            for &s in &incidence[b] {
                if scopes[s]
                    .iter()
                    .any(|&w| !candidate.contains(&w) && stamp[w] == mark)
                {
                    return true;
                }
            }
        }
    }
    false
}

/// All `q(q−1)/2` pairs on vertices `0..q`.
pub fn gen_scopes_clique(q: usize) -> Result<ScopeSet> {
    gen_scopes_clique_copies(q, 1)
}

/// `copies` disjoint `q`-cliques; every vertex has degree `q − 1`.
pub fn gen_scopes_clique_copies(q: usize, copies: usize) -> Result<ScopeSet> {
    if q < 2 {
        return invalid(format!("clique size {q} < 2"));
    }
    let scopes = (0..copies)
        .flat_map(|c| {
            let base = c * q;
            (0..q).flat_map(move |i| (i + 1..q).map(move |j| vec![base + i, base + j]))
        })
        .collect();
    Ok(ScopeSet {
        n: q * copies,
        max_degree: q - 1,
        scopes,
    })
}

/// Draws each constraint's predicate independently from `dist`.
pub fn sample_instance(
    scopes: &ScopeSet,
    dist: &PredicateDistribution,
    seed: u64,
) -> Result<Instance> {
    let dists = vec![dist; scopes.len()];
    sample_instance_mixed_refs(scopes, &dists, seed)
}

/// Per-scope distributions, for instances whose arities differ.
pub fn sample_instance_mixed(
    scopes: &ScopeSet,
    dists: &[PredicateDistribution],
    seed: u64,
) -> Result<Instance> {
    let refs: Vec<&PredicateDistribution> = dists.iter().collect();
    sample_instance_mixed_refs(scopes, &refs, seed)
}

fn sample_instance_mixed_refs(
    scopes: &ScopeSet,
    dists: &[&PredicateDistribution],
    seed: u64,
) -> Result<Instance> {
    if dists.len() != scopes.len() {
        return invalid(format!(
            "{} distributions for {} scopes",
            dists.len(),
            scopes.len()
        ));
    }
    let mut rng = rng_from_seed(seed);
    let constraints = scopes
        .scopes
        .iter()
        .zip(dists)
        .map(|(scope, dist)| {
            if scope.len() != dist.arity() {
                return invalid(format!(
                    "scope {scope:?} has arity {}, distribution has arity {}",
                    scope.len(),
                    dist.arity()
                ));
            }
            Constraint::new(scope.clone(), dist.sample(&mut rng).clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(scopes.n, constraints, scopes.max_degree)
}

/// Generalized XOR: each constraint is `w·x^{scope}` with `w` drawn from `weights`.
pub fn sample_weighted_xor(
    scopes: &ScopeSet,
    weights: &WeightDistribution,
    seed: u64,
) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    let constraints = scopes
        .scopes
        .iter()
        .map(|scope| {
            let k = scope.len();
            check_predicate_arity(k)?;
            let w = weights.sample(&mut rng);
            let poly = MultilinearPoly::from_terms(k, [((1u64 << k) - 1, w)])?;
            Constraint::new(scope.clone(), poly)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(scopes.n, constraints, scopes.max_degree)
}

/// A CSP instance: `n` variables and `m` constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    constraints: Vec<Constraint>,
    declared_max_degree: usize,
    incidence: Vec<Vec<usize>>,
}

impl Instance {
    /// Validates distinct scope sets, variable range and the degree cap.
    pub fn new(n: usize, constraints: Vec<Constraint>, declared_max_degree: usize) -> Result<Self> {
        validate_scopes(
            n,
            declared_max_degree,
            constraints.iter().map(|c| c.scope()),
        )?;
        let mut incidence = vec![Vec::new(); n];
        for (l, c) in constraints.iter().enumerate() {
            for &v in c.scope() {
                incidence[v].push(l);
            }
        }
        Ok(Self {
            n,
            constraints,
            declared_max_degree,
            incidence,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Declared occurrence cap `D + 1`.
    pub fn declared_max_degree(&self) -> usize {
        self.declared_max_degree
    }

    /// `D`, the declared cap minus one.
    pub fn excess_degree(&self) -> usize {
        self.declared_max_degree.saturating_sub(1)
    }

    /// Constraint indices containing `var`.
    pub fn constraints_at(&self, var: usize) -> &[usize] {
        &self.incidence[var]
    }

    pub fn variable_degrees(&self) -> Vec<usize> {
        self.incidence.iter().map(Vec::len).collect()
    }

    /// Largest actual occurrence count.
    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `G_u(j)`: constraints other than `u` that contain variable `j`.
    pub fn neighbours_at(&self, u: usize, var: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence[var].iter().copied().filter(move |&l| l != u)
    }

    pub fn check_no_overlap(&self) -> bool {
        no_overlap(self.constraints.iter().map(|c| c.scope()))
    }

    /// No overlap and no three constraints pairwise meeting in distinct variables.
    pub fn is_triangle_free(&self) -> bool {
        if !self.check_no_overlap() {
            return false;
        }
        let scopes: Vec<Vec<usize>> = self.constraints.iter().map(Constraint::scope_set).collect();
        let mut stamp = vec![0u32; self.n];
        let mut round = 0;
        for (u, scope) in scopes.iter().enumerate() {
            let incidence: Vec<Vec<usize>> = self
                .incidence
                .iter()
                .map(|ls| ls.iter().copied().filter(|&l| l != u).collect())
                .collect();
            if closes_triangle(scope, &scopes, &incidence, &mut stamp, &mut round) {
                return false;
            }
        }
        true
    }

    /// Every predicate depends on every coordinate of its scope.
    pub fn is_scope_relevant(&self) -> bool {
        self.constraints
            .iter()
            .all(|c| c.predicate().depends_on_all())
    }

    /// `μ = (1/m) Σ_l ψ̂_l(∅)`.
    pub fn mu(&self) -> f64 {
        if self.constraints.is_empty() {
            return 0.0;
        }
        self.constant_total() / self.m() as f64
    }

    /// `Σ_l ψ̂_l(∅)`, the expected objective under a uniform assignment.
    pub fn constant_total(&self) -> f64 {
        self.constraints.iter().map(|c| c.predicate().mean()).sum()
    }

    /// `Σ_l ψ_l(x)`.
    pub fn count_satisfied(&self, assignment: &[i8]) -> Result<f64> {
        if assignment.len() != self.n {
            return invalid(format!(
                "assignment has {} entries, instance has n = {}",
                assignment.len(),
                self.n
            ));
        }
        if let Some(bad) = assignment.iter().find(|&&x| x != 1 && x != -1) {
            return invalid(format!("assignment entry {bad} is not ±1"));
        }
        Ok(self
            .constraints
            .iter()
            .map(|c| c.evaluate(assignment))
            .sum())
    }

    /// Same constraints and scopes with new predicates.
    pub fn with_predicates(&self, predicates: Vec<MultilinearPoly>) -> Result<Self> {
        if predicates.len() != self.m() {
            return invalid("predicate count differs from constraint count");
        }
        let constraints = self
            .constraints
            .iter()
            .zip(predicates)
            .map(|(c, p)| Constraint::new(c.scope.clone(), p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, constraints, self.declared_max_degree)
    }

    pub fn scope_set(&self) -> ScopeSet {
        ScopeSet {
            n: self.n,
            max_degree: self.declared_max_degree,
            scopes: self.constraints.iter().map(|c| c.scope.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InstanceFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(text)?.try_into()
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// On-disk instance layout. Masks are over scope-local coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub max_degree: usize,
    pub constraints: Vec<ConstraintRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub scope: Vec<usize>,
    pub coeffs: Vec<CoeffRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub subset_mask: u64,
    pub value: f64,
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        Self {
            n: instance.n,
            max_degree: instance.declared_max_degree,
            constraints: instance
                .constraints
                .iter()
                .map(|c| ConstraintRecord {
                    scope: c.scope.clone(),
                    coeffs: c
                        .predicate
                        .terms()
                        .map(|(subset_mask, value)| CoeffRecord { subset_mask, value })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let constraints = file
            .constraints
            .into_iter()
            .map(|record| {
                let poly = MultilinearPoly::from_terms(
                    record.scope.len(),
                    record.coeffs.iter().map(|c| (c.subset_mask, c.value)),
                )?;
                Constraint::new(record.scope, poly)
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(file.n, constraints, file.max_degree)
    }
}
