//! Closed-form single-layer QAOA expectations and angle selection.

use std::f64::consts::FRAC_PI_4;

use crate::csp::Instance;
use crate::error::{invalid, Error, Result};

/// Search tolerance for the 1-D angle optimizations.
pub const SEARCH_TOL: f64 = 1e-8;

/// `β`, `g` and the excess degree `D`, with `γ = g/√D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePlan {
    pub beta: f64,
    pub g: f64,
    excess_degree: usize,
}

impl AnglePlan {
    pub fn new(beta: f64, g: f64, excess_degree: usize) -> Result<Self> {
        if excess_degree == 0 {
            return invalid("angle plans need excess degree D ≥ 1");
        }
        Ok(Self {
            beta,
            g,
            excess_degree,
        })
    }

    pub fn excess_degree(&self) -> usize {
        self.excess_degree
    }

    pub fn gamma(&self) -> f64 {
        self.g / (self.excess_degree as f64).sqrt()
    }
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Grid bracketing followed by golden-section refinement, for objectives
/// that may not be unimodal over the whole interval.
pub fn bracketed_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    let step = (hi - lo) / grid as f64;
    let best = (0..=grid)
        .map(|i| lo + step * i as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(lo);
    golden_section_max(&f, (best - step).max(lo), (best + step).min(hi), tol)
}

/// Exact mean over independent uniform edge signs of `⟨C⟩ − m/2` for 2XOR.
///
/// Each entry is `(D_1, D_2)`: the number of other edges at each endpoint.
pub fn avg_advantage_2xor(edge_excess_degrees: &[(usize, usize)], beta: f64, gamma: f64) -> f64 {
    let prefactor = 0.5 * (2.0 * beta).sin() * (2.0 * beta).cos() * gamma.sin();
    let c = gamma.cos();
    edge_excess_degrees
        .iter()
        .map(|&(d1, d2)| prefactor * (c.powi(d1 as i32) + c.powi(d2 as i32)))
        .sum()
}

/// `(D_1, D_2)` for every edge of an arity-2 instance.
pub fn edge_excess_degrees(instance: &Instance) -> Result<Vec<(usize, usize)>> {
    let degrees = instance.variable_degrees();
    instance
        .constraints()
        .iter()
        .map(|c| match c.scope() {
            &[a, b] => Ok((degrees[a] - 1, degrees[b] - 1)),
            other => invalid(format!("scope {other:?} is not an edge")),
        })
        .collect()
}

/// Maximizer and maximum of `(g/2)·exp(−g²/2)`, the large-`D` 2XOR prefactor.
pub fn optimal_g_2xor() -> (f64, f64) {
    golden_section_max(|g| 0.5 * g * (-0.5 * g * g).exp(), 0.0, 4.0, SEARCH_TOL)
}

/// Coefficient of the single scope-covering monomial, if the predicate is
/// a constant plus that monomial.
fn top_coefficient(instance: &Instance, l: usize) -> Option<f64> {
    let c = &instance.constraints()[l];
    let full = (1u64 << c.arity()) - 1;
    c.predicate()
        .terms()
        .all(|(mask, _)| mask == 0 || mask == full)
        .then(|| c.predicate().coeff(full))
}

fn check_no_overlap_form(instance: &Instance) -> Result<()> {
    if !instance.check_no_overlap() {
        return Err(Error::Precondition(
            "two constraints share more than one variable".into(),
        ));
    }
    if let Some(l) = (0..instance.m()).find(|&l| top_coefficient(instance, l).is_none()) {
        return Err(Error::Precondition(format!(
            "constraint {l} is not a constant plus one scope-covering monomial"
        )));
    }
    Ok(())
}

/// Advantage contributed by constraint `u` on an instance with no
/// overlapping constraints:
///
/// `ψ̂_u sin(2γψ̂_u) Σ_{T ⊆ K_u, |T| odd} ±cos(2β)^{k−|T|} sin(2β)^{|T|} ∏_{t∈T} ∏_{l∈G_u(t)} cos(2γψ̂_l)`
///
/// with sign `+` for `|T| ≡ 1` and `−` for `|T| ≡ 3 (mod 4)`. The value is
/// exact when no three constraints pairwise meet in distinct variables;
/// otherwise cross terms between the `G_u(t)` are not captured.
pub fn no_overlap_term_expectation(
    instance: &Instance,
    u: usize,
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    if u >= instance.m() {
        return invalid(format!("constraint index {u} out of range"));
    }
    check_no_overlap_form(instance)?;
    Ok(no_overlap_term_unchecked(instance, u, beta, gamma))
}

/// Sum of [`no_overlap_term_expectation`] over all constraints.
pub fn no_overlap_advantage(instance: &Instance, beta: f64, gamma: f64) -> Result<f64> {
    check_no_overlap_form(instance)?;
    Ok((0..instance.m())
        .map(|u| no_overlap_term_unchecked(instance, u, beta, gamma))
        .sum())
}

fn no_overlap_term_unchecked(instance: &Instance, u: usize, beta: f64, gamma: f64) -> f64 {
    let weight = |l: usize| top_coefficient(instance, l).unwrap_or(0.0);
    let scope = instance.constraints()[u].scope();
    let k = scope.len();
    let (c2b, s2b) = ((2.0 * beta).cos(), (2.0 * beta).sin());
    let damping: Vec<f64> = scope
        .iter()
        .map(|&var| {
            instance
                .neighbours_at(u, var)
                .map(|l| (2.0 * gamma * weight(l)).cos())
                .product()
        })
        .collect();
    let sum: f64 = (1u64..1 << k)
        .filter(|t| t.count_ones() % 2 == 1)
        .map(|t| {
            let q = t.count_ones() as i32;
            let sign = if q % 4 == 1 { 1.0 } else { -1.0 };
            let prod: f64 = (0..k)
                .filter(|&i| t >> i & 1 == 1)
                .map(|i| damping[i])
                .product();
            sign * c2b.powi(k as i32 - q) * s2b.powi(q) * prod
        })
        .sum();
    let w = weight(u);
    w * (2.0 * gamma * w).sin() * sum
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Leading-order lower bound on the ensemble-mean advantage of a constraint
/// of arity `k_u`, in units of `1/√D`:
///
/// `2g·Var_u·(k_u cos(2β)^{k_u−1} sin(2β) e^{−2g² maxVar} − Σ_{q≥3 odd} C(k_u,q)|cos(2β)^{k_u−q} sin(2β)^q|)`.
pub fn predicted_advantage_lower_bound(
    k_u: usize,
    var_u: f64,
    max_var: f64,
    beta: f64,
    g: f64,
) -> f64 {
    let (c, s) = ((2.0 * beta).cos(), (2.0 * beta).sin());
    let k = k_u as i32;
    let linear = c.powi(k - 1) * s * k_u as f64 * (-2.0 * g * g * max_var).exp();
    let higher: f64 = (3..=k_u)
        .step_by(2)
        .map(|q| (c.powi(k - q as i32) * s.powi(q as i32)).abs() * binomial(k_u, q))
        .sum();
    2.0 * g * var_u * (linear - higher)
}

/// `β ∈ (0, π/4)` maximizing the bound for arity `k`.
pub fn optimize_beta(k: usize, g: f64, max_var: f64) -> f64 {
    optimize_beta_mixed(&[(k, 1.0)], g, max_var)
}

/// Single `β` maximizing the sum of per-constraint bounds over
/// `(arity, Var)` pairs.
pub fn optimize_beta_mixed(constraints: &[(usize, f64)], g: f64, max_var: f64) -> f64 {
    let total = |beta: f64| -> f64 {
        constraints
            .iter()
            .map(|&(k, var)| predicted_advantage_lower_bound(k, var, max_var, beta, g))
            .sum()
    };
    bracketed_max(total, 0.0, FRAC_PI_4, 256, SEARCH_TOL).0
}
