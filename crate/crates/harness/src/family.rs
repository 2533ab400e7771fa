//! Instance construction from a family description.

use csplab_core::csp::{
    gen_scopes, gen_scopes_clique_copies, sample_instance, sample_weighted_xor, Instance,
    PredicateDistribution, ScopeSet, ScopeStructure,
};
use csplab_core::rng::derive_seed;

use crate::config::{FamilyConfig, PredicateFamily, Structure};
use crate::error::Result;

/// Seed lanes split off the master seed.
pub mod lane {
    pub const SCOPES: u64 = 1;
    pub const PREDICATES: u64 = 2;
    pub const GREEDY: u64 = 3;
    pub const SHOTS: u64 = 4;
}

/// Counter for replication `r` at scan point `p`.
pub fn job_index(point: usize, replication: u64) -> u64 {
    ((point as u64) << 32) | replication
}

pub fn job_seed(master: u64, lane: u64, point: usize, replication: u64) -> u64 {
    derive_seed(master, lane, job_index(point, replication))
}

pub fn scopes_for(family: &FamilyConfig, d: usize, seed: u64) -> Result<ScopeSet> {
    let k = family.arity();
    let m = family.constraints_at(d);
    let structure = match family.structure {
        Structure::Cliques => {
            let q = family.clique_size.unwrap_or(d + 1);
            return Ok(gen_scopes_clique_copies(q, family.copies)?);
        }
        Structure::Bounded => ScopeStructure::Bounded,
        Structure::NoOverlap => ScopeStructure::NoOverlap,
        Structure::TriangleFree => ScopeStructure::TriangleFree,
    };
    Ok(gen_scopes(family.n, m, k, d + 1, structure, seed)?)
}

pub fn predicates_on(family: &FamilyConfig, scopes: &ScopeSet, seed: u64) -> Result<Instance> {
    let dist = match family.kind {
        PredicateFamily::Xor => PredicateDistribution::kxor(family.k)?,
        PredicateFamily::Sat => PredicateDistribution::ksat(family.k)?,
        PredicateFamily::Cut => PredicateDistribution::cut(),
        PredicateFamily::WeightedXor => {
            return Ok(sample_weighted_xor(scopes, &family.weights(), seed)?)
        }
    };
    Ok(sample_instance(scopes, &dist, seed)?)
}

/// Instance for replication `r` at point `p`. The scope set is shared across
/// replications unless the family resamples scopes.
pub fn instance_for(
    family: &FamilyConfig,
    d: usize,
    master: u64,
    point: usize,
    r: u64,
) -> Result<Instance> {
    let scope_rep = if family.resample_scopes { r } else { 0 };
    let scopes = scopes_for(family, d, job_seed(master, lane::SCOPES, point, scope_rep))?;
    predicates_on(
        family,
        &scopes,
        job_seed(master, lane::PREDICATES, point, r),
    )
}
