//! Fourier analysis of real functions on `{-1, +1}^k`.
//!
//! A [`MultilinearPoly`] stores all `2^k` Fourier coefficients densely,
//! indexed by subset bitmask. Truth tables use the crate-wide ordering: bit
//! `i` of a table index is coordinate `i`, and a cleared bit means `+1`.

use crate::error::{invalid, Result};

/// A subset of coordinates as a bitmask.
pub type Subset = u64;

/// Largest arity accepted by default. Coefficients are stored densely.
pub const DEFAULT_MAX_ARITY: usize = 8;

/// Comparisons against the mean treat differences below this as equality.
const VALUE_EPS: f64 = 1e-12;

/// Spin value of coordinate `i` at table index `index`.
#[inline]
pub fn spin_at(index: u64, i: usize) -> i8 {
    if index >> i & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `x^K` for the point encoded by `index`.
#[inline]
pub fn character(mask: Subset, index: u64) -> f64 {
    if (mask & index).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Encodes a spin vector as a table index.
pub fn index_of(x: &[i8]) -> Result<u64> {
    let mut index = 0u64;
    for (i, &xi) in x.iter().enumerate() {
        match xi {
            1 => {}
            -1 => index |= 1 << i,
            other => return invalid(format!("coordinate {i} is {other}, expected ±1")),
        }
    }
    Ok(index)
}

/// In-place unnormalized Walsh-Hadamard transform.
///
/// Maps `v[s]` to `Σ_t (-1)^{|s ∧ t|} v[t]`; applying it twice multiplies by
/// the length.
pub(crate) fn walsh_hadamard(values: &mut [f64]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (values[i], values[i + half]);
                values[i] = a + b;
                values[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Real multilinear polynomial `f(x) = Σ_K f̂(K) x^K` over `k` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPoly {
    arity: usize,
    coeffs: Vec<f64>,
}

/// Result of [`MultilinearPoly::decompose_at`]: `f(x) = x_j·q(x) + r(x) + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub q: MultilinearPoly,
    pub r: MultilinearPoly,
    pub constant: f64,
}

impl MultilinearPoly {
    pub fn zero(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Self {
            arity,
            coeffs: vec![0.0; 1 << arity],
        })
    }

    pub fn constant(arity: usize, value: f64) -> Result<Self> {
        let mut poly = Self::zero(arity)?;
        poly.coeffs[0] = value;
        Ok(poly)
    }

    /// Builds a polynomial from a dense coefficient vector of length `2^arity`.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        let arity = arity_of_len(coeffs.len())?;
        Ok(Self { arity, coeffs })
    }

    /// Builds a polynomial from sparse `(mask, value)` terms; repeated masks add.
    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Subset, f64)>,
    ) -> Result<Self> {
        let mut poly = Self::zero(arity)?;
        for (mask, value) in terms {
            if mask >> arity != 0 {
                return invalid(format!("mask {mask:#b} exceeds arity {arity}"));
            }
            poly.coeffs[mask as usize] += value;
        }
        Ok(poly)
    }

    /// Fourier transform of a truth table listed in binary index order.
    pub fn fourier_transform(table: &[f64]) -> Result<Self> {
        let arity = arity_of_len(table.len())?;
        let mut coeffs = table.to_vec();
        walsh_hadamard(&mut coeffs);
        let scale = 1.0 / table.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { arity, coeffs })
    }

    /// Transform of `f` tabulated over all `2^arity` spin vectors.
    pub fn from_fn(arity: usize, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        check_arity(arity)?;
        let mut x = vec![1i8; arity];
        let table: Vec<f64> = (0..1u64 << arity)
            .map(|index| {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = spin_at(index, i);
                }
                f(&x)
            })
            .collect();
        Self::fourier_transform(&table)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeff(&self, mask: Subset) -> f64 {
        self.coeffs.get(mask as usize).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Nonzero `(mask, coefficient)` pairs in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(mask, c)| (mask as Subset, *c))
    }

    /// Largest `|K|` with a nonzero coefficient; 0 for constants.
    pub fn degree(&self) -> usize {
        self.terms()
            .map(|(mask, _)| mask.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.arity {
            return invalid(format!(
                "point has {} coordinates, polynomial has arity {}",
                x.len(),
                self.arity
            ));
        }
        Ok(self.evaluate_index(index_of(x)?))
    }

    /// Evaluates at the point encoded by a table index.
    pub fn evaluate_index(&self, index: u64) -> f64 {
        self.terms()
            .map(|(mask, c)| c * character(mask, index))
            .sum()
    }

    /// All `2^k` function values in table order.
    pub fn truth_table(&self) -> Vec<f64> {
        let mut values = self.coeffs.clone();
        walsh_hadamard(&mut values);
        values
    }

    /// `∂_j f`: the coefficient of `K ∪ {j}` moved onto `K`, for `j ∉ K`.
    ///
    /// The result keeps the same arity and never mentions coordinate `j`.
    pub fn derivative(&self, j: usize) -> Result<Self> {
        let bit = self.coordinate_bit(j)?;
        let mut out = Self::zero(self.arity)?;
        for (mask, c) in self.terms().filter(|(mask, _)| mask & bit != 0) {
            out.coeffs[(mask & !bit) as usize] = c;
        }
        Ok(out)
    }

    /// Splits `f = x_j·Q + R + f̂(∅)` with `Q = ∂_j f` and `R̂(∅) = 0`.
    pub fn decompose_at(&self, j: usize) -> Result<Decomposition> {
        let bit = self.coordinate_bit(j)?;
        let q = self.derivative(j)?;
        let mut r = self.clone();
        r.coeffs[0] = 0.0;
        for (mask, c) in r.coeffs.iter_mut().enumerate() {
            if mask as u64 & bit != 0 {
                *c = 0.0;
            }
        }
        Ok(Decomposition {
            q,
            r,
            constant: self.coeffs[0],
        })
    }

    /// True if some nonzero coefficient involves coordinate `j`.
    pub fn depends_on(&self, j: usize) -> bool {
        j < self.arity
            && self
                .terms()
                .any(|(mask, c)| mask >> j & 1 == 1 && c.abs() > VALUE_EPS)
    }

    pub fn depends_on_all(&self) -> bool {
        (0..self.arity).all(|j| self.depends_on(j))
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn variance(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c * c).sum()
    }

    /// Fraction of the `2^k` inputs with `f(x)` strictly above the mean.
    pub fn fraction_above_mean(&self) -> f64 {
        let mean = self.mean();
        let table = self.truth_table();
        let above = table.iter().filter(|&&v| v > mean + VALUE_EPS).count();
        above as f64 / table.len() as f64
    }

    /// Pointwise sum; arities must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return invalid(format!("arity mismatch: {} vs {}", self.arity, other.arity));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            arity: self.arity,
            coeffs,
        })
    }

    fn coordinate_bit(&self, j: usize) -> Result<Subset> {
        if j >= self.arity {
            return invalid(format!(
                "coordinate {j} out of range for arity {}",
                self.arity
            ));
        }
        Ok(1 << j)
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity > DEFAULT_MAX_ARITY {
        return invalid(format!(
            "arity {arity} exceeds the limit {DEFAULT_MAX_ARITY}"
        ));
    }
    Ok(())
}

fn arity_of_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return invalid(format!("table length {len} is not a power of two"));
    }
    let arity = len.trailing_zeros() as usize;
    check_arity(arity)?;
    Ok(arity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force transform, independent of the butterfly.
    fn naive_transform(table: &[f64]) -> Vec<f64> {
        let len = table.len() as u64;
        (0..len)
            .map(|mask| {
                (0..len)
                    .map(|idx| table[idx as usize] * character(mask, idx))
                    .sum::<f64>()
                    / len as f64
            })
            .collect()
    }

    fn xor2() -> MultilinearPoly {
        MultilinearPoly::fourier_transform(&[1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    /// All-positive 3-clause; violated only on the all-false input (index 0).
    fn sat3() -> MultilinearPoly {
        let mut table = vec![1.0; 8];
        table[0] = 0.0;
        MultilinearPoly::fourier_transform(&table).unwrap()
    }

    #[test]
    fn xor_table_transform() {
        let p = xor2();
        assert_eq!(p.coeffs(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn constant_table_transform() {
        let p = MultilinearPoly::fourier_transform(&[1.0; 4]).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sat_clause_transform_matches_brute_force() {
        let mut table = vec![1.0; 8];
        table[0] = 0.0;
        let expected = naive_transform(&table);
        assert_eq!(expected[0], 7.0 / 8.0);
        assert!(expected[1..].iter().all(|&c| c == -1.0 / 8.0));
        assert_eq!(sat3().coeffs(), expected.as_slice());
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(MultilinearPoly::fourier_transform(&[1.0, 0.0, 1.0]).is_err());
        assert!(MultilinearPoly::fourier_transform(&[]).is_err());
    }

    #[test]
    fn evaluate_xor_clause() {
        let p = xor2();
        assert_eq!(p.evaluate(&[1, 1]).unwrap(), 1.0);
        assert_eq!(p.evaluate(&[1, -1]).unwrap(), 0.0);
        assert!(p.evaluate(&[1]).is_err());
        assert!(p.evaluate(&[1, 0]).is_err());
    }

    #[test]
    fn evaluate_sat_clause_on_satisfying_input() {
        assert_eq!(sat3().evaluate(&[-1, 1, 1]).unwrap(), 1.0);
        assert_eq!(sat3().evaluate(&[1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn derivative_examples() {
        let d = xor2().derivative(1).unwrap();
        assert_eq!(d.coeffs(), &[0.0, 0.5, 0.0, 0.0]);
        let c = MultilinearPoly::constant(2, 1.0).unwrap();
        assert_eq!(c.derivative(0).unwrap().variance(), 0.0);
        assert_eq!(c.derivative(0).unwrap().mean(), 0.0);
        assert!(xor2().derivative(2).is_err());

        let d = sat3().derivative(0).unwrap();
        assert!(!d.depends_on(0));
        let var: f64 = (1..8u64)
            .filter(|k| k & 1 == 0)
            .map(|k| sat3().coeff(k | 1).powi(2))
            .sum();
        assert!((d.variance() - var).abs() < 1e-15);
        assert!(d.variance() >= 2f64.powi(-5));
    }

    #[test]
    fn decompose_examples() {
        let dec = xor2().decompose_at(1).unwrap();
        assert_eq!(dec.q.coeffs(), &[0.0, 0.5, 0.0, 0.0]);
        assert_eq!(dec.r.variance(), 0.0);
        assert_eq!(dec.constant, 0.5);

        // Independent of coordinate 1.
        let p = MultilinearPoly::from_terms(2, [(0, 0.25), (1, 0.5)]).unwrap();
        let dec = p.decompose_at(1).unwrap();
        assert_eq!(dec.q.variance() + dec.q.mean().abs(), 0.0);
        assert_eq!(dec.r.coeffs(), &[0.0, 0.5, 0.0, 0.0]);
        assert_eq!(dec.constant, 0.25);
    }

    #[test]
    fn decompose_recomposes_sat_clause() {
        let p = sat3();
        for j in 0..3 {
            let dec = p.decompose_at(j).unwrap();
            assert_eq!(dec.r.mean(), 0.0);
            for index in 0..8u64 {
                let xj = spin_at(index, j) as f64;
                let rebuilt =
                    xj * dec.q.evaluate_index(index) + dec.r.evaluate_index(index) + dec.constant;
                assert!((rebuilt - p.evaluate_index(index)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn statistics_examples() {
        assert_eq!(xor2().mean(), 0.5);
        assert_eq!(xor2().variance(), 0.25);
        assert_eq!(xor2().fraction_above_mean(), 0.5);
        assert_eq!(sat3().mean(), 7.0 / 8.0);
        assert_eq!(sat3().fraction_above_mean(), 7.0 / 8.0);
    }

    #[test]
    fn exhaustive_boolean_round_trip_and_parseval() {
        for k in 0..=3usize {
            let len = 1usize << k;
            for bits in 0u64..1 << len {
                let table: Vec<f64> = (0..len).map(|i| (bits >> i & 1) as f64).collect();
                let p = MultilinearPoly::fourier_transform(&table).unwrap();
                for (i, v) in table.iter().enumerate() {
                    assert!((p.evaluate_index(i as u64) - v).abs() < 1e-12);
                }
                let again = MultilinearPoly::fourier_transform(&p.truth_table()).unwrap();
                for (a, b) in again.coeffs().iter().zip(p.coeffs()) {
                    assert!((a - b).abs() < 1e-12);
                }
                let sq: f64 = p.coeffs().iter().map(|c| c * c).sum();
                let mean_sq = table.iter().map(|v| v * v).sum::<f64>() / len as f64;
                assert!((sq - mean_sq).abs() < 1e-12);
                // Integer multiples of 2^-k.
                for c in p.coeffs() {
                    let scaled = c * len as f64;
                    assert_eq!(scaled, scaled.round());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn real_tables_round_trip(k in 0usize..=6, seed in proptest::collection::vec(-10.0f64..10.0, 64)) {
            let table = &seed[..1 << k];
            let p = MultilinearPoly::fourier_transform(table).unwrap();
            let naive = naive_transform(table);
            for (a, b) in p.coeffs().iter().zip(&naive) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for (i, v) in table.iter().enumerate() {
                prop_assert!((p.evaluate_index(i as u64) - v).abs() < 1e-12);
            }
            let sq: f64 = p.coeffs().iter().map(|c| c * c).sum();
            let mean_sq = table.iter().map(|v| v * v).sum::<f64>() / table.len() as f64;
            prop_assert!((sq - mean_sq).abs() < 1e-12 * (1.0 + mean_sq));
        }

        #[test]
        fn decomposition_recomposes(k in 1usize..=5, j in 0usize..5, seed in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let j = j % k;
            let p = MultilinearPoly::fourier_transform(&seed[..1 << k]).unwrap();
            let dec = p.decompose_at(j).unwrap();
            prop_assert_eq!(dec.r.mean(), 0.0);
            prop_assert!(!dec.q.depends_on(j));
            for index in 0..1u64 << k {
                let xj = spin_at(index, j) as f64;
                let rebuilt = xj * dec.q.evaluate_index(index) + dec.r.evaluate_index(index) + dec.constant;
                prop_assert!((rebuilt - p.evaluate_index(index)).abs() < 1e-12);
            }
        }
    }
}
