//! Finite-dimensional Wiener chaos with the Wick product.
//!
//! Basis functions are products of probabilists' Hermite polynomials,
//! `H_α(ω) = Π h_{α_i}(ω_i)`, so `E[H_α H_β] = α! δ_{αβ}`.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::rng::CounterNormal;

pub const DEFAULT_MAX_ORDER: u32 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WickError {
    #[error("chaos order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: u32, max: u32 },
    #[error("expected {expected} Gaussian coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 100 samples, got {0}")]
    TooFewSamples(usize),
}

/// Exponents over the Gaussian coordinates with trailing zeros removed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MultiIndex(exps)
    }

    /// The empty index, labelling the constant basis function.
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    /// `e_i` scaled by `k`: the index of `h_k(ω_i)`.
    pub fn single(i: usize, k: u32) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = k;
        Self::new(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of coordinates actually used.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let n = self.0.len().max(other.0.len());
        let get = |v: &Vec<u32>, i: usize| v.get(i).copied().unwrap_or(0);
        MultiIndex::new((0..n).map(|i| get(&self.0, i) + get(&other.0, i)).collect())
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion {
    pub dim: usize,
    pub max_order: u32,
    pub coeffs: BTreeMap<MultiIndex, f64>,
}

impl ChaosExpansion {
    pub fn zero(dim: usize) -> Self {
        ChaosExpansion { dim, max_order: DEFAULT_MAX_ORDER, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = Self::zero(dim);
        s.set(MultiIndex::zero(), c);
        s
    }

    /// Single basis function `c · H_α`.
    pub fn hermite(dim: usize, alpha: MultiIndex, c: f64) -> Result<Self, WickError> {
        let mut s = Self::zero(dim);
        s.check(&alpha)?;
        s.set(alpha, c);
        Ok(s)
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self, WickError> {
        let mut s = Self::zero(dim);
        for (a, c) in terms {
            s.check(&a)?;
            let v = s.coeff(&a) + c;
            s.set(a, v);
        }
        Ok(s)
    }

    /// Random expansion with up to `n_terms` indices of order `≤ order`
    /// over `dim` coordinates and coefficients in `[−1, 1]`.
    pub fn random(rng: &mut impl Rng, dim: usize, order: u32, n_terms: usize) -> Self {
        let mut s = Self::zero(dim);
        for _ in 0..n_terms {
            let target = rng.random_range(0..=order);
            let mut exps = vec![0u32; dim];
            for _ in 0..target {
                exps[rng.random_range(0..dim)] += 1;
            }
            let a = MultiIndex::new(exps);
            let c = s.coeff(&a) + rng.random_range(-1.0..1.0);
            s.set(a, c);
        }
        s
    }

    fn check(&self, a: &MultiIndex) -> Result<(), WickError> {
        if a.len() > self.dim {
            return Err(WickError::DimensionMismatch { expected: self.dim, got: a.len() });
        }
        if a.order() > self.max_order {
            return Err(WickError::OrderOverflow { order: a.order(), max: self.max_order });
        }
        Ok(())
    }

    fn set(&mut self, a: MultiIndex, c: f64) {
        if c == 0.0 {
            self.coeffs.remove(&a);
        } else {
            self.coeffs.insert(a, c);
        }
    }

    pub fn coeff(&self, a: &MultiIndex) -> f64 {
        self.coeffs.get(a).copied().unwrap_or(0.0)
    }

    pub fn is_deterministic(&self) -> bool {
        self.coeffs.keys().all(|a| a.is_empty())
    }

    pub fn order(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = Self { coeffs: BTreeMap::new(), ..*self };
        for (a, c) in &self.coeffs {
            out.set(a.clone(), c * s);
        }
        out
    }

    /// `E[‖S‖²] = Σ α! c_α²`
    pub fn variance_plus_mean_sq(&self) -> f64 {
        self.coeffs.iter().map(|(a, c)| a.factorial() * c * c).sum()
    }
}

/// Cauchy product of chaos coefficients, `c_γ = Σ_{α+β=γ} c_α c̃_β`.
pub fn wick_product(s: &ChaosExpansion, t: &ChaosExpansion) -> Result<ChaosExpansion, WickError> {
    let mut out = ChaosExpansion {
        dim: s.dim.max(t.dim),
        max_order: s.max_order.min(t.max_order),
        coeffs: BTreeMap::new(),
    };
    for (a, ca) in &s.coeffs {
        for (b, cb) in &t.coeffs {
            let g = a.add(b);
            if g.order() > out.max_order {
                return Err(WickError::OrderOverflow { order: g.order(), max: out.max_order });
            }
            *out.coeffs.entry(g).or_insert(0.0) += ca * cb;
        }
    }
    out.coeffs.retain(|_, c| *c != 0.0);
    Ok(out)
}

pub fn expectation(s: &ChaosExpansion) -> f64 {
    s.coeff(&MultiIndex::zero())
}

/// Probabilists' Hermite polynomials `h_0..=h_k` at `x`.
pub fn hermite_values(x: f64, k: u32) -> Vec<f64> {
    let mut h = vec![1.0; k as usize + 1];
    if k >= 1 {
        h[1] = x;
    }
    for j in 1..k as usize {
        h[j + 1] = x * h[j] - j as f64 * h[j - 1];
    }
    h
}

/// Evaluate the expansion at a point `ω` of `ℝ^dim`.
pub fn sample(s: &ChaosExpansion, gaussians: &[f64]) -> Result<f64, WickError> {
    if gaussians.len() < s.dim {
        return Err(WickError::DimensionMismatch { expected: s.dim, got: gaussians.len() });
    }
    let max_exp = s.coeffs.keys().flat_map(|a| a.exponents().iter().copied()).max().unwrap_or(0);
    let tables: Vec<Vec<f64>> = gaussians[..s.dim].iter().map(|&x| hermite_values(x, max_exp)).collect();
    Ok(s.coeffs
        .iter()
        .map(|(a, c)| c * a.exponents().iter().enumerate().map(|(i, &k)| tables[i][k as usize]).product::<f64>())
        .sum())
}

/// Monte Carlo mean and standard error of `f(ω)` over standard normal `ω ∈ ℝ^dim`.
pub fn mc_mean(
    f: impl Fn(&[f64]) -> f64,
    dim: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64), WickError> {
    if n_samples < 100 {
        return Err(WickError::TooFewSamples(n_samples));
    }
    let gen = CounterNormal::new(seed);
    let mut omega = vec![0.0; dim.max(1)];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for i in 0..n_samples {
        gen.fill(0, (i * omega.len()) as u64, &mut omega);
        let v = f(&omega[..dim]);
        sum += v;
        sum_sq += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Monte Carlo estimate of `E[S]` with standard error.
pub fn mc_expectation(s: &ChaosExpansion, n_samples: usize, seed: u64) -> Result<(f64, f64), WickError> {
    if s.is_deterministic() {
        if n_samples < 100 {
            return Err(WickError::TooFewSamples(n_samples));
        }
        return Ok((expectation(s), 0.0));
    }
    mc_mean(|w| sample(s, w).expect("dimension checked"), s.dim, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h(k: u32) -> ChaosExpansion {
        ChaosExpansion::hermite(1, MultiIndex::single(0, k), 1.0).unwrap()
    }

    #[test]
    fn multi_index_normalisation() {
        assert_eq!(MultiIndex::new(vec![1, 0, 0]), MultiIndex::single(0, 1));
        assert_eq!(MultiIndex::new(vec![0, 0]), MultiIndex::zero());
        assert_eq!(MultiIndex::new(vec![2, 3]).factorial(), 12.0);
    }

    #[test]
    fn product_examples() {
        assert_eq!(wick_product(&h(1), &h(1)).unwrap(), h(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = ChaosExpansion::random(&mut rng, 3, 4, 8);
        let c = ChaosExpansion::constant(3, 2.5);
        assert_eq!(wick_product(&c, &t).unwrap(), t.scaled(2.5));
        assert!(wick_product(&t, &ChaosExpansion::zero(3)).unwrap().coeffs.is_empty());
        let mut big = h(10);
        big.max_order = 12;
        assert!(matches!(wick_product(&big, &h(3)), Err(WickError::OrderOverflow { order: 13, max: 12 })));
    }

    #[test]
    fn expectation_and_sample_examples() {
        assert_eq!(expectation(&h(1)), 0.0);
        assert_eq!(expectation(&ChaosExpansion::constant(2, -3.0)), -3.0);
        assert_eq!(sample(&h(1), &[1.5]).unwrap(), 1.5);
        assert_eq!(sample(&h(2), &[2.0]).unwrap(), 3.0);
        assert_eq!(sample(&ChaosExpansion::constant(2, 0.7), &[9.0, -1.0]).unwrap(), 0.7);
        assert_eq!(hermite_values(0.5, 4)[4], 0.5f64.powi(4) - 6.0 * 0.25 + 3.0);
        assert!(sample(&ChaosExpansion::constant(2, 1.0), &[0.0]).is_err());
    }

    #[test]
    fn mc_examples() {
        let (m, se) = mc_expectation(&h(2), 20_000, 9).unwrap();
        assert!(m.abs() <= 4.0 * se);
        assert_eq!(mc_expectation(&ChaosExpansion::constant(1, 1.25), 100, 0).unwrap(), (1.25, 0.0));
        assert!(mc_expectation(&h(2), 99, 0).is_err());
    }
}
