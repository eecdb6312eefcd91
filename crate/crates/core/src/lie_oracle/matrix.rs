//! Matrix Lie algebra and group elements with a self-contained exponential.

use nalgebra::DMatrix;
use rand::Rng;

use super::LieError;

/// Element of a matrix Lie algebra: a real `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(pub DMatrix<f64>);

/// Element of a matrix Lie group: an invertible real `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(pub DMatrix<f64>);

/// Inverses with a 1-norm condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

impl AlgebraElement {
    pub fn zeros(d: usize) -> Self {
        AlgebraElement(DMatrix::zeros(d, d))
    }

    pub fn from_rows(d: usize, rows: &[f64]) -> Self {
        AlgebraElement(DMatrix::from_row_slice(d, d, rows))
    }

    pub fn diag(entries: &[f64]) -> Self {
        AlgebraElement(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)))
    }

    /// so(3) generator `(e_i)_{jk} = −ε_{ijk}`.
    pub fn so3_generator(i: usize) -> Self {
        Self::so3([0, 1, 2].map(|k| if k == i { 1.0 } else { 0.0 }))
    }

    /// Skew matrix `Σ ω_i e_i`, so that `X v = ω × v`.
    pub fn so3(w: [f64; 3]) -> Self {
        Self::from_rows(3, &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0])
    }

    pub fn random_so3(rng: &mut impl Rng, scale: f64) -> Self {
        Self::so3([0; 3].map(|_| scale * rng.random_range(-1.0..1.0)))
    }

    pub fn random_gl(rng: &mut impl Rng, d: usize, scale: f64) -> Self {
        AlgebraElement(DMatrix::from_fn(d, d, |_, _| scale * rng.random_range(-1.0..1.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        (&self.0 + self.0.transpose()).amax() <= tol
    }

    pub fn scaled(&self, s: f64) -> Self {
        AlgebraElement(&self.0 * s)
    }

    pub fn plus(&self, other: &Self) -> Self {
        AlgebraElement(&self.0 + &other.0)
    }

    pub fn minus(&self, other: &Self) -> Self {
        AlgebraElement(&self.0 - &other.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        GroupElement(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> Result<GroupElement, LieError> {
        let inv = self.0.clone().try_inverse().ok_or(LieError::Singular(f64::INFINITY))?;
        let cond = one_norm(&self.0) * one_norm(&inv);
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(LieError::Singular(cond));
        }
        Ok(GroupElement(inv))
    }

    /// `Ad_g Y = g Y g⁻¹`.
    pub fn adjoint(&self, y: &AlgebraElement) -> Result<AlgebraElement, LieError> {
        check_dims(self.dim(), y.dim())?;
        Ok(AlgebraElement(&self.0 * &y.0 * self.inverse()?.0))
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (self.0.transpose() * &self.0 - DMatrix::<f64>::identity(d, d)).amax() <= tol
            && (self.0.determinant() - 1.0).abs() <= tol
    }
}

fn check_dims(a: usize, b: usize) -> Result<(), LieError> {
    if a == b {
        Ok(())
    } else {
        Err(LieError::DimensionMismatch(a, b))
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix commutator `XY − YX`.
pub fn ad(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, LieError> {
    check_dims(x.dim(), y.dim())?;
    Ok(AlgebraElement(&x.0 * &y.0 - &y.0 * &x.0))
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(x: &AlgebraElement) -> Result<GroupElement, LieError> {
    let d = x.dim();
    Ok(GroupElement(expm_minus_identity(x)? + DMatrix::<f64>::identity(d, d)))
}

/// `exp(X) − I`, accurate relative to its own size for small `X`.
///
/// Squaring is carried out on the offset: `(I + E)² − I = 2E + E²`.
pub fn expm_minus_identity(x: &AlgebraElement) -> Result<DMatrix<f64>, LieError> {
    if !x.is_finite() {
        return Err(LieError::NonFinite);
    }
    let norm = one_norm(&x.0);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    if s > 1000 {
        return Err(LieError::Overflow(norm));
    }
    let y = &x.0 / 2f64.powi(s);
    let mut sum = y.clone();
    let mut term = y.clone();
    for k in 2..=40 {
        term = &term * &y / k as f64;
        sum += &term;
        if one_norm(&term) <= f64::EPSILON * one_norm(&sum) * 0.5 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * 2.0 + &sum * &sum;
        if !sum.iter().all(|v| v.is_finite()) {
            return Err(LieError::Overflow(norm));
        }
    }
    Ok(sum)
}

/// Bernoulli numbers with `B₁ = −1/2`, from `Σ_{j≤k} C(k+1, j) B_j = 0`.
pub fn bernoulli(k: usize) -> Result<f64, LieError> {
    const MAX: usize = 20;
    if k > MAX {
        return Err(LieError::BernoulliIndex(k));
    }
    let mut b = vec![1.0f64; k + 1];
    for m in 1..=k {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, j)
        for (j, bj) in b.iter().enumerate().take(m) {
            acc += binom * bj;
            binom = binom * (m + 1 - j) as f64 / (j + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
        if m > 1 && m % 2 == 1 {
            b[m] = 0.0;
        }
    }
    Ok(b[k])
}

fn ad_series(
    omega: &AlgebraElement,
    v: &AlgebraElement,
    k_max: usize,
    coeff: impl Fn(usize) -> Result<f64, LieError>,
) -> Result<AlgebraElement, LieError> {
    check_dims(omega.dim(), v.dim())?;
    let mut term = v.clone();
    let mut acc = AlgebraElement(&v.0 * coeff(0)?);
    for k in 1..=k_max {
        term = ad(omega, &term)?;
        let c = coeff(k)?;
        if c != 0.0 {
            acc.0 += &term.0 * c;
        }
    }
    Ok(acc)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Right-trivialised derivative of the exponential,
/// `Σ_{k≤K} ad_Ω^k(dΩ) / (k+1)!`.
pub fn dexp_rt(omega: &AlgebraElement, d_omega: &AlgebraElement, k_max: usize) -> Result<AlgebraElement, LieError> {
    ad_series(omega, d_omega, k_max, |k| Ok(1.0 / factorial(k + 1)))
}

/// Magnus generator rate `Σ_{k≤K} (B_k / k!) ad_Ω^k V`.
pub fn magnus_rhs(omega: &AlgebraElement, v: &AlgebraElement, k_max: usize) -> Result<AlgebraElement, LieError> {
    ad_series(omega, v, k_max, |k| Ok(bernoulli(k)? / factorial(k)))
}
