//! Dense truncated Fock-space operators and coefficient vectors.
//!
//! An operator on `span{|0>, ..., |D-1>}` is stored row-major as a `D x D`
//! complex matrix whose entry `(i, j)` is `<i|X|j>`. Products run their row
//! loop through [`Exec`], so the same code serves the rayon and the
//! sequential builds.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{PbxError, Result};
use crate::exec::Exec;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Smallest dimension accepted for any truncated operator.
pub const MIN_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl TruncatedOperator {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(PbxError::InvalidDimension { dim, min: MIN_DIM });
        }
        if entries.len() != dim * dim {
            return Err(PbxError::DimensionMismatch {
                left: dim * dim,
                right: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(PbxError::NonFinite { what: "operator" });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let d = values.len();
        Self::from_fn(d, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> FockVector {
        FockVector::from_coeffs((0..self.dim).map(|i| self.get(i, j)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c * I`.
    pub fn shift(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += c;
        }
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x + c * y)
                .collect(),
        }
    }

    /// Checked product using the default execution policy.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with(other, Exec::default())
    }

    pub fn mul_with(&self, other: &Self, exec: Exec) -> Result<Self> {
        if self.dim != other.dim {
            return Err(PbxError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(matmul(self, other, exec))
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        assert_eq!(self.dim, v.dim(), "operator/vector dimension mismatch");
        let coeffs = (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.coeffs())
                    .fold(ZERO, |acc, (x, y)| acc + x * y)
            })
            .collect();
        FockVector::from_coeffs(coeffs)
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Leading `w x w` block as a new operator.
    pub fn leading_block(&self, w: usize) -> Result<Self> {
        if w > self.dim {
            return Err(PbxError::WindowTooLarge {
                window: w,
                dim: self.dim,
            });
        }
        Self::new(w, (0..w * w).map(|k| self.get(k / w, k % w)).collect())
    }
}

fn matmul(x: &TruncatedOperator, y: &TruncatedOperator, exec: Exec) -> TruncatedOperator {
    let d = x.dim;
    let mut entries = vec![ZERO; d * d];
    exec.for_each_row(&mut entries, d, |i, out| {
        for (k, &xik) in x.row(i).iter().enumerate() {
            if xik == ZERO {
                continue;
            }
            for (o, &ykj) in out.iter_mut().zip(y.row(k)) {
                *o += xik * ykj;
            }
        }
    });
    TruncatedOperator { dim: d, entries }
}

impl Add for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn add(self, rhs: Self) -> TruncatedOperator {
        self.add_scaled(ONE, rhs)
    }
}

impl Sub for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn sub(self, rhs: Self) -> TruncatedOperator {
        self.add_scaled(-ONE, rhs)
    }
}

/// Panics on a dimension mismatch; use [`TruncatedOperator::mul`] for the
/// checked form.
impl Mul for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn mul(self, rhs: Self) -> TruncatedOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        matmul(self, rhs, Exec::default())
    }
}

/// Coefficients over the oscillator basis `|0>, ..., |D-1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coeffs: Vec<Complex64>,
}

impl FockVector {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coeffs: vec![ZERO; dim],
        }
    }

    /// The `n`-th orthonormal basis vector.
    pub fn basis(dim: usize, n: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coeffs[n] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm of the components with index below `w`.
    pub fn window_norm(&self, w: usize) -> f64 {
        self.coeffs[..w.min(self.dim())]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += c * y;
        }
    }

    /// Index of the largest-magnitude coefficient (first one on ties).
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (k, z) in self.coeffs.iter().enumerate() {
            let a = z.norm();
            if a > best_abs {
                best_abs = a;
                best = k;
            }
        }
        best
    }

    /// Rotate the global phase so that the dominant coefficient is real
    /// positive, then scale to unit norm.
    pub fn phase_fixed_unit(&self) -> Self {
        let k = self.dominant_index();
        let z = self.coeffs[k];
        let norm = self.norm();
        if norm == 0.0 {
            return self.clone();
        }
        let phase = if z.norm() > 0.0 {
            z.conj() / z.norm()
        } else {
            ONE
        };
        self.scale(phase / norm)
    }

    /// Zero-pad (or cut) to a new dimension.
    pub fn resized(&self, dim: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim, ZERO);
        Self { coeffs }
    }
}

/// Leading index range `0..w` on which residuals are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrustWindow(usize);

impl TrustWindow {
    pub fn new(w: usize, dim: usize) -> Result<Self> {
        if w == 0 {
            return Err(PbxError::Config("trust window must be positive".into()));
        }
        if w > dim {
            return Err(PbxError::WindowTooLarge { window: w, dim });
        }
        Ok(Self(w))
    }

    /// Half the truncation dimension.
    pub fn default_for(dim: usize) -> Self {
        Self((dim / 2).max(1))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn halved(self) -> Self {
        Self((self.0 / 2).max(1))
    }
}

/// Annihilation and creation matrices `(a, a^dagger)` on `D` levels.
pub fn make_ladder_pair(dim: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    if dim < MIN_DIM {
        return Err(PbxError::InvalidDimension { dim, min: MIN_DIM });
    }
    let a = TruncatedOperator::from_fn(dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let adag = a.adjoint();
    Ok((a, adag))
}

/// `XY - YX`.
pub fn commutator(x: &TruncatedOperator, y: &TruncatedOperator) -> Result<TruncatedOperator> {
    let xy = x.mul(y)?;
    let yx = y.mul(x)?;
    Ok(&xy - &yx)
}

/// Max-entry deviation `|X - target|` over the leading `w x w` block.
pub fn window_residual(x: &TruncatedOperator, target: &TruncatedOperator, w: usize) -> Result<f64> {
    if x.dim() != target.dim() {
        return Err(PbxError::DimensionMismatch {
            left: x.dim(),
            right: target.dim(),
        });
    }
    if w > x.dim() {
        return Err(PbxError::WindowTooLarge {
            window: w,
            dim: x.dim(),
        });
    }
    let mut worst: f64 = 0.0;
    for i in 0..w {
        for j in 0..w {
            worst = worst.max((x.get(i, j) - target.get(i, j)).norm());
        }
    }
    Ok(worst)
}

/// An operator of the form `on_a * a + on_adag * a^dagger + shift * I`.
///
/// Every pseudo-bosonic pair in this crate has this shape, which lets the
/// vacuum be found by forward substitution instead of a dense solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderCombination {
    pub on_a: Complex64,
    pub on_adag: Complex64,
    pub shift: Complex64,
}

impl LadderCombination {
    pub fn new(on_a: Complex64, on_adag: Complex64, shift: Complex64) -> Self {
        Self {
            on_a,
            on_adag,
            shift,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            on_a: self.on_adag.conj(),
            on_adag: self.on_a.conj(),
            shift: self.shift.conj(),
        }
    }

    pub fn to_operator(
        &self,
        a: &TruncatedOperator,
        adag: &TruncatedOperator,
    ) -> TruncatedOperator {
        a.scale(self.on_a)
            .add_scaled(self.on_adag, adag)
            .shift(self.shift)
    }

    /// Apply to a coefficient vector without forming the matrix.
    pub fn apply(&self, v: &FockVector) -> FockVector {
        let d = v.dim();
        let c = v.coeffs();
        let coeffs = (0..d)
            .map(|k| {
                let mut out = self.shift * c[k];
                if k + 1 < d {
                    out += self.on_a * ((k + 1) as f64).sqrt() * c[k + 1];
                }
                if k > 0 {
                    out += self.on_adag * (k as f64).sqrt() * c[k - 1];
                }
                out
            })
            .collect();
        FockVector::from_coeffs(coeffs)
    }

    /// Vector annihilated by every interior row `0..D-1` of the truncated
    /// operator, found by forward substitution from `z_0 = 1`.
    ///
    /// Row `k` reads `on_a*sqrt(k+1)*z_{k+1} + shift*z_k + on_adag*sqrt(k)*z_{k-1} = 0`,
    /// which fixes `z_{k+1}` whenever `on_a != 0`.
    pub fn interior_null_vector(&self, dim: usize) -> Result<FockVector> {
        if self.on_a == ZERO {
            return Err(PbxError::Domain(
                "annihilator has no component along a; forward substitution impossible".into(),
            ));
        }
        let mut z = vec![ZERO; dim];
        z[0] = ONE;
        for k in 0..dim - 1 {
            let below = if k > 0 {
                self.on_adag * (k as f64).sqrt() * z[k - 1]
            } else {
                ZERO
            };
            z[k + 1] = -(below + self.shift * z[k]) / (self.on_a * ((k + 1) as f64).sqrt());
            if !z[k + 1].is_finite() {
                return Err(PbxError::NonFinite {
                    what: "vacuum recursion",
                });
            }
        }
        Ok(FockVector::from_coeffs(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_pair_d2() {
        let (a, adag) = make_ladder_pair(2).unwrap();
        assert_eq!(a.get(0, 1), ONE);
        assert_eq!(a.get(0, 0), ZERO);
        assert_eq!(a.get(1, 0), ZERO);
        assert_eq!(a.get(1, 1), ZERO);
        assert_eq!(adag.get(1, 0), ONE);
    }

    #[test]
    fn ladder_pair_d4_entry() {
        let (a, _) = make_ladder_pair(4).unwrap();
        assert_eq!(a.get(2, 3).re, 3f64.sqrt());
    }

    #[test]
    fn ladder_rejects_small_dimension() {
        assert_eq!(
            make_ladder_pair(1).unwrap_err(),
            PbxError::InvalidDimension { dim: 1, min: 2 }
        );
    }

    #[test]
    fn ladder_commutator_truncation_edge() {
        let (a, adag) = make_ladder_pair(8).unwrap();
        let comm = commutator(&a, &adag).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expected = match (i == j, i) {
                    (true, 7) => c(-7.0, 0.0),
                    (true, _) => ONE,
                    _ => ZERO,
                };
                assert!((comm.get(i, j) - expected).norm() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn interior_of_ladder_commutator_is_exact_identity() {
        let (a, adag) = make_ladder_pair(64).unwrap();
        let comm = commutator(&a, &adag).unwrap();
        let id = TruncatedOperator::identity(64);
        assert!(window_residual(&comm, &id, 63).unwrap() < 1e-13);
    }

    #[test]
    fn self_commutator_vanishes() {
        let x = TruncatedOperator::from_fn(5, |i, j| c(i as f64 - 0.3 * j as f64, (i * j) as f64));
        let z = commutator(&x, &x).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let x = TruncatedOperator::identity(3);
        let y = TruncatedOperator::identity(4);
        assert!(matches!(
            commutator(&x, &y),
            Err(PbxError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn window_residual_examples() {
        let d = 10;
        let target = TruncatedOperator::from_fn(d, |i, j| c((i + j) as f64, 1.0));
        assert_eq!(window_residual(&target, &target, 6).unwrap(), 0.0);

        let mut inside = target.clone();
        inside.set(5, 5, inside.get(5, 5) + c(1e-3, 0.0));
        assert!((window_residual(&inside, &target, 6).unwrap() - 1e-3).abs() < 1e-15);

        let mut outside = target.clone();
        outside.set(d - 1, d - 1, outside.get(d - 1, d - 1) + c(0.5, 0.0));
        assert_eq!(window_residual(&outside, &target, 6).unwrap(), 0.0);

        assert!(matches!(
            window_residual(&target, &target, 11),
            Err(PbxError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let mut e = vec![ZERO; 4];
        e[3] = c(f64::NAN, 0.0);
        assert!(TruncatedOperator::new(2, e).is_err());
    }

    #[test]
    fn sequential_and_parallel_products_agree() {
        let x = TruncatedOperator::from_fn(33, |i, j| c((i as f64).sin(), (j as f64).cos()));
        let y =
            TruncatedOperator::from_fn(33, |i, j| c((i * j) as f64 * 1e-2, 1.0 / (1.0 + i as f64)));
        let s = x.mul_with(&y, Exec::Sequential).unwrap();
        let p = x.mul_with(&y, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn ladder_combination_matches_matrix_action() {
        let (a, adag) = make_ladder_pair(12).unwrap();
        let comb = LadderCombination::new(c(0.8, 0.1), c(-0.2, 0.5), c(0.3, -0.7));
        let v = FockVector::from_coeffs((0..12).map(|k| c(k as f64, 1.0 - k as f64)).collect());
        let direct = comb.to_operator(&a, &adag).apply(&v);
        let fast = comb.apply(&v);
        assert!(direct.sub(&fast).norm() < 1e-12);
        let adj = comb.adjoint().to_operator(&a, &adag);
        let adj_direct = comb.to_operator(&a, &adag).adjoint();
        assert!(window_residual(&adj, &adj_direct, 12).unwrap() < 1e-15);
    }

    #[test]
    fn interior_null_vector_is_coherent_state_for_shifted_a() {
        // a - 1/2 annihilates the coherent state with amplitude 1/2.
        let comb = LadderCombination::new(ONE, ZERO, c(-0.5, 0.0));
        let z = comb.interior_null_vector(20).unwrap();
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = 0.5f64.powi(k as i32) / fact.sqrt();
            assert!((z.get(k).re - expected).abs() < 1e-15 * expected.max(1e-300));
        }
    }

    #[test]
    fn phase_fix_makes_dominant_positive() {
        let v = FockVector::from_coeffs(vec![c(0.0, 0.1), c(0.0, -2.0), c(0.3, 0.0)]);
        let u = v.phase_fixed_unit();
        assert!((u.norm() - 1.0).abs() < 1e-15);
        assert!(u.get(1).im.abs() < 1e-15 && u.get(1).re > 0.0);
    }

    fn arb_operator(d: usize) -> impl Strategy<Value = TruncatedOperator> {
        proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), d * d).prop_map(move |v| {
            TruncatedOperator::new(d, v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn adjoint_is_an_involution(x in arb_operator(6)) {
            prop_assert_eq!(x.adjoint().adjoint(), x);
        }

        #[test]
        fn commutator_is_antisymmetric(x in arb_operator(4), y in arb_operator(4)) {
            let xy = commutator(&x, &y).unwrap();
            let yx = commutator(&y, &x).unwrap();
            prop_assert!((&xy + &yx).max_abs() < 1e-10);
        }
    }
}
