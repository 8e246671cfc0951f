//! Hermite and Legendre polynomials, double factorials and Gauss-Hermite
//! rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{PbxError, Result};

/// Largest polynomial degree accepted by [`hermite`] and [`legendre`].
pub const POLY_DEGREE_CAP: usize = 512;

pub const MIN_RULE_SIZE: usize = 2;
pub const MAX_RULE_SIZE: usize = 4096;

/// Physicists' Hermite polynomial `H_n(z)` by the three-term recurrence.
pub fn hermite(n: usize, z: Complex64) -> Result<Complex64> {
    if n > POLY_DEGREE_CAP {
        return Err(PbxError::IndexCap {
            n,
            cap: POLY_DEGREE_CAP,
        });
    }
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `H_0(z), ..., H_n(z)` in one pass.
pub fn hermite_all(n: usize, z: Complex64) -> Result<Vec<Complex64>> {
    if n > POLY_DEGREE_CAP {
        return Err(PbxError::IndexCap {
            n,
            cap: POLY_DEGREE_CAP,
        });
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(1.0, 0.0));
    if n >= 1 {
        out.push(2.0 * z);
    }
    for k in 1..n {
        let next = 2.0 * z * out[k] - 2.0 * k as f64 * out[k - 1];
        out.push(next);
    }
    Ok(out)
}

/// Legendre polynomial `P_n(x)` by Bonnet's recurrence. `x` may lie outside
/// `[-1, 1]`.
pub fn legendre(n: usize, x: f64) -> Result<f64> {
    Ok(legendre_complex(n, Complex64::new(x, 0.0))?.re)
}

pub fn legendre_complex(n: usize, z: Complex64) -> Result<Complex64> {
    if n > POLY_DEGREE_CAP {
        return Err(PbxError::IndexCap {
            n,
            cap: POLY_DEGREE_CAP,
        });
    }
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = z;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * z * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `n!!` with `(-1)!! = 0!! = 1`, in floating point.
pub fn double_factorial(n: i64) -> Result<f64> {
    if n < -1 {
        return Err(PbxError::Domain(format!("double factorial of {n}")));
    }
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    Ok(acc)
}

/// `(2n-1)!! / (2n)!!`, accumulated as a product of ratios so that it stays
/// representable for every `n`.
pub fn odd_even_double_factorial_ratio(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64)
}

/// Gauss-Hermite rule for `int f(x) exp(-x^2) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Strictly increasing, symmetric about zero.
    pub nodes: Vec<f64>,
    /// Plain weights; the outermost ones underflow to zero for large rules.
    pub weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]^2)`, used to integrate functions that
    /// already carry their own Gaussian factor.
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub const WEIGHT_KIND: &'static str = "exp(-x^2)";

    /// `int f(x) exp(-x^2) dx`.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Orthonormal Hermite recurrence at `x`, rescaled to avoid overflow.
/// Returns `(q_m, q_{m-1}, ln_scale)` with `p_j = q_j * exp(ln_scale) * pi^{-1/4}`.
fn orthonormal_hermite_tail(m: usize, x: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e150;
    let mut prev = 1.0;
    let mut cur = 2f64.sqrt() * x;
    let mut ln_scale = 0.0;
    for j in 2..=m {
        let jf = j as f64;
        let next = (2.0 / jf).sqrt() * x * cur - ((jf - 1.0) / jf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            ln_scale += BIG.ln();
        }
    }
    (cur, prev, ln_scale)
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix of the Hermite
/// weight (zero diagonal, off-diagonal `sqrt(k/2)`) by implicit QL.
fn jacobi_eigenvalues(m: usize) -> Result<Vec<f64>> {
    let mut d = vec![0.0f64; m];
    let mut e: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    for l in 0..m {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(PbxError::Domain(format!(
                    "tridiagonal eigen-solve for m = {m} did not converge"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    Ok(d)
}

pub fn gauss_hermite(m: usize) -> Result<QuadratureRule> {
    if !(MIN_RULE_SIZE..=MAX_RULE_SIZE).contains(&m) {
        return Err(PbxError::Domain(format!(
            "Gauss-Hermite rule size {m} outside {MIN_RULE_SIZE}..={MAX_RULE_SIZE}"
        )));
    }
    let mf = m as f64;
    let half = m.div_ceil(2);
    let mut roots = Vec::with_capacity(half); // decreasing, positive side
    let ln_quarter_pi = 0.25 * PI.ln();
    let mut scaled = Vec::with_capacity(half);
    let mut plain = Vec::with_capacity(half);
    let mut seeds = jacobi_eigenvalues(m)?;
    seeds.sort_by(|a, b| b.total_cmp(a));
    for i in 0..half {
        let mut z = if m % 2 == 1 && i == half - 1 {
            0.0
        } else {
            seeds[i]
        };
        let mut converged = false;
        for _ in 0..200 {
            let (q_m, q_prev, _) = orthonormal_hermite_tail(m, z);
            let step = q_m / ((2.0 * mf).sqrt() * q_prev);
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(PbxError::Domain(format!(
                "Newton iteration for Hermite root {i} of {m} did not converge"
            )));
        }
        let (_, q_prev, ln_scale) = orthonormal_hermite_tail(m, z);
        let ln_p_prev = q_prev.abs().ln() + ln_scale - ln_quarter_pi;
        let ln_w = -mf.ln() - 2.0 * ln_p_prev;
        roots.push(z);
        plain.push(ln_w.exp());
        scaled.push((ln_w + z * z).exp());
    }

    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mut scaled_weights = vec![0.0; m];
    for i in 0..half {
        nodes[m - 1 - i] = roots[i];
        nodes[i] = -roots[i];
        weights[m - 1 - i] = plain[i];
        weights[i] = plain[i];
        scaled_weights[m - 1 - i] = scaled[i];
        scaled_weights[i] = scaled[i];
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PbxError::Domain(format!(
            "Gauss-Hermite nodes for m = {m} are not strictly increasing"
        )));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights,
    })
}

const CACHE_SLOTS: usize = 13; // 2^0 ..= 2^12
static RULE_CACHE: [OnceLock<QuadratureRule>; CACHE_SLOTS] =
    [const { OnceLock::new() }; CACHE_SLOTS];

/// Shared rule of size `2^k` for `1 <= k <= 12`, built on first use.
pub fn cached_gauss_hermite(k: u32) -> Result<&'static QuadratureRule> {
    let slot = k as usize;
    if slot == 0 || slot >= CACHE_SLOTS {
        return Err(PbxError::Domain(format!("no cached rule of size 2^{k}")));
    }
    if let Some(rule) = RULE_CACHE[slot].get() {
        return Ok(rule);
    }
    let rule = gauss_hermite(1 << k)?;
    Ok(RULE_CACHE[slot].get_or_init(|| rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// H_n coefficients by expanding the recurrence on integer polynomials.
    fn hermite_coefficients(n: usize) -> Vec<i64> {
        let mut prev = vec![1i64];
        if n == 0 {
            return prev;
        }
        let mut cur = vec![0, 2];
        for k in 1..n {
            let mut next = vec![0i64; k + 2];
            for (i, &a) in cur.iter().enumerate() {
                next[i + 1] += 2 * a;
            }
            for (i, &a) in prev.iter().enumerate() {
                next[i] -= 2 * k as i64 * a;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, c(3.3, -1.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(hermite(2, c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
        // 8x^3 - 12x at x = i
        let coeffs = hermite_coefficients(3);
        assert_eq!(coeffs, vec![0, -12, 0, 8]);
        let h3 = hermite(3, c(0.0, 1.0)).unwrap();
        assert!((h3 - c(0.0, -20.0)).norm() < 1e-13);
    }

    #[test]
    fn hermite_matches_expanded_polynomial() {
        let z = c(0.7, -0.4);
        for n in 0..12 {
            let coeffs = hermite_coefficients(n);
            let mut direct = c(0.0, 0.0);
            let mut pow = c(1.0, 0.0);
            for &a in &coeffs {
                direct += a as f64 * pow;
                pow *= z;
            }
            let rec = hermite(n, z).unwrap();
            assert!(
                (rec - direct).norm() <= 1e-12 * direct.norm().max(1.0),
                "n={n}"
            );
        }
    }

    #[test]
    fn hermite_cap() {
        assert!(matches!(
            hermite(513, c(0.1, 0.0)),
            Err(PbxError::IndexCap { .. })
        ));
        assert!(hermite(512, c(0.1, 0.0)).is_ok());
    }

    #[test]
    fn hermite_all_agrees_with_single() {
        let z = c(-1.1, 0.3);
        let all = hermite_all(9, z).unwrap();
        for (n, h) in all.iter().enumerate() {
            assert_eq!(*h, hermite(n, z).unwrap());
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(0, 7.0).unwrap(), 1.0);
        assert_eq!(legendre(1, -0.3).unwrap(), -0.3);
        // (3*4 - 1)/2
        assert!((legendre(2, 2.0).unwrap() - 5.5).abs() < 1e-15);
        // P_3(x) = (5x^3 - 3x)/2
        let x = 1.7;
        assert!((legendre(3, x).unwrap() - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-13);
        assert!(matches!(legendre(600, 0.5), Err(PbxError::IndexCap { .. })));
    }

    #[test]
    fn double_factorial_examples() {
        assert_eq!(double_factorial(-1).unwrap(), 1.0);
        assert_eq!(double_factorial(0).unwrap(), 1.0);
        assert_eq!(double_factorial(7).unwrap(), 105.0);
        assert_eq!(double_factorial(6).unwrap(), 48.0);
        assert!(double_factorial(-2).is_err());
    }

    #[test]
    fn double_factorial_product_is_factorial() {
        let mut fact = 1.0;
        for n in 1..=15i64 {
            fact *= (2 * n - 1) as f64 * (2 * n) as f64;
            let prod = double_factorial(2 * n).unwrap() * double_factorial(2 * n - 1).unwrap();
            assert!((prod - fact).abs() <= 1e-12 * fact, "n={n}");
        }
    }

    #[test]
    fn ratio_matches_double_factorials() {
        for n in 0..20usize {
            let direct = double_factorial(2 * n as i64 - 1).unwrap()
                / double_factorial(2 * n as i64).unwrap();
            assert!((odd_even_double_factorial_ratio(n) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_rule_closed_form() {
        let rule = gauss_hermite(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-15 && (rule.nodes[1] - r).abs() < 1e-15);
        let w = PI.sqrt() / 2.0;
        assert!((rule.weights[0] - w).abs() < 1e-15 && (rule.weights[1] - w).abs() < 1e-15);
    }

    #[test]
    fn second_moment() {
        let rule = gauss_hermite(8).unwrap();
        let m2 = rule.integrate_weighted(|x| x * x);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn zeroth_moment() {
        for m in [2, 3, 64, 65, 512] {
            let rule = gauss_hermite(m).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-12, "m={m} sum={s}");
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            for i in 0..m {
                assert!((rule.nodes[i] + rule.nodes[m - 1 - i]).abs() < 1e-12);
                assert!(rule.scaled_weights[i] > 0.0);
            }
        }
    }

    #[test]
    fn largest_rule_is_well_formed() {
        let rule = gauss_hermite(MAX_RULE_SIZE).unwrap();
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        let s: f64 = rule.weights.iter().sum();
        assert!((s - PI.sqrt()).abs() < 1e-12);
        // Integrates a Gaussian-damped polynomial exactly.
        let v: f64 = rule
            .nodes
            .iter()
            .zip(&rule.scaled_weights)
            .map(|(&x, &w)| w * x * x * (-x * x).exp())
            .sum();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rule_size_bounds() {
        assert!(gauss_hermite(1).is_err());
        assert!(gauss_hermite(4097).is_err());
    }

    #[test]
    fn hermite_orthogonality_under_quadrature() {
        let m = 24;
        let rule = gauss_hermite(m).unwrap();
        let top = (m - 2) / 2;
        let mut norm = 1.0; // 2^k k!
        for k in 0..=top {
            if k > 0 {
                norm *= 2.0 * k as f64;
            }
            for j in 0..=top {
                let v = rule.integrate_weighted(|x| {
                    hermite(j, c(x, 0.0)).unwrap().re * hermite(k, c(x, 0.0)).unwrap().re
                });
                let expected = if j == k { norm * PI.sqrt() } else { 0.0 };
                assert!(
                    (v - expected).abs() <= 1e-9 * norm * PI.sqrt(),
                    "j={j} k={k}"
                );
            }
        }
    }

    #[test]
    fn cached_rules_are_shared() {
        let a = cached_gauss_hermite(5).unwrap();
        let b = cached_gauss_hermite(5).unwrap();
        assert!(std::ptr::eq(a, b));
        assert_eq!(a.size(), 32);
        assert!(cached_gauss_hermite(13).is_err());
    }

    proptest! {
        #[test]
        fn hermite_recurrence_consistency(re in -2.1f64..2.1, im in -2.1f64..2.1, n in 1usize..40) {
            let z = c(re, im);
            let h = hermite_all(n + 1, z).unwrap();
            let lhs = h[n + 1] - 2.0 * z * h[n] + 2.0 * n as f64 * h[n - 1];
            let scale = h[n + 1].norm() + (2.0 * z * h[n]).norm() + (2.0 * n as f64 * h[n - 1]).norm();
            prop_assert!(lhs.norm() <= 1e-8 * scale.max(1e-300));
        }

        #[test]
        fn hermite_parity(re in -3.0f64..3.0, im in -3.0f64..3.0, n in 0usize..40) {
            let z = c(re, im);
            let plus = hermite(n, z).unwrap();
            let minus = hermite(n, -z).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((minus - sign * plus).norm() <= 1e-10 * plus.norm().max(1e-300));
        }

        #[test]
        fn legendre_parity(x in -3.0f64..3.0, n in 0usize..40) {
            let plus = legendre(n, x).unwrap();
            let minus = legendre(n, -x).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((minus - sign * plus).abs() <= 1e-10 * plus.abs().max(1e-300));
        }
    }
}
