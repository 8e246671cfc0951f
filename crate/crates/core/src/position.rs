//! Position-space wavefunctions, Gauss-Hermite inner products and the
//! integral identities behind the norm and biorthogonality formulas.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::Side;
use crate::error::{PbxError, Result};
use crate::exec::Exec;
use crate::models::{EqhoParams, ModelParams, SwansonParams};
use crate::operator::FockVector;
use crate::special::{cached_gauss_hermite, hermite, legendre, legendre_complex, QuadratureRule};

/// Largest wavefunction index accepted by [`Wavefunction::new`].
pub const WAVE_INDEX_CAP: usize = 60;

/// Relative change between successive rule sizes accepted as converged.
pub const QUAD_REL_TOL: f64 = 1e-10;

pub const QUAD_MAX_ENV: &str = "PBX_QUAD_MAX";

const QUAD_START_LOG2: u32 = 5;
const QUAD_MAX_LOG2: u32 = 12;

/// Distance from the negative real axis below which a square root is
/// flagged as branch-ambiguous.
pub const BRANCH_GUARD: f64 = 1e-8;

/// A function on the real line with Gaussian decay `|f(x)| ~ exp(-rate x^2 / 2)`.
pub trait PositionFunction: Sync {
    fn eval(&self, x: f64) -> Complex64;
    fn decay_rate(&self) -> f64;
}

/// `pi^{-1/4} / sqrt(2^n n!)`.
fn hermite_prefactor(n: usize) -> f64 {
    let ln = -0.25 * PI.ln()
        - 0.5 * (n as f64 * 2f64.ln() + (1..=n).map(|k| (k as f64).ln()).sum::<f64>());
    ln.exp()
}

/// Normalized oscillator eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorState {
    pub n: usize,
}

impl PositionFunction for OscillatorState {
    fn eval(&self, x: f64) -> Complex64 {
        let h = hermite(self.n, Complex64::new(x, 0.0)).expect("index below cap");
        h * hermite_prefactor(self.n) * (-0.5 * x * x).exp()
    }

    fn decay_rate(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveModel {
    Eqho(EqhoParams),
    Swanson(SwansonParams),
}

/// Closed-form eigenfunction of one of the two named models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavefunction {
    model: WaveModel,
    side: Side,
    n: usize,
}

impl Wavefunction {
    pub fn new(params: ModelParams, side: Side, n: usize) -> Result<Self> {
        if n > WAVE_INDEX_CAP {
            return Err(PbxError::IndexCap {
                n,
                cap: WAVE_INDEX_CAP,
            });
        }
        let model = match params {
            ModelParams::Eqho(p) => WaveModel::Eqho(p),
            ModelParams::Swanson(p) => WaveModel::Swanson(p),
            ModelParams::Generalized(_) => {
                return Err(PbxError::UnsupportedRegime(
                    "no position-space form for the generalized pair".into(),
                ))
            }
        };
        Ok(Self { model, side, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn model(&self) -> WaveModel {
        self.model
    }
}

/// `N_1 = pi^{-1/4}` and `N_2 = e^{-i theta} pi^{-1/4}`.
pub fn swanson_normalization(theta: f64, side: Side) -> Complex64 {
    let base = PI.powf(-0.25);
    match side {
        Side::Phi => Complex64::new(base, 0.0),
        Side::Psi => Complex64::from_polar(base, -theta),
    }
}

impl PositionFunction for Wavefunction {
    fn eval(&self, x: f64) -> Complex64 {
        let n = self.n;
        match self.model {
            WaveModel::Eqho(p) => {
                // Oscillator state times exp(+-sqrt(2) x / beta), rescaled.
                let d = 2f64.sqrt() / p.beta();
                let center = match self.side {
                    Side::Phi => d,
                    Side::Psi => -d,
                };
                let h = hermite(n, Complex64::new(x, 0.0)).expect("index below cap");
                h * hermite_prefactor(n) * (-0.5 * (x - center) * (x - center)).exp()
            }
            WaveModel::Swanson(p) => {
                let theta = match self.side {
                    Side::Phi => p.theta(),
                    Side::Psi => -p.theta(),
                };
                let rot = Complex64::from_polar(1.0, theta);
                let h = hermite(n, rot * x).expect("index below cap");
                let gauss = (-0.5 * rot * rot * x * x).exp();
                swanson_normalization(p.theta(), self.side)
                    * hermite_prefactor(n)
                    * PI.powf(0.25)
                    * h
                    * gauss
            }
        }
    }

    fn decay_rate(&self) -> f64 {
        match self.model {
            WaveModel::Eqho(_) => 1.0,
            WaveModel::Swanson(p) => (2.0 * p.theta()).cos(),
        }
    }
}

/// Wraps a closure with a declared decay rate.
pub struct FnPosition<F> {
    f: F,
    rate: f64,
}

impl<F: Fn(f64) -> Complex64 + Sync> FnPosition<F> {
    pub fn new(f: F, rate: f64) -> Self {
        Self { f, rate }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> PositionFunction for FnPosition<F> {
    fn eval(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }

    fn decay_rate(&self) -> f64 {
        self.rate
    }
}

/// `sum_k c_k psi_k(x)` for a Fock coefficient vector, with the oscillator
/// functions generated by their normalized recurrence.
pub struct FockPosition<'a> {
    vector: &'a FockVector,
}

impl<'a> FockPosition<'a> {
    pub fn new(vector: &'a FockVector) -> Self {
        Self { vector }
    }
}

/// `psi_0(x), ..., psi_{count-1}(x)`.
pub fn oscillator_values(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if count > 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for k in 1..count.saturating_sub(1) {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

impl PositionFunction for FockPosition<'_> {
    fn eval(&self, x: f64) -> Complex64 {
        let psi = oscillator_values(self.vector.dim(), x);
        self.vector
            .coeffs()
            .iter()
            .zip(psi)
            .map(|(c, p)| c * p)
            .sum()
    }

    fn decay_rate(&self) -> f64 {
        1.0
    }
}

/// Largest rule size, from `PBX_QUAD_MAX` when set.
pub fn quad_max_nodes() -> usize {
    std::env::var(QUAD_MAX_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .map(|m| m.clamp(2, 1 << QUAD_MAX_LOG2))
        .unwrap_or(1 << QUAD_MAX_LOG2)
}

fn max_log2() -> u32 {
    let m = quad_max_nodes();
    (usize::BITS - 1 - m.leading_zeros()).max(1)
}

/// `int F(x) dx` for an integrand decaying like `exp(-rho x^2)`, doubling the
/// rule until two successive sizes agree.
pub fn integrate<F>(integrand: F, rho: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    integrate_many(|x| vec![integrand(x)], 1, rho).map(|v| v[0])
}

/// Vector-valued version of [`integrate`]; all components must converge.
pub fn integrate_many<F>(integrand: F, len: usize, rho: f64) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Vec<Complex64> + Sync,
{
    converge(len, rho, |rule| {
        apply_rule(rule, &integrand, len, rho, |n, f| (0..n).map(f).collect())
    })
}

/// Runs successively doubled rules through `eval` until every component
/// changes by at most [`QUAD_REL_TOL`] relative to its own magnitude or the
/// sum of absolute terms.
fn converge<E>(len: usize, rho: f64, eval: E) -> Result<Vec<Complex64>>
where
    E: Fn(&QuadratureRule) -> (Vec<Complex64>, Vec<f64>),
{
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(PbxError::Domain(format!(
            "decay rate {rho} is not positive"
        )));
    }
    let top = max_log2();
    let start = QUAD_START_LOG2.min(top.saturating_sub(1)).max(1);
    let mut prev = eval(cached_gauss_hermite(start)?).0;
    let mut last_change = f64::INFINITY;
    for k in start + 1..=top {
        let (cur, abs) = eval(cached_gauss_hermite(k)?);
        let mut worst: f64 = 0.0;
        for i in 0..len {
            let scale = cur[i].norm().max(abs[i]);
            let change = (cur[i] - prev[i]).norm();
            worst = worst.max(if scale > 0.0 { change / scale } else { 0.0 });
        }
        last_change = worst;
        if worst <= QUAD_REL_TOL {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(PbxError::Quadrature {
        max_nodes: 1 << top,
        last_change,
    })
}

/// Weighted sums of `integrand` over a rule rescaled to decay rate `rho`.
/// `map` evaluates the nodes; accumulation is always in node order.
fn apply_rule<F, M>(
    rule: &QuadratureRule,
    integrand: &F,
    len: usize,
    rho: f64,
    map: M,
) -> (Vec<Complex64>, Vec<f64>)
where
    F: Fn(f64) -> Vec<Complex64> + Sync,
    M: FnOnce(usize, &(dyn Fn(usize) -> Vec<Complex64> + Sync)) -> Vec<Vec<Complex64>>,
{
    let scale = 1.0 / rho.sqrt();
    let values = map(rule.size(), &|i| integrand(rule.nodes[i] * scale));
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    let mut abs = vec![0.0; len];
    for (vals, &sw) in values.iter().zip(&rule.scaled_weights) {
        for k in 0..len {
            let term = vals[k] * (sw * scale);
            sum[k] += term;
            abs[k] += term.norm();
        }
    }
    (sum, abs)
}

/// `int conj(f) g dx` (or `int f g dx` when `conjugate_first` is false).
pub fn quad_inner(
    f: &dyn PositionFunction,
    g: &dyn PositionFunction,
    conjugate_first: bool,
) -> Result<Complex64> {
    let rho = 0.5 * (f.decay_rate() + g.decay_rate());
    integrate(
        |x| {
            let fx = f.eval(x);
            let fx = if conjugate_first { fx.conj() } else { fx };
            fx * g.eval(x)
        },
        rho,
    )
}

/// Fock coefficients `<psi_k, f>` for `k < count`. Node values are computed
/// under `exec`; accumulation order is fixed.
pub fn fock_projection(
    f: &dyn PositionFunction,
    count: usize,
    exec: Exec,
) -> Result<Vec<Complex64>> {
    let rho = 0.5 * (f.decay_rate() + 1.0);
    let integrand = |x: f64| -> Vec<Complex64> {
        let fx = f.eval(x);
        oscillator_values(count, x)
            .into_iter()
            .map(|p| fx * p)
            .collect()
    };
    converge(count, rho, |rule| {
        apply_rule(rule, &integrand, count, rho, |n, g| exec.map(n, g))
    })
}

/// `<psi_0, vacuum>` for the Swanson vacuum on the given side.
pub fn swanson_vacuum_constant(theta: f64, side: Side) -> Result<Complex64> {
    let p = SwansonParams::new(theta)?;
    let vacuum = Wavefunction::new(ModelParams::Swanson(p), side, 0)?;
    quad_inner(&OscillatorState { n: 0 }, &vacuum, true)
}

/// Outcome of checking a closed form against quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_dev: f64,
    pub branch_warning: bool,
}

fn near_negative_axis(z: Complex64) -> bool {
    z.re < 0.0 && z.im.abs() <= BRANCH_GUARD * z.norm()
}

/// `int_0^inf e^{-p x^2} H_n(bx) H_n(cx) dx` by quadrature against
/// `2^{n-1} n! sqrt(pi) p^{-(n+1)/2} q^{n/2} P_n(bc / sqrt(p q))`,
/// `q = b^2 + c^2 - p`, principal branches.
pub fn verify_prudnikov(
    n: usize,
    p: Complex64,
    b: Complex64,
    c: Complex64,
) -> Result<IdentityCheck> {
    if !(p.re > 0.0) {
        return Err(PbxError::Domain(format!("Re p = {} is not positive", p.re)));
    }
    hermite(n, b)?;
    let q = b * b + c * c - p;
    let branch_warning =
        near_negative_axis(p) || near_negative_axis(q) || near_negative_axis(p * q);
    let rho = p.re;
    let full = integrate(
        |x| (-p * x * x).exp() * hermite(n, b * x).unwrap() * hermite(n, c * x).unwrap(),
        rho,
    )?;
    let lhs = 0.5 * full;
    let sp = p.sqrt();
    let sq = q.sqrt();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let arg = b * c / (sp * sq);
    let rhs = 2f64.powi(n as i32 - 1)
        * fact
        * PI.sqrt()
        * sp.powi(-(n as i32 + 1))
        * sq.powi(n as i32)
        * legendre_complex(n, arg)?;
    Ok(IdentityCheck {
        lhs,
        rhs,
        rel_dev: (lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE),
        branch_warning,
    })
}

/// Quadrature `||phi_n||^2` for the Swanson wavefunction against
/// `|N_1|^2 sqrt(pi / cos 2theta) P_n(1/cos 2theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormCheck {
    pub quadrature: f64,
    pub closed_form: f64,
    pub rel_dev: f64,
    /// Quadrature `||Psi_n||^2`.
    pub psi_quadrature: f64,
    /// Closed form with the uncorrected prefactor `cos(pi / cos 2theta)`.
    pub uncorrected_form: f64,
}

pub fn verify_norm_formula(theta: f64, n: usize) -> Result<NormCheck> {
    if n > 40 {
        return Err(PbxError::IndexCap { n, cap: 40 });
    }
    let p = ModelParams::Swanson(SwansonParams::new(theta)?);
    let phi = Wavefunction::new(p, Side::Phi, n)?;
    let psi = Wavefunction::new(p, Side::Psi, n)?;
    let quadrature = quad_inner(&phi, &phi, true)?.re;
    let psi_quadrature = quad_inner(&psi, &psi, true)?.re;
    let c2 = (2.0 * theta).cos();
    let n1 = swanson_normalization(theta, Side::Phi).norm_sqr();
    let leg = legendre(n, 1.0 / c2)?;
    let closed_form = n1 * (PI / c2).sqrt() * leg;
    let uncorrected_form = n1 * (PI / c2).cos() * leg;
    Ok(NormCheck {
        quadrature,
        closed_form,
        rel_dev: (quadrature - closed_form).abs() / closed_form.abs(),
        psi_quadrature,
        uncorrected_form,
    })
}

/// `int H_n(e^{-i theta}x) H_m(e^{-i theta}x) e^{-e^{-2i theta}x^2} dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthogonalityCheck {
    pub lhs: Complex64,
    /// `delta_{nm} sqrt(2^{n+m} pi n! m!)`, without the phase.
    pub uncorrected_rhs: Complex64,
    /// `e^{i theta} delta_{nm} 2^n n! sqrt(pi)`.
    pub corrected_rhs: Complex64,
    /// `|lhs - corrected| / sqrt(2^{n+m} pi n! m!)`.
    pub rel_dev: f64,
}

pub fn verify_biorthogonality_integral(
    n: usize,
    m: usize,
    theta: f64,
) -> Result<BiorthogonalityCheck> {
    if n > 40 || m > 40 {
        return Err(PbxError::IndexCap {
            n: n.max(m),
            cap: 40,
        });
    }
    SwansonParams::new(theta)?;
    let rot = Complex64::from_polar(1.0, -theta);
    let q = rot * rot;
    let lhs = integrate(
        |x| hermite(n, rot * x).unwrap() * hermite(m, rot * x).unwrap() * (-q * x * x).exp(),
        (2.0 * theta).cos(),
    )?;
    let ln_fact = |k: usize| (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
    let scale = (0.5 * ((n + m) as f64 * 2f64.ln() + PI.ln() + ln_fact(n) + ln_fact(m))).exp();
    let (uncorrected_rhs, corrected_rhs) = if n == m {
        (
            Complex64::new(scale, 0.0),
            Complex64::from_polar(scale, theta),
        )
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    Ok(BiorthogonalityCheck {
        lhs,
        uncorrected_rhs,
        corrected_rhs,
        rel_dev: (lhs - corrected_rhs).norm() / scale,
    })
}

/// `max_x |e^{i theta} x phi_0 + e^{-i theta} phi_0'|` over the sample
/// points, with the derivative in closed form.
pub fn vacuum_equation_residual(theta: f64, xs: &[f64]) -> Result<f64> {
    let p = SwansonParams::new(theta)?;
    let vac = Wavefunction::new(ModelParams::Swanson(p), Side::Phi, 0)?;
    let rot = Complex64::from_polar(1.0, theta);
    Ok(xs
        .iter()
        .map(|&x| {
            let f = vac.eval(x);
            let df = -rot * rot * x * f;
            (rot * x * f + rot.conj() * df).norm()
        })
        .fold(0.0, f64::max))
}

/// Overlap of `pi^{-1/4} e^{-(x - sqrt2/beta)^2/2}` with the position
/// representation of a Fock vector.
pub fn eqho_vacuum_overlap(beta: f64, vacuum: &FockVector) -> Result<Complex64> {
    let p = EqhoParams::new(beta)?;
    let gauss = Wavefunction::new(ModelParams::Eqho(p), Side::Phi, 0)?;
    quad_inner(&gauss, &FockPosition::new(vacuum), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eqho_vacuum_closed_form;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn swanson(theta: f64) -> ModelParams {
        ModelParams::Swanson(SwansonParams::new(theta).unwrap())
    }

    fn eqho(beta: f64) -> ModelParams {
        ModelParams::Eqho(EqhoParams::new(beta).unwrap())
    }

    #[test]
    fn wavefunction_point_values() {
        let phi0 = Wavefunction::new(swanson(PI / 6.0), Side::Phi, 0).unwrap();
        assert!((phi0.eval(0.0) - c(0.7511255, 0.0)).norm() < 1e-7);
        let g = Wavefunction::new(eqho(2.0), Side::Phi, 0).unwrap();
        assert!((g.eval(2f64.sqrt() / 2.0).re - PI.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn small_angle_matches_oscillator() {
        for n in 0..=5 {
            let w = Wavefunction::new(swanson(1e-6), Side::Phi, n).unwrap();
            let ho = OscillatorState { n };
            for x in [-2.0, -0.3, 0.0, 0.8, 1.7] {
                assert!((w.eval(x) - ho.eval(x)).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn index_cap() {
        assert!(matches!(
            Wavefunction::new(eqho(2.0), Side::Phi, 61),
            Err(PbxError::IndexCap { .. })
        ));
    }

    #[test]
    fn oscillator_inner_products() {
        let g0 = OscillatorState { n: 0 };
        assert!((quad_inner(&g0, &g0, true).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let g2 = OscillatorState { n: 2 };
        let g3 = OscillatorState { n: 3 };
        assert!(quad_inner(&g2, &g3, true).unwrap().norm() < 1e-12);
    }

    #[test]
    fn oscillator_recurrence_matches_hermite_form() {
        let vals = oscillator_values(12, 0.7);
        for (n, v) in vals.iter().enumerate() {
            assert!((v - OscillatorState { n }.eval(0.7).re).abs() < 1e-14);
        }
    }

    #[test]
    fn swanson_vacuum_pairing_is_one() {
        let p = swanson(PI / 6.0);
        let phi = Wavefunction::new(p, Side::Phi, 0).unwrap();
        let psi = Wavefunction::new(p, Side::Psi, 0).unwrap();
        assert!((quad_inner(&phi, &psi, true).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn swanson_vacuum_constant_closed_form() {
        let theta = PI / 6.0;
        let expected = Complex64::from_polar(1.0 / theta.cos().sqrt(), -theta / 2.0);
        for side in [Side::Phi, Side::Psi] {
            let c0 = swanson_vacuum_constant(theta, side).unwrap();
            assert!((c0 - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn prudnikov_examples() {
        let one = c(1.0, 0.0);
        let r0 = verify_prudnikov(0, one, one, one).unwrap();
        assert!((r0.lhs.re - PI.sqrt() / 2.0).abs() < 1e-12 && r0.rel_dev < 1e-12);
        let r1 = verify_prudnikov(1, one, one, one).unwrap();
        assert!((r1.lhs.re - PI.sqrt()).abs() < 1e-12 && (r1.rhs.re - PI.sqrt()).abs() < 1e-12);
        let theta = PI / 6.0;
        let r2 = verify_prudnikov(
            2,
            c((2.0 * theta).cos(), 0.0),
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
        )
        .unwrap();
        assert!(r2.rel_dev < 1e-9);
        assert!(!r2.branch_warning);
    }

    #[test]
    fn prudnikov_flags_branch_cut() {
        // q = b^2 + c^2 - p = -1 lies on the cut.
        let r = verify_prudnikov(2, c(3.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(r.branch_warning);
    }

    #[test]
    fn norm_formula() {
        let r0 = verify_norm_formula(PI / 6.0, 0).unwrap();
        assert!((r0.quadrature - 2f64.sqrt()).abs() < 1e-10);
        assert!(r0.rel_dev < 1e-8);
        let r2 = verify_norm_formula(PI / 6.0, 2).unwrap();
        assert!((r2.quadrature / r0.quadrature - 5.5).abs() < 1e-8);
        for n in [3, 7] {
            let r = verify_norm_formula(PI / 8.0, n).unwrap();
            assert!((r.quadrature - r.psi_quadrature).abs() <= 1e-9 * r.quadrature);
            assert!((r.uncorrected_form - r.closed_form).abs() > 1e-3);
        }
    }

    #[test]
    fn biorthogonality_integral_examples() {
        let theta = PI / 6.0;
        let r = verify_biorthogonality_integral(0, 0, theta).unwrap();
        assert!((r.lhs - Complex64::from_polar(PI.sqrt(), theta)).norm() < 1e-10);
        let r = verify_biorthogonality_integral(0, 2, PI / 7.0).unwrap();
        assert!(r.lhs.norm() < 1e-10);
        let r = verify_biorthogonality_integral(1, 1, PI / 8.0).unwrap();
        assert!((r.lhs - Complex64::from_polar(2.0 * PI.sqrt(), PI / 8.0)).norm() < 1e-10);
        assert!(r.rel_dev < 1e-9);
    }

    #[test]
    fn vacuum_equation_holds() {
        let xs: Vec<f64> = (0..100).map(|i| -5.0 + 0.1 * i as f64).collect();
        assert!(vacuum_equation_residual(PI / 6.0, &xs).unwrap() < 1e-8);
    }

    #[test]
    fn eqho_gaussian_overlaps_coherent_vector() {
        let v = eqho_vacuum_closed_form(2.0, 128).unwrap();
        let o = eqho_vacuum_overlap(2.0, &v).unwrap();
        assert!((o - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn projection_reproduces_oscillator_state() {
        let coeffs = fock_projection(&OscillatorState { n: 3 }, 8, Exec::default()).unwrap();
        for (k, z) in coeffs.iter().enumerate() {
            let expected = if k == 3 { 1.0 } else { 0.0 };
            assert!((z - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_is_policy_independent() {
        let w = Wavefunction::new(swanson(PI / 8.0), Side::Psi, 4).unwrap();
        let s = fock_projection(&w, 16, Exec::Sequential).unwrap();
        let p = fock_projection(&w, 16, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn closure_wrapper() {
        let f = FnPosition::new(|x: f64| c((-x * x).exp(), 0.0), 2.0);
        let v = quad_inner(&f, &FnPosition::new(|_| c(1.0, 0.0), 0.0), false).unwrap();
        assert!((v.re - PI.sqrt()).abs() < 1e-12);
    }
}
