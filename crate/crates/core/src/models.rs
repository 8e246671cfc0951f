//! Builders for the extended oscillator, the Swanson model and the
//! generalized two-parameter pair.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{PbxError, Result};
use crate::expm::op_exp;
use crate::operator::{
    make_ladder_pair, LadderCombination, TruncatedOperator, TrustWindow, I, ONE, ZERO,
};

/// Smallest truncation accepted by the builders.
pub const MIN_MODEL_DIM: usize = 8;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqhoParams {
    beta: f64,
}

impl EqhoParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(PbxError::Parameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(2 + beta^2) / (2 beta^2)`.
    pub fn gamma(&self) -> f64 {
        (2.0 + self.beta * self.beta) / (2.0 * self.beta * self.beta)
    }

    /// `beta (k + gamma)`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.beta * (k as f64 + self.gamma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwansonParams {
    theta: f64,
}

impl SwansonParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() >= FRAC_PI_4 {
            return Err(PbxError::Parameter(format!(
                "theta must lie in (-pi/4, pi/4), got {theta}"
            )));
        }
        if theta == 0.0 {
            return Err(PbxError::Parameter(
                "theta = 0 reduces the model to the ordinary oscillator".into(),
            ));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `1 / cos(2 theta)`.
    pub fn omega(&self) -> f64 {
        1.0 / (2.0 * self.theta).cos()
    }

    /// The same model at `-theta`, whose Hamiltonian is the adjoint.
    pub fn mirrored(&self) -> Self {
        Self { theta: -self.theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedParams {
    alpha: f64,
    beta_g: f64,
}

impl GeneralizedParams {
    pub fn new(alpha: f64, beta_g: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta_g.is_finite()) {
            return Err(PbxError::Parameter(
                "alpha and beta_g must be finite".into(),
            ));
        }
        let product = alpha * beta_g;
        if product <= 0.0 {
            return Err(PbxError::UnsupportedRegime(format!(
                "alpha * beta_g = {product} is not positive"
            )));
        }
        let s = (4.0 * product).sqrt();
        if s >= FRAC_PI_2 {
            return Err(PbxError::UnsupportedRegime(format!(
                "sqrt(4 alpha beta_g) = {s} is not below pi/2"
            )));
        }
        Ok(Self { alpha, beta_g })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta_g(&self) -> f64 {
        self.beta_g
    }

    /// `sqrt(4 alpha beta_g)`.
    pub fn s(&self) -> f64 {
        (4.0 * self.alpha * self.beta_g).sqrt()
    }

    /// `(cos s, -(2 beta_g / s) sin s)`: coefficients of `a` and `a^dagger` in A.
    /// For positive parameters the second entry is `-sqrt(beta_g/alpha) sin s`.
    pub fn annihilator_coefficients(&self) -> (f64, f64) {
        let s = self.s();
        (s.cos(), -(2.0 * self.beta_g / s) * s.sin())
    }

    /// `(cos s, (2 alpha / s) sin s)`: coefficients of `a^dagger` and `a` in B.
    pub fn creator_coefficients(&self) -> (f64, f64) {
        let s = self.s();
        (s.cos(), (2.0 * self.alpha / s) * s.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Eqho,
    Swanson,
    Generalized,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Eqho => "eqho",
            ModelKind::Swanson => "swanson",
            ModelKind::Generalized => "generalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Eqho(EqhoParams),
    Swanson(SwansonParams),
    Generalized(GeneralizedParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Eqho(_) => ModelKind::Eqho,
            ModelParams::Swanson(_) => ModelKind::Swanson,
            ModelParams::Generalized(_) => ModelKind::Generalized,
        }
    }

    /// `(name, value)` pairs for reporting.
    pub fn named_values(&self) -> Vec<(&'static str, f64)> {
        match self {
            ModelParams::Eqho(p) => vec![("beta", p.beta)],
            ModelParams::Swanson(p) => vec![("theta", p.theta)],
            ModelParams::Generalized(p) => vec![("alpha", p.alpha), ("beta_g", p.beta_g)],
        }
    }
}

/// A model's operators on `D` levels.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub params: ModelParams,
    pub dim: usize,
    pub a: TruncatedOperator,
    pub adag: TruncatedOperator,
    /// Pseudo-bosonic annihilator `A`.
    pub ann: TruncatedOperator,
    /// Pseudo-bosonic creator `B`.
    pub cre: TruncatedOperator,
    pub ann_form: LadderCombination,
    pub cre_form: LadderCombination,
    pub h: TruncatedOperator,
    pub h_ref: TruncatedOperator,
    /// Intertwiner with `W a W^{-1} = A`.
    pub w: TruncatedOperator,
    pub w_inv: TruncatedOperator,
    pub scale: f64,
    pub shift: f64,
}

impl ModelBundle {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn window(&self) -> TrustWindow {
        TrustWindow::default_for(self.dim)
    }

    /// `N = B A`.
    pub fn number_operator(&self) -> TruncatedOperator {
        &self.cre * &self.ann
    }

    /// `x = (a + a^dagger)/sqrt 2`.
    pub fn position(&self) -> TruncatedOperator {
        (&self.a + &self.adag).scale(real(std::f64::consts::FRAC_1_SQRT_2))
    }

    /// `p = (a - a^dagger)/(i sqrt 2)`.
    pub fn momentum(&self) -> TruncatedOperator {
        (&self.a - &self.adag).scale(-I * std::f64::consts::FRAC_1_SQRT_2)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < MIN_MODEL_DIM {
        return Err(PbxError::InvalidDimension {
            dim,
            min: MIN_MODEL_DIM,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    params: ModelParams,
    dim: usize,
    ann_form: LadderCombination,
    cre_form: LadderCombination,
    generator: TruncatedOperator,
    scale: f64,
    shift: f64,
    tol: f64,
) -> Result<ModelBundle> {
    let (a, adag) = make_ladder_pair(dim)?;
    let ann = ann_form.to_operator(&a, &adag);
    let cre = cre_form.to_operator(&a, &adag);
    let h = (&cre * &ann).shift(real(shift)).scale(real(scale));
    let h_ref = (&adag * &a).shift(real(shift)).scale(real(scale));
    let w = op_exp(&generator, tol)?;
    let w_inv = op_exp(&generator.scale(real(-1.0)), tol)?;
    Ok(ModelBundle {
        params,
        dim,
        a,
        adag,
        ann,
        cre,
        ann_form,
        cre_form,
        h,
        h_ref,
        w,
        w_inv,
        scale,
        shift,
    })
}

/// `A = a - 1/beta`, `B = a^dagger + 1/beta`, `W = exp((a + a^dagger)/beta)`.
pub fn build_eqho(p: EqhoParams, dim: usize, tol: f64) -> Result<ModelBundle> {
    check_dim(dim)?;
    let inv = 1.0 / p.beta;
    let ann_form = LadderCombination::new(ONE, ZERO, real(-inv));
    let cre_form = LadderCombination::new(ZERO, ONE, real(inv));
    let (a, adag) = make_ladder_pair(dim)?;
    let generator = (&a + &adag).scale(real(inv));
    assemble(
        ModelParams::Eqho(p),
        dim,
        ann_form,
        cre_form,
        generator,
        p.beta,
        p.gamma(),
        tol,
    )
}

/// `A = cos(t) a + i sin(t) a^dagger`, `B = cos(t) a^dagger + i sin(t) a`,
/// `W = exp(i (t/2) (a^2 - a^dagger^2))`.
pub fn build_swanson(p: SwansonParams, dim: usize, tol: f64) -> Result<ModelBundle> {
    check_dim(dim)?;
    let (c, s) = (p.theta.cos(), p.theta.sin());
    let ann_form = LadderCombination::new(real(c), I * s, ZERO);
    let cre_form = LadderCombination::new(I * s, real(c), ZERO);
    let (a, adag) = make_ladder_pair(dim)?;
    let generator = (&(&a * &a) - &(&adag * &adag)).scale(I * (p.theta / 2.0));
    assemble(
        ModelParams::Swanson(p),
        dim,
        ann_form,
        cre_form,
        generator,
        p.omega(),
        0.5,
        tol,
    )
}

/// Pair generated by `W = exp(alpha a^2 + beta_g a^dagger^2)`. No Hamiltonian
/// is attached: `H = B A` and `h_ref = a^dagger a`.
pub fn build_generalized(p: GeneralizedParams, dim: usize, tol: f64) -> Result<ModelBundle> {
    check_dim(dim)?;
    let (ca, cad) = p.annihilator_coefficients();
    let (cb, cba) = p.creator_coefficients();
    let ann_form = LadderCombination::new(real(ca), real(cad), ZERO);
    let cre_form = LadderCombination::new(real(cba), real(cb), ZERO);
    let (a, adag) = make_ladder_pair(dim)?;
    let generator = (&a * &a)
        .scale(real(p.alpha))
        .add_scaled(real(p.beta_g), &(&adag * &adag));
    assemble(
        ModelParams::Generalized(p),
        dim,
        ann_form,
        cre_form,
        generator,
        1.0,
        0.0,
        tol,
    )
}

pub fn build(params: ModelParams, dim: usize, tol: f64) -> Result<ModelBundle> {
    match params {
        ModelParams::Eqho(p) => build_eqho(p, dim, tol),
        ModelParams::Swanson(p) => build_swanson(p, dim, tol),
        ModelParams::Generalized(p) => build_generalized(p, dim, tol),
    }
}

/// `[scale (k + shift)]` for `k = 0..=n_max`.
pub fn reference_spectrum(m: &ModelBundle, n_max: usize) -> Result<Vec<f64>> {
    let w = m.window().size();
    if n_max >= w {
        return Err(PbxError::WindowTooLarge {
            window: n_max + 1,
            dim: w,
        });
    }
    Ok((0..=n_max)
        .map(|k| m.scale * (k as f64 + m.shift))
        .collect())
}

/// The Hamiltonian rebuilt from `x` and `p` in its textbook form, for
/// cross-checking `H`. `None` for the generalized pair.
pub fn h_direct(m: &ModelBundle) -> Option<TruncatedOperator> {
    let x = m.position();
    let p = m.momentum();
    let x2 = &x * &x;
    let p2 = &p * &p;
    match m.params {
        ModelParams::Eqho(q) => {
            // (beta/2)(p^2 + x^2) + i sqrt(2) p
            let kinetic = (&p2 + &x2).scale(real(q.beta / 2.0));
            Some(kinetic.add_scaled(I * 2f64.sqrt(), &p))
        }
        ModelParams::Swanson(q) => {
            // (p^2 + x^2)/2 - (i/2) tan(2 theta) (p^2 - x^2)
            let base = (&p2 + &x2).scale(real(0.5));
            let t = (2.0 * q.theta).tan();
            Some(base.add_scaled(-I * (t / 2.0), &(&p2 - &x2)))
        }
        ModelParams::Generalized(_) => None,
    }
}
