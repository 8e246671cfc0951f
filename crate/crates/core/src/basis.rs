//! Biorthogonal families built by ladder recursion, from closed-form vacua
//! and through the intertwiner, plus the checks that tie them together.

use num_complex::Complex64;

use crate::error::{PbxError, Result};
use crate::expm::block_condition_estimate;
use crate::models::{ModelBundle, ModelParams};
use crate::operator::{FockVector, LadderCombination, ONE, ZERO};
use crate::position::swanson_vacuum_constant;
use crate::special::odd_even_double_factorial_ratio;

/// Largest admissible `||A z|| / ||z||` for a computed vacuum.
pub const NO_VACUUM_THRESHOLD: f64 = 1e-6;

/// Largest admissible block condition estimate of the intertwiner.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Margin on the creation-power growth bound.
pub const GROWTH_MARGIN: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Ladder,
    ClosedForm,
    Intertwiner,
    /// Plain oscillator basis, used as a control.
    Orthonormal,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Ladder => "ladder",
            Route::ClosedForm => "closed_form",
            Route::Intertwiner => "intertwiner",
            Route::Orthonormal => "orthonormal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Phi,
    Psi,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Phi => "phi",
            Side::Psi => "psi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    vectors: Vec<FockVector>,
    route: Route,
    side: Side,
    model: Option<ModelParams>,
    dim: usize,
}

impl BasisFamily {
    pub fn new(
        vectors: Vec<FockVector>,
        route: Route,
        side: Side,
        model: Option<ModelParams>,
    ) -> Result<Self> {
        let dim = match vectors.first() {
            Some(v) => v.dim(),
            None => return Err(PbxError::FamilyMismatch("empty family".into())),
        };
        for (n, v) in vectors.iter().enumerate() {
            if v.dim() != dim {
                return Err(PbxError::DimensionMismatch {
                    left: dim,
                    right: v.dim(),
                });
            }
            if v.norm() == 0.0 {
                return Err(PbxError::FamilyMismatch(format!("vector {n} is zero")));
            }
            if !v.norm().is_finite() {
                return Err(PbxError::NonFinite {
                    what: "family vector",
                });
            }
        }
        Ok(Self {
            vectors,
            route,
            side,
            model,
            dim,
        })
    }

    /// `e_0, ..., e_{n_max}` with no model attached.
    pub fn orthonormal(dim: usize, n_max: usize, side: Side) -> Result<Self> {
        if n_max >= dim {
            return Err(PbxError::WindowTooLarge {
                window: n_max + 1,
                dim,
            });
        }
        let vectors = (0..=n_max).map(|n| FockVector::basis(dim, n)).collect();
        Self::new(vectors, Route::Orthonormal, side, None)
    }

    pub fn vectors(&self) -> &[FockVector] {
        &self.vectors
    }

    pub fn vector(&self, n: usize) -> &FockVector {
        &self.vectors[n]
    }

    pub fn n_max(&self) -> usize {
        self.vectors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn model(&self) -> Option<ModelParams> {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same model and same number of vectors.
    pub fn compatible_with(&self, other: &Self) -> Result<()> {
        if self.model != other.model {
            return Err(PbxError::FamilyMismatch(
                "families belong to different models".into(),
            ));
        }
        if self.len() != other.len() {
            return Err(PbxError::FamilyMismatch(format!(
                "family sizes differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.dim != other.dim {
            return Err(PbxError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

/// Deviation between two constructions of the same family.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteAgreement {
    pub max_dev: f64,
    pub per_n: Vec<f64>,
    /// `f_0 / g_0` on the dominant entry of `f_0`.
    pub alpha_est: Complex64,
    /// The same ratio for every `n`.
    pub alpha_per_n: Vec<Complex64>,
}

impl RouteAgreement {
    /// Largest relative spread of `|alpha_per_n|` around `|alpha_est|`.
    pub fn alpha_spread(&self) -> f64 {
        let base = self.alpha_est.norm();
        self.alpha_per_n
            .iter()
            .map(|a| (a.norm() - base).abs() / base)
            .fold(0.0, f64::max)
    }
}

fn dominant_ratio(f: &FockVector, g: &FockVector) -> Complex64 {
    let k = f.dominant_index();
    f.get(k) / g.get(k)
}

/// Compares `f` against `g`: `per_n = ||f_n - g_n|| / ||f_n||`.
pub fn route_agreement(f: &BasisFamily, g: &BasisFamily) -> Result<RouteAgreement> {
    f.compatible_with(g)?;
    if f.side != g.side {
        return Err(PbxError::FamilyMismatch(
            "families are on different sides".into(),
        ));
    }
    let per_n: Vec<f64> = f
        .vectors
        .iter()
        .zip(&g.vectors)
        .map(|(x, y)| x.sub(y).norm() / x.norm())
        .collect();
    let alpha_per_n = f
        .vectors
        .iter()
        .zip(&g.vectors)
        .map(|(x, y)| dominant_ratio(x, y))
        .collect();
    Ok(RouteAgreement {
        max_dev: per_n.iter().copied().fold(0.0, f64::max),
        per_n,
        alpha_est: dominant_ratio(&f.vectors[0], &g.vectors[0]),
        alpha_per_n,
    })
}

fn check_n_max(n_max: usize, limit: usize) -> Result<()> {
    if n_max >= limit {
        return Err(PbxError::WindowTooLarge {
            window: n_max + 1,
            dim: limit,
        });
    }
    Ok(())
}

/// Unit vector in the kernel of `form`, phase-fixed.
fn solve_vacuum(form: &LadderCombination, dim: usize) -> Result<FockVector> {
    let z = form.interior_null_vector(dim)?;
    let certificate = form.apply(&z).norm() / z.norm();
    if !(certificate <= NO_VACUUM_THRESHOLD) {
        return Err(PbxError::NoVacuum {
            certificate,
            threshold: NO_VACUUM_THRESHOLD,
        });
    }
    Ok(z.phase_fixed_unit())
}

/// Apply the model's normalization to a unit, phase-fixed vacuum.
fn normalize_vacuum(params: &ModelParams, side: Side, v: FockVector) -> Result<FockVector> {
    match params {
        ModelParams::Eqho(_) => {
            let c0 = v.get(0);
            if c0.norm() == 0.0 {
                return Ok(v);
            }
            Ok(v.scale(c0.conj() / c0.norm()))
        }
        ModelParams::Swanson(p) => {
            let target = swanson_vacuum_constant(p.theta(), side)?;
            let c0 = v.get(0);
            Ok(v.scale(target / c0))
        }
        ModelParams::Generalized(_) => Ok(v),
    }
}

fn raise(form: &LadderCombination, vacuum: FockVector, n_max: usize) -> Vec<FockVector> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(vacuum);
    for n in 0..n_max {
        let next = form
            .apply(&out[n])
            .scale(Complex64::new(1.0 / ((n + 1) as f64).sqrt(), 0.0));
        out.push(next);
    }
    out
}

/// Families from numerically solved vacua, raised with `B` and `A^dagger`.
pub fn ladder_family(m: &ModelBundle, n_max: usize) -> Result<(BasisFamily, BasisFamily)> {
    check_n_max(n_max, m.window().size())?;
    let phi0 = normalize_vacuum(&m.params, Side::Phi, solve_vacuum(&m.ann_form, m.dim)?)?;
    let psi0 = normalize_vacuum(
        &m.params,
        Side::Psi,
        solve_vacuum(&m.cre_form.adjoint(), m.dim)?,
    )?;
    families_from_vacua(m, phi0, psi0, n_max, Route::Ladder)
}

fn families_from_vacua(
    m: &ModelBundle,
    phi0: FockVector,
    psi0: FockVector,
    n_max: usize,
    route: Route,
) -> Result<(BasisFamily, BasisFamily)> {
    let phis = raise(&m.cre_form, phi0, n_max);
    let psis = raise(&m.ann_form.adjoint(), psi0, n_max);
    Ok((
        BasisFamily::new(phis, route, Side::Phi, Some(m.params))?,
        BasisFamily::new(psis, route, Side::Psi, Some(m.params))?,
    ))
}

/// `e^{-1/(2 beta^2)} beta^{-k} / sqrt(k!)` for `k < dim`.
pub fn eqho_vacuum_closed_form(beta: f64, dim: usize) -> Result<FockVector> {
    coherent_vector(1.0 / beta, beta, dim)
}

/// Coherent state with real parameter `z`, `beta` only for validation.
fn coherent_vector(z: f64, beta: f64, dim: usize) -> Result<FockVector> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(PbxError::Parameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let mut coeffs = Vec::with_capacity(dim);
    let mut c = (-0.5 * z * z).exp();
    for k in 0..dim {
        if k > 0 {
            c *= z / (k as f64).sqrt();
        }
        coeffs.push(Complex64::new(c, 0.0));
    }
    Ok(FockVector::from_coeffs(coeffs))
}

/// Even-index series `c_{2n} = (-+ i tan theta)^n sqrt((2n-1)!!/(2n)!!) c_0`,
/// with `c_0` from projecting the position-space vacuum.
pub fn swanson_vacuum_closed_form(theta: f64, dim: usize, side: Side) -> Result<FockVector> {
    let c0 = swanson_vacuum_constant(theta, side)?;
    let t = theta.tan();
    let step = match side {
        Side::Phi => Complex64::new(0.0, -t),
        Side::Psi => Complex64::new(0.0, t),
    };
    let mut coeffs = vec![ZERO; dim];
    let mut power = ONE;
    for n in 0..dim.div_ceil(2) {
        if n > 0 {
            power *= step;
        }
        coeffs[2 * n] = power * odd_even_double_factorial_ratio(n).sqrt() * c0;
    }
    Ok(FockVector::from_coeffs(coeffs))
}

/// Families raised from the closed-form vacua.
pub fn closed_form_family(m: &ModelBundle, n_max: usize) -> Result<(BasisFamily, BasisFamily)> {
    check_n_max(n_max, m.window().size())?;
    let (phi0, psi0) = match m.params {
        ModelParams::Eqho(p) => (
            eqho_vacuum_closed_form(p.beta(), m.dim)?,
            coherent_vector(-1.0 / p.beta(), p.beta(), m.dim)?,
        ),
        ModelParams::Swanson(p) => (
            swanson_vacuum_closed_form(p.theta(), m.dim, Side::Phi)?,
            swanson_vacuum_closed_form(p.theta(), m.dim, Side::Psi)?,
        ),
        ModelParams::Generalized(_) => {
            return Err(PbxError::UnsupportedRegime(
                "no closed-form vacuum for the generalized pair".into(),
            ))
        }
    };
    families_from_vacua(m, phi0, psi0, n_max, Route::ClosedForm)
}

/// `<Psi_0, phi_0>`.
pub fn pairing(phis: &BasisFamily, psis: &BasisFamily) -> Complex64 {
    psis.vectors[0].inner(&phis.vectors[0])
}

/// `phi_n = kappa W e_n`, `Psi_n = kappa' (W^{-1})^dagger e_n`, compared
/// against the ladder route. `kappa` is the ratio of the ladder vacuum to
/// `W e_0`; `kappa'` keeps the ladder pairing.
pub fn intertwiner_family(
    m: &ModelBundle,
    n_max: usize,
) -> Result<(BasisFamily, BasisFamily, RouteAgreement)> {
    check_n_max(n_max, m.window().halved().size())?;
    let estimate = block_condition_estimate(&m.w, &m.w_inv, n_max + 1)?;
    if !(estimate <= CONDITION_LIMIT) {
        return Err(PbxError::IllConditioned { estimate });
    }
    let (lad_phi, lad_psi) = ladder_family(m, n_max)?;
    let w0 = m.w.column(0);
    let kappa = dominant_ratio(lad_phi.vector(0), &w0);
    let pair = pairing(&lad_phi, &lad_psi);
    let kappa_psi = (pair / kappa).conj();
    let w_inv_adj = m.w_inv.adjoint();
    let phis: Vec<FockVector> = (0..=n_max).map(|n| m.w.column(n).scale(kappa)).collect();
    let psis: Vec<FockVector> = (0..=n_max)
        .map(|n| w_inv_adj.column(n).scale(kappa_psi))
        .collect();
    let phis = BasisFamily::new(phis, Route::Intertwiner, Side::Phi, Some(m.params))?;
    let psis = BasisFamily::new(psis, Route::Intertwiner, Side::Psi, Some(m.params))?;

    let unscaled_phi: Vec<FockVector> = (0..=n_max).map(|n| m.w.column(n)).collect();
    let unscaled = BasisFamily::new(unscaled_phi, Route::Intertwiner, Side::Phi, Some(m.params))?;
    let mut agreement = route_agreement(&lad_phi, &unscaled)?;
    let phi_dev = route_agreement(&lad_phi, &phis)?;
    let psi_dev = route_agreement(&lad_psi, &psis)?;
    agreement.per_n = phi_dev
        .per_n
        .iter()
        .zip(&psi_dev.per_n)
        .map(|(a, b)| a.max(*b))
        .collect();
    agreement.max_dev = agreement.per_n.iter().copied().fold(0.0, f64::max);
    Ok((phis, psis, agreement))
}

fn check_family_model(m: &ModelBundle, f: &BasisFamily) -> Result<()> {
    if f.model != Some(m.params) || f.dim != m.dim {
        return Err(PbxError::FamilyMismatch(
            "family does not belong to this model".into(),
        ));
    }
    Ok(())
}

/// `||(N phi_n - n phi_n)|_w|| / ||phi_n||` and the same for `N^dagger` on
/// the psi side.
pub fn eigen_residuals(
    m: &ModelBundle,
    phis: &BasisFamily,
    psis: &BasisFamily,
    w: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_family_model(m, phis)?;
    check_family_model(m, psis)?;
    let ann_adj = m.ann_form.adjoint();
    let cre_adj = m.cre_form.adjoint();
    let residual = |v: &FockVector, image: FockVector, n: usize| {
        let mut r = image;
        r.add_scaled(Complex64::new(-(n as f64), 0.0), v);
        r.window_norm(w) / v.norm()
    };
    let phi = phis
        .vectors
        .iter()
        .enumerate()
        .map(|(n, v)| residual(v, m.cre_form.apply(&m.ann_form.apply(v)), n))
        .collect();
    let psi = psis
        .vectors
        .iter()
        .enumerate()
        .map(|(n, v)| residual(v, ann_adj.apply(&cre_adj.apply(v)), n))
        .collect();
    Ok((phi, psi))
}

/// `||(A phi_n - sqrt(n) phi_{n-1})|_w|| / ||phi_n||` and
/// `||(B^dagger Psi_n - sqrt(n) Psi_{n-1})|_w|| / ||Psi_n||` for `n >= 1`.
pub fn down_ladder_residuals(
    m: &ModelBundle,
    phis: &BasisFamily,
    psis: &BasisFamily,
    w: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_family_model(m, phis)?;
    check_family_model(m, psis)?;
    let lower = |form: &LadderCombination, f: &BasisFamily| -> Vec<f64> {
        (1..f.len())
            .map(|n| {
                let mut r = form.apply(&f.vectors[n]);
                r.add_scaled(Complex64::new(-(n as f64).sqrt(), 0.0), &f.vectors[n - 1]);
                r.window_norm(w) / f.vectors[n].norm()
            })
            .collect()
    };
    Ok((lower(&m.ann_form, phis), lower(&m.cre_form.adjoint(), psis)))
}

/// `||B^k phi_0||` for `k = 0..=k_max`.
pub fn creation_growth(m: &ModelBundle, phi0: &FockVector, k_max: usize) -> Vec<f64> {
    let mut v = phi0.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(v.norm());
    for _ in 0..k_max {
        v = m.cre_form.apply(&v);
        out.push(v.norm());
    }
    out
}

/// `k! e^{2/beta}`.
pub fn eqho_growth_bound(beta: f64, k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    fact * (2.0 / beta).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        build_eqho, build_generalized, build_swanson, EqhoParams, GeneralizedParams, SwansonParams,
    };
    use std::f64::consts::PI;

    const EXP_TOL: f64 = 1e-15;

    fn eqho(beta: f64, dim: usize) -> ModelBundle {
        build_eqho(EqhoParams::new(beta).unwrap(), dim, EXP_TOL).unwrap()
    }

    fn swanson(theta: f64, dim: usize) -> ModelBundle {
        build_swanson(SwansonParams::new(theta).unwrap(), dim, EXP_TOL).unwrap()
    }

    #[test]
    fn eqho_closed_form_vacuum_values() {
        let v = eqho_vacuum_closed_form(2.0, 128).unwrap();
        assert!((v.get(0).re - (-0.125f64).exp()).abs() < 1e-15);
        assert!((v.get(0).re - 0.8824969).abs() < 1e-7);
        assert!((v.get(2).re - (-0.125f64).exp() * 0.25 / 2f64.sqrt()).abs() < 1e-15);
        assert!((v.get(2).re - 0.1560049).abs() < 1e-7);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eqho_ladder_vacuum_matches_coherent_state() {
        let m = eqho(2.0, 128);
        let (phis, _) = ladder_family(&m, 4).unwrap();
        let oracle = eqho_vacuum_closed_form(2.0, 128).unwrap();
        assert!(phis.vector(0).sub(&oracle).norm() < 1e-14);
        assert!(m.ann_form.apply(phis.vector(0)).window_norm(64) < 1e-8);
    }

    #[test]
    fn eqho_ladder_matches_closed_form_route() {
        let m = eqho(2.0, 128);
        let (lp, ls) = ladder_family(&m, 10).unwrap();
        let (cp, cs) = closed_form_family(&m, 10).unwrap();
        assert!(route_agreement(&lp, &cp).unwrap().max_dev < 1e-8);
        assert!(route_agreement(&ls, &cs).unwrap().max_dev < 1e-8);
    }

    #[test]
    fn eqho_intertwiner_constant() {
        let m = eqho(2.0, 128);
        let (_, _, agreement) = intertwiner_family(&m, 12).unwrap();
        assert!((agreement.alpha_est.re - (-0.25f64).exp()).abs() < 1e-6);
        assert!(agreement.alpha_est.im.abs() < 1e-12);
        assert!(agreement.max_dev < 1e-6);
    }

    #[test]
    fn swanson_vacuum_series_ratios() {
        let theta = PI / 6.0;
        let phi = swanson_vacuum_closed_form(theta, 64, Side::Phi).unwrap();
        let r2 = phi.get(2) / phi.get(0);
        assert!(r2.re.abs() < 1e-15 && (r2.im + 1.0 / 6f64.sqrt()).abs() < 1e-12);
        let r4 = phi.get(4) / phi.get(0);
        assert!((r4.re + (3f64 / 8.0).sqrt() / 3.0).abs() < 1e-12 && r4.im.abs() < 1e-15);
        assert!(phi.coeffs().iter().skip(1).step_by(2).all(|z| *z == ZERO));
    }

    #[test]
    fn swanson_ladder_psi_vacuum() {
        let theta = PI / 6.0;
        let m = swanson(theta, 128);
        let (phis, psis) = ladder_family(&m, 4).unwrap();
        let psi0 = psis.vector(0);
        for k in (1..128).step_by(2) {
            assert!(psi0.get(k).norm() < 1e-12);
        }
        let r = psi0.get(2) / psi0.get(0);
        assert!(r.re.abs() < 1e-12 && (r.im - theta.tan() / 2f64.sqrt()).abs() < 1e-12);
        let oracle = swanson_vacuum_closed_form(theta, 128, Side::Psi).unwrap();
        assert!(psi0.sub(&oracle).norm() < 1e-12);
        assert!(m.ann_form.apply(phis.vector(0)).window_norm(64) < 1e-8);
        // unit pairing under the chosen normalization
        assert!((pairing(&phis, &psis) - ONE).norm() < 1e-10);
    }

    #[test]
    fn swanson_intertwiner_constant_is_constant() {
        let m = swanson(PI / 6.0, 128);
        let (_, _, agreement) = intertwiner_family(&m, 12).unwrap();
        assert!(agreement.alpha_spread() < 1e-6);
    }

    #[test]
    fn route_agreement_examples() {
        let m = eqho(2.0, 64);
        let (phis, _) = ladder_family(&m, 5).unwrap();
        let same = route_agreement(&phis, &phis).unwrap();
        assert_eq!(same.max_dev, 0.0);
        let mut vectors = phis.vectors().to_vec();
        vectors[3] = vectors[3].scale(Complex64::new(1.0 + 1e-6, 0.0));
        let bumped = BasisFamily::new(vectors, Route::Ladder, Side::Phi, phis.model()).unwrap();
        let dev = route_agreement(&phis, &bumped).unwrap();
        assert!((dev.max_dev - 1e-6).abs() < 1e-12);
        assert_eq!(dev.per_n.iter().copied().fold(0.0, f64::max), dev.max_dev);
    }

    #[test]
    fn route_agreement_rejects_mismatch() {
        let m = eqho(2.0, 64);
        let (phis, psis) = ladder_family(&m, 5).unwrap();
        assert!(route_agreement(&phis, &psis).is_err());
        let (short, _) = ladder_family(&m, 4).unwrap();
        assert!(route_agreement(&phis, &short).is_err());
        let other = eqho(3.0, 64);
        let (foreign, _) = ladder_family(&other, 5).unwrap();
        assert!(route_agreement(&phis, &foreign).is_err());
    }

    #[test]
    fn eigen_and_down_ladder_relations() {
        for m in [eqho(2.0, 128), swanson(PI / 8.0, 128)] {
            let (phis, psis) = ladder_family(&m, 16).unwrap();
            let (e_phi, e_psi) = eigen_residuals(&m, &phis, &psis, 64).unwrap();
            assert!(e_phi.iter().chain(&e_psi).all(|r| *r < 1e-8));
            let (d_phi, d_psi) = down_ladder_residuals(&m, &phis, &psis, 64).unwrap();
            assert!(d_phi.iter().chain(&d_psi).all(|r| *r < 1e-8));
        }
    }

    #[test]
    fn eqho_growth_respects_bound() {
        let m = eqho(2.0, 256);
        let (phis, _) = ladder_family(&m, 0).unwrap();
        let growth = creation_growth(&m, phis.vector(0), 12);
        for (k, g) in growth.iter().enumerate() {
            assert!(*g <= eqho_growth_bound(2.0, k) * GROWTH_MARGIN, "k={k}");
        }
    }

    #[test]
    fn generalized_family_is_biorthogonal() {
        let m =
            build_generalized(GeneralizedParams::new(0.1, 0.15).unwrap(), 128, EXP_TOL).unwrap();
        let (phis, psis) = ladder_family(&m, 8).unwrap();
        let p = pairing(&phis, &psis);
        for n in 0..=8 {
            for k in 0..=8 {
                let g = psis.vector(n).inner(phis.vector(k));
                let expected = if n == k { p } else { ZERO };
                assert!((g - expected).norm() < 1e-10, "({n},{k})");
            }
        }
        assert!(closed_form_family(&m, 8).is_err());
    }

    #[test]
    fn missing_vacuum_is_reported() {
        // |2 beta_g tan(s) / s| > 1: the vacuum series diverges.
        let m =
            build_generalized(GeneralizedParams::new(0.05, 1.2).unwrap(), 128, EXP_TOL).unwrap();
        assert!(matches!(
            ladder_family(&m, 4),
            Err(PbxError::NoVacuum { .. })
        ));
    }

    #[test]
    fn n_max_window_guard() {
        let m = eqho(2.0, 32);
        assert!(ladder_family(&m, 16).is_err());
        assert!(intertwiner_family(&m, 8).is_err());
    }

    #[test]
    fn orthonormal_control() {
        let f = BasisFamily::orthonormal(16, 5, Side::Phi).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(f.route(), Route::Orthonormal);
        assert!(BasisFamily::orthonormal(4, 4, Side::Phi).is_err());
        assert!(
            BasisFamily::new(vec![FockVector::zeros(3)], Route::Ladder, Side::Phi, None).is_err()
        );
    }
}
