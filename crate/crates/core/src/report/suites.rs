use std::sync::OnceLock;

use num_complex::Complex64;

use super::{Cell, Check, ErrorBlock, RunConfig, Suite, SuiteResult, Table};
use crate::basis::{
    closed_form_family, creation_growth, down_ladder_residuals, eigen_residuals, eqho_growth_bound,
    intertwiner_family, ladder_family, pairing, route_agreement, BasisFamily, Side, GROWTH_MARGIN,
};
use crate::diagnostics::{
    build_s_operators_with, gram_biorthogonality, intertwining_check, legendre_ratio_deviation,
    model_intertwining, resolution_of_identity, riesz_growth, s_phi_against_intertwiner,
    stable_prefix, Verdict,
};
use crate::error::{PbxError, Result};
use crate::exec::Exec;
use crate::models::{build_swanson, h_direct, reference_spectrum, ModelBundle, ModelParams};
use crate::operator::{commutator, window_residual, FockVector, TruncatedOperator, ONE};
use crate::position::{
    eqho_vacuum_overlap, fock_projection, quad_inner, vacuum_equation_residual,
    verify_biorthogonality_integral, verify_norm_formula, verify_prudnikov, Wavefunction,
};

pub const COMMUTATOR_TOL: f64 = 1e-12;
pub const H_DIRECT_TOL: f64 = 1e-10;
pub const ROUTE_TOL: f64 = 1e-6;
pub const MODEL_INTERTWINING_TOL: f64 = 1e-7;
pub const S_PRODUCT_TOL: f64 = 1e-4;
pub const S_INTERTWINING_TOL: f64 = 1e-3;
pub const LEGENDRE_TOL: f64 = 1e-6;
pub const FOCK_POSITION_TOL: f64 = 1e-7;
pub const PRUDNIKOV_TOL: f64 = 1e-9;
pub const NORM_SYMMETRY_TOL: f64 = 1e-9;
pub const RESOLUTION_TOL: f64 = 1e-6;

/// Indices compared across routes and against closed forms.
const ROUTE_N: usize = 12;
const POSITION_N: usize = 10;
const GROWTH_K: usize = 12;

pub(super) struct Context<'a> {
    cfg: &'a RunConfig,
    m: &'a ModelBundle,
    exec: Exec,
    ladder: OnceLock<std::result::Result<(BasisFamily, BasisFamily), PbxError>>,
}

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl<'a> Context<'a> {
    pub(super) fn new(cfg: &'a RunConfig, m: &'a ModelBundle, exec: Exec) -> Self {
        Self {
            cfg,
            m,
            exec,
            ladder: OnceLock::new(),
        }
    }

    fn families(&self) -> Result<&(BasisFamily, BasisFamily)> {
        self.ladder
            .get_or_init(|| ladder_family(self.m, self.cfg.n_max))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn w(&self) -> usize {
        self.cfg.window
    }

    /// Pairing `<Psi_n, phi_n>` fixed by each model's normalization.
    fn expected_pairing(&self) -> Result<Complex64> {
        Ok(match self.m.params {
            ModelParams::Eqho(p) => r((-2.0 / (p.beta() * p.beta())).exp()),
            ModelParams::Swanson(_) => ONE,
            ModelParams::Generalized(_) => {
                let (phis, psis) = self.families()?;
                pairing(phis, psis)
            }
        })
    }

    pub(super) fn run(&self, suite: Suite) -> SuiteResult {
        let mut out = SuiteResult::new(suite);
        let res = match suite {
            Suite::Commutators => self.commutators(&mut out),
            Suite::Basis => self.basis(&mut out),
            Suite::Gram => self.gram(&mut out),
            Suite::Riesz => self.riesz(&mut out),
            Suite::Intertwining => self.intertwining(&mut out),
            Suite::Position => self.position(&mut out),
            Suite::Identities => self.identities(&mut out),
        };
        if let Err(e) = res {
            out.error = Some(ErrorBlock::from(&e));
        }
        out
    }

    fn commutators(&self, out: &mut SuiteResult) -> Result<()> {
        let m = self.m;
        let w = self.w();
        let id = TruncatedOperator::identity(m.dim);
        let c = commutator(&m.ann, &m.cre)?;
        out.checks.push(Check::below(
            "commutator_window",
            window_residual(&c, &id, w)?,
            COMMUTATOR_TOL,
        ));
        let a_c = commutator(&m.a, &m.adag)?;
        out.checks.push(Check::below(
            "ladder_interior",
            window_residual(&a_c, &id, w)?,
            COMMUTATOR_TOL,
        ));
        let rebuilt = (&m.cre * &m.ann).shift(r(m.shift)).scale(r(m.scale));
        out.checks.push(Check::below(
            "hamiltonian_structure",
            window_residual(&m.h, &rebuilt, w)?,
            COMMUTATOR_TOL,
        ));
        if let Some(direct) = h_direct(m) {
            out.checks.push(Check::below(
                "hamiltonian_direct",
                window_residual(&m.h, &direct, w)?,
                H_DIRECT_TOL,
            ));
        }
        if let ModelParams::Swanson(p) = m.params {
            let mirror = build_swanson(p.mirrored(), m.dim, super::EXPM_TOL)?;
            out.checks.push(Check::below(
                "adjoint_is_mirrored",
                window_residual(&m.h.adjoint(), &mirror.h, w)?,
                H_DIRECT_TOL,
            ));
        }
        let mut table = Table::new(&["k", "eigenvalue"]);
        for (k, e) in reference_spectrum(m, self.cfg.n_max)?
            .into_iter()
            .enumerate()
        {
            table.push(vec![k.into(), e.into()]);
        }
        out.labels.push(("scale".into(), m.scale.into()));
        out.labels.push(("shift".into(), m.shift.into()));
        out.table = Some(table);
        Ok(())
    }

    fn basis(&self, out: &mut SuiteResult) -> Result<()> {
        let m = self.m;
        let tol = self.cfg.tol;
        let (phis, psis) = self.families()?;
        let (e_phi, e_psi) = eigen_residuals(m, phis, psis, self.w())?;
        let (d_phi, d_psi) = down_ladder_residuals(m, phis, psis, self.w())?;
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        out.checks.push(Check::below("eigen_phi", max(&e_phi), tol));
        out.checks.push(Check::below("eigen_psi", max(&e_psi), tol));
        out.checks
            .push(Check::below("down_ladder_phi", max(&d_phi), tol));
        out.checks
            .push(Check::below("down_ladder_psi", max(&d_psi), tol));
        out.checks.push(Check::below(
            "vacuum_annihilated",
            m.ann_form.apply(phis.vector(0)).window_norm(self.w()) / phis.vector(0).norm(),
            tol,
        ));

        let n_route = ROUTE_N.min(self.cfg.n_max).min(self.w() / 2 - 1);
        let (lp, ls) = (truncate(phis, n_route)?, truncate(psis, n_route)?);
        let mut closed_dev = vec![f64::NAN; n_route + 1];
        if !matches!(m.params, ModelParams::Generalized(_)) {
            let (cp, cs) = closed_form_family(m, n_route)?;
            let a = route_agreement(&lp, &cp)?;
            let b = route_agreement(&ls, &cs)?;
            for (n, d) in closed_dev.iter_mut().enumerate() {
                *d = a.per_n[n].max(b.per_n[n]);
            }
            out.checks.push(Check::below(
                "route_closed_form",
                max(&closed_dev),
                ROUTE_TOL,
            ));
        }
        let (_, _, agreement) = intertwiner_family(m, n_route)?;
        out.checks.push(Check::below(
            "route_intertwiner",
            agreement.max_dev,
            ROUTE_TOL,
        ));
        out.labels
            .push(("alpha_est".into(), agreement.alpha_est.into()));
        match m.params {
            ModelParams::Eqho(p) => {
                let target = (-1.0 / (p.beta() * p.beta())).exp();
                out.checks.push(Check::below(
                    "alpha_matches_constant",
                    (agreement.alpha_est - r(target)).norm(),
                    ROUTE_TOL,
                ));
                let growth = creation_growth(m, phis.vector(0), GROWTH_K);
                let ok = growth
                    .iter()
                    .enumerate()
                    .all(|(k, g)| *g <= eqho_growth_bound(p.beta(), k) * GROWTH_MARGIN);
                out.checks.push(Check::holds("creation_growth_bound", ok));
            }
            ModelParams::Swanson(p) => {
                out.checks.push(Check::below(
                    "alpha_constant",
                    agreement.alpha_spread(),
                    ROUTE_TOL,
                ));
                let fock = phis.vector(0).norm().powi(2);
                let wf = Wavefunction::new(m.params, Side::Phi, 0)?;
                let quad = quad_inner(&wf, &wf, true)?.re;
                out.checks.push(Check::below(
                    "vacuum_series_norm",
                    (fock - quad).abs() / quad,
                    tol,
                ));
                out.labels.push(("theta".into(), p.theta().into()));
            }
            ModelParams::Generalized(_) => {}
        }

        let mut table = Table::new(&[
            "n",
            "eigen_phi",
            "eigen_psi",
            "route_closed_form",
            "route_intertwiner",
            "alpha",
        ]);
        for n in 0..=self.cfg.n_max {
            let (c, i, a) = if n <= n_route {
                (
                    closed_dev[n],
                    agreement.per_n[n],
                    Cell::Complex(agreement.alpha_per_n[n]),
                )
            } else {
                (f64::NAN, f64::NAN, Cell::Text(String::new()))
            };
            table.push(vec![
                n.into(),
                e_phi[n].into(),
                e_psi[n].into(),
                finite_or_blank(c),
                finite_or_blank(i),
                a,
            ]);
        }
        out.table = Some(table);
        Ok(())
    }

    fn gram(&self, out: &mut SuiteResult) -> Result<()> {
        let tol = self.cfg.tol;
        let (phis, psis) = self.families()?;
        let expected = self.expected_pairing()?;
        let g = gram_biorthogonality(phis, psis, expected)?;
        out.checks
            .push(Check::below("max_offdiag", g.max_offdiag, tol));
        out.checks.push(Check::below(
            "max_diag_dev",
            g.max_diag_dev / expected.norm(),
            tol,
        ));
        out.labels.push(("expected_diag".into(), expected.into()));

        let d = self.m.dim;
        let e0 = FockVector::basis(d, 0);
        let mix = FockVector::basis(d, 0).scale(r(std::f64::consts::FRAC_1_SQRT_2));
        let mut mix = mix;
        mix.add_scaled(r(std::f64::consts::FRAC_1_SQRT_2), &FockVector::basis(d, 3));
        let mut tests = vec![phis.vector(0).clone(), e0];
        let mut names = vec!["vacuum", "e0"];
        if matches!(self.m.params, ModelParams::Swanson(_)) {
            tests.push(mix);
            names.push("e0_e3");
        }
        let sweep: Vec<usize> = (0..=self.cfg.n_max).collect();
        let res = resolution_of_identity(phis, psis, &tests, &sweep)?;
        for (t, name) in names.iter().enumerate() {
            let last = *res.errors[t].last().expect("non-empty sweep");
            out.checks.push(Check::below(
                format!("resolution_{name}"),
                last,
                RESOLUTION_TOL,
            ));
            out.checks.push(Check::holds(
                format!("resolution_{name}_monotone"),
                res.monotone[t],
            ));
        }

        let mut table = Table::new(&["n", "m", "gram"]);
        for n in 0..g.size {
            for k in 0..g.size {
                table.push(vec![n.into(), k.into(), g.get(n, k).into()]);
            }
        }
        out.table = Some(table);
        Ok(())
    }

    fn riesz(&self, out: &mut SuiteResult) -> Result<()> {
        let (phis, psis) = self.families()?;
        let n_max = self.cfg.n_max;
        let mut v = riesz_growth(phis, psis, 0..=n_max)?;
        if self.cfg.stability {
            let big = crate::models::build(self.m.params, 2 * self.m.dim, super::EXPM_TOL)?;
            let (big_phi, big_psi) = ladder_family(&big, n_max)?;
            let a = stable_prefix(phis, &big_phi, self.cfg.tol);
            let b = stable_prefix(psis, &big_psi, self.cfg.tol);
            let stable = a == Some(n_max) && b == Some(n_max);
            v = v.with_stability(stable);
        }
        let (cp, cs) = (
            BasisFamily::orthonormal(self.m.dim, n_max, Side::Phi)?,
            BasisFamily::orthonormal(self.m.dim, n_max, Side::Psi)?,
        );
        let control = riesz_growth(&cp, &cs, 0..=n_max)?;
        out.checks.push(Check::holds(
            "control_riesz_plausible",
            control.verdict == Verdict::RieszPlausible,
        ));
        if !matches!(self.m.params, ModelParams::Generalized(_)) {
            out.checks
                .push(Check::holds("not_riesz", v.verdict == Verdict::NotRiesz));
        }
        if let ModelParams::Swanson(p) = self.m.params {
            let upto = ROUTE_N.min(n_max);
            out.checks.push(Check::below(
                "legendre_ratio",
                legendre_ratio_deviation(p.theta(), &v.r, upto)?,
                LEGENDRE_TOL,
            ));
        }
        out.labels
            .push(("verdict".into(), v.verdict.as_str().into()));
        out.labels
            .push(("growth_rate".into(), v.growth_rate.into()));
        out.labels
            .push(("strictly_increasing".into(), v.strictly_increasing.into()));
        out.labels.push(("fit_stable".into(), v.stable.into()));
        out.labels
            .push(("control_verdict".into(), control.verdict.as_str().into()));
        let mut table = Table::new(&["n", "r"]);
        for (n, x) in v.r.iter().enumerate() {
            table.push(vec![n.into(), (*x).into()]);
        }
        out.table = Some(table);
        Ok(())
    }

    fn intertwining(&self, out: &mut SuiteResult) -> Result<()> {
        let m = self.m;
        let (fwd, adj) = model_intertwining(m, self.w() / 2)?;
        out.checks.push(Check::below(
            "h_w_minus_w_h_ref",
            fwd,
            MODEL_INTERTWINING_TOL,
        ));
        out.checks.push(Check::below(
            "w_adj_h_adj_minus_h_ref_w_adj",
            adj,
            MODEL_INTERTWINING_TOL,
        ));
        let (phis, psis) = self.families()?;
        let s = build_s_operators_with(phis, psis, self.exec)?;
        out.checks
            .push(Check::below("s_product", s.product_residual, S_PRODUCT_TOL));
        let (left, right) = intertwining_check(m, &s)?;
        out.checks
            .push(Check::below("s_psi_number", left, S_INTERTWINING_TOL));
        out.checks
            .push(Check::below("number_s_phi", right, S_INTERTWINING_TOL));
        out.labels.push(("w_eff".into(), s.w_eff.into()));
        if self.w() / 2 > ROUTE_N.min(self.cfg.n_max) {
            let (_, _, agreement) = intertwiner_family(m, ROUTE_N.min(self.cfg.n_max))?;
            let c = agreement.alpha_est.norm_sqr() / s.pairing.norm();
            out.labels.push((
                "s_phi_vs_w_squared".into(),
                s_phi_against_intertwiner(m, &s, c)?.into(),
            ));
        }
        let mut table = Table::new(&["name", "value", "threshold", "pass"]);
        for c in &out.checks {
            table.push(vec![
                c.name.as_str().into(),
                c.value.into(),
                c.threshold.into(),
                c.pass.into(),
            ]);
        }
        out.table = Some(table);
        Ok(())
    }

    fn position(&self, out: &mut SuiteResult) -> Result<()> {
        let m = self.m;
        if matches!(m.params, ModelParams::Generalized(_)) {
            out.labels.push(("applicable".into(), false.into()));
            return Ok(());
        }
        let tol = self.cfg.tol;
        let (phis, psis) = self.families()?;
        let upto = POSITION_N.min(self.cfg.n_max);
        let count = self.w();
        let mut table = Table::new(&["n", "side", "fock_dev"]);
        let mut worst: f64 = 0.0;
        for (side, fam) in [(Side::Phi, phis), (Side::Psi, psis)] {
            for n in 0..=upto {
                let wf = Wavefunction::new(m.params, side, n)?;
                let coeffs = fock_projection(&wf, count, self.exec)?;
                let v = fam.vector(n);
                let dev = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (c - v.get(k)).norm())
                    .fold(0.0, f64::max)
                    / v.norm();
                worst = worst.max(dev);
                table.push(vec![n.into(), side.as_str().into(), dev.into()]);
            }
        }
        out.checks
            .push(Check::below("fock_position", worst, FOCK_POSITION_TOL));

        let expected = self.expected_pairing()?;
        let mut biorth: f64 = 0.0;
        for n in 0..=upto {
            let psi = Wavefunction::new(m.params, Side::Psi, n)?;
            for k in 0..=upto {
                let phi = Wavefunction::new(m.params, Side::Phi, k)?;
                let g = quad_inner(&psi, &phi, true)?;
                let target = if n == k { expected } else { r(0.0) };
                biorth = biorth.max((g - target).norm() / expected.norm());
            }
        }
        out.checks
            .push(Check::below("position_biorthogonality", biorth, tol));

        match m.params {
            ModelParams::Swanson(p) => {
                let xs: Vec<f64> = (0..100).map(|i| -6.0 + 12.0 * i as f64 / 99.0).collect();
                out.checks.push(Check::below(
                    "vacuum_equation",
                    vacuum_equation_residual(p.theta(), &xs)?,
                    tol,
                ));
            }
            ModelParams::Eqho(p) => {
                let v = crate::basis::eqho_vacuum_closed_form(p.beta(), m.dim)?;
                let o = eqho_vacuum_overlap(p.beta(), &v)?;
                out.checks
                    .push(Check::below("vacuum_overlap", (o - ONE).norm(), tol));
            }
            ModelParams::Generalized(_) => {}
        }
        out.table = Some(table);
        Ok(())
    }

    fn identities(&self, out: &mut SuiteResult) -> Result<()> {
        let ModelParams::Swanson(p) = self.m.params else {
            out.labels.push(("applicable".into(), false.into()));
            return Ok(());
        };
        let tol = self.cfg.tol;
        let theta = p.theta();
        let upto = ROUTE_N.min(self.cfg.n_max);
        let pp = r((2.0 * theta).cos());
        let b = Complex64::from_polar(1.0, theta);
        let c = b.conj();
        let mut table = Table::new(&[
            "n",
            "prudnikov_rel",
            "norm_quadrature",
            "norm_closed_form",
            "norm_uncorrected",
            "biorth_diag",
            "biorth_uncorrected",
        ]);
        let (mut prud, mut norm, mut sym, mut biorth): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        let mut branch = false;
        let mut uncorrected_gap: f64 = 0.0;
        let mut uncorrected_biorth_gap: f64 = 0.0;
        for n in 0..=upto {
            let pr = verify_prudnikov(n, pp, b, c)?;
            prud = prud.max(pr.rel_dev);
            branch |= pr.branch_warning;
            let nf = verify_norm_formula(theta, n)?;
            norm = norm.max(nf.rel_dev);
            sym = sym.max((nf.quadrature - nf.psi_quadrature).abs() / nf.quadrature);
            uncorrected_gap =
                uncorrected_gap.max((nf.uncorrected_form - nf.quadrature).abs() / nf.quadrature);
            let mut diag = None;
            for k in 0..=upto {
                let bi = verify_biorthogonality_integral(n, k, theta)?;
                biorth = biorth.max(bi.rel_dev);
                if n == k {
                    uncorrected_biorth_gap = uncorrected_biorth_gap
                        .max((bi.lhs - bi.uncorrected_rhs).norm() / bi.uncorrected_rhs.norm());
                    diag = Some(bi);
                }
            }
            let diag = diag.expect("diagonal entry visited");
            table.push(vec![
                n.into(),
                pr.rel_dev.into(),
                nf.quadrature.into(),
                nf.closed_form.into(),
                nf.uncorrected_form.into(),
                diag.lhs.into(),
                diag.uncorrected_rhs.into(),
            ]);
        }
        out.checks
            .push(Check::below("prudnikov", prud, PRUDNIKOV_TOL));
        out.checks
            .push(Check::holds("prudnikov_branch_clear", !branch));
        out.checks
            .push(Check::below("norm_formula_corrected", norm, tol));
        out.checks
            .push(Check::below("norm_phi_equals_psi", sym, NORM_SYMMETRY_TOL));
        out.checks
            .push(Check::below("biorthogonality_corrected", biorth, tol));
        out.labels.push((
            "norm_uncorrected_prefactor_rel_gap".into(),
            uncorrected_gap.into(),
        ));
        out.labels.push((
            "norm_discrepancy".into(),
            "uncorrected prefactor cos(pi/cos 2theta) replaced by sqrt(pi/cos 2theta)".into(),
        ));
        out.labels.push((
            "biorthogonality_uncorrected_rel_gap".into(),
            uncorrected_biorth_gap.into(),
        ));
        out.labels.push((
            "biorthogonality_discrepancy".into(),
            "uncorrected right-hand side lacks the factor e^{i theta}".into(),
        ));
        out.table = Some(table);
        Ok(())
    }
}

fn finite_or_blank(x: f64) -> Cell {
    if x.is_finite() {
        Cell::Real(x)
    } else {
        Cell::Text(String::new())
    }
}

fn truncate(f: &BasisFamily, n_max: usize) -> Result<BasisFamily> {
    BasisFamily::new(
        f.vectors()[..=n_max].to_vec(),
        f.route(),
        f.side(),
        f.model(),
    )
}
