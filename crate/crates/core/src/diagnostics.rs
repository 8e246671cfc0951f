//! Biorthogonality, S-operators, resolution of the identity, Riesz growth
//! and intertwining residuals.

use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::basis::{pairing, BasisFamily, Side};
use crate::error::{PbxError, Result};
use crate::exec::Exec;
use crate::models::ModelBundle;
use crate::operator::{window_residual, FockVector, TruncatedOperator, ZERO};
use crate::special::legendre;

/// Growth-rate threshold above which a strictly increasing `r_n` counts as
/// unbounded.
pub const GROWTH_THRESHOLD: f64 = 0.05;

/// Largest `max r / min r` still compatible with a Riesz basis.
pub const SPREAD_FACTOR: f64 = 2.0;

/// Relative Gram deviation above which S-operators are not built.
pub const GRAM_GATE: f64 = 1e-6;

/// Relative high-mode mass above which a test vector is flagged.
pub const HIGH_MODE_TOL: f64 = 1e-8;

/// Slack allowed when checking that reconstruction errors never grow.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub size: usize,
    /// Row-major, `gram[n * size + m] = <Psi_n, phi_m>`.
    pub gram: Vec<Complex64>,
    pub expected_diag: Complex64,
    pub max_offdiag: f64,
    pub max_diag_dev: f64,
}

impl GramReport {
    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.gram[n * self.size + m]
    }

    /// Off-diagonal below `tol`, diagonal within `tol * |expected|`.
    pub fn passes(&self, tol: f64) -> bool {
        self.max_offdiag < tol && self.max_diag_dev < tol * self.expected_diag.norm()
    }
}

fn check_pair(phis: &BasisFamily, psis: &BasisFamily) -> Result<()> {
    phis.compatible_with(psis)?;
    if phis.side() != Side::Phi || psis.side() != Side::Psi {
        return Err(PbxError::FamilyMismatch(
            "expected a phi family and a psi family".into(),
        ));
    }
    Ok(())
}

pub fn gram_biorthogonality(
    phis: &BasisFamily,
    psis: &BasisFamily,
    expected_diag: Complex64,
) -> Result<GramReport> {
    check_pair(phis, psis)?;
    let size = phis.len();
    let mut gram = Vec::with_capacity(size * size);
    let mut max_offdiag: f64 = 0.0;
    let mut max_diag_dev: f64 = 0.0;
    for n in 0..size {
        for m in 0..size {
            let g = psis.vector(n).inner(phis.vector(m));
            if n == m {
                max_diag_dev = max_diag_dev.max((g - expected_diag).norm());
            } else {
                max_offdiag = max_offdiag.max(g.norm());
            }
            gram.push(g);
        }
    }
    Ok(GramReport {
        size,
        gram,
        expected_diag,
        max_offdiag,
        max_diag_dev,
    })
}

/// Partial sums of the two S-operators and their product residual.
#[derive(Debug, Clone)]
pub struct SOperators {
    pub s_phi: TruncatedOperator,
    pub s_psi: TruncatedOperator,
    /// `window_residual(S_psi S_phi, I, w_eff)`.
    pub product_residual: f64,
    pub w_eff: usize,
    pub pairing: Complex64,
}

/// `min(8, n_max / 3)`, at least 1.
pub fn effective_window(n_max: usize) -> usize {
    (n_max / 3).clamp(1, 8)
}

fn outer_sum(family: &BasisFamily, scale: f64, exec: Exec) -> TruncatedOperator {
    let d = family.dim();
    let mut entries = vec![ZERO; d * d];
    exec.for_each_row(&mut entries, d, |i, row| {
        for v in family.vectors() {
            let vi = v.get(i) * scale;
            if vi == ZERO {
                continue;
            }
            for (j, out) in row.iter_mut().enumerate() {
                *out += vi * v.get(j).conj();
            }
        }
    });
    TruncatedOperator::new(d, entries).expect("finite outer products")
}

/// `S_phi = sum |phi_n><phi_n| / |p|`, `S_psi = sum |Psi_n><Psi_n| / |p|`
/// with `p = <Psi_0, phi_0>`. Refuses when the Gram matrix is off by more
/// than [`GRAM_GATE`].
pub fn build_s_operators(phis: &BasisFamily, psis: &BasisFamily) -> Result<SOperators> {
    build_s_operators_with(phis, psis, Exec::default())
}

pub fn build_s_operators_with(
    phis: &BasisFamily,
    psis: &BasisFamily,
    exec: Exec,
) -> Result<SOperators> {
    let p = pairing(phis, psis);
    let gram = gram_biorthogonality(phis, psis, p)?;
    if !gram.passes(GRAM_GATE) {
        return Err(PbxError::GramFailure(format!(
            "off-diagonal {:.3e}, diagonal deviation {:.3e}",
            gram.max_offdiag, gram.max_diag_dev
        )));
    }
    let scale = 1.0 / p.norm();
    let s_phi = outer_sum(phis, scale, exec);
    let s_psi = outer_sum(psis, scale, exec);
    let w_eff = effective_window(phis.n_max());
    let product = s_psi.mul_with(&s_phi, exec)?;
    let product_residual =
        window_residual(&product, &TruncatedOperator::identity(phis.dim()), w_eff)?;
    Ok(SOperators {
        s_phi,
        s_psi,
        product_residual,
        w_eff,
        pairing: p,
    })
}

/// `window_residual(S_phi, c W^2, w_eff)`; `c` absorbs the family scale.
pub fn s_phi_against_intertwiner(m: &ModelBundle, s: &SOperators, c: f64) -> Result<f64> {
    let w2 = (&m.w * &m.w).scale(Complex64::new(c, 0.0));
    window_residual(&s.s_phi, &w2, s.w_eff)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport {
    pub sweep: Vec<usize>,
    /// `errors[t][i]`: relative error of test vector `t` with terms up to `sweep[i]`.
    pub errors: Vec<Vec<f64>>,
    pub monotone: Vec<bool>,
    pub high_mode_flag: Vec<bool>,
}

/// Reconstruction `f ~ sum_{n <= N} <Psi_n, f> phi_n / p` for every `N` in
/// the sweep.
pub fn resolution_of_identity(
    phis: &BasisFamily,
    psis: &BasisFamily,
    test_vectors: &[FockVector],
    sweep: &[usize],
) -> Result<ResolutionReport> {
    check_pair(phis, psis)?;
    if let Some(&n) = sweep.iter().find(|&&n| n > phis.n_max()) {
        return Err(PbxError::IndexCap {
            n,
            cap: phis.n_max(),
        });
    }
    let p = pairing(phis, psis);
    let d = phis.dim();
    let low = (d / 8).max(1);
    let mut errors = Vec::with_capacity(test_vectors.len());
    let mut monotone = Vec::with_capacity(test_vectors.len());
    let mut high_mode_flag = Vec::with_capacity(test_vectors.len());
    for f in test_vectors {
        if f.dim() != d {
            return Err(PbxError::DimensionMismatch {
                left: d,
                right: f.dim(),
            });
        }
        let norm = f.norm();
        let tail = (norm * norm - f.window_norm(low).powi(2)).max(0.0).sqrt();
        high_mode_flag.push(tail > HIGH_MODE_TOL * norm);
        let mut approx = FockVector::zeros(d);
        let mut next = 0;
        let mut row = Vec::with_capacity(sweep.len());
        let mut sorted: Vec<usize> = sweep.to_vec();
        sorted.sort_unstable();
        let mut by_n = std::collections::BTreeMap::new();
        for &target in &sorted {
            while next <= target {
                let c = psis.vector(next).inner(f) / p;
                approx.add_scaled(c, phis.vector(next));
                next += 1;
            }
            by_n.insert(target, f.sub(&approx).norm() / norm);
        }
        for n in sweep {
            row.push(by_n[n]);
        }
        let mono = sorted
            .windows(2)
            .all(|w| by_n[&w[1]] <= by_n[&w[0]] + MONOTONE_SLACK);
        monotone.push(mono);
        errors.push(row);
    }
    Ok(ResolutionReport {
        sweep: sweep.to_vec(),
        errors,
        monotone,
        high_mode_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    RieszPlausible,
    NotRiesz,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::RieszPlausible => "riesz_plausible",
            Verdict::NotRiesz => "not_riesz",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszVerdict {
    /// `r_n = ||phi_n|| ||Psi_n||` for every family index.
    pub r: Vec<f64>,
    pub fit_range: RangeInclusive<usize>,
    /// Least-squares slope of `ln r_n` over the fit range.
    pub growth_rate: f64,
    pub strictly_increasing: bool,
    pub verdict: Verdict,
    /// False when the fit range was not stable under doubling `D`.
    pub stable: bool,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn riesz_growth(
    phis: &BasisFamily,
    psis: &BasisFamily,
    fit_range: RangeInclusive<usize>,
) -> Result<RieszVerdict> {
    check_pair(phis, psis)?;
    if fit_range.is_empty() || *fit_range.end() > phis.n_max() {
        return Err(PbxError::Config(format!(
            "fit range {fit_range:?} outside 0..={}",
            phis.n_max()
        )));
    }
    let r: Vec<f64> = phis
        .vectors()
        .iter()
        .zip(psis.vectors())
        .map(|(f, g)| f.norm() * g.norm())
        .collect();
    let idx: Vec<usize> = fit_range.clone().collect();
    let xs: Vec<f64> = idx.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = idx.iter().map(|&n| r[n].ln()).collect();
    let growth_rate = slope(&xs, &ys);
    let strictly_increasing = idx.windows(2).all(|w| r[w[1]] > r[w[0]]);
    let window = &r[*fit_range.start()..=*fit_range.end()];
    let hi = window.iter().copied().fold(f64::MIN, f64::max);
    let lo = window.iter().copied().fold(f64::MAX, f64::min);
    let verdict = if strictly_increasing && growth_rate > GROWTH_THRESHOLD {
        Verdict::NotRiesz
    } else if growth_rate.abs() <= GROWTH_THRESHOLD && hi <= SPREAD_FACTOR * lo {
        Verdict::RieszPlausible
    } else {
        Verdict::Inconclusive
    };
    Ok(RieszVerdict {
        r,
        fit_range,
        growth_rate,
        strictly_increasing,
        verdict,
        stable: true,
    })
}

impl RieszVerdict {
    /// Downgrade to inconclusive when the fit range is not truncation-stable.
    pub fn with_stability(mut self, stable: bool) -> Self {
        self.stable = stable;
        if !stable {
            self.verdict = Verdict::Inconclusive;
        }
        self
    }
}

/// Largest `N` such that `per_n <= tol` for every `n <= N`, comparing a
/// family against the same construction at a larger truncation.
pub fn stable_prefix(small: &BasisFamily, large: &BasisFamily, tol: f64) -> Option<usize> {
    let count = small.len().min(large.len());
    let mut last = None;
    for n in 0..count {
        let a = small.vector(n).resized(large.dim());
        let dev = a.sub(large.vector(n)).norm() / large.vector(n).norm();
        if dev > tol {
            break;
        }
        last = Some(n);
    }
    last
}

/// `max_n |r_n / r_0 - P_n(1/cos 2theta)| / P_n(1/cos 2theta)`.
pub fn legendre_ratio_deviation(theta: f64, r: &[f64], n_max: usize) -> Result<f64> {
    let x = 1.0 / (2.0 * theta).cos();
    let mut worst: f64 = 0.0;
    for (n, rn) in r.iter().enumerate().take(n_max + 1) {
        let p = legendre(n, x)?;
        worst = worst.max((rn / r[0] - p).abs() / p.abs());
    }
    Ok(worst)
}

/// Residuals of `S_psi N - N^dagger S_psi` and `N S_phi - S_phi N^dagger`
/// on the effective window.
pub fn intertwining_residuals(n_op: &TruncatedOperator, s: &SOperators) -> Result<(f64, f64)> {
    let n_adj = n_op.adjoint();
    let left = &s.s_psi.mul(n_op)? - &n_adj.mul(&s.s_psi)?;
    let right = &n_op.mul(&s.s_phi)? - &s.s_phi.mul(&n_adj)?;
    let zero = TruncatedOperator::zeros(n_op.dim());
    Ok((
        window_residual(&left, &zero, s.w_eff)?,
        window_residual(&right, &zero, s.w_eff)?,
    ))
}

pub fn intertwining_check(m: &ModelBundle, s: &SOperators) -> Result<(f64, f64)> {
    intertwining_residuals(&m.number_operator(), s)
}

/// Residuals of `H W - W h_ref` and `W^dagger H^dagger - h_ref W^dagger` on window `w`.
pub fn model_intertwining(m: &ModelBundle, w: usize) -> Result<(f64, f64)> {
    let forward = &(&m.h * &m.w) - &(&m.w * &m.h_ref);
    // Adjoint of the forward relation; W† = W for the named models.
    let w_adj = m.w.adjoint();
    let adjoint = &(&w_adj * &m.h.adjoint()) - &(&m.h_ref * &w_adj);
    let zero = TruncatedOperator::zeros(m.dim);
    Ok((
        window_residual(&forward, &zero, w)?,
        window_residual(&adjoint, &zero, w)?,
    ))
}
