//! Variation theory of the bottom value λ₁ of −4Δ + R along warped-profile
//! deformations φ_t = φ + t δφ.
//!
//! `lambda_value` realizes λ₁ together with its gradient-flow reformulation
//! λ = 2Δf − |∇f|² + R for f = −2 ln u and e^{−f} dvol a probability measure;
//! the reported residual evaluates that identity pointwise with derivatives
//! taken through u (differencing f itself would difference a logarithmic
//! singularity at a Dirichlet wall). `first_variation` compares three
//! realizations of dλ/dt: Richardson-extrapolated central differences, the
//! exact Hellmann–Feynman derivative of the discrete pencil, and the
//! geometric form ∫⟨−Ric − Hess f, h⟩ e^{−f} dvol with h = ∂_t g = 2φδφ h₀.
//! `second_variation_numeric` adds a 5-point stencil against second-order
//! eigenvalue perturbation theory, and `critical_point_check` reports the
//! defect |Ric + Hess f| with directional gradients.
//!
//! Design notes. Variations act on the warp profile only and must decay like
//! O(r^{1+β}) at the tip, which pins the tip slope c₀: the boundary
//! eliminations of the discretization then carry no t-dependence and the mass
//! matrix is constant, so the Hellmann–Feynman derivative reduces to the
//! entry-wise assembly of dQ/dt. Profiles at t ≠ 0 are tabulated exactly on
//! the node line of the working grid, making λ(t) a smooth function of t with
//! the same truncation systematics at every t (they cancel in differences).
//! Families over a second conical tip are not sampled in t (the tabulated
//! representation does not preserve the tip structure); spindles are covered
//! through `critical_point_check` gradients and `pure_scaling_variation`,
//! which dilate the profile in closed form. The geometric form needs an
//! Einstein cross-section; explicit mode lists report `None` there.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    check_asymptotic_condition, OuterBc, Profile, ProfileKind, SingularManifold,
};
use crate::radial_modes::{Grading, ModeODE, ModeOperator, RadialGrid, LIMIT_CIRCLE_NU};
use crate::spectrum::{self, EigenfunctionProfile};

/// Probe tolerance locating an eigenvalue before the tight solve.
const PROBE_TOL: f64 = 1e-4;
/// Relative bisection tolerance for located eigenvalues (the Rayleigh
/// quotient of the inverse-iteration vector then reaches rounding level).
const SOLVE_REL_TOL: f64 = 1e-9;
/// Coarse central-difference step for dλ/dt; the fine step is 10× smaller.
const FD_STEP: f64 = 1e-3;
/// Step of the 5-point second-derivative stencil.
const D2_STEP: f64 = 1e-2;
/// Radial eigenpairs kept by the perturbative second variation.
const PERT_BASIS: usize = 60;
/// Fraction of the radial span excluded next to each conical tip in pointwise
/// sup norms (f = −2 ln u amplifies floating-point error toward a tip).
const TIP_EXCLUDE: f64 = 0.05;
/// Outer fraction of the span classified as the wall layer.
const WALL_LAYER: f64 = 0.2;
/// Wall/interior defect ratio that flags a boundary-dominated defect.
const WALL_DOMINANCE: f64 = 10.0;
/// Limit on |δφ|/r^{1+β} near the tip relative to its bulk size.
const DECAY_RATIO_LIMIT: f64 = 100.0;
/// Relative-denominator floor for agreement residuals.
const DERIV_FLOOR: f64 = 1e-12;
/// Tolerated gap between the assembled ground value and the Richardson one.
const CROSS_CHECK_TOL: f64 = 1e-3;

/// One-parameter family of warped metrics φ_t = φ + t δφ around an admissible
/// base. The variation is supplied with analytic first and second radial
/// derivatives; `beta > 0` asserts the tip decay δφ = O(r^{1+β}).
pub struct MetricFamily {
    pub base: SingularManifold,
    pub delta_phi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub delta_dphi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub delta_d2phi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta: f64,
    pub t_range: (f64, f64),
}

/// Realized bottom value with its gradient-flow data.
#[derive(Debug, Clone)]
pub struct LambdaValue {
    pub lambda: f64,
    /// Ground eigenfunction, normalized to ∫ u² dvol = 1 and positive.
    pub u: EigenfunctionProfile,
    /// f = −2 ln u at the grid nodes.
    pub f: Vec<f64>,
    /// Sup of |2Δf − |∇f|² + R − λ| over the residual window (5% of the span
    /// next to each conical tip and stencil-incomplete edge nodes excluded).
    pub residual: f64,
    /// Ground level simple (radial gap and link multiplicity one).
    pub simple: bool,
}

/// First-variation comparison at t = 0.
#[derive(Debug, Clone)]
pub struct VariationReport {
    pub lambda0: f64,
    /// Central differences with Richardson extrapolation over `fd_steps`.
    pub dlambda_fd: f64,
    /// Hellmann–Feynman derivative of the discrete pencil.
    pub dlambda_hf: f64,
    /// ∫⟨−Ric − Hess f, h⟩ e^{−f} dvol; `None` without an Einstein link.
    pub dlambda_geom: Option<f64>,
    pub fd_steps: (f64, f64),
    pub fd_hf_rel: f64,
    pub geom_hf_rel: Option<f64>,
    /// Innermost-decade share (plus tip flux) of the geometric integral.
    pub inner_flux_fraction: Option<f64>,
    /// Max over sampled t of |∫ e^{−f} dvol − 1|.
    pub weight_drift: f64,
}

/// Second-variation comparison: 5-point stencil vs second-order perturbation
/// theory over the assembled radial eigenpairs.
#[derive(Debug, Clone, Copy)]
pub struct SecondVariation {
    pub d2lambda_fd: f64,
    pub d2lambda_pert: f64,
    pub rel_gap: f64,
}

/// Derivatives of λ under the exact metric dilation g → (1+t)²g.
#[derive(Debug, Clone, Copy)]
pub struct ScalingVariation {
    pub lambda0: f64,
    pub dlambda: f64,
    pub d2lambda: f64,
}

/// Pointwise criticality defect |Ric + Hess f| with directional gradients.
#[derive(Debug, Clone)]
pub struct CriticalPointReport {
    /// Sup over the residual window of the frame components of Ric + Hess f.
    pub sup_ric_hess: f64,
    /// Same sup restricted to the interior (wall layer removed).
    pub sup_interior: f64,
    /// Dirichlet manifold whose defect lives in the wall layer: the boundary
    /// condition, not the interior geometry, obstructs criticality.
    pub dirichlet_breaks_criticality: bool,
    /// dλ along the seeded polynomial bump basis (Hellmann–Feynman).
    pub bump_gradient: Vec<f64>,
    /// dλ along the dilation direction (−2λ unless λ = 0).
    pub scaling_gradient: f64,
}

impl MetricFamily {
    pub fn new(
        base: SingularManifold,
        beta: f64,
        t_range: (f64, f64),
        delta_phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta_dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta_d2phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if base.is_diagnostic() {
            return Err(Error::InvalidParameter(
                "metric family: base manifold is diagnostic (not admissible)".into(),
            ));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "metric family: tip decay exponent beta = {beta} must be positive"
            )));
        }
        if !(t_range.0 < 0.0 && t_range.1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "metric family: t_range ({}, {}) must contain 0 in its interior",
                t_range.0, t_range.1
            )));
        }
        let family = Self {
            base,
            delta_phi: Box::new(delta_phi),
            delta_dphi: Box::new(delta_dphi),
            delta_d2phi: Box::new(delta_d2phi),
            beta,
            t_range,
        };
        family.check_tip_decay()?;
        Ok(family)
    }

    /// The claimed decay δφ = O(r^{1+β}) keeps the tip slope and the
    /// asymptotic condition of the base: reject variations whose weighted
    /// amplitude |δφ|/r^{1+β} grows toward the tip.
    fn check_tip_decay(&self) -> Result<()> {
        let l = self.base.profile.l();
        let n_samples = 48;
        let r_lo = 1e-8 * l;
        let mut tip_max = 0.0f64;
        let mut bulk_max = 0.0f64;
        for j in 0..n_samples {
            let r = r_lo * (0.99 * l / r_lo).powf(j as f64 / (n_samples - 1) as f64);
            let ratio = (self.delta_phi)(r).abs() / r.powf(1.0 + self.beta);
            if !ratio.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "metric family: |delta_phi|/r^(1+beta) not finite at r = {r:.3e}"
                )));
            }
            if r < 1e-4 * l {
                tip_max = tip_max.max(ratio);
            } else if r > 0.1 * l {
                bulk_max = bulk_max.max(ratio);
            }
        }
        if tip_max > DECAY_RATIO_LIMIT * bulk_max.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!(
                "metric family: delta_phi decays slower than r^(1+beta) at the tip \
                 (weighted amplitude {tip_max:.3e} near the tip vs {bulk_max:.3e} in the bulk)"
            )));
        }
        Ok(())
    }

    /// Manifold at parameter t, with φ_t tabulated exactly on the node line
    /// of `grid` (the discretization only evaluates profiles at those
    /// points). The samples at the inner cutoff are pinned to the tip cone
    /// c₀·r of the base: δφ = O(r^{1+β}) leaves the tip slope invariant, and
    /// pinning keeps the discrete limit-circle decision and the boundary
    /// eliminations exactly t-independent (otherwise a mode sitting at the
    /// threshold ν_eff = 1 would flip its boundary condition across t = 0).
    /// Restricted to Dirichlet outer boundaries; second-tip eliminations are
    /// not preserved by tabulation.
    pub fn manifold_at(&self, t: f64, grid: &RadialGrid) -> Result<SingularManifold> {
        if self.base.outer_bc != OuterBc::Dirichlet {
            return Err(Error::Unsupported(
                "metric family time samples need a Dirichlet outer boundary; use \
                 critical_point_check gradients or pure_scaling_variation on spindles"
                    .into(),
            ));
        }
        let mut xs = Vec::with_capacity(grid.len() + 2);
        xs.push(grid.inner_cutoff());
        xs.extend_from_slice(grid.nodes());
        xs.push(grid.outer_cutoff());
        let p = &self.base.profile;
        let c0 = p.c0();
        let mut phi: Vec<f64> = xs.iter().map(|&r| p.phi(r) + t * (self.delta_phi)(r)).collect();
        let mut dphi: Vec<f64> =
            xs.iter().map(|&r| p.dphi(r) + t * (self.delta_dphi)(r)).collect();
        let mut d2phi: Vec<f64> =
            xs.iter().map(|&r| p.d2phi(r) + t * (self.delta_d2phi)(r)).collect();
        phi[0] = c0 * xs[0];
        dphi[0] = c0;
        d2phi[0] = 0.0;
        let profile = Profile::tabulated(xs, phi, dphi, d2phi)?;
        SingularManifold::new(
            self.base.n,
            self.base.cross_section.clone(),
            profile,
            self.base.outer_bc,
        )
    }

    /// Admissibility across the sampled range: the cone condition is checked
    /// per t through the manifold constructors; the asymptotic decay
    /// condition is checked on the analytic base profile and transfers to
    /// φ_t through the tip-decay bound on δφ.
    fn validate(&self, grid: &RadialGrid) -> Result<()> {
        let report = check_asymptotic_condition(&self.base.profile, self.base.n);
        if !report.overall {
            return Err(Error::InvalidParameter(
                "metric family: base profile fails the asymptotic decay condition".into(),
            ));
        }
        for &t in &[self.t_range.0, 0.0, self.t_range.1] {
            self.manifold_at(t, grid)?;
        }
        Ok(())
    }

    /// dQ/dt at t = 0 for the w-form potential Q = μ/φ² − (n−1)(φ′/φ)².
    fn q_dot(&self, mu: f64) -> impl Fn(f64) -> f64 + '_ {
        let m = (self.base.n - 1) as f64;
        let p = &self.base.profile;
        move |r: f64| {
            let phi = p.phi(r);
            let psi = p.dphi(r) / phi;
            let d = (self.delta_phi)(r);
            let d1 = (self.delta_dphi)(r);
            let psi_dot = (d1 - psi * d) / phi;
            -2.0 * mu * d / (phi * phi * phi) - 2.0 * m * psi * psi_dot
        }
    }

    /// d²Q/dt² at t = 0 (the family is linear in t, so ∂_t φ_t = δφ exactly).
    fn q_ddot(&self, mu: f64) -> impl Fn(f64) -> f64 + '_ {
        let m = (self.base.n - 1) as f64;
        let p = &self.base.profile;
        move |r: f64| {
            let phi = p.phi(r);
            let psi = p.dphi(r) / phi;
            let d = (self.delta_phi)(r);
            let d1 = (self.delta_dphi)(r);
            let psi_dot = (d1 - psi * d) / phi;
            let phi4 = phi * phi * phi * phi;
            6.0 * mu * d * d / phi4
                - m * (2.0 * psi_dot * psi_dot - 4.0 * psi * psi_dot * d / phi)
        }
    }
}

/// Bisection to `SOLVE_REL_TOL` followed by a Rayleigh-quotient polish of the
/// inverse-iteration vector; the quotient error is quadratic in the vector
/// residual, so the returned eigenvalue is at rounding level.
fn polished_eigenpair(op: &ModeOperator, k: usize) -> Result<(f64, Vec<f64>)> {
    let probe = op.eigenvalues(k, k, PROBE_TOL)?[0];
    let tol = SOLVE_REL_TOL * probe.abs().max(1.0);
    let lambda = op.eigenvalues(k, k, tol)?[0];
    let v = op.eigenvector(lambda)?;
    let av = op.pencil().apply_stiff(&v);
    let num: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
    let den: f64 = v.iter().zip(op.mass()).map(|(x, m)| x * x * m).sum();
    Ok((num / den, v))
}

/// Ground eigenvalue and u-samples improved by the nested grid refinement;
/// u is normalized to ∫ u² dvol = 1 and oriented positive.
fn richardson_ground(mfd: &SingularManifold, grid: &RadialGrid) -> Result<(f64, Vec<f64>)> {
    let fine_grid = grid.refined()?;
    let coarse = spectrum::mode_operator(mfd, grid, 0)?;
    let fine = spectrum::mode_operator(mfd, &fine_grid, 0)?;
    let (lc, wc) = polished_eigenpair(&coarse, 1)?;
    let (lf, wf) = polished_eigenpair(&fine, 1)?;
    let wf_at_coarse: Vec<f64> = (0..wc.len()).map(|j| wf[2 * j + 1]).collect();
    let num: f64 = wf_at_coarse.iter().zip(&wc).map(|(a, b)| a * b).sum();
    let den: f64 = wc.iter().map(|b| b * b).sum();
    let alpha = num / den;
    let mut w: Vec<f64> = wf_at_coarse
        .iter()
        .zip(&wc)
        .map(|(f, c)| (4.0 * f - alpha * c) / 3.0)
        .collect();
    let norm: f64 = w.iter().zip(coarse.mass()).map(|(x, m)| x * x * m).sum();
    let scale = norm.sqrt();
    for x in &mut w {
        *x /= scale;
    }
    let vol = mfd.cross_section.volume().unwrap_or(1.0);
    let mut u = coarse.u_samples(&mfd.profile, &w);
    let total: f64 = u.iter().sum();
    let sign = if total < 0.0 { -1.0 } else { 1.0 };
    for x in &mut u {
        *x *= sign / vol.sqrt();
    }
    Ok(((4.0 * lf - lc) / 3.0, u))
}

/// First and second radial derivatives of node samples by 5-point central
/// stencils (in log r on geometric grids). The two nodes next to each end
/// lack a full stencil and copy their nearest interior value; pointwise
/// windows exclude them.
fn five_point_derivatives(grid: &RadialGrid, vals: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = grid.nodes();
    let m = r.len();
    if vals.len() != m {
        return Err(Error::InvalidParameter(format!(
            "derivatives: {} samples on a grid of {m} nodes",
            vals.len()
        )));
    }
    if m < 7 {
        return Err(Error::InvalidParameter("derivatives: need at least 7 nodes".into()));
    }
    let mut du = vec![0.0f64; m];
    let mut d2u = vec![0.0f64; m];
    match grid.grading() {
        Grading::LogUniform => {
            let h = (r[m - 1].ln() - r[0].ln()) / (m - 1) as f64;
            for j in 2..m - 2 {
                let ut = (vals[j - 2] - 8.0 * vals[j - 1] + 8.0 * vals[j + 1] - vals[j + 2])
                    / (12.0 * h);
                let utt = (-vals[j - 2] + 16.0 * vals[j - 1] - 30.0 * vals[j]
                    + 16.0 * vals[j + 1]
                    - vals[j + 2])
                    / (12.0 * h * h);
                du[j] = ut / r[j];
                d2u[j] = (utt - ut) / (r[j] * r[j]);
            }
        }
        Grading::Uniform => {
            let h = (r[m - 1] - r[0]) / (m - 1) as f64;
            for j in 2..m - 2 {
                du[j] = (vals[j - 2] - 8.0 * vals[j - 1] + 8.0 * vals[j + 1] - vals[j + 2])
                    / (12.0 * h);
                d2u[j] = (-vals[j - 2] + 16.0 * vals[j - 1] - 30.0 * vals[j]
                    + 16.0 * vals[j + 1]
                    - vals[j + 2])
                    / (12.0 * h * h);
            }
        }
    }
    for j in [0usize, 1] {
        du[j] = du[2];
        d2u[j] = d2u[2];
    }
    for j in [m - 2, m - 1] {
        du[j] = du[m - 3];
        d2u[j] = d2u[m - 3];
    }
    Ok((du, d2u))
}

/// Node indices entering pointwise sup norms: full stencils only, the
/// innermost 5% of the span dropped, and the mirrored outer collar dropped
/// when the outer end is a second tip.
fn residual_window(mfd: &SingularManifold, grid: &RadialGrid) -> Vec<usize> {
    let r = grid.nodes();
    let m = r.len();
    let lo = TIP_EXCLUDE * grid.outer_cutoff();
    let hi = match mfd.outer_bc {
        OuterBc::Dirichlet => grid.outer_cutoff(),
        OuterBc::SecondConicalTip => (1.0 - TIP_EXCLUDE) * mfd.profile.l(),
    };
    (2..m - 2).filter(|&j| r[j] >= lo && r[j] <= hi).collect()
}

/// Bottom value λ₁ with the gradient-flow data (u, f = −2 ln u) and the
/// pointwise residual of λ = 2Δf − |∇f|² + R. Diagnostic (non-admissible)
/// manifolds are refused.
pub fn lambda_value(mfd: &SingularManifold, grid: &RadialGrid) -> Result<LambdaValue> {
    if mfd.is_diagnostic() {
        return Err(Error::InvalidParameter(
            "lambda_value: manifold is diagnostic (not admissible)".into(),
        ));
    }
    if !matches!(mfd.profile.kind(), ProfileKind::Tabulated { .. }) {
        let report = check_asymptotic_condition(&mfd.profile, mfd.n);
        if !report.overall {
            return Err(Error::InvalidParameter(
                "lambda_value: profile fails the asymptotic decay condition".into(),
            ));
        }
    }
    let (lambda_gs, _, simple) = spectrum::ground_state(mfd, grid)?;
    let (lambda, u) = richardson_ground(mfd, grid)?;
    if (lambda - lambda_gs).abs() > CROSS_CHECK_TOL * lambda_gs.abs().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "lambda_value: Richardson value {lambda} far from assembled ground {lambda_gs}"
        )));
    }
    if let Some(bad) = u.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NumericalFailure(format!(
            "lambda_value: ground eigenfunction not positive at node index {bad}"
        )));
    }
    let f: Vec<f64> = u.iter().map(|&x| -2.0 * x.ln()).collect();
    let (du, d2u) = five_point_derivatives(grid, &u)?;
    let m_dim = (mfd.n - 1) as f64;
    let mut residual = 0.0f64;
    for j in residual_window(mfd, grid) {
        let r = grid.nodes()[j];
        let psi = mfd.profile.dphi(r) / mfd.profile.phi(r);
        // 2Δf − |∇f|² + R with f = −2 ln u collapses to −4Δu/u + R.
        let lap = d2u[j] + m_dim * psi * du[j];
        let res = (-4.0 * lap / u[j] + mfd.scal(r)? - lambda).abs();
        residual = residual.max(res);
    }
    let profile = EigenfunctionProfile {
        mode_index: 0,
        radial_index: 1,
        lambda,
        nodes: grid.nodes().to_vec(),
        u,
    };
    Ok(LambdaValue { lambda, u: profile, f, residual, simple })
}

/// Assemble the diagonal of dA/dt (or d²A/dt²) from a potential derivative:
/// the 4/h stiffness terms, the masses and the boundary-elimination constants
/// of the pencil carry no t-dependence for tip-decaying variations, so only
/// the q-entries differentiate.
fn stiffness_derivative_diag(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    q_deriv: &dyn Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let m = grid.len();
    let mut x = Vec::with_capacity(m + 2);
    x.push(grid.inner_cutoff());
    x.extend_from_slice(grid.nodes());
    x.push(grid.outer_cutoff());
    let h = |j: usize| x[j + 1] - x[j];
    let mut diag = vec![0.0f64; m];
    for j in 1..=m {
        diag[j - 1] = q_deriv(x[j]) * 0.5 * (h(j - 1) + h(j));
    }
    let mode = ModeODE::new(mfd.n, mfd.cross_section.mode(0)?.mu, mfd.profile.clone())?;
    let inner_robin = matches!(mode.nu_effective(), Ok(nu) if nu < LIMIT_CIRCLE_NU);
    if inner_robin {
        let nu_eff = mode.nu_effective()?;
        let rho = (x[0] / x[1]).powf(0.5 * (1.0 + nu_eff));
        diag[0] = q_deriv(x[1]) * 0.5 * (h(0) + h(1)) + rho * rho * q_deriv(x[0]) * 0.5 * h(0);
    }
    if mfd.outer_bc == OuterBc::SecondConicalTip && inner_robin {
        let nu_eff = mode.nu_effective()?;
        let l = mfd.profile.l();
        let rho = ((l - x[m + 1]) / (l - x[m])).powf(0.5 * (1.0 + nu_eff));
        diag[m - 1] =
            q_deriv(x[m]) * 0.5 * (h(m - 1) + h(m)) + rho * rho * q_deriv(x[m + 1]) * 0.5 * h(m);
    }
    Ok(diag)
}

fn dirichlet_family_guard(family: &MetricFamily) -> Result<()> {
    if family.base.outer_bc != OuterBc::Dirichlet {
        return Err(Error::Unsupported(
            "metric family time samples need a Dirichlet outer boundary; use \
             critical_point_check gradients or pure_scaling_variation on spindles"
                .into(),
        ));
    }
    Ok(())
}

/// λ(t) on the family, Rayleigh-polished, with the normalization drift of
/// ∫ e^{−f} dvol = ∫ u² dvol.
fn lambda_at(family: &MetricFamily, grid: &RadialGrid, t: f64) -> Result<(f64, f64)> {
    let mfd_t = family.manifold_at(t, grid)?;
    let op = spectrum::mode_operator(&mfd_t, grid, 0)?;
    let (lambda, w) = polished_eigenpair(&op, 1)?;
    let vol = mfd_t.cross_section.volume().unwrap_or(1.0);
    let norm: f64 = w.iter().zip(op.mass()).map(|(x, m)| x * x * m).sum();
    let u = op.u_samples(&mfd_t.profile, &w);
    let m_dim = (mfd_t.n - 1) as f64;
    let weight: f64 = u
        .iter()
        .zip(grid.nodes())
        .zip(op.mass())
        .map(|((&uj, &r), &mj)| uj * uj * mfd_t.profile.phi(r).powf(m_dim) * mj)
        .sum::<f64>()
        * vol
        / norm
        / vol;
    Ok((lambda, (weight - 1.0).abs()))
}

/// Geometric first variation on one grid: vol · Σ 2(n−1) δφ/φ ·
/// (−F u²/φ² + 2 (φ′/φ) u u′) φ^{n−1} · quadrature weight, with F the fiber
/// Ricci coefficient. Returns (integral, innermost-decade share, tip flux).
fn geom_on_grid(
    family: &MetricFamily,
    grid: &RadialGrid,
) -> Result<(f64, f64, f64)> {
    let mfd = &family.base;
    let op = spectrum::mode_operator(mfd, grid, 0)?;
    let (_, w) = polished_eigenpair(&op, 1)?;
    let vol = mfd.cross_section.volume().unwrap_or(1.0);
    let mut u = op.u_samples(&mfd.profile, &w);
    for x in &mut u {
        *x /= vol.sqrt();
    }
    let (du, _) = five_point_derivatives(grid, &u)?;
    let r = grid.nodes();
    let m = r.len();
    let m_dim = (mfd.n - 1) as f64;
    let h_log = (r[m - 1].ln() - r[0].ln()) / (m - 1) as f64;
    let mut total = 0.0f64;
    let mut total_abs = 0.0f64;
    let mut inner_abs = 0.0f64;
    let decade = 10.0 * grid.inner_cutoff();
    for j in 0..m {
        let rj = r[j];
        let phi = mfd.profile.phi(rj);
        let psi = mfd.profile.dphi(rj) / phi;
        let (_, fiber) = mfd.ricci_warped(rj)?;
        let d = (family.delta_phi)(rj);
        let pointwise =
            2.0 * m_dim * d / phi * (-fiber * u[j] * u[j] / (phi * phi) + 2.0 * psi * u[j] * du[j]);
        let weight = match grid.grading() {
            Grading::LogUniform => rj * h_log,
            Grading::Uniform => (r[m - 1] - r[0]) / (m - 1) as f64,
        };
        let contrib = vol * pointwise * phi.powf(m_dim) * weight;
        total += contrib;
        total_abs += contrib.abs();
        if rj <= decade {
            inner_abs += contrib.abs();
        }
    }
    let tip_flux = vol
        * mfd.profile.phi(r[0]).powf(m_dim)
        * 2.0
        * (u[0] * du[0]).abs();
    Ok((total, inner_abs / total_abs.max(f64::MIN_POSITIVE), tip_flux))
}

/// First variation of λ at t = 0: Richardson central differences, the exact
/// discrete Hellmann–Feynman derivative, and (for Einstein links) the
/// geometric form, with their agreement residuals. Requires a simple ground
/// state.
pub fn first_variation(family: &MetricFamily, grid: &RadialGrid) -> Result<VariationReport> {
    dirichlet_family_guard(family)?;
    family.validate(grid)?;
    let mfd0 = family.manifold_at(0.0, grid)?;
    let (_, _, simple) = spectrum::ground_state(&mfd0, grid)?;
    if !simple {
        return Err(Error::NumericalFailure(
            "first_variation: degenerate ground state (the one-sided derivative formula \
             does not apply)"
                .into(),
        ));
    }
    let op0 = spectrum::mode_operator(&mfd0, grid, 0)?;
    let (lambda0, v0) = polished_eigenpair(&op0, 1)?;
    let v_norm: f64 = v0.iter().zip(op0.mass()).map(|(x, m)| x * x * m).sum();

    let mu0 = family.base.cross_section.mode(0)?.mu;
    let qd = family.q_dot(mu0);
    let diag1 = stiffness_derivative_diag(&family.base, grid, &qd)?;
    let dlambda_hf: f64 =
        diag1.iter().zip(&v0).map(|(a, v)| a * v * v).sum::<f64>() / v_norm;

    let span = (-family.t_range.0).min(family.t_range.1);
    let h1 = FD_STEP.min(0.4 * span);
    let h2 = h1 / 10.0;
    let ts = [-h1, h1, -h2, h2];
    let samples: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| lambda_at(family, grid, t))
        .collect::<Result<Vec<_>>>()?;
    let d_h1 = (samples[1].0 - samples[0].0) / (2.0 * h1);
    let d_h2 = (samples[3].0 - samples[2].0) / (2.0 * h2);
    let dlambda_fd = (100.0 * d_h2 - d_h1) / 99.0;
    let weight_drift = samples.iter().map(|s| s.1).fold(0.0f64, f64::max);

    let denom = dlambda_hf.abs().max(DERIV_FLOOR * lambda0.abs().max(1.0));
    let fd_hf_rel = (dlambda_fd - dlambda_hf).abs() / denom;

    let (dlambda_geom, geom_hf_rel, inner_flux_fraction) =
        match geom_on_grid(family, grid) {
            Ok((coarse, inner_share, flux)) => {
                let fine_grid = grid.refined()?;
                let (fine, _, _) = geom_on_grid(family, &fine_grid)?;
                let geom = (4.0 * fine - coarse) / 3.0;
                let rel = (geom - dlambda_hf).abs() / denom;
                let fraction = inner_share.max(flux / geom.abs().max(f64::MIN_POSITIVE));
                let fraction = if coarse == 0.0 && fine == 0.0 { 0.0 } else { fraction };
                (Some(geom), Some(rel), Some(fraction))
            }
            Err(Error::Unsupported(_)) => (None, None, None),
            Err(e) => return Err(e),
        };

    Ok(VariationReport {
        lambda0,
        dlambda_fd,
        dlambda_hf,
        dlambda_geom,
        fd_steps: (h1, h2),
        fd_hf_rel,
        geom_hf_rel,
        inner_flux_fraction,
        weight_drift,
    })
}

/// Second variation: 5-point stencil in t against second-order perturbation
/// theory λ″ = v₀ᵀA″v₀ + 2 Σ_k (v_kᵀA′v₀)²/(λ₀−λ_k) over the assembled
/// radial eigenpairs (the mass matrix is constant along the family).
pub fn second_variation_numeric(
    family: &MetricFamily,
    grid: &RadialGrid,
) -> Result<SecondVariation> {
    dirichlet_family_guard(family)?;
    family.validate(grid)?;
    let mfd0 = family.manifold_at(0.0, grid)?;
    let op0 = spectrum::mode_operator(&mfd0, grid, 0)?;
    let (lambda0, v0) = polished_eigenpair(&op0, 1)?;

    let span = (-family.t_range.0).min(family.t_range.1);
    let h = D2_STEP.min(0.4 * span);
    let ts = [-2.0 * h, -h, h, 2.0 * h];
    let samples: Vec<f64> = ts
        .par_iter()
        .map(|&t| lambda_at(family, grid, t).map(|s| s.0))
        .collect::<Result<Vec<_>>>()?;
    let d2lambda_fd = (-samples[3] + 16.0 * samples[2] - 30.0 * lambda0 + 16.0 * samples[1]
        - samples[0])
        / (12.0 * h * h);

    let mu0 = family.base.cross_section.mode(0)?.mu;
    let qd = family.q_dot(mu0);
    let qdd = family.q_ddot(mu0);
    let diag1 = stiffness_derivative_diag(&family.base, grid, &qd)?;
    let diag2 = stiffness_derivative_diag(&family.base, grid, &qdd)?;
    let term1: f64 = diag2.iter().zip(&v0).map(|(a, v)| a * v * v).sum();
    let n_basis = PERT_BASIS.min(grid.len() / 2);
    let tol = SOLVE_REL_TOL * lambda0.abs().max(1.0);
    let others = op0.eigenvalues(2, n_basis, tol)?;
    let mut coupling_sum = 0.0f64;
    for &lk in &others {
        let vk = op0.eigenvector(lk)?;
        let c: f64 = diag1
            .iter()
            .zip(&v0)
            .zip(&vk)
            .map(|((a, x), y)| a * x * y)
            .sum();
        coupling_sum += c * c / (lambda0 - lk);
    }
    let d2lambda_pert = term1 + 2.0 * coupling_sum;
    let rel_gap = (d2lambda_fd - d2lambda_pert).abs()
        / d2lambda_pert.abs().max(DERIV_FLOOR * lambda0.abs().max(1.0));
    Ok(SecondVariation { d2lambda_fd, d2lambda_pert, rel_gap })
}

fn scaled_profile(profile: &Profile, s: f64) -> Result<Profile> {
    match profile.kind() {
        ProfileKind::ExactCone => Profile::exact_cone(s * profile.l()),
        ProfileKind::PerturbedCone { eta, alpha } => {
            Profile::perturbed_cone(eta * s.powf(-alpha), *alpha, s * profile.l())
        }
        ProfileKind::Spindle { c } => Profile::spindle(*c, s * profile.l()),
        ProfileKind::Tabulated { nodes, phi, dphi, d2phi } => Profile::tabulated(
            nodes.iter().map(|&r| s * r).collect(),
            phi.iter().map(|&p| s * p).collect(),
            dphi.clone(),
            d2phi.iter().map(|&p| p / s).collect(),
        ),
    }
}

fn scaled_grid(grid: &RadialGrid, s: f64) -> Result<RadialGrid> {
    match grid.grading() {
        Grading::LogUniform => {
            RadialGrid::log_uniform(s * grid.inner_cutoff(), s * grid.outer_cutoff(), grid.len())
        }
        Grading::Uniform => {
            RadialGrid::uniform(s * grid.inner_cutoff(), s * grid.outer_cutoff(), grid.len())
        }
    }
}

/// Derivatives of λ under the dilation g → (1+t)²g, realized exactly by
/// profile and grid dilation (λ((1+t)²g) = λ(g)/(1+t)² transfers verbatim to
/// the discrete pencil). Richardson over two stencil widths.
pub fn pure_scaling_variation(
    mfd: &SingularManifold,
    grid: &RadialGrid,
) -> Result<ScalingVariation> {
    let lambda_scaled = |t: f64| -> Result<f64> {
        let s = 1.0 + t;
        let profile = scaled_profile(&mfd.profile, s)?;
        let scaled = if mfd.is_diagnostic() {
            SingularManifold::new_diagnostic(
                mfd.n,
                mfd.cross_section.clone(),
                profile,
                mfd.outer_bc,
            )?
        } else {
            SingularManifold::new(mfd.n, mfd.cross_section.clone(), profile, mfd.outer_bc)?
        };
        let g = scaled_grid(grid, s)?;
        let op = spectrum::mode_operator(&scaled, &g, 0)?;
        Ok(polished_eigenpair(&op, 1)?.0)
    };
    let lambda0 = lambda_scaled(0.0)?;
    let h = FD_STEP;
    let ts = [-h, h, -0.5 * h, 0.5 * h];
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&t| lambda_scaled(t))
        .collect::<Result<Vec<_>>>()?;
    let d_h = (vals[1] - vals[0]) / (2.0 * h);
    let d_h2 = (vals[3] - vals[2]) / h;
    let dlambda = (4.0 * d_h2 - d_h) / 3.0;
    let c_h = (vals[1] - 2.0 * lambda0 + vals[0]) / (h * h);
    let c_h2 = (vals[3] - 2.0 * lambda0 + vals[2]) / (0.25 * h * h);
    let d2lambda = (4.0 * c_h2 - c_h) / 3.0;
    Ok(ScalingVariation { lambda0, dlambda, d2lambda })
}

/// Polynomial bump basis for directional gradients: δφ_i = L s²(1−s)² sⁱ
/// with s = r/L (double zeros keep both tip slopes).
fn bump_basis(l: f64, i: usize) -> (
    impl Fn(f64) -> f64,
    impl Fn(f64) -> f64,
    impl Fn(f64) -> f64,
) {
    let p = i as f64;
    let value = move |r: f64| {
        let s = r / l;
        l * s.powf(2.0 + p) * (1.0 - s) * (1.0 - s)
    };
    let deriv = move |r: f64| {
        let s = r / l;
        (2.0 + p) * s.powf(1.0 + p) - 2.0 * (3.0 + p) * s.powf(2.0 + p)
            + (4.0 + p) * s.powf(3.0 + p)
    };
    let second = move |r: f64| {
        let s = r / l;
        ((2.0 + p) * (1.0 + p) * s.powf(p) - 2.0 * (3.0 + p) * (2.0 + p) * s.powf(1.0 + p)
            + (4.0 + p) * (3.0 + p) * s.powf(2.0 + p))
            / l
    };
    (value, deriv, second)
}

/// Criticality defect sup |Ric + Hess f| of the ground gradient-flow data,
/// with Hellmann–Feynman gradients along a polynomial bump basis and the
/// dilation direction. Requires an Einstein cross-section.
pub fn critical_point_check(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    bump_count: usize,
) -> Result<CriticalPointReport> {
    let lv = lambda_value(mfd, grid)?;
    let u = &lv.u.u;
    let (du, d2u) = five_point_derivatives(grid, u)?;
    let m_dim = (mfd.n - 1) as f64;
    let b = grid.outer_cutoff();
    let wall_start = b - WALL_LAYER * (b - grid.inner_cutoff());
    let mut sup = 0.0f64;
    let mut sup_interior = 0.0f64;
    let mut sup_wall = 0.0f64;
    for j in residual_window(mfd, grid) {
        let r = grid.nodes()[j];
        let phi = mfd.profile.phi(r);
        let psi = mfd.profile.dphi(r) / phi;
        let (ric_rr, fiber) = mfd.ricci_warped(r)?;
        let fp = -2.0 * du[j] / u[j];
        let fpp = -2.0 * d2u[j] / u[j] + 2.0 * (du[j] / u[j]) * (du[j] / u[j]);
        let t_rr = (ric_rr + fpp).abs();
        let t_ff = (fiber / (phi * phi) + psi * fp).abs();
        let defect = t_rr.max(t_ff);
        sup = sup.max(defect);
        if r >= wall_start {
            sup_wall = sup_wall.max(defect);
        } else {
            sup_interior = sup_interior.max(defect);
        }
    }
    let dirichlet_breaks_criticality = mfd.outer_bc == OuterBc::Dirichlet
        && sup_wall > WALL_DOMINANCE * sup_interior.max(1e-9);

    let op0 = spectrum::mode_operator(mfd, grid, 0)?;
    let (lambda0, v0) = polished_eigenpair(&op0, 1)?;
    let v_norm: f64 = v0.iter().zip(op0.mass()).map(|(x, m)| x * x * m).sum();
    let mu0 = mfd.cross_section.mode(0)?.mu;
    let m_f = m_dim;
    let l = mfd.profile.l();
    let mut bump_gradient = Vec::with_capacity(bump_count);
    for i in 0..bump_count {
        let (value, deriv, _) = bump_basis(l, i);
        let qd = |r: f64| {
            let phi = mfd.profile.phi(r);
            let psi = mfd.profile.dphi(r) / phi;
            let d = value(r);
            let d1 = deriv(r);
            let psi_dot = (d1 - psi * d) / phi;
            -2.0 * mu0 * d / (phi * phi * phi) - 2.0 * m_f * psi * psi_dot
        };
        let diag1 = stiffness_derivative_diag(mfd, grid, &qd)?;
        bump_gradient
            .push(diag1.iter().zip(&v0).map(|(a, v)| a * v * v).sum::<f64>() / v_norm);
    }
    let scaling_gradient = pure_scaling_variation(mfd, grid)?.dlambda;
    let _ = lambda0;
    Ok(CriticalPointReport {
        sup_ric_hess: sup,
        sup_interior,
        dirichlet_breaks_criticality,
        bump_gradient,
        scaling_gradient,
    })
}
