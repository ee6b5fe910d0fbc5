//! Per-mode radial problems: the ODE −4u″ − 4(n−1)φ′/φ·u′ + [μ/φ² −
//! curvature terms]·u = λu reduced through the Liouville substitution
//! w = φ^{(n−1)/2} u to the Schrödinger form −4w″ + Q w = λ w, its
//! Friedrichs-selecting discretization, closed-form solutions on exact cones,
//! and the Hardy positivity diagnostics.

use crate::error::{Error, Result};
use crate::geometry::{Profile, ProfileKind};
use crate::special_fn;
use crate::tridiag_eig::{Pencil, SymTridiag};

/// Modes with ν_eff below this are limit-circle at the tip: both indicial
/// branches are square integrable and the discretization must select the
/// Friedrichs one through a Robin condition at the cutoff.
pub const LIMIT_CIRCLE_NU: f64 = 1.0;

/// One separated mode: dimension, link eigenvalue and warp profile.
#[derive(Debug, Clone)]
pub struct ModeODE {
    pub n: usize,
    pub mu: f64,
    profile: Profile,
}

impl ModeODE {
    pub fn new(n: usize, mu: f64, profile: Profile) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("ModeODE: n = {n} < 3")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("ModeODE: mu = {mu} not finite")));
        }
        Ok(Self { n, mu, profile })
    }

    #[must_use]
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Indicial datum ν = √(μ − (n−2)) of the unit-slope cone.
    pub fn nu(&self) -> Result<f64> {
        let shifted = self.mu - (self.n as f64 - 2.0);
        if shifted <= 0.0 {
            return Err(Error::SubcriticalMode { index: 0, deficit: shifted });
        }
        Ok(shifted.sqrt())
    }

    /// Tip exponent datum for the actual tip slope c₀: ν_eff = √(μ/c₀² −
    /// (n−2)); governs the limit-circle/limit-point split at the tip.
    pub fn nu_effective(&self) -> Result<f64> {
        let c0 = self.profile.c0();
        let shifted = self.mu / (c0 * c0) - (self.n as f64 - 2.0);
        if shifted <= 0.0 {
            return Err(Error::SubcriticalMode { index: 0, deficit: shifted });
        }
        Ok(shifted.sqrt())
    }

    /// Whether the tip exponent is nonreal (Hardy-subcritical mode).
    #[must_use]
    pub fn is_subcritical(&self) -> bool {
        let c0 = self.profile.c0();
        self.mu / (c0 * c0) <= self.n as f64 - 2.0
    }

    /// Schrödinger potential of the w-form: Q(r) = μ/φ² − (n−1)(φ′/φ)².
    #[must_use]
    pub fn q(&self, r: f64) -> f64 {
        let phi = self.profile.phi(r);
        let lp = self.profile.dphi(r) / phi;
        self.mu / (phi * phi) - (self.n as f64 - 1.0) * lp * lp
    }
}

/// The w-form potential as a standalone closure (same formula as
/// [`ModeODE::q`]).
pub fn mode_potential(n: usize, mu: f64, profile: &Profile) -> impl Fn(f64) -> f64 + '_ {
    let m = n as f64 - 1.0;
    move |r: f64| {
        let phi = profile.phi(r);
        let lp = profile.dphi(r) / phi;
        mu / (phi * phi) - m * lp * lp
    }
}

/// Liouville transform u → w = φ^{(n−1)/2} u at one radius.
#[must_use]
pub fn to_w(profile: &Profile, n: usize, r: f64, u: f64) -> f64 {
    u * profile.phi(r).powf((n as f64 - 1.0) / 2.0)
}

/// Inverse Liouville transform w → u = φ^{−(n−1)/2} w.
#[must_use]
pub fn to_u(profile: &Profile, n: usize, r: f64, w: f64) -> f64 {
    w * profile.phi(r).powf(-(n as f64 - 1.0) / 2.0)
}

/// Node spacing law of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    /// Geometric nodes: r_{j+1}/r_j constant (needs a > 0).
    LogUniform,
    Uniform,
}

/// M interior nodes strictly inside a span [a, b]; the discretization places
/// boundary conditions at a and b.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    /// Geometric grid: r_j = a (b/a)^{j/(M+1)}, j = 1..M.
    pub fn log_uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidParameter(format!(
                "log_uniform grid: need 0 < a < b (a = {a}, b = {b})"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("grid: M = 0".into()));
        }
        let ratio = b / a;
        let nodes = (1..=m)
            .map(|j| a * ratio.powf(j as f64 / (m + 1) as f64))
            .collect();
        Ok(Self { a, b, nodes, grading: Grading::LogUniform })
    }

    /// Uniform grid: r_j = a + j(b−a)/(M+1), j = 1..M (a = 0 allowed).
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a >= 0.0 && b > a) {
            return Err(Error::InvalidParameter(format!(
                "uniform grid: need 0 <= a < b (a = {a}, b = {b})"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("grid: M = 0".into()));
        }
        let h = (b - a) / (m + 1) as f64;
        let nodes = (1..=m).map(|j| a + h * j as f64).collect();
        Ok(Self { a, b, nodes, grading: Grading::Uniform })
    }

    /// Default grid for spectra: log-uniform with a = 1e−6·L, M = 2048.
    pub fn default_for(l: f64) -> Result<Self> {
        Self::log_uniform(1e-6 * l, l, 2048)
    }

    /// Nested refinement: M′ + 1 = 2(M + 1), same span and grading; every
    /// coarse node reappears as a fine node (coarse j ↔ fine 2j + 1,
    /// 0-based).
    pub fn refined(&self) -> Result<Self> {
        let m2 = 2 * (self.nodes.len() + 1) - 1;
        match self.grading {
            Grading::LogUniform => Self::log_uniform(self.a, self.b, m2),
            Grading::Uniform => Self::uniform(self.a, self.b, m2),
        }
    }

    #[must_use]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[must_use]
    pub fn inner_cutoff(&self) -> f64 {
        self.a
    }

    #[must_use]
    pub fn outer_cutoff(&self) -> f64 {
        self.b
    }

    #[must_use]
    pub fn grading(&self) -> Grading {
        self.grading
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Boundary treatment at a grid cutoff next to a conical tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerBc {
    /// Limit-circle regime (ν_eff < 1): Robin condition w′/w = s/r_cut with
    /// s = (1+ν_eff)/2, realized by eliminating the cutoff node against the
    /// Friedrichs power law; `slope` stores s.
    Robin { slope: f64 },
    /// Limit-point regime (ν_eff ≥ 1) or diagnostic subcritical mode.
    Dirichlet,
}

/// Treatment of the outer span end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterTreatment {
    /// Hard wall at r = b.
    Dirichlet,
    /// b is a cutoff next to a second conical tip at r = L (spindles); the
    /// same limit-circle rules apply mirrored.
    ConicalTip,
}

/// Discretized w-form operator: the generalized pencil A w = λ D w from P1
/// finite elements (stiffness coefficient 4) with lumped mass on the grid.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    grid: RadialGrid,
    pencil: Pencil,
    inner_bc: InnerBc,
    outer_bc: InnerBc,
    diagnostic: bool,
    q_min: f64,
    n: usize,
    mu: f64,
}

/// Discretize with a Dirichlet outer wall (the finite-cone setting).
pub fn discretize(mode: &ModeODE, grid: &RadialGrid) -> Result<ModeOperator> {
    discretize_with_outer(mode, grid, OuterTreatment::Dirichlet)
}

/// Discretize with an explicit outer treatment (spindles use `ConicalTip`).
pub fn discretize_with_outer(
    mode: &ModeODE,
    grid: &RadialGrid,
    outer: OuterTreatment,
) -> Result<ModeOperator> {
    let m = grid.len();
    let nodes = grid.nodes();
    let a = grid.inner_cutoff();
    let b = grid.outer_cutoff();
    if b > mode.profile().l() + 1e-12 * mode.profile().l() {
        return Err(Error::InvalidParameter(format!(
            "grid outer cutoff {b} beyond profile domain {}",
            mode.profile().l()
        )));
    }
    // The tip exponent decides the boundary handling; subcritical modes are
    // built anyway (Dirichlet) and tagged diagnostic.
    let (inner_bc, diagnostic) = match mode.nu_effective() {
        Ok(nu_eff) if nu_eff < LIMIT_CIRCLE_NU => {
            if a <= 0.0 {
                return Err(Error::InvalidParameter(
                    "limit-circle mode needs a positive inner cutoff for the Robin condition".into(),
                ));
            }
            (InnerBc::Robin { slope: 0.5 * (1.0 + nu_eff) }, false)
        }
        Ok(_) => (InnerBc::Dirichlet, false),
        Err(_) => (InnerBc::Dirichlet, true),
    };
    let outer_bc = match outer {
        OuterTreatment::Dirichlet => InnerBc::Dirichlet,
        OuterTreatment::ConicalTip => {
            let l = mode.profile().l();
            if b >= l {
                return Err(Error::InvalidParameter(
                    "ConicalTip outer treatment needs b strictly below L".into(),
                ));
            }
            match mode.nu_effective() {
                Ok(nu_eff) if nu_eff < LIMIT_CIRCLE_NU => InnerBc::Robin { slope: 0.5 * (1.0 + nu_eff) },
                _ => InnerBc::Dirichlet,
            }
        }
    };

    // Full node line including boundary points.
    let mut x = Vec::with_capacity(m + 2);
    x.push(a);
    x.extend_from_slice(nodes);
    x.push(b);
    let h = |j: usize| x[j + 1] - x[j];

    let mut diag = vec![0.0f64; m];
    let mut off = vec![0.0f64; m - 1];
    let mut mass = vec![0.0f64; m];
    let mut q_min = f64::INFINITY;
    for j in 1..=m {
        let i = j - 1;
        let qj = mode.q(x[j]);
        q_min = q_min.min(qj);
        let mj = 0.5 * (h(j - 1) + h(j));
        diag[i] = 4.0 / h(j - 1) + 4.0 / h(j) + qj * mj;
        mass[i] = mj;
        if j < m {
            off[i] = -4.0 / h(j);
        }
    }
    if let InnerBc::Robin { slope } = inner_bc {
        // Eliminate the cutoff node w₀ against the Friedrichs power law
        // w ∝ r^s: w₀ = ρ w₁ with ρ = (r₀/r₁)^s. The Robin boundary energy
        // 4s/r₀·w₀² equals the exact sub-cutoff Dirichlet energy of the power
        // law, and the sub-cutoff mass r₀/(2s+1) is carried along.
        let nu_eff = 2.0 * slope - 1.0;
        let rho = (x[0] / x[1]).powf(slope);
        let q0 = mode.q(x[0]);
        diag[0] = 4.0 / h(1) + 4.0 * (1.0 - rho) * (1.0 - rho) / h(0)
            + mode.q(x[1]) * (0.5 * (h(0) + h(1)))
            + rho * rho * (q0 * 0.5 * h(0) + 4.0 * slope / x[0]);
        mass[0] = 0.5 * (h(0) + h(1)) + rho * rho * (0.5 * h(0) + x[0] / (2.0 + nu_eff));
    }
    if let InnerBc::Robin { slope } = outer_bc {
        // Mirrored elimination at the outer cutoff, in tip distance d = L − r.
        let l = mode.profile().l();
        let nu_eff = 2.0 * slope - 1.0;
        let d_b = l - x[m + 1];
        let d_m = l - x[m];
        let rho = (d_b / d_m).powf(slope);
        let qb = mode.q(x[m + 1]);
        let i = m - 1;
        diag[i] = 4.0 / h(m - 1) + 4.0 * (1.0 - rho) * (1.0 - rho) / h(m)
            + mode.q(x[m]) * (0.5 * (h(m - 1) + h(m)))
            + rho * rho * (qb * 0.5 * h(m) + 4.0 * slope / d_b);
        mass[i] = 0.5 * (h(m - 1) + h(m)) + rho * rho * (0.5 * h(m) + d_b / (2.0 + nu_eff));
    }
    let stiff = SymTridiag::new(diag, off)?;
    let pencil = Pencil::new(stiff, mass)?;
    Ok(ModeOperator {
        grid: grid.clone(),
        pencil,
        inner_bc,
        outer_bc,
        diagnostic,
        q_min,
        n: mode.n,
        mu: mode.mu,
    })
}

impl ModeOperator {
    #[must_use]
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    #[must_use]
    pub fn inner_bc(&self) -> InnerBc {
        self.inner_bc
    }

    #[must_use]
    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Lumped node masses (the diagonal of D).
    #[must_use]
    pub fn mass(&self) -> &[f64] {
        &self.pencil.mass
    }

    #[must_use]
    pub fn pencil(&self) -> &Pencil {
        &self.pencil
    }

    /// Diagonal of the mass-symmetrized matrix D^{-1/2} A D^{-1/2} (for
    /// inspection; eigen-solves go through the pencil directly).
    #[must_use]
    pub fn diag(&self) -> Vec<f64> {
        self.pencil
            .stiff
            .diag
            .iter()
            .zip(&self.pencil.mass)
            .map(|(a, m)| a / m)
            .collect()
    }

    /// Off-diagonal of D^{-1/2} A D^{-1/2}.
    #[must_use]
    pub fn offdiag(&self) -> Vec<f64> {
        let mass = &self.pencil.mass;
        self.pencil
            .stiff
            .off
            .iter()
            .enumerate()
            .map(|(i, o)| o / (mass[i] * mass[i + 1]).sqrt())
            .collect()
    }

    pub fn eigenvalues(&self, k_lo: usize, k_hi: usize, abs_tol: f64) -> Result<Vec<f64>> {
        self.pencil.eigenvalues(k_lo, k_hi, abs_tol)
    }

    /// w-eigenvector, D-normalized (Σ w² m = 1 ≈ ∫ w² dr).
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        self.pencil.eigenvector(lambda)
    }

    #[must_use]
    pub fn count_below(&self, x: f64) -> usize {
        self.pencil.count_below(x)
    }

    /// Certified lower bound for every eigenvalue of this mode operator:
    /// min Q plus the flat Poincaré gap of −4 d²/ds² on the span (quarter-wave
    /// when a Robin end weakens the wall).
    #[must_use]
    pub fn certified_lower_bound(&self) -> f64 {
        let span = self.grid.outer_cutoff() - self.grid.inner_cutoff();
        let robin = matches!(self.inner_bc, InnerBc::Robin { .. })
            || matches!(self.outer_bc, InnerBc::Robin { .. });
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let gap = if robin { pi2 / (span * span) } else { 4.0 * pi2 / (span * span) };
        self.q_min + gap
    }

    /// Min of Q over the grid nodes.
    #[must_use]
    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    /// Back-transform a w-vector to u samples at the grid nodes.
    #[must_use]
    pub fn u_samples(&self, profile: &Profile, w: &[f64]) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(w)
            .map(|(&r, &wj)| to_u(profile, self.n, r, wj))
            .collect()
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Hardy positivity verdict for one mode.
#[derive(Debug, Clone, Copy)]
pub struct HardyReport {
    /// μ − (n−2): the margin of the w-form coefficient over the Hardy
    /// constant −1/4 (scaled by 4).
    pub coefficient: f64,
    /// Quadratic form bounded below ⇔ coefficient ≥ 0.
    pub semibounded: bool,
    /// Strictly positive form ⇔ coefficient > 0.
    pub strictly_positive: bool,
}

#[must_use]
pub fn hardy_report(mode: &ModeODE) -> HardyReport {
    let coefficient = mode.mu - (mode.n as f64 - 2.0);
    HardyReport {
        coefficient,
        semibounded: coefficient >= 0.0,
        strictly_positive: coefficient > 0.0,
    }
}

/// δ₀ for the link: half the supremum of δ₀ > 0 with
/// scal_min > (n−1)(n−2) − ((4−δ₀)/4)[(n−1)(n−3)+1] + δ₀.
pub fn compute_delta0(cs: &crate::cross_section::CrossSection, n: usize) -> Result<f64> {
    let report = cs.check_cone_condition(n)?;
    if !report.admissible {
        return Err(Error::NoAdmissibleDelta { margin: report.margin });
    }
    let nf = n as f64;
    let k = (nf - 1.0) * (nf - 3.0) + 1.0;
    let sup = (cs.scal_min() - (nf - 1.0) * (nf - 2.0) + k) / (1.0 + k / 4.0);
    if sup <= 0.0 {
        return Err(Error::NoAdmissibleDelta { margin: report.margin });
    }
    Ok(0.5 * sup)
}

/// Which closed-form fundamental solution to take on the exact cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Behaves as r^{−(n−2)/2 + ν/2} at the tip; square-integrable energy.
    Friedrichs,
    /// The rejected branch r^{−(n−2)/2 − ν/2} (for residual tests only; its
    /// overall normalization is a convention of this crate).
    Second,
}

/// Closed-form mode solution on the exact cone.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    n: usize,
    nu: f64,
    lambda: f64,
    branch: Branch,
}

/// Closed-form radial solution u(r) of the mode ODE on an exact cone:
/// power laws at λ = 0, Bessel J/Y at λ > 0, Kummer forms at λ < 0.
pub fn closed_form_solution(mode: &ModeODE, lambda: f64, branch: Branch) -> Result<ClosedFormSolution> {
    if !matches!(mode.profile().kind(), ProfileKind::ExactCone) {
        return Err(Error::Unsupported(
            "closed-form solutions exist only on the exact cone".into(),
        ));
    }
    let nu = mode.nu()?;
    if branch == Branch::Second && lambda < 0.0 {
        let b = 1.0 + nu;
        let is_int = (b - b.round()).abs() < 1e-9;
        if is_int && b.round() < 1.0 {
            return Err(Error::Unsupported(format!("second branch with 1+nu = {b} < 1")));
        }
    }
    Ok(ClosedFormSolution { n: mode.n, nu, lambda, branch })
}

impl ClosedFormSolution {
    /// Evaluate u(r), r > 0.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("closed form: r = {r} <= 0")));
        }
        let spow = -(self.n as f64 - 2.0) / 2.0;
        let nu = self.nu;
        match self.branch {
            Branch::Friedrichs => {
                if self.lambda == 0.0 {
                    Ok(r.powf(spow + nu / 2.0))
                } else if self.lambda > 0.0 {
                    let z = self.lambda.sqrt() * r / 2.0;
                    Ok(r.powf(spow) * special_fn::bessel_j(nu / 2.0, z)?)
                } else {
                    // r^{s+} e^{−z/2} M((1+ν)/2, 1+ν, z), z = √|λ| r.
                    let z = (-self.lambda).sqrt() * r;
                    let m = special_fn::kummer_m(0.5 * (1.0 + nu), 1.0 + nu, z)?;
                    Ok(r.powf(spow + nu / 2.0) * (-0.5 * z).exp() * m)
                }
            }
            Branch::Second => {
                if self.lambda == 0.0 {
                    Ok(r.powf(spow - nu / 2.0))
                } else if self.lambda > 0.0 {
                    let z = self.lambda.sqrt() * r / 2.0;
                    Ok(r.powf(spow) * special_fn::bessel_y(nu / 2.0, z)?)
                } else {
                    let z = (-self.lambda).sqrt() * r;
                    let b = 1.0 + nu;
                    if (b - b.round()).abs() < 1e-9 {
                        // Integer 1+ν: the log/digamma Kummer-U form.
                        let b_int = b.round() as u32;
                        let u = special_fn::kummer_u_integer(0.5 * (1.0 + nu), b_int, z)?;
                        Ok(r.powf(spow + nu / 2.0) * (-0.5 * z).exp() * u)
                    } else {
                        let m = special_fn::kummer_m(0.5 * (1.0 - nu), 1.0 - nu, z)?;
                        Ok(r.powf(spow - nu / 2.0) * (-0.5 * z).exp() * m)
                    }
                }
            }
        }
    }

    #[must_use]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[must_use]
    pub fn branch(&self) -> Branch {
        self.branch
    }
}

/// Maximum relative residual of the exact-cone mode ODE for a candidate u over
/// the sample radii.
///
/// The residual is formed in the w-variable, −4w″ + [μ−(n−1)]/r²·w − λw, with
/// fourth-order five-point stencils at spacings η·r and η·r/2 combined by
/// Richardson extrapolation; each residual is scaled by the largest term of
/// the equation near that radius.
pub fn ode_residual_max(
    u: &dyn Fn(f64) -> Result<f64>,
    n: usize,
    mu: f64,
    lambda: f64,
    samples: &[f64],
    eta: f64,
) -> Result<f64> {
    let qc = mu - (n as f64 - 1.0);
    let half_m = (n as f64 - 1.0) / 2.0;
    let w = |r: f64| -> Result<f64> { Ok(u(r)? * r.powf(half_m)) };
    let mut worst = 0.0f64;
    for &r in samples {
        let resid_at = |h: f64| -> Result<(f64, f64)> {
            let wm2 = w(r - 2.0 * h)?;
            let wm1 = w(r - h)?;
            let w0 = w(r)?;
            let wp1 = w(r + h)?;
            let wp2 = w(r + 2.0 * h)?;
            let d2 = (-wm2 + 16.0 * wm1 - 30.0 * w0 + 16.0 * wp1 - wp2) / (12.0 * h * h);
            let wmax = wm2.abs().max(wm1.abs()).max(w0.abs()).max(wp1.abs()).max(wp2.abs());
            Ok((-4.0 * d2 + qc / (r * r) * w0 - lambda * w0, wmax))
        };
        let (v1, wmax) = resid_at(eta * r)?;
        let (v2, _) = resid_at(0.5 * eta * r)?;
        let extrap = (16.0 * v2 - v1) / 15.0;
        let w0 = w(r)?;
        let scale = (lambda.abs() * wmax)
            .max((qc / (r * r) * w0).abs())
            .max(f64::MIN_POSITIVE);
        worst = worst.max(extrap.abs() / scale);
    }
    Ok(worst)
}

/// Eigenvalue k on the grid and on its nested refinement, combined by
/// Richardson extrapolation (the scheme is second order, so (4λ_f − λ_c)/3).
pub fn eigenvalue_richardson(
    mode: &ModeODE,
    grid: &RadialGrid,
    k: usize,
    abs_tol: f64,
) -> Result<f64> {
    let coarse = discretize(mode, grid)?;
    let fine = discretize(mode, &grid.refined()?)?;
    let lc = coarse.eigenvalues(k, k, abs_tol)?[0];
    let lf = fine.eigenvalues(k, k, abs_tol)?[0];
    Ok((4.0 * lf - lc) / 3.0)
}

/// Eigen-pair on the coarse grid improved by its nested refinement: returns
/// the extrapolated eigenvalue and the extrapolated w-vector at the coarse
/// nodes (fine node 2j+1 sits on coarse node j).
pub fn eigenpair_richardson(
    mode: &ModeODE,
    grid: &RadialGrid,
    k: usize,
    abs_tol: f64,
) -> Result<(f64, Vec<f64>)> {
    let coarse = discretize(mode, grid)?;
    let fine_grid = grid.refined()?;
    let fine = discretize(mode, &fine_grid)?;
    let lc = coarse.eigenvalues(k, k, abs_tol)?[0];
    let lf = fine.eigenvalues(k, k, abs_tol)?[0];
    let wc = coarse.eigenvector(lc)?;
    let wf = fine.eigenvector(lf)?;
    let wf_at_coarse: Vec<f64> = (0..wc.len()).map(|j| wf[2 * j + 1]).collect();
    // Align scale and sign of the two discrete eigenvectors before combining.
    let num: f64 = wf_at_coarse.iter().zip(&wc).map(|(a, b)| a * b).sum();
    let den: f64 = wc.iter().map(|b| b * b).sum();
    let alpha = num / den;
    let w_extrap: Vec<f64> = wf_at_coarse
        .iter()
        .zip(&wc)
        .map(|(f, c)| (4.0 * f - alpha * c) / 3.0)
        .collect();
    Ok(((4.0 * lf - lc) / 3.0, w_extrap))
}
