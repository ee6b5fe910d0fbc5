//! Weighted Sobolev and weighted uniform norms on radial grid functions,
//! the cone–cylinder comparison inequality, and the discrete weighted H¹
//! Gram form.
//!
//! The weight χ equals 1/r on the conical part and 1 outside, joined by a
//! smooth monotone interpolation: χ⁻¹ = r^{1−s} with a quintic smoothstep s
//! across the transition annulus. All quadrature is the trapezoid rule in
//! log r on geometric grids.

use crate::cross_section::CrossSection;
use crate::error::{Error, Result};
use crate::geometry::SingularManifold;
use crate::radial_modes::{Grading, RadialGrid};
use crate::tridiag_eig::{Pencil, SymTridiag};

/// The conical part ends at this fraction of the weight anchor ε_w.
const WEIGHT_CONE_FRACTION: f64 = 0.25;
/// Dyadic decades examined by the divergence detector.
const DIVERGENCE_DECADES: usize = 3;
/// A decade tail that shrinks slower than this factor flags divergence.
const DIVERGENCE_RATIO: f64 = 0.5;
/// Decade contributions below this fraction of the total never flag.
const DIVERGENCE_FLOOR: f64 = 1e-14;
/// Tolerated sample magnitude (relative) at the support boundary.
const SUPPORT_TOL: f64 = 1e-9;

/// A computed weighted norm: √(Σ_{i≤k} ∫ χ^{2(δ−i)+n} |∇ⁱu|² dvol).
/// `value` is +∞ when the log-r sums fail to converge under the decade test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    pub k: usize,
    pub delta: f64,
    pub value: f64,
}

/// Quintic smoothstep: 0 below 0, 1 above 1, C² monotone between.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Weight χ(r) ≥ 1 with anchor ε_w: 1/r up to ε_w/4, 1 beyond ε_w,
/// χ = r^{s−1} on the transition annulus.
#[must_use]
pub fn weight_chi(r: f64, eps_w: f64) -> f64 {
    if r <= eps_w * WEIGHT_CONE_FRACTION {
        1.0 / r
    } else if r >= eps_w {
        1.0
    } else {
        let x = (r - eps_w * WEIGHT_CONE_FRACTION) / (eps_w * (1.0 - WEIGHT_CONE_FRACTION));
        let s = smoothstep(x);
        ((s - 1.0) * r.ln()).exp()
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn require_log_grid(grid: &RadialGrid) -> Result<f64> {
    if grid.grading() != Grading::LogUniform {
        return Err(Error::InvalidParameter(
            "weighted norms need a log-uniform grid (trapezoid rule in log r)".into(),
        ));
    }
    let span = (grid.outer_cutoff() / grid.inner_cutoff()).ln();
    Ok(span / (grid.len() + 1) as f64)
}

/// First and second log-derivatives du/dt, d²u/dt² (t = ln r) of samples on a
/// log-uniform grid, second-order one-sided at the ends.
fn log_derivatives(u: &[f64], h_t: f64) -> (Vec<f64>, Vec<f64>) {
    let m = u.len();
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for j in 0..m {
        if j == 0 {
            d1[j] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h_t);
            d2[j] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h_t * h_t);
        } else if j == m - 1 {
            d1[j] = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h_t);
            d2[j] = (2.0 * u[m - 1] - 5.0 * u[m - 2] + 4.0 * u[m - 3] - u[m - 4]) / (h_t * h_t);
        } else {
            d1[j] = (u[j + 1] - u[j - 1]) / (2.0 * h_t);
            d2[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h_t * h_t);
        }
    }
    (d1, d2)
}

/// Radial derivatives u′, u″ from log-derivatives: u′ = u_t/r,
/// u″ = (u_tt − u_t)/r².
fn radial_derivatives(u: &[f64], nodes: &[f64], h_t: f64) -> (Vec<f64>, Vec<f64>) {
    let (d1, d2) = log_derivatives(u, h_t);
    let du: Vec<f64> = d1.iter().zip(nodes).map(|(v, &r)| v / r).collect();
    let d2u: Vec<f64> =
        d2.iter().zip(&d1).zip(nodes).map(|((a, b), &r)| (a - b) / (r * r)).collect();
    (du, d2u)
}

/// Weighted Sobolev norm of a radial grid function on the manifold
/// (k ≤ 2; the Hessian of a radial function is u″dr² + φφ′u′h₀).
///
/// Returns value +∞ when the innermost decades of the quadrature refuse to
/// shrink (the integral diverges at the tip).
pub fn h_norm(
    u: &[f64],
    k: usize,
    delta: f64,
    mfd: &SingularManifold,
    grid: &RadialGrid,
) -> Result<WeightedNorm> {
    if k > 2 {
        return Err(Error::Unsupported(format!(
            "h_norm: k = {k} > 2 (second derivatives are the highest implemented)"
        )));
    }
    if u.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "h_norm: {} samples on a grid of {} nodes",
            u.len(),
            grid.len()
        )));
    }
    if u.iter().any(|x| !x.is_finite()) || !delta.is_finite() {
        return Err(Error::InvalidParameter("h_norm: non-finite input".into()));
    }
    let h_t = require_log_grid(grid)?;
    if grid.len() < 4 {
        return Err(Error::InvalidParameter("h_norm: need at least 4 nodes".into()));
    }
    let nodes = grid.nodes();
    let n = mfd.n as f64;
    let eps_w = mfd.profile.l().min(1.0);
    let vol = mfd.cross_section.volume().unwrap_or(1.0);
    let (du, d2u) = radial_derivatives(u, nodes, h_t);
    // Per-node contribution to the squared norm: all derivative orders,
    // trapezoid in t with vanishing-end convention (dr = r dt).
    let contrib: Vec<f64> = (0..u.len())
        .map(|j| {
            let r = nodes[j];
            let phi = mfd.profile.phi(r);
            let dphi = mfd.profile.dphi(r);
            let chi = weight_chi(r, eps_w);
            let dvol = phi.powf(n - 1.0) * vol;
            let mut sum = chi.powf(2.0 * delta + n) * u[j] * u[j];
            if k >= 1 {
                sum += chi.powf(2.0 * (delta - 1.0) + n) * du[j] * du[j];
            }
            if k >= 2 {
                let hess2 = d2u[j] * d2u[j]
                    + (n - 1.0) * (dphi * du[j] / phi) * (dphi * du[j] / phi);
                sum += chi.powf(2.0 * (delta - 2.0) + n) * hess2;
            }
            sum * dvol * r * h_t
        })
        .collect();
    let total = kahan_sum(contrib.iter().copied());
    // Divergence detector: the innermost decades must shrink geometrically.
    let a = grid.inner_cutoff();
    let deep_enough =
        grid.outer_cutoff() / a >= 10f64.powi(DIVERGENCE_DECADES as i32 + 1);
    if deep_enough && total > 0.0 {
        let mut decade = vec![0.0f64; DIVERGENCE_DECADES];
        for (j, c) in contrib.iter().enumerate() {
            let d = (nodes[j] / a).log10().floor() as usize;
            if d < DIVERGENCE_DECADES {
                decade[d] += c;
            }
        }
        let stalled = (0..DIVERGENCE_DECADES - 1)
            .all(|d| decade[d] >= DIVERGENCE_RATIO * decade[d + 1]);
        if stalled && decade[0] > DIVERGENCE_FLOOR * total {
            return Ok(WeightedNorm { k, delta, value: f64::INFINITY });
        }
    }
    Ok(WeightedNorm { k, delta, value: total.sqrt() })
}

/// One mode-wise component of a function on the cone (0,ε)×N: the radial
/// factor and its analytic derivative.
pub struct ModeComponent<'a> {
    pub mode_index: usize,
    pub u: &'a dyn Fn(f64) -> f64,
    pub du: &'a dyn Fn(f64) -> f64,
}

/// Verdict of the cone–cylinder comparison on compactly supported data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCylinderReport {
    /// Weighted H¹ squared norm on the cone.
    pub lhs: f64,
    /// (3/4)·min{1, 1/ε²} times the cylinder W^{1,2} squared norm.
    pub rhs: f64,
    pub pass: bool,
    /// The same lhs through the mode-wise identity in ũ = r^{(n−1)/2}u.
    pub identity_lhs: f64,
    pub identity_rel_err: f64,
}

/// Trapezoid in log r over the interior nodes, Richardson-extrapolated with
/// the nested refinement (kills the h² Euler–Maclaurin term).
fn log_quad_richardson(
    grid: &RadialGrid,
    f: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let coarse = quad_on(grid, f)?;
    let fine = quad_on(&grid.refined()?, f)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn quad_on(grid: &RadialGrid, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let h_t = require_log_grid(grid)?;
    Ok(h_t * kahan_sum(grid.nodes().iter().map(|&r| f(r) * r)))
}

/// Cone–cylinder inequality check for mode-wise data supported in (0, ε)×N:
/// lhs = ‖u‖² in the weighted H¹ of the cone, rhs = (3/4)min{1,1/ε²} times
/// the W^{1,2} squared norm of ũ = r^{(n−1)/2}u on the cylinder, and the
/// mode-wise identity rewriting of lhs. The fiber numbers are the Laplacian
/// eigenvalues κ_i = (μ_i − scal_min)/4 of the link.
pub fn cone_cylinder_check(
    components: &[ModeComponent<'_>],
    epsilon: f64,
    cross_section: &CrossSection,
    n: usize,
    m_nodes: usize,
) -> Result<ConeCylinderReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("cone_cylinder_check: epsilon = {epsilon}")));
    }
    if n != cross_section.fiber_dim() + 1 {
        return Err(Error::InvalidParameter(format!(
            "cone_cylinder_check: n = {n} incompatible with fiber_dim = {}",
            cross_section.fiber_dim()
        )));
    }
    let grid = RadialGrid::log_uniform(1e-6 * epsilon, epsilon, m_nodes)?;
    let nf = n as f64;
    let mut lhs = 0.0;
    let mut identity_lhs = 0.0;
    let mut cylinder = 0.0;
    for comp in components {
        // Support check: the radial factor must vanish at the outer edge.
        let probe: f64 = grid.nodes().iter().map(|&r| (comp.u)(r).abs()).fold(0.0, f64::max);
        let edge = (comp.u)(epsilon * (1.0 - 1e-12)).abs();
        if probe > 0.0 && edge > SUPPORT_TOL * probe {
            return Err(Error::InvalidParameter(format!(
                "cone_cylinder_check: mode {} not supported in (0, ε) (edge value {edge:.3e})",
                comp.mode_index
            )));
        }
        let mu = cross_section.mode(comp.mode_index)?.mu;
        let kappa = (mu - cross_section.scal_min()) / 4.0;
        let c_id = 1.0 + (nf - 1.0) * (nf - 3.0) / 4.0 + kappa;
        // Direct weighted H¹ integrand: (u′)² + κu²/r² (gradient) and the
        // χ² L² term u²/r², all against r^{n−1}dr.
        lhs += log_quad_richardson(&grid, &|r: f64| {
            let u = (comp.u)(r);
            let du = (comp.du)(r);
            (du * du + (kappa + 1.0) * u * u / (r * r)) * r.powf(nf - 1.0)
        })?;
        // Identity form in ũ: (ũ′)² + (1 + (n−1)(n−3)/4 + κ)ũ²/r².
        identity_lhs += log_quad_richardson(&grid, &|r: f64| {
            let u = (comp.u)(r);
            let du = (comp.du)(r);
            let p = r.powf((nf - 1.0) / 2.0);
            let ut = p * u;
            let dut = p * (du + (nf - 1.0) * u / (2.0 * r));
            dut * dut + c_id * ut * ut / (r * r)
        })?;
        // Cylinder W^{1,2}: (∂_t ũ)² + (κ + 1)ũ² against dt = dr/r.
        cylinder += log_quad_richardson(&grid, &|r: f64| {
            let u = (comp.u)(r);
            let du = (comp.du)(r);
            let p = r.powf((nf - 1.0) / 2.0);
            let ut = p * u;
            let dut = p * (du + (nf - 1.0) * u / (2.0 * r));
            (r * dut * dut + (kappa + 1.0) * ut * ut / r) / 1.0
        })?;
    }
    let factor = 0.75 * (1.0f64).min(1.0 / (epsilon * epsilon));
    let rhs = factor * cylinder;
    let scale = lhs.abs().max(f64::MIN_POSITIVE);
    Ok(ConeCylinderReport {
        lhs,
        rhs,
        pass: lhs >= rhs - 1e-10,
        identity_lhs,
        identity_rel_err: (lhs - identity_lhs).abs() / scale,
    })
}

/// Weighted uniform norm on the cone: sup over nodes of
/// Σ_{i≤l} r^{i−δ}|∇ⁱu| (l ≤ 1).
pub fn c_norm(u: &[f64], l: usize, delta: f64, grid: &RadialGrid) -> Result<f64> {
    if l > 1 {
        return Err(Error::Unsupported(format!("c_norm: l = {l} > 1")));
    }
    if u.len() != grid.len() || u.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "c_norm: {} samples on a grid of {} nodes (need at least 4)",
            u.len(),
            grid.len()
        )));
    }
    let h_t = require_log_grid(grid)?;
    let nodes = grid.nodes();
    let (du, _) = radial_derivatives(u, nodes, h_t);
    let mut sup = 0.0f64;
    for j in 0..u.len() {
        let r = nodes[j];
        let mut s = r.powf(-delta) * u[j].abs();
        if l >= 1 {
            s += r.powf(1.0 - delta) * du[j].abs();
        }
        sup = sup.max(s);
    }
    Ok(sup)
}

/// Agreement of the rescaling identities ‖u‖(aA) = a^{−δ}‖u_a‖(A) for the
/// annulus H¹_δ and C¹_δ families (u_a(r) = u(ar)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReport {
    pub h_rel_err: f64,
    pub c_rel_err: f64,
}

/// Annulus H¹_δ squared norm Σ_{i≤1} ∫ r^{−2(δ−i)−1}|∇ⁱu|²dr from samples.
fn annulus_h1_sq(u: &[f64], delta: f64, grid: &RadialGrid) -> Result<f64> {
    let h_t = require_log_grid(grid)?;
    let nodes = grid.nodes();
    let (du, _) = radial_derivatives(u, nodes, h_t);
    Ok(kahan_sum((0..u.len()).map(|j| {
        let r = nodes[j];
        (r.powf(-2.0 * delta - 1.0) * u[j] * u[j]
            + r.powf(1.0 - 2.0 * delta) * du[j] * du[j])
            * r
            * h_t
    })))
}

/// Verify the change-of-variables identity on (r_lo, r_hi) at grid level for
/// a ∈ (0, 1]: geometric nodes and log-space stencils scale exactly, so the
/// two sides agree to rounding.
pub fn scaling_check(
    u: &dyn Fn(f64) -> f64,
    a: f64,
    delta: f64,
    r_lo: f64,
    r_hi: f64,
    m_nodes: usize,
) -> Result<ScalingReport> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("scaling_check: a = {a} outside (0, 1]")));
    }
    let inner = RadialGrid::log_uniform(a * r_lo, a * r_hi, m_nodes)?;
    let outer = RadialGrid::log_uniform(r_lo, r_hi, m_nodes)?;
    let u_inner: Vec<f64> = inner.nodes().iter().map(|&r| u(r)).collect();
    let u_scaled: Vec<f64> = outer.nodes().iter().map(|&s| u(a * s)).collect();
    let h_lhs = annulus_h1_sq(&u_inner, delta, &inner)?.sqrt();
    let h_rhs = a.powf(-delta) * annulus_h1_sq(&u_scaled, delta, &outer)?.sqrt();
    let c_lhs = c_norm(&u_inner, 1, delta, &inner)?;
    let c_rhs = a.powf(-delta) * c_norm(&u_scaled, 1, delta, &outer)?;
    Ok(ScalingReport {
        h_rel_err: (h_lhs - h_rhs).abs() / h_lhs.abs().max(f64::MIN_POSITIVE),
        c_rel_err: (c_lhs - c_rhs).abs() / c_lhs.abs().max(f64::MIN_POSITIVE),
    })
}

/// Per-annulus decay data toward the tip: squared-norm contributions and
/// weighted sup values over dyadic annuli (b/2^{j+1}, b/2^j].
#[derive(Debug, Clone)]
pub struct AnnulusTail {
    pub h_contrib: Vec<f64>,
    pub c_sup: Vec<f64>,
}

/// Dyadic tail of the weighted H¹_δ mass and of r^{l−δ}|∇ˡu| (l ≤ 1),
/// innermost annuli last.
pub fn annulus_tail(
    u: &[f64],
    delta: f64,
    grid: &RadialGrid,
    annuli: usize,
) -> Result<AnnulusTail> {
    let h_t = require_log_grid(grid)?;
    if u.len() != grid.len() || u.len() < 4 {
        return Err(Error::InvalidParameter("annulus_tail: bad sample length".into()));
    }
    let nodes = grid.nodes();
    let b = grid.outer_cutoff();
    let (du, _) = radial_derivatives(u, nodes, h_t);
    let mut h_contrib = vec![0.0f64; annuli];
    let mut c_sup = vec![0.0f64; annuli];
    for j in 0..u.len() {
        let r = nodes[j];
        let d = (b / r).log2().floor() as usize;
        if d >= annuli {
            continue;
        }
        h_contrib[d] += (r.powf(-2.0 * delta - 1.0) * u[j] * u[j]
            + r.powf(1.0 - 2.0 * delta) * du[j] * du[j])
            * r
            * h_t;
        let c = r.powf(-delta) * u[j].abs() + r.powf(1.0 - delta) * du[j].abs();
        c_sup[d] = c_sup[d].max(c);
    }
    Ok(AnnulusTail { h_contrib, c_sup })
}

/// Discrete weighted H¹ Gram form of one link mode in w-coordinates on the
/// exact cone: unit-coefficient stiffness plus the lumped potential
/// [(n−1)(n−3)/4 + 1 + κ]/r², Dirichlet ends, lumped mass. κ is the link
/// Laplacian eigenvalue of the mode.
pub fn h1_gram(n: usize, kappa: f64, grid: &RadialGrid) -> Result<Pencil> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("h1_gram: n = {n} < 3")));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!("h1_gram: kappa = {kappa}")));
    }
    let m = grid.len();
    let nodes = grid.nodes();
    let mut x = Vec::with_capacity(m + 2);
    x.push(grid.inner_cutoff());
    x.extend_from_slice(nodes);
    x.push(grid.outer_cutoff());
    let h = |j: usize| x[j + 1] - x[j];
    let nf = n as f64;
    let c_pot = (nf - 1.0) * (nf - 3.0) / 4.0 + 1.0 + kappa;
    let mut diag = vec![0.0f64; m];
    let mut off = vec![0.0f64; m - 1];
    let mut mass = vec![0.0f64; m];
    for j in 1..=m {
        let i = j - 1;
        let mj = 0.5 * (h(j - 1) + h(j));
        diag[i] = 1.0 / h(j - 1) + 1.0 / h(j) + c_pot / (x[j] * x[j]) * mj;
        mass[i] = mj;
        if j < m {
            off[i] = -1.0 / h(j);
        }
    }
    Pencil::new(SymTridiag::new(diag, off)?, mass)
}
