//! Rotationally symmetric Ricci flow with conical tips, plus a spectral
//! monitor for the bottom of −4Δ + R along the flow.
//!
//! The evolving metric is g(t) = u(x,t)² dx² + φ(x,t)² ĝ over a fixed
//! coordinate grid x ∈ [0, L], with ĝ the unit round metric on the fiber
//! sphere S^m. Writing s for arclength (ds = u dx) and φ_s = u⁻¹ ∂_x φ,
//! Ricci flow ∂_t g = −2 Ric reads
//!
//!   ∂_t φ = φ_ss − (m−1)(1 − φ_s²)/φ,     ∂_t ln u = m φ_ss / φ.
//!
//! Tips with slope c = 1 are smooth points; their stencils close by parity
//! (φ odd, u even across the tip) and the flow through them is genuinely
//! consistent, as the shrinking round sphere verifies at the Euler error
//! level. A conical tip with c ≠ 1 is different in kind: the flow rate
//! φ_ss − (m−1)(1−φ_s²)/φ ≈ −(m−1)(1−c²)/(c²s) diverges at the tip, so no
//! fixed grid can evolve it directly. The scheme models the persistence of
//! the conical structure by pinning φ = c·s on a collar at each tip after
//! every Euler step, extrapolating the evolution rates across the pinned
//! window, and recording the drift |φ/s − c| at the window edge before each
//! pin: drift beyond [`TIP_DRIFT_LIMIT`] means the cone is no longer
//! consistent with the interior solution and the step reports a breakdown
//! rather than continuing on garbage. Loss of positivity of φ and a
//! violated parabolic step-size bound are detected the same way.
//!
//! With a minimal pin (three nodes plus buffer, [`FlowState::from_manifold`]
//! with `pin_collar = 0`) the divergent tip rate of the slope-0.9 spindle
//! trips the drift monitor immediately; a collar of ≈ 0.2 absorbs it and
//! carries the same flow stably through the sampled horizon.
//!
//! The monitor [`FlowState::lambda_monitor`] assembles the fiber-constant
//! radial problem −4 w″ + Q w = λ w, Q = m(m−1)/φ² − m(φ_s/φ)², on the
//! current arclength grid with Dirichlet walls at both tips, and estimates
//! its discretization error from a stride-2 subgrid. Along the flow the
//! sampled λ should be nondecreasing within those error bars; the
//! time-reversed flow ([`FlowState::time_reversed`]) is the control that
//! should lose monotonicity.

use crate::error::{Error, Result};
use crate::geometry::{ProfileKind, SingularManifold};
use crate::tridiag_eig::{Pencil, SymTridiag};

/// Minimum number of pinned nodes at a conical tip.
const MIN_PIN_NODES: usize = 3;

/// Safety factor in the explicit-step bound dt ≤ CFL_FACTOR · min(Δs)²/2.
const CFL_FACTOR: f64 = 0.4;

/// Pre-pin drift |φ/s − c| at the collar edge beyond which the conical tip
/// is declared broken.
pub const TIP_DRIFT_LIMIT: f64 = 1e-3;

/// Absolute tolerance for the monitor eigenvalue solves.
const MONITOR_ABS_TOL: f64 = 1e-12;

/// Floor added to the stride-2 error estimate so reported bars are never
/// exactly zero.
const ERR_FLOOR: f64 = 1e-12;

/// One sampled point of [`FlowState::run_with_lambda`]. A failed monitor
/// solve leaves `lambda`/`err` empty; the flow itself continues.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub t: f64,
    pub lambda: Option<f64>,
    pub err: Option<f64>,
    /// Smallest φ over the nodes away from the tips.
    pub min_phi: f64,
    /// Tip-structure defect for the preceding step (zero for the initial
    /// sample): pre-pin drift |φ/s − c| at the window edge for conical tips,
    /// smoothness defect |φ/s − 1| beside the tip for regular ones.
    pub tip_ratio: f64,
}

/// Flow run with λ samples; `state` is the final state.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub state: FlowState,
}

/// Rotationally symmetric metric u² dx² + φ² ĝ_{S^m} on a fixed x-grid.
#[derive(Debug, Clone)]
pub struct FlowState {
    xs: Vec<f64>,
    u: Vec<f64>,
    phi: Vec<f64>,
    t: f64,
    /// Fiber dimension m = n − 1.
    m: usize,
    /// Tip cone slope in the unit-fiber representation.
    c: f64,
    /// Spindle profiles close up with a second conical tip at x = L.
    closed: bool,
    /// Tips with slope 1 are smooth points: the scheme closes them with the
    /// parity condition (φ odd, u even across the tip) instead of a pin.
    regular: bool,
    pin_collar: f64,
    reversed: bool,
    tip_ratio: f64,
}

impl FlowState {
    /// Initial flow state for a manifold with a round-sphere cross-section
    /// and an `ExactCone`, `PerturbedCone`, or `Spindle` profile.
    ///
    /// The fiber radius is absorbed into the warp: a cross-section of radius
    /// c₀ over profile φ_p becomes φ = c₀ φ_p over the unit sphere, so the
    /// tip slope is c = c₀ · φ_p′(0). `mx` uniform coordinate nodes cover
    /// [0, L]; u ≡ 1 initially, so x starts out as arclength. For conical
    /// tips (c ≠ 1), `pin_collar` is the arclength below which the tip is
    /// pinned to φ = c·s (at least [`MIN_PIN_NODES`] nodes plus the stencil
    /// buffer, so `0.0` requests the minimal pin); smooth tips (c = 1)
    /// ignore it and close by parity instead.
    pub fn from_manifold(mfd: &SingularManifold, mx: usize, pin_collar: f64) -> Result<Self> {
        if mfd.is_diagnostic() {
            return Err(Error::Unsupported(
                "ricci flow: diagnostic manifolds cannot be flowed".into(),
            ));
        }
        let kappa = mfd.cross_section.einstein_kappa().ok_or_else(|| {
            Error::Unsupported(
                "ricci flow: the cross-section must be a round sphere (mode-table cross-sections carry no geometry to evolve)".into(),
            )
        })?;
        let c_sec = kappa.powf(-0.5);
        let closed = match mfd.profile.kind() {
            ProfileKind::Spindle { .. } => true,
            ProfileKind::ExactCone | ProfileKind::PerturbedCone { .. } => false,
            ProfileKind::Tabulated { .. } => {
                return Err(Error::Unsupported(
                    "ricci flow: tabulated profiles carry no samples at the tip itself; use an analytic profile".into(),
                ));
            }
        };
        if mx < 50 {
            return Err(Error::InvalidParameter(format!(
                "ricci flow: mx = {mx} is too coarse (need >= 50 nodes)"
            )));
        }
        let l = mfd.profile.l();
        if !(pin_collar >= 0.0) || pin_collar > 0.25 * l {
            return Err(Error::InvalidParameter(format!(
                "ricci flow: pin_collar = {pin_collar} must lie in [0, L/4] (L = {l})"
            )));
        }
        let h = l / (mx - 1) as f64;
        let xs: Vec<f64> = (0..mx).map(|j| j as f64 * h).collect();
        let mut phi: Vec<f64> = xs.iter().map(|&x| c_sec * mfd.profile.phi(x)).collect();
        phi[0] = 0.0;
        if closed {
            phi[mx - 1] = 0.0;
        }
        let c = c_sec * mfd.profile.c0();
        let mut state = Self {
            xs,
            u: vec![1.0; mx],
            phi,
            t: 0.0,
            m: mfd.n - 1,
            c,
            closed,
            regular: (c - 1.0).abs() < 1e-12,
            pin_collar,
            reversed: false,
            tip_ratio: 0.0,
        };
        if !state.regular {
            // The pin defines the initial data: exact cones over the collar.
            let s = state.arclength();
            state.apply_pin(&s);
        }
        Ok(state)
    }

    /// Flow time elapsed since the initial state.
    #[must_use]
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Fiber dimension m (the manifold dimension is m + 1).
    #[must_use]
    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    /// Tip cone slope c in the unit-fiber representation.
    #[must_use]
    pub fn tip_slope(&self) -> f64 {
        self.c
    }

    #[must_use]
    pub fn coordinates(&self) -> &[f64] {
        &self.xs
    }

    #[must_use]
    pub fn warp(&self) -> &[f64] {
        &self.phi
    }

    #[must_use]
    pub fn lapse(&self) -> &[f64] {
        &self.u
    }

    /// Tip-structure defect for the last step taken: pre-pin drift
    /// |φ/s − c| at the window edge (conical tips) or the smoothness defect
    /// |φ/s − 1| beside the tip (regular tips).
    #[must_use]
    pub fn tip_ratio(&self) -> f64 {
        self.tip_ratio
    }

    /// Same state driven by the time-reversed equation ∂_t g = +2 Ric. The
    /// reversed flow is the control run: λ samples should lose the
    /// nondecreasing ordering that the forward flow maintains.
    #[must_use]
    pub fn time_reversed(&self) -> Self {
        let mut rev = self.clone();
        rev.reversed = !rev.reversed;
        rev
    }

    /// Arclength s_j = ∫₀^{x_j} u dx by the trapezoid rule.
    #[must_use]
    pub fn arclength(&self) -> Vec<f64> {
        let dx = self.xs[1] - self.xs[0];
        let mut s = vec![0.0; self.xs.len()];
        for j in 1..self.xs.len() {
            s[j] = s[j - 1] + 0.5 * (self.u[j - 1] + self.u[j]) * dx;
        }
        s
    }

    /// Smallest warp value over the nodes away from the tip(s).
    #[must_use]
    pub fn min_phi(&self) -> f64 {
        let hi = if self.closed { self.phi.len() - 1 } else { self.phi.len() };
        self.phi[1..hi].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Width of the pinned window at the left tip: the collar nodes plus the
    /// two buffer nodes whose centered stencils touch them. Pinning exactly
    /// the nodes that receive extrapolated (non-genuine) rates keeps the
    /// scheme self-consistent; a narrower pin lets the buffer accumulate
    /// extrapolation error linearly in the step count.
    fn left_window(&self, s: &[f64]) -> usize {
        let within = s.partition_point(|&v| v < self.pin_collar);
        (within.max(MIN_PIN_NODES) + 2).min(s.len() / 3)
    }

    /// Width of the pinned window at the right tip (spindles only).
    fn right_window(&self, s: &[f64]) -> usize {
        let end = s[s.len() - 1];
        let within = s.iter().rev().take_while(|&&v| end - v < self.pin_collar).count();
        (within.max(MIN_PIN_NODES) + 2).min(s.len() / 3)
    }

    /// Overwrite the pinned window(s) with the exact cone φ = c·s.
    fn apply_pin(&mut self, s: &[f64]) {
        let w = self.left_window(s);
        for j in 0..w {
            self.phi[j] = self.c * s[j];
        }
        if self.closed {
            let wr = self.right_window(s);
            let end = s[s.len() - 1];
            for j in s.len() - wr..s.len() {
                self.phi[j] = self.c * (end - s[j]);
            }
        }
    }

    /// Drift |φ/s − c| at the outermost pinned node(s), before re-pinning.
    fn collar_drift(&self, s: &[f64]) -> f64 {
        let w = self.left_window(s);
        let mut drift = (self.phi[w - 1] / s[w - 1] - self.c).abs();
        if self.closed {
            let wr = self.right_window(s);
            let end = s[s.len() - 1];
            let j = s.len() - wr;
            drift = drift.max((self.phi[j] / (end - s[j]) - self.c).abs());
        }
        drift
    }

    /// Evolution rates (∂_t φ, ∂_t ln u) with centered s-derivatives on the
    /// fixed x-grid.
    ///
    /// Regular tips close the stencils by parity (φ odd, u even across the
    /// tip), which gives φ_ss = 0 and rate_φ = 0 at the tip itself and the
    /// smooth limit m φ_ss/φ from the first interior node for ln u. Conical
    /// tips instead get constant extrapolation across the pinned window,
    /// whose stencils would otherwise mix pinned and free values.
    fn rates(&self, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mx = self.xs.len();
        let dx = self.xs[1] - self.xs[0];
        let mut phi_s = vec![0.0; mx];
        for j in 1..mx - 1 {
            phi_s[j] = (self.phi[j + 1] - self.phi[j - 1]) / (2.0 * dx) / self.u[j];
        }
        if self.regular {
            // Ghost value φ(−h) = −φ(h) across the smooth tip.
            phi_s[0] = self.phi[1] / (dx * self.u[0]);
            phi_s[mx - 1] = if self.closed {
                -self.phi[mx - 2] / (dx * self.u[mx - 1])
            } else {
                phi_s[mx - 2]
            };
        } else {
            phi_s[0] = phi_s[1];
            phi_s[mx - 1] = phi_s[mx - 2];
        }
        let mut phi_ss = vec![0.0; mx];
        for j in 1..mx - 1 {
            phi_ss[j] = (phi_s[j + 1] - phi_s[j - 1]) / (2.0 * dx) / self.u[j];
        }
        // φ_s is even across a regular tip, so φ_ss vanishes there; the
        // neighbor copy is only a placeholder on conical/outer edges.
        phi_ss[0] = if self.regular { 0.0 } else { phi_ss[1] };
        phi_ss[mx - 1] = if self.regular && self.closed { 0.0 } else { phi_ss[mx - 2] };

        let mf = (self.m - 1) as f64;
        let mut rate_phi = vec![0.0; mx];
        let mut rate_lnu = vec![0.0; mx];
        for j in 0..mx {
            if self.phi[j] > 0.0 {
                rate_phi[j] = phi_ss[j] - mf * (1.0 - phi_s[j] * phi_s[j]) / self.phi[j];
                rate_lnu[j] = self.m as f64 * phi_ss[j] / self.phi[j];
            }
        }

        if self.regular {
            // Beside a smooth tip, 1 − φ_s² = O(s²) and the centered slope
            // carries an O(h²) bias, so the curvature term above has an O(1)
            // relative error at the first nodes. Regularity (φ odd with unit
            // slope) gives (1 − φ_s²)/φ = −φ_ss + O(s³), so the rate there is
            // m φ_ss, evaluated by a direct second difference in s that never
            // divides by a small quantity. φ(tip) = 0 is preserved exactly and
            // φ_ss/φ extends smoothly, so the tip takes its neighbor's value.
            let mm = self.m as f64;
            let d2s = |j: usize| {
                let hl = s[j] - s[j - 1];
                let hr = s[j + 1] - s[j];
                2.0 * (hr * self.phi[j - 1] - (hl + hr) * self.phi[j] + hl * self.phi[j + 1])
                    / (hl * hr * (hl + hr))
            };
            for j in [1, 2] {
                let d2 = d2s(j);
                rate_phi[j] = mm * d2;
                rate_lnu[j] = mm * d2 / self.phi[j];
            }
            rate_phi[0] = 0.0;
            rate_lnu[0] = rate_lnu[1];
            if self.closed {
                for j in [mx - 2, mx - 3] {
                    let d2 = d2s(j);
                    rate_phi[j] = mm * d2;
                    rate_lnu[j] = mm * d2 / self.phi[j];
                }
                rate_phi[mx - 1] = 0.0;
                rate_lnu[mx - 1] = rate_lnu[mx - 2];
            }
            return (rate_phi, rate_lnu);
        }

        let src = self.left_window(s).min(mx - 1);
        for j in 0..src {
            rate_phi[j] = rate_phi[src];
            rate_lnu[j] = rate_lnu[src];
        }
        if self.closed {
            let src = mx.saturating_sub(self.right_window(s) + 1);
            for j in src + 1..mx {
                rate_phi[j] = rate_phi[src];
                rate_lnu[j] = rate_lnu[src];
            }
        }
        (rate_phi, rate_lnu)
    }

    /// One forward-Euler step. `step_idx` only labels breakdown reports.
    fn step(&mut self, dt: f64, step_idx: usize) -> Result<()> {
        let s = self.arclength();
        let min_ds = s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let dt_max = CFL_FACTOR * min_ds * min_ds / 2.0;
        if dt > dt_max {
            return Err(Error::FlowBreakdown {
                step: step_idx,
                reason: format!(
                    "parabolic step bound violated: dt = {dt:.3e} exceeds {CFL_FACTOR} * min(ds)^2/2 = {dt_max:.3e}"
                ),
            });
        }

        let (rate_phi, rate_lnu) = self.rates(&s);
        let sign = if self.reversed { -1.0 } else { 1.0 };
        for j in 0..self.xs.len() {
            self.phi[j] += sign * dt * rate_phi[j];
            self.u[j] *= (sign * dt * rate_lnu[j]).exp();
        }

        if self.phi.iter().chain(self.u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::FlowBreakdown {
                step: step_idx,
                reason: "non-finite metric values".into(),
            });
        }
        let hi = if self.closed { self.phi.len() - 1 } else { self.phi.len() };
        if self.phi[1..hi].iter().any(|&v| v <= 0.0) || self.u.iter().any(|&v| v <= 0.0) {
            return Err(Error::FlowBreakdown {
                step: step_idx,
                reason: "positivity of the metric lost".into(),
            });
        }

        let s_new = self.arclength();
        self.tip_ratio = if self.regular {
            self.regularity_defect(&s_new)
        } else {
            self.collar_drift(&s_new)
        };
        if self.tip_ratio > TIP_DRIFT_LIMIT {
            return Err(Error::FlowBreakdown {
                step: step_idx,
                reason: format!(
                    "tip cone slope drift {:.3e} exceeds {TIP_DRIFT_LIMIT:.1e}",
                    self.tip_ratio
                ),
            });
        }
        if !self.regular {
            self.apply_pin(&s_new);
        }
        self.t += dt;
        Ok(())
    }

    /// Smoothness defect |φ/s − 1| at the first node beside a regular tip.
    fn regularity_defect(&self, s: &[f64]) -> f64 {
        let mut defect = (self.phi[1] / s[1] - 1.0).abs();
        if self.closed {
            let k = s.len() - 2;
            defect = defect.max((self.phi[k] / (s[s.len() - 1] - s[k]) - 1.0).abs());
        }
        defect
    }

    /// Flow for `t_final` (rounded to whole steps of `dt`) and return the
    /// final state. Breakdown is reported as [`Error::FlowBreakdown`].
    pub fn run(&self, t_final: f64, dt: f64) -> Result<FlowState> {
        let n = step_count(t_final, dt)?;
        let mut state = self.clone();
        for k in 0..n {
            state.step(dt, k)?;
        }
        Ok(state)
    }

    /// Flow for `t_final`, sampling λ with error bars every `sample_every`
    /// steps (the initial and final states are always sampled). A failed
    /// monitor solve is recorded as an empty sample and the flow continues;
    /// a flow breakdown aborts the run with [`Error::FlowBreakdown`].
    pub fn run_with_lambda(&self, t_final: f64, dt: f64, sample_every: usize) -> Result<FlowTrace> {
        if sample_every == 0 {
            return Err(Error::InvalidParameter("ricci flow: sample_every must be >= 1".into()));
        }
        let n = step_count(t_final, dt)?;
        let mut state = self.clone();
        let mut samples = Vec::with_capacity(n / sample_every + 2);
        samples.push(sample_of(&state));
        for k in 0..n {
            state.step(dt, k)?;
            if (k + 1) % sample_every == 0 || k + 1 == n {
                samples.push(sample_of(&state));
            }
        }
        Ok(FlowTrace { samples, state })
    }

    /// Ground eigenvalue of −4Δ + R restricted to fiber-constant functions
    /// on the current metric, with a stride-2 Richardson error estimate.
    ///
    /// The radial problem −4 w″ + Q w = λ w, Q = m(m−1)/φ² − m(φ_s/φ)², is
    /// assembled on the interior arclength nodes with Dirichlet walls at
    /// both tips; φ_s uses the centered three-point gradient for nonuniform
    /// spacing. Returns (λ, err) with err = |λ − λ_stride2| / 3.
    pub fn lambda_monitor(&self) -> Result<(f64, f64)> {
        let s = self.arclength();
        let lam = mode0_ground(&s, &self.phi, self.m)?;
        let (s2, phi2) = stride2(&s, &self.phi);
        let lam2 = mode0_ground(&s2, &phi2, self.m)?;
        Ok((lam, (lam - lam2).abs() / 3.0 + ERR_FLOOR))
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ricci flow: need t_final > 0 and dt > 0 (got {t_final}, {dt})"
        )));
    }
    Ok(((t_final / dt).round() as usize).max(1))
}

fn sample_of(state: &FlowState) -> FlowSample {
    let (lambda, err) = match state.lambda_monitor() {
        Ok((l, e)) => (Some(l), Some(e)),
        Err(_) => (None, None),
    };
    FlowSample {
        t: state.t,
        lambda,
        err,
        min_phi: state.min_phi(),
        tip_ratio: state.tip_ratio,
    }
}

/// Every other node of (s, φ), keeping the last node so the outer wall stays
/// in place.
fn stride2(s: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s2: Vec<f64> = s.iter().copied().step_by(2).collect();
    let mut phi2: Vec<f64> = phi.iter().copied().step_by(2).collect();
    if s.len() % 2 == 0 {
        s2.push(s[s.len() - 1]);
        phi2.push(phi[phi.len() - 1]);
    }
    (s2, phi2)
}

/// Ground eigenvalue of −4 w″ + Q w = λ w on the interior of the node line
/// `s` with Dirichlet walls at both ends.
fn mode0_ground(s: &[f64], phi: &[f64], m: usize) -> Result<f64> {
    let k = s.len();
    if k < 5 {
        return Err(Error::InvalidParameter("lambda monitor: need >= 5 nodes".into()));
    }
    let mu0 = (m * (m - 1)) as f64;
    let mut diag = Vec::with_capacity(k - 2);
    let mut mass = Vec::with_capacity(k - 2);
    let mut off = Vec::with_capacity(k - 3);
    for j in 1..k - 1 {
        let hl = s[j] - s[j - 1];
        let hr = s[j + 1] - s[j];
        if !(phi[j] > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "lambda monitor: phi <= 0 at interior node {j}"
            )));
        }
        let dphi = (hl * hl * phi[j + 1] - hr * hr * phi[j - 1] + (hr * hr - hl * hl) * phi[j])
            / (hl * hr * (hl + hr));
        let psi = dphi / phi[j];
        let q = mu0 / (phi[j] * phi[j]) - m as f64 * psi * psi;
        diag.push(4.0 / hl + 4.0 / hr + q * 0.5 * (hl + hr));
        mass.push(0.5 * (hl + hr));
        if j < k - 2 {
            off.push(-4.0 / hr);
        }
    }
    let pencil = Pencil::new(SymTridiag::new(diag, off)?, mass)?;
    Ok(pencil.eigenvalues(1, 1, MONITOR_ABS_TOL)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross_section::{CrossSection, Mode};
    use crate::geometry::{OuterBc, Profile};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const DT: f64 = 1e-5;
    const MX: usize = 400;
    const COLLAR: f64 = 0.2;

    fn flat_cone() -> SingularManifold {
        SingularManifold::new(
            3,
            CrossSection::round_sphere(2, 1.0).unwrap(),
            Profile::exact_cone(PI).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap()
    }

    fn sphere(n: usize) -> SingularManifold {
        SingularManifold::new(
            n,
            CrossSection::round_sphere(n - 1, 1.0).unwrap(),
            Profile::spindle(1.0, PI).unwrap(),
            OuterBc::SecondConicalTip,
        )
        .unwrap()
    }

    fn spindle09() -> SingularManifold {
        SingularManifold::new(
            3,
            CrossSection::round_sphere(2, 1.0).unwrap(),
            Profile::spindle(0.9, PI).unwrap(),
            OuterBc::SecondConicalTip,
        )
        .unwrap()
    }

    #[test]
    fn flat_cone_flow_is_stationary() {
        let state0 = FlowState::from_manifold(&flat_cone(), MX, COLLAR).unwrap();
        let state = state0.run(50.0 * DT, DT).unwrap();
        let dphi = state0
            .warp()
            .iter()
            .zip(state.warp())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let du = state0
            .lapse()
            .iter()
            .zip(state.lapse())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // The cone φ = s, u = 1 solves the flow exactly; per-step motion is
        // rounding noise, so 50 steps stay on the initial data.
        assert!(dphi <= 50.0 * 1e-10, "phi drifted by {dphi:.3e}");
        assert!(du <= 50.0 * 1e-10, "u drifted by {du:.3e}");
        assert!(state.tip_ratio() <= 1e-10);
    }

    #[test]
    fn flat_cone_monitor_matches_closed_form() {
        // Q vanishes on the flat cone, so the Dirichlet wall problem on
        // [0, pi] has ground value 4 (w = sin s).
        let state = FlowState::from_manifold(&flat_cone(), MX, COLLAR).unwrap();
        let (lam, err) = state.lambda_monitor().unwrap();
        assert_abs_diff_eq!(lam, 4.0, epsilon = 1e-2);
        assert!(err > 0.0 && err < 1e-2);
    }

    #[test]
    fn shrinking_sphere_tracks_exact_radius() {
        // Round S^3: rho(t)^2 = 1 - 4t. The minimal pin keeps the smooth
        // tips honest without forcing a cone over a long collar.
        let state0 = FlowState::from_manifold(&sphere(3), MX, 0.0).unwrap();
        let t_final = 200.0 * DT;
        let state = state0.run(t_final, DT).unwrap();
        // Total arclength pi * rho is insensitive to node placement (the
        // discrete max of phi is not).
        let rad2 = (state.arclength().last().unwrap() / PI).powi(2);
        let exact = 1.0 - 4.0 * t_final;
        assert!(
            ((rad2 - exact) / exact).abs() <= 3e-6,
            "rad^2 = {rad2:.9} vs exact {exact:.9}"
        );
        // The homothetic solution keeps u spatially uniform: u = rho(t);
        // the discrete field carries the scheme's O(h^2) shape bias.
        let u_exact = exact.sqrt();
        let worst = state.lapse()[1..MX - 1]
            .iter()
            .map(|v| (v - u_exact).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 5e-5, "max |u - rho| = {worst:.3e}");
    }

    #[test]
    fn shrinking_four_sphere_tracks_exact_radius() {
        // Round S^4 (m = 3): rho(t)^2 = 1 - 6t.
        let state0 = FlowState::from_manifold(&sphere(4), MX, 0.0).unwrap();
        let t_final = 100.0 * DT;
        let state = state0.run(t_final, DT).unwrap();
        let rad2 = (state.arclength().last().unwrap() / PI).powi(2);
        let exact = 1.0 - 6.0 * t_final;
        assert!(
            ((rad2 - exact) / exact).abs() <= 3e-6,
            "rad^2 = {rad2:.9} vs exact {exact:.9}"
        );
    }

    #[test]
    fn spindle_lambda_is_monotone_within_error() {
        let state0 = FlowState::from_manifold(&spindle09(), MX, COLLAR).unwrap();
        let trace = state0.run_with_lambda(1.96e-3, DT, 4).unwrap();
        assert_eq!(trace.samples.len(), 50);
        let lam: Vec<f64> = trace.samples.iter().map(|s| s.lambda.unwrap()).collect();
        let err: Vec<f64> = trace.samples.iter().map(|s| s.err.unwrap()).collect();
        let mut min_margin = f64::INFINITY;
        for k in 0..lam.len() - 1 {
            min_margin = min_margin.min(lam[k + 1] - lam[k] + err[k]);
        }
        assert!(min_margin >= 1e-4, "monotonicity margin {min_margin:.3e}");
        assert_abs_diff_eq!(lam[0], 6.89222, epsilon = 2e-3);
        assert_abs_diff_eq!(lam[49], 6.94626, epsilon = 2e-3);
        for s in &trace.samples {
            assert!(s.min_phi > 0.0);
            assert!(s.tip_ratio <= TIP_DRIFT_LIMIT);
        }
    }

    #[test]
    fn reversed_spindle_lambda_is_nonincreasing() {
        let state0 = FlowState::from_manifold(&spindle09(), MX, COLLAR).unwrap().time_reversed();
        let trace = state0.run_with_lambda(10.0 * DT, DT, 1).unwrap();
        assert_eq!(trace.samples.len(), 11);
        let lam: Vec<f64> = trace.samples.iter().map(|s| s.lambda.unwrap()).collect();
        for k in 0..lam.len() - 1 {
            assert!(
                lam[k + 1] < lam[k],
                "reversed flow failed to decrease at sample {k}: {} -> {}",
                lam[k],
                lam[k + 1]
            );
        }
        let drop = lam[0] - lam[10];
        assert!((1e-3..1e-2).contains(&drop), "total reversed drop {drop:.3e}");
    }

    #[test]
    fn minimal_pin_spindle_breaks_down() {
        let state0 = FlowState::from_manifold(&spindle09(), MX, 0.0).unwrap();
        match state0.run(0.05, DT) {
            Err(Error::FlowBreakdown { step, reason }) => {
                assert!(step < 5000, "breakdown step {step}");
                assert!(!reason.is_empty());
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn oversized_step_is_reported_as_breakdown() {
        let state0 = FlowState::from_manifold(&spindle09(), MX, COLLAR).unwrap();
        match state0.run(1e-3, 1e-3) {
            Err(Error::FlowBreakdown { step: 0, reason }) => {
                assert!(reason.contains("step bound"), "reason: {reason}");
            }
            other => panic!("expected step-bound breakdown, got {other:?}"),
        }
    }

    #[test]
    fn from_manifold_rejects_unsupported_input() {
        let diag = SingularManifold::new_diagnostic(
            3,
            CrossSection::round_sphere(2, 1.0).unwrap(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        assert!(matches!(
            FlowState::from_manifold(&diag, MX, COLLAR),
            Err(Error::Unsupported(_))
        ));

        let modal = SingularManifold::new(
            3,
            CrossSection::from_modes(
                2,
                vec![Mode { mu: 2.0, multiplicity: 1 }],
                2.0,
                "mode table",
            )
            .unwrap(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        assert!(matches!(
            FlowState::from_manifold(&modal, MX, COLLAR),
            Err(Error::Unsupported(_))
        ));

        assert!(matches!(
            FlowState::from_manifold(&flat_cone(), 10, COLLAR),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            FlowState::from_manifold(&flat_cone(), MX, 2.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sampling_cadence_includes_endpoints() {
        let state0 = FlowState::from_manifold(&flat_cone(), MX, COLLAR).unwrap();
        let trace = state0.run_with_lambda(10.0 * DT, DT, 3).unwrap();
        let ts: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5);
        for (k, &expect) in [0.0, 3.0 * DT, 6.0 * DT, 9.0 * DT, 10.0 * DT].iter().enumerate() {
            assert_abs_diff_eq!(ts[k], expect, epsilon = 1e-12);
        }
    }
}
