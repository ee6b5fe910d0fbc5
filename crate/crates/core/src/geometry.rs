//! Warped-product geometry g = dr² + φ(r)² h₀ over a cross-section: analytic
//! profile families (exact cone, perturbed cone, spindle, tabulated), scalar
//! and Ricci curvature, and the asymptotic-decay check that qualifies a
//! profile as conically singular.

use crate::cross_section::CrossSection;
use crate::error::{Error, Result};

/// Log-grid extent and size used by the asymptotic-decay check.
const ASYMPTOTIC_GRID_POINTS: usize = 60;
const ASYMPTOTIC_RMIN_FACTOR: f64 = 1e-6;
/// Relative stencil spacing for the r-proportional finite differences.
const ASYMPTOTIC_STENCIL_ETA: f64 = 0.02;
/// A weighted derivative bound is called divergent when its log-log slope over
/// the innermost decade is below this and its value there is non-negligible.
const DIVERGENCE_SLOPE_TOL: f64 = -0.05;
const DIVERGENCE_VALUE_FLOOR: f64 = 1e-8;

/// Warp profile φ on (0, L]: the cone factor in g = dr² + φ² h₀.
#[derive(Debug, Clone)]
pub struct Profile {
    kind: ProfileKind,
    l: f64,
    diagnostic: bool,
}

#[derive(Debug, Clone)]
pub enum ProfileKind {
    /// φ(r) = r.
    ExactCone,
    /// φ(r) = r(1 + η r^α); α ≥ 1 keeps the decay condition, smaller α only
    /// through the diagnostic constructor.
    PerturbedCone { eta: f64, alpha: f64 },
    /// φ(r) = c(L/π) sin(πr/L): closed profile with conical tips of slope c at
    /// both ends; c = 1 over a unit sphere is the round sphere.
    Spindle { c: f64 },
    /// Sampled φ, φ′, φ″ on an increasing node set; piecewise-linear in each
    /// array between nodes.
    Tabulated {
        nodes: Vec<f64>,
        phi: Vec<f64>,
        dphi: Vec<f64>,
        d2phi: Vec<f64>,
    },
}

impl Profile {
    pub fn exact_cone(l: f64) -> Result<Self> {
        check_l(l)?;
        Ok(Self { kind: ProfileKind::ExactCone, l, diagnostic: false })
    }

    /// φ(r) = r(1 + η r^α) with α ≥ 1 and φ > 0 on (0, L].
    pub fn perturbed_cone(eta: f64, alpha: f64, l: f64) -> Result<Self> {
        if alpha < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "perturbed_cone: alpha = {alpha} < 1 violates the decay condition; use the diagnostic constructor"
            )));
        }
        Self::perturbed_cone_diagnostic(eta, alpha, l).map(|mut p| {
            p.diagnostic = false;
            p
        })
    }

    /// As [`Self::perturbed_cone`] but allowing 0 < α < 1, for experiments
    /// that deliberately break the decay condition.
    pub fn perturbed_cone_diagnostic(eta: f64, alpha: f64, l: f64) -> Result<Self> {
        check_l(l)?;
        if !(alpha > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "perturbed_cone: need alpha > 0 and finite eta (alpha = {alpha}, eta = {eta})"
            )));
        }
        // φ/r = 1 + η r^α is monotone in r, so positivity on (0, L] reduces to
        // the endpoint.
        if 1.0 + eta * l.powf(alpha) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "perturbed_cone: phi(L) <= 0 (eta = {eta}, alpha = {alpha}, L = {l})"
            )));
        }
        Ok(Self { kind: ProfileKind::PerturbedCone { eta, alpha }, l, diagnostic: true })
    }

    pub fn spindle(c: f64, l: f64) -> Result<Self> {
        check_l(l)?;
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("spindle: c = {c} must be positive")));
        }
        Ok(Self { kind: ProfileKind::Spindle { c }, l, diagnostic: false })
    }

    /// Profile from samples of φ, φ′, φ″ on strictly increasing nodes in
    /// (0, L]; values between nodes are linearly interpolated, outside the
    /// node range the first/last sample's linear model is extended.
    pub fn tabulated(nodes: Vec<f64>, phi: Vec<f64>, dphi: Vec<f64>, d2phi: Vec<f64>) -> Result<Self> {
        let m = nodes.len();
        if m < 2 || phi.len() != m || dphi.len() != m || d2phi.len() != m {
            return Err(Error::InvalidParameter(
                "tabulated profile: need >= 2 nodes and equal-length sample arrays".into(),
            ));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tabulated profile: nodes must be strictly increasing and positive".into(),
            ));
        }
        if phi.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter("tabulated profile: phi must be positive".into()));
        }
        let l = *nodes.last().expect("nonempty");
        Ok(Self {
            kind: ProfileKind::Tabulated { nodes, phi, dphi, d2phi },
            l,
            diagnostic: false,
        })
    }

    /// Domain endpoint L.
    #[must_use]
    pub fn l(&self) -> f64 {
        self.l
    }

    #[must_use]
    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// Whether the profile was built through a diagnostic constructor that
    /// bypasses the decay condition.
    #[must_use]
    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Tip slope c₀ = lim_{r→0} φ(r)/r.
    #[must_use]
    pub fn c0(&self) -> f64 {
        match &self.kind {
            ProfileKind::ExactCone | ProfileKind::PerturbedCone { .. } => 1.0,
            ProfileKind::Spindle { c } => *c,
            ProfileKind::Tabulated { nodes, phi, .. } => phi[0] / nodes[0],
        }
    }

    #[must_use]
    pub fn phi(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::ExactCone => r,
            ProfileKind::PerturbedCone { eta, alpha } => r * (1.0 + eta * r.powf(*alpha)),
            ProfileKind::Spindle { c } => {
                let a = self.l / std::f64::consts::PI;
                c * a * (r / a).sin()
            }
            ProfileKind::Tabulated { nodes, phi, .. } => interp(nodes, phi, r),
        }
    }

    #[must_use]
    pub fn dphi(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::ExactCone => 1.0,
            ProfileKind::PerturbedCone { eta, alpha } => 1.0 + eta * (1.0 + alpha) * r.powf(*alpha),
            ProfileKind::Spindle { c } => {
                let a = self.l / std::f64::consts::PI;
                c * (r / a).cos()
            }
            ProfileKind::Tabulated { nodes, dphi, .. } => interp(nodes, dphi, r),
        }
    }

    #[must_use]
    pub fn d2phi(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::ExactCone => 0.0,
            ProfileKind::PerturbedCone { eta, alpha } => {
                eta * (1.0 + alpha) * alpha * r.powf(alpha - 1.0)
            }
            ProfileKind::Spindle { c } => {
                let a = self.l / std::f64::consts::PI;
                -(c / a) * (r / a).sin()
            }
            ProfileKind::Tabulated { nodes, d2phi, .. } => interp(nodes, d2phi, r),
        }
    }
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidParameter(format!("profile: L = {l} must be positive and finite")));
    }
    Ok(())
}

fn interp(nodes: &[f64], values: &[f64], r: f64) -> f64 {
    let m = nodes.len();
    let j = match nodes.binary_search_by(|x| x.partial_cmp(&r).expect("finite")) {
        Ok(j) => return values[j],
        Err(0) => 0,
        Err(j) if j >= m => m - 2,
        Err(j) => j - 1,
    };
    let t = (r - nodes[j]) / (nodes[j + 1] - nodes[j]);
    values[j] * (1.0 - t) + values[j + 1] * t
}

/// Outer boundary behavior of the singular manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBc {
    /// Finite cone truncated at r = L with a Dirichlet wall.
    Dirichlet,
    /// Closed spindle: the r = L end is a second conical tip.
    SecondConicalTip,
}

/// A cone-like manifold: dimension n, link spectral data, warp profile and the
/// outer boundary condition.
#[derive(Debug, Clone)]
pub struct SingularManifold {
    pub n: usize,
    pub cross_section: CrossSection,
    pub profile: Profile,
    pub outer_bc: OuterBc,
    diagnostic: bool,
}

impl SingularManifold {
    /// Admissible manifold: the cone condition on the effective tip link must
    /// hold. A profile with tip slope c₀ rescales the link metric to c₀²h₀,
    /// so the condition reads min(scal_min, μ₀)/c₀² > n−2.
    pub fn new(
        n: usize,
        cross_section: CrossSection,
        profile: Profile,
        outer_bc: OuterBc,
    ) -> Result<Self> {
        let report = cross_section.check_cone_condition(n)?;
        let c0 = profile.c0();
        let margin = (report.margin + (n as f64 - 2.0)) / (c0 * c0) - (n as f64 - 2.0);
        if !(margin > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cone condition fails on the effective tip link (margin {margin:.6}); use new_diagnostic for threshold experiments"
            )));
        }
        Self::build(n, cross_section, profile, outer_bc, false)
    }

    /// Build without the admissibility requirement (for threshold-failure and
    /// unboundedness experiments). The object is flagged diagnostic.
    pub fn new_diagnostic(
        n: usize,
        cross_section: CrossSection,
        profile: Profile,
        outer_bc: OuterBc,
    ) -> Result<Self> {
        Self::build(n, cross_section, profile, outer_bc, true)
    }

    fn build(
        n: usize,
        cross_section: CrossSection,
        profile: Profile,
        outer_bc: OuterBc,
        diagnostic: bool,
    ) -> Result<Self> {
        if n < 3 || n != cross_section.fiber_dim() + 1 {
            return Err(Error::InvalidParameter(format!(
                "manifold: n = {n} incompatible with fiber_dim = {}",
                cross_section.fiber_dim()
            )));
        }
        if outer_bc == OuterBc::SecondConicalTip
            && !matches!(profile.kind(), ProfileKind::Spindle { .. })
        {
            return Err(Error::InvalidParameter(
                "SecondConicalTip requires a spindle profile".into(),
            ));
        }
        let diagnostic = diagnostic || profile.is_diagnostic();
        Ok(Self { n, cross_section, profile, outer_bc, diagnostic })
    }

    #[must_use]
    pub fn is_diagnostic(&self) -> bool {
        self.diagnostic
    }

    /// Scalar curvature of g = dr² + φ² h₀ at radius r, in the constant-link-
    /// curvature model R_{h0} = scal_min:
    /// R(r) = [R_{h0} − (n−1)(n−2)φ′²]/φ² − 2(n−1)φ″/φ.
    /// The 1/φ² terms are combined before dividing so the flat cases cancel
    /// exactly instead of losing ~φ⁻² ulps near the tip.
    pub fn scal(&self, r: f64) -> Result<f64> {
        self.check_interior(r)?;
        let phi = self.profile.phi(r);
        let dphi = self.profile.dphi(r);
        let d2phi = self.profile.d2phi(r);
        let m = (self.n - 1) as f64;
        Ok((self.cross_section.scal_min() - m * (m - 1.0) * dphi * dphi) / (phi * phi)
            - 2.0 * m * d2phi / phi)
    }

    /// Warped-product Ricci curvature at r: the rr-component and the fiber
    /// coefficient F with Ric restricted to the link equal to F·h₀. Requires
    /// an Einstein link.
    pub fn ricci_warped(&self, r: f64) -> Result<(f64, f64)> {
        self.check_interior(r)?;
        let kappa = self.cross_section.einstein_kappa().ok_or_else(|| {
            Error::Unsupported("ricci_warped needs an Einstein cross-section (round-sphere constructors)".into())
        })?;
        let m = (self.n - 1) as f64;
        let phi = self.profile.phi(r);
        let dphi = self.profile.dphi(r);
        let d2phi = self.profile.d2phi(r);
        let ric_rr = -m * d2phi / phi;
        let fiber = (m - 1.0) * kappa - (phi * d2phi + (m - 1.0) * dphi * dphi);
        Ok((ric_rr, fiber))
    }

    fn check_interior(&self, r: f64) -> Result<()> {
        if !(r > 0.0 && r < self.profile.l()) {
            return Err(Error::Domain(format!(
                "r = {r} outside (0, {})",
                self.profile.l()
            )));
        }
        Ok(())
    }
}

/// Per-order outcome of the asymptotic-decay check.
#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    /// Observed bound C_i = sup over the sample grid of r^i |d^{i+1}/dr^{i+1}
    /// ((φ/r)² − c₀²)|, for i = 0 ..= floor(n/2)+2.
    pub bounds: Vec<f64>,
    /// Per-order verdict: false when the weighted derivative diverges toward
    /// the tip.
    pub pass: Vec<bool>,
    pub overall: bool,
}

/// Checks, for the realized metric family h_r = (φ/r)² h₀, that the weighted
/// derivatives r^i |d^{i+1}((φ/r)² − c₀²)| stay bounded as r → 0, for
/// 0 ≤ i ≤ floor(n/2)+2. Divergence is detected from the log-log slope of the
/// weighted derivative over the innermost decade of a log sample grid.
#[must_use]
pub fn check_asymptotic_condition(profile: &Profile, n: usize) -> AsymptoticReport {
    let i_max = n / 2 + 2;
    let l = profile.l();
    let c0 = profile.c0();
    let psi = |r: f64| {
        let q = profile.phi(r) / r;
        q * q - c0 * c0
    };
    let r_lo = ASYMPTOTIC_RMIN_FACTOR * l;
    let r_hi = 0.5 * l;
    let npts = ASYMPTOTIC_GRID_POINTS;
    let rs: Vec<f64> = (0..npts)
        .map(|j| r_lo * (r_hi / r_lo).powf(j as f64 / (npts - 1) as f64))
        .collect();
    let mut bounds = Vec::with_capacity(i_max + 1);
    let mut pass = Vec::with_capacity(i_max + 1);
    for i in 0..=i_max {
        let order = i + 1;
        let weighted: Vec<f64> = rs
            .iter()
            .map(|&r| r.powi(i as i32) * central_derivative(&psi, r, order, ASYMPTOTIC_STENCIL_ETA * r).abs())
            .collect();
        // ψ is a difference of O(c₀²) quantities, so each sample carries
        // absolute roundoff ~ε·c₀²; after the k-th difference the derivative
        // noise is ~2^k ε c₀² / h^k. Points below that floor are
        // indistinguishable from zero and excluded from the verdict.
        let floor: Vec<f64> = rs
            .iter()
            .map(|&r| {
                let scale = c0 * c0 + psi(r).abs();
                let h = ASYMPTOTIC_STENCIL_ETA * r;
                8.0 * 2.0f64.powi(order as i32) * f64::EPSILON * scale / h.powi(order as i32)
                    * r.powi(i as i32)
            })
            .collect();
        let c_i = weighted.iter().fold(0.0f64, |a, &b| a.max(b));
        // Slope of log w vs log r over the innermost decade, signal only.
        let inner: Vec<(f64, f64)> = rs
            .iter()
            .zip(weighted.iter().zip(&floor))
            .filter(|(&r, (&w, &fl))| r <= 10.0 * r_lo && w > fl)
            .map(|(&r, (&w, _))| (r.ln(), w.ln()))
            .collect();
        let diverges = if inner.len() >= 3 {
            let slope = least_squares_slope(&inner);
            slope < DIVERGENCE_SLOPE_TOL && inner[0].1.exp() > DIVERGENCE_VALUE_FLOOR
        } else {
            false
        };
        bounds.push(c_i);
        pass.push(!diverges);
    }
    let overall = pass.iter().all(|&p| p);
    AsymptoticReport { bounds, pass, overall }
}

/// k-th derivative by the k-th central difference with spacing h (second-order
/// accurate; evaluation points r + (k/2 − j)h).
fn central_derivative(f: &dyn Fn(f64) -> f64, r: f64, k: usize, h: f64) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=k {
        let x = r + (k as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * f(x);
        binom *= (k - j) as f64 / (j + 1) as f64;
    }
    sum / h.powi(k as i32)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn flat_cone3() -> SingularManifold {
        SingularManifold::new(
            3,
            CrossSection::round_sphere(2, 1.0).unwrap(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap()
    }

    #[test]
    fn scal_flat_cones_vanish() {
        let m3 = flat_cone3();
        for r in [0.01, 0.3, 0.77, 0.999] {
            assert_abs_diff_eq!(m3.scal(r).unwrap(), 0.0, epsilon = 1e-11);
        }
        let m4 = SingularManifold::new(
            4,
            CrossSection::round_sphere(3, 1.0).unwrap(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        assert_abs_diff_eq!(m4.scal(0.5).unwrap(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn scal_round_sphere_spindle() {
        // Spindle c=1, L=π over S³(1) is the round S⁴: R ≡ m(m+1) = 12.
        let mfd = SingularManifold::new(
            4,
            CrossSection::round_sphere(3, 1.0).unwrap(),
            Profile::spindle(1.0, std::f64::consts::PI).unwrap(),
            OuterBc::SecondConicalTip,
        )
        .unwrap();
        for r in [0.2, 1.0, std::f64::consts::PI / 2.0, 2.8] {
            assert_relative_eq!(mfd.scal(r).unwrap(), 12.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn scal_domain_errors() {
        let m = flat_cone3();
        assert!(matches!(m.scal(0.0), Err(Error::Domain(_))));
        assert!(matches!(m.scal(1.0), Err(Error::Domain(_))));
        assert!(matches!(m.scal(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn ricci_examples() {
        let m = flat_cone3();
        let (rr, fib) = m.ricci_warped(0.4).unwrap();
        assert_abs_diff_eq!(rr, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(fib, 0.0, epsilon = 1e-13);

        let sphere = SingularManifold::new(
            4,
            CrossSection::round_sphere(3, 1.0).unwrap(),
            Profile::spindle(1.0, std::f64::consts::PI).unwrap(),
            OuterBc::SecondConicalTip,
        )
        .unwrap();
        let (rr, fib) = sphere.ricci_warped(std::f64::consts::PI / 2.0).unwrap();
        assert_relative_eq!(rr, 3.0, max_relative = 1e-12);
        // Ric = 3g on the fiber block means coefficient 3φ² with φ(π/2) = 1.
        assert_relative_eq!(fib, 3.0, max_relative = 1e-12);

        // Exact cone over S²(c), c ≠ 1: rr = 0, fiber = (m−1)(κ−1).
        let c = 0.8;
        let cone = SingularManifold::new(
            3,
            CrossSection::round_sphere(2, c).unwrap(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        let (rr, fib) = cone.ricci_warped(0.6).unwrap();
        assert_abs_diff_eq!(rr, 0.0, epsilon = 1e-13);
        assert_relative_eq!(fib, 1.0 / (c * c) - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ricci_requires_einstein_link() {
        let cs = CrossSection::from_modes(
            2,
            vec![crate::cross_section::Mode { mu: 3.0, multiplicity: 1 }],
            2.5,
            "explicit",
        )
        .unwrap();
        let m = SingularManifold::new(
            3,
            cs,
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        assert!(matches!(m.ricci_warped(0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn trace_identity_on_grid() {
        // g^{rr} Ric_rr + F·m/φ² = R to 1e−10 on analytic profiles.
        let cases = vec![
            flat_cone3(),
            SingularManifold::new(
                3,
                CrossSection::round_sphere(2, 0.9).unwrap(),
                Profile::perturbed_cone(0.1, 1.5, 1.0).unwrap(),
                OuterBc::Dirichlet,
            )
            .unwrap(),
            SingularManifold::new(
                4,
                CrossSection::round_sphere(3, 1.2).unwrap(),
                Profile::spindle(0.9, std::f64::consts::PI).unwrap(),
                OuterBc::SecondConicalTip,
            )
            .unwrap(),
        ];
        for mfd in cases {
            let m = (mfd.n - 1) as f64;
            let l = mfd.profile.l();
            for j in 1..40 {
                let r = l * j as f64 / 40.0;
                let (rr, fib) = mfd.ricci_warped(r).unwrap();
                let phi = mfd.profile.phi(r);
                let trace = rr + fib * m / (phi * phi);
                let scal = mfd.scal(r).unwrap();
                assert_abs_diff_eq!(trace, scal, epsilon = 1e-10 * scal.abs().max(1.0));
            }
        }
    }

    #[test]
    fn asymptotic_condition_exact_cone_is_zero() {
        let p = Profile::exact_cone(1.0).unwrap();
        let rep = check_asymptotic_condition(&p, 3);
        assert_eq!(rep.bounds.len(), 3 / 2 + 3);
        assert!(rep.overall);
        for b in &rep.bounds {
            assert_abs_diff_eq!(*b, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn asymptotic_condition_perturbed_cone_passes() {
        let p = Profile::perturbed_cone(0.1, 1.5, 1.0).unwrap();
        let rep = check_asymptotic_condition(&p, 4);
        assert!(rep.overall, "bounds {:?}, pass {:?}", rep.bounds, rep.pass);
        for b in &rep.bounds {
            assert!(b.is_finite());
        }
    }

    #[test]
    fn asymptotic_condition_rough_cone_fails_at_zeroth_order() {
        let p = Profile::perturbed_cone_diagnostic(0.1, 0.5, 1.0).unwrap();
        assert!(p.is_diagnostic());
        let rep = check_asymptotic_condition(&p, 3);
        assert!(!rep.pass[0], "bounds {:?}", rep.bounds);
        assert!(!rep.overall);
    }

    #[test]
    fn profile_constructors_validate() {
        assert!(Profile::perturbed_cone(0.1, 0.5, 1.0).is_err());
        assert!(Profile::perturbed_cone(-2.0, 1.0, 1.0).is_err()); // phi(L) <= 0
        assert!(Profile::spindle(0.0, 1.0).is_err());
        assert!(Profile::exact_cone(0.0).is_err());
        assert!(Profile::exact_cone(f64::INFINITY).is_err());
    }

    #[test]
    fn spindle_profile_values() {
        let c = 0.9;
        let l = 2.0;
        let p = Profile::spindle(c, l).unwrap();
        assert_eq!(p.c0(), c);
        let a = l / std::f64::consts::PI;
        assert_relative_eq!(p.phi(l / 2.0), c * a, max_relative = 1e-13);
        // Slope at the near tip approaches c.
        assert_relative_eq!(p.dphi(1e-8), c, max_relative = 1e-8);
        // Symmetric about L/2.
        assert_relative_eq!(p.phi(0.3), p.phi(l - 0.3), max_relative = 1e-12);
    }

    #[test]
    fn tabulated_profile_tracks_its_source() {
        let l = std::f64::consts::PI;
        let src = Profile::spindle(0.8, l).unwrap();
        let nodes: Vec<f64> = (1..=400).map(|j| l * j as f64 / 400.0).collect();
        let tab = Profile::tabulated(
            nodes.clone(),
            nodes.iter().map(|&r| src.phi(r)).collect(),
            nodes.iter().map(|&r| src.dphi(r)).collect(),
            nodes.iter().map(|&r| src.d2phi(r)).collect(),
        )
        .unwrap();
        for r in [0.1, 0.9, 1.7, 3.0] {
            assert_relative_eq!(tab.phi(r), src.phi(r), max_relative = 1e-4);
            assert_relative_eq!(tab.dphi(r), src.dphi(r), max_relative = 1e-3);
        }
        assert_relative_eq!(tab.c0(), 0.8, max_relative = 1e-4);
    }

    #[test]
    fn manifold_validation() {
        let cs = CrossSection::round_sphere(2, 1.0).unwrap();
        // Dimension mismatch.
        assert!(SingularManifold::new(
            4,
            cs.clone(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet
        )
        .is_err());
        // Second tip needs a spindle.
        assert!(SingularManifold::new(
            3,
            cs.clone(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::SecondConicalTip
        )
        .is_err());
        // Inadmissible link refused by the strict constructor, allowed in
        // diagnostic mode.
        let wide = CrossSection::round_sphere(2, 1.8).unwrap();
        assert!(SingularManifold::new(
            3,
            wide.clone(),
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet
        )
        .is_err());
        let diag = SingularManifold::new_diagnostic(
            3,
            wide,
            Profile::exact_cone(1.0).unwrap(),
            OuterBc::Dirichlet,
        )
        .unwrap();
        assert!(diag.is_diagnostic());
        // Spindle tip slope rescales the effective link: c = 1.5 over S²(1)
        // gives min(scal, μ₀)/c² = 2/2.25 < 1 = n−2, refused; c = 1.3 passes.
        let unit = CrossSection::round_sphere(2, 1.0).unwrap();
        assert!(SingularManifold::new(
            3,
            unit.clone(),
            Profile::spindle(1.5, std::f64::consts::PI).unwrap(),
            OuterBc::SecondConicalTip
        )
        .is_err());
        assert!(SingularManifold::new(
            3,
            unit,
            Profile::spindle(1.3, std::f64::consts::PI).unwrap(),
            OuterBc::SecondConicalTip
        )
        .is_ok());
    }
}
