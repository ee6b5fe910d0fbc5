//! Cross-section spectral data: the eigenvalues μ_i (with multiplicities) of
//! −4Δ + R on the link N of a cone, plus the minimum of its scalar curvature.
//!
//! Only the spectral payload is represented; pointwise eigenfunctions on N are
//! not. Analytic constructors (round spheres) extend their mode list on
//! demand; explicit lists are finite and refuse out-of-range requests.
//!
//! Note on the operator convention: the source material states the link
//! eigenvalue problem once for −Δ + R and once for −4Δ + R; the separation of
//! variables is only consistent with −4Δ + R, which is what this module uses.

use crate::error::{Error, Result};

/// One link eigenvalue with its degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub mu: f64,
    pub multiplicity: u32,
}

/// Admissibility verdict for the cone condition on the link.
#[derive(Debug, Clone, Copy)]
pub struct ConditionReport {
    pub admissible: bool,
    /// min(scal_min, μ_0) − (n − 2); positive iff admissible.
    pub margin: f64,
}

#[derive(Debug, Clone)]
enum ModeSource {
    /// Round sphere S^m(c): modes computable in closed form for any index.
    RoundSphere { c: f64 },
    /// Finite user-provided list; indices beyond it are an error.
    Explicit,
}

/// Spectral model of the cross-section (link) N of a cone.
#[derive(Debug, Clone)]
pub struct CrossSection {
    fiber_dim: usize,
    modes: Vec<Mode>,
    scal_min: f64,
    label: String,
    volume: Option<f64>,
    source: ModeSource,
}

/// Number of initially materialized modes for analytic constructors.
const ANALYTIC_PREFETCH: usize = 8;

impl CrossSection {
    /// Round sphere S^m(c) of radius c: μ_k = [4k(k+m−1) + m(m−1)]/c² with
    /// spherical-harmonic multiplicities, scal_min = m(m−1)/c².
    pub fn round_sphere(m: usize, c: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("round_sphere: m = {m} < 2")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("round_sphere: radius c = {c} must be positive")));
        }
        let mut cs = Self {
            fiber_dim: m,
            modes: Vec::new(),
            scal_min: (m * (m - 1)) as f64 / (c * c),
            label: format!("S^{m}({c})"),
            volume: Some(sphere_area(m, c)),
            source: ModeSource::RoundSphere { c },
        };
        for k in 0..ANALYTIC_PREFETCH {
            let mode = cs.analytic_mode(k)?;
            cs.modes.push(mode);
        }
        Ok(cs)
    }

    /// Cross-section from an explicit mode list (nondecreasing in μ).
    pub fn from_modes(
        fiber_dim: usize,
        modes: Vec<Mode>,
        scal_min: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if fiber_dim < 2 {
            return Err(Error::InvalidParameter(format!("from_modes: fiber_dim = {fiber_dim} < 2")));
        }
        if modes.is_empty() {
            return Err(Error::InvalidParameter("from_modes: empty mode list".into()));
        }
        for pair in modes.windows(2) {
            if pair[1].mu < pair[0].mu {
                return Err(Error::InvalidParameter(format!(
                    "from_modes: modes not sorted ({} after {})",
                    pair[1].mu, pair[0].mu
                )));
            }
        }
        if modes.iter().any(|m| m.multiplicity == 0 || !m.mu.is_finite()) {
            return Err(Error::InvalidParameter("from_modes: multiplicities must be >= 1 and mu finite".into()));
        }
        if modes[0].mu < scal_min - 1e-12 * scal_min.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "from_modes: mu_0 = {} below scal_min = {scal_min}; -4*Laplacian + R dominates min R",
                modes[0].mu
            )));
        }
        Ok(Self {
            fiber_dim,
            modes,
            scal_min,
            label: label.into(),
            volume: None,
            source: ModeSource::Explicit,
        })
    }

    /// Parse the line-based cross-section file format:
    ///
    /// ```text
    /// fiber_dim 2
    /// scal_min 2.0
    /// volume 12.566370614359172   # optional
    /// mode 2.0 1
    /// mode 10.0 3
    /// ```
    ///
    /// `#` starts a comment; blank lines are ignored. Errors carry the
    /// offending line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fiber_dim: Option<usize> = None;
        let mut scal_min: Option<f64> = None;
        let mut volume: Option<f64> = None;
        let mut modes: Vec<Mode> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or("");
            let bad = |what: &str| {
                Error::InvalidParameter(format!("cross-section file line {line_no}: {what}: {raw:?}"))
            };
            match key {
                "fiber_dim" => {
                    let v = parts
                        .next()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| bad("expected integer fiber_dim"))?;
                    fiber_dim = Some(v);
                }
                "scal_min" => {
                    let v = parts
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| bad("expected real scal_min"))?;
                    scal_min = Some(v);
                }
                "volume" => {
                    let v = parts
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| bad("expected real volume"))?;
                    volume = Some(v);
                }
                "mode" => {
                    let mu = parts
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| bad("expected real mu"))?;
                    let mult = parts
                        .next()
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| bad("expected positive integer multiplicity"))?;
                    modes.push(Mode { mu, multiplicity: mult });
                }
                _ => return Err(bad("unknown key")),
            }
            if parts.next().is_some() {
                return Err(bad("trailing tokens"));
            }
        }
        let fiber_dim = fiber_dim
            .ok_or_else(|| Error::InvalidParameter("cross-section file: missing fiber_dim".into()))?;
        let scal_min = scal_min
            .ok_or_else(|| Error::InvalidParameter("cross-section file: missing scal_min".into()))?;
        let mut cs = Self::from_modes(fiber_dim, modes, scal_min, "explicit")?;
        cs.volume = volume;
        Ok(cs)
    }

    /// Fiber dimension m = n − 1.
    #[must_use]
    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// Minimum of the link scalar curvature.
    #[must_use]
    pub fn scal_min(&self) -> f64 {
        self.scal_min
    }

    #[must_use]
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Riemannian volume of the link, when known (analytic constructors or an
    /// explicit `volume` entry); used for eigenfunction normalization.
    #[must_use]
    pub fn volume(&self) -> Option<f64> {
        self.volume
    }

    /// Einstein constant κ with Ric_{h0} = (m−1)κ h0, when the link is a known
    /// Einstein space (round spheres: κ = 1/c²); `None` for explicit lists.
    #[must_use]
    pub fn einstein_kappa(&self) -> Option<f64> {
        match self.source {
            ModeSource::RoundSphere { c } => Some(1.0 / (c * c)),
            ModeSource::Explicit => None,
        }
    }

    /// Modes materialized so far (analytic sources can serve any index via
    /// [`Self::mode`]).
    #[must_use]
    pub fn listed_modes(&self) -> &[Mode] {
        &self.modes
    }

    /// The i-th mode (0-based). Analytic sources compute any index on demand;
    /// explicit lists error beyond their length.
    pub fn mode(&self, i: usize) -> Result<Mode> {
        if let Some(m) = self.modes.get(i) {
            return Ok(*m);
        }
        match self.source {
            ModeSource::RoundSphere { .. } => self.analytic_mode(i),
            ModeSource::Explicit => Err(Error::InvalidParameter(format!(
                "mode index {i} beyond explicit list of length {}",
                self.modes.len()
            ))),
        }
    }

    fn analytic_mode(&self, k: usize) -> Result<Mode> {
        let ModeSource::RoundSphere { c } = self.source else {
            return Err(Error::Unsupported("analytic_mode on explicit cross-section".into()));
        };
        let m = self.fiber_dim;
        let mu = ((4 * k * (k + m - 1) + m * (m - 1)) as f64) / (c * c);
        Ok(Mode { mu, multiplicity: harmonic_multiplicity(m, k)? })
    }

    /// Cone admissibility: scal_min > n−2 and μ_0 > n−2, with the common
    /// margin min(scal_min, μ_0) − (n−2).
    pub fn check_cone_condition(&self, n: usize) -> Result<ConditionReport> {
        if n != self.fiber_dim + 1 || n < 3 {
            return Err(Error::InvalidParameter(format!(
                "check_cone_condition: n = {n} incompatible with fiber_dim = {}",
                self.fiber_dim
            )));
        }
        let mu0 = self.modes[0].mu;
        let margin = self.scal_min.min(mu0) - (n as f64 - 2.0);
        Ok(ConditionReport { admissible: margin > 0.0, margin })
    }

    /// Indicial exponent datum ν_i = √(μ_i − (n−2)); errors with the deficit
    /// when the mode is subcritical (μ_i ≤ n−2 makes the root nonreal or zero).
    pub fn nu(&self, i: usize, n: usize) -> Result<f64> {
        if n != self.fiber_dim + 1 {
            return Err(Error::InvalidParameter(format!(
                "nu: n = {n} incompatible with fiber_dim = {}",
                self.fiber_dim
            )));
        }
        let mu = self.mode(i)?.mu;
        let shifted = mu - (n as f64 - 2.0);
        if shifted <= 0.0 {
            return Err(Error::SubcriticalMode { index: i, deficit: shifted });
        }
        Ok(shifted.sqrt())
    }
}

/// Surface area of the round sphere S^m(c).
fn sphere_area(m: usize, c: f64) -> f64 {
    // 2 π^{(m+1)/2} / Γ((m+1)/2) · c^m
    let half = (m as f64 + 1.0) / 2.0;
    let ln_area = std::f64::consts::PI.ln() * half + std::f64::consts::LN_2
        - crate::special_fn::ln_gamma(half).expect("half > 0");
    ln_area.exp() * c.powi(m as i32)
}

/// Dimension of degree-k spherical harmonics on S^m:
/// (2k+m−1)(k+m−2)!/(k!(m−1)!).
fn harmonic_multiplicity(m: usize, k: usize) -> Result<u32> {
    if k == 0 {
        return Ok(1);
    }
    let mut num: u128 = (2 * k + m - 1) as u128;
    for j in (k + 1)..=(k + m - 2) {
        num = num
            .checked_mul(j as u128)
            .ok_or_else(|| Error::NumericalFailure("multiplicity overflow".into()))?;
    }
    let mut den: u128 = 1;
    for j in 1..=(m - 1) {
        den *= j as u128;
    }
    u32::try_from(num / den)
        .map_err(|_| Error::NumericalFailure(format!("multiplicity overflow at m = {m}, k = {k}")))
}
