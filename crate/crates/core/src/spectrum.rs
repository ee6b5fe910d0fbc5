//! Global spectrum of −4Δ+R assembled from per-mode radial spectra.
//!
//! Each link mode μ_i contributes the radial pencil of [`crate::radial_modes`];
//! the global spectrum is their multiplicity-weighted merge. Truncation at
//! `lambda_max` is certified through the per-mode lower bound (min Q plus the
//! flat Poincaré gap), so a reported spectrum is complete below the certified
//! threshold.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{OuterBc, SingularManifold};
use crate::radial_modes::{discretize_with_outer, to_w, ModeODE, ModeOperator, OuterTreatment, RadialGrid};

/// Bisection tolerance for assembled eigenvalues, relative to max(1, λ_max).
const EIGEN_REL_TOL: f64 = 1e-11;
/// Relative gap below which the ground eigenvalue is reported non-simple.
const SIMPLE_GAP_TOL: f64 = 1e-8;
/// Relative threshold under which a sample does not count for sign changes.
const NODAL_SIGNIFICANCE: f64 = 1e-9;
/// Iteration cap for the deflated inverse-power verification.
const MINMAX_MAX_ITER: usize = 500;
/// Stop once the deflated Rayleigh quotient moves less than this (relative).
const MINMAX_REL_TOL: f64 = 1e-11;

/// One merged eigenvalue: radial level `radial_index` (1-based) of link mode
/// `mode_index`, carrying the link eigenvalue's multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    pub lambda: f64,
    pub mode_index: usize,
    pub radial_index: usize,
    pub multiplicity: u32,
}

/// Where the assembly stopped and what that certifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Modes whose radial spectra were extracted.
    pub num_modes_used: usize,
    /// Every eigenvalue at or below this threshold is present in `entries`.
    pub lambda_max_certified: f64,
}

/// Sorted global spectrum with certified truncation.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Nondecreasing in lambda; ties broken by (mode_index, radial_index).
    pub entries: Vec<SpectralEntry>,
    pub truncation: Truncation,
    /// True when a subcritical mode forced the diagnostic (Dirichlet-surrogate)
    /// operator; the reported entries then do not bound a true spectrum below.
    pub non_semibounded: bool,
}

impl Spectrum {
    /// Total count with multiplicities.
    #[must_use]
    pub fn expanded_len(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity as usize).sum()
    }

    /// 1-based multiplicity-counted index range (first, last) of the entry at
    /// `pos`.
    #[must_use]
    pub fn block_indices(&self, pos: usize) -> (usize, usize) {
        let before: usize =
            self.entries[..pos].iter().map(|e| e.multiplicity as usize).sum();
        (before + 1, before + self.entries[pos].multiplicity as usize)
    }
}

/// Radial eigenfunction samples of one assembled level, normalized so that
/// ∫u²φ^{n−1}dr times the link volume is 1 (volume 1 when the link volume is
/// not available).
#[derive(Debug, Clone)]
pub struct EigenfunctionProfile {
    pub mode_index: usize,
    pub radial_index: usize,
    pub lambda: f64,
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
}

fn outer_treatment(mfd: &SingularManifold) -> OuterTreatment {
    match mfd.outer_bc {
        OuterBc::Dirichlet => OuterTreatment::Dirichlet,
        OuterBc::SecondConicalTip => OuterTreatment::ConicalTip,
    }
}

/// Discretized radial operator of one link mode on this manifold.
pub fn mode_operator(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    mode_index: usize,
) -> Result<ModeOperator> {
    let mode = mfd.cross_section.mode(mode_index)?;
    let ode = ModeODE::new(mfd.n, mode.mu, mfd.profile.clone())?;
    discretize_with_outer(&ode, grid, outer_treatment(mfd))
}

/// Default assembly grid: the deep log grid up to the wall for Dirichlet
/// manifolds, stopping short of the second tip for spindles.
pub fn default_grid(mfd: &SingularManifold) -> Result<RadialGrid> {
    let l = mfd.profile.l();
    match mfd.outer_bc {
        OuterBc::Dirichlet => RadialGrid::default_for(l),
        OuterBc::SecondConicalTip => RadialGrid::log_uniform(1e-6 * l, l * (1.0 - 1e-3), 2048),
    }
}

/// Merge the per-mode spectra below `lambda_max`.
///
/// Modes are scanned in link order until the certified per-mode floor clears
/// `lambda_max` (valid for every later mode because the w-potential is
/// pointwise increasing in μ). Explicit finite mode lists certify only up to
/// the floor of their last listed mode.
pub fn assemble(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    lambda_max: f64,
) -> Result<Spectrum> {
    if !lambda_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "assemble: lambda_max = {lambda_max} not finite"
        )));
    }
    let mut ops: Vec<(usize, u32, ModeOperator)> = Vec::new();
    let mut non_semibounded = false;
    let mut certified = lambda_max;
    let mut mode_index = 0usize;
    loop {
        let mode = match mfd.cross_section.mode(mode_index) {
            Ok(m) => m,
            Err(_) => {
                // Explicit list exhausted: any unlisted mode has μ at least the
                // last listed one, so its floor still bounds the gap.
                if let Some((_, _, last)) = ops.last() {
                    certified = lambda_max.min(last.certified_lower_bound());
                }
                break;
            }
        };
        let ode = ModeODE::new(mfd.n, mode.mu, mfd.profile.clone())?;
        let op = discretize_with_outer(&ode, grid, outer_treatment(mfd))?;
        if !op.is_diagnostic() && op.certified_lower_bound() > lambda_max {
            break;
        }
        non_semibounded |= op.is_diagnostic();
        ops.push((mode_index, mode.multiplicity, op));
        mode_index += 1;
    }
    let tol = EIGEN_REL_TOL * lambda_max.abs().max(1.0);
    let per_mode: Vec<Result<Vec<SpectralEntry>>> = ops
        .par_iter()
        .map(|(idx, mult, op)| {
            let count = op.count_below(lambda_max);
            if count == 0 {
                return Ok(Vec::new());
            }
            let vals = op.eigenvalues(1, count, tol)?;
            Ok(vals
                .into_iter()
                .enumerate()
                .map(|(k, lambda)| SpectralEntry {
                    lambda,
                    mode_index: *idx,
                    radial_index: k + 1,
                    multiplicity: *mult,
                })
                .collect())
        })
        .collect();
    let mut entries = Vec::new();
    for block in per_mode {
        entries.extend(block?);
    }
    entries.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.mode_index.cmp(&b.mode_index))
            .then(a.radial_index.cmp(&b.radial_index))
    });
    Ok(Spectrum {
        entries,
        truncation: Truncation { num_modes_used: ops.len(), lambda_max_certified: certified },
        non_semibounded,
    })
}

/// Discrete Rayleigh quotient of a radial profile in one link mode:
/// (wᵀAw)/(wᵀDw) for the same pencil the eigen-solves use, which realizes
/// [∫(4|∇u|² + R u²)] / ∫u² for u(r)·Y_mode.
pub fn rayleigh(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    mode_index: usize,
    u: &[f64],
) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "rayleigh: {} samples on a grid of {} nodes",
            u.len(),
            grid.len()
        )));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("rayleigh: non-finite sample".into()));
    }
    let op = mode_operator(mfd, grid, mode_index)?;
    let w: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u)
        .map(|(&r, &uj)| to_w(&mfd.profile, mfd.n, r, uj))
        .collect();
    let den: f64 = w.iter().zip(op.mass()).map(|(x, m)| x * x * m).sum();
    if den <= 0.0 {
        return Err(Error::InvalidParameter("rayleigh: zero function".into()));
    }
    let aw = op.pencil().apply_stiff(&w);
    let num: f64 = aw.iter().zip(&w).map(|(y, x)| y * x).sum();
    Ok(num / den)
}

fn profile_from_w(
    mfd: &SingularManifold,
    op: &ModeOperator,
    mode_index: usize,
    radial_index: usize,
    lambda: f64,
    w: &[f64],
) -> EigenfunctionProfile {
    let vol = mfd.cross_section.volume().unwrap_or(1.0);
    let mut u = op.u_samples(&mfd.profile, w);
    let total: f64 = u.iter().sum();
    let scale = if total < 0.0 { -1.0 } else { 1.0 } / vol.sqrt();
    for x in &mut u {
        *x *= scale;
    }
    EigenfunctionProfile {
        mode_index,
        radial_index,
        lambda,
        nodes: op.grid().nodes().to_vec(),
        u,
    }
}

/// One assembled eigenfunction (radial level `radial_index` ≥ 1 of one mode).
pub fn eigenfunction(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    mode_index: usize,
    radial_index: usize,
) -> Result<EigenfunctionProfile> {
    if radial_index == 0 {
        return Err(Error::InvalidParameter("eigenfunction: radial_index is 1-based".into()));
    }
    let op = mode_operator(mfd, grid, mode_index)?;
    // Locate the level cheaply first: the certified floor can sit far below
    // the eigenvalue on deep grids, so it is no basis for the tolerance.
    let probe = op.eigenvalues(radial_index, radial_index, 1e-4)?[0];
    let tol = EIGEN_REL_TOL * probe.abs().max(1.0);
    let lambda = op.eigenvalues(radial_index, radial_index, tol)?[0];
    let w = op.eigenvector(lambda)?;
    Ok(profile_from_w(mfd, &op, mode_index, radial_index, lambda, &w))
}

/// Smallest eigenvalue with its eigenfunction and a simplicity verdict.
///
/// The ground level lives in the smallest-μ mode (the w-potential is pointwise
/// increasing in μ). `simple` requires a clear gap to the next assembled level
/// and link multiplicity one.
pub fn ground_state(
    mfd: &SingularManifold,
    grid: &RadialGrid,
) -> Result<(f64, EigenfunctionProfile, bool)> {
    let mode0 = mfd.cross_section.mode(0)?;
    let op0 = mode_operator(mfd, grid, 0)?;
    if op0.is_diagnostic() {
        return Err(Error::NonSemibounded(format!(
            "mode 0 is subcritical (mu = {}); the ground value is a diagnostic artifact",
            mode0.mu
        )));
    }
    let probe = op0.eigenvalues(1, 1, 1e-4)?[0];
    let tol = EIGEN_REL_TOL * probe.abs().max(1.0);
    let pair = op0.eigenvalues(1, 2, tol)?;
    let lambda1 = pair[0];
    let w = op0.eigenvector(lambda1)?;
    let profile = profile_from_w(mfd, &op0, 0, 1, lambda1, &w);
    if let Some(bad) = profile.u.iter().position(|&x| x <= 0.0) {
        return Err(Error::NumericalFailure(format!(
            "ground eigenfunction not positive at node index {bad}"
        )));
    }
    let mut next = pair[1];
    if let Ok(mode1) = mfd.cross_section.mode(1) {
        let ode1 = ModeODE::new(mfd.n, mode1.mu, mfd.profile.clone())?;
        let op1 = discretize_with_outer(&ode1, grid, outer_treatment(mfd))?;
        if !op1.is_diagnostic() {
            next = next.min(op1.eigenvalues(1, 1, tol)?[0]);
        }
    }
    let gap_ok = next - lambda1 > SIMPLE_GAP_TOL * lambda1.abs().max(1.0);
    Ok((lambda1, profile, gap_ok && mode0.multiplicity == 1))
}

/// Nodal domains of a radial sample vector: significant sign changes plus one.
#[must_use]
pub fn nodal_domains(u: &[f64]) -> usize {
    let max_abs = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if max_abs == 0.0 {
        return 0;
    }
    let mut domains = 1usize;
    let mut last_sign = 0i8;
    for &x in u {
        if x.abs() <= NODAL_SIGNIFICANCE * max_abs {
            continue;
        }
        let sign = if x > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            domains += 1;
        }
        last_sign = sign;
    }
    domains
}

/// One Courant verdict: nodal-domain count against a global index bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CourantRow {
    pub global_index: usize,
    pub nodal_domains: usize,
    pub pass: bool,
}

/// Eigenfunction profiles for every mode-0 entry of the spectrum, in entry
/// order.
pub fn mode0_profiles(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    spec: &Spectrum,
) -> Result<Vec<EigenfunctionProfile>> {
    let op = mode_operator(mfd, grid, 0)?;
    spec.entries
        .iter()
        .filter(|e| e.mode_index == 0)
        .map(|e| {
            let w = op.eigenvector(e.lambda)?;
            Ok(profile_from_w(mfd, &op, 0, e.radial_index, e.lambda, &w))
        })
        .collect()
}

/// Courant bound for the radial (mode-0) levels: sign changes + 1 must not
/// exceed the multiplicity-counted global index of the level.
pub fn courant_radial_check(
    spec: &Spectrum,
    profiles: &[EigenfunctionProfile],
) -> Result<Vec<CourantRow>> {
    profiles
        .iter()
        .map(|p| {
            let pos = spec
                .entries
                .iter()
                .position(|e| e.mode_index == 0 && e.radial_index == p.radial_index)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "courant_radial_check: mode-0 level {} not in the spectrum",
                        p.radial_index
                    ))
                })?;
            let (first, _) = spec.block_indices(pos);
            let domains = nodal_domains(&p.u);
            Ok(CourantRow { global_index: first, nodal_domains: domains, pass: domains <= first })
        })
        .collect()
}

/// Largest nodal-domain count among degree-k product harmonics on S²:
/// (k−m+1) latitude bands times max(1, 2m) longitude sectors.
fn fiber_max_domains(fiber_dim: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Ok(1);
    }
    if fiber_dim != 2 {
        return Err(Error::Unsupported(format!(
            "nodal-domain bound for degree {k} harmonics only available on S² links (fiber_dim = {fiber_dim})"
        )));
    }
    Ok((0..=k).map(|m| (k - m + 1) * (2 * m).max(1)).max().unwrap_or(1))
}

/// Courant bound over the first `count` multiplicity-counted levels, using
/// product eigenfunctions u(r)·Y: radial domains times the largest harmonic
/// domain count, against the last index of each level's block.
pub fn courant_full_check(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    spec: &Spectrum,
    count: usize,
) -> Result<Vec<CourantRow>> {
    let mut ops: BTreeMap<usize, ModeOperator> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut expanded = 0usize;
    for entry in &spec.entries {
        if expanded >= count {
            break;
        }
        let op = match ops.get(&entry.mode_index) {
            Some(op) => op,
            None => {
                let op = mode_operator(mfd, grid, entry.mode_index)?;
                ops.entry(entry.mode_index).or_insert(op)
            }
        };
        let w = op.eigenvector(entry.lambda)?;
        let radial = {
            let u = op.u_samples(&mfd.profile, &w);
            nodal_domains(&u)
        };
        let fiber = fiber_max_domains(mfd.cross_section.fiber_dim(), entry.mode_index)?;
        let last = expanded + entry.multiplicity as usize;
        let domains = radial * fiber;
        rows.push(CourantRow { global_index: last, nodal_domains: domains, pass: domains <= last });
        expanded = last;
    }
    Ok(rows)
}

/// One min-max comparison: the assembled eigenvalue against an independently
/// minimized Rayleigh quotient over the complement of the previous levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxRow {
    pub global_index: usize,
    pub assembled: f64,
    pub deflated: f64,
    pub rel_err: f64,
}

fn d_dot(mass: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(mass).map(|((x, y), m)| x * y * m).sum()
}

fn d_project(mass: &[f64], basis: &[Vec<f64>], z: &mut [f64]) {
    for v in basis {
        let c = d_dot(mass, v, z);
        for (zj, vj) in z.iter_mut().zip(v) {
            *zj -= c * vj;
        }
    }
}

/// Smallest Rayleigh quotient of the pencil D-orthogonal to `prev`, by
/// projected inverse power iteration from a fixed shift below the spectrum.
fn deflated_smallest(op: &ModeOperator, prev: &[Vec<f64>]) -> Result<f64> {
    let mass = op.mass();
    let pencil = op.pencil();
    let floor = op.certified_lower_bound();
    let sigma = floor - 1e-2 * floor.abs().max(1.0);
    // Re-orthonormalize the deflation basis in the D inner product.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(prev.len());
    for v in prev {
        let mut w = v.clone();
        d_project(mass, &basis, &mut w);
        let norm = d_dot(mass, &w, &w).sqrt();
        if norm <= 0.0 {
            return Err(Error::NumericalFailure("deflation basis degenerate".into()));
        }
        for x in &mut w {
            *x /= norm;
        }
        basis.push(w);
    }
    let m = mass.len();
    let mut z = vec![1.0f64; m];
    d_project(mass, &basis, &mut z);
    let norm = d_dot(mass, &z, &z).sqrt();
    if norm <= 0.0 {
        return Err(Error::NumericalFailure("deflated start vector vanished".into()));
    }
    for x in &mut z {
        *x /= norm;
    }
    let mut rho_prev = f64::INFINITY;
    for _ in 0..MINMAX_MAX_ITER {
        let rhs: Vec<f64> = z.iter().zip(mass).map(|(x, mj)| x * mj).collect();
        let mut y = pencil.shifted_solve(sigma, &rhs)?;
        d_project(mass, &basis, &mut y);
        let norm = d_dot(mass, &y, &y).sqrt();
        if !(norm > 0.0) {
            return Err(Error::NumericalFailure("inverse power iterate vanished".into()));
        }
        for x in &mut y {
            *x /= norm;
        }
        let ay = pencil.apply_stiff(&y);
        let rho = y.iter().zip(&ay).map(|(x, a)| x * a).sum::<f64>()
            / d_dot(mass, &y, &y);
        z = y;
        if (rho - rho_prev).abs() <= MINMAX_REL_TOL * rho.abs().max(1.0) {
            return Ok(rho);
        }
        rho_prev = rho;
    }
    Ok(rho_prev)
}

/// Verify the discrete min-max property for the first `count`
/// multiplicity-counted levels: minimizing the Rayleigh quotient orthogonally
/// to the consumed eigenvectors reproduces each assembled eigenvalue.
pub fn min_max_check(
    mfd: &SingularManifold,
    grid: &RadialGrid,
    spec: &Spectrum,
    count: usize,
) -> Result<Vec<MinMaxRow>> {
    let modes = spec.truncation.num_modes_used;
    let mut ops = Vec::with_capacity(modes);
    let mut consumed: Vec<Vec<Vec<f64>>> = vec![Vec::new(); modes];
    let mut next_val = Vec::with_capacity(modes);
    for idx in 0..modes {
        let op = mode_operator(mfd, grid, idx)?;
        next_val.push(deflated_smallest(&op, &consumed[idx])?);
        ops.push(op);
    }
    let mut rows = Vec::new();
    let mut expanded = 0usize;
    for entry in &spec.entries {
        if expanded >= count {
            break;
        }
        let deflated = next_val
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        let rel_err = (deflated - entry.lambda).abs() / entry.lambda.abs().max(1.0);
        rows.push(MinMaxRow {
            global_index: expanded + 1,
            assembled: entry.lambda,
            deflated,
            rel_err,
        });
        let m = entry.mode_index;
        let w = ops[m].eigenvector(entry.lambda)?;
        consumed[m].push(w);
        next_val[m] = deflated_smallest(&ops[m], &consumed[m])?;
        expanded += entry.multiplicity as usize;
    }
    Ok(rows)
}

/// Weyl-consistent growth fit: the largest c with λ_k ≥ c·k^{2/n} over the
/// multiplicity-counted sequence, plus the spread of λ_k·k^{−2/n}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    pub c: f64,
    pub spread: f64,
}

pub fn weyl_fit(spec: &Spectrum, n: usize) -> Result<WeylFit> {
    if spec.entries.is_empty() {
        return Err(Error::InvalidParameter("weyl_fit: empty spectrum".into()));
    }
    let p = 2.0 / n as f64;
    let mut k = 0usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for entry in &spec.entries {
        for _ in 0..entry.multiplicity {
            k += 1;
            let ratio = entry.lambda / (k as f64).powf(p);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok(WeylFit { c: lo, spread: hi / lo })
}
