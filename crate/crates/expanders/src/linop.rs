//! Finite-difference discretization of the drift operator
//! L(φ) = Δφ + ⟨x,∇φ⟩ − 2φ on equivariant expanders, per Fourier mode.
//!
//! On the surface metric ds² + r(s)²dα², a mode φ = f(s)e^{ikα} gives
//!
//!   L f = f″ + (r′/r + r r′) f′ − (k²/r² + 2) f
//!       = (W f′)′ / W − (k²/r² + 2) f,      W = r e^{r²/2},
//!
//! since ⟨x, ∇φ⟩ = r r′ f′ on equivariant surfaces. The divergence form
//! makes the assembled matrix exactly self-adjoint in the W-weighted inner
//! product (symmetrizable by a diagonal similarity), while duality against
//! the formal adjoint L*(η) = Δη − ⟨x,∇η⟩ − (n + |x⊥|² + 2)η is measured in
//! the surface inner product ⟨u,v⟩ = ∫ u v r ds. Truncation uses homogeneous
//! Dirichlet conditions, justified by the e^{−R²/4} decay of admissible
//! deformations. n = 2 is hard-wired.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::{cubic_uniform, cumulative_integral};
use crate::profile::{ProfileCurve, ProfileError};

#[derive(Debug, Error)]
pub enum LinopError {
    #[error("grid too coarse: {0} interior nodes (need at least 16)")]
    TooCoarse(usize),
    #[error("truncation radius {0} must be at least 4")]
    TruncationTooSmall(f64),
    #[error("base profile not accepted: {0}")]
    BaseNotAccepted(String),
    #[error("deformation leaves the graphical regime (min |γ'| = {0:.3e})")]
    StepTooLarge(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// 1-D finite-difference grid for one Fourier mode on a truncated base.
#[derive(Clone, Debug)]
pub struct OperatorGrid {
    /// Fourier mode k ≥ 0.
    pub mode: u32,
    /// Grid spacing.
    pub h: f64,
    /// Truncation radius.
    pub r_trunc: f64,
    /// Node radii r(sᵢ), interior nodes only.
    r: Vec<f64>,
    /// Node radial derivatives r′(sᵢ).
    rp: Vec<f64>,
    /// Gaussian weights W = r e^{r²/2} at nodes.
    w_node: Vec<f64>,
    /// W at the n+1 half-nodes (flux points); w_mid[0] = 0 encodes the
    /// natural boundary of the flat half-line grid, boundary values encode
    /// Dirichlet fluxes otherwise.
    w_mid: Vec<f64>,
    /// |x⊥|² = r²(1 − r′²) at nodes (equals |H|² on expanders).
    xperp_sq: Vec<f64>,
    /// Half-line grids reflect across the axis with parity (−1)^k; truncation
    /// cuts use ghost zeros (Dirichlet).
    left_natural: bool,
}

impl OperatorGrid {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    /// The flat plane r(s) = s on (0, r_trunc]: staggered nodes s = (j+½)h,
    /// natural boundary at the origin (W(0) = 0), Dirichlet at r_trunc.
    pub fn flat_plane(mode: u32, h: f64, r_trunc: f64) -> Result<Self, LinopError> {
        if r_trunc < 4.0 {
            return Err(LinopError::TruncationTooSmall(r_trunc));
        }
        let n = (r_trunc / h).round() as usize;
        if n < 16 {
            return Err(LinopError::TooCoarse(n));
        }
        let r: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let w = |x: f64| x * (0.5 * x * x).exp();
        let w_node: Vec<f64> = r.iter().map(|&x| w(x)).collect();
        let w_mid: Vec<f64> = (0..=n).map(|j| w(j as f64 * h)).collect();
        Ok(OperatorGrid {
            mode,
            h,
            r_trunc,
            rp: vec![1.0; n],
            xperp_sq: vec![0.0; n],
            r,
            w_node,
            w_mid,
            left_natural: true,
        })
    }

    /// Restriction of an accepted profile curve to {r ≤ r_trunc}, resampled
    /// to spacing h, with homogeneous Dirichlet values at both cut ends.
    ///
    /// If the curve passes through the origin (a line profile), the node
    /// lattice is aligned so the origin sits on a flux point, where the
    /// Gaussian weight vanishes; that reproduces the natural boundary of the
    /// radial plane operator exactly.
    pub fn from_curve(
        base: &ProfileCurve,
        mode: u32,
        h: f64,
        r_trunc: f64,
    ) -> Result<Self, LinopError> {
        if r_trunc < 4.0 {
            return Err(LinopError::TruncationTooSmall(r_trunc));
        }
        base.validate()
            .map_err(|e| LinopError::BaseNotAccepted(e.to_string()))?;
        if base.max_r() < r_trunc {
            return Err(LinopError::BaseNotAccepted(format!(
                "base reaches r = {:.2} < r_trunc = {:.2}",
                base.max_r(),
                r_trunc
            )));
        }
        let (s_lo, n) = lattice(base, h, r_trunc);
        if n < 18 {
            return Err(LinopError::TooCoarse(n.saturating_sub(2)));
        }
        let s = base.samples();
        let gammas = base.gammas();
        let re: Vec<f64> = gammas.iter().map(|g| g.re).collect();
        let im: Vec<f64> = gammas.iter().map(|g| g.im).collect();
        let mut psi_unwrapped: Vec<f64> = s.iter().map(|p| p.psi).collect();
        for i in 1..psi_unwrapped.len() {
            let d = psi_unwrapped[i] - psi_unwrapped[i - 1];
            psi_unwrapped[i] -=
                2.0 * std::f64::consts::PI * (d / (2.0 * std::f64::consts::PI)).round();
        }
        let at = |sq: f64| -> (f64, f64) {
            let x = (sq - base.s_min()) / base.step();
            let g = num_complex::Complex64::new(cubic_uniform(&re, x), cubic_uniform(&im, x));
            let psi = cubic_uniform(&psi_unwrapped, x);
            (g.norm(), (psi - g.arg()).cos())
        };
        // interior nodes s_lo + j h, j = 1..n-1; Dirichlet at j = 0 and n
        let mut r = Vec::with_capacity(n - 1);
        let mut rp = Vec::with_capacity(n - 1);
        for j in 1..n {
            let (rj, rpj) = at(s_lo + j as f64 * h);
            r.push(rj.max(1e-12));
            rp.push(rpj);
        }
        let w = |x: f64| x * (0.5 * x * x).exp();
        let w_node: Vec<f64> = r.iter().map(|&x| w(x)).collect();
        // flux points at s_lo + (j + 1/2) h, j = 0..n-1: one on each side of
        // every interior node
        let w_mid: Vec<f64> = (0..n)
            .map(|j| {
                let (rm, _) = at(s_lo + (j as f64 + 0.5) * h);
                w(rm)
            })
            .collect();
        let xperp_sq: Vec<f64> = r
            .iter()
            .zip(&rp)
            .map(|(&ri, &rpi)| (ri * ri * (1.0 - rpi * rpi)).max(0.0))
            .collect();
        Ok(OperatorGrid {
            mode,
            h,
            r_trunc,
            r,
            rp,
            w_node,
            w_mid,
            xperp_sq,
            left_natural: false,
        })
    }

    /// Node arc-length coordinates (for sampling test functions).
    pub fn node_s(base: &ProfileCurve, h: f64, r_trunc: f64) -> Vec<f64> {
        let (s_lo, n) = lattice(base, h, r_trunc);
        (1..n).map(|j| s_lo + j as f64 * h).collect()
    }
}

/// Node lattice over {r ≤ r_trunc}: start coordinate and boundary index n
/// (interior nodes are s_lo + j h for j = 1..n-1). Origin crossings are
/// aligned to flux points.
fn lattice(base: &ProfileCurve, h: f64, r_trunc: f64) -> (f64, usize) {
    let s = base.samples();
    let first = s.iter().position(|p| p.r <= r_trunc).unwrap_or(0);
    let last = s.len() - 1 - s.iter().rev().position(|p| p.r <= r_trunc).unwrap_or(0);
    let mut s_lo = s[first].s;
    let s_hi = s[last].s;
    let (i_min, min_sample) = s
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.r.partial_cmp(&b.1.r).unwrap())
        .unwrap();
    if min_sample.r < h && i_min + 1 < s.len() {
        let cross = 0.5 * (s[i_min].s + s[i_min + 1].s);
        let k = ((cross - 0.5 * h - s_lo) / h).floor();
        s_lo = cross - 0.5 * h - k * h;
    }
    let n = ((s_hi - s_lo) / h).floor() as usize;
    (s_lo, n)
}

/// Tridiagonal matrix in compact form.
#[derive(Clone, Debug)]
pub struct Tridiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.sub[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i > 0 {
                m[(i, i - 1)] = self.sub[i - 1];
            }
            if i + 1 < n {
                m[(i, i + 1)] = self.sup[i];
            }
        }
        m
    }
}

/// Assembles L in divergence form: (1/W)(W f′)′ − (k²/r² + 2) f.
pub fn assemble(grid: &OperatorGrid) -> Result<Tridiag, LinopError> {
    let n = grid.len();
    if n < 16 {
        return Err(LinopError::TooCoarse(n));
    }
    let h2 = grid.h * grid.h;
    let k2 = (grid.mode as f64).powi(2);
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    for i in 0..n {
        // flux points i and i+1 frame node i
        let (w_lo, w_hi) = flux_pair(grid, i);
        let w = grid.w_node[i];
        diag[i] = -(w_lo + w_hi) / (w * h2) - k2 / (grid.r[i] * grid.r[i]) - 2.0;
        if i > 0 {
            sub[i - 1] = w_lo / (w * h2);
        }
        if i + 1 < n {
            sup[i] = w_hi / (w * h2);
        }
    }
    Ok(Tridiag { sub, diag, sup })
}

fn flux_pair(grid: &OperatorGrid, i: usize) -> (f64, f64) {
    debug_assert_eq!(grid.w_mid.len(), grid.len() + 1);
    (grid.w_mid[i], grid.w_mid[i + 1])
}

/// Assembles the formal adjoint (n = 2):
/// L*(η) = η″ + (r′/r − r r′) η′ − (k²/r² + 4 + |x⊥|²) η
/// by plain central differences.
pub fn assemble_adjoint(grid: &OperatorGrid) -> Result<Tridiag, LinopError> {
    let n = grid.len();
    if n < 16 {
        return Err(LinopError::TooCoarse(n));
    }
    let h = grid.h;
    let k2 = (grid.mode as f64).powi(2);
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    for i in 0..n {
        let r = grid.r[i];
        let p = grid.rp[i] / r - r * grid.rp[i];
        diag[i] = -2.0 / (h * h) - k2 / (r * r) - 4.0 - grid.xperp_sq[i];
        if i > 0 {
            sub[i - 1] = 1.0 / (h * h) - p / (2.0 * h);
        }
        if i + 1 < n {
            sup[i] = 1.0 / (h * h) + p / (2.0 * h);
        }
    }
    Ok(Tridiag { sub, diag, sup })
}

/// Surface inner product ⟨u, v⟩ = Σ uᵢ vᵢ rᵢ h per mode.
pub fn weighted_inner(grid: &OperatorGrid, u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .zip(&grid.r)
        .map(|((a, b), r)| a * b * r * grid.h)
        .sum()
}

/// Discrete duality defect ⟨Lφ, η⟩ − ⟨φ, L*η⟩ in the surface inner product.
pub fn duality_defect(grid: &OperatorGrid, phi: &[f64], eta: &[f64]) -> Result<f64, LinopError> {
    let l = assemble(grid)?;
    let ls = assemble_adjoint(grid)?;
    Ok(weighted_inner(grid, &l.apply(phi), eta) - weighted_inner(grid, phi, &ls.apply(eta)))
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Discrete analogues of ‖·‖_{L²}, ‖·‖_{H¹} and the drift-augmented ‖·‖_{H²₊}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub l2: f64,
    pub h1: f64,
    pub h2star: f64,
}

fn derivative_arrays(grid: &OperatorGrid, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    // ghost zeros beyond truncation cuts; parity reflection across the axis
    let n = f.len();
    let h = grid.h;
    let parity = if grid.mode % 2 == 0 { 1.0 } else { -1.0 };
    let get = |i: isize| -> f64 {
        if i < 0 {
            if grid.left_natural {
                parity * f[(-i - 1) as usize]
            } else {
                0.0
            }
        } else if i as usize >= n {
            0.0
        } else {
            f[i as usize]
        }
    };
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n as isize {
        d1[i as usize] = (get(i + 1) - get(i - 1)) / (2.0 * h);
        d2[i as usize] = (get(i + 1) - 2.0 * get(i) + get(i - 1)) / (h * h);
    }
    (d1, d2)
}

/// Norms of a mode-k function on the grid. The Hessian surrogate uses the
/// orthonormal-coframe components f″, k(f′ − r′f/r)/r (twice) and
/// −k²f/r² + r′f′/r; the drift term is ⟨x⊤, ∇φ⟩ = r r′ f′.
pub fn weighted_norms(grid: &OperatorGrid, f: &[f64]) -> WeightedNormReport {
    let (d1, d2) = derivative_arrays(grid, f);
    let k = grid.mode as f64;
    let mut l2 = 0.0;
    let mut grad = 0.0;
    let mut hess = 0.0;
    let mut drift = 0.0;
    for i in 0..f.len() {
        let r = grid.r[i];
        let rp = grid.rp[i];
        let w = r * grid.h;
        l2 += f[i] * f[i] * w;
        grad += (d1[i] * d1[i] + (k * f[i] / r).powi(2)) * w;
        let mixed = k * (d1[i] - rp * f[i] / r) / r;
        let angular = -k * k * f[i] / (r * r) + rp * d1[i] / r;
        hess += (d2[i] * d2[i] + 2.0 * mixed * mixed + angular * angular) * w;
        drift += (r * rp * d1[i]).powi(2) * w;
    }
    WeightedNormReport {
        l2: l2.sqrt(),
        h1: (l2 + grad).sqrt(),
        h2star: (l2 + grad + hess + drift).sqrt(),
    }
}

// ---------------------------------------------------------------------------
// Spectral diagnostics
// ---------------------------------------------------------------------------

/// Gram matrix of the discrete H²₊ norm (for the pencil σ_min computation).
fn h2star_gram(grid: &OperatorGrid) -> DMatrix<f64> {
    let n = grid.len();
    let h = grid.h;
    let k = grid.mode as f64;
    // component operators as dense matrices (rows = evaluation nodes)
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            d1[(i, i - 1)] = -1.0 / (2.0 * h);
            d2[(i, i - 1)] = 1.0 / (h * h);
        }
        if i + 1 < n {
            d1[(i, i + 1)] = 1.0 / (2.0 * h);
            d2[(i, i + 1)] = 1.0 / (h * h);
        }
        d2[(i, i)] = -2.0 / (h * h);
    }
    if grid.left_natural {
        // ghost node reflected across the axis with parity (−1)^k
        let parity = if grid.mode % 2 == 0 { 1.0 } else { -1.0 };
        d1[(0, 0)] += -parity / (2.0 * h);
        d2[(0, 0)] += parity / (h * h);
    }
    let id = DMatrix::<f64>::identity(n, n);
    let diag = |f: &dyn Fn(usize) -> f64| DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| f(i)));
    let weight = diag(&|i| grid.r[i] * h);
    let gram = |c: &DMatrix<f64>| c.transpose() * &weight * c;

    let mixed = diag(&|i| k / grid.r[i]) * (&d1 - diag(&|i| grid.rp[i] / grid.r[i]));
    let angular = diag(&|i| -k * k / (grid.r[i] * grid.r[i])) * &id
        + diag(&|i| grid.rp[i] / grid.r[i]) * &d1;
    let drift = diag(&|i| grid.r[i] * grid.rp[i]) * &d1;
    let grad_ang = diag(&|i| k / grid.r[i]) * &id;

    gram(&id)
        + gram(&d1)
        + gram(&grad_ang)
        + gram(&d2)
        + 2.0 * gram(&mixed)
        + gram(&angular)
        + gram(&drift)
}

/// Smallest singular value of L: H²₊ → L² on the grid: the minimum of
/// ‖Lφ‖_{L²}/‖φ‖_{H²₊} over discrete φ, via the generalized symmetric
/// eigenproblem (Aᵀ M A) φ = σ² B φ.
pub fn smallest_singular_value(grid: &OperatorGrid) -> Result<f64, LinopError> {
    Ok(smallest_singular_value_with_vector(grid)?.0)
}

/// As [`smallest_singular_value`], also returning the minimizing vector.
pub fn smallest_singular_value_with_vector(
    grid: &OperatorGrid,
) -> Result<(f64, Vec<f64>), LinopError> {
    let a = assemble(grid)?.to_dense();
    let n = grid.len();
    let m = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| grid.r[i] * grid.h));
    let g = a.transpose() * &m * &a;
    let b = h2star_gram(grid);
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| LinopError::BaseNotAccepted("H2* Gram not positive definite".into()))?;
    // C = L⁻¹ G L⁻ᵀ
    let li = chol.l().try_inverse().ok_or_else(|| {
        LinopError::BaseNotAccepted("Cholesky factor not invertible".into())
    })?;
    let c = &li * g * li.transpose();
    let sym = nalgebra::SymmetricEigen::new(c);
    let (idx, min) = sym
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let y = sym.eigenvectors.column(idx).into_owned();
    let x = li.transpose() * y;
    Ok((min.max(0.0).sqrt(), x.iter().cloned().collect()))
}

/// Eigenvalues of L itself (self-adjoint in the W-weighted inner product),
/// the `count` of them nearest zero, in increasing distance from zero.
pub fn eigenvalues_nearest_zero(grid: &OperatorGrid, count: usize) -> Result<Vec<f64>, LinopError> {
    let tri = assemble(grid)?;
    let n = grid.len();
    // exact diagonal similarity S A S⁻¹ with S = diag(√(W h))
    let s: Vec<f64> = grid.w_node.iter().map(|w| (w * grid.h).sqrt()).collect();
    let mut sym = DMatrix::zeros(n, n);
    for i in 0..n {
        sym[(i, i)] = tri.diag[i];
        if i + 1 < n {
            let v = tri.sup[i] * s[i] / s[i + 1];
            let u = tri.sub[i] * s[i + 1] / s[i];
            let avg = 0.5 * (v + u);
            sym[(i, i + 1)] = avg;
            sym[(i + 1, i)] = avg;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    vals.truncate(count);
    Ok(vals)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub mode: u32,
    pub sigma_min: f64,
    pub eigenvalues_nearest_zero: Vec<f64>,
    pub grid: GridInfo,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridInfo {
    pub h: f64,
    pub r: f64,
}

/// σ_min and near-zero spectrum for one mode, plus the refinement drift
/// under h → h/2 and r_trunc → r_trunc − 1.
pub fn spectrum_entry(
    base: &ProfileCurve,
    mode: u32,
    h: f64,
    r_trunc: f64,
) -> Result<(SpectrumEntry, f64), LinopError> {
    let grid = OperatorGrid::from_curve(base, mode, h, r_trunc)?;
    let sigma = smallest_singular_value(&grid)?;
    let fine = OperatorGrid::from_curve(base, mode, 0.5 * h, r_trunc)?;
    let sigma_fine = smallest_singular_value(&fine)?;
    let shrunk = OperatorGrid::from_curve(base, mode, h, (r_trunc - 1.0).max(4.0))?;
    let sigma_shrunk = smallest_singular_value(&shrunk)?;
    let drift = ((sigma_fine - sigma).abs() / sigma).max((sigma_shrunk - sigma).abs() / sigma);
    let entry = SpectrumEntry {
        mode,
        sigma_min: sigma,
        eigenvalues_nearest_zero: eigenvalues_nearest_zero(&grid, 3)?,
        grid: GridInfo { h, r: r_trunc },
    };
    Ok((entry, drift))
}

// ---------------------------------------------------------------------------
// Coercivity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// Max observed ‖φ‖²_{H²₊} / ‖Lφ‖²_{L²} (the constant C₀ witness).
    pub max_ratio: f64,
    pub trials: usize,
}

/// Random smooth compactly supported trial functions: sums of Gaussian bumps
/// vanishing near the cut ends.
fn random_bump(grid: &OperatorGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = grid.len();
    let mut f = vec![0.0; n];
    for _ in 0..5 {
        let c = rng.gen_range(0.15 * n as f64..0.85 * n as f64);
        let w = rng.gen_range(0.03 * n as f64..0.12 * n as f64);
        let a = rng.gen_range(-1.0..1.0);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += a * (-((i as f64 - c) / w).powi(2)).exp();
        }
    }
    // enforce compact support
    let guard = (n / 20).max(2);
    for i in 0..guard {
        f[i] = 0.0;
        f[n - 1 - i] = 0.0;
    }
    f
}

pub fn coercivity_check(grid: &OperatorGrid, trials: usize, seed: u64) -> Result<CoercivityReport, LinopError> {
    let l = assemble(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let f = random_bump(grid, &mut rng);
        let norms = weighted_norms(grid, &f);
        let lf = l.apply(&f);
        let lf_l2: f64 = weighted_inner(grid, &lf, &lf);
        if lf_l2 > 1e-200 {
            max_ratio = max_ratio.max(norms.h2star * norms.h2star / lf_l2);
        }
    }
    Ok(CoercivityReport { max_ratio, trials })
}

// ---------------------------------------------------------------------------
// Barrier
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarrierReport {
    /// max over nodes of L(ρ) + 4ρ; ≤ 0 means the barrier inequality holds.
    pub max_excess: f64,
    /// max |matrix·ρ − closed form| over interior nodes.
    pub matrix_defect: f64,
}

/// Checks L(ρ) = ρ(|x⊤|² − 4 − |x|²) ≤ −4ρ for ρ = e^{−|x|²/2} along the
/// base, and cross-checks the assembled matrix against the closed form.
pub fn barrier_check(base: &ProfileCurve, h: f64, r_trunc: f64) -> Result<BarrierReport, LinopError> {
    let grid = OperatorGrid::from_curve(base, 0, h, r_trunc)?;
    let mut max_excess = f64::NEG_INFINITY;
    let closed: Vec<f64> = grid
        .r
        .iter()
        .zip(&grid.rp)
        .map(|(&r, &rp)| {
            let rho = (-0.5 * r * r).exp();
            let xtan_sq = r * r * rp * rp;
            let val = rho * (xtan_sq - 4.0 - r * r);
            max_excess = max_excess.max(val + 4.0 * rho);
            val
        })
        .collect();
    let l = assemble(&grid)?;
    let rho_vec: Vec<f64> = grid.r.iter().map(|&r| (-0.5 * r * r).exp()).collect();
    let applied = l.apply(&rho_vec);
    let guard = 2;
    let matrix_defect = applied
        .iter()
        .zip(&closed)
        .skip(guard)
        .take(grid.len() - 2 * guard)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0f64, f64::max);
    Ok(BarrierReport { max_excess, matrix_defect })
}

// ---------------------------------------------------------------------------
// Linearization of β + θ under Hamiltonian deformation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearizationReport {
    /// Relative sup error of the central slope against Lφ at the finest ε.
    pub relative_error: f64,
    /// Defects |slope(ε) − Lφ| for each requested ε.
    pub defects: Vec<f64>,
    /// Observed order log₂(defect(2ε)/defect(ε)) for consecutive pairs.
    pub orders: Vec<f64>,
}

/// Deforms the surface by x ↦ x + ε J∇φ for an equivariant compactly
/// supported φ = f(s), recomputes β + θ on the deformed profile and verifies
/// that the central difference slope equals Lφ up to O(ε²).
pub fn linearization_check(
    base: &ProfileCurve,
    f: impl Fn(f64) -> f64,
    epsilons: &[f64],
) -> Result<LinearizationReport, LinopError> {
    use num_complex::Complex64;
    let s = base.samples();
    let n = s.len();
    let h = base.step();
    let f_vals: Vec<f64> = s.iter().map(|p| f(p.s)).collect();
    let d4 = |v: &[f64], i: usize| -> f64 {
        // 4th-order central first derivative with ghost zeros
        let get = |j: isize| if j < 0 || j as usize >= n { 0.0 } else { v[j as usize] };
        let i = i as isize;
        (-get(i + 2) + 8.0 * get(i + 1) - 8.0 * get(i - 1) + get(i - 2)) / (12.0 * h)
    };
    let fp: Vec<f64> = (0..n).map(|i| d4(&f_vals, i)).collect();

    // L f via the divergence-form differences on the curve's own grid.
    let w = |r: f64| r * (0.5 * r * r).exp();
    let lf: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return 0.0;
            }
            let w_hi = w(0.5 * (s[i].r + s[i + 1].r));
            let w_lo = w(0.5 * (s[i].r + s[i - 1].r));
            let flux = (w_hi * (f_vals[i + 1] - f_vals[i]) - w_lo * (f_vals[i] - f_vals[i - 1]))
                / (h * h);
            flux / w(s[i].r) - 2.0 * f_vals[i]
        })
        .collect();

    let beta_theta_of = |eps: f64| -> Result<Vec<f64>, LinopError> {
        // deformed profile γ_ε = γ + ε f′ iγ′ (normal Hamiltonian motion)
        let pts: Vec<Complex64> = s
            .iter()
            .enumerate()
            .map(|(i, p)| p.gamma() + eps * fp[i] * Complex64::i() * p.tangent())
            .collect();
        let d_pts: Vec<Complex64> = (0..n)
            .map(|i| {
                let get = |j: isize| {
                    if j < 0 {
                        pts[0] + (pts[0] - pts[1]) * (-j) as f64
                    } else if j as usize >= n {
                        let k = j as usize - (n - 1);
                        pts[n - 1] + (pts[n - 1] - pts[n - 2]) * k as f64
                    } else {
                        pts[j as usize]
                    }
                };
                let i = i as isize;
                (-get(i + 2) + 8.0 * get(i + 1) - 8.0 * get(i - 1) + get(i - 2)) / (12.0 * h)
            })
            .collect();
        let min_speed = d_pts.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if min_speed < 0.2 {
            return Err(LinopError::StepTooLarge(min_speed));
        }
        // θ = arg γ + arg γ′ unwrapped, β′ = Im(γ̄ dγ/ds)
        let lam: Vec<f64> = pts
            .iter()
            .zip(&d_pts)
            .map(|(z, dz)| (z.conj() * dz).im)
            .collect();
        let beta = cumulative_integral(&lam, h);
        let mut out = Vec::with_capacity(n);
        let mut prev = pts[0].arg() + d_pts[0].arg();
        for i in 0..n {
            let raw = pts[i].arg() + d_pts[i].arg();
            let theta = raw
                - 2.0 * std::f64::consts::PI
                    * ((raw - prev) / (2.0 * std::f64::consts::PI)).round();
            prev = theta;
            out.push(theta + beta[i]);
        }
        Ok(out)
    };

    let scale = lf.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-300);
    let guard = (n / 20).max(4);
    let mut defects = Vec::new();
    let mut finest_rel = 0.0;
    for &eps in epsilons {
        let plus = beta_theta_of(eps)?;
        let minus = beta_theta_of(-eps)?;
        // anchor at the left guard zone where f ≡ 0
        let anchor = |v: &[f64]| v[guard];
        let mut defect = 0.0f64;
        let mut rel = 0.0f64;
        for i in guard..n - guard {
            let slope = ((plus[i] - anchor(&plus)) - (minus[i] - anchor(&minus))) / (2.0 * eps);
            let d = (slope - (lf[i] - lf[guard])).abs();
            defect = defect.max(d);
            rel = rel.max(d / scale);
        }
        defects.push(defect);
        finest_rel = rel;
    }
    let orders = defects
        .windows(2)
        .map(|w| (w[0] / w[1]).log2() / (epsilons[1] / epsilons[0]).log2().abs())
        .collect();
    Ok(LinearizationReport {
        relative_error: finest_rel,
        defects,
        orders,
    })
}

// ---------------------------------------------------------------------------
// Radial growth probe
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialGrowthReport {
    pub radii: Vec<f64>,
    /// (2 + n/2)·f(r) with n = 2.
    pub lhs: Vec<f64>,
    /// r·f′(r).
    pub rhs: Vec<f64>,
}

impl RadialGrowthReport {
    /// True iff the growth inequality (2+n/2)f ≤ rf′ holds at every sampled
    /// radius beyond `r_from` (up to the relative slack).
    pub fn holds_beyond(&self, r_from: f64, slack: f64) -> bool {
        self.radii
            .iter()
            .zip(self.lhs.iter().zip(&self.rhs))
            .filter(|(r, _)| **r >= r_from)
            .all(|(_, (l, r))| *r >= l * (1.0 - slack))
    }

    /// lhs/rhs at the largest radius (→ 1 exactly at the threshold growth).
    pub fn terminal_ratio(&self) -> f64 {
        let k = self.radii.len() - 1;
        self.lhs[k] / self.rhs[k]
    }
}

/// Evaluates f(r) = ∫_{B_r} η² + (2+n/2)⁻¹ ∫_{B_r} |∇η|² on the flat plane
/// and reports both sides of the growth inequality (2+n/2) f ≤ r f′. For
/// bounded f (square-integrable η) the inequality must fail at large radii,
/// which is the mechanism forcing the adjoint kernel to vanish.
pub fn radial_growth_check(
    eta: impl Fn(f64) -> f64,
    eta_prime: impl Fn(f64) -> f64,
    r_max: f64,
    n: usize,
) -> RadialGrowthReport {
    let h = r_max / n as f64;
    let c = 2.0 + 1.0; // 2 + n/2 with n = 2
    let radii: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let integrand: Vec<f64> = (0..=n)
        .map(|i| {
            let r = i as f64 * h;
            let e = eta(r);
            let ep = eta_prime(r);
            2.0 * std::f64::consts::PI * r * (e * e + ep * ep / c)
        })
        .collect();
    let cumulative = cumulative_integral(&integrand, h);
    let lhs: Vec<f64> = radii.iter().enumerate().map(|(i, _)| c * cumulative[i + 1]).collect();
    let rhs: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| r * integrand[i + 1])
        .collect();
    RadialGrowthReport { radii, lhs, rhs }
}
