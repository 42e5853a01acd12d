//! Backwards heat kernel and Gaussian density ratios.
//!
//! Θ_t(x₀, l) = ∫_{L_t} Φ(x₀, l) dH² is evaluated in closed form on unions
//! of planes and by quadrature on equivariant surfaces: periodic trapezoid in
//! α (spectrally accurate) and Simpson along the profile samples, with the
//! truncated tail replaced by the asymptotic planes and added explicitly.
//! Density of a plane through the center is 1; a transverse plane pair at
//! the origin gives exactly 2, and Huisken monotonicity bounds Θ_t(x₀, l) by
//! Θ₀(x₀, l + t).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::c2::C2;
use crate::geom::Plane;
use crate::profile::{asymptotic_angles, ProfileCurve, ProfileError};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("scale must be positive, got l = {0}")]
    NonPositiveScale(f64),
    #[error("kernel requires l - t > 0, got l = {l}, t = {t}")]
    KernelTime { l: f64, t: f64 },
    #[error("requested accuracy {requested:.3e} not met: tail swap bound {bound:.3e}")]
    AccuracyNotMet { requested: f64, bound: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Evaluation point of the Gaussian density: center x₀, scale l, time t.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DensityQuery {
    pub center: C2,
    pub l: f64,
    pub t: f64,
}

impl DensityQuery {
    pub fn new(center: C2, l: f64) -> Result<Self, DensityError> {
        DensityQuery::at_time(center, l, 0.0)
    }

    pub fn at_time(center: C2, l: f64, t: f64) -> Result<Self, DensityError> {
        if l <= 0.0 {
            return Err(DensityError::NonPositiveScale(l));
        }
        if l - t <= 0.0 {
            return Err(DensityError::KernelTime { l, t });
        }
        Ok(DensityQuery { center, l, t })
    }

    /// Effective kernel width l − t.
    pub fn tau(&self) -> f64 {
        self.l - self.t
    }
}

/// Backwards heat kernel Φ(x₀, l)(x, t) = e^{−|x−x₀|²/4(l−t)} / (4π(l−t)).
pub fn heat_kernel(query: &DensityQuery, x: C2) -> f64 {
    let tau = query.tau();
    let d2 = (x - query.center).norm_sq();
    (-d2 / (4.0 * tau)).exp() / (4.0 * PI * tau)
}

/// Closed-form density of a union of planes through the origin:
/// Σⱼ e^{−dⱼ²/4τ} with dⱼ the distance from the center to plane j.
pub fn plane_set_density(planes: &[Plane], query: &DensityQuery) -> f64 {
    let tau = query.tau();
    planes
        .iter()
        .map(|p| {
            let d = p.distance(query.center);
            (-d * d / (4.0 * tau)).exp()
        })
        .sum()
}

/// Density of the canonical transverse pair (P₁, P₂); exactly 2 at x₀ = 0
/// and strictly below 2 elsewhere.
pub fn plane_pair_density(pair: &crate::geom::PlanePair, query: &DensityQuery) -> f64 {
    plane_set_density(&[pair.plane1(), pair.plane2()], query)
}

// ---------------------------------------------------------------------------
// Quadrature on equivariant surfaces
// ---------------------------------------------------------------------------

/// Integration domain of a Gaussian density: either equivariant profile
/// curves (each generating a surface of revolution under the diagonal circle
/// action) or an exact union of planes.
#[derive(Clone, Debug)]
pub enum SurfaceMeasure {
    Equivariant {
        curves: Vec<ProfileCurve>,
        /// Periodic trapezoid nodes for the α integral.
        n_alpha: usize,
    },
    Planes(Vec<Plane>),
}

pub const DEFAULT_N_ALPHA: usize = 256;

impl SurfaceMeasure {
    pub fn from_curve(curve: ProfileCurve) -> Self {
        SurfaceMeasure::Equivariant {
            curves: vec![curve],
            n_alpha: DEFAULT_N_ALPHA,
        }
    }

    /// The transverse cone over two profile lines through the origin.
    pub fn cone(phi1: f64, phi2: f64, half_length: f64, step: f64) -> Result<Self, ProfileError> {
        Ok(SurfaceMeasure::Equivariant {
            curves: vec![
                crate::profile::line_profile(phi1, half_length, step)?,
                crate::profile::line_profile(phi2, half_length, step)?,
            ],
            n_alpha: DEFAULT_N_ALPHA,
        })
    }
}

/// A profile that is antipodally symmetric as a point set (a line through
/// the origin) parametrizes its surface twice; its pushforward measure must
/// be halved.
fn covering_multiplicity(curve: &ProfileCurve) -> f64 {
    let s = curve.samples();
    let tol = 2.0 * curve.step();
    let stride = (s.len() / 24).max(1);
    for p in s.iter().step_by(stride) {
        let target = -p.gamma();
        let matched = s.iter().any(|q| (q.gamma() - target).norm() < tol);
        if !matched {
            return 1.0;
        }
    }
    2.0
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 4);
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    // Composite Simpson; odd interval counts end with a Simpson-3/8 block.
    let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if intervals % 2 != 0 {
        let j = n - 4;
        w[j] += 3.0 * h / 8.0;
        w[j + 1] += 9.0 * h / 8.0;
        w[j + 2] += 9.0 * h / 8.0;
        w[j + 3] += 3.0 * h / 8.0;
    }
    w
}

/// ∫ Φ dH² over the truncated surface of one profile curve (no tail).
///
/// Simpson along the profile; a passage through the origin makes the
/// integrand r(s)·(…) kinked, so that panel is split at the closest point
/// and integrated by Gauss nodes on the straight chord.
fn curve_density_truncated(curve: &ProfileCurve, center: C2, tau: f64, n_alpha: usize) -> f64 {
    let s = curve.samples();
    let h = curve.step();
    let da = 2.0 * PI / n_alpha as f64;
    let c2 = center.norm_sq();
    let pref = da / (4.0 * PI * tau);
    // integrand value r·∮ Φ dα at a profile point γ
    let value_at = |g: num_complex::Complex64| -> f64 {
        let r = g.norm();
        let a = (g.conj() * center.z1).re;
        let b = (g.conj() * center.z2).re;
        let base = -(r * r + c2) / (4.0 * tau);
        let mut alpha_sum = 0.0;
        for k in 0..n_alpha {
            let al = k as f64 * da;
            alpha_sum += (base + (a * al.cos() + b * al.sin()) / (2.0 * tau)).exp();
        }
        r * pref * alpha_sum
    };

    let kink = kink_interval(curve);
    match kink {
        Some(j) if j >= 3 && j + 4 < s.len() => {
            let left: Vec<f64> = (0..=j).map(|i| value_at(s[i].gamma())).collect();
            let right: Vec<f64> = (j + 1..s.len()).map(|i| value_at(s[i].gamma())).collect();
            let wl = simpson_weights(left.len(), h);
            let wr = simpson_weights(right.len(), h);
            let mut total = 0.0;
            for (v, w) in left.iter().zip(&wl) {
                total += v * w;
            }
            for (v, w) in right.iter().zip(&wr) {
                total += v * w;
            }
            total + h * kink_panel(s[j].gamma(), s[j + 1].gamma(), &value_at)
        }
        _ => {
            let w = simpson_weights(s.len(), h);
            s.iter()
                .zip(&w)
                .map(|(p, wi)| value_at(p.gamma()) * wi)
                .sum()
        }
    }
}

/// Index j such that the segment (j, j+1) passes closest to the origin, if
/// the curve actually runs into the origin scale.
fn kink_interval(curve: &ProfileCurve) -> Option<usize> {
    if curve.min_r() >= curve.step() {
        return None;
    }
    let s = curve.samples();
    let i_min = (0..s.len())
        .min_by(|&a, &b| s[a].r.partial_cmp(&s[b].r).unwrap())
        .unwrap();
    let seg_dist = |j: usize| -> f64 {
        let a = s[j].gamma();
        let b = s[j + 1].gamma();
        let ab = b - a;
        let t = (-(a.conj() * ab).re / ab.norm_sqr()).clamp(0.0, 1.0);
        (a + t * ab).norm()
    };
    let candidates = [i_min.saturating_sub(1), i_min.min(s.len() - 2)];
    candidates
        .into_iter()
        .min_by(|&a, &b| seg_dist(a).partial_cmp(&seg_dist(b)).unwrap())
}

/// ∫₀¹ f(γ(u)) du along the straight chord a → b, split at the closest
/// point to the origin (4-point Gauss per side).
fn kink_panel(
    a: num_complex::Complex64,
    b: num_complex::Complex64,
    f: &dyn Fn(num_complex::Complex64) -> f64,
) -> f64 {
    const GL_X: [f64; 4] = [
        0.06943184420297371,
        0.33000947820757187,
        0.6699905217924281,
        0.9305681557970263,
    ];
    const GL_W: [f64; 4] = [
        0.17392742256872693,
        0.32607257743127307,
        0.32607257743127307,
        0.17392742256872693,
    ];
    let ab = b - a;
    let u_star = (-(a.conj() * ab).re / ab.norm_sqr()).clamp(0.0, 1.0);
    let mut total = 0.0;
    for (lo, hi) in [(0.0, u_star), (u_star, 1.0)] {
        let len = hi - lo;
        if len < 1e-15 {
            continue;
        }
        for (x, w) in GL_X.iter().zip(GL_W) {
            let u = lo + x * len;
            total += w * len * f(a + u * ab);
        }
    }
    total
}

/// Mass of the planar Gaussian N(a·e₁, 2τ·Id) outside the disc of the given
/// radius centered at the origin of the plane.
fn gaussian_mass_outside_disc(a: f64, tau: f64, radius: f64) -> f64 {
    if radius <= 0.0 {
        return 1.0;
    }
    if a < 1e-12 {
        // centered Gaussian: closed form
        return (-radius * radius / (4.0 * tau)).exp();
    }
    let outside_fraction = |rho: f64| -> f64 {
        let c = (radius * radius - a * a - rho * rho) / (2.0 * a * rho.max(1e-300));
        1.0 - (PI - c.clamp(-1.0, 1.0).acos()) / PI
    };
    let integrand = |rho: f64| rho / (2.0 * tau) * (-rho * rho / (4.0 * tau)).exp();
    // Split at the tangency radii |radius ± a| where the fraction has kinks.
    let upper = radius + a + 12.0 * (2.0 * tau).sqrt();
    let mut cuts = vec![0.0, (radius - a).abs(), radius + a, upper];
    cuts.retain(|&c| c <= upper);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi - lo < 1e-14 {
            continue;
        }
        let n = 801;
        let h = (hi - lo) / (n - 1) as f64;
        let w = simpson_weights(n, h);
        for (j, wj) in w.iter().enumerate() {
            let rho = lo + j as f64 * h;
            total += wj * integrand(rho) * outside_fraction(rho);
        }
    }
    total
}

/// ∫_{P \ B_{r_cut}} Φ dH² for a plane through the origin; B_{r_cut} ∩ P is
/// the in-plane disc of radius r_cut around 0.
fn plane_tail(plane: &Plane, center: C2, tau: f64, r_cut: f64) -> f64 {
    let d = plane.distance(center);
    let a = plane.tangential_norm(center);
    (-d * d / (4.0 * tau)).exp() * gaussian_mass_outside_disc(a, tau, r_cut)
}

/// Asymptotic plane, cut radius and end normal speed |x⊥| for both curve ends.
fn curve_end_planes(curve: &ProfileCurve) -> [(Plane, f64, f64); 2] {
    let first = curve.samples().first().unwrap();
    let last = curve.samples().last().unwrap();
    [
        (
            Plane::equivariant(first.phi),
            first.r,
            first.r * (first.psi - first.phi).sin().abs(),
        ),
        (
            Plane::equivariant(last.phi),
            last.r,
            last.r * (last.psi - last.phi).sin().abs(),
        ),
    ]
}

/// Gaussian density Θ of the surface at the query, truncation tail included.
pub fn surface_density(surface: &SurfaceMeasure, query: &DensityQuery) -> Result<f64, DensityError> {
    surface_density_impl(surface, query, None)
}

/// As [`surface_density`], but fails with the tail swap bound when the
/// truncation radius cannot support the requested accuracy.
pub fn surface_density_with_accuracy(
    surface: &SurfaceMeasure,
    query: &DensityQuery,
    accuracy: f64,
) -> Result<f64, DensityError> {
    surface_density_impl(surface, query, Some(accuracy))
}

fn surface_density_impl(
    surface: &SurfaceMeasure,
    query: &DensityQuery,
    accuracy: Option<f64>,
) -> Result<f64, DensityError> {
    let tau = query.tau();
    match surface {
        SurfaceMeasure::Planes(planes) => Ok(plane_set_density(planes, query)),
        SurfaceMeasure::Equivariant { curves, n_alpha } => {
            let mut total = 0.0;
            for curve in curves {
                let mult = covering_multiplicity(curve);
                let mut part = curve_density_truncated(curve, query.center, tau, *n_alpha);
                let mut swap_bound = 0.0;
                for (plane, r_cut, normal_speed) in curve_end_planes(curve) {
                    let tail = plane_tail(&plane, query.center, tau, r_cut);
                    part += tail;
                    // Beyond the cut the surface is a graph over the plane
                    // with displacement on the scale of the end normal speed.
                    swap_bound += tail * normal_speed.min(1.0) * (r_cut / tau).min(1e3);
                }
                if let Some(acc) = accuracy {
                    if swap_bound > acc {
                        return Err(DensityError::AccuracyNotMet {
                            requested: acc,
                            bound: swap_bound,
                        });
                    }
                }
                total += part / mult;
            }
            Ok(total)
        }
    }
}

// ---------------------------------------------------------------------------
// Monotonicity and small-scale bounds
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// max over the grid of Θ_t(x₀, l) − Θ₀(x₀, l + t); ≤ 0 up to quadrature.
    pub max_violation: f64,
    pub n_checked: usize,
    pub violations_above: usize,
    pub tolerance: f64,
}

/// Verifies Huisken monotonicity Θ_t(x₀, l) ≤ Θ₀(x₀, l + t) on a query grid.
///
/// L_t = √(2t)·L is realized by scaling the profile; Θ₀ is the closed-form
/// density of the asymptotic plane set.
pub fn monotonicity_check(
    expander: &ProfileCurve,
    centers: &[C2],
    scales: &[f64],
    times: &[f64],
    tolerance: f64,
) -> Result<MonotonicityReport, DensityError> {
    let rays = asymptotic_angles(expander, 3.0)?;
    let planes = rays.planes();
    let mut max_violation = f64::NEG_INFINITY;
    let mut n_checked = 0;
    let mut violations_above = 0;
    for &t in times {
        if t <= 0.0 {
            continue;
        }
        let slice = SurfaceMeasure::from_curve(expander.scaled((2.0 * t).sqrt()));
        for &center in centers {
            for &l in scales {
                let q_t = DensityQuery::new(center, l)?;
                let lhs = surface_density(&slice, &q_t)?;
                let q_0 = DensityQuery::new(center, l + t)?;
                let rhs = plane_set_density(&planes, &q_0);
                let v = lhs - rhs;
                max_violation = max_violation.max(v);
                if v > tolerance {
                    violations_above += 1;
                }
                n_checked += 1;
            }
        }
    }
    Ok(MonotonicityReport {
        max_violation,
        n_checked,
        violations_above,
        tolerance,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhiteBoundReport {
    pub bound: f64,
    pub worst_density: f64,
    pub holds: bool,
    pub n_checked: usize,
}

/// Checks Θ_{1/2}(y, l) ≤ 1 + ε₀/2 for the sampled centers y and scales
/// l ≤ δ·t at t = 1/2 (the expander is its own t = 1/2 slice; other times
/// follow by self-similarity).
pub fn white_density_bound(
    surface: &SurfaceMeasure,
    centers: &[C2],
    eps0: f64,
    delta: f64,
) -> Result<WhiteBoundReport, DensityError> {
    let bound = 1.0 + 0.5 * eps0;
    let mut worst = f64::NEG_INFINITY;
    let mut n_checked = 0;
    for &y in centers {
        for k in 0..4 {
            let l = 0.5 * delta / (1 << k) as f64;
            let q = DensityQuery::new(y, l)?;
            let th = surface_density(surface, &q)?;
            worst = worst.max(th);
            n_checked += 1;
        }
    }
    Ok(WhiteBoundReport {
        bound,
        worst_density: worst,
        holds: worst <= bound,
        n_checked,
    })
}

/// The largest δ from the sweep {δ₀·2⁻ᵏ} for which the bound holds.
pub fn largest_white_delta(
    surface: &SurfaceMeasure,
    centers: &[C2],
    eps0: f64,
    delta0: f64,
    k_max: usize,
) -> Result<Option<f64>, DensityError> {
    for k in 0..=k_max {
        let delta = delta0 / (1 << k) as f64;
        if white_density_bound(surface, centers, eps0, delta)?.holds {
            return Ok(Some(delta));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Area ratios
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AreaRatioReport {
    /// Measured sup of H²(L ∩ B_r(x)) / r²; the constant c₁.
    pub c1: f64,
    pub n_checked: usize,
}

/// Area of the surface inside the ambient ball B_rho(x), by exact fibrewise
/// angle measure and Simpson along the profile.
pub fn ball_area(curve: &ProfileCurve, x: C2, rho: f64) -> f64 {
    let s = curve.samples();
    let w = simpson_weights(s.len(), curve.step());
    let mult = covering_multiplicity(curve);
    let x2 = x.norm_sq();
    let mut total = 0.0;
    for (i, p) in s.iter().enumerate() {
        let g = p.gamma();
        let a = (g.conj() * x.z1).re;
        let b = (g.conj() * x.z2).re;
        let m = a.hypot(b);
        let num = p.r * p.r + x2 - rho * rho;
        // |F(s,α) − x|² ≤ ρ² ⟺ cos(α − α₀) ≥ num / (2m)
        let angle = if m < 1e-14 {
            if num <= 0.0 {
                2.0 * PI
            } else {
                0.0
            }
        } else {
            2.0 * (num / (2.0 * m)).clamp(-1.0, 1.0).acos()
        };
        total += w[i] * p.r * angle;
    }
    total / mult
}

/// Uniform area-ratio bound H²(L ∩ B_r(x)) ≤ c₁ r² over the sampled grid.
pub fn area_ratio_report(curve: &ProfileCurve, centers: &[C2], radii: &[f64]) -> AreaRatioReport {
    let mut c1 = 0.0f64;
    let mut n = 0;
    for &x in centers {
        for &rho in radii {
            let ratio = ball_area(curve, x, rho) / (rho * rho);
            c1 = c1.max(ratio);
            n += 1;
        }
    }
    AreaRatioReport { c1, n_checked: n }
}

/// Query centers (u + iv, 0) on an n×n lattice over [0, extent]², sampling
/// the profile-plane slice of C².
pub fn center_grid(n: usize, extent: f64) -> Vec<C2> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = extent * i as f64 / (n - 1).max(1) as f64;
            let v = extent * j as f64 / (n - 1).max(1) as f64;
            out.push(C2::new(num_complex::Complex64::new(u, v), 0.0.into()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{EquivariantRayPair, PlanePair};
    use crate::profile::{line_profile, shoot, ShootingProblem};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn neck() -> ProfileCurve {
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let mut p = ShootingProblem::new(rays);
        p.step = 5e-3;
        shoot(&p).unwrap()
    }

    #[test]
    fn heat_kernel_anchors() {
        let q = DensityQuery::new(C2::ZERO, 1.0 / (4.0 * PI)).unwrap();
        assert_abs_diff_eq!(heat_kernel(&q, C2::ZERO), 1.0, epsilon = 1e-14);
        let q = DensityQuery::new(C2::ZERO, 0.7).unwrap();
        let x = C2::from_re((4.0 * 0.7f64).sqrt(), 0.0);
        assert_abs_diff_eq!(
            heat_kernel(&q, x),
            (-1.0f64).exp() / (4.0 * PI * 0.7),
            epsilon = 1e-14
        );
        assert!(DensityQuery::at_time(C2::ZERO, 0.5, 0.5).is_err());
    }

    #[test]
    fn heat_kernel_integrates_to_one_over_plane() {
        // Independent 2-D lattice quadrature over the real plane.
        let q = DensityQuery::new(C2::from_re(0.2, -0.4), 0.35).unwrap();
        let n = 801;
        let ext = 8.0;
        let h = 2.0 * ext / (n - 1) as f64;
        let w = simpson_weights(n, h);
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = C2::from_re(-ext + i as f64 * h, -ext + j as f64 * h);
                total += w[i] * w[j] * heat_kernel(&q, x);
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn plane_pair_density_anchors() {
        let pair = PlanePair::new(PI / 3.0, PI / 5.0).unwrap();
        for l in [0.1, 0.5, 1.0, 3.0] {
            let q = DensityQuery::new(C2::ZERO, l).unwrap();
            assert_abs_diff_eq!(plane_pair_density(&pair, &q), 2.0, epsilon = 1e-15);
        }
        // off-center strictly below 2
        let q =
            DensityQuery::new(C2::new(Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.4)), 0.8)
                .unwrap();
        assert!(plane_pair_density(&pair, &q) < 2.0);
        // frozen closed form: d₁ = d₂ = 2, l = 1 → 2e⁻¹
        let c = C2::new(Complex64::new(0.0, 2.0), 0.0.into());
        let q = DensityQuery::new(c, 1.0).unwrap();
        assert_abs_diff_eq!(Plane::real().distance(c), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            2.0 * plane_set_density(&[Plane::real()], &q),
            0.7357588823428847,
            epsilon = 1e-14
        );
    }

    #[test]
    fn plane_profile_density_is_one() {
        let line = line_profile(0.4, 6.0, 1e-2).unwrap();
        let surf = SurfaceMeasure::from_curve(line);
        for l in [0.25, 0.5, 1.0] {
            let q = DensityQuery::new(C2::ZERO, l).unwrap();
            let th = surface_density(&surf, &q).unwrap();
            assert_abs_diff_eq!(th, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn cone_density_is_two() {
        let surf = SurfaceMeasure::cone(0.0, 2.0 * PI / 3.0, 6.0, 1e-2).unwrap();
        for l in [0.25, 1.0] {
            let q = DensityQuery::new(C2::ZERO, l).unwrap();
            let th = surface_density(&surf, &q).unwrap();
            assert_abs_diff_eq!(th, 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn quadrature_matches_closed_form_off_center() {
        // Dual-route check at 20 centers: plane profile vs closed form.
        let line = line_profile(0.7, 6.0, 5e-3).unwrap();
        let surf = SurfaceMeasure::from_curve(line);
        let plane = Plane::equivariant(0.7);
        for k in 0..20 {
            let u = 0.21 * (k % 5) as f64;
            let v = 0.17 * (k / 5) as f64;
            let c = C2::new(Complex64::new(u, v), Complex64::new(0.1 * v, -0.05 * u));
            let q = DensityQuery::new(c, 0.6).unwrap();
            let quad = surface_density(&surf, &q).unwrap();
            let exact = plane_set_density(&[plane], &q);
            assert_abs_diff_eq!(quad, exact, epsilon = 2e-6);
        }
    }

    #[test]
    fn parabolic_rescaling_invariance() {
        let neck = neck();
        let c = 1.7;
        let scaled = SurfaceMeasure::from_curve(neck.scaled(c));
        let base = SurfaceMeasure::from_curve(neck);
        for (u, v, l) in [(0.0, 0.0, 0.5), (0.8, 0.3, 0.9), (1.5, -0.4, 0.3)] {
            let center = C2::new(Complex64::new(u, v), 0.0.into());
            let q1 = DensityQuery::new(center, l).unwrap();
            let q2 = DensityQuery::new(center.scale(c), c * c * l).unwrap();
            let a = surface_density(&base, &q1).unwrap();
            let b = surface_density(&scaled, &q2).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn neck_density_stays_below_two() {
        let neck = neck();
        let surf = SurfaceMeasure::from_curve(neck);
        let centers = center_grid(6, 2.0);
        let mut sup = 0.0f64;
        for &c in &centers {
            for l in [0.25, 0.5, 1.0, 2.0] {
                let q = DensityQuery::new(c, l).unwrap();
                sup = sup.max(surface_density(&surf, &q).unwrap());
            }
        }
        assert!(sup < 2.0, "sup {sup}");
        assert!(2.0 - sup > 0.01, "margin too thin: {}", 2.0 - sup);
    }

    #[test]
    fn monotonicity_on_plane_is_equality_on_axis() {
        let line = line_profile(0.0, 6.0, 1e-2).unwrap();
        // center on the plane: equality case of the monotonicity formula
        let slice = SurfaceMeasure::from_curve(line.scaled((2.0f64 * 0.25).sqrt()));
        let c = C2::from_re(0.5, 0.0);
        let lhs = surface_density(&slice, &DensityQuery::new(c, 0.5).unwrap()).unwrap();
        let rhs = plane_set_density(&[Plane::real()], &DensityQuery::new(c, 0.75).unwrap());
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6);
    }

    #[test]
    fn monotonicity_grid_on_neck() {
        let neck = neck();
        let centers = center_grid(4, 1.5);
        let report =
            monotonicity_check(&neck, &centers, &[0.25, 0.75], &[0.25, 0.5], 1e-6).unwrap();
        assert_eq!(report.violations_above, 0, "max violation {}", report.max_violation);
        assert!(report.max_violation <= 1e-6);
    }

    #[test]
    fn white_bound_on_plane_and_cone() {
        let line = line_profile(0.0, 6.0, 1e-2).unwrap();
        let surf = SurfaceMeasure::from_curve(line);
        let centers = vec![C2::ZERO, C2::from_re(1.0, 0.0), C2::from_re(0.0, 2.0)];
        let rep = white_density_bound(&surf, &centers, 0.5, 1.0).unwrap();
        assert!(rep.holds, "plane densities {:?}", rep.worst_density);

        let cone = SurfaceMeasure::cone(0.0, PI / 3.0, 6.0, 1e-2).unwrap();
        for delta in [1.0, 0.25, 0.0625] {
            let rep = white_density_bound(&cone, &[C2::ZERO], 0.5, delta).unwrap();
            assert!(!rep.holds, "cone must violate at every delta, got {rep:?}");
        }
    }

    #[test]
    fn white_bound_neck_has_positive_delta() {
        let neck = neck();
        let mut centers: Vec<C2> = neck
            .samples()
            .iter()
            .step_by(neck.len() / 24)
            .map(|p| p.embed(0.0))
            .collect();
        centers.push(C2::ZERO);
        let surf = SurfaceMeasure::from_curve(neck.clone());
        let delta = largest_white_delta(&surf, &centers, 0.5, 1.0, 8).unwrap();
        assert!(delta.is_some(), "no admissible delta found");
        assert!(delta.unwrap() > 0.0);
    }

    #[test]
    fn area_ratios_uniformly_bounded() {
        let neck = neck();
        let mut centers = vec![C2::ZERO];
        centers.extend(center_grid(3, 2.0));
        centers.extend(
            neck.samples()
                .iter()
                .step_by(neck.len() / 8)
                .map(|p| p.embed(0.7)),
        );
        let radii = [0.25, 0.5, 1.0, 2.0, 4.0];
        let rep = area_ratio_report(&neck, &centers, &radii);
        assert!(rep.c1.is_finite());
        // flat discs give π; two sheets plus curvature stay well below 4π
        assert!(rep.c1 >= PI - 0.2, "c1 {}", rep.c1);
        assert!(rep.c1 < 4.0 * PI, "c1 {}", rep.c1);
    }

    #[test]
    fn accuracy_gate_fires_on_short_truncation() {
        // A neck truncated at small radius cannot support 1e-12 tails.
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let mut p = ShootingProblem::new(rays);
        p.max_radius = 4.0;
        p.step = 5e-3;
        let short = shoot(&p).unwrap();
        let surf = SurfaceMeasure::from_curve(short);
        let q = DensityQuery::new(C2::ZERO, 1.0).unwrap();
        match surface_density_with_accuracy(&surf, &q, 1e-12) {
            Err(DensityError::AccuracyNotMet { bound, .. }) => assert!(bound > 1e-12),
            other => panic!("expected accuracy gate, got {other:?}"),
        }
    }
}
