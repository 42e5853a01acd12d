//! Equivariant self-expander profile curves.
//!
//! The surface (γ(s)cos α, γ(s)sin α) ⊂ C² with unit-speed profile
//! γ = r e^{iφ}, tangent angle ψ = arg γ′, has Lagrangian angle θ = φ + ψ and
//! satisfies H = x⊥ exactly when
//!
//!   r′ = cos(ψ−φ),  φ′ = sin(ψ−φ)/r,  ψ′ = −(r + 1/r) sin(ψ−φ).
//!
//! Equivalently θ′ = −Im(γ̄γ′) along the curve. The reduction is certified
//! against the definition by [`residual_selfexpander`], which rebuilds H and
//! x⊥ from the embedded surface by finite differences and never touches the
//! ODE. The system has the first integral sin(ψ−φ)·r²·e^{r²/2}, so expander
//! necks approach their asymptotic rays at the super-Gaussian rate e^{−r²/2}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::c2::C2;
use crate::geom::{EquivariantRayPair, GeomError, NeckConfiguration};
use crate::interp::cumulative_integral;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("curve has {0} samples, too short")]
    TooShort(usize),
    #[error("curve reaches radius {actual:.3} < required {required:.3}")]
    InsufficientRadius { required: f64, actual: f64 },
    #[error("degenerate discrete frame near sample {0}")]
    DegenerateFrame(usize),
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("integration stopped: {0}")]
    Integration(#[from] IntegrationFailure),
    #[error("no sign change in waist search over [{lo:.3e}, {hi:.3e}]; sweep: {trace:?}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        trace: Vec<(f64, f64)>,
    },
}

/// Early-termination events of the profile integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrationEvent {
    OriginApproach,
    CurvatureBlowup,
}

/// Integration stopped before the requested length; carries the partial curve.
#[derive(Debug)]
pub struct IntegrationFailure {
    pub event: IntegrationEvent,
    pub partial: ProfileCurve,
}

impl std::fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} after {} samples (last r = {:.3e})",
            self.event,
            self.partial.len(),
            self.partial.samples().last().map(|p| p.r).unwrap_or(f64::NAN)
        )
    }
}

impl std::error::Error for IntegrationFailure {}

/// One arc-length sample of a profile curve: γ(s) = r e^{iφ}, ψ = arg γ′.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub r: f64,
    pub phi: f64,
    pub psi: f64,
}

impl ProfileSample {
    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.phi)
    }

    pub fn tangent(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.psi)
    }

    /// Embedded surface point (γ cos α, γ sin α).
    pub fn embed(&self, alpha: f64) -> C2 {
        let g = self.gamma();
        C2::new(g * alpha.cos(), g * alpha.sin())
    }
}

/// Arc-length sampled equivariant profile curve with uniform spacing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileCurve {
    samples: Vec<ProfileSample>,
    step: f64,
}

impl ProfileCurve {
    pub fn from_samples(samples: Vec<ProfileSample>, step: f64) -> Result<Self, ProfileError> {
        if step <= 0.0 {
            return Err(ProfileError::NonPositiveStep(step));
        }
        if samples.len() < 4 {
            return Err(ProfileError::TooShort(samples.len()));
        }
        let curve = ProfileCurve { samples, step };
        curve.validate()?;
        Ok(curve)
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn s_min(&self) -> f64 {
        self.samples.first().map(|p| p.s).unwrap_or(0.0)
    }

    pub fn s_max(&self) -> f64 {
        self.samples.last().map(|p| p.s).unwrap_or(0.0)
    }

    pub fn min_r(&self) -> f64 {
        self.samples.iter().map(|p| p.r).fold(f64::INFINITY, f64::min)
    }

    pub fn max_r(&self) -> f64 {
        self.samples.iter().map(|p| p.r).fold(0.0, f64::max)
    }

    pub fn gammas(&self) -> Vec<Complex64> {
        self.samples.iter().map(|p| p.gamma()).collect()
    }

    /// Parabolic rescaling γ → c·γ (arc length scales with c, angles fixed).
    pub fn scaled(&self, c: f64) -> ProfileCurve {
        let samples = self
            .samples
            .iter()
            .map(|p| ProfileSample {
                s: c * p.s,
                r: c * p.r,
                phi: p.phi,
                psi: p.psi,
            })
            .collect();
        ProfileCurve {
            samples,
            step: c * self.step,
        }
    }

    /// Structural invariants: positive radii, uniform arc-length spacing,
    /// chord lengths consistent with the spacing and tangents consistent with
    /// the chords.
    pub fn validate(&self) -> Result<(), ProfileError> {
        let h = self.step;
        let chord_tol = (300.0 * h * h * h).max(1e-12);
        let tangent_tol = (200.0 * h * h).max(1e-9);
        for (i, p) in self.samples.iter().enumerate() {
            if !(p.r > 0.0) {
                return Err(ProfileError::Invalid(format!(
                    "sample {i} has non-positive radius {}",
                    p.r
                )));
            }
        }
        for i in 0..self.samples.len() - 1 {
            let a = &self.samples[i];
            let b = &self.samples[i + 1];
            if ((b.s - a.s) - h).abs() > 1e-9 * (1.0 + h) {
                return Err(ProfileError::Invalid(format!(
                    "non-uniform spacing at sample {i}: {} vs {h}",
                    b.s - a.s
                )));
            }
            let chord = b.gamma() - a.gamma();
            if (chord.norm() - h).abs() > chord_tol {
                return Err(ProfileError::Invalid(format!(
                    "chord length {} at sample {i} inconsistent with step {h}",
                    chord.norm()
                )));
            }
            let dir = chord / chord.norm();
            let tmid = a.tangent() + b.tangent();
            let tmid = tmid / tmid.norm();
            if (dir - tmid).norm() > tangent_tol {
                return Err(ProfileError::Invalid(format!(
                    "tangent inconsistent with chord at sample {i}"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The reduced ODE
// ---------------------------------------------------------------------------

/// Right-hand side of the arc-length profile system at (r, φ, ψ).
pub fn ode_rhs(r: f64, phi: f64, psi: f64) -> Result<(f64, f64, f64), ProfileError> {
    if !(r > 0.0) {
        return Err(ProfileError::NonPositiveRadius(r));
    }
    let sg = (psi - phi).sin();
    Ok((
        (psi - phi).cos(),
        sg / r,
        -(r + 1.0 / r) * sg,
    ))
}

fn rhs_raw(y: [f64; 3]) -> [f64; 3] {
    let sg = (y[2] - y[1]).sin();
    [(y[2] - y[1]).cos(), sg / y[0], -(y[0] + 1.0 / y[0]) * sg]
}

fn rk4_step(y: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs_raw(y);
    let k2 = rhs_raw([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]]);
    let k3 = rhs_raw([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]]);
    let k4 = rhs_raw([y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Advances one output step of size `h` (signed), subdividing internally so
/// the local timescale r + 2/r stays resolved.
fn advance(y: [f64; 3], h: f64) -> [f64; 3] {
    let scale = y[0] + 2.0 / y[0];
    let n_sub = ((h.abs() * scale / 0.05).ceil() as usize).clamp(1, 256);
    let hs = h / n_sub as f64;
    let mut out = y;
    for _ in 0..n_sub {
        out = rk4_step(out, hs);
    }
    out
}

const R_FLOOR: f64 = 1e-6;
const CURVATURE_CAP: f64 = 1e6;

/// Runge-Kutta integration of the profile system from `(r, phi, psi)` over
/// the given signed arc length, sampled every `step`.
///
/// Stops early (with the partial curve) if the curve runs into the origin or
/// the curvature blows up.
pub fn integrate(
    start: (f64, f64, f64),
    length: f64,
    step: f64,
) -> Result<ProfileCurve, ProfileError> {
    if step <= 0.0 {
        return Err(ProfileError::NonPositiveStep(step));
    }
    if !(start.0 > 0.0) {
        return Err(ProfileError::NonPositiveRadius(start.0));
    }
    let n = (length.abs() / step).round() as usize;
    if n < 3 {
        return Err(ProfileError::TooShort(n + 1));
    }
    let h = step * length.signum();
    let mut y = [start.0, start.1, start.2];
    let mut samples = Vec::with_capacity(n + 1);
    let mut event = None;
    samples.push(ProfileSample { s: 0.0, r: y[0], phi: y[1], psi: y[2] });
    for i in 1..=n {
        y = advance(y, h);
        if !(y[0] > R_FLOOR) {
            event = Some(IntegrationEvent::OriginApproach);
            break;
        }
        if (y[0] + 1.0 / y[0]) > CURVATURE_CAP {
            event = Some(IntegrationEvent::CurvatureBlowup);
            break;
        }
        samples.push(ProfileSample { s: i as f64 * h, r: y[0], phi: y[1], psi: y[2] });
    }
    if h < 0.0 {
        samples.reverse();
    }
    let curve = ProfileCurve { samples, step };
    match event {
        Some(event) => Err(IntegrationFailure { event, partial: curve }.into()),
        None => Ok(curve),
    }
}

// ---------------------------------------------------------------------------
// Shooting
// ---------------------------------------------------------------------------

/// Boundary-value problem: find the expander asymptotic to the given rays.
#[derive(Clone, Debug)]
pub struct ShootingProblem {
    pub rays: EquivariantRayPair,
    /// Tolerance on the asymptotic-angle mismatch.
    pub tolerance: f64,
    /// Truncation radius of the returned curve.
    pub max_radius: f64,
    /// Output arc-length spacing.
    pub step: f64,
    /// Search interval for the waist radius.
    pub waist_bracket: (f64, f64),
}

impl ShootingProblem {
    pub fn new(rays: EquivariantRayPair) -> Self {
        ShootingProblem {
            rays,
            tolerance: 1e-9,
            max_radius: 6.0,
            step: 2e-3,
            waist_bracket: (1e-3, 8.0),
        }
    }

    fn validate(&self) -> Result<(), ProfileError> {
        if self.tolerance <= 0.0 {
            return Err(ProfileError::NonPositiveTolerance(self.tolerance));
        }
        if self.step <= 0.0 {
            return Err(ProfileError::NonPositiveStep(self.step));
        }
        if self.max_radius < 4.0 {
            return Err(ProfileError::Invalid(
                "max_radius below 4 leaves no asymptotic regime".into(),
            ));
        }
        Ok(())
    }
}

/// The straight-line profile through the origin with direction φ (the plane
/// expander). Sampled on a staggered grid so no sample sits exactly at r = 0.
pub fn line_profile(phi: f64, half_length: f64, step: f64) -> Result<ProfileCurve, ProfileError> {
    if step <= 0.0 {
        return Err(ProfileError::NonPositiveStep(step));
    }
    let n_half = (half_length / step).ceil() as i64;
    if n_half < 2 {
        return Err(ProfileError::TooShort(n_half.max(0) as usize));
    }
    let samples: Vec<ProfileSample> = (-n_half..n_half)
        .map(|i| {
            let s = (i as f64 + 0.5) * step;
            ProfileSample {
                s,
                r: s.abs(),
                phi: if s >= 0.0 { phi } else { phi + PI },
                psi: phi,
            }
        })
        .collect();
    ProfileCurve::from_samples(samples, step)
}

/// Integrates outward from a waist (r0, φ=0, ψ=π/2) until radius `r_max` and
/// returns the final state; the turning angle φ converges super-Gaussianly.
fn half_turn(r0: f64, r_max: f64, h: f64) -> [f64; 3] {
    let mut y = [r0, 0.0, 0.5 * PI];
    let max_steps = (4.0 * (r_max + r0) / h) as usize + 10_000;
    for _ in 0..max_steps {
        y = advance(y, h);
        if y[0] >= r_max {
            break;
        }
    }
    y
}

/// Solves the shooting problem.
///
/// Transverse rays are normalized to their acute neck configuration (see
/// [`EquivariantRayPair::neck_configuration`]); the waist radius is the one
/// shooting parameter and is found by bisection + secant on the monotone
/// turning-angle mismatch. Antipodal rays yield the straight line.
pub fn shoot(problem: &ShootingProblem) -> Result<ProfileCurve, ProfileError> {
    problem.validate()?;
    match problem.rays.neck_configuration()? {
        NeckConfiguration::Line { phi } => line_profile(phi, problem.max_radius, problem.step),
        NeckConfiguration::Neck { mid, separation } => {
            let target = 0.5 * separation;
            let search_h = problem.step.min(2e-3);
            let mismatch = |r0: f64| half_turn(r0, problem.max_radius, search_h)[1] - target;

            let (mut lo, mut hi) = problem.waist_bracket;
            let mut f_lo = mismatch(lo);
            let mut f_hi = mismatch(hi);
            if f_lo.signum() == f_hi.signum() {
                let trace = vec![(lo, f_lo), (hi, f_hi)];
                return Err(ProfileError::NoSignChange { lo, hi, trace });
            }
            // Bisection with a secant polish; the mismatch is monotone in r0.
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                let f_m = mismatch(m);
                if f_m == 0.0 || 0.5 * (hi - lo) < 1e-14 * m.max(1.0) {
                    lo = m;
                    hi = m;
                    break;
                }
                if f_m.signum() == f_lo.signum() {
                    lo = m;
                    f_lo = f_m;
                } else {
                    hi = m;
                    f_hi = f_m;
                }
                if f_lo.abs() < problem.tolerance * 1e-3 {
                    break;
                }
            }
            let denom = f_hi - f_lo;
            let r0 = if denom.abs() > 0.0 {
                (lo * f_hi - hi * f_lo) / denom
            } else {
                0.5 * (lo + hi)
            };

            // Final pass at the output step, both directions, rotated to mid.
            let fwd = integrate_to_radius(r0, problem.max_radius, problem.step, 1.0)?;
            let bwd = integrate_to_radius(r0, problem.max_radius, problem.step, -1.0)?;
            let mut samples = bwd.samples;
            samples.pop();
            samples.extend(fwd.samples);
            for p in &mut samples {
                p.phi += mid;
                p.psi += mid;
            }
            let curve = ProfileCurve::from_samples(samples, problem.step)?;
            let angles = asymptotic_angles(&curve, 0.6 * problem.max_radius)?;
            let err = (angles.phi_plus - (mid + target))
                .abs()
                .max((angles.phi_minus - (mid - target)).abs());
            if err > problem.tolerance.max(1e-6) {
                return Err(ProfileError::Invalid(format!(
                    "shooting converged to angle mismatch {err:.3e} above tolerance"
                )));
            }
            Ok(curve)
        }
    }
}

/// One-sided integration from the waist out to `r_max` (direction ±1),
/// sampled every `step`.
fn integrate_to_radius(
    r0: f64,
    r_max: f64,
    step: f64,
    direction: f64,
) -> Result<SampleRun, ProfileError> {
    let mut y = [r0, 0.0, 0.5 * PI];
    let h = step * direction;
    let mut samples = vec![ProfileSample { s: 0.0, r: y[0], phi: y[1], psi: y[2] }];
    let max_steps = (40.0 * r_max / step) as usize + 10_000;
    for i in 1..=max_steps {
        y = advance(y, h);
        if !(y[0] > R_FLOOR) {
            return Err(ProfileError::Invalid("waist integration hit the origin".into()));
        }
        samples.push(ProfileSample { s: i as f64 * h, r: y[0], phi: y[1], psi: y[2] });
        if y[0] >= r_max {
            break;
        }
    }
    if direction < 0.0 {
        samples.reverse();
    }
    Ok(SampleRun { samples })
}

struct SampleRun {
    samples: Vec<ProfileSample>,
}

// ---------------------------------------------------------------------------
// Asymptotics
// ---------------------------------------------------------------------------

/// Limiting ray directions at both ends, via Aitken extrapolation of the
/// position angle (which converges like e^{−s²/2}, so the last samples are
/// already essentially converged).
pub fn asymptotic_angles(
    curve: &ProfileCurve,
    min_radius: f64,
) -> Result<EquivariantRayPair, ProfileError> {
    let n = curve.len();
    if n < 8 {
        return Err(ProfileError::TooShort(n));
    }
    let s = curve.samples();
    for end in [s[0].r, s[n - 1].r] {
        if end < min_radius {
            return Err(ProfileError::InsufficientRadius {
                required: min_radius,
                actual: end,
            });
        }
    }
    let k = (n / 50).max(1);
    let aitken = |a: f64, b: f64, c: f64| {
        let d1 = b - a;
        let d2 = c - b;
        let denom = d2 - d1;
        if denom.abs() < 1e-14 {
            c
        } else {
            c - d2 * d2 / denom
        }
    };
    let plus = aitken(s[n - 1 - 2 * k].phi, s[n - 1 - k].phi, s[n - 1].phi);
    let minus = aitken(s[2 * k].phi, s[k].phi, s[0].phi);
    EquivariantRayPair::new(minus, plus).map_err(ProfileError::from)
}

// ---------------------------------------------------------------------------
// The intrinsic residual oracle
// ---------------------------------------------------------------------------

/// Max-norm self-expander residual |H − x⊥| of the embedded surface.
///
/// H is rebuilt as the surface Laplacian of the embedding by second-order
/// finite differences on the (s, α) grid and x⊥ by projection onto the
/// discrete normal space; the profile ODE is never consulted, so this is the
/// independent oracle certifying it. By exact rotation equivariance of the
/// stencil the residual is independent of α, so it is evaluated on the α = 0
/// column. The α-direction truncation error is ∝ |x⊥| dα² and the roundoff
/// floor is ∝ ε/dα², so a fixed moderate α resolution serves all curves.
pub fn residual_selfexpander(curve: &ProfileCurve) -> Result<f64, ProfileError> {
    residual_selfexpander_with(curve, 512)
}

pub fn residual_selfexpander_with(
    curve: &ProfileCurve,
    n_alpha: usize,
) -> Result<f64, ProfileError> {
    let n = curve.len();
    if n < 7 {
        return Err(ProfileError::TooShort(n));
    }
    let ds = curve.step();
    let da = 2.0 * PI / n_alpha as f64;
    let gammas = curve.gammas();

    // Five α columns around α = 0; each entry is the embedded point.
    let alphas = [-2.0 * da, -da, 0.0, da, 2.0 * da];
    let embed = |i: usize, a: f64| -> [f64; 4] {
        let g = gammas[i];
        let p = C2::new(g * a.cos(), g * a.sin());
        p.coords()
    };

    let sub = |a: [f64; 4], b: [f64; 4]| [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
    let scale = |a: [f64; 4], c: f64| [a[0] * c, a[1] * c, a[2] * c, a[3] * c];
    let add = |a: [f64; 4], b: [f64; 4]| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
    let dot = |a: [f64; 4], b: [f64; 4]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
    let norm = |a: [f64; 4]| dot(a, a).sqrt();

    // Tangents d/ds and d/dα by central differences at (i, column c).
    let f_s = |i: usize, c: usize| {
        scale(
            sub(embed(i + 1, alphas[c]), embed(i - 1, alphas[c])),
            1.0 / (2.0 * ds),
        )
    };
    let f_a = |i: usize, c: usize| {
        scale(
            sub(embed(i, alphas[c] + da), embed(i, alphas[c] - da)),
            1.0 / (2.0 * da),
        )
    };

    // Flux vectors of the divergence-form Laplace-Beltrami operator.
    let flux = |i: usize, c: usize| -> ([f64; 4], [f64; 4], f64) {
        let fs = f_s(i, c);
        let fa = f_a(i, c);
        let gss = dot(fs, fs);
        let gaa = dot(fa, fa);
        let w = (gss * gaa).sqrt();
        (scale(fs, w / gss), scale(fa, w / gaa), w)
    };

    let mut max_res = 0.0f64;
    for i in 2..n - 2 {
        let (_, _, w0) = flux(i, 2);
        if !(w0 > 1e-12) {
            return Err(ProfileError::DegenerateFrame(i));
        }
        let (p_plus, _, _) = flux(i + 1, 2);
        let (p_minus, _, _) = flux(i - 1, 2);
        let (_, q_plus, _) = flux(i, 3);
        let (_, q_minus, _) = flux(i, 1);
        let lap = scale(
            add(
                scale(sub(p_plus, p_minus), 1.0 / (2.0 * ds)),
                scale(sub(q_plus, q_minus), 1.0 / (2.0 * da)),
            ),
            1.0 / w0,
        );

        let x = embed(i, 0.0);
        let fs = f_s(i, 2);
        let fa = f_a(i, 2);
        let t1 = scale(fs, 1.0 / norm(fs));
        let fa_perp = sub(fa, scale(t1, dot(fa, t1)));
        let na = norm(fa_perp);
        if !(na > 1e-12) {
            return Err(ProfileError::DegenerateFrame(i));
        }
        let t2 = scale(fa_perp, 1.0 / na);

        let diff = sub(lap, x);
        let normal_part = sub(
            sub(diff, scale(t1, dot(diff, t1))),
            scale(t2, dot(diff, t2)),
        );
        max_res = max_res.max(norm(normal_part));
    }
    Ok(max_res)
}

// ---------------------------------------------------------------------------
// Exactness: β + θ
// ---------------------------------------------------------------------------

/// θ(s) + β(s) along the curve, with θ = φ + ψ unwrapped and β the primitive
/// of the Liouville form restricted to the profile, β′ = λ(γ′) = Im(γ̄γ′).
///
/// Constant exactly on self-expanders. θ is defined mod 2π; across a near-
/// origin passage (straight-line profiles) the parametrization flips
/// orientation and θ jumps by π, which is snapped away there.
pub fn beta_theta_sum(curve: &ProfileCurve) -> Vec<f64> {
    let s = curve.samples();
    let h = curve.step();
    let lam: Vec<f64> = s.iter().map(|p| p.r * (p.psi - p.phi).sin()).collect();
    let beta = cumulative_integral(&lam, h);
    let mut out = Vec::with_capacity(s.len());
    let mut theta_prev = s[0].phi + s[0].psi;
    // Orientation parity: crossing the origin flips the frame orientation and
    // shifts θ by π permanently; track it so the unwrapped sum stays smooth.
    let mut parity = 0.0;
    for (i, p) in s.iter().enumerate() {
        let raw = p.phi + p.psi;
        let branch = |t: f64| t - 2.0 * PI * ((t - theta_prev) / (2.0 * PI)).round();
        let mut theta = branch(raw + parity);
        if p.r < 2.0 * h {
            let flipped = branch(raw + parity + PI);
            if (flipped - theta_prev).abs() < (theta - theta_prev).abs() {
                parity += PI;
                theta = flipped;
            }
        }
        theta_prev = theta;
        out.push(theta + beta[i]);
    }
    out
}

/// Max − min of [`beta_theta_sum`]; below integrator tolerance on expanders.
pub fn beta_theta_oscillation(curve: &ProfileCurve) -> f64 {
    let v = beta_theta_sum(curve);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

// ---------------------------------------------------------------------------
// Tail decay
// ---------------------------------------------------------------------------

/// Regression report of the graphical tail over the asymptotic plane.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted b in |ψ| ≈ C e^{−b R²} (slope of log|ψ| against R², negated).
    pub b: f64,
    pub log_c: f64,
    /// Residual sum of squares of the Gaussian (log vs R²) model.
    pub exp_rss: f64,
    /// Residual sum of squares of the polynomial (log vs log R) model.
    pub poly_rss: f64,
    pub n_points: usize,
    pub r_range: (f64, f64),
}

/// Fits the decay of the graph potential of the outgoing tail (s → +∞ end)
/// over its asymptotic plane. The normal displacement u equals the radial
/// derivative of the graph potential, which is recovered by quadrature.
pub fn decay_fit(curve: &ProfileCurve, min_radius: f64) -> Result<DecayFit, ProfileError> {
    let rays = asymptotic_angles(curve, min_radius)?;
    let phi_inf = rays.phi_plus;
    let s = curve.samples();
    // Outgoing tail: samples past the last radius minimum.
    let waist = (0..s.len())
        .min_by(|&a, &b| s[a].r.partial_cmp(&s[b].r).unwrap())
        .unwrap();
    let tail = &s[waist..];
    let rho: Vec<f64> = tail.iter().map(|p| p.r * (phi_inf - p.phi).cos()).collect();
    let u: Vec<f64> = tail.iter().map(|p| p.r * (phi_inf - p.phi).sin()).collect();
    // Graph potential ψ(ρ) with ψ(∞) = 0: ψ(ρ_i) = −∫_{ρ_i}^{ρ_end} u dρ − tail.
    let n = tail.len();
    let mut pot = vec![0.0; n];
    for i in (0..n - 1).rev() {
        pot[i] = pot[i + 1] - 0.5 * (u[i] + u[i + 1]) * (rho[i + 1] - rho[i]);
    }
    let tail_mass = u[n - 1].abs() / rho[n - 1].max(1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut logr = Vec::new();
    let r_hi = 0.93 * curve.max_r();
    for i in 0..n {
        let p = pot[i].abs();
        if rho[i] >= min_radius && rho[i] <= r_hi && p > 20.0 * tail_mass && p > 1e-13 {
            xs.push(rho[i] * rho[i]);
            ys.push(p.ln());
            logr.push(rho[i].ln());
        }
    }
    if xs.len() < 8 {
        return Err(ProfileError::InsufficientRadius {
            required: min_radius,
            actual: curve.max_r(),
        });
    }
    let (slope, icpt, rss) = least_squares(&xs, &ys);
    let (_, _, poly_rss) = least_squares(&logr, &ys);
    Ok(DecayFit {
        b: -slope,
        log_c: icpt,
        exp_rss: rss,
        poly_rss,
        n_points: xs.len(),
        r_range: (xs[0].sqrt(), xs[xs.len() - 1].sqrt()),
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let icpt = (sy - slope * sx) / n;
    let rss = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (slope * a + icpt);
            e * e
        })
        .sum();
    (slope, icpt, rss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhs_on_ray_is_translation() {
        let (dr, dphi, dpsi) = ode_rhs(1.0, 0.4, 0.4).unwrap();
        assert_abs_diff_eq!(dr, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dphi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dpsi, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_at_unit_circle_state() {
        // σ = π/2 at r = 1: r stays, φ turns at unit rate, ψ′ = −(1 + 1)·1.
        let (dr, dphi, dpsi) = ode_rhs(1.0, 0.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(dr, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dphi, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dpsi, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_frozen_values() {
        // Values certified by the residual oracle (see resid_certifies_ode);
        // θ′ = −Im(γ̄γ′) = −r sin(ψ−φ).
        let (dr, dphi, dpsi) = ode_rhs(2.0, 0.0, PI / 4.0).unwrap();
        assert_abs_diff_eq!(dr, 0.70710678118654752, epsilon = 1e-15);
        assert_abs_diff_eq!(dphi, 0.35355339059327376, epsilon = 1e-15);
        assert_abs_diff_eq!(dpsi, -1.76776695296636881, epsilon = 1e-14);
        assert_abs_diff_eq!(dpsi + dphi, -2.0 * (PI / 4.0).sin(), epsilon = 1e-14);
    }

    #[test]
    fn rhs_rejects_nonpositive_radius() {
        assert!(matches!(
            ode_rhs(0.0, 0.0, 1.0),
            Err(ProfileError::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn integrate_ray_is_straight() {
        let curve = integrate((1.0, 0.0, 0.0), 5.0, 1e-2).unwrap();
        let last = curve.samples().last().unwrap();
        assert_abs_diff_eq!(last.r, 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(last.phi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn integrate_reverses_to_start() {
        let start = (0.8, 0.1, 0.1 + PI / 2.0);
        let fwd = integrate(start, 2.0, 1e-3).unwrap();
        let end = *fwd.samples().last().unwrap();
        let back = integrate((end.r, end.phi, end.psi), -2.0, 1e-3).unwrap();
        let first = back.samples().first().unwrap();
        assert_abs_diff_eq!(first.r, start.0, epsilon = 1e-11);
        assert_abs_diff_eq!(first.phi, start.1, epsilon = 1e-11);
        assert_abs_diff_eq!(first.psi, start.2, epsilon = 1e-11);
    }

    #[test]
    fn integrate_fourth_order_convergence() {
        // Richardson against a step/8 reference on a fixed arc.
        let start = (0.9, 0.0, PI / 2.0);
        let run = |h: f64| {
            let c = integrate(start, 1.5, h).unwrap();
            let p = *c.samples().last().unwrap();
            [p.r, p.phi, p.psi]
        };
        // Substep control off in this regime (r + 2/r < 3.3 ⇒ h·scale < 0.05).
        let reference = run(1.5 / 1024.0);
        let err = |a: [f64; 3]| {
            a.iter()
                .zip(reference.iter())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(run(1.5 / 128.0));
        let e2 = err(run(1.5 / 256.0));
        let ratio = e1 / e2;
        assert!(
            (10.0..26.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio} ({e1:.3e} vs {e2:.3e})"
        );
    }

    #[test]
    fn first_integral_is_conserved() {
        let curve = integrate((0.7, 0.0, PI / 2.0), 3.0, 1e-3).unwrap();
        let inv = |p: &ProfileSample| (p.psi - p.phi).sin() * p.r * p.r * (0.5 * p.r * p.r).exp();
        let c0 = inv(&curve.samples()[0]);
        for p in curve.samples().iter().filter(|p| p.r < 4.0) {
            assert_abs_diff_eq!(inv(p) / c0, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn line_profile_passes_validation_and_residual() {
        let line = line_profile(0.3, 6.0, 1e-2).unwrap();
        assert!(line.min_r() > 0.0);
        let res = residual_selfexpander(&line).unwrap();
        assert!(res < 1e-10, "plane residual {res}");
        assert!(beta_theta_oscillation(&line) < 1e-12);
        let angles = asymptotic_angles(&line, 4.0).unwrap();
        assert_abs_diff_eq!(angles.phi_plus, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(angles.phi_minus, 0.3 + PI, epsilon = 1e-12);
    }

    #[test]
    fn beta_theta_flags_scaled_curve() {
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let neck = shoot(&ShootingProblem::new(rays)).unwrap();
        assert!(beta_theta_oscillation(&neck) < 1e-6);
        let scaled = neck.scaled(2.0);
        assert!(
            beta_theta_oscillation(&scaled) > 1e-2,
            "scaled curve must not look exact"
        );
    }

    #[test]
    fn residual_flags_perturbed_profile() {
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let mut problem = ShootingProblem::new(rays);
        problem.step = 5e-3;
        let neck = shoot(&problem).unwrap();
        let clean = residual_selfexpander(&neck).unwrap();
        assert!(clean < 1e-3, "clean residual {clean}");
        // r ← r + 0.01 sin s injection.
        let samples: Vec<ProfileSample> = neck
            .samples()
            .iter()
            .map(|p| ProfileSample {
                r: p.r + 0.01 * p.s.sin(),
                ..*p
            })
            .collect();
        let broken = ProfileCurve { samples, step: neck.step() };
        let res = residual_selfexpander(&broken).unwrap();
        assert!(res > 1e-3, "detector must fire, got {res}");
        assert!(res > 50.0 * clean);
    }

    #[test]
    fn shoot_rejects_area_minimizing_rays() {
        let rays = EquivariantRayPair::new(0.0, 1.5708).unwrap();
        assert!(matches!(
            shoot(&ShootingProblem::new(rays)),
            Err(ProfileError::Geom(GeomError::AreaMinimizing { .. }))
        ));
    }

    #[test]
    fn shoot_reflection_symmetry() {
        let rays = EquivariantRayPair::new(0.1, 0.1 + PI / 4.0).unwrap();
        let mut problem = ShootingProblem::new(rays);
        problem.step = 5e-3;
        let a = shoot(&problem).unwrap();
        let reflected = EquivariantRayPair::new(-(0.1 + PI / 4.0), -0.1).unwrap();
        let mut problem_r = ShootingProblem::new(reflected);
        problem_r.step = 5e-3;
        let b = shoot(&problem_r).unwrap();
        // Reflection γ → γ̄ reverses orientation; compare point sets.
        let bs = b.samples();
        let n = bs.len();
        for (i, p) in a.samples().iter().enumerate() {
            let q = bs[n - 1 - i];
            assert_abs_diff_eq!(p.r, q.r, epsilon = 1e-9);
            let d = (p.gamma() - q.gamma().conj()).norm();
            assert!(d < 1e-9, "reflection mismatch {d} at {i}");
        }
    }

    #[test]
    fn asymptotic_angle_error_decays_super_gaussianly() {
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let neck = shoot(&ShootingProblem::new(rays)).unwrap();
        let phi_inf = asymptotic_angles(&neck, 4.0).unwrap().phi_plus;
        // log|φ∞ − φ(s)| against s² on the outgoing branch: slope ≈ −1/2.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in neck.samples() {
            if p.s > 0.0 && p.r > 2.0 && p.r < 5.0 {
                let d = (phi_inf - p.phi).abs();
                if d > 1e-13 {
                    xs.push(p.s * p.s);
                    ys.push(d.ln());
                }
            }
        }
        let (slope, _, _) = least_squares(&xs, &ys);
        assert!(slope < -0.2, "expected Gaussian-rate decay, slope {slope}");
    }

    #[test]
    fn uniqueness_sweep_single_sign_change() {
        // Lemma-level shadow: the turning-angle mismatch has exactly one sign
        // change in the waist parameter.
        let target = PI / 6.0;
        let mut signs = Vec::new();
        let mut r0 = 0.05;
        while r0 < 6.0 {
            let m = half_turn(r0, 6.0, 1e-3)[1] - target;
            signs.push(m.signum());
            r0 *= 1.6;
        }
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1, "signs {signs:?}");
    }

    #[test]
    fn decay_fit_on_neck() {
        let rays = EquivariantRayPair::new(-PI / 6.0, PI / 6.0).unwrap();
        let neck = shoot(&ShootingProblem::new(rays)).unwrap();
        let fit = decay_fit(&neck, 2.2).unwrap();
        assert!(fit.b >= 0.23, "decay exponent {} too small", fit.b);
        assert!(
            fit.exp_rss < fit.poly_rss,
            "Gaussian model must beat polynomial: {} vs {}",
            fit.exp_rss,
            fit.poly_rss
        );
    }
}
