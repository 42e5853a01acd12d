//! Lagrangian planes, frames, the Lagrangian angle and the Liouville form.
//!
//! Plane pairs are kept in the canonical form P₁ = R², P₂ = diag(e^{iθ₁},
//! e^{iθ₂})·R²; arbitrary transverse pairs reduce to this by a unitary change
//! of coordinates performed by the caller. A pair is *area-minimizing* when
//! θ₁ + θ₂ is an integer multiple of π; those pairs are excluded from the
//! uniqueness statements and from the shooting solver's domain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::c2::C2;

/// Tolerance for the exact angle predicates (transversality, angle sums).
pub const ANGLE_TOL: f64 = 1e-10;

/// Guard band around area-minimizing configurations inside which the solvers
/// refuse to run; the neck degenerates (waist → 0) as the band is approached.
pub const SL_GUARD: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("planes are not transverse: characteristic angle {0} is a multiple of pi")]
    NotTransverse(f64),
    #[error("plane pair is area-minimizing (angle sum {sum} is a multiple of pi)")]
    AreaMinimizing { sum: f64 },
    #[error("frame is not Lagrangian: omega(u, v) = {0}")]
    NotLagrangian(f64),
    #[error("frame is not orthonormal: gram defect {0}")]
    NotOrthonormal(f64),
    #[error("degenerate ray pair: directions coincide (mod 2pi)")]
    DegenerateRays,
}

fn mod_pi(a: f64) -> f64 {
    let mut x = a % PI;
    if x < 0.0 {
        x += PI;
    }
    x
}

fn mod_two_pi(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x < 0.0 {
        x += 2.0 * PI;
    }
    x
}

// ---------------------------------------------------------------------------
// Single Lagrangian planes
// ---------------------------------------------------------------------------

/// The Lagrangian plane diag(e^{iα₁}, e^{iα₂})·R² ⊂ C².
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Plane {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Plane {
    pub fn real() -> Self {
        Plane { alpha1: 0.0, alpha2: 0.0 }
    }

    /// The equivariant plane e^{iφ}·R², generated by the profile ray of
    /// direction φ.
    pub fn equivariant(phi: f64) -> Self {
        Plane { alpha1: phi, alpha2: phi }
    }

    /// Euclidean distance from `x` to the plane.
    pub fn distance(&self, x: C2) -> f64 {
        let w1 = (Complex64::from_polar(1.0, -self.alpha1) * x.z1).im;
        let w2 = (Complex64::from_polar(1.0, -self.alpha2) * x.z2).im;
        w1.hypot(w2)
    }

    /// Norm of the orthogonal projection of `x` onto the plane.
    pub fn tangential_norm(&self, x: C2) -> f64 {
        let u1 = (Complex64::from_polar(1.0, -self.alpha1) * x.z1).re;
        let u2 = (Complex64::from_polar(1.0, -self.alpha2) * x.z2).re;
        u1.hypot(u2)
    }

    /// An orthonormal Lagrangian frame spanning the plane.
    pub fn frame(&self) -> LagrangianFrame {
        let u = C2::new(Complex64::from_polar(1.0, self.alpha1), Complex64::new(0.0, 0.0));
        let v = C2::new(Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, self.alpha2));
        LagrangianFrame::new(u, v).expect("diagonal frame is Lagrangian and orthonormal")
    }

    /// Two planes coincide iff their characteristic angles agree mod π.
    pub fn same_plane(&self, other: &Plane, tol: f64) -> bool {
        let d1 = mod_pi(self.alpha1 - other.alpha1);
        let d2 = mod_pi(self.alpha2 - other.alpha2);
        (d1 < tol || PI - d1 < tol) && (d2 < tol || PI - d2 < tol)
    }
}

// ---------------------------------------------------------------------------
// Plane pairs
// ---------------------------------------------------------------------------

/// An ordered pair of transverse Lagrangian planes in canonical position:
/// P₁ = R², P₂ = diag(e^{iθ₁}, e^{iθ₂})·R² with θⱼ ∈ [0, π).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlanePair {
    theta1: f64,
    theta2: f64,
}

impl PlanePair {
    /// Normalizes the angles into [0, π) and enforces transversality.
    pub fn new(theta1: f64, theta2: f64) -> Result<Self, GeomError> {
        let t1 = mod_pi(theta1);
        let t2 = mod_pi(theta2);
        for t in [t1, t2] {
            if t < ANGLE_TOL || PI - t < ANGLE_TOL {
                return Err(GeomError::NotTransverse(t));
            }
        }
        Ok(PlanePair { theta1: t1, theta2: t2 })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn angle_sum(&self) -> f64 {
        self.theta1 + self.theta2
    }

    pub fn plane1(&self) -> Plane {
        Plane::real()
    }

    pub fn plane2(&self) -> Plane {
        Plane { alpha1: self.theta1, alpha2: self.theta2 }
    }

    /// True iff θ₁ + θ₂ ≡ 0 (mod π): the pair belongs to SL, the union
    /// P₁ ∪ P₂ is area-minimizing, and the pair is excluded from Λ.
    pub fn is_area_minimizing(&self) -> bool {
        self.is_area_minimizing_with(ANGLE_TOL)
    }

    pub fn is_area_minimizing_with(&self, tol: f64) -> bool {
        let s = mod_pi(self.angle_sum());
        s < tol || PI - s < tol
    }

    /// Membership in Λ: transverse (guaranteed by construction) and not
    /// area-minimizing.
    pub fn in_lambda(&self) -> bool {
        !self.is_area_minimizing()
    }

    /// The angle-preserving rotation of P₂ towards the equivariant
    /// configuration,
    /// P₂(s) = diag(e^{iθ₁ − sΔ/2}, e^{iθ₂ + sΔ/2}) with Δ = θ₁ − θ₂.
    ///
    /// The Lagrangian angle θ₁ + θ₂ of P₂(s) is constant in s, and at s = 1
    /// both characteristic angles equal (θ₁ + θ₂)/2, so P₂(1) is equivariant
    /// (contained in μ⁻¹(0)).
    pub fn rotation_path(&self, s: f64) -> Result<PlanePair, GeomError> {
        if !self.in_lambda() {
            return Err(GeomError::AreaMinimizing { sum: self.angle_sum() });
        }
        let half = 0.5 * (self.theta1 - self.theta2);
        PlanePair::new(self.theta1 - s * half, self.theta2 + s * half)
    }
}

// ---------------------------------------------------------------------------
// Frames and the Lagrangian angle
// ---------------------------------------------------------------------------

const FRAME_TOL: f64 = 1e-8;

/// An orthonormal real basis (u, v) of a Lagrangian tangent plane.
#[derive(Clone, Copy, Debug)]
pub struct LagrangianFrame {
    u: C2,
    v: C2,
}

impl LagrangianFrame {
    pub fn new(u: C2, v: C2) -> Result<Self, GeomError> {
        let w = u.omega(v);
        if w.abs() > FRAME_TOL {
            return Err(GeomError::NotLagrangian(w));
        }
        let gram = (u.dot(u) - 1.0)
            .abs()
            .max((v.dot(v) - 1.0).abs())
            .max(u.dot(v).abs());
        if gram > FRAME_TOL {
            return Err(GeomError::NotOrthonormal(gram));
        }
        Ok(LagrangianFrame { u, v })
    }

    pub fn u(&self) -> C2 {
        self.u
    }

    pub fn v(&self) -> C2 {
        self.v
    }

    /// The Lagrangian angle θ ∈ (−π, π] defined by Ω|_L = e^{iθ} vol_L,
    /// computed as the argument of the complex determinant det(u | v).
    pub fn lagrangian_angle(&self) -> f64 {
        let det = self.u.z1 * self.v.z2 - self.u.z2 * self.v.z1;
        det.arg()
    }
}

/// Lagrangian angle of a validated frame. See [`LagrangianFrame::lagrangian_angle`].
pub fn lagrangian_angle(frame: &LagrangianFrame) -> f64 {
    frame.lagrangian_angle()
}

/// Liouville form λ = Σ (xⱼ dyⱼ − yⱼ dxⱼ) evaluated on the vector `v` at the
/// point `x`; equals ⟨Jx, v⟩ and satisfies dλ = 2ω.
pub fn liouville(x: C2, v: C2) -> f64 {
    x.j().dot(v)
}

/// The ambient equivariance function μ = x₁y₂ − x₂y₁ = Im(z̄₁ z₂).
///
/// An embedded Lagrangian surface is equivariant iff it is contained in
/// μ⁻¹(0); the parametrization (γ cos α, γ sin α) satisfies this identically.
pub fn mu(x: C2) -> f64 {
    (x.z1.conj() * x.z2).im
}

// ---------------------------------------------------------------------------
// Equivariant ray pairs
// ---------------------------------------------------------------------------

/// Asymptotic profile-ray directions (φ₋ at s → −∞, φ₊ at s → +∞).
///
/// The generated planes e^{iφ∓}R² depend on the directions only mod π. A pair
/// with antipodal rays generates a single plane (the trivial line expander);
/// this is the one admissible non-transverse configuration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EquivariantRayPair {
    pub phi_minus: f64,
    pub phi_plus: f64,
}

/// Canonical shooting configuration of a ray pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NeckConfiguration {
    /// Antipodal rays: the straight line through the origin, a plane.
    Line { phi: f64 },
    /// Transverse rays reduced to the acute representative
    /// (mid − δ/2, mid + δ/2) with δ ∈ (0, π/2).
    Neck { mid: f64, separation: f64 },
}

impl EquivariantRayPair {
    pub fn new(phi_minus: f64, phi_plus: f64) -> Result<Self, GeomError> {
        let d = mod_two_pi(phi_plus - phi_minus);
        if d < ANGLE_TOL || 2.0 * PI - d < ANGLE_TOL {
            return Err(GeomError::DegenerateRays);
        }
        Ok(EquivariantRayPair { phi_minus, phi_plus })
    }

    /// True iff the generated planes intersect only at the origin.
    pub fn is_transverse(&self) -> bool {
        let d = mod_pi(self.phi_plus - self.phi_minus);
        d > ANGLE_TOL && PI - d > ANGLE_TOL
    }

    pub fn is_antipodal(&self) -> bool {
        (mod_two_pi(self.phi_plus - self.phi_minus) - PI).abs() < ANGLE_TOL
    }

    /// The generated asymptotic planes; a single plane for antipodal rays.
    pub fn planes(&self) -> Vec<Plane> {
        let p1 = Plane::equivariant(self.phi_minus);
        let p2 = Plane::equivariant(self.phi_plus);
        if p1.same_plane(&p2, ANGLE_TOL) {
            vec![p1]
        } else {
            vec![p1, p2]
        }
    }

    /// The canonical plane pair generated by the rays (for transverse pairs):
    /// both characteristic angles equal the direction difference mod π.
    pub fn plane_pair(&self) -> Result<PlanePair, GeomError> {
        let d = mod_pi(self.phi_plus - self.phi_minus);
        PlanePair::new(d, d)
    }

    /// Reduces the pair to the configuration actually solved for.
    ///
    /// Expander necks exist exactly for acute ray separations; an obtuse
    /// input (φ₊ − φ₋) mod π ∈ (π/2, π) names the same plane pair as its
    /// acute representative and is normalized to it. Pairs within
    /// [`SL_GUARD`] of the area-minimizing configuration (separation π/2 as
    /// lines, angle sum ≡ 0 mod π) are rejected.
    pub fn neck_configuration(&self) -> Result<NeckConfiguration, GeomError> {
        let d = mod_pi(self.phi_plus - self.phi_minus);
        if d < ANGLE_TOL || PI - d < ANGLE_TOL {
            if self.is_antipodal() {
                return Ok(NeckConfiguration::Line { phi: self.phi_plus });
            }
            return Err(GeomError::DegenerateRays);
        }
        if (d - 0.5 * PI).abs() < SL_GUARD {
            return Err(GeomError::AreaMinimizing { sum: 2.0 * d });
        }
        let (lo, hi) = if d < 0.5 * PI {
            (self.phi_minus, self.phi_minus + d)
        } else {
            (self.phi_minus + d - PI, self.phi_minus)
        };
        Ok(NeckConfiguration::Neck {
            mid: 0.5 * (lo + hi),
            separation: hi - lo,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lagrangian_angle_of_real_plane_is_zero() {
        assert_abs_diff_eq!(Plane::real().frame().lagrangian_angle(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lagrangian_angle_of_diagonal_plane_is_angle_sum() {
        let pair = PlanePair::new(PI / 3.0, PI / 5.0).unwrap();
        let theta = pair.plane2().frame().lagrangian_angle();
        assert_abs_diff_eq!(theta, PI / 3.0 + PI / 5.0, epsilon = 1e-14);
    }

    #[test]
    fn frame_validation_rejects_non_lagrangian_and_skew() {
        let u = C2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let jv = C2::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0));
        assert!(matches!(
            LagrangianFrame::new(u, jv),
            Err(GeomError::NotLagrangian(_))
        ));
        let v = C2::new(Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0));
        assert!(matches!(
            LagrangianFrame::new(u, v),
            Err(GeomError::NotOrthonormal(_))
        ));
    }

    #[test]
    fn liouville_matches_coordinate_formula() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..1000 {
            let x = C2::new(Complex64::new(next(), next()), Complex64::new(next(), next()));
            let v = C2::new(Complex64::new(next(), next()), Complex64::new(next(), next()));
            // Independent route: λ(v) = Σ (xⱼ v_yⱼ − yⱼ v_xⱼ) in raw coordinates.
            let direct = x.z1.re * v.z1.im - x.z1.im * v.z1.re + x.z2.re * v.z2.im
                - x.z2.im * v.z2.re;
            assert_abs_diff_eq!(liouville(x, v), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn liouville_trivial_cases() {
        let v = C2::new(Complex64::new(0.3, 0.7), Complex64::new(-1.0, 2.0));
        assert_eq!(liouville(C2::ZERO, v), 0.0);
        let x = C2::from_re(1.0, 0.0);
        let iv = C2::new(Complex64::i(), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(liouville(x, iv), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mu_examples() {
        let p = C2::new(Complex64::new(1.0, 0.0), Complex64::i());
        assert_abs_diff_eq!(mu(p), 1.0, epsilon = 1e-15);
        let q = C2::new(Complex64::i(), Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(mu(q), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mu_vanishes_on_equivariant_surfaces() {
        // Points (γ cos α, γ sin α) for arbitrary γ, α.
        for k in 0..200 {
            let g = Complex64::from_polar(0.1 + 0.05 * k as f64, 0.37 * k as f64);
            let a = 0.11 * k as f64;
            let p = C2::new(g * a.cos(), g * a.sin());
            assert!(mu(p).abs() < 1e-12 * (1.0 + p.norm_sq()));
        }
    }

    #[test]
    fn area_minimizing_examples() {
        assert!(PlanePair::new(PI / 3.0, 2.0 * PI / 3.0).unwrap().is_area_minimizing());
        assert!(!PlanePair::new(PI / 2.0, PI / 4.0).unwrap().is_area_minimizing());
        assert!(PlanePair::new(PI / 2.0, PI / 2.0).unwrap().is_area_minimizing());
    }

    #[test]
    fn transversality_rejected_at_zero_angle() {
        assert!(matches!(
            PlanePair::new(0.0, PI / 4.0),
            Err(GeomError::NotTransverse(_))
        ));
        assert!(matches!(
            PlanePair::new(PI, PI / 4.0),
            Err(GeomError::NotTransverse(_))
        ));
    }

    #[test]
    fn rotation_path_examples() {
        let pair = PlanePair::new(PI / 3.0, PI / 6.0).unwrap();
        let at0 = pair.rotation_path(0.0).unwrap();
        assert_abs_diff_eq!(at0.theta1(), pair.theta1(), epsilon = 1e-15);
        assert_abs_diff_eq!(at0.theta2(), pair.theta2(), epsilon = 1e-15);
        let at1 = pair.rotation_path(1.0).unwrap();
        assert_abs_diff_eq!(at1.theta1(), PI / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(at1.theta2(), PI / 4.0, epsilon = 1e-14);
        // The endpoint plane is equivariant, hence inside μ⁻¹(0).
        let p2 = at1.plane2();
        for k in 0..50 {
            let x = (k as f64).sin() * 1.5;
            let y = (k as f64).cos() * 0.8;
            let pt = C2::new(
                Complex64::from_polar(1.0, p2.alpha1) * x,
                Complex64::from_polar(1.0, p2.alpha2) * y,
            );
            assert!(mu(pt).abs() < 1e-12);
        }
        let sl = PlanePair::new(PI / 3.0, 2.0 * PI / 3.0).unwrap();
        assert!(matches!(
            sl.rotation_path(0.5),
            Err(GeomError::AreaMinimizing { .. })
        ));
    }

    #[test]
    fn neck_configuration_normalizes_obtuse_rays() {
        let rays = EquivariantRayPair::new(0.0, 2.0 * PI / 3.0).unwrap();
        match rays.neck_configuration().unwrap() {
            NeckConfiguration::Neck { mid, separation } => {
                assert_abs_diff_eq!(separation, PI / 3.0, epsilon = 1e-12);
                assert_abs_diff_eq!(mid, -PI / 6.0, epsilon = 1e-12);
            }
            other => panic!("expected neck, got {other:?}"),
        }
        let antipodal = EquivariantRayPair::new(0.3, 0.3 + PI).unwrap();
        assert_eq!(
            antipodal.neck_configuration().unwrap(),
            NeckConfiguration::Line { phi: 0.3 + PI }
        );
        let sl = EquivariantRayPair::new(0.0, PI / 2.0).unwrap();
        assert!(matches!(
            sl.neck_configuration(),
            Err(GeomError::AreaMinimizing { .. })
        ));
        // 1.5708 is an area-minimizing configuration within the guard band.
        let near_sl = EquivariantRayPair::new(0.0, 1.5708).unwrap();
        assert!(matches!(
            near_sl.neck_configuration(),
            Err(GeomError::AreaMinimizing { .. })
        ));
    }

    proptest! {
        #[test]
        fn angle_in_plane_rotation_invariance(t1 in 0.05f64..3.0, t2 in 0.05f64..3.0, beta in -3.0f64..3.0) {
            prop_assume!(t1 > 1e-3 && PI - t1 > 1e-3 && t2 > 1e-3 && PI - t2 > 1e-3);
            let pair = PlanePair::new(t1, t2).unwrap();
            let f = pair.plane2().frame();
            // Rotate the frame within its plane by an SO(2) change of basis.
            let (c, s) = (beta.cos(), beta.sin());
            let u = C2::new(c * f.u().z1 + s * f.v().z1, c * f.u().z2 + s * f.v().z2);
            let v = C2::new(-s * f.u().z1 + c * f.v().z1, -s * f.u().z2 + c * f.v().z2);
            let rotated = LagrangianFrame::new(u, v).unwrap();
            let a = f.lagrangian_angle();
            let b = rotated.lagrangian_angle();
            let diff = (a - b).rem_euclid(2.0 * PI);
            prop_assert!(diff < 1e-10 || (2.0 * PI - diff) < 1e-10);
        }

        #[test]
        fn pair_angle_difference_is_angle_sum(t1 in 0.05f64..3.0, t2 in 0.05f64..3.0) {
            prop_assume!(t1 > 1e-3 && PI - t1 > 1e-3 && t2 > 1e-3 && PI - t2 > 1e-3);
            let pair = PlanePair::new(t1, t2).unwrap();
            let a1 = pair.plane1().frame().lagrangian_angle();
            let a2 = pair.plane2().frame().lagrangian_angle();
            let diff = (a2 - a1 - pair.angle_sum()).rem_euclid(2.0 * PI);
            prop_assert!(diff < 1e-10 || (2.0 * PI - diff) < 1e-10);
        }

        #[test]
        fn rotation_path_preserves_angle_sum(t1 in 0.05f64..3.0, t2 in 0.05f64..3.0, s in 0.0f64..1.0) {
            prop_assume!(t1 > 1e-3 && PI - t1 > 1e-3 && t2 > 1e-3 && PI - t2 > 1e-3);
            if let Ok(pair) = PlanePair::new(t1, t2) {
                if pair.in_lambda() {
                    if let Ok(rot) = pair.rotation_path(s) {
                        let d = (rot.angle_sum() - pair.angle_sum()).rem_euclid(PI);
                        prop_assert!(d < 1e-10 || PI - d < 1e-10);
                        prop_assert_eq!(rot.is_area_minimizing(), pair.is_area_minimizing());
                    }
                }
            }
        }
    }
}
