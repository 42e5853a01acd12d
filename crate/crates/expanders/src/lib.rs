//! Numerical laboratory for equivariant Lagrangian self-expanders in C².
//!
//! A self-expander is a Lagrangian surface L with mean curvature H = x⊥, so
//! that L_t = √(2t)·L moves by mean curvature flow. Equivariant surfaces are
//! generated by a planar profile curve γ through (γ(s)cos α, γ(s)sin α), which
//! reduces everything to one-dimensional computations:
//!
//! * [`geom`] — planes, frames, Lagrangian angle, Liouville form, plane-pair
//!   classification (area-minimizing angle criterion) and the rotation path.
//! * [`profile`] — the profile ODE, shooting solver for expanders asymptotic
//!   to a prescribed ray pair, the intrinsic H = x⊥ residual oracle, β+θ
//!   exactness checks and tail decay fits.
//! * [`density`] — backwards heat kernel, Gaussian density ratios of surfaces
//!   and plane pairs, monotonicity and small-scale density bounds.
//! * [`linop`] — finite-difference discretization of the drift operator
//!   L(φ) = Δφ + ⟨x,∇φ⟩ − 2φ per Fourier mode, its formal adjoint, spectral
//!   and coercivity diagnostics, barrier and linearization checks.
//! * [`flow`] — equivariant mean curvature flow of profile curves, cones
//!   flowed into expanders, and self-similarity certification.

pub mod c2;
pub mod density;
pub mod flow;
pub mod geom;
mod interp;
pub mod io;
pub mod linop;
pub mod profile;

pub use c2::C2;
pub use geom::{EquivariantRayPair, LagrangianFrame, Plane, PlanePair};
pub use profile::ProfileCurve;
