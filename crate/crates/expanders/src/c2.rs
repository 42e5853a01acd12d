//! Points and vectors of C² with the standard Kähler structure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point (or tangent vector) of C², identified with R⁴ via zⱼ = xⱼ + i yⱼ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl C2 {
    pub const ZERO: C2 = C2 {
        z1: Complex64::new(0.0, 0.0),
        z2: Complex64::new(0.0, 0.0),
    };

    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        C2 { z1, z2 }
    }

    pub fn from_re(x1: f64, x2: f64) -> Self {
        C2::new(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    }

    /// Real Euclidean inner product of R⁴: Re⟨u, v⟩ = Σ Re(ūⱼ vⱼ).
    pub fn dot(self, other: C2) -> f64 {
        (self.z1.conj() * other.z1 + self.z2.conj() * other.z2).re
    }

    /// Kähler form ω(u, v) = Σ Im(ūⱼ vⱼ).
    pub fn omega(self, other: C2) -> f64 {
        (self.z1.conj() * other.z1 + self.z2.conj() * other.z2).im
    }

    /// The complex structure J, i.e. multiplication by i.
    pub fn j(self) -> C2 {
        C2::new(Complex64::i() * self.z1, Complex64::i() * self.z2)
    }

    pub fn norm_sq(self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, c: f64) -> C2 {
        C2::new(c * self.z1, c * self.z2)
    }

    /// Real coordinates (x₁, y₁, x₂, y₂).
    pub fn coords(self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }
}

impl std::ops::Add for C2 {
    type Output = C2;
    fn add(self, rhs: C2) -> C2 {
        C2::new(self.z1 + rhs.z1, self.z2 + rhs.z2)
    }
}

impl std::ops::Sub for C2 {
    type Output = C2;
    fn sub(self, rhs: C2) -> C2 {
        C2::new(self.z1 - rhs.z1, self.z2 - rhs.z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn omega_is_antisymmetric_and_j_invariant() {
        let u = C2::new(Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25));
        let v = C2::new(Complex64::new(0.3, -1.0), Complex64::new(2.0, 1.5));
        assert_abs_diff_eq!(u.omega(v), -v.omega(u), epsilon = 1e-15);
        // ω(Ju, Jv) = ω(u, v)
        assert_abs_diff_eq!(u.j().omega(v.j()), u.omega(v), epsilon = 1e-15);
        // g(Ju, v) = ω(u, v)
        assert_abs_diff_eq!(u.j().dot(v), u.omega(v), epsilon = 1e-15);
    }
}
