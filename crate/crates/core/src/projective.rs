//! Stereographic projection onto the complex projective line, the chordal
//! metric between rays, the χ embedding of ℝ³ into traceless anti-Hermitian
//! 2x2 matrices, and Möbius actions.
//!
//! Projection is from the pole `(0, 0, −1)`, which maps to the ray `[1, 0]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Cmat2;
use crate::types::{SU2Matrix, UnitVec3};
use crate::vec3::Vec3;

const GUARD_LO: f64 = 1e-150;
const GUARD_HI: f64 = 1e150;

/// Ray `[z1, z2]` in ℂ², defined up to a nonzero complex factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    z1: Complex64,
    z2: Complex64,
}

impl ProjectivePoint {
    /// Rejects the zero ray and non-finite entries. Rays whose larger
    /// component lies outside `[1e-150, 1e150]` are rescaled by it.
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        let s = z1.norm().max(z2.norm());
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self::guarded(z1, z2, s))
    }

    fn guarded(z1: Complex64, z2: Complex64, s: f64) -> Self {
        if (GUARD_LO..=GUARD_HI).contains(&s) {
            Self { z1, z2 }
        } else {
            Self {
                z1: z1 / s,
                z2: z2 / s,
            }
        }
    }

    /// `[z, 1]`.
    pub fn from_plane(z: Complex64) -> Self {
        Self {
            z1: z,
            z2: Complex64::new(1.0, 0.0),
        }
    }

    /// `[1, 0]`, the image of the projection pole.
    pub fn infinity() -> Self {
        Self {
            z1: Complex64::new(1.0, 0.0),
            z2: Complex64::new(0.0, 0.0),
        }
    }

    #[inline]
    pub fn z1(&self) -> Complex64 {
        self.z1
    }
    #[inline]
    pub fn z2(&self) -> Complex64 {
        self.z2
    }

    pub fn is_infinite(&self) -> bool {
        self.z2 == Complex64::new(0.0, 0.0)
    }

    /// `z1 / z2`, or `None` at infinity.
    pub fn to_plane(&self) -> Option<Complex64> {
        (!self.is_infinite()).then(|| self.z1 / self.z2)
    }

    /// `[λ z1, λ z2]`.
    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        Self::new(self.z1 * lambda, self.z2 * lambda)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }
}

/// Stereographic image of `a`.
///
/// Uses `[x + yi, 1 + z]` on the upper hemisphere and the equivalent
/// `[1 − z, x − yi]` on the lower one, so neither form loses precision.
pub fn stereo_project(a: &UnitVec3) -> ProjectivePoint {
    let [x, y, z] = *a.as_array();
    if z >= 0.0 {
        ProjectivePoint {
            z1: Complex64::new(x, y),
            z2: Complex64::new(1.0 + z, 0.0),
        }
    } else if x == 0.0 && y == 0.0 {
        ProjectivePoint::infinity()
    } else {
        ProjectivePoint {
            z1: Complex64::new(1.0 - z, 0.0),
            z2: Complex64::new(x, -y),
        }
    }
}

/// Plane coordinate `(x + yi) / (1 + z)` of `a`, or `None` for the pole.
///
/// On the lower hemisphere `1 + z` is evaluated as `(x² + y²) / (1 − z)`.
pub fn stereo_plane(a: &UnitVec3) -> Option<Complex64> {
    let [x, y, z] = *a.as_array();
    let den = if z >= 0.0 {
        1.0 + z
    } else {
        (x * x + y * y) / (1.0 - z)
    };
    (den > 0.0).then(|| Complex64::new(x / den, y / den))
}

/// Inverse stereographic projection; invariant to the scale of `p`.
pub fn stereo_unproject(p: &ProjectivePoint) -> UnitVec3 {
    let s = p.z1.norm().max(p.z2.norm());
    let z1 = p.z1 / s;
    let z2 = p.z2 / s;
    let n1 = z1.norm_sqr();
    let n2 = z2.norm_sqr();
    let c = z1 * z2.conj();
    let d = n1 + n2;
    UnitVec3::from_array_unchecked([2.0 * c.re / d, 2.0 * c.im / d, (n2 - n1) / d])
}

/// `4 |z₁p₂ − z₂p₁|² / (‖z‖² ‖p‖²)`, the squared chordal distance between
/// the sphere points of two rays.
pub fn projective_chordal_sq(z: &ProjectivePoint, p: &ProjectivePoint) -> f64 {
    let sz = z.z1.norm().max(z.z2.norm());
    let sp = p.z1.norm().max(p.z2.norm());
    let (z1, z2) = (z.z1 / sz, z.z2 / sz);
    let (p1, p2) = (p.z1 / sp, p.z2 / sp);
    let cross = z1 * p2 - z2 * p1;
    4.0 * cross.norm_sqr() / ((z1.norm_sqr() + z2.norm_sqr()) * (p1.norm_sqr() + p2.norm_sqr()))
}

/// `χ(x) = [[x i, y + z i], [−y + z i, −x i]]`.
pub fn chi_embed(v: &Vec3) -> Cmat2 {
    let [x, y, z] = *v;
    Cmat2::new(
        Complex64::new(0.0, x),
        Complex64::new(y, z),
        Complex64::new(-y, z),
        Complex64::new(0.0, -x),
    )
}

/// Reads `(x, y, z)` back from a matrix in the image of [`chi_embed`].
pub fn chi_extract(m: &Cmat2) -> Vec3 {
    [m.m[0][0].im, m.m[0][1].re, m.m[0][1].im]
}

/// `χ⁻¹(U χ(x) Uᴴ)`.
///
/// This is the rotation of `x` by `quat_from_su2(u)` itself; the frame
/// permutation only enters when `U` acts on stereographic rays.
pub fn su2_conjugate(u: &SU2Matrix, x: &Vec3) -> Vec3 {
    let m = u.to_cmat2();
    chi_extract(&(m * chi_embed(x) * m.adjoint()))
}

/// Invertible 2x2 complex matrix `[[σ, ξ], [γ, δ]]` acting on rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusTransform {
    m: Cmat2,
}

impl MobiusTransform {
    pub fn new(
        sigma: Complex64,
        xi: Complex64,
        gamma: Complex64,
        delta: Complex64,
    ) -> Result<Self> {
        Self::from_cmat2(Cmat2::new(sigma, xi, gamma, delta))
    }

    pub fn from_cmat2(m: Cmat2) -> Result<Self> {
        let d = m.det();
        if !(d.norm() > 0.0 && d.norm().is_finite()) {
            return Err(Error::SingularMobius(d.norm()));
        }
        Ok(Self { m })
    }

    pub fn from_su2(u: &SU2Matrix) -> Self {
        Self { m: u.to_cmat2() }
    }

    pub fn identity() -> Self {
        Self {
            m: Cmat2::identity(),
        }
    }

    pub fn as_cmat2(&self) -> &Cmat2 {
        &self.m
    }
}

/// `M · [z1, z2]`.
pub fn mobius_apply(m: &MobiusTransform, p: &ProjectivePoint) -> ProjectivePoint {
    let [w1, w2] = m.m.mul_vec(&[p.z1, p.z2]);
    let s = w1.norm().max(w2.norm());
    ProjectivePoint::guarded(w1, w2, s)
}
