//! Rotation representations: unit quaternions (Hamilton convention, scalar
//! first), SU(2) matrices, rotation matrices and weighted vector observations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Cmat2;
use crate::vec3::{self, Vec3};

/// Smallest accepted observation weight.
pub const MIN_WEIGHT: f64 = 1e-300;

/// Flips the sign of `q` so that `w >= 0`, or, when `w == 0`, so that the
/// first nonzero of `(x, y, z)` is positive.
pub fn canonicalize(q: [f64; 4]) -> [f64; 4] {
    let lead = q.iter().copied().find(|c| *c != 0.0).unwrap_or(0.0);
    if lead < 0.0 {
        [-q[0], -q[1], -q[2], -q[3]]
    } else {
        q
    }
}

fn normalize4(q: [f64; 4]) -> Result<[f64; 4]> {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok([q[0] / n, q[1] / n, q[2] / n, q[3] / n])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes `(w, x, y, z)`. The sign is kept as given.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_array([w, x, y, z])
    }

    pub fn from_array(q: [f64; 4]) -> Result<Self> {
        let [w, x, y, z] = normalize4(q)?;
        Ok(Self { w, x, y, z })
    }

    /// Same as [`from_array`](Self::from_array) followed by [`canonical`](Self::canonical).
    pub fn from_array_canonical(q: [f64; 4]) -> Result<Self> {
        Self::from_array(q).map(|u| u.canonical())
    }

    pub(crate) fn from_array_unchecked(q: [f64; 4]) -> Self {
        Self {
            w: q[0],
            x: q[1],
            y: q[2],
            z: q[3],
        }
    }

    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }
    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn canonical(&self) -> Self {
        Self::from_array_unchecked(canonicalize(self.to_array()))
    }

    pub fn negated(&self) -> Self {
        Self::from_array_unchecked([-self.w, -self.x, -self.y, -self.z])
    }

    pub fn conjugate(&self) -> Self {
        Self::from_array_unchecked([self.w, -self.x, -self.y, -self.z])
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU2Matrix {
    alpha: Complex64,
    beta: Complex64,
}

impl SU2Matrix {
    pub const IDENTITY: Self = Self {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(0.0, 0.0),
    };

    /// Normalizes `(alpha, beta)` to `|alpha|² + |beta|² = 1`.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    #[inline]
    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }
    #[inline]
    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `[[α, β], [−β̄, ᾱ]]`.
    pub fn to_cmat2(&self) -> Cmat2 {
        Cmat2::new(self.alpha, self.beta, -self.beta.conj(), self.alpha.conj())
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    m: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub const IDENTITY: Self = Self {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Wraps `m` without checking orthogonality.
    pub fn from_array_unchecked(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    /// Builds the matrix from its three columns.
    pub fn from_columns(c0: &Vec3, c1: &Vec3, c2: &Vec3) -> Self {
        Self {
            m: [
                [c0[0], c1[0], c2[0]],
                [c0[1], c1[1], c2[1]],
                [c0[2], c1[2], c2[2]],
            ],
        }
    }

    pub fn as_array(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        [
            vec3::dot(&self.m[0], v),
            vec3::dot(&self.m[1], v),
            vec3::dot(&self.m[2], v),
        ]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[j][i];
            }
        }
        Self { m }
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        vec3::dot(&m[0], &vec3::cross(&m[1], &m[2]))
    }

    /// `‖RᵀR − I‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self.transpose().mul(self);
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                r = r.max((g.m[i][j] - id).abs());
            }
        }
        r
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    v: Vec3,
}

impl UnitVec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_array([x, y, z])
    }

    pub fn from_array(v: Vec3) -> Result<Self> {
        let n = vec3::norm(&v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            v: vec3::scale(&v, 1.0 / n),
        })
    }

    pub(crate) fn from_array_unchecked(v: Vec3) -> Self {
        Self { v }
    }

    pub fn x_axis() -> Self {
        Self { v: [1.0, 0.0, 0.0] }
    }
    pub fn y_axis() -> Self {
        Self { v: [0.0, 1.0, 0.0] }
    }
    pub fn z_axis() -> Self {
        Self { v: [0.0, 0.0, 1.0] }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.v[0]
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.v[1]
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.v[2]
    }

    #[inline]
    pub fn as_array(&self) -> &Vec3 {
        &self.v
    }

    pub fn negated(&self) -> Self {
        Self {
            v: vec3::scale(&self.v, -1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub reference: UnitVec3,
    pub target: UnitVec3,
    pub weight: f64,
}

impl Observation {
    pub fn new(reference: UnitVec3, target: UnitVec3, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= MIN_WEIGHT) {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(Self {
            reference,
            target,
            weight,
        })
    }
}

/// Nonempty list of weighted `(reference, target)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    obs: Vec<Observation>,
}

impl ObservationSet {
    pub fn new(obs: Vec<Observation>) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::EmptyObservations);
        }
        if let Some(o) = obs
            .iter()
            .find(|o| !(o.weight.is_finite() && o.weight >= MIN_WEIGHT))
        {
            return Err(Error::InvalidWeight(o.weight));
        }
        Ok(Self { obs })
    }

    /// Builds the set from `(reference, target, weight)` triples.
    pub fn from_triples(
        items: impl IntoIterator<Item = (UnitVec3, UnitVec3, f64)>,
    ) -> Result<Self> {
        let obs = items
            .into_iter()
            .map(|(a, b, w)| Observation::new(a, b, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observation> {
        self.obs.iter()
    }

    pub fn as_slice(&self) -> &[Observation] {
        &self.obs
    }

    pub fn total_weight(&self) -> f64 {
        self.obs.iter().map(|o| o.weight).sum()
    }

    /// Returns a copy with every weight multiplied by `c`.
    pub fn scaled_weights(&self, c: f64) -> Result<Self> {
        let obs = self
            .obs
            .iter()
            .map(|o| Observation::new(o.reference, o.target, o.weight * c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    /// `Σ wᵢ ‖bᵢ − R aᵢ‖²` for the rotation of `q`.
    pub fn wahba_loss(&self, q: &UnitQuaternion) -> f64 {
        let r = quat_to_rotmat(q);
        self.obs
            .iter()
            .map(|o| {
                let ra = r.mul_vec(o.reference.as_array());
                let d = vec3::sub(o.target.as_array(), &ra);
                o.weight * vec3::dot(&d, &d)
            })
            .sum()
    }
}

impl<'a> IntoIterator for &'a ObservationSet {
    type Item = &'a Observation;
    type IntoIter = std::slice::Iter<'a, Observation>;

    fn into_iter(self) -> Self::IntoIter {
        self.obs.iter()
    }
}

pub fn quat_to_rotmat(q: &UnitQuaternion) -> RotationMatrix {
    let [w, x, y, z] = q.to_array();
    let (xx, yy, zz) = (x * x, y * y, z * z);
    let (xy, xz, yz) = (x * y, x * z, y * z);
    let (wx, wy, wz) = (w * x, w * y, w * z);
    RotationMatrix {
        m: [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ],
    }
}

/// `α = w + x i`, `β = y + z i`.
pub fn su2_from_quat(q: &UnitQuaternion) -> SU2Matrix {
    SU2Matrix {
        alpha: Complex64::new(q.w, q.x),
        beta: Complex64::new(q.y, q.z),
    }
}

/// Inverse of [`su2_from_quat`]; the result is canonicalized.
pub fn quat_from_su2(u: &SU2Matrix) -> UnitQuaternion {
    UnitQuaternion::from_array_unchecked(canonicalize([
        u.alpha.re, u.alpha.im, u.beta.re, u.beta.im,
    ]))
}

#[inline]
pub(crate) fn frame_fix_raw(q: [f64; 4]) -> [f64; 4] {
    [q[0], -q[3], q[2], q[1]]
}

/// Maps a quaternion read off the stereographic frame, `(w, x, y, z)`, to the
/// world frame, `(w, −z, y, x)`, and canonicalizes.
pub fn apply_frame_fix(q: &UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion::from_array_unchecked(canonicalize(frame_fix_raw(q.to_array())))
}

/// Geodesic angle in degrees between the rotations of `a` and `b`.
///
/// Evaluated as `4·atan2(‖a − s b‖, ‖a + s b‖)` with `s = sign(a·b)`, which
/// equals `acos(2(a·b)² − 1)` but keeps full precision near zero.
pub fn quat_angular_error(a: &UnitQuaternion, b: &UnitQuaternion) -> f64 {
    let s = if a.dot(b) < 0.0 { -1.0 } else { 1.0 };
    let pa = a.to_array();
    let pb = b.to_array();
    let mut dm = 0.0;
    let mut dp = 0.0;
    for i in 0..4 {
        let m = pa[i] - s * pb[i];
        let p = pa[i] + s * pb[i];
        dm += m * m;
        dp += p * p;
    }
    (4.0 * dm.sqrt().atan2(dp.sqrt())).to_degrees()
}

/// Hamilton product `a ⊗ b` (apply `b` first). Not canonicalized.
pub fn quat_compose(a: &UnitQuaternion, b: &UnitQuaternion) -> UnitQuaternion {
    let p = hamilton(a.to_array(), b.to_array());
    UnitQuaternion::from_array(p).unwrap_or(UnitQuaternion::IDENTITY)
}

#[inline]
pub(crate) fn hamilton(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let [aw, ax, ay, az] = a;
    let [bw, bx, by, bz] = b;
    [
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ]
}

/// Rotates a 3-vector by `q` (unit quaternion).
pub fn rotate_raw(q: &UnitQuaternion, v: &Vec3) -> Vec3 {
    let u = [q.x, q.y, q.z];
    let t = vec3::scale(&vec3::cross(&u, v), 2.0);
    vec3::add(&vec3::add(v, &vec3::scale(&t, q.w)), &vec3::cross(&u, &t))
}

pub fn rotate_vec(q: &UnitQuaternion, v: &UnitVec3) -> UnitVec3 {
    UnitVec3::from_array_unchecked(rotate_raw(q, v.as_array()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sign_rules() {
        assert_eq!(canonicalize([-1.0, 0.0, 0.0, 0.0]), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(canonicalize([0.0, 0.0, -1.0, 2.0]), [0.0, 0.0, 1.0, -2.0]);
        assert_eq!(canonicalize([0.0, 1.0, -1.0, 0.0]), [0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn known_rotation_matrices() {
        let r = quat_to_rotmat(&UnitQuaternion::IDENTITY);
        assert_eq!(r, RotationMatrix::IDENTITY);
        let r = quat_to_rotmat(&UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap());
        assert_eq!(
            *r.as_array(),
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        );
    }

    #[test]
    fn frame_fix_examples() {
        assert_eq!(
            apply_frame_fix(&UnitQuaternion::IDENTITY),
            UnitQuaternion::IDENTITY
        );
        let q = apply_frame_fix(&UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap());
        assert_eq!(q.to_array(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn su2_examples() {
        let u = su2_from_quat(&UnitQuaternion::new(0.0, 0.0, 1.0, 0.0).unwrap());
        assert_eq!(u.alpha(), Complex64::new(0.0, 0.0));
        assert_eq!(u.beta(), Complex64::new(1.0, 0.0));
        let m = u.to_cmat2();
        assert!(m.unitarity_residual() < 1e-15);
        assert!((m.det() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn angular_error_examples() {
        let q = UnitQuaternion::new(0.3, -0.2, 0.9, 0.1).unwrap();
        assert_eq!(quat_angular_error(&q, &q), 0.0);
        assert_eq!(quat_angular_error(&q, &q.negated()), 0.0);
        let h = std::f64::consts::FRAC_PI_4;
        let r = UnitQuaternion::new(h.cos(), h.sin(), 0.0, 0.0).unwrap();
        assert!((quat_angular_error(&UnitQuaternion::IDENTITY, &r) - 90.0).abs() < 1e-12);
    }

    #[test]
    fn observation_weights_are_validated() {
        let a = UnitVec3::x_axis();
        assert!(matches!(
            Observation::new(a, a, 0.0),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            Observation::new(a, a, 1e-301),
            Err(Error::InvalidWeight(_))
        ));
        assert!(Observation::new(a, a, 1e-300).is_ok());
        assert!(matches!(
            ObservationSet::new(vec![]),
            Err(Error::EmptyObservations)
        ));
    }

    #[test]
    fn zero_vectors_are_rejected() {
        assert_eq!(UnitVec3::new(0.0, 0.0, 0.0), Err(Error::ZeroVector));
        assert_eq!(
            UnitQuaternion::new(0.0, 0.0, 0.0, 0.0),
            Err(Error::ZeroVector)
        );
        assert_eq!(UnitVec3::new(f64::NAN, 0.0, 1.0), Err(Error::ZeroVector));
    }
}
