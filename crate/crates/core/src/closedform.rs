//! Closed-form rotations for one and two vector pairs.
//!
//! Every rotation aligning `a` to `b` lies in the 2D kernel of the sphere
//! constraint matrix (see [`build_q`](crate::wahba::build_q)). The four rows
//! returned by [`kernel_rows`] span that kernel, each with one zero component.
//! Row and constraint choices are always made on the largest-magnitude entry
//! of `a + b` or `a − b`, which keeps every routine total.

use crate::error::{Error, Result};
use crate::types::{canonicalize, quat_to_rotmat, UnitQuaternion, UnitVec3};
use crate::vec3::{self, Vec3};
use crate::wahba::WahbaSolution;

/// Quaternion `(w, x, y, z)` without a norm constraint.
pub type UnnormalizedQuat = [f64; 4];

/// Cross-product norm below which a two-point set counts as collinear.
pub const COLLINEAR_TOL: f64 = 1e-10;

const COEF_TOL: f64 = 1e-14;

/// The four kernel rows, named by their zero component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelRowId {
    /// `(0, s)`: the half-turn about `a + b`.
    W,
    /// `(s_x, 0, d_z, −d_y)`.
    X,
    /// `(s_y, −d_z, 0, d_x)`.
    Y,
    /// `(s_z, d_y, −d_x, 0)`.
    Z,
}

impl KernelRowId {
    pub const ALL: [KernelRowId; 4] = [Self::W, Self::X, Self::Y, Self::Z];

    fn index(self) -> usize {
        self as usize
    }
}

/// Entry of `s = a + b` (`Sum`) or `d = a − b` (`Diff`) with the given axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Generator {
    Sum(usize),
    Diff(usize),
}

fn largest_generator(s: &Vec3, d: &Vec3) -> Generator {
    let mut best = Generator::Sum(0);
    let mut mag = -1.0;
    for k in 0..3 {
        if s[k].abs() > mag {
            mag = s[k].abs();
            best = Generator::Sum(k);
        }
    }
    for k in 0..3 {
        if d[k].abs() > mag {
            mag = d[k].abs();
            best = Generator::Diff(k);
        }
    }
    best
}

/// The two kernel rows that contain the generator; they are independent
/// whenever the generator is nonzero.
fn kernel_pair(g: Generator) -> (KernelRowId, KernelRowId) {
    use KernelRowId::*;
    match g {
        Generator::Sum(0) => (W, X),
        Generator::Sum(1) => (W, Y),
        Generator::Sum(_) => (W, Z),
        Generator::Diff(0) => (Y, Z),
        Generator::Diff(1) => (X, Z),
        Generator::Diff(_) => (X, Y),
    }
}

/// Indices of the two constraint rows containing the generator.
fn constraint_pair(g: Generator) -> (usize, usize) {
    match g {
        Generator::Diff(0) => (0, 1),
        Generator::Diff(1) => (0, 2),
        Generator::Diff(_) => (0, 3),
        Generator::Sum(0) => (2, 3),
        Generator::Sum(1) => (1, 3),
        Generator::Sum(_) => (1, 2),
    }
}

fn kernel_row_raw(s: &Vec3, d: &Vec3, id: KernelRowId) -> UnnormalizedQuat {
    match id {
        KernelRowId::W => [0.0, s[0], s[1], s[2]],
        KernelRowId::X => [s[0], 0.0, d[2], -d[1]],
        KernelRowId::Y => [s[1], -d[2], 0.0, d[0]],
        KernelRowId::Z => [s[2], d[1], -d[0], 0.0],
    }
}

fn constraint_row_raw(s: &Vec3, d: &Vec3, k: usize) -> [f64; 4] {
    match k {
        0 => [0.0, d[0], d[1], d[2]],
        1 => [-d[0], 0.0, -s[2], s[1]],
        2 => [-d[1], s[2], 0.0, -s[0]],
        _ => [-d[2], -s[1], s[0], 0.0],
    }
}

#[inline]
fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
fn norm4(a: &[f64; 4]) -> f64 {
    dot4(a, a).sqrt()
}

fn unit_canonical(q: UnnormalizedQuat) -> UnitQuaternion {
    let n = norm4(&q);
    UnitQuaternion::from_array_unchecked(canonicalize([q[0] / n, q[1] / n, q[2] / n, q[3] / n]))
}

/// Rotation about `a × b` taking `a` to `b`.
pub fn align_cross(a: &UnitVec3, b: &UnitVec3) -> Result<UnitQuaternion> {
    let c = vec3::dot(a.as_array(), b.as_array());
    if c <= -1.0 + 1e-12 {
        return Err(Error::AntipodalSingularity);
    }
    let s = (2.0 * (1.0 + c)).sqrt();
    let x = vec3::cross(a.as_array(), b.as_array());
    UnitQuaternion::new(0.5 * s, x[0] / s, x[1] / s, x[2] / s)
}

/// The four kernel rows in [`KernelRowId::ALL`] order.
pub fn kernel_rows(a: &UnitVec3, b: &UnitVec3) -> [UnnormalizedQuat; 4] {
    let s = vec3::add(a.as_array(), b.as_array());
    let d = vec3::sub(a.as_array(), b.as_array());
    KernelRowId::ALL.map(|id| kernel_row_raw(&s, &d, id))
}

pub fn kernel_row(a: &UnitVec3, b: &UnitVec3, id: KernelRowId) -> UnnormalizedQuat {
    kernel_rows(a, b)[id.index()]
}

/// Kernel row selected for the pair `(a, b)`.
pub fn select_kernel_row(a: &UnitVec3, b: &UnitVec3) -> KernelRowId {
    let s = vec3::add(a.as_array(), b.as_array());
    let d = vec3::sub(a.as_array(), b.as_array());
    kernel_pair(largest_generator(&s, &d)).0
}

/// Rotation taking `a` to `b`, defined for every input including antipodal
/// pairs. The unnormalized row has norm at least `√(2/3)`.
pub fn one_point_align(a: &UnitVec3, b: &UnitVec3) -> UnitQuaternion {
    let s = vec3::add(a.as_array(), b.as_array());
    let d = vec3::sub(a.as_array(), b.as_array());
    let id = kernel_pair(largest_generator(&s, &d)).0;
    unit_canonical(kernel_row_raw(&s, &d, id))
}

/// Unnormalized rotation taking `a1 → b1` and `a2 → b2` for exactly
/// alignable pairs with `‖aᵢ‖ = ‖bᵢ‖` (not necessarily unit).
///
/// The kernel basis comes from pair 1, the constraint row from pair 2. Of the
/// two candidate constraint rows the one acting more strongly on the kernel
/// is used; if neither acts, the whole kernel of pair 1 aligns pair 2 and a
/// basis row is returned.
pub fn exact_align_unnormalized(a1: &Vec3, b1: &Vec3, a2: &Vec3, b2: &Vec3) -> UnnormalizedQuat {
    let s1 = vec3::add(a1, b1);
    let d1 = vec3::sub(a1, b1);
    let (ia, ib) = kernel_pair(largest_generator(&s1, &d1));
    let ra = kernel_row_raw(&s1, &d1, ia);
    let rb = kernel_row_raw(&s1, &d1, ib);

    let s2 = vec3::add(a2, b2);
    let d2 = vec3::sub(a2, b2);
    let (ka, kb) = constraint_pair(largest_generator(&s2, &d2));
    let mut best = [0.0; 2];
    let mut best_mag = -1.0;
    let mut best_scale = 0.0;
    for k in [ka, kb] {
        let c = constraint_row_raw(&s2, &d2, k);
        let ca = dot4(&c, &ra);
        let cb = dot4(&c, &rb);
        let mag = ca.abs().max(cb.abs());
        if mag > best_mag {
            best_mag = mag;
            best = [ca, cb];
            best_scale = norm4(&c) * norm4(&ra).max(norm4(&rb));
        }
    }
    if best_mag > COEF_TOL * best_scale {
        let [ca, cb] = best;
        [
            cb * ra[0] - ca * rb[0],
            cb * ra[1] - ca * rb[1],
            cb * ra[2] - ca * rb[2],
            cb * ra[3] - ca * rb[3],
        ]
    } else {
        ra
    }
}

/// Rotation taking `a1 → b1` and `a2 → b2` for noiseless data.
pub fn two_point_exact(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
) -> Result<UnitQuaternion> {
    let n = vec3::cross(a1.as_array(), a2.as_array());
    if n == [0.0; 3] {
        return Err(Error::DegenerateFrame);
    }
    Ok(unit_canonical(exact_align_unnormalized(
        a1.as_array(),
        b1.as_array(),
        a2.as_array(),
        b2.as_array(),
    )))
}

/// Weighted average of two rotations given as unnormalized quaternions: the
/// unit quaternion maximizing `Σ wᵢ (q · q̂ᵢ)²`.
///
/// When the inputs are orthogonal and the weights equal, `q2` is returned.
pub fn average_two_quats(
    q1: &UnnormalizedQuat,
    q2: &UnnormalizedQuat,
    w1: f64,
    w2: f64,
) -> UnitQuaternion {
    let n1 = dot4(q1, q1);
    let n2 = dot4(q2, q2);
    let d = dot4(q1, q2);
    let (mu, nu) = if w1 > w2 {
        let tau = (w1 - w2) * n1 * n2;
        let omega = 2.0 * w1 * n2 * d;
        let nu = 2.0 * w2 * n1 * d;
        (tau + (tau * tau + omega * nu).sqrt(), nu)
    } else {
        let tau = (w2 - w1) * n1 * n2;
        let omega = 2.0 * w2 * n1 * d;
        let mu = 2.0 * w1 * n2 * d;
        (mu, tau + (tau * tau + omega * mu).sqrt())
    };
    if mu == 0.0 && nu == 0.0 {
        return unit_canonical(*q2);
    }
    let den = (n1 * mu * mu + n2 * nu * nu + 2.0 * d * mu * nu).sqrt();
    let q = [0, 1, 2, 3].map(|i| (mu * q1[i] + nu * q2[i]) / den);
    unit_canonical(q)
}

fn solution(
    q: UnitQuaternion,
    pairs: [(&UnitVec3, &UnitVec3, f64); 2],
    condition: f64,
) -> WahbaSolution {
    let r = quat_to_rotmat(&q);
    let residual = pairs
        .iter()
        .map(|(a, b, w)| {
            let e = vec3::sub(b.as_array(), &r.mul_vec(a.as_array()));
            w * vec3::dot(&e, &e)
        })
        .sum();
    WahbaSolution {
        q,
        residual,
        condition,
    }
}

/// `u × v`, computed as `u × (v ∓ u)` so nearly (anti)parallel inputs keep
/// full relative accuracy: the difference is exact for close operands.
fn frame_normal(u: &UnitVec3, v: &UnitVec3) -> Vec3 {
    let (u, v) = (u.as_array(), v.as_array());
    if vec3::dot(u, v) >= 0.0 {
        vec3::cross(u, &vec3::sub(v, u))
    } else {
        vec3::cross(u, &vec3::add(v, u))
    }
}

fn frame_norms(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
) -> (Vec3, f64, Vec3, f64) {
    let na = frame_normal(a1, a2);
    let nb = frame_normal(b1, b2);
    (na, vec3::norm(&na), nb, vec3::norm(&nb))
}

/// Optimal weighted two-point solution: the average of the two rotations
/// that align the frame normals together with one of the pairs.
pub fn two_point_weighted(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
    w1: f64,
    w2: f64,
) -> Result<WahbaSolution> {
    let (_, la, _, lb) = frame_norms(a1, a2, b1, b2);
    if !(la >= COLLINEAR_TOL && lb >= COLLINEAR_TOL) {
        return Err(Error::DegenerateFrame);
    }
    let q = weighted_rotation(a1, a2, b1, b2, w1, w2, la, lb);
    Ok(solution(q, [(a1, b1, w1), (a2, b2, w2)], la.min(lb)))
}

#[allow(clippy::too_many_arguments)]
fn weighted_rotation(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
    w1: f64,
    w2: f64,
    la: f64,
    lb: f64,
) -> UnitQuaternion {
    let n1 = frame_normal(a1, a2);
    let n2 = vec3::scale(&frame_normal(b1, b2), la / lb);
    let q1 = exact_align_unnormalized(&n1, &n2, a1.as_array(), b1.as_array());
    let q2 = exact_align_unnormalized(&n1, &n2, a2.as_array(), b2.as_array());
    average_two_quats(&q1, &q2, w1, w2)
}

/// Optimal equal-weight two-point solution: aligns `a1 + a2` with the
/// direction of `b1 + b2` and `a1 − a2` with that of `b1 − b2`.
pub fn two_point_unweighted(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
) -> Result<WahbaSolution> {
    let (_, la, _, lb) = frame_norms(a1, a2, b1, b2);
    if !(la >= COLLINEAR_TOL && lb >= COLLINEAR_TOL) {
        return Err(Error::DegenerateFrame);
    }
    Ok(solution(
        unweighted_rotation(a1, a2, b1, b2),
        [(a1, b1, 1.0), (a2, b2, 1.0)],
        la.min(lb),
    ))
}

fn unweighted_rotation(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
) -> UnitQuaternion {
    let (a1v, a2v, b1v, b2v) = (a1.as_array(), a2.as_array(), b1.as_array(), b2.as_array());
    let s1 = vec3::add(a1v, a2v);
    let sb = vec3::add(b1v, b2v);
    let s2 = vec3::scale(&sb, vec3::norm(&s1) / vec3::norm(&sb));
    let d1 = vec3::sub(a1v, a2v);
    let db = vec3::sub(b1v, b2v);
    let d2 = vec3::scale(&db, vec3::norm(&d1) / vec3::norm(&db));
    let q = if vec3::norm(&s1) >= vec3::norm(&d1) {
        exact_align_unnormalized(&s1, &s2, &d1, &d2)
    } else {
        exact_align_unnormalized(&d1, &d2, &s1, &s2)
    };
    unit_canonical(q)
}

/// A minimizer for two pairs where one of the sets is (nearly) collinear.
///
/// The more collinear set (larger `|dot|`) is treated as exactly collinear.
/// If it is the target set, the weighted average `w1 a1 ± w2 a2` is rotated
/// onto `b1`; otherwise `a1` is rotated onto `w1 b1 ± w2 b2`. The sign follows
/// the dot product of the collinear set. A vanishing average leaves the loss
/// flat and the identity is returned.
pub fn degenerate_two_point(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
    w1: f64,
    w2: f64,
) -> UnitQuaternion {
    let da = vec3::dot(a1.as_array(), a2.as_array());
    let db = vec3::dot(b1.as_array(), b2.as_array());
    let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    if db.abs() >= da.abs() {
        let c = vec3::add(
            &vec3::scale(a1.as_array(), w1),
            &vec3::scale(a2.as_array(), sign(db) * w2),
        );
        match UnitVec3::from_array(c) {
            Ok(c) => one_point_align(&c, b1),
            Err(_) => UnitQuaternion::IDENTITY,
        }
    } else {
        let c = vec3::add(
            &vec3::scale(b1.as_array(), w1),
            &vec3::scale(b2.as_array(), sign(da) * w2),
        );
        match UnitVec3::from_array(c) {
            Ok(c) => one_point_align(a1, &c),
            Err(_) => UnitQuaternion::IDENTITY,
        }
    }
}

/// Two-point Wahba solution that falls back to [`degenerate_two_point`] when
/// either frame is collinear. Equal weights use [`two_point_unweighted`].
pub fn two_point_solve(
    a1: &UnitVec3,
    a2: &UnitVec3,
    b1: &UnitVec3,
    b2: &UnitVec3,
    w1: f64,
    w2: f64,
) -> WahbaSolution {
    let (_, la, _, lb) = frame_norms(a1, a2, b1, b2);
    let pairs = [(a1, b1, w1), (a2, b2, w2)];
    if !(la >= COLLINEAR_TOL && lb >= COLLINEAR_TOL) {
        let q = degenerate_two_point(a1, a2, b1, b2, w1, w2);
        return solution(q, pairs, la.min(lb));
    }
    let q = if w1 == w2 {
        unweighted_rotation(a1, a2, b1, b2)
    } else {
        weighted_rotation(a1, a2, b1, b2, w1, w2, la, lb)
    };
    solution(q, pairs, la.min(lb))
}
