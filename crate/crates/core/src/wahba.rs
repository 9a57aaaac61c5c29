//! Batch solvers for Wahba's problem.
//!
//! * [`solve_davenport`]: largest eigenvector of Davenport's K matrix.
//! * [`solve_gp`]: smallest eigenvector of a gain built from stereographic
//!   coordinates, followed by the frame fix.
//! * [`solve_gs`]: smallest eigenvector of a gain built directly from 3D pairs.
//! * [`solve_gm`]: least-squares Möbius transform projected onto SU(2).
//!   Approximate; it does not minimize the Wahba loss.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh_herm4, eigh_sym4, svd_c2, Cmat2, Herm4, Sym4};
use crate::projective::{stereo_plane, stereo_project, ProjectivePoint};
use crate::types::{
    canonicalize, frame_fix_raw, ObservationSet, UnitQuaternion, UnitVec3, MIN_WEIGHT,
};
use crate::vec3;

/// Determinant magnitude below which the Möbius estimate is rejected.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WahbaSolution {
    /// Canonicalized rotation estimate in the world frame.
    pub q: UnitQuaternion,
    /// Wahba loss at `q` as read off the spectrum: the smallest eigenvalue
    /// for the G_P and G_S gains, `2(Σw − λ_max)` for Davenport. For G_M this
    /// is the algebraic Möbius residual instead.
    pub residual: f64,
    /// Gap between the selected eigenvalue and its neighbour, divided by the
    /// largest eigenvalue magnitude. Zero means the solution is not unique.
    pub condition: f64,
}

/// One stereographic correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StereoEntry {
    /// Plane coordinates `z = x + yi`, `p = m + ni`.
    Plane {
        z: Complex64,
        p: Complex64,
        weight: f64,
    },
    /// General rays; either may be the point at infinity.
    Ray {
        z: ProjectivePoint,
        p: ProjectivePoint,
        weight: f64,
    },
}

impl StereoEntry {
    pub fn weight(&self) -> f64 {
        match *self {
            StereoEntry::Plane { weight, .. } | StereoEntry::Ray { weight, .. } => weight,
        }
    }

    /// Both points as rays.
    pub fn rays(&self) -> (ProjectivePoint, ProjectivePoint) {
        match *self {
            StereoEntry::Plane { z, p, .. } => (
                ProjectivePoint::from_plane(z),
                ProjectivePoint::from_plane(p),
            ),
            StereoEntry::Ray { z, p, .. } => (z, p),
        }
    }
}

/// Nonempty list of weighted stereographic correspondences.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoObservationSet {
    entries: Vec<StereoEntry>,
}

impl StereoObservationSet {
    pub fn new(entries: Vec<StereoEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyObservations);
        }
        for e in &entries {
            let w = e.weight();
            if !(w.is_finite() && w >= MIN_WEIGHT) {
                return Err(Error::InvalidWeight(w));
            }
            if let StereoEntry::Plane { z, p, .. } = e {
                if !(z.is_finite() && p.is_finite()) {
                    return Err(Error::ZeroVector);
                }
            }
        }
        Ok(Self { entries })
    }

    /// Projects every pair of `obs`. Points at the projection pole become
    /// ray entries; everything else uses plane coordinates.
    pub fn from_observations(obs: &ObservationSet) -> Self {
        let entries = obs
            .iter()
            .map(
                |o| match (stereo_plane(&o.reference), stereo_plane(&o.target)) {
                    (Some(z), Some(p)) => StereoEntry::Plane {
                        z,
                        p,
                        weight: o.weight,
                    },
                    _ => StereoEntry::Ray {
                        z: stereo_project(&o.reference),
                        p: stereo_project(&o.target),
                        weight: o.weight,
                    },
                },
            )
            .collect();
        Self { entries }
    }

    /// Same as [`from_observations`](Self::from_observations) but always
    /// stores general rays.
    pub fn rays_from_observations(obs: &ObservationSet) -> Self {
        let entries = obs
            .iter()
            .map(|o| StereoEntry::Ray {
                z: stereo_project(&o.reference),
                p: stereo_project(&o.target),
                weight: o.weight,
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[StereoEntry] {
        &self.entries
    }
}

fn gap_ratio(gap: f64, values: &[f64; 4]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        gap / scale
    } else {
        0.0
    }
}

fn sym_smallest(g: &Sym4) -> Result<([f64; 4], f64, f64)> {
    let e = eigh_sym4(g)?;
    let cond = gap_ratio(e.values[1] - e.values[0], &e.values);
    Ok((e.vectors[0], e.values[0], cond))
}

/// Davenport's q-method.
pub fn solve_davenport(obs: &ObservationSet) -> Result<WahbaSolution> {
    let mut b = [[0.0; 3]; 3];
    let mut z = [0.0; 3];
    let mut wsum = 0.0;
    for o in obs {
        let a = o.reference.as_array();
        let t = o.target.as_array();
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] += o.weight * t[i] * a[j];
            }
        }
        let c = vec3::cross(a, t);
        for i in 0..3 {
            z[i] += o.weight * c[i];
        }
        wsum += o.weight;
    }
    let tr = b[0][0] + b[1][1] + b[2][2];
    let mut k = [[0.0; 4]; 4];
    k[0][0] = tr;
    for i in 0..3 {
        k[0][i + 1] = z[i];
        for j in i..3 {
            k[i + 1][j + 1] = b[i][j] + b[j][i];
        }
        k[i + 1][i + 1] -= tr;
    }
    let e = eigh_sym4(&Sym4::from_upper(&k))?;
    let q = UnitQuaternion::from_array_canonical(e.vectors[3])?;
    Ok(WahbaSolution {
        q,
        residual: 2.0 * (wsum - e.values[3]),
        condition: gap_ratio(e.values[3] - e.values[2], &e.values),
    })
}

/// `√w′ · D` for plane coordinates `z`, `p`, with
/// `w′ = 4w / ((1 + |z|²)(1 + |p|²))`.
///
/// `D q = 0` exactly when the SU(2) matrix of `q` maps `z` onto `p`.
pub fn build_d_row(z: Complex64, p: Complex64, w: f64) -> [[f64; 4]; 2] {
    let (x, y) = (z.re, z.im);
    let (m, n) = (p.re, p.im);
    let wp = 4.0 * w / ((1.0 + x * x + y * y) * (1.0 + m * m + n * n));
    let s = wp.sqrt();
    [
        [
            s * (x - m),
            s * (-y - n),
            s * (1.0 + m * x - n * y),
            s * (m * y + n * x),
        ],
        [
            s * (y - n),
            s * (x + m),
            s * (m * y + n * x),
            s * (1.0 - m * x + n * y),
        ],
    ]
}

/// Ray version of [`build_d_row`]; handles points at infinity.
pub fn build_d_general(z: &ProjectivePoint, p: &ProjectivePoint, w: f64) -> [[f64; 4]; 2] {
    let (x1, y1, x2, y2) = (z.z1().re, z.z1().im, z.z2().re, z.z2().im);
    let (m1, n1, m2, n2) = (p.z1().re, p.z1().im, p.z2().re, p.z2().im);
    let wp = 4.0 * w / (z.norm_sqr() * p.norm_sqr());
    let s = wp.sqrt();
    let d0 = [
        m2 * x1 - m1 * x2 + n1 * y2 - n2 * y1,
        m2 * y1 - m1 * y2 + n2 * x1 - n1 * x2,
    ];
    let d1 = [
        -m2 * y1 - m1 * y2 - n2 * x1 - n1 * x2,
        m2 * x1 + m1 * x2 - n1 * y2 - n2 * y1,
    ];
    let d2 = [
        m1 * x1 + m2 * x2 - n1 * y1 - n2 * y2,
        m1 * y1 + m2 * y2 + n1 * x1 + n2 * x2,
    ];
    let d3 = [
        m1 * y1 - m2 * y2 + n1 * x1 - n2 * x2,
        m2 * x2 - m1 * x1 + n1 * y1 - n2 * y2,
    ];
    [
        [s * d0[0], s * d1[0], s * d2[0], s * d3[0]],
        [s * d0[1], s * d1[1], s * d2[1], s * d3[1]],
    ]
}

fn accumulate_rows(g: &mut [[f64; 4]; 4], rows: &[[f64; 4]]) {
    for r in rows {
        for i in 0..4 {
            for j in i..4 {
                g[i][j] += r[i] * r[j];
            }
        }
    }
}

/// `G_P = Σ w′ DᵢᵀDᵢ`.
pub fn build_gp(obs: &StereoObservationSet) -> Sym4 {
    let mut g = [[0.0; 4]; 4];
    for e in obs.entries() {
        let d = match *e {
            StereoEntry::Plane { z, p, weight } => build_d_row(z, p, weight),
            StereoEntry::Ray { z, p, weight } => build_d_general(&z, &p, weight),
        };
        accumulate_rows(&mut g, &d);
    }
    Sym4::from_upper(&g)
}

/// Stereographic eigenvector solver.
pub fn solve_gp(obs: &StereoObservationSet) -> Result<WahbaSolution> {
    let (v, lambda, condition) = sym_smallest(&build_gp(obs))?;
    let q = UnitQuaternion::from_array(canonicalize(frame_fix_raw(v)))?;
    Ok(WahbaSolution {
        q,
        residual: lambda,
        condition,
    })
}

/// `√w · Q` for a 3D pair; skew-symmetric, and `Q q = 0` exactly when `q`
/// rotates `a` onto `b`.
pub fn build_q(a: &UnitVec3, b: &UnitVec3, w: f64) -> [[f64; 4]; 4] {
    let a = a.as_array();
    let b = b.as_array();
    let s = vec3::add(a, b);
    let d = vec3::sub(a, b);
    let k = w.sqrt();
    [
        [0.0, k * d[0], k * d[1], k * d[2]],
        [-k * d[0], 0.0, -k * s[2], k * s[1]],
        [-k * d[1], k * s[2], 0.0, -k * s[0]],
        [-k * d[2], -k * s[1], k * s[0], 0.0],
    ]
}

/// `G_S = Σ wᵢ QᵢᵀQᵢ`.
pub fn build_gs(obs: &ObservationSet) -> Sym4 {
    let mut g = [[0.0; 4]; 4];
    for o in obs {
        accumulate_rows(&mut g, &build_q(&o.reference, &o.target, o.weight));
    }
    Sym4::from_upper(&g)
}

/// Sphere eigenvector solver; works in the world frame directly.
pub fn solve_gs(obs: &ObservationSet) -> Result<WahbaSolution> {
    let (v, lambda, condition) = sym_smallest(&build_gs(obs))?;
    let q = UnitQuaternion::from_array_canonical(v)?;
    Ok(WahbaSolution {
        q,
        residual: lambda,
        condition,
    })
}

/// Row `[−z₁p₂, −z₂p₂, p₁z₁, p₁z₂]` with `A′ · vec(M) = 0` when the Möbius
/// matrix `M = [[m₀, m₁], [m₂, m₃]]` maps ray `z` onto ray `p`. For plane
/// inputs this is `[−z, −1, pz, p]`.
pub fn build_aprime_row(z: &ProjectivePoint, p: &ProjectivePoint) -> [Complex64; 4] {
    let (z1, z2) = (z.z1(), z.z2());
    let (p1, p2) = (p.z1(), p.z2());
    [-z1 * p2, -z2 * p2, p1 * z1, p1 * z2]
}

fn aprime_plane(z: Complex64, p: Complex64) -> [Complex64; 4] {
    [-z, Complex64::new(-1.0, 0.0), p * z, p]
}

/// `G_M = Σ A′ᴴA′` (rows scaled by `√w`).
pub fn build_gm(obs: &StereoObservationSet) -> Herm4 {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for e in obs.entries() {
        let (row, w) = match *e {
            StereoEntry::Plane { z, p, weight } => (aprime_plane(z, p), weight),
            StereoEntry::Ray { z, p, weight } => (build_aprime_row(&z, &p), weight),
        };
        for i in 0..4 {
            let ci = row[i].conj() * w;
            for j in i..4 {
                g[i][j] += ci * row[j];
            }
        }
    }
    Herm4::from_upper(&g)
}

/// Projects a Möbius matrix onto SU(2): `M* = det(M)^(−1/2) M`, polar
/// factor `W = U Vᴴ` of `M*`, then `conj(√det W) · W` to remove the
/// residual phase. Returns the SU(2) matrix together with `M*` and `W`.
pub fn mobius_to_su2(m: &Cmat2) -> Result<(Cmat2, Cmat2, Cmat2)> {
    let d = m.det();
    if !(d.norm() >= SINGULAR_DET) {
        return Err(Error::SingularMobius(d.norm()));
    }
    let ms = m.scale(d.sqrt().inv());
    let w = svd_c2(&ms).polar_unitary();
    let q = w.scale(w.det().sqrt().conj());
    Ok((q, ms, w))
}

/// Möbius approximation.
pub fn solve_gm(obs: &StereoObservationSet) -> Result<WahbaSolution> {
    let e = eigh_herm4(&build_gm(obs))?;
    let m = Cmat2::from_vec(&e.vectors[0]);
    let (su, _, _) = mobius_to_su2(&m)?;
    let alpha = su.m[0][0];
    let beta = su.m[0][1];
    let raw = [alpha.re, alpha.im, beta.re, beta.im];
    let q = UnitQuaternion::from_array(canonicalize(frame_fix_raw(raw)))?;
    Ok(WahbaSolution {
        q,
        residual: e.values[0],
        condition: gap_ratio(e.values[1] - e.values[0], &e.values),
    })
}
