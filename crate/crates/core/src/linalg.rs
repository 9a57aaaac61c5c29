//! Fixed-size dense linear algebra: Jacobi eigensolvers for 4x4 symmetric and
//! Hermitian matrices, and a closed-form 2x2 complex SVD.
//!
//! Eigenvalues are returned in ascending order. Each eigenvector is
//! normalized so that its largest-magnitude entry is real and positive (first
//! index wins on exact ties), which makes results reproducible bit-for-bit.
//! When the smallest eigenvalues are (nearly) degenerate the returned vector
//! is an arbitrary unit vector of that eigenspace.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Convergence tolerance on the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
pub const JACOBI_TOL: f64 = 1e-13;
/// Sweep limit of the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 50;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 4x4 real symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym4 {
    m: [[f64; 4]; 4],
}

impl Sym4 {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0; 4])
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = d[i];
        }
        Self { m }
    }

    /// Builds the matrix from the upper triangle (diagonal included) of `a`;
    /// the strict lower triangle of `a` is ignored.
    pub fn from_upper(a: &[[f64; 4]; 4]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                m[i][j] = a[i][j];
                m[j][i] = a[i][j];
            }
        }
        Self { m }
    }

    /// Adds `v` to entry (i, j) and its mirror.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] += v;
        if i != j {
            self.m[j][i] += v;
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn as_array(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|x| *x *= s);
        Self { m }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64; 4]) -> f64 {
        let av = self.mul_vec(v);
        av.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// 4x4 complex Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm4 {
    m: [[Complex64; 4]; 4],
}

impl Default for Herm4 {
    fn default() -> Self {
        Self { m: [[ZERO; 4]; 4] }
    }
}

impl Herm4 {
    pub fn zeros() -> Self {
        Self::default()
    }

    /// Builds the matrix from the upper triangle of `a`. Imaginary parts of
    /// the diagonal are dropped and the lower triangle is the conjugate mirror.
    pub fn from_upper(a: &[[Complex64; 4]; 4]) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            m[i][i] = Complex64::new(a[i][i].re, 0.0);
            for j in i + 1..4 {
                m[i][j] = a[i][j];
                m[j][i] = a[i][j].conj();
            }
        }
        Self { m }
    }

    /// Real symmetric matrix viewed as Hermitian.
    pub fn from_real(a: &Sym4) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = Complex64::new(a.get(i, j), 0.0);
            }
        }
        Self { m }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn as_array(&self) -> &[[Complex64; 4]; 4] {
        &self.m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|x| *x *= s);
        Self { m }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cmat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Cmat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub const fn zeros() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn from_real(a: [[f64; 2]; 2]) -> Self {
        Self::new(
            a[0][0].into(),
            a[0][1].into(),
            a[1][0].into(),
            a[1][1].into(),
        )
    }

    pub fn from_diag(d0: Complex64, d1: Complex64) -> Self {
        Self::new(d0, ZERO, ZERO, d1)
    }

    /// Row-major flattening `[m00, m01, m10, m11]`.
    pub fn to_vec(&self) -> [Complex64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_vec(v: &[Complex64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖A Aᴴ − I‖_max`, zero for unitary matrices.
    pub fn unitarity_residual(&self) -> f64 {
        (*self * self.adjoint()).max_abs_diff(&Self::identity())
    }
}

impl Mul for Cmat2 {
    type Output = Cmat2;

    fn mul(self, rhs: Cmat2) -> Cmat2 {
        let a = &self.m;
        let b = &rhs.m;
        Cmat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Cmat2 {
    type Output = Cmat2;

    fn add(self, rhs: Cmat2) -> Cmat2 {
        let a = self.to_vec();
        let b = rhs.to_vec();
        Cmat2::new(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
    }
}

impl Sub for Cmat2 {
    type Output = Cmat2;

    fn sub(self, rhs: Cmat2) -> Cmat2 {
        let a = self.to_vec();
        let b = rhs.to_vec();
        Cmat2::new(a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3])
    }
}

/// Eigendecomposition of a [`Sym4`]; `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 4],
    pub vectors: [[f64; 4]; 4],
    /// Completed Jacobi sweeps.
    pub sweeps: usize,
}

/// Eigendecomposition of a [`Herm4`]; `vectors[k]` belongs to `values[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermEigen {
    pub values: [f64; 4],
    pub vectors: [[Complex64; 4]; 4],
    /// Completed Jacobi sweeps.
    pub sweeps: usize,
}

/// `M = U · diag(sigma) · Vh`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2 {
    pub u: Cmat2,
    pub sigma: [f64; 2],
    pub vh: Cmat2,
}

impl Svd2 {
    pub fn reconstruct(&self) -> Cmat2 {
        let s = Cmat2::from_diag(self.sigma[0].into(), self.sigma[1].into());
        self.u * s * self.vh
    }

    /// Unitary polar factor `U Vᴴ`, the nearest unitary matrix in Frobenius norm.
    pub fn polar_unitary(&self) -> Cmat2 {
        self.u * self.vh
    }
}

fn sorted_order(values: &[f64; 4]) -> [usize; 4] {
    let mut idx = [0, 1, 2, 3];
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

fn argmax_magnitude(mags: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (i, m) in mags.enumerate() {
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    best
}

/// Jacobi rotation `(c, s)` annihilating `g` in `[[app, g], [g, aqq]]`.
#[inline]
fn jacobi_angle(app: f64, aqq: f64, g: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

/// Eigendecomposition of a real symmetric 4x4 matrix by cyclic Jacobi with a
/// threshold strategy.
pub fn eigh_sym4(a: &Sym4) -> Result<SymEigen> {
    let mut m = a.m;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::NonConvergence {
            sweeps: 0,
            off_norm: f64::NAN,
        });
    }

    let off_norm = |m: &[[f64; 4]; 4]| {
        let mut s = 0.0;
        for p in 0..3 {
            for q in p + 1..4 {
                s += m[p][q] * m[p][q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_norm(&m);
        if off <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        let thresh = if sweeps < 3 {
            let sum_abs: f64 = (0..3)
                .flat_map(|p| (p + 1..4).map(move |q| (p, q)))
                .map(|(p, q)| m[p][q].abs())
                .sum();
            0.2 * sum_abs / 16.0
        } else {
            0.0
        };
        for p in 0..3 {
            for q in p + 1..4 {
                let apq = m[p][q];
                let g = 100.0 * apq.abs();
                if sweeps > 3
                    && m[p][p].abs() + g == m[p][p].abs()
                    && m[q][q].abs() + g == m[q][q].abs()
                {
                    m[p][q] = 0.0;
                    m[q][p] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let (c, s) = jacobi_angle(m[p][p], m[q][q], apq);
                for row in m.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * apk - s * aqk;
                    m[q][k] = s * apk + c * aqk;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }
    if !converged {
        let off = off_norm(&m);
        if off > JACOBI_TOL * scale {
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off,
            });
        }
    }

    let diag = [m[0][0], m[1][1], m[2][2], m[3][3]];
    let order = sorted_order(&diag);
    let mut values = [0.0; 4];
    let mut vectors = [[0.0; 4]; 4];
    for (k, &j) in order.iter().enumerate() {
        values[k] = diag[j];
        let mut vec = [v[0][j], v[1][j], v[2][j], v[3][j]];
        let lead = argmax_magnitude(vec.iter().map(|x| x.abs()));
        if vec[lead] < 0.0 {
            vec.iter_mut().for_each(|x| *x = -*x);
        }
        vectors[k] = vec;
    }
    Ok(SymEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Eigendecomposition of a complex Hermitian 4x4 matrix by cyclic complex
/// Jacobi. Each rotation first removes the phase of the pivot and then applies
/// a real Jacobi rotation.
pub fn eigh_herm4(a: &Herm4) -> Result<HermEigen> {
    let mut m = a.m;
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::NonConvergence {
            sweeps: 0,
            off_norm: f64::NAN,
        });
    }

    let off_norm = |m: &[[Complex64; 4]; 4]| {
        let mut s = 0.0;
        for p in 0..3 {
            for q in p + 1..4 {
                s += m[p][q].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_norm(&m);
        if off <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        let thresh = if sweeps < 3 {
            let sum_abs: f64 = (0..3)
                .flat_map(|p| (p + 1..4).map(move |q| (p, q)))
                .map(|(p, q)| m[p][q].norm())
                .sum();
            0.2 * sum_abs / 16.0
        } else {
            0.0
        };
        for p in 0..3 {
            for q in p + 1..4 {
                let apq = m[p][q];
                let g = apq.norm();
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                if sweeps > 3
                    && app.abs() + 100.0 * g == app.abs()
                    && aqq.abs() + 100.0 * g == aqq.abs()
                {
                    m[p][q] = ZERO;
                    m[q][p] = ZERO;
                    continue;
                }
                if g <= thresh || g == 0.0 {
                    continue;
                }
                // W = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let phase = (apq / g).conj();
                let (c, s) = jacobi_angle(app, aqq, g);
                let w_pp = Complex64::new(c, 0.0);
                let w_pq = Complex64::new(s, 0.0);
                let w_qp = phase * -s;
                let w_qq = phase * c;
                for row in m.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = akp * w_pp + akq * w_qp;
                    row[q] = akp * w_pq + akq * w_qq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (m[p][k], m[q][k]);
                    m[p][k] = w_pp.conj() * apk + w_qp.conj() * aqk;
                    m[q][k] = w_pq.conj() * apk + w_qq.conj() * aqk;
                }
                m[p][q] = ZERO;
                m[q][p] = ZERO;
                m[p][p].im = 0.0;
                m[q][q].im = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = vkp * w_pp + vkq * w_qp;
                    row[q] = vkp * w_pq + vkq * w_qq;
                }
            }
        }
        sweeps += 1;
    }
    if !converged {
        let off = off_norm(&m);
        if off > JACOBI_TOL * scale {
            return Err(Error::NonConvergence {
                sweeps,
                off_norm: off,
            });
        }
    }

    let diag = [m[0][0].re, m[1][1].re, m[2][2].re, m[3][3].re];
    let order = sorted_order(&diag);
    let mut values = [0.0; 4];
    let mut vectors = [[ZERO; 4]; 4];
    for (k, &j) in order.iter().enumerate() {
        values[k] = diag[j];
        let mut vec = [v[0][j], v[1][j], v[2][j], v[3][j]];
        let lead = argmax_magnitude(vec.iter().map(|x| x.norm()));
        let mag = vec[lead].norm();
        if mag > 0.0 {
            let rot = vec[lead].conj() / mag;
            vec.iter_mut().for_each(|x| *x *= rot);
            vec[lead] = Complex64::new(vec[lead].re, 0.0);
        }
        vectors[k] = vec;
    }
    Ok(HermEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Closed-form SVD of a 2x2 complex matrix.
///
/// `V` comes from the Hermitian eigenproblem of `MᴴM`; the left vectors are
/// `u₁ = M v₁ / ‖M v₁‖` and `u₂ ⟂ u₁`, with the phase of `u₂` chosen so the
/// second singular value is real and nonnegative.
pub fn svd_c2(m: &Cmat2) -> Svd2 {
    let a = &m.m;
    let h00 = a[0][0].norm_sqr() + a[1][0].norm_sqr();
    let h11 = a[0][1].norm_sqr() + a[1][1].norm_sqr();
    let h01 = a[0][0].conj() * a[0][1] + a[1][0].conj() * a[1][1];
    let g = h01.norm();
    let phase = if g > 0.0 { (h01 / g).conj() } else { ONE };
    let theta = 0.5 * (2.0 * g).atan2(h00 - h11);
    let (sn, cs) = theta.sin_cos();
    let mut v1 = [Complex64::new(cs, 0.0), phase * sn];
    let mut v2 = [Complex64::new(-sn, 0.0), phase * cs];

    let mut mv1 = m.mul_vec(&v1);
    let mut s1 = (mv1[0].norm_sqr() + mv1[1].norm_sqr()).sqrt();
    let mut mv2 = m.mul_vec(&v2);
    let s2_guess = (mv2[0].norm_sqr() + mv2[1].norm_sqr()).sqrt();
    if s2_guess > s1 {
        std::mem::swap(&mut v1, &mut v2);
        std::mem::swap(&mut mv1, &mut mv2);
        s1 = s2_guess;
    }
    if s1 == 0.0 {
        return Svd2 {
            u: Cmat2::identity(),
            sigma: [0.0, 0.0],
            vh: Cmat2::identity(),
        };
    }
    let u1 = [mv1[0] / s1, mv1[1] / s1];
    let u2p = [-u1[1].conj(), u1[0].conj()];
    let c = u2p[0].conj() * mv2[0] + u2p[1].conj() * mv2[1];
    let s2 = c.norm();
    let u2 = if s2 > 0.0 {
        let ph = c / s2;
        [u2p[0] * ph, u2p[1] * ph]
    } else {
        u2p
    };
    let u = Cmat2::new(u1[0], u2[0], u1[1], u2[1]);
    let vmat = Cmat2::new(v1[0], v2[0], v1[1], v2[1]);
    Svd2 {
        u,
        sigma: [s1, s2],
        vh: vmat.adjoint(),
    }
}
