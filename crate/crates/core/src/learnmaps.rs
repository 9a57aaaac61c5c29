//! Differentiable maps from unconstrained network outputs to rotations.
//!
//! * 2-vec: six reals read as predicted x and y axes, mapped to the rotation
//!   that balances the error of both axes.
//! * QuadMobius: sixteen reals arranged as a Hermitian 4x4 whose smallest
//!   eigenvector is read as a Möbius matrix and projected onto SU(2), either
//!   through its polar factor (`Svd`) or algebraically (`Alg`).
//!
//! Every forward has a `*_cached` form returning the intermediates that the
//! matching backward reuses. Backward passes return gradients with respect to
//! the raw inputs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh_herm4, svd_c2, Cmat2, Herm4};
use crate::types::{canonicalize, frame_fix_raw, RotationMatrix, UnitQuaternion};
use crate::vec3::{add, cross, dot, norm, scale, sub, Vec3};

/// Minimum norm of a predicted axis.
pub const AXIS_EPS: f64 = 1e-12;
/// Minimum relative gap between the two smallest eigenvalues in the forward pass.
pub const FORWARD_GAP: f64 = 1e-10;
/// Minimum relative gap required by the backward pass.
pub const BACKWARD_GAP: f64 = 1e-8;
/// Minimum `|det M|` of the unit-norm Möbius eigenvector.
pub const DET_EPS: f64 = 1e-12;
/// Minimum `|α̃|² + |β̃|²` for the algebraic projection.
pub const ALG_EPS: f64 = 1e-12;
/// Spectral gaps below this are dropped from the eigenvector pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Six reals `(b_x, b_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixVec {
    bx: Vec3,
    by: Vec3,
}

impl SixVec {
    /// Fails with [`Error::DegenerateAxes`] if either axis is shorter than
    /// [`AXIS_EPS`], non-finite, or the two are parallel.
    pub fn new(v: [f64; 6]) -> Result<Self> {
        let bx = [v[0], v[1], v[2]];
        let by = [v[3], v[4], v[5]];
        let (nx, ny) = (norm(&bx), norm(&by));
        if !(nx.is_finite() && ny.is_finite() && nx > AXIS_EPS && ny > AXIS_EPS) {
            return Err(Error::DegenerateAxes);
        }
        if !(norm(&cross(&bx, &by)) > AXIS_EPS * nx * ny) {
            return Err(Error::DegenerateAxes);
        }
        Ok(Self { bx, by })
    }

    pub fn bx(&self) -> &Vec3 {
        &self.bx
    }
    pub fn by(&self) -> &Vec3 {
        &self.by
    }

    pub fn to_array(&self) -> [f64; 6] {
        let (x, y) = (self.bx, self.by);
        [x[0], x[1], x[2], y[0], y[1], y[2]]
    }
}

/// Gradient with respect to the `N` raw inputs, together with the forward
/// cache it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientRecord<const N: usize, C> {
    pub gradient: [f64; N],
    pub cache: C,
}

/// Intermediates of [`twovec_forward_cached`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoVecCache {
    v: SixVec,
    ratio: f64,
    sum: Vec3,
    diff: Vec3,
    plus: Vec3,
    minus: Vec3,
    r: RotationMatrix,
}

impl TwoVecCache {
    pub fn rotation(&self) -> &RotationMatrix {
        &self.r
    }

    pub fn input(&self) -> &SixVec {
        &self.v
    }

    /// Pulls `dL/dR` (row-major, `g[i][j] = ∂L/∂R_ij`) back to the six inputs.
    pub fn backward(&self, g: &[[f64; 3]; 3]) -> GradientRecord<6, Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let col = |j: usize| [g[0][j], g[1][j], g[2][j]];
        let (g0, g1, g2) = (col(0), col(1), col(2));
        // R = [(b⁺ + b⁻)/√2, (b⁺ − b⁻)/√2, b⁻ × b⁺]
        let mut g_plus = scale(&add(&g0, &g1), h);
        let mut g_minus = scale(&sub(&g0, &g1), h);
        g_plus = add(&g_plus, &cross(&g2, &self.minus));
        g_minus = add(&g_minus, &cross(&self.plus, &g2));

        let g_sum = normalize_pullback(&self.plus, norm(&self.sum), &g_plus);
        let g_diff = normalize_pullback(&self.minus, norm(&self.diff), &g_minus);
        let mut g_bx = add(&g_sum, &g_diff);
        let g_byp = sub(&g_sum, &g_diff);

        // b'_y = (‖b_x‖ / ‖b_y‖) b_y
        let (bx, by) = (&self.v.bx, &self.v.by);
        let (nx, ny) = (norm(bx), norm(by));
        let c = dot(&g_byp, by);
        g_bx = add(&g_bx, &scale(bx, c / (nx * ny)));
        let g_by = sub(
            &scale(&g_byp, self.ratio),
            &scale(by, c * nx / (ny * ny * ny)),
        );

        GradientRecord {
            gradient: [g_bx[0], g_bx[1], g_bx[2], g_by[0], g_by[1], g_by[2]],
            cache: *self,
        }
    }
}

/// `∂(x/‖x‖)ᵀ g` given `u = x/‖x‖`.
fn normalize_pullback(u: &Vec3, n: f64, g: &Vec3) -> Vec3 {
    scale(&sub(g, &scale(u, dot(u, g))), 1.0 / n)
}

pub fn twovec_forward_cached(v: &SixVec) -> Result<TwoVecCache> {
    let (bx, by) = (&v.bx, &v.by);
    let ratio = norm(bx) / norm(by);
    let byp = scale(by, ratio);
    let sum = add(bx, &byp);
    let diff = sub(bx, &byp);
    let (ns, nd) = (norm(&sum), norm(&diff));
    let floor = AXIS_EPS * norm(bx);
    if !(ns > floor && nd > floor) {
        return Err(Error::DegenerateAxes);
    }
    let plus = scale(&sum, 1.0 / ns);
    let minus = scale(&diff, 1.0 / nd);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = RotationMatrix::from_columns(
        &scale(&add(&plus, &minus), h),
        &scale(&sub(&plus, &minus), h),
        &cross(&minus, &plus),
    );
    Ok(TwoVecCache {
        v: *v,
        ratio,
        sum,
        diff,
        plus,
        minus,
        r,
    })
}

/// 2-vec map. Scale-invariant in each axis; returns `[b_x, b_y, b_x × b_y]`
/// when the axes are already orthonormal.
pub fn twovec_forward(v: &SixVec) -> Result<RotationMatrix> {
    twovec_forward_cached(v).map(|c| c.r)
}

pub fn twovec_backward(v: &SixVec, dl_dr: &[[f64; 3]; 3]) -> Result<[f64; 6]> {
    Ok(twovec_forward_cached(v)?.backward(dl_dr).gradient)
}

/// Sixteen reals laid out over the upper triangle of a Hermitian 4x4, row by
/// row: each diagonal entry takes one real, each off-diagonal entry a
/// (real, imaginary) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta16(pub [f64; 16]);

/// `(i, j, k)`: entry `G_ij` (i ≤ j) starts at `θ[k]`.
const LAYOUT: [(usize, usize, usize); 10] = [
    (0, 0, 0),
    (0, 1, 1),
    (0, 2, 3),
    (0, 3, 5),
    (1, 1, 7),
    (1, 2, 8),
    (1, 3, 10),
    (2, 2, 12),
    (2, 3, 13),
    (3, 3, 15),
];

pub fn quadmobius_assemble(theta: &Theta16) -> Herm4 {
    let t = &theta.0;
    let mut a = [[ZERO; 4]; 4];
    for &(i, j, k) in &LAYOUT {
        a[i][j] = if i == j {
            Complex64::new(t[k], 0.0)
        } else {
            Complex64::new(t[k], t[k + 1])
        };
    }
    Herm4::from_upper(&a)
}

/// Inverse of [`quadmobius_assemble`]: reads the upper triangle back.
pub fn quadmobius_extract(g: &Herm4) -> Theta16 {
    let mut t = [0.0; 16];
    for &(i, j, k) in &LAYOUT {
        let z = g.get(i, j);
        t[k] = z.re;
        if i != j {
            t[k + 1] = z.im;
        }
    }
    Theta16(t)
}

/// Projection from the Möbius matrix onto SU(2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadMobiusVariant {
    /// `α̃ = σ* + conj δ*`, `β̃ = ξ* − conj γ*` on `M* = M / √det M`, normalized.
    Alg,
    /// Polar factor `W = U Vᴴ` of `M`, then `Q = conj(√det W) W`.
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Projection {
    Alg {
        /// `det(M)^(−1/2)`.
        s: Complex64,
        /// `(Re α̃, Im α̃, Re β̃, Im β̃)` before normalization.
        raw: [f64; 4],
    },
    Svd {
        u: Cmat2,
        sigma: [f64; 2],
        vh: Cmat2,
        w: Cmat2,
        /// `√det W`.
        root: Complex64,
    },
}

/// Intermediates of [`quadmobius_forward_cached`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadMobiusCache {
    variant: QuadMobiusVariant,
    values: [f64; 4],
    vectors: [[Complex64; 4]; 4],
    m: Cmat2,
    proj: Projection,
    /// Sign applied by canonicalization.
    sign: f64,
    /// Relative gap `(λ₂ − λ₁) / ‖G‖_F`.
    gap: f64,
    q: UnitQuaternion,
}

impl QuadMobiusCache {
    pub fn quaternion(&self) -> &UnitQuaternion {
        &self.q
    }

    pub fn variant(&self) -> QuadMobiusVariant {
        self.variant
    }

    /// Möbius matrix from the unit smallest eigenvector.
    pub fn mobius(&self) -> &Cmat2 {
        &self.m
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap
    }

    pub fn eigenvalues(&self) -> &[f64; 4] {
        &self.values
    }

    /// Pulls `dL/dq` back to the sixteen raw inputs. Fails with
    /// [`Error::EigGapTooSmall`] when the relative gap is below [`BACKWARD_GAP`].
    pub fn backward(&self, dl_dq: &[f64; 4]) -> Result<GradientRecord<16, Self>> {
        if !(self.gap > BACKWARD_GAP) {
            return Err(Error::EigGapTooSmall(self.gap));
        }
        // canonical sign, then the frame permutation (w, −z, y, x)
        let g = dl_dq.map(|x| x * self.sign);
        let g_raw = [g[0], g[3], g[2], -g[1]];
        let g_alpha = Complex64::new(g_raw[0], g_raw[1]);
        let g_beta = Complex64::new(g_raw[2], g_raw[3]);

        let g_m = match self.proj {
            Projection::Alg { s, raw } => {
                let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                let u = raw.map(|x| x / n);
                let ug: f64 = u.iter().zip(&g_raw).map(|(a, b)| a * b).sum();
                let gt: [f64; 4] = std::array::from_fn(|k| (g_raw[k] - u[k] * ug) / n);
                let ga = Complex64::new(gt[0], gt[1]);
                let gb = Complex64::new(gt[2], gt[3]);
                let g_ms = Cmat2::new(ga, gb, -gb.conj(), ga.conj());
                det_scale_pullback(&self.m, s, &g_ms)
            }
            Projection::Svd {
                u,
                sigma,
                vh,
                w,
                root,
            } => {
                let g_q = Cmat2::new(g_alpha, g_beta, ZERO, ZERO);
                let g_w = phase_fix_pullback(&w, root, &g_q);
                polar_pullback(&u, &sigma, &vh, &g_w)
            }
        };

        let g_v = g_m.to_vec();
        let v1 = &self.vectors[0];
        let mut h = [ZERO; 4];
        for k in 1..4 {
            let gap = self.values[0] - self.values[k];
            if gap.abs() < PINV_CUTOFF {
                continue;
            }
            let vk = &self.vectors[k];
            let c: Complex64 = (0..4).map(|i| vk[i].conj() * g_v[i]).sum::<Complex64>() / gap;
            for i in 0..4 {
                h[i] += vk[i] * c;
            }
        }
        // dL/dG = h v₁ᴴ, folded onto the Hermitian layout
        let mut t = [0.0; 16];
        for &(i, j, k) in &LAYOUT {
            let gij = h[i] * v1[j].conj();
            if i == j {
                t[k] = gij.re;
            } else {
                let gji = h[j] * v1[i].conj();
                t[k] = gij.re + gji.re;
                t[k + 1] = gij.im - gji.im;
            }
        }
        Ok(GradientRecord {
            gradient: t,
            cache: *self,
        })
    }
}

/// Pullback of `Ms = s M` with `s = det(M)^(−1/2)`.
fn det_scale_pullback(m: &Cmat2, s: Complex64, g_ms: &Cmat2) -> Cmat2 {
    let d = m.det();
    let inner: Complex64 = frob_inner(g_ms, m);
    let c = inner * (-0.5 * s / d);
    let cof = cofactor(m);
    let mut out = g_ms.scale(s.conj());
    for i in 0..2 {
        for j in 0..2 {
            out.m[i][j] += (c * cof.m[i][j]).conj();
        }
    }
    out
}

/// Pullback of `Q = conj(√det W) W`.
fn phase_fix_pullback(w: &Cmat2, root: Complex64, g_q: &Cmat2) -> Cmat2 {
    let c = frob_inner(g_q, w);
    let cof = cofactor(w);
    let mut out = g_q.scale(root);
    for i in 0..2 {
        for j in 0..2 {
            out.m[i][j] += c * cof.m[i][j].conj() / (2.0 * root.conj());
        }
    }
    out
}

/// Pullback of the polar factor `W = U Vᴴ` of `M = U Σ Vᴴ`:
/// `U (Z − Zᴴ) Vᴴ` with `Z = (Uᴴ g V) ⊘ (σⱼ + σₖ)`.
fn polar_pullback(u: &Cmat2, sigma: &[f64; 2], vh: &Cmat2, g_w: &Cmat2) -> Cmat2 {
    let y = u.adjoint() * *g_w * vh.adjoint();
    let mut z = y;
    for j in 0..2 {
        for k in 0..2 {
            z.m[j][k] = y.m[j][k] / (sigma[j] + sigma[k]);
        }
    }
    *u * (z - z.adjoint()) * *vh
}

/// `Σ conj(aᵢⱼ) bᵢⱼ`.
fn frob_inner(a: &Cmat2, b: &Cmat2) -> Complex64 {
    let mut s = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            s += a.m[i][j].conj() * b.m[i][j];
        }
    }
    s
}

/// `∂ det M / ∂ M`.
fn cofactor(m: &Cmat2) -> Cmat2 {
    let a = &m.m;
    Cmat2::new(a[1][1], -a[1][0], -a[0][1], a[0][0])
}

pub fn quadmobius_forward_cached(
    theta: &Theta16,
    variant: QuadMobiusVariant,
) -> Result<QuadMobiusCache> {
    let g = quadmobius_assemble(theta);
    let e = eigh_herm4(&g)?;
    let fro = g.frobenius_norm();
    let gap = if fro > 0.0 {
        (e.values[1] - e.values[0]) / fro
    } else {
        0.0
    };
    if !(gap > FORWARD_GAP) {
        return Err(Error::EigGapTooSmall(gap));
    }
    let m = Cmat2::from_vec(&e.vectors[0]);
    let d = m.det();
    if !(d.norm() > DET_EPS) {
        return Err(Error::SingularMobius(d.norm()));
    }
    let (raw, proj) = match variant {
        QuadMobiusVariant::Alg => {
            let s = d.sqrt().inv();
            let ms = m.scale(s);
            let a = ms.m[0][0] + ms.m[1][1].conj();
            let b = ms.m[0][1] - ms.m[1][0].conj();
            let n2 = a.norm_sqr() + b.norm_sqr();
            if !(n2 > ALG_EPS) {
                return Err(Error::DegenerateAlgebraic(n2));
            }
            let raw = [a.re, a.im, b.re, b.im];
            let n = n2.sqrt();
            (raw.map(|x| x / n), Projection::Alg { s, raw })
        }
        QuadMobiusVariant::Svd => {
            let svd = svd_c2(&m);
            let w = svd.polar_unitary();
            let root = w.det().sqrt();
            let q = w.scale(root.conj());
            let raw = [q.m[0][0].re, q.m[0][0].im, q.m[0][1].re, q.m[0][1].im];
            (
                raw,
                Projection::Svd {
                    u: svd.u,
                    sigma: svd.sigma,
                    vh: svd.vh,
                    w,
                    root,
                },
            )
        }
    };
    let fixed = frame_fix_raw(raw);
    let canon = canonicalize(fixed);
    let sign = if canon == fixed { 1.0 } else { -1.0 };
    let q = UnitQuaternion::from_array(canon)?;
    Ok(QuadMobiusCache {
        variant,
        values: e.values,
        vectors: e.vectors,
        m,
        proj,
        sign,
        gap,
        q,
    })
}

/// QuadMobius map from sixteen reals to a canonical unit quaternion.
pub fn quadmobius_forward(theta: &Theta16, variant: QuadMobiusVariant) -> Result<UnitQuaternion> {
    quadmobius_forward_cached(theta, variant).map(|c| c.q)
}

/// Gradient of the loss with respect to `θ`, given `dL/dq` at the canonical
/// output quaternion.
pub fn quadmobius_backward(
    theta: &Theta16,
    dl_dq: &[f64; 4],
    variant: QuadMobiusVariant,
) -> Result<[f64; 16]> {
    Ok(quadmobius_forward_cached(theta, variant)?
        .backward(dl_dq)?
        .gradient)
}
