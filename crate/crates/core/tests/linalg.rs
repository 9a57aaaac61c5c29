#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use su2wahba::{eigh_herm4, eigh_sym4, svd_c2, Cmat2, Herm4, Sym4};

fn sym() -> impl Strategy<Value = Sym4> {
    prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0)).prop_map(|a| Sym4::from_upper(&a))
}

fn herm() -> impl Strategy<Value = Herm4> {
    prop::array::uniform4(prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))).prop_map(|a| {
        let m = a.map(|row| row.map(|(re, im)| Complex64::new(re, im)));
        Herm4::from_upper(&m)
    })
}

fn cmat2() -> impl Strategy<Value = Cmat2> {
    prop::array::uniform8(-2.0f64..2.0).prop_map(|a| {
        Cmat2::new(
            Complex64::new(a[0], a[1]),
            Complex64::new(a[2], a[3]),
            Complex64::new(a[4], a[5]),
            Complex64::new(a[6], a[7]),
        )
    })
}

fn cdot(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
    (0..4).map(|i| a[i].conj() * b[i]).sum()
}

proptest! {
    #[test]
    fn sym_eigenpairs(a in sym()) {
        let e = eigh_sym4(&a).unwrap();
        let scale = a.frobenius_norm().max(1e-300);
        for k in 0..4 {
            let av = a.mul_vec(&e.vectors[k]);
            for i in 0..4 {
                prop_assert!((av[i] - e.values[k] * e.vectors[k][i]).abs() < 1e-10 * scale);
            }
            for l in 0..4 {
                let d: f64 = (0..4).map(|i| e.vectors[k][i] * e.vectors[l][i]).sum();
                let want = if k == l { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() < 1e-12);
            }
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        // V Λ Vᵀ reconstructs A
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = (0..4).map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j]).sum();
                prop_assert!((r - a.get(i, j)).abs() < 1e-10 * scale);
            }
        }
        prop_assert_eq!(eigh_sym4(&a).unwrap(), e);
    }

    #[test]
    fn herm_eigenpairs(a in herm()) {
        let e = eigh_herm4(&a).unwrap();
        let scale = a.frobenius_norm();
        for k in 0..4 {
            let av = a.mul_vec(&e.vectors[k]);
            for i in 0..4 {
                prop_assert!((av[i] - e.vectors[k][i] * e.values[k]).norm() < 1e-10 * scale);
            }
            for l in 0..4 {
                let d = cdot(&e.vectors[k], &e.vectors[l]);
                let want = if k == l { 1.0 } else { 0.0 };
                prop_assert!((d - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
            let big = e.vectors[k].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = e.vectors[k].iter().find(|z| z.norm() == big).unwrap();
            prop_assert!(lead.im == 0.0 && lead.re > 0.0);
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn herm_agrees_with_sym_on_real_input(a in sym()) {
        let s = eigh_sym4(&a).unwrap();
        let h = eigh_herm4(&Herm4::from_real(&a)).unwrap();
        for k in 0..4 {
            prop_assert!((s.values[k] - h.values[k]).abs() < 1e-12);
        }
        // compare eigenvectors of well-separated eigenvalues up to phase
        for k in 0..4 {
            let sep = (0..4).filter(|&l| l != k).map(|l| (s.values[k] - s.values[l]).abs()).fold(f64::INFINITY, f64::min);
            if sep < 1e-3 {
                continue;
            }
            let real = s.vectors[k].map(|x| Complex64::new(x, 0.0));
            prop_assert!((cdot(&real, &h.vectors[k]).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gram_matrices_are_psd(rows in prop::collection::vec(prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0)), 1..8)) {
        let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
        for r in &rows {
            let r = r.map(|(re, im)| Complex64::new(re, im));
            for i in 0..4 {
                for j in i..4 {
                    g[i][j] += r[i].conj() * r[j];
                }
            }
        }
        let e = eigh_herm4(&Herm4::from_upper(&g)).unwrap();
        prop_assert!(e.values[0] >= -1e-12);
    }

    #[test]
    fn rank_one_complement(m in prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))) {
        let m = m.map(|(re, im)| Complex64::new(re, im));
        let n = cdot(&m, &m).re.sqrt();
        prop_assume!(n > 1e-2);
        let m = m.map(|z| z / n);
        let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let d = if i == j { 1.0 } else { 0.0 };
                a[i][j] = Complex64::new(d, 0.0) - m[i] * m[j].conj();
            }
        }
        let e = eigh_herm4(&Herm4::from_upper(&a)).unwrap();
        prop_assert!((cdot(&m, &e.vectors[0]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs(m in cmat2()) {
        let s = svd_c2(&m);
        let scale = m.frobenius_norm();
        prop_assert!(s.reconstruct().max_abs_diff(&m) < 1e-12 * scale.max(1.0));
        prop_assert!(s.u.unitarity_residual() < 1e-12);
        prop_assert!(s.vh.unitarity_residual() < 1e-12);
        prop_assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= 0.0);
    }

    #[test]
    fn nearest_unitary_of_unit_det_is_special(m in cmat2()) {
        let d = m.det();
        prop_assume!(d.norm() > 1e-6);
        let ms = m.scale(d.sqrt().inv());
        let w = svd_c2(&ms).polar_unitary();
        prop_assert!((w.det() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn svd_examples() {
    let s = svd_c2(&Cmat2::identity());
    assert_eq!(s.sigma, [1.0, 1.0]);
    assert!(s.reconstruct().max_abs_diff(&Cmat2::identity()) < 1e-15);
    let s = svd_c2(&Cmat2::from_real([[3.0, 0.0], [0.0, 0.0]]));
    assert_eq!(s.sigma, [3.0, 0.0]);
}

#[test]
fn eigen_examples() {
    let e = eigh_sym4(&Sym4::diagonal([1.0, 2.0, 3.0, 4.0])).unwrap();
    assert_eq!(e.values, [1.0, 2.0, 3.0, 4.0]);
    for k in 0..4 {
        for i in 0..4 {
            assert_eq!(e.vectors[k][i], if i == k { 1.0 } else { 0.0 });
        }
    }
    assert_eq!(eigh_sym4(&Sym4::identity()).unwrap().values, [1.0; 4]);
    let h = Herm4::from_real(&Sym4::diagonal([0.0, 1.0, 1.0, 1.0]));
    let v = eigh_herm4(&h).unwrap().vectors[0];
    assert_eq!(v[0], Complex64::new(1.0, 0.0));
}

#[test]
fn jacobi_converges_within_thirty_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0;
    for _ in 0..1_000_000 {
        let a: [[f64; 4]; 4] =
            std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let e = eigh_sym4(&Sym4::from_upper(&a)).unwrap();
        worst = worst.max(e.sweeps);
    }
    assert!(worst <= 30, "{worst}");
}
