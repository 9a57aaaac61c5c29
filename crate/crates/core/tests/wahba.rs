#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use proptest::prelude::*;
use su2wahba::wahba::{build_gm, build_gp, build_gs, mobius_to_su2};
use su2wahba::{
    build_aprime_row, build_d_general, build_d_row, build_q, eigh_sym4, kernel_rows,
    quat_angular_error, quat_compose, quat_to_rotmat, rotate_vec, solve_davenport, solve_gm,
    solve_gp, solve_gs, stereo_project, svd_c2, Cmat2, ObservationSet, ProjectivePoint,
    StereoEntry, StereoObservationSet, Sym4, UnitQuaternion, UnitVec3,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn quat() -> impl Strategy<Value = UnitQuaternion> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("norm", |q| q.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(|q| UnitQuaternion::from_array(q).unwrap())
}

fn unit3() -> impl Strategy<Value = UnitVec3> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("norm", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(|v| UnitVec3::from_array(v).unwrap())
}

fn plane() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b))
}

/// Random weighted observation set with `n` pairs, targets not tied to any rotation.
fn obs_set(n: std::ops::Range<usize>) -> impl Strategy<Value = ObservationSet> {
    prop::collection::vec((unit3(), unit3(), 0.01f64..1.0), n)
        .prop_map(|v| ObservationSet::from_triples(v).unwrap())
}

/// Noisy observations of a random rotation.
fn noisy_set(n: std::ops::Range<usize>) -> impl Strategy<Value = (ObservationSet, UnitQuaternion)> {
    (
        quat(),
        prop::collection::vec(
            (unit3(), prop::array::uniform3(-0.1f64..0.1), 0.01f64..1.0),
            n,
        ),
    )
        .prop_map(|(q, pts)| {
            let obs = ObservationSet::from_triples(pts.into_iter().map(|(a, e, w)| {
                let b = rotate_vec(&q, &a);
                let t = b.as_array();
                (
                    a,
                    UnitVec3::new(t[0] + e[0], t[1] + e[1], t[2] + e[2]).unwrap(),
                    w,
                )
            }))
            .unwrap();
            (obs, q)
        })
}

/// Raw stereographic-frame quaternion whose frame fix is `q`.
fn unfix(q: &UnitQuaternion) -> [f64; 4] {
    let [w, x, y, z] = q.to_array();
    [w, z, y, -x]
}

fn mat_vec(d: &[[f64; 4]; 2], q: &[f64; 4]) -> [f64; 2] {
    d.map(|r| (0..4).map(|i| r[i] * q[i]).sum())
}

fn exact_set(q: &UnitQuaternion, refs: &[UnitVec3]) -> ObservationSet {
    ObservationSet::from_triples(refs.iter().map(|a| (*a, rotate_vec(q, a), 1.0))).unwrap()
}

fn rank(rows: &[[f64; 4]]) -> usize {
    let mut g = [[0.0; 4]; 4];
    for r in rows {
        for i in 0..4 {
            for j in i..4 {
                g[i][j] += r[i] * r[j];
            }
        }
    }
    let e = eigh_sym4(&Sym4::from_upper(&g)).unwrap();
    let top = e.values[3].max(1e-300);
    e.values.iter().filter(|&&l| l > 1e-12 * top).count()
}

#[test]
fn davenport_examples() {
    let v = UnitVec3::new(0.3, -0.4, 0.8).unwrap();
    let s = solve_davenport(&ObservationSet::from_triples([(v, v, 1.0)]).unwrap()).unwrap();
    let r = quat_to_rotmat(&s.q).mul_vec(v.as_array());
    assert!((0..3).all(|i| (r[i] - v.as_array()[i]).abs() < 1e-12));
}

#[test]
fn d_row_at_origin() {
    let d = build_d_row(c(0.0, 0.0), c(0.0, 0.0), 1.0);
    assert_eq!(d, [[0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 2.0]]);
}

#[test]
fn d_general_both_at_infinity() {
    let inf = ProjectivePoint::infinity();
    let d = build_d_general(&inf, &inf, 1.0);
    assert!(d.iter().flatten().all(|x| x.is_finite()));
    assert!(d.iter().flatten().any(|x| *x != 0.0));
    assert_eq!(mat_vec(&d, &[1.0, 0.0, 0.0, 0.0]), [0.0, 0.0]);
}

#[test]
fn aprime_examples() {
    let o = ProjectivePoint::from_plane(c(0.0, 0.0));
    assert_eq!(
        build_aprime_row(&o, &o),
        [c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
    );
    let eye = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    for z in [c(0.5, 0.2), c(-1.0, 3.0), c(2.0, -0.7)] {
        let p = ProjectivePoint::from_plane(z);
        let row = build_aprime_row(&p, &p);
        let r: Complex64 = (0..4).map(|i| row[i] * eye[i]).sum();
        assert!(r.norm() < 1e-15);
    }
}

#[test]
fn gs_single_pair() {
    let a = UnitVec3::new(0.2, 0.9, -0.1).unwrap();
    let b = UnitVec3::new(-0.6, 0.3, 0.7).unwrap();
    let s = solve_gs(&ObservationSet::from_triples([(a, b, 2.0)]).unwrap()).unwrap();
    assert!(s.residual.abs() < 1e-12);
    let r = rotate_vec(&s.q, &a);
    assert!((0..3).all(|i| (r.as_array()[i] - b.as_array()[i]).abs() < 1e-10));
}

#[test]
fn gm_zero_determinant_rejected() {
    let m = Cmat2::from_real([[1.0, 2.0], [2.0, 4.0]]);
    assert!(mobius_to_su2(&m).is_err());
}

proptest! {
    #[test]
    fn davenport_recovers_noiseless(q in quat(), refs in prop::collection::vec(unit3(), 10)) {
        let s = solve_davenport(&exact_set(&q, &refs)).unwrap();
        prop_assert!(quat_angular_error(&s.q, &q) < 1e-6);
    }

    #[test]
    fn stereo_solvers_recover_noiseless(q in quat(), refs in prop::collection::vec(unit3(), 3)) {
        let obs = exact_set(&q, &refs);
        let st = StereoObservationSet::from_observations(&obs);
        prop_assert!(quat_angular_error(&solve_gp(&st).unwrap().q, &q) < 1e-6);
        prop_assert!(quat_angular_error(&solve_gs(&obs).unwrap().q, &q) < 1e-6);
        let gm = solve_gm(&st).unwrap();
        prop_assert!(quat_angular_error(&gm.q, &solve_davenport(&obs).unwrap().q) < 1e-6);
    }

    #[test]
    fn d_row_kernel_holds_raw_quaternion(q in quat(), a in unit3(), w in 0.01f64..5.0) {
        let b = rotate_vec(&q, &a);
        let (za, zb) = (stereo_project(&a), stereo_project(&b));
        let raw = unfix(&q);
        let dg = build_d_general(&za, &zb, w);
        prop_assert!(mat_vec(&dg, &raw).iter().all(|x| x.abs() < 1e-12));
        prop_assert_eq!(rank(&dg), 2);
        if let (Some(z), Some(p)) = (za.to_plane(), zb.to_plane()) {
            prop_assume!(z.norm() < 1e3 && p.norm() < 1e3);
            let d = build_d_row(z, p, w);
            prop_assert!(mat_vec(&d, &raw).iter().all(|x| x.abs() < 1e-12 * (1.0 + z.norm() * p.norm())));
        }
    }

    #[test]
    fn d_general_specializes_to_plane(z in plane(), p in plane(), w in 0.01f64..5.0) {
        let g = build_d_general(&ProjectivePoint::from_plane(z), &ProjectivePoint::from_plane(p), w);
        let d = build_d_row(z, p, w);
        for i in 0..2 {
            for j in 0..4 {
                prop_assert!((g[i][j] - d[i][j]).abs() < 1e-14 * (1.0 + d[i][j].abs()));
            }
        }
    }

    #[test]
    fn d_general_is_scale_free(q in quat(), a in unit3(), l1 in (0.1f64..10.0, 0.0f64..6.3), l2 in (0.1f64..10.0, 0.0f64..6.3)) {
        let b = rotate_vec(&q, &a);
        let (za, zb) = (stereo_project(&a), stereo_project(&b));
        let za2 = za.scaled(Complex64::from_polar(l1.0, l1.1)).unwrap();
        let zb2 = zb.scaled(Complex64::from_polar(l2.0, l2.1)).unwrap();
        let raw = unfix(&q);
        let d2 = build_d_general(&za2, &zb2, 1.0);
        prop_assert!(mat_vec(&d2, &raw).iter().all(|x| x.abs() < 1e-11));
        // rows recombine by a rotation under phase changes; the Gram matrix is invariant
        let gram = |d: &[[f64; 4]; 2]| -> [[f64; 4]; 4] {
            std::array::from_fn(|i| std::array::from_fn(|j| d[0][i] * d[0][j] + d[1][i] * d[1][j]))
        };
        let (g1, g2) = (gram(&build_d_general(&za, &zb, 1.0)), gram(&d2));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((g1[i][j] - g2[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_matrix_structure(a in unit3(), b in unit3(), w in 0.01f64..5.0) {
        let q = build_q(&a, &b, w);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(q[i][j], -q[j][i]);
            }
        }
        prop_assert!(rank(&q) <= 2);
        let dot: f64 = (0..3).map(|i| a.as_array()[i] * b.as_array()[i]).sum();
        if dot.abs() < 1.0 - 1e-6 {
            // singular values: two equal positives, two zeros
            let mut g = [[0.0; 4]; 4];
            for r in &q {
                for i in 0..4 {
                    for j in i..4 {
                        g[i][j] += r[i] * r[j];
                    }
                }
            }
            let e = eigh_sym4(&Sym4::from_upper(&g)).unwrap();
            prop_assert!(e.values[0].abs() < 1e-12 && e.values[1].abs() < 1e-12);
            prop_assert!((e.values[2] - e.values[3]).abs() < 1e-12 * e.values[3]);
        }
        // every kernel row is annihilated
        for r in kernel_rows(&a, &b) {
            for row in &q {
                let v: f64 = (0..4).map(|i| row[i] * r[i]).sum();
                prop_assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_matrix_identity_pair(a in unit3()) {
        let q = build_q(&a, &a, 1.0);
        for r in kernel_rows(&a, &a) {
            for row in &q {
                let v: f64 = (0..4).map(|i| row[i] * r[i]).sum();
                prop_assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn aprime_rows_scale_linearly(z in plane(), p in plane(), l in (0.1f64..10.0, 0.0f64..6.3)) {
        let lam = Complex64::from_polar(l.0, l.1);
        let (zr, pr) = (ProjectivePoint::from_plane(z), ProjectivePoint::from_plane(p));
        let a = build_aprime_row(&zr, &pr);
        let b = build_aprime_row(&zr.scaled(lam).unwrap(), &pr);
        for i in 0..4 {
            prop_assert!((a[i] * lam - b[i]).norm() < 1e-12 * (1.0 + b[i].norm()));
        }
    }

    #[test]
    fn aprime_kernel_contains_exact_mobius(q in quat(), refs in prop::collection::vec(unit3(), 3)) {
        let [w, x, y, z] = unfix(&q);
        let m = [c(w, x), c(y, z), c(-y, z), c(w, -x)];
        for a in &refs {
            let b = rotate_vec(&q, a);
            let row = build_aprime_row(&stereo_project(a), &stereo_project(&b));
            let r: Complex64 = (0..4).map(|i| row[i] * m[i]).sum();
            prop_assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn gain_minimum_equals_wahba_loss(obs in obs_set(1..12)) {
        let dav = solve_davenport(&obs).unwrap();
        let loss = obs.wahba_loss(&dav.q);
        let scale = obs.total_weight();
        prop_assert!((dav.residual - loss).abs() < 1e-9 * scale);
        let st = StereoObservationSet::from_observations(&obs);
        let gp = eigh_sym4(&build_gp(&st)).unwrap().values[0];
        let gs = eigh_sym4(&build_gs(&obs)).unwrap().values[0];
        prop_assert!((gp - loss).abs() < 1e-9 * scale, "{gp} {loss}");
        prop_assert!((gs - loss).abs() < 1e-9 * scale, "{gs} {loss}");
        prop_assert!(gp >= -1e-12 && gs >= -1e-12);
    }

    #[test]
    fn solvers_agree_with_davenport((obs, _) in noisy_set(2..40)) {
        let dav = solve_davenport(&obs).unwrap();
        let st = StereoObservationSet::from_observations(&obs);
        prop_assert!(quat_angular_error(&solve_gp(&st).unwrap().q, &dav.q) < 1e-6);
        prop_assert!(quat_angular_error(&solve_gs(&obs).unwrap().q, &dav.q) < 1e-6);
        let rays = StereoObservationSet::rays_from_observations(&obs);
        prop_assert!(quat_angular_error(&solve_gp(&rays).unwrap().q, &dav.q) < 1e-6);
        prop_assert!(solve_gs(&obs).unwrap().q.dot(&dav.q).abs() > 1.0 - 1e-10);
    }

    #[test]
    fn weight_scaling_keeps_solutions((obs, _) in noisy_set(3..20), c in 1e-3f64..1e3) {
        let scaled = obs.scaled_weights(c).unwrap();
        let st = StereoObservationSet::from_observations(&obs);
        let st2 = StereoObservationSet::from_observations(&scaled);
        let pairs = [
            (solve_davenport(&obs).unwrap().q, solve_davenport(&scaled).unwrap().q),
            (solve_gp(&st).unwrap().q, solve_gp(&st2).unwrap().q),
            (solve_gs(&obs).unwrap().q, solve_gs(&scaled).unwrap().q),
        ];
        for (a, b) in pairs {
            for (x, y) in a.to_array().iter().zip(b.to_array()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn solutions_are_equivariant((obs, _) in noisy_set(3..20), s in quat(), t in quat()) {
        let moved = ObservationSet::from_triples(
            obs.iter().map(|o| (rotate_vec(&s, &o.reference), rotate_vec(&t, &o.target), o.weight)),
        )
        .unwrap();
        let st = StereoObservationSet::from_observations(&obs);
        let st2 = StereoObservationSet::from_observations(&moved);
        let before = [solve_davenport(&obs).unwrap().q, solve_gp(&st).unwrap().q, solve_gs(&obs).unwrap().q];
        let after = [solve_davenport(&moved).unwrap().q, solve_gp(&st2).unwrap().q, solve_gs(&moved).unwrap().q];
        for (r, r2) in before.iter().zip(&after) {
            let want = quat_to_rotmat(&quat_compose(&quat_compose(&t, r), &s.conjugate()));
            prop_assert!(quat_to_rotmat(r2).max_abs_diff(&want) < 1e-9);
        }
    }

    #[test]
    fn unit_det_mobius_projects_to_su2(a in prop::array::uniform8(-2.0f64..2.0)) {
        let m = Cmat2::new(c(a[0], a[1]), c(a[2], a[3]), c(a[4], a[5]), c(a[6], a[7]));
        prop_assume!(m.det().norm() > 1e-6);
        let (su, ms, w) = mobius_to_su2(&m).unwrap();
        prop_assert!((ms.det() - c(1.0, 0.0)).norm() < 1e-10);
        prop_assert!((w.det() - c(1.0, 0.0)).norm() < 1e-10);
        prop_assert!((su.det() - c(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(su.unitarity_residual() < 1e-12);
        // the other square-root branch gives the same rotation up to sign
        let other = svd_c2(&ms.scale(c(-1.0, 0.0))).polar_unitary();
        prop_assert!(other.max_abs_diff(&w.scale(c(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn gm_tracks_optimum_at_low_noise(q in quat(), pts in prop::collection::vec((unit3(), prop::array::uniform3(-1e-6f64..1e-6)), 10..30)) {
        let obs = ObservationSet::from_triples(pts.into_iter().map(|(a, e)| {
            let t = *rotate_vec(&q, &a).as_array();
            (a, UnitVec3::new(t[0] + e[0], t[1] + e[1], t[2] + e[2]).unwrap(), 1.0)
        }))
        .unwrap();
        let gm = solve_gm(&StereoObservationSet::from_observations(&obs)).unwrap();
        prop_assert!(quat_angular_error(&gm.q, &q) < 1e-3);
    }
}

#[test]
fn solvers_handle_points_at_the_pole() {
    // half turn about x swaps the poles exactly
    let q = UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap();
    let refs = [
        UnitVec3::z_axis().negated(),
        UnitVec3::z_axis(),
        UnitVec3::x_axis(),
        UnitVec3::new(0.0, 0.6, 0.8).unwrap(),
    ];
    let obs = exact_set(&q, &refs);
    let st = StereoObservationSet::from_observations(&obs);
    let rays = st
        .entries()
        .iter()
        .filter(|e| matches!(e, StereoEntry::Ray { .. }))
        .count();
    assert_eq!(rays, 2);
    assert!(quat_angular_error(&solve_gm(&st).unwrap().q, &q) < 1e-6);
    assert!(quat_angular_error(&solve_gp(&st).unwrap().q, &q) < 1e-6);
    let g = build_gm(&st);
    assert!(g.frobenius_norm().is_finite());
}
