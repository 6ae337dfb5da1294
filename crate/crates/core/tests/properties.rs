//! Property tests for the invariants the library promises.

use proptest::prelude::*;
use wdvv::expr::{library, Expr};
use wdvv::fd::richardson_scalar;
use wdvv::frobenius::{normalization_residual, quasi_homogeneity_residual, third_tensor, FlatMetric};
use wdvv::jet::{Jet, JetSpace, MultiIndex, Scalar};
use wdvv::linalg::c;
use wdvv::{n2, n3, schlesinger};

fn rel_close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= tol * x.norm().max(y.norm()).max(1.0))
}

/// A jet with unit-scale coefficients and a value kept off the branch cut.
fn jet_strategy(nvars: usize, order: usize) -> impl Strategy<Value = Jet> {
    let len = JetSpace::new(nvars, order).len();
    (0.5f64..2.0, -0.5f64..0.5, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len - 1)).prop_map(
        move |(re, im, rest)| {
            let space = JetSpace::new(nvars, order);
            let mut coeffs = vec![Scalar::new(re, im)];
            coeffs.extend(rest.into_iter().map(|(a, b)| Scalar::new(a, b)));
            space.from_coeffs(coeffs)
        },
    )
}

/// `Σ c_k x^{e_k}` with exponents of total degree at most four.
fn polynomial_strategy() -> impl Strategy<Value = Vec<(f64, [usize; 3])>> {
    prop::collection::vec(
        (-2.0f64..2.0, (0usize..=4, 0usize..=4, 0usize..=4))
            .prop_filter("degree at most four", |(_, (a, b, g))| a + b + g <= 4)
            .prop_map(|(c, (a, b, g))| (c, [a, b, g])),
        1..8,
    )
}

/// Exact partial derivative of a monomial sum.
fn poly_partial(poly: &[(f64, [usize; 3])], d: [usize; 3], x: [f64; 3]) -> f64 {
    poly.iter()
        .map(|(coef, e)| {
            let mut v = *coef;
            for k in 0..3 {
                if d[k] > e[k] {
                    return 0.0;
                }
                let falling: usize = ((e[k] - d[k] + 1)..=e[k]).product();
                v *= falling as f64 * x[k].powi((e[k] - d[k]) as i32);
            }
            v
        })
        .sum()
}

/// Mixed partial by nested Richardson-extrapolated central differences of
/// scalar evaluation.
fn fd_partial(f: &Expr, at: &[Scalar], slots: &[usize], h: f64) -> Scalar {
    match slots.split_first() {
        None => f.eval_scalar(at).expect("smooth test expression"),
        Some((&k, rest)) => {
            let mut g = |p: &[Scalar]| -> Result<Scalar, ()> { Ok(fd_partial(f, p, rest, h)) };
            richardson_scalar(&mut g, at, k, h).expect("infallible")
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_jets_are_exact(poly in polynomial_strategy(), x in prop::array::uniform3(-1.5f64..1.5)) {
        let space = JetSpace::new(3, 4);
        let v = space.vars(&[c(x[0]), c(x[1]), c(x[2])]).unwrap();
        let mut f = space.zero();
        for (coef, e) in &poly {
            let mut term = space.real(*coef);
            for k in 0..3 {
                term = term.try_mul(&v[k].powi(e[k] as i32).unwrap()).unwrap();
            }
            f = f.try_add(&term).unwrap();
        }
        for idx in space.indices() {
            let d: Vec<usize> = idx.exponents().collect();
            let exact = poly_partial(&poly, [d[0], d[1], d[2]], x);
            let got = f.partial(idx).unwrap();
            prop_assert!((got.re - exact).abs() < 1e-13 * exact.abs().max(1.0) * 10.0, "{idx:?}: {got} vs {exact}");
            prop_assert!(got.im.abs() < 1e-13);
        }
    }

    #[test]
    fn exp_inverts_log(a in jet_strategy(2, 4)) {
        let back = a.ln().unwrap().exp();
        prop_assert!(rel_close(&back, &a, 1e-13));
        prop_assert!(rel_close(&a.powf(1.0).unwrap(), &a, 1e-13));
    }

    #[test]
    fn multiplication_is_associative_and_commutative(
        a in jet_strategy(3, 3),
        b in jet_strategy(3, 3),
        g in jet_strategy(3, 3),
    ) {
        let left = a.try_mul(&b).unwrap().try_mul(&g).unwrap();
        let right = a.try_mul(&b.try_mul(&g).unwrap()).unwrap();
        prop_assert!(rel_close(&left, &right, 1e-13));
        prop_assert!(rel_close(&a.try_mul(&b).unwrap(), &b.try_mul(&a).unwrap(), 1e-13));
    }

    #[test]
    fn partials_match_finite_differences(x in prop::array::uniform3(0.6f64..1.8)) {
        let (x0, x1, x2) = (Expr::var(0), Expr::var(1), Expr::var(2));
        let f = x0.clone().exp() * x1.clone().ln() + (x0 * x2.clone()).powf(1.5) + x1 * x2.powf(-1.0);
        let at = [c(x[0]), c(x[1]), c(x[2])];
        let jet = f.eval(&at, 3).unwrap();
        for slots in [vec![0], vec![1, 2], vec![0, 0, 2], vec![2, 2, 2], vec![0, 1, 2]] {
            let exact = jet.partial(&MultiIndex::from_slots(3, &slots)).unwrap();
            let approx = fd_partial(&f, &at, &slots, 1e-2);
            prop_assert!((exact - approx).norm() < 1e-6 * exact.norm().max(1.0), "{slots:?}: {exact} vs {approx}");
        }
    }

    #[test]
    fn third_tensor_is_symmetric(x in prop::array::uniform3(0.5f64..2.0)) {
        let t = third_tensor(&library::rational_n3(), &[c(x[0]), c(x[1]), c(x[2])]).unwrap();
        prop_assert!(t.symmetry_defect() < 1e-12 * t.max_abs().max(1.0));
    }

    #[test]
    fn generic_n2_prepotentials_are_normalized_and_homogeneous(
        r in -1.4f64..1.4,
        s in prop::array::uniform2(0.8f64..1.6),
    ) {
        prop_assume!(n2::classify_r(r).is_none() && !n2::near_special(r) && (r - 0.5).abs() > 0.05 && (r + 0.5).abs() > 0.05);
        let (x1, x2) = n2::domain_point(r, s[0], s[1]);
        let p = [c(x1), c(x2)];
        let f = n2::f_closed(r).unwrap();
        let t = third_tensor(&f, &p).unwrap();
        // near R = -1/2 the entries grow like a power of 1/(2R + 1)
        let scale = t.max_abs().max(1.0);
        prop_assert!(normalization_residual(&t, &FlatMetric::antidiagonal2()).unwrap() < 1e-9 * scale);
        prop_assert!(quasi_homogeneity_residual(&f, &n2::euler_n2(r), &p).unwrap() < 1e-9 * scale);
    }

    #[test]
    fn n2_iso_tau_matches_closed_form_and_ignores_alpha(
        r in -1.4f64..1.4,
        alpha in -2.0f64..2.0,
        u in prop::array::uniform2(-3.0f64..3.0),
    ) {
        prop_assume!((u[0] - u[1]).abs() > 0.2);
        let sys = schlesinger::n2_system(r, alpha, [c(u[0]), c(u[1])]).unwrap();
        let iso = schlesinger::iso_tau_residual(&sys).unwrap();
        let closed = r * r / (u[0] - u[1]);
        prop_assert!((iso.lhs[0] - closed).norm() < 1e-10 * closed.abs().max(1.0));
        prop_assert!((iso.lhs[1] + closed).norm() < 1e-10 * closed.abs().max(1.0));
        prop_assert!(iso.residual < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn casimir_is_conserved_along_imaginary_arcs(t0 in 0.3f64..1.2, rtol_exp in 8i32..11) {
        let rtol = 10f64.powi(-rtol_exp);
        let top = n3::imaginary_arc(t0, 0.4, rtol).unwrap();
        prop_assert!(top.casimir_drift < 10.0 * rtol, "drift {} at rtol {rtol}", top.casimir_drift);
    }

    #[test]
    fn painleve_and_relations_hold_on_the_branch(t in 0.2f64..5.0) {
        prop_assume!((t - 3f64.sqrt()).abs() > 0.05);
        let p = n3::HitchinParam::imaginary(t).unwrap();
        prop_assert!(n3::painleve6_residual(&p).unwrap().residual < 1e-8);
        prop_assert!(n3::hitchin_relations_residual(&p).unwrap() < 1e-8);
    }

    #[test]
    fn tau_scaling_holds_in_both_coordinate_systems(x in prop::array::uniform3(0.5f64..2.0)) {
        let x = [x[0] - 1.0, x[1], 0.5 + 0.5 * x[2]];
        let cross = n3::tau_cross_check(x[0], x[1], x[2]);
        prop_assume!(cross.is_ok());
        let cross = cross.unwrap();
        prop_assert!(cross.euler_coordinates < 1e-5);
        prop_assert!(cross.derivative < 1e-5);
    }

    #[test]
    fn s_infinity_is_constant_for_n2(r in -1.4f64..1.4, shift in prop::array::uniform2(-0.5f64..0.5)) {
        let a = schlesinger::n2_system(r, 0.0, [c(2.0), c(1.0)]).unwrap();
        let b = schlesinger::n2_system(r, 0.0, [c(2.0 + shift[0]), c(1.0 + shift[1])]).unwrap();
        prop_assert!(schlesinger::s_infinity_spread(&[a, b]) < 1e-5);
    }
}
