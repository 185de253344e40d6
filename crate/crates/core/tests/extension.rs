mod common;

use common::{cubic_base, n3_base, offdiag2, plane_base};
use frobkit::extension::*;
use frobkit::frobenius::{check_frobenius, from_potential, wdvv_residual, PotentialFrobenius};
use frobkit::report::CheckOpts;
use frobkit::scalar::{q, qr, Chart, ScalarField, Q};
use frobkit::tensor::VectorField;
use frobkit::Error;
use proptest::prelude::*;

fn opts() -> CheckOpts {
    CheckOpts::default()
}

fn qm(rows: &[&[i64]]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
}

#[test]
fn legendre_field_examples() {
    let a = from_potential(&cubic_base()).unwrap();
    let e = a.unit().clone();
    assert!(check_legendre_field(&a, &e, &opts()).unwrap().pass());

    let two_e = e.scale(&ScalarField::int(a.chart(), 2));
    let rep = check_legendre_field(&a, &two_e, &opts()).unwrap();
    assert!(rep.pass());
    assert_eq!(rep.residual("operator_det"), 2.0);
    assert_eq!(legendre_metric(&a, &e).unwrap(), a.metric);
    assert_eq!(legendre_metric(&a, &two_e).unwrap(), a.metric.scaled(&ScalarField::int(a.chart(), 4)));

    let b = from_potential(&n3_base(false)).unwrap();
    let two_e = b.unit().scale(&ScalarField::int(b.chart(), 2));
    assert_eq!(check_legendre_field(&b, &two_e, &opts()).unwrap().residual("operator_det"), 8.0);
    let x = VectorField::parse(b.chart(), &["t1", "0", "0"]).unwrap();
    let rep = check_legendre_field(&b, &x, &opts()).unwrap();
    assert!(!rep.passed("nabla_X0"));
}

#[test]
fn generic_legendre_metric_is_symmetric_and_invariant() {
    let c = Chart::real(&["t1", "t2"]);
    let p = PotentialFrobenius::parse(&c, offdiag2(), "t1^2*t2/2+t2^4/12", 0).unwrap();
    let a = from_potential(&p).unwrap();
    let x0 = VectorField::parse(&c, &["3", "1"]).unwrap();
    let gx = legendre_metric(&a, &x0).unwrap();
    let b = a.with_metric(gx.clone());
    let rep = frobkit::frobenius::check_almost_frobenius(&b, &opts()).unwrap();
    assert!(rep.passed("invariance"), "{rep}");
    // direct contraction g(X0∘∂i, X0∘∂j)
    for i in 0..2 {
        for j in 0..2 {
            let xi = a.mult.product(&x0, &VectorField::coordinate(&c, i));
            let xj = a.mult.product(&x0, &VectorField::coordinate(&c, j));
            assert_eq!(*gx.get(i, j), a.metric.pair(&xi, &xj));
        }
    }
}

#[test]
fn add_variable_examples() {
    let a = from_potential(&cubic_base()).unwrap();
    let two_e = a.unit().scale(&ScalarField::int(a.chart(), 2));
    let res = add_variable(&a, &two_e, &opts()).unwrap();
    let s = &res.structure;
    assert_eq!(s.chart().var_names(), ["t", "tau1"]);
    let dtau = VectorField::coordinate(s.chart(), 1);
    assert_eq!(s.mult.product(&dtau, &dtau), dtau);
    assert_eq!(*s.unit(), dtau);
    // g^{X0}(e,e) = 4
    assert_eq!(*s.metric.get(1, 1), ScalarField::int(s.chart(), 5));
    assert_eq!(*s.metric.get(0, 1), ScalarField::int(s.chart(), 4));
    let rep = check_frobenius(s, &opts()).unwrap();
    assert!(rep.pass(), "{rep}");
}

#[test]
fn add_variable_rejects_bad_inputs() {
    let b = from_potential(&n3_base(true)).unwrap();
    let err = add_variable(&b, &b.unit().clone(), &opts()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
    let a = from_potential(&n3_base(false)).unwrap();
    let x = VectorField::parse(a.chart(), &["t1", "0", "0"]).unwrap();
    assert!(matches!(add_variable(&a, &x, &opts()), Err(Error::Precondition(_))));
}

#[test]
fn add_variable_on_bases_passes_the_verifier_and_matches_its_potential() {
    for p in [cubic_base(), n3_base(false), plane_base()] {
        let a = from_potential(&p).unwrap();
        let res = add_variable(&a, a.unit(), &opts()).unwrap();
        let rep = check_frobenius(&res.structure, &opts()).unwrap();
        assert!(rep.pass(), "{rep}");
        let pot = add_variable_potential(&p).unwrap();
        assert!(wdvv_residual(&pot, &opts()).unwrap().pass());
        assert_eq!(from_potential(&pot).unwrap(), res.structure);
    }
}

#[test]
fn adding_a_variable_commutes_with_legendre_transformation() {
    let a = from_potential(&n3_base(false)).unwrap();
    let x0 = VectorField::parse(a.chart(), &["2", "1", "0"]).unwrap();
    let direct = add_variable(&a, &x0, &opts()).unwrap();
    let transformed = a.with_metric(legendre_metric(&a, &x0).unwrap());
    let via = add_variable(&transformed, transformed.unit(), &opts()).unwrap();
    assert_eq!(direct.structure, via.structure);
    assert!(check_frobenius(&direct.structure, &opts()).unwrap().pass());
}

#[test]
fn iterate_with_units_gives_closed_form_coefficients() {
    let a = from_potential(&cubic_base()).unwrap();
    let a1 = add_variable(&a, a.unit(), &opts()).unwrap().structure;
    let fields = vec![a.unit().clone(), a1.unit().clone()];
    let it = iterate(&a, &fields, &opts()).unwrap();
    let s = &it.structure;
    assert_eq!(it.provenance, Provenance::Iterate { r: 2 });
    let d = |i| VectorField::coordinate(s.chart(), i);
    assert_eq!(s.mult.product(&d(1), &d(2)), d(1));
    assert_eq!(*s.unit(), d(2));
    // g(e,e) = 1 on the base: g11 = g12 = 2, g22 = 3
    let g = s.metric.matrix();
    assert_eq!(g[1][1], g[1][2]);
    assert_eq!(g[2][2], &g[1][2] + &ScalarField::one(s.chart()));
    assert_eq!(g[1][1], ScalarField::int(s.chart(), 2));

    let (z0, coeffs) = iteration_data(&a, &fields, &opts()).unwrap();
    assert_eq!(z0, *a.unit());
    assert_eq!(coeffs, qm(&[&[2, 2], &[2, 3]]));
    check_relation_coefficients(&coeffs).unwrap();
    let cf = closed_form(&a, &z0, &coeffs, &opts()).unwrap();
    assert_eq!(cf.structure, it.structure);
}

#[test]
fn iterate_with_general_fields_matches_closed_form() {
    let a = from_potential(&cubic_base()).unwrap();
    let x0 = a.unit().scale(&ScalarField::int(a.chart(), 2));
    let a1 = add_variable(&a, &x0, &opts()).unwrap().structure;
    let z1 = VectorField::parse(a1.chart(), &["1", "3"]).unwrap();
    let a2 = add_variable(&a1, &z1, &opts()).unwrap().structure;
    let z2 = VectorField::parse(a2.chart(), &["0", "1", "1"]).unwrap();

    for fields in [vec![x0.clone(), z1.clone()], vec![x0.clone(), z1.clone(), z2.clone()]] {
        let it = iterate(&a, &fields, &opts()).unwrap();
        let (z0, coeffs) = iteration_data(&a, &fields, &opts()).unwrap();
        check_relation_coefficients(&coeffs).unwrap();
        let cf = closed_form(&a, &z0, &coeffs, &opts()).unwrap();
        assert_eq!(cf.structure, it.structure);
        assert!(check_frobenius(&it.structure, &opts()).unwrap().pass());
    }
    // Z0 = X0 ∘ (Z^TM + c e) = 2∂t ∘ (1 + 3)∂t
    let (z0, _) = iteration_data(&a, &[x0, z1], &opts()).unwrap();
    assert_eq!(z0, VectorField::parse(a.chart(), &["8"]).unwrap());
}

#[test]
fn iterate_rejects_zero_fiber_part_and_bad_coefficients() {
    let a = from_potential(&cubic_base()).unwrap();
    let a1 = add_variable(&a, a.unit(), &opts()).unwrap().structure;
    let z = VectorField::parse(a1.chart(), &["1", "0"]).unwrap();
    assert!(matches!(iterate(&a, &[a.unit().clone(), z], &opts()), Err(Error::Precondition(_))));

    let err = closed_form(&a, a.unit(), &qm(&[&[1, 2], &[2, 3]]), &opts()).unwrap_err();
    assert!(matches!(&err, Error::Invalid(m) if m.contains("g_ij = g_ji = g_(min(i,j),r)")), "{err}");
    assert!(check_relation_coefficients(&qm(&[&[3, 3], &[4, 4]])).is_err());
    assert!(check_relation_coefficients(&qm(&[&[3, 3], &[3, 4]])).is_ok());
}

#[test]
fn closed_form_with_one_variable_is_add_variable() {
    let a = from_potential(&n3_base(false)).unwrap();
    let x0 = VectorField::parse(a.chart(), &["1", "1", "0"]).unwrap();
    let av = add_variable(&a, &x0, &opts()).unwrap();
    let (z0, coeffs) = iteration_data(&a, &[x0], &opts()).unwrap();
    assert_eq!(closed_form(&a, &z0, &coeffs, &opts()).unwrap().structure, av.structure);
}

#[test]
fn algebra_and_functional_validation() {
    assert!(FrobeniusAlgebra::diagonal(&[q(1), q(2)]).is_ok());
    assert!(FrobeniusAlgebra::diagonal(&[q(1), q(0)]).is_err());
    assert!(FrobeniusAlgebra::min_algebra(qm(&[&[3, 3], &[3, 4]])).is_ok());
    assert!(FrobeniusAlgebra::min_algebra(qm(&[&[1, 3], &[3, 4]])).is_err());
    // K[x]/(x^2 - x - 1): invariant for the identity metric, not for diag(1, 2)
    let c = vec![qm(&[&[1, 0], &[0, 1]]), qm(&[&[0, 1], &[1, 1]])];
    assert!(FrobeniusAlgebra::new(c.clone(), vec![q(1), q(0)], qm(&[&[1, 0], &[0, 1]])).is_ok());
    let err = FrobeniusAlgebra::new(c, vec![q(1), q(0)], qm(&[&[1, 0], &[0, 2]])).unwrap_err();
    assert!(err.to_string().contains("invariant"), "{err}");
    // b2∘b2 = b3, b3∘b3 = b2, b2∘b3 = 0
    let mut c = vec![vec![vec![q(0); 3]; 3]; 3];
    for i in 0..3 {
        c[i][0][i] = q(1);
        c[i][i][0] = q(1);
    }
    c[2][1][1] = q(1);
    c[1][2][2] = q(1);
    let err = FrobeniusAlgebra::new(c, vec![q(1), q(0), q(0)], qm(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap_err();
    assert!(err.to_string().contains("associative"), "{err}");

    let d = FrobeniusAlgebra::diagonal(&[q(3), q(2)]).unwrap();
    assert!(LambdaFunctional::new(vec![q(1), q(0)], &d).is_ok());
    assert!(LambdaFunctional::new(vec![q(1), q(1)], &d).is_err());
    assert!(LambdaFunctional::new(vec![qr(1, 2), qr(1, 2)], &d).is_err());
}

fn plane_euler() -> VectorField {
    VectorField::radial(&plane_base().chart)
}

#[test]
fn trivial_extension_on_a_plane() {
    let p = plane_base();
    let alg = FrobeniusAlgebra::diagonal(&[q(3), q(2)]).unwrap();
    let lam = LambdaFunctional::new(vec![q(1), q(0)], &alg).unwrap();
    let res = extend_trivial(&p, &plane_euler(), &alg, &lam, &opts()).unwrap();
    let s = &res.structure;
    assert_eq!(s.dim(), 4);
    let rep = check_frobenius(s, &opts()).unwrap();
    assert!(rep.pass(), "{rep}");
    assert!(euler_check_extension(&res, &opts()).unwrap().pass());

    // g(∂t_i, ∂τ_s) = λ_s g(∂t_i, e); g(∂τ_s, ∂τ_k) = g_V
    assert_eq!(*s.metric.get(0, 2), ScalarField::one(s.chart()));
    assert_eq!(*s.metric.get(0, 3), ScalarField::zero(s.chart()));
    assert_eq!(*s.metric.get(2, 2), ScalarField::int(s.chart(), 3));
    assert_eq!(*s.metric.get(3, 3), ScalarField::int(s.chart(), 2));

    let f = res.potential.clone().unwrap();
    let n = s.dim();
    let low = s.lowered();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                assert_eq!(f.diff(i).diff(j).diff(k), low[k][i][j], "F_{i}{j}{k}");
            }
        }
    }
}

#[test]
fn trivial_extension_degenerate_and_euler_detection() {
    let p = plane_base();
    let alg = FrobeniusAlgebra::diagonal(&[q(1), q(2)]).unwrap();
    let lam = LambdaFunctional::new(vec![q(1), q(0)], &alg).unwrap();
    let err = extend_trivial(&p, &plane_euler(), &alg, &lam, &opts()).unwrap_err();
    assert!(matches!(&err, Error::Precondition(m) if m.contains("degenerate")), "{err}");

    let bad_e = VectorField::parse(&p.chart, &["t1", "0"]).unwrap();
    let alg = FrobeniusAlgebra::diagonal(&[q(3), q(2)]).unwrap();
    assert!(matches!(extend_trivial(&p, &bad_e, &alg, &lam, &opts()), Err(Error::Precondition(_))));

    let c = cubic_base();
    let line = FrobeniusAlgebra::diagonal(&[q(5)]).unwrap();
    let one = LambdaFunctional::new(vec![q(1)], &line).unwrap();
    let e = VectorField::radial(&c.chart);
    let mut res = extend_trivial(&c, &e, &line, &one, &opts()).unwrap();
    assert!(euler_check_extension(&res, &opts()).unwrap().pass());
    res.euler = Some(e.embed(res.structure.chart(), 1).unwrap());
    let rep = euler_check_extension(&res, &opts()).unwrap();
    assert!(!rep.passed("euler_metric"));
    res.euler = None;
    assert!(euler_check_extension(&res, &opts()).is_err());
}

#[test]
fn rank_one_trivial_extension_is_adding_a_variable() {
    for p in [cubic_base(), plane_base()] {
        let a = from_potential(&p).unwrap();
        let gee = p.flat_metric[0][0].clone();
        let line = FrobeniusAlgebra::diagonal(&[gee + q(1)]).unwrap();
        let lam = LambdaFunctional::new(vec![q(1)], &line).unwrap();
        let e = VectorField::radial(&p.chart);
        let tr = extend_trivial(&p, &e, &line, &lam, &opts()).unwrap();
        let av = add_variable(&a, a.unit(), &opts()).unwrap();
        assert_eq!(tr.structure, av.structure);
        assert_eq!(tr.potential.unwrap(), add_variable_potential(&p).unwrap().potential);
    }
}

#[test]
fn min_algebra_extension_is_the_iterated_structure() {
    let p = cubic_base();
    let a = from_potential(&p).unwrap();
    let coeffs = qm(&[&[2, 2, 2], &[2, 5, 5], &[2, 5, 7]]);
    let alg = FrobeniusAlgebra::min_algebra(coeffs.clone()).unwrap();
    let lam = LambdaFunctional::new(vec![q(1); 3], &alg).unwrap();
    let tr = extend_trivial(&p, &VectorField::radial(&p.chart), &alg, &lam, &opts()).unwrap();
    let cf = closed_form(&a, a.unit(), &coeffs, &opts()).unwrap();
    assert_eq!(tr.structure, cf.structure);
    assert!(euler_check_extension(&tr, &opts()).unwrap().pass());
    // canonical basis w_1 = ∂τ1, w_k = ∂τk − ∂τ(k−1) is idempotent and orthogonal under ∘
    let s = &tr.structure;
    let d = |i| VectorField::coordinate(s.chart(), i);
    let w: Vec<VectorField> = (1..4).map(|k| if k == 1 { d(1) } else { d(k).sub(&d(k - 1)) }).collect();
    for i in 0..3 {
        for j in 0..3 {
            let prod = s.mult.product(&w[i], &w[j]);
            assert_eq!(prod, if i == j { w[i].clone() } else { VectorField::zero(s.chart()) });
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn iteration_coefficients_always_satisfy_the_relation(a0 in 1i64..4, c1 in 1i64..4, m1 in -2i64..3) {
        let a = from_potential(&cubic_base()).unwrap();
        let x0 = a.unit().scale(&ScalarField::int(a.chart(), a0));
        let a1 = add_variable(&a, &x0, &opts()).unwrap().structure;
        let z1 = VectorField::parse(a1.chart(), &[&m1.to_string(), &c1.to_string()]).unwrap();
        let o = CheckOpts { points: 4, ..opts() };
        if let Ok((z0, coeffs)) = iteration_data(&a, &[x0.clone(), z1.clone()], &o) {
            prop_assert!(check_relation_coefficients(&coeffs).is_ok());
            let it = iterate(&a, &[x0, z1], &o).unwrap();
            prop_assert_eq!(closed_form(&a, &z0, &coeffs, &o).unwrap().structure, it.structure);
        }
    }
}

