mod common;

use common::*;
use frobkit::linalg;
use frobkit::report::CheckOpts;
use frobkit::scalar::{q, Chart, Point, ScalarField};
use frobkit::tensor::*;
use proptest::prelude::*;

fn sf(s: &str, c: &Chart) -> ScalarField {
    ScalarField::parse(s, c).unwrap()
}

#[test]
fn euclidean_christoffel_and_curvature_vanish() {
    let c = Chart::real(&["t1", "t2", "t3"]);
    let g = Metric::euclidean(&c);
    assert!(christoffel(&g).unwrap().iter().flatten().flatten().all(|x| x.is_zero()));
    assert!(riemann(&g).unwrap().iter().flatten().flatten().flatten().all(|x| x.is_zero()));
}

#[test]
fn degenerate_metric_is_rejected() {
    let c = Chart::real(&["t1", "t2"]);
    let g = Metric::parse(&c, &[&["t1", "t1*t2"], &["t1*t2", "t1*t2^2"]]).unwrap();
    assert_eq!(christoffel(&g), Err(TensorError::Degenerate));
    assert!(matches!(Metric::parse(&c, &[&["1", "t1"], &["t2", "1"]]), Err(TensorError::NotSymmetric(0, 1))));
}

/// Γ^k_ij from central differences of the metric components.
fn christoffel_fd(g: &Metric, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = g.dim();
    let h = 1e-5;
    let gv = |y: &[f64]| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| eval_f64(g.get(i, j), y)).collect()).collect()
    };
    let dg: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|a| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[a] += h;
            m[a] -= h;
            let (gp, gm) = (gv(&p), gv(&m));
            (0..n).map(|i| (0..n).map(|j| (gp[i][j] - gm[i][j]) / (2.0 * h)).collect()).collect()
        })
        .collect();
    let ginv = inv_f64(&gv(x));
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n).map(|l| 0.5 * ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j])).sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[test]
fn christoffel_of_diagonal_metric_matches_finite_differences() {
    let c = Chart::real(&["u1", "u2"]);
    // η = u1^2 u2 + u2^3/3 + 2 u1 + 3 u2, η_k = ∂η/∂u_k
    let eta = sf("u1^2*u2+u2^3/3+2*u1+3*u2", &c);
    let g = Metric::new(
        &c,
        vec![
            vec![eta.diff(0), ScalarField::zero(&c)],
            vec![ScalarField::zero(&c), eta.diff(1)],
        ],
    )
    .unwrap();
    let gam = christoffel(&g).unwrap();
    let mut r = rng(11);
    let mut tested = 0;
    while tested < 10 {
        let p = random_point(&mut r, &c);
        let x = point_f64(&p);
        if eval_f64(&g.get(0, 0).clone(), &x).abs() < 0.1 || eval_f64(g.get(1, 1), &x).abs() < 0.1 {
            continue;
        }
        let fd = christoffel_fd(&g, &x);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let v = gam[k][i][j].evaluate(&p).unwrap().re_f64();
                    assert!((v - fd[k][i][j]).abs() < 1e-6, "Γ^{k}_{i}{j}: {v} vs {}", fd[k][i][j]);
                }
            }
        }
        tested += 1;
    }
}

#[test]
fn polar_type_metric_is_flat() {
    let c = Chart::real(&["t1", "t2"]);
    let g = Metric::parse(&c, &[&["1", "0"], &["0", "t1^2"]]).unwrap();
    let rm = riemann(&g).unwrap();
    assert!(rm.iter().flatten().flatten().flatten().all(|x| x.is_zero()));
    let pts: Vec<Point> = (1..=20).map(|i| Point::real(&c, vec![frobkit::scalar::qr(i, 20), q(i % 3)]).unwrap()).collect();
    assert!(riemann_residual(&g, &pts).unwrap() < 1e-9);
}

#[test]
fn hyperbolic_type_metric_is_curved() {
    let c = Chart::real(&["t1", "t2"]);
    let g = Metric::parse(&c, &[&["1", "0"], &["0", "exp(2*t1)"]]).unwrap();
    let rm = riemann(&g).unwrap();
    let origin = Point::origin(&c);
    // R^2_121 = Γ^2_12 Γ^2_21 = 1 and R^1_212 = e^{2 t1}
    let v = rm[1][0][1][0].evaluate(&origin).unwrap();
    assert!((v.abs() - 1.0).abs() < 1e-9);
    assert_eq!(rm[1][0][1][0], ScalarField::one(&c));
    assert_eq!(rm[0][1][0][1], sf("exp(2*t1)", &c));
    let pts = vec![origin];
    assert!((riemann_residual(&g, &pts).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn lie_derivative_examples() {
    let c = Chart::real(&["t1", "t2"]);
    let zero = ScalarField::zero(&c);
    let one = ScalarField::one(&c);
    let unit = VectorField::coordinate(&c, 0);
    // ∂1 unit, ∂2∘∂2 = ∂1
    let cst = vec![
        vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
        vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]],
    ];
    let m = Multiplication::new(&c, cst.clone(), unit).unwrap();
    let x = VectorField::parse(&c, &["2", "-1/3"]).unwrap();
    assert!(lie_derivative_mult(&x, &m).unwrap().iter().flatten().flatten().all(|v| v.is_zero()));

    let e = VectorField::radial(&c);
    let le = lie_derivative_mult(&e, &m).unwrap();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(le[k][i][j], cst[k][i][j]);
            }
        }
    }

    let g = Metric::parse(&c, &[&["2", "1"], &["1", "-3"]]).unwrap();
    let lg = lie_derivative_metric(&e, &g).unwrap();
    assert_eq!(lg, linalg::scale(g.matrix(), &ScalarField::int(&c, 2)));

    let rot = VectorField::parse(&c, &["-t2", "t1"]).unwrap();
    let lr = lie_derivative_metric(&rot, &Metric::euclidean(&c)).unwrap();
    assert!(linalg::is_zero(&lr));
}

#[test]
fn covariant_derivative_examples() {
    let c = Chart::real(&["t1", "t2"]);
    let g = Metric::euclidean(&c);
    let opts = CheckOpts::default();
    assert!(is_parallel(&g, &VectorField::parse(&c, &["3", "1/2"]).unwrap(), &opts).unwrap().pass());
    let x = VectorField::parse(&c, &["t1", "0"]).unwrap();
    let nx = covariant_derivative(&g, &x).unwrap();
    assert_eq!(nx, linalg::from_rationals(&c, &[vec![q(1), q(0)], vec![q(0), q(0)]]));
    assert!(!is_parallel(&g, &x, &opts).unwrap().pass());
}

fn f64_mat(m: &linalg::Mat, x: &[f64]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|v| eval_f64(v, x)).collect()).collect()
}

/// `d/ds ψ_s^* T` at `s = 0` for `ψ_s = id + s X`, by central differences.
fn lie_metric_flow(x: &VectorField, g: &Metric, p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let s = 1e-6;
    let xv: Vec<f64> = x.comps.iter().map(|c| eval_f64(c, p)).collect();
    let dx: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|i| eval_f64(&x.comps[a].diff(i), p)).collect()).collect();
    let pull = |t: f64| -> Vec<Vec<f64>> {
        let q: Vec<f64> = (0..n).map(|i| p[i] + t * xv[i]).collect();
        let gq = f64_mat(g.matrix(), &q);
        let jac = |a: usize, i: usize| if a == i { 1.0 } else { 0.0 } + t * dx[a][i];
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| gq[a][b] * jac(a, i) * jac(b, j)).sum()).collect())
            .collect()
    };
    let (gp, gm) = (pull(s), pull(-s));
    (0..n).map(|i| (0..n).map(|j| (gp[i][j] - gm[i][j]) / (2.0 * s)).collect()).collect()
}

fn lie_mult_flow(x: &VectorField, m: &Multiplication, p: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = p.len();
    let s = 1e-6;
    let xv: Vec<f64> = x.comps.iter().map(|c| eval_f64(c, p)).collect();
    let dx: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|i| eval_f64(&x.comps[a].diff(i), p)).collect()).collect();
    let pull = |t: f64| -> Vec<Vec<Vec<f64>>> {
        let q: Vec<f64> = (0..n).map(|i| p[i] + t * xv[i]).collect();
        let cq: Vec<Vec<Vec<f64>>> = m.constants().iter().map(|ck| f64_mat(ck, &q)).collect();
        let j: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|i| if a == i { 1.0 } else { 0.0 } + t * dx[a][i]).collect()).collect();
        let jinv = inv_f64(&j);
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|jj| {
                                let mut v = 0.0;
                                for l in 0..n {
                                    for a in 0..n {
                                        for b in 0..n {
                                            v += jinv[k][l] * cq[l][a][b] * j[a][i] * j[b][jj];
                                        }
                                    }
                                }
                                v
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let (cp, cm) = (pull(s), pull(-s));
    (0..n)
        .map(|k| (0..n).map(|i| (0..n).map(|j| (cp[k][i][j] - cm[k][i][j]) / (2.0 * s)).collect()).collect())
        .collect()
}

#[test]
fn lie_derivatives_match_flow_oracle() {
    let c = Chart::real(&["x", "y"]);
    let m = Multiplication::new(
        &c,
        vec![
            vec![vec![sf("x^3+y", &c), sf("x*y^2", &c)], vec![sf("x*y^2", &c), sf("2*y^3-x", &c)]],
            vec![vec![sf("y^2*x/2", &c), sf("1+x^2*y", &c)], vec![sf("1+x^2*y", &c), sf("x^3", &c)]],
        ],
        VectorField::coordinate(&c, 0),
    )
    .unwrap();
    let g = Metric::parse(&c, &[&["2+x^2", "x*y^3"], &["x*y^3", "1+y^2*x"]]).unwrap();
    let x = VectorField::parse(&c, &["x*y-1/2", "y^3+x^2"]).unwrap();
    let lc = lie_derivative_mult(&x, &m).unwrap();
    let lg = lie_derivative_metric(&x, &g).unwrap();
    let mut r = rng(5);
    for _ in 0..10 {
        let p = random_point(&mut r, &c);
        let pf = point_f64(&p);
        let oc = lie_mult_flow(&x, &m, &pf);
        let og = lie_metric_flow(&x, &g, &pf);
        for k in 0..2 {
            for i in 0..2 {
                assert!((eval_f64(&lg[k][i], &pf) - og[k][i]).abs() < 1e-5);
                for j in 0..2 {
                    assert!((eval_f64(&lc[k][i][j], &pf) - oc[k][i][j]).abs() < 1e-5);
                }
            }
        }
    }
}

fn random_metric(seed: u64, c: &Chart) -> Metric {
    let mut r = rng(seed);
    let n = c.dim();
    let mut g = linalg::zeros(c, n, n);
    for i in 0..n {
        for j in i..n {
            let v = ScalarField::from_poly(c, random_poly(&mut r, c.nvars(), 3, false, false));
            let v = if i == j { v + ScalarField::int(c, 4) } else { v };
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    Metric::new(c, g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn christoffel_is_metric_compatible(seed in 0u64..10_000) {
        let c = Chart::real(&["a", "b"]);
        let g = random_metric(seed, &c);
        prop_assume!(!g.det().is_zero());
        let gam = christoffel(&g).unwrap();
        let n = 2;
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = g.get(i, j).diff(a);
                    for m in 0..n {
                        s = s - gam[m][a][i].mul(g.get(m, j)) - gam[m][a][j].mul(g.get(i, m));
                    }
                    prop_assert!(s.is_zero());
                }
            }
        }
    }

    #[test]
    fn first_bianchi_identity(seed in 0u64..10_000) {
        let c = Chart::real(&["a", "b"]);
        let g = random_metric(seed, &c);
        prop_assume!(!g.det().is_zero());
        let r = riemann(&g).unwrap();
        for l in 0..2 { for i in 0..2 { for j in 0..2 { for k in 0..2 {
            let s = &r[l][i][j][k] + &r[l][j][k][i] + r[l][k][i][j].clone();
            prop_assert!(s.is_zero());
        }}}}
    }

    #[test]
    fn constant_metrics_are_flat(a in -5i64..5, d in 1i64..5) {
        let c = Chart::real(&["x", "y"]);
        prop_assume!(a * a != d * 7);
        let g = Metric::constant(&c, &[vec![q(d), q(a)], vec![q(a), q(7)]]).unwrap();
        prop_assert!(riemann(&g).unwrap().iter().flatten().flatten().flatten().all(|x| x.is_zero()));
    }

    #[test]
    fn lie_derivative_of_bracket(seed in 0u64..10_000) {
        let c = Chart::real(&["a", "b"]);
        let mut r = rng(seed);
        let x = VectorField::new(&c, (0..2).map(|_| ScalarField::from_poly(&c, random_poly(&mut r, 2, 3, false, false))).collect()).unwrap();
        let y = VectorField::new(&c, (0..2).map(|_| ScalarField::from_poly(&c, random_poly(&mut r, 2, 3, false, false))).collect()).unwrap();
        let g = random_metric(seed + 1, &c);
        let lxy = lie_derivative_metric(&x.bracket(&y), &g).unwrap();
        let ly = Metric::new(&c, lie_derivative_metric(&y, &g).unwrap()).unwrap();
        let lx = Metric::new(&c, lie_derivative_metric(&x, &g).unwrap()).unwrap();
        let comm = linalg::sub(&lie_derivative_metric(&x, &ly).unwrap(), &lie_derivative_metric(&y, &lx).unwrap());
        let p = random_point(&mut r, &c);
        for i in 0..2 { for j in 0..2 {
            let d = lxy[i][j].evaluate(&p).unwrap().sub(&comm[i][j].evaluate(&p).unwrap());
            prop_assert!(d.abs() < 1e-6);
        }}
    }
}
