#![allow(dead_code)]

use frobkit::bundle::BundleData;
use frobkit::frobenius::{from_potential, from_semisimple, AlmostFrobenius, PotentialFrobenius, SemisimpleData};
use frobkit::linalg::Mat;
use frobkit::tensor::Metric;
use frobkit::ttstar::{build_detailed_example, ExtensionTTData, RealStructure};
use frobkit::linalg;
use frobkit::scalar::{q, qr, Chart, ExpPoly, Point, ScalarField, Q};
use frobkit::scalar::poly::Key;
use num_complex::Complex;
use num_traits::{FromPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_q(r: &mut ChaCha8Rng) -> Q {
    let n = r.random_range(-9i64..=9);
    let d = r.random_range(1i64..=5);
    if n == 0 {
        qr(1, d)
    } else {
        qr(n, d)
    }
}

/// Random exp-polynomial with up to `max_terms` terms of degree at most 3.
pub fn random_poly(r: &mut ChaCha8Rng, nvars: usize, max_terms: usize, with_exp: bool, complex: bool) -> ExpPoly {
    let terms = r.random_range(1..=max_terms);
    let mut out = Vec::new();
    for _ in 0..terms {
        let mono: Vec<u32> = (0..nvars).map(|_| if r.random_bool(0.5) { r.random_range(0..=2) } else { 0 }).collect();
        let form = if with_exp && r.random_bool(0.3) {
            (0..nvars).map(|_| qr(r.random_range(-2i64..=2), r.random_range(1i64..=2))).collect()
        } else {
            Vec::new()
        };
        let im = if complex && r.random_bool(0.3) { small_q(r) } else { Q::zero() };
        out.push((Key { mono, form: canon(form) }, Complex::new(small_q(r), im)));
    }
    ExpPoly::from_terms(nvars, out)
}

fn canon(v: Vec<Q>) -> Vec<Q> {
    if v.iter().all(|x| x.is_zero()) {
        Vec::new()
    } else {
        v
    }
}

/// Random field: a polynomial, or a fraction whose denominator has a constant term.
pub fn random_field(r: &mut ChaCha8Rng, chart: &Chart, with_exp: bool) -> ScalarField {
    let n = chart.nvars();
    let num = random_poly(r, n, 4, with_exp, chart.is_complex());
    if r.random_bool(0.3) {
        return ScalarField::from_poly(chart, num);
    }
    let mut den = random_poly(r, n, 2, with_exp, false);
    den = den.add(&ExpPoly::constant(n, Complex::new(q(r.random_range(3..=7)), Q::zero())));
    if den.is_zero() {
        den = ExpPoly::one(n);
    }
    ScalarField::from_parts(chart, num, den)
}

pub fn random_point(r: &mut ChaCha8Rng, chart: &Chart) -> Point {
    let coords = (0..chart.dim())
        .map(|_| {
            let d = r.random_range(1i64..=16);
            Complex::new(qr(r.random_range(-d..=d), d), Q::zero())
        })
        .collect();
    Point::new(chart, coords).unwrap()
}

pub fn eval_f64(f: &ScalarField, x: &[f64]) -> f64 {
    let coords = x.iter().map(|v| Complex::new(Q::from_f64(*v).unwrap(), Q::zero())).collect();
    let p = Point::new(f.chart(), coords).unwrap();
    f.evaluate(&p).unwrap().re_f64()
}

pub fn point_f64(p: &Point) -> Vec<f64> {
    p.coords.iter().map(|c| frobkit::scalar::num::q_to_f64(&c.re)).collect()
}

pub fn inv_f64(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] -= f * a[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

pub fn antidiag3() -> Vec<Vec<Q>> {
    vec![vec![q(0), q(0), q(1)], vec![q(0), q(1), q(0)], vec![q(1), q(0), q(0)]]
}

pub fn offdiag2() -> Vec<Vec<Q>> {
    vec![vec![q(0), q(1)], vec![q(1), q(0)]]
}

/// Quartic `f(t2, t3)` solving `f_333 = f_223^2 − f_222 f_233`, found with a CAS
/// by an ansatz over all quartics in `(t2, t3)`; frozen here.
pub const WDVV_QUARTIC: &str = "t2^4+2*t2^3*t3+3/2*t2^2*t3^2+1/2*t2*t3^3-1/16*t2*t3^2+1/16*t3^4";

pub fn cubic_base() -> PotentialFrobenius {
    let c = Chart::real(&["t"]);
    PotentialFrobenius::parse(&c, vec![vec![q(1)]], "t^3/6", 0).unwrap()
}

pub fn n3_base(perturb: bool) -> PotentialFrobenius {
    let c = Chart::real(&["t1", "t2", "t3"]);
    let mut f = format!("t1^2*t3/2+t1*t2^2/2+{WDVV_QUARTIC}");
    if perturb {
        f.push_str("+3/7*t2^2*t3^2");
    }
    PotentialFrobenius::parse(&c, antidiag3(), &f, 0).unwrap()
}

/// Homogeneous cubic on a Euclidean plane with unit `∂_t1`; the radial field is Euler with `d = 2`
/// and `g(e, e) = 1`.
pub fn plane_base() -> PotentialFrobenius {
    let c = Chart::real(&["t1", "t2"]);
    PotentialFrobenius::parse(&c, vec![vec![q(1), q(0)], vec![q(0), q(1)]], "t1^3/6+t1*t2^2/2+t2^3/3", 0).unwrap()
}

pub fn mat(c: &Chart, rows: &[&[&str]]) -> Mat {
    rows.iter().map(|r| r.iter().map(|s| ScalarField::parse(s, c).unwrap()).collect()).collect()
}

pub fn fields(c: &Chart, xs: &[&str]) -> Vec<ScalarField> {
    xs.iter().map(|s| ScalarField::parse(s, c).unwrap()).collect()
}

/// Symmetric structure constants from `(k, i, j, value)` entries.
pub fn constants(c: &Chart, r: usize, entries: &[(usize, usize, usize, &str)]) -> Vec<Mat> {
    let mut t = vec![vec![vec![ScalarField::zero(c); r]; r]; r];
    for (k, i, j, s) in entries {
        t[*k][*i][*j] = ScalarField::parse(s, c).unwrap();
        t[*k][*j][*i] = ScalarField::parse(s, c).unwrap();
    }
    t
}

pub fn flat_connection(c: &Chart, r: usize) -> Vec<Mat> {
    vec![vec![vec![ScalarField::zero(c); r]; r]; c.dim()]
}

/// Positive metric potential on `[-1, 1]^2` with `η_12 = -1`; the semisimple structure is Frobenius.
pub const ETA_FLAT: &str = "3*u1+5*u2+(u1-u2)^2/2";

pub fn eta_flat() -> SemisimpleData {
    SemisimpleData::parse(&Chart::real(&["u1", "u2"]), ETA_FLAT).unwrap()
}

/// Rank-1 trivial bundle over the cubic base with `α = e_V* ⊗ e_M` and `g_V = g(e, e) + 1`.
pub fn add_variable_bundle() -> BundleData {
    let a = from_potential(&cubic_base()).unwrap();
    let c = a.chart().clone();
    BundleData::new(a, flat_connection(&c, 1), constants(&c, 1, &[(0, 0, 0, "1")]), fields(&c, &["1"]), mat(&c, &[&["2"]]), mat(&c, &[&["1"]]))
        .unwrap()
        .with_fiber_names(&["tau1"])
        .unwrap()
}

/// Rank-2 trivial bundle with diagonal fiber algebra over a semisimple base; `alpha` rows are canonical components.
pub fn semisimple_bundle(base: &AlmostFrobenius, alpha: &[&[&str]]) -> BundleData {
    let c = base.chart().clone();
    BundleData::new(
        base.clone(),
        flat_connection(&c, 2),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 1, 1, "1")]),
        fields(&c, &["1", "1"]),
        mat(&c, &[&["10", "0"], &["0", "10"]]),
        mat(&c, alpha),
    )
    .unwrap()
}

pub fn eta_flat_base() -> AlmostFrobenius {
    from_semisimple(&eta_flat()).unwrap()
}

/// `α = λ ⊗ e_M` with `λ(f1) = 1`, `λ(f2) = 0`.
pub const KEY_ALPHA: &[&[&str]] = &[&["1", "0"], &["1", "0"]];
/// `α(f_k) = ∂_{u^k}`: unequal canonical coefficients.
pub const IDENTITY_ALPHA: &[&[&str]] = &[&["1", "0"], &["0", "1"]];
pub const SWAPPED_ALPHA: &[&[&str]] = &[&["0", "1"], &["1", "0"]];

/// The semisimple rank-2 data written in the non-constant parallel frame `[[1, u1], [0, 1]]`.
pub fn gauge_bundle(alpha: &[&[&str]]) -> BundleData {
    let base = eta_flat_base();
    let c = base.chart().clone();
    BundleData::from_parallel_frame(
        base,
        mat(&c, &[&["1", "u1"], &["0", "1"]]),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 1, 1, "1")]),
        fields(&c, &["1", "1"]),
        mat(&c, &[&["10", "0"], &["0", "10"]]),
        mat(&c, alpha),
    )
    .unwrap()
}

/// Noncommuting constant connection matrices over the Euclidean plane with diagonal multiplication.
pub fn curved_bundle() -> BundleData {
    let u = Chart::real(&["u1", "u2"]);
    let base = from_semisimple(&SemisimpleData::parse(&u, "u1+u2").unwrap()).unwrap();
    BundleData::new(
        base,
        vec![mat(&u, &[&["0", "1"], &["0", "0"]]), mat(&u, &[&["0", "0"], &["1", "0"]])],
        constants(&u, 2, &[(0, 0, 0, "1"), (1, 1, 1, "1")]),
        fields(&u, &["1", "1"]),
        mat(&u, &[&["10", "0"], &["0", "10"]]),
        mat(&u, IDENTITY_ALPHA),
    )
    .unwrap()
}

/// Base `K[x]/(x^3)`; fiber `{e, n}` with `n^2 = 0` and `α(n) = t3 ∂_3`, so `L_{α(n)}(∘) ≠ 0`
/// while `[e_M, α(n)] = 0`.
pub fn lie_broken_bundle() -> BundleData {
    let c = Chart::real(&["t1", "t2", "t3"]);
    let p = PotentialFrobenius::parse(&c, antidiag3(), "t1^2*t3/2+t1*t2^2/2", 0).unwrap();
    BundleData::new(
        from_potential(&p).unwrap(),
        flat_connection(&c, 2),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 0, 1, "1")]),
        fields(&c, &["1", "0"]),
        mat(&c, &[&["1", "3"], &["3", "0"]]),
        mat(&c, &[&["1", "0"], &["0", "0"], &["0", "t3"]]),
    )
    .unwrap()
}

/// Cubic base; fiber `{e, n}` with `n^2 = t n`, which is not parallel for the trivial connection.
pub fn closure_broken_bundle() -> BundleData {
    let a = from_potential(&cubic_base()).unwrap();
    let c = a.chart().clone();
    BundleData::new(
        a,
        flat_connection(&c, 2),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 0, 1, "1"), (1, 1, 1, "t")]),
        fields(&c, &["1", "0"]),
        mat(&c, &[&["1", "1"], &["1", "t"]]),
        mat(&c, &[&["1", "0"]]),
    )
    .unwrap()
}

/// Rank-1 bundle over the cubic base with `g_V = 2 + t`.
pub fn varying_gram_bundle() -> BundleData {
    let a = from_potential(&cubic_base()).unwrap();
    let c = a.chart().clone();
    BundleData::new(a, flat_connection(&c, 1), constants(&c, 1, &[(0, 0, 0, "1")]), fields(&c, &["1"]), mat(&c, &[&["2+t"]]), mat(&c, &[&["1"]]))
        .unwrap()
}

/// Diagonal multiplication with the invariant metric `diag(2 + u2, 1)`, whose coidentity is not closed.
pub fn open_coidentity_bundle() -> BundleData {
    let u = Chart::real(&["u1", "u2"]);
    let base = from_semisimple(&SemisimpleData::parse(&u, "u1+u2").unwrap())
        .unwrap()
        .with_metric(Metric::parse(&u, &[&["2+u2", "0"], &["0", "1"]]).unwrap());
    BundleData::new(base, flat_connection(&u, 1), constants(&u, 1, &[(0, 0, 0, "1")]), fields(&u, &["1"]), mat(&u, &[&["5"]]), mat(&u, &[&["1"], &["1"]]))
        .unwrap()
}

/// Base `t1^2 t2 / 2` with nilpotent `∂_2`; fiber `{e, n}`, `n^2 = 0`, `α(n) = f(t2) ∂_2`.
pub fn nilpotent_bundle(f: &str) -> BundleData {
    let c = Chart::real(&["t1", "t2"]);
    let p = PotentialFrobenius::parse(&c, offdiag2(), "t1^2*t2/2", 0).unwrap();
    BundleData::new(
        from_potential(&p).unwrap(),
        flat_connection(&c, 2),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 0, 1, "1")]),
        fields(&c, &["1", "0"]),
        mat(&c, &[&["1", "3"], &["3", "0"]]),
        mat(&c, &[&["1", "0"], &["0", f]]),
    )
    .unwrap()
}

/// One-dimensional base `t^3/6` on a complex line: trivial algebra, `g = 1`.
pub fn complex_line() -> AlmostFrobenius {
    let c = Chart::complex(&["t"]);
    from_potential(&PotentialFrobenius::parse(&c, vec![vec![q(1)]], "t^3/6", 0).unwrap()).unwrap()
}

pub fn semisimple_complex(eta: &str) -> SemisimpleData {
    SemisimpleData::parse(&Chart::complex(&["u1", "u2"]), eta).unwrap()
}

pub fn detailed_tt(eta: &str, k0: i64) -> ExtensionTTData {
    build_detailed_example(&semisimple_complex(eta), &q(k0)).unwrap()
}

/// Rank-1 trivial fiber over the complex line with `g_V = 2`, `α = 1`, `k_V = k_M = 1`.
pub fn rank1_tt() -> ExtensionTTData {
    let base = complex_line();
    let c = base.chart().clone();
    let b = BundleData::new(base, flat_connection(&c, 1), constants(&c, 1, &[(0, 0, 0, "1")]), fields(&c, &["1"]), mat(&c, &[&["2"]]), mat(&c, &[&["1"]]))
        .unwrap();
    let k = RealStructure::new(linalg::identity(&c, 1)).unwrap();
    ExtensionTTData::new(b, k.clone(), k).unwrap()
}

/// Nilpotent fiber `{e, n}` over the complex line with `α = e* ⊗ ∂_t`, `g_V = [[a, b], [b, 0]]`
/// and `k_V = [[1, 0], [(ā − a) / 2b, b̄ / b]]`; condition (ii) holds iff `b` is constant.
pub fn nilpotent_tt(a: &str, b: &str) -> ExtensionTTData {
    let base = complex_line();
    let c = base.chart().clone();
    let bd = BundleData::new(
        base,
        flat_connection(&c, 2),
        constants(&c, 2, &[(0, 0, 0, "1"), (1, 0, 1, "1")]),
        fields(&c, &["1", "0"]),
        mat(&c, &[&[a, b], &[b, "0"]]),
        mat(&c, &[&["1", "0"]]),
    )
    .unwrap();
    let (av, bv) = (ScalarField::parse(a, &c).unwrap(), ScalarField::parse(b, &c).unwrap());
    let x = (av.conj() - av).checked_div(&bv.scale(&q(2))).unwrap();
    let y = bv.conj().checked_div(&bv).unwrap();
    let kv = RealStructure::new(vec![vec![ScalarField::one(&c), ScalarField::zero(&c)], vec![x, y]]).unwrap();
    let km = RealStructure::new(linalg::identity(&c, 1)).unwrap();
    ExtensionTTData::new(bd, km, kv).unwrap()
}

/// Rank-1 trivial fiber over the quartic WDVV base with `k_M = Id`; only the base tt*-equations fail.
pub fn quartic_tt() -> ExtensionTTData {
    let c = Chart::complex(&["t1", "t2", "t3"]);
    let p = PotentialFrobenius::parse(&c, antidiag3(), &format!("t1^2*t3/2+t1*t2^2/2+{WDVV_QUARTIC}"), 0).unwrap();
    let b = BundleData::new(
        from_potential(&p).unwrap(),
        flat_connection(&c, 1),
        constants(&c, 1, &[(0, 0, 0, "1")]),
        fields(&c, &["1"]),
        mat(&c, &[&["2"]]),
        mat(&c, &[&["1"], &["0"], &["0"]]),
    )
    .unwrap();
    let km = RealStructure::new(linalg::identity(&c, 3)).unwrap();
    let kv = RealStructure::new(linalg::identity(&c, 1)).unwrap();
    ExtensionTTData::new(b, km, kv).unwrap()
}
