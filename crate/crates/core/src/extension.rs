//! Constructions producing new Frobenius structures from a Frobenius base:
//! Legendre transformations, adding a variable, iterating that, and the
//! trivial-bundle extension `M × K^r` with its potential and Euler field.
//!
//! New fiber coordinates are named `tau1, tau2, …`.

use num_traits::{One, Zero};

use crate::error::{invalid, precondition, Error, Result};
use crate::frobenius::{check_euler, check_frobenius, from_potential, AlmostFrobenius, PotentialFrobenius};
use crate::linalg::{self, Mat};
use crate::report::{CheckOpts, Report};
use crate::scalar::{q, qr, Chart, ScalarField, C, Q};
use crate::tensor::{is_parallel, Metric, Multiplication, Tensor3, VectorField};

/// A constant finite-dimensional commutative associative unital algebra with an invariant metric.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusAlgebra {
    c: Vec<Vec<Vec<Q>>>,
    unit: Vec<Q>,
    gram: Vec<Vec<Q>>,
}

impl FrobeniusAlgebra {
    /// `c[k][i][j]` is the `k`-th component of `b_i ∘ b_j`.
    pub fn new(c: Vec<Vec<Vec<Q>>>, unit: Vec<Q>, gram: Vec<Vec<Q>>) -> Result<Self> {
        let r = unit.len();
        if r == 0 {
            return invalid("algebra of rank 0");
        }
        let square = |m: &Vec<Vec<Q>>| m.len() == r && m.iter().all(|row| row.len() == r);
        if c.len() != r || !c.iter().all(square) || !square(&gram) {
            return invalid(format!("algebra data must have rank {r}"));
        }
        let a = FrobeniusAlgebra { c, unit, gram };
        let basis = |i: usize| -> Vec<Q> { (0..r).map(|k| if k == i { Q::one() } else { Q::zero() }).collect() };
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if a.c[k][i][j] != a.c[k][j][i] {
                        return invalid(format!("algebra is not commutative at b{} b{}", i + 1, j + 1));
                    }
                }
                if a.gram[i][j] != a.gram[j][i] {
                    return invalid("algebra metric is not symmetric");
                }
            }
        }
        for i in 0..r {
            if a.product(&a.unit, &basis(i)) != basis(i) {
                return invalid(format!("unit does not fix b{}", i + 1));
            }
            for j in 0..r {
                let ij = a.product(&basis(i), &basis(j));
                for k in 0..r {
                    if a.product(&ij, &basis(k)) != a.product(&basis(i), &a.product(&basis(j), &basis(k))) {
                        return invalid(format!("algebra is not associative at b{} b{} b{}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                let ij = a.product(&basis(i), &basis(j));
                for k in 0..r {
                    if a.pair(&ij, &basis(k)) != a.pair(&basis(i), &a.product(&basis(j), &basis(k))) {
                        return invalid(format!("metric is not invariant at b{} b{} b{}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        if linalg::num::det(&to_num(&a.gram)).is_zero() {
            return invalid("algebra metric is degenerate");
        }
        Ok(a)
    }

    /// `K^r` with componentwise product and metric `diag(weights)`.
    pub fn diagonal(weights: &[Q]) -> Result<Self> {
        let r = weights.len();
        let mut c = vec![vec![vec![Q::zero(); r]; r]; r];
        let mut gram = vec![vec![Q::zero(); r]; r];
        for k in 0..r {
            c[k][k][k] = Q::one();
            gram[k][k] = weights[k].clone();
        }
        FrobeniusAlgebra::new(c, vec![Q::one(); r], gram)
    }

    /// `b_i ∘ b_j = b_min(i,j)` with unit `b_r`; `gram` must satisfy `g_ij = g_min(i,j),r`.
    pub fn min_algebra(gram: Vec<Vec<Q>>) -> Result<Self> {
        let r = gram.len();
        let mut c = vec![vec![vec![Q::zero(); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                c[i.min(j)][i][j] = Q::one();
            }
        }
        let mut unit = vec![Q::zero(); r];
        if r > 0 {
            unit[r - 1] = Q::one();
        }
        FrobeniusAlgebra::new(c, unit, gram)
    }

    pub fn rank(&self) -> usize {
        self.unit.len()
    }

    pub fn constants(&self) -> &Vec<Vec<Vec<Q>>> {
        &self.c
    }

    pub fn unit(&self) -> &[Q] {
        &self.unit
    }

    pub fn gram(&self) -> &Vec<Vec<Q>> {
        &self.gram
    }

    pub fn product(&self, v: &[Q], w: &[Q]) -> Vec<Q> {
        let r = self.rank();
        (0..r)
            .map(|k| {
                let mut s = Q::zero();
                for i in 0..r {
                    for j in 0..r {
                        if !self.c[k][i][j].is_zero() {
                            s += &self.c[k][i][j] * &v[i] * &w[j];
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn pair(&self, v: &[Q], w: &[Q]) -> Q {
        let mut s = Q::zero();
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                s += g * &v[i] * &w[j];
            }
        }
        s
    }
}

fn to_num(m: &[Vec<Q>]) -> crate::linalg::NMat {
    m.iter().map(|r| r.iter().map(|x| crate::scalar::Num::real(x.clone())).collect()).collect()
}

fn basis_vec(r: usize, i: usize) -> Vec<Q> {
    (0..r).map(|k| if k == i { Q::one() } else { Q::zero() }).collect()
}

/// A multiplicative functional `λ` on a [`FrobeniusAlgebra`] with `λ(e_V) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaFunctional {
    coeffs: Vec<Q>,
}

impl LambdaFunctional {
    pub fn new(coeffs: Vec<Q>, alg: &FrobeniusAlgebra) -> Result<Self> {
        let r = alg.rank();
        if coeffs.len() != r {
            return invalid(format!("functional needs {r} coefficients"));
        }
        let lam = LambdaFunctional { coeffs };
        if lam.apply(alg.unit()) != Q::one() {
            return invalid("functional does not take the value 1 on the unit");
        }
        for i in 0..r {
            for j in 0..r {
                let (bi, bj) = (basis_vec(r, i), basis_vec(r, j));
                if lam.apply(&alg.product(&bi, &bj)) != &lam.coeffs[i] * &lam.coeffs[j] {
                    return invalid(format!("functional is not multiplicative on b{} b{}", i + 1, j + 1));
                }
            }
        }
        Ok(lam)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn apply(&self, v: &[Q]) -> Q {
        self.coeffs.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    AddVariable,
    Iterate { r: usize },
    ClosedForm { r: usize },
    TrivialExtension { r: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    pub structure: AlmostFrobenius,
    pub potential: Option<ScalarField>,
    pub euler: Option<VectorField>,
    pub provenance: Provenance,
}

/// Parallelism of `X0` and invertibility of `v ↦ X0 ∘ v` at sample points.
pub fn check_legendre_field(a: &AlmostFrobenius, x0: &VectorField, opts: &CheckOpts) -> Result<Report> {
    if x0.chart() != a.chart() {
        return invalid("Legendre field on a different chart");
    }
    let par = is_parallel(&a.metric, x0, opts)?;
    let det = linalg::det(&a.mult.operator(x0), a.chart());
    let mut smallest = f64::INFINITY;
    for p in &par.points {
        smallest = smallest.min(det.evaluate(p)?.abs());
    }
    let mut rep = Report::new("legendre_field");
    rep.vanish("nabla_X0", par.residual("nabla_X"), opts.tol);
    rep.nonvanish("operator_det", smallest, opts.tol);
    rep.points = par.points;
    Ok(rep)
}

/// `g^{X0}(X, Y) = g(X0 ∘ X, X0 ∘ Y)`.
pub fn legendre_metric(a: &AlmostFrobenius, x0: &VectorField) -> Result<Metric> {
    if x0.chart() != a.chart() {
        return invalid("Legendre field on a different chart");
    }
    let m = a.mult.operator(x0);
    let g = linalg::mul(&linalg::transpose(&m), &linalg::mul(a.metric.matrix(), &m));
    Ok(Metric::new(a.chart(), g)?)
}

fn require_pass(rep: &Report, what: &str) -> Result<()> {
    if rep.pass() {
        Ok(())
    } else {
        precondition(format!("{what} fails: {}", rep.failed().join(", ")))
    }
}

/// First `tau<k>` name not already used by the chart.
fn next_tau(chart: &Chart) -> String {
    (1..).map(|k| format!("tau{k}")).find(|s| chart.index_of(s).is_none()).expect("unbounded")
}

/// Structure constants of the base re-expressed on `chart` (first `n` coordinates), padded with zeros.
fn embed_constants(a: &AlmostFrobenius, chart: &Chart) -> Result<Tensor3> {
    let n = a.dim();
    let m = chart.dim();
    let zero = ScalarField::zero(chart);
    let mut c = vec![vec![vec![zero; m]; m]; m];
    for (k, ck) in a.mult.constants().iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                c[k][i][j] = ck[i][j].embed(chart)?;
            }
        }
    }
    Ok(c)
}

fn embed_block(g: &Mat, chart: &Chart) -> Result<Mat> {
    let m = chart.dim();
    let mut out = linalg::zeros(chart, m, m);
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out[i][j] = x.embed(chart)?;
        }
    }
    Ok(out)
}

/// Exact rational value of a field that must be constant.
fn constant_q(f: &ScalarField, what: &str) -> Result<Q> {
    match f.as_constant() {
        Some(C { re, im }) if im.is_zero() => Ok(re),
        Some(_) => precondition(format!("{what} is not real")),
        None => precondition(format!("{what} is not constant: {f}")),
    }
}

fn add_variable_unchecked(a: &AlmostFrobenius, x0: &VectorField) -> Result<AlmostFrobenius> {
    let n = a.dim();
    let chart = a.chart().extend(&[next_tau(a.chart())])?;
    let t = n;
    let mut c = embed_constants(a, &chart)?;
    let one = ScalarField::one(&chart);
    for i in 0..n {
        c[i][i][t] = one.clone();
        c[i][t][i] = one.clone();
    }
    c[t][t][t] = one;
    let unit = VectorField::coordinate(&chart, t);

    let gx = legendre_metric(a, x0)?;
    let e = a.unit();
    let mut g = embed_block(gx.matrix(), &chart)?;
    let mut gee = ScalarField::zero(a.chart());
    for i in 0..n {
        let ge = (0..n).fold(ScalarField::zero(a.chart()), |s, j| s + gx.get(i, j).mul(&e.comps[j]));
        gee = gee + ge.mul(&e.comps[i]);
        let ge = ge.embed(&chart)?;
        g[i][t] = ge.clone();
        g[t][i] = ge;
    }
    g[t][t] = (gee + ScalarField::one(a.chart())).embed(&chart)?;
    AlmostFrobenius::new(Metric::new(&chart, g)?, Multiplication::new(&chart, c, unit)?)
}

/// Frobenius structure on `M × K` with unit `∂_τ`, built from a Legendre field `X0`.
pub fn add_variable(a: &AlmostFrobenius, x0: &VectorField, opts: &CheckOpts) -> Result<ExtensionResult> {
    require_pass(&check_legendre_field(a, x0, opts)?, "Legendre check")?;
    require_pass(&check_frobenius(a, opts)?, "Frobenius check of the base")?;
    Ok(ExtensionResult {
        structure: add_variable_unchecked(a, x0)?,
        potential: None,
        euler: None,
        provenance: Provenance::AddVariable,
    })
}

/// Add `fields.len()` variables in turn; `fields[k]` is a Legendre field on the `k`-th intermediate structure.
pub fn iterate(a: &AlmostFrobenius, fields: &[VectorField], opts: &CheckOpts) -> Result<ExtensionResult> {
    Ok(ExtensionResult {
        structure: iterate_steps(a, fields, opts)?.pop().expect("nonempty"),
        potential: None,
        euler: None,
        provenance: Provenance::Iterate { r: fields.len() },
    })
}

/// Base structure followed by each intermediate structure.
fn iterate_steps(a: &AlmostFrobenius, fields: &[VectorField], opts: &CheckOpts) -> Result<Vec<AlmostFrobenius>> {
    if fields.is_empty() {
        return invalid("iterate needs at least one Legendre field");
    }
    let mut steps = vec![a.clone()];
    for (k, z) in fields.iter().enumerate() {
        let cur = steps.last().expect("nonempty");
        if k > 0 {
            fiber_part(a.dim(), z)?;
        }
        let step = add_variable(cur, z, opts).map_err(|e| match e {
            Error::Precondition(m) => Error::Precondition(format!("step {}: {m}", k + 1)),
            e => e,
        })?;
        steps.push(step.structure);
    }
    Ok(steps)
}

/// Split `Z = Z^{TM} + Σ c_i ∂_{τi}` on an intermediate structure; returns `(Z^{TM}` on the base chart, `Σ c_i)`.
fn fiber_part(n: usize, z: &VectorField) -> Result<(Vec<ScalarField>, Q)> {
    let mut c = Q::zero();
    for (i, comp) in z.comps[n..].iter().enumerate() {
        c += constant_q(comp, &format!("fiber component {} of the Legendre field", i + 1))?;
    }
    if c.is_zero() {
        return precondition("fiber part of the Legendre field sums to zero (c ≠ 0 required)");
    }
    Ok((z.comps[..n].to_vec(), c))
}

/// Legendre field `Z0` on the base and coefficient matrix `g^{(r)}_ij` describing the
/// result of [`iterate`] in the closed form accepted by [`closed_form`].
pub fn iteration_data(a: &AlmostFrobenius, fields: &[VectorField], opts: &CheckOpts) -> Result<(VectorField, Vec<Vec<Q>>)> {
    let steps = iterate_steps(a, fields, opts)?;
    let n = a.dim();
    let base = a.chart();
    let mut z0 = fields[0].clone();
    let mut coeffs: Vec<Vec<Q>> = vec![];
    for (k, z) in fields.iter().enumerate() {
        let cur = &steps[k];
        let r = k + 1;
        let mut next = vec![vec![Q::zero(); r]; r];
        if k > 0 {
            let (ztm, c) = fiber_part(n, z)?;
            let ztm = ztm.iter().map(|f| f.restrict(base)).collect::<std::result::Result<Vec<_>, _>>()?;
            let shifted = VectorField::new(base, ztm)?.add(&a.unit().scale(&ScalarField::constant(base, c)));
            z0 = a.mult.product(&z0, &shifted);
            let cz: Vec<VectorField> =
                (0..k).map(|i| cur.mult.product(z, &VectorField::coordinate(cur.chart(), n + i))).collect();
            for i in 0..k {
                for j in 0..k {
                    next[i][j] = constant_q(&cur.metric.pair(&cz[i], &cz[j]), "iteration coefficient")?;
                }
                let g = constant_q(&cur.metric.pair(&cz[i], z), "iteration coefficient")?;
                next[i][k] = g.clone();
                next[k][i] = g;
            }
        }
        let zz = if k == 0 { legendre_metric(cur, z)?.pair(cur.unit(), cur.unit()) } else { cur.metric.pair(z, z) };
        next[k][k] = constant_q(&zz, "iteration coefficient")? + Q::one();
        coeffs = next;
    }
    Ok((z0, coeffs))
}

/// Check `g_ij = g_ji = g_{min(i,j), r}`.
pub fn check_relation_coefficients(coeffs: &[Vec<Q>]) -> Result<()> {
    let r = coeffs.len();
    if r == 0 || coeffs.iter().any(|row| row.len() != r) {
        return invalid("coefficients must form a nonempty square matrix");
    }
    for i in 0..r {
        for j in 0..r {
            if coeffs[i][j] != coeffs[j][i] || coeffs[i][j] != coeffs[i.min(j)][r - 1] {
                return invalid(format!(
                    "coefficient constraint g_ij = g_ji = g_(min(i,j),r) violated at i={}, j={}",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    Ok(())
}

/// The iterated structure on `M × K^r` written down directly from `Z0` and the coefficients.
pub fn closed_form(a: &AlmostFrobenius, z0: &VectorField, coeffs: &[Vec<Q>], opts: &CheckOpts) -> Result<ExtensionResult> {
    check_relation_coefficients(coeffs)?;
    require_pass(&check_legendre_field(a, z0, opts)?, "Legendre check")?;
    let n = a.dim();
    let r = coeffs.len();
    let mut chart = a.chart().clone();
    for _ in 0..r {
        chart = chart.extend(&[next_tau(&chart)])?;
    }
    let one = ScalarField::one(&chart);
    let mut c = embed_constants(a, &chart)?;
    for s in 0..r {
        for i in 0..n {
            c[i][i][n + s] = one.clone();
            c[i][n + s][i] = one.clone();
        }
        for t in 0..r {
            c[n + s.min(t)][n + s][n + t] = one.clone();
        }
    }
    let unit = VectorField::coordinate(&chart, n + r - 1);

    let gz = legendre_metric(a, z0)?;
    let mut g = embed_block(gz.matrix(), &chart)?;
    for i in 0..n {
        let ge = (0..n).fold(ScalarField::zero(a.chart()), |s, j| s + gz.get(i, j).mul(&a.unit().comps[j]));
        let ge = ge.embed(&chart)?;
        for s in 0..r {
            g[i][n + s] = ge.clone();
            g[n + s][i] = ge.clone();
        }
    }
    for s in 0..r {
        for t in 0..r {
            g[n + s][n + t] = ScalarField::constant(&chart, coeffs[s][t].clone());
        }
    }
    Ok(ExtensionResult {
        structure: AlmostFrobenius::new(Metric::new(&chart, g)?, Multiplication::new(&chart, c, unit)?)?,
        potential: None,
        euler: None,
        provenance: Provenance::ClosedForm { r },
    })
}

/// `E + Σ τ_k ∂_{τk}` on `chart`, whose first coordinates are those of `e`'s chart.
pub fn radial_extension(e: &VectorField, chart: &Chart) -> Result<VectorField> {
    let n = e.dim();
    let mut out = e.embed(chart, chart.dim() - n)?;
    for k in n..chart.dim() {
        out.comps[k] = ScalarField::var(chart, k);
    }
    Ok(out)
}

/// Frobenius structure on `M × K^r` from a potential-form base with Euler field `E` (`L_E g = 2g`),
/// a Frobenius algebra on `K^r` and a multiplicative functional.
pub fn extend_trivial(
    p: &PotentialFrobenius,
    e: &VectorField,
    alg: &FrobeniusAlgebra,
    lam: &LambdaFunctional,
    opts: &CheckOpts,
) -> Result<ExtensionResult> {
    let a = from_potential(p)?;
    require_pass(&check_frobenius(&a, opts)?, "Frobenius check of the base")?;
    require_pass(&check_euler(&a, e, &q(2), opts)?, "Euler check of the base")?;
    let n = a.dim();
    let r = alg.rank();
    if lam.coeffs().len() != r {
        return invalid("functional and algebra have different ranks");
    }
    let gee_field = a.metric.pair(a.unit(), a.unit());
    if (0..n).any(|i| !gee_field.diff(i).is_zero()) {
        return precondition("g(e, e) is not constant");
    }
    let gee = constant_q(&gee_field, "g(e, e)")?;
    let lc = lam.coeffs();
    let gmv: Vec<Vec<Q>> =
        (0..r).map(|s| (0..r).map(|t| &alg.gram()[s][t] - &gee * &lc[s] * &lc[t]).collect()).collect();
    if linalg::num::det(&to_num(&gmv)).is_zero() {
        return precondition("g_V - g(e,e) λ⊗λ is degenerate");
    }

    let mut chart = a.chart().clone();
    for _ in 0..r {
        chart = chart.extend(&[next_tau(&chart)])?;
    }
    let cst = |x: &Q| ScalarField::constant(&chart, x.clone());
    let mut c = embed_constants(&a, &chart)?;
    for s in 0..r {
        for i in 0..n {
            c[i][i][n + s] = cst(&lc[s]);
            c[i][n + s][i] = cst(&lc[s]);
        }
        for t in 0..r {
            for k in 0..r {
                c[n + k][n + s][n + t] = cst(&alg.constants()[k][s][t]);
            }
        }
    }
    let mut unit = VectorField::zero(&chart);
    for s in 0..r {
        unit.comps[n + s] = cst(&alg.unit()[s]);
    }

    let fm = &p.flat_metric;
    let u = p.unit_index;
    let mut g = linalg::zeros(&chart, n + r, n + r);
    for i in 0..n {
        for j in 0..n {
            g[i][j] = cst(&fm[i][j]);
        }
        for s in 0..r {
            let x = cst(&(&lc[s] * &fm[i][u]));
            g[i][n + s] = x.clone();
            g[n + s][i] = x;
        }
    }
    for s in 0..r {
        for t in 0..r {
            g[n + s][n + t] = cst(&alg.gram()[s][t]);
        }
    }
    let structure = AlmostFrobenius::new(Metric::new(&chart, g)?, Multiplication::new(&chart, c, unit)?)?;

    let f = trivial_potential(p, &chart, alg, lam)?;

    Ok(ExtensionResult {
        structure,
        potential: Some(f),
        euler: Some(radial_extension(e, &chart)?),
        provenance: Provenance::TrivialExtension { r },
    })
}

/// Potential of the trivial extension in the flat coordinates `(t, τ)`.
fn trivial_potential(p: &PotentialFrobenius, chart: &Chart, alg: &FrobeniusAlgebra, lam: &LambdaFunctional) -> Result<ScalarField> {
    let n = p.chart.dim();
    let r = alg.rank();
    let (fm, u, lc) = (&p.flat_metric, p.unit_index, lam.coeffs());
    let t = |i: usize| ScalarField::var(chart, i);
    let tau = |s: usize| ScalarField::var(chart, n + s);
    let mut lin_tau = ScalarField::zero(chart);
    for s in 0..r {
        lin_tau = lin_tau + tau(s).scale(&lc[s]);
    }
    let mut quad_t = ScalarField::zero(chart);
    let mut lin_t = ScalarField::zero(chart);
    for i in 0..n {
        lin_t = lin_t + t(i).scale(&fm[u][i]);
        for j in 0..n {
            quad_t = quad_t + t(i).mul(&t(j)).scale(&fm[i][j]);
        }
    }
    let mut quad_tau = ScalarField::zero(chart);
    let mut cubic_tau = ScalarField::zero(chart);
    for s in 0..r {
        for k in 0..r {
            let sk = alg.product(&basis_vec(r, s), &basis_vec(r, k));
            quad_tau = quad_tau + tau(s).mul(&tau(k)).scale(&lam.apply(&sk));
            for j in 0..r {
                cubic_tau = cubic_tau + tau(s).mul(&tau(k)).mul(&tau(j)).scale(&alg.pair(&sk, &basis_vec(r, j)));
            }
        }
    }
    Ok(p.potential.embed(chart)?
        + lin_tau.mul(&quad_t).scale(&qr(1, 2))
        + quad_tau.mul(&lin_t).scale(&qr(1, 2))
        + cubic_tau.scale(&qr(1, 6)))
}

/// Potential-form description of adding a variable with `X0 = e`: flat metric
/// `[[g, g e], [(g e)^T, g(e,e) + 1]]` and unit `∂_τ`.
pub fn add_variable_potential(p: &PotentialFrobenius) -> Result<PotentialFrobenius> {
    let n = p.chart.dim();
    let u = p.unit_index;
    let gee = p.flat_metric[u][u].clone();
    let alg = FrobeniusAlgebra::new(vec![vec![vec![Q::one()]]], vec![Q::one()], vec![vec![&gee + Q::one()]])?;
    let lam = LambdaFunctional::new(vec![Q::one()], &alg)?;
    let chart = p.chart.extend(&[next_tau(&p.chart)])?;
    let mut fm: Vec<Vec<Q>> = p.flat_metric.iter().map(|row| {
        let mut row = row.clone();
        row.push(row[u].clone());
        row
    }).collect();
    let mut last = p.flat_metric[u].clone();
    last.push(gee + Q::one());
    fm.push(last);
    let f = trivial_potential(p, &chart, &alg, &lam)?;
    PotentialFrobenius::new(&chart, fm, f, n)
}

/// `check_euler` with `d = 2` on an extension carrying an Euler field.
pub fn euler_check_extension(res: &ExtensionResult, opts: &CheckOpts) -> Result<Report> {
    match &res.euler {
        Some(e) => check_euler(&res.structure, e, &q(2), opts),
        None => invalid("extension carries no Euler field"),
    }
}
