//! Metrics, vector fields and multiplication tensors on a chart, with exact
//! symbolic operations and pointwise evaluation of derivative jets.
//!
//! Index conventions: `c[k][i][j]` is `c^k_ij`, `gamma[k][i][j]` is `Γ^k_ij`,
//! `riemann[l][i][j][k]` is `dx^l(R(∂_i, ∂_j) ∂_k)` with `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
//! On complex charts all indices range over the holomorphic coordinates.

use thiserror::Error;

use crate::linalg::{self, Mat, NMat};
use crate::report::{sample_points, CheckOpts, Report, SampleError};
use crate::scalar::{Chart, EvalError, Num, ParseError, Point, ScalarField, Q};

pub type Tensor3 = Vec<Vec<Vec<ScalarField>>>;
pub type Tensor4 = Vec<Vec<Vec<Vec<ScalarField>>>>;
pub type N3 = Vec<Vec<Vec<Num>>>;
pub type N4 = Vec<Vec<Vec<Vec<Num>>>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("metric is degenerate as a field (determinant identically zero)")]
    Degenerate,
    #[error("metric is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("multiplication is not commutative at c^{0}_{1}{2}")]
    NotCommutative(usize, usize, usize),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("expected {want} components, got {got}")]
    Dimension { want: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

fn check_square(m: &Mat, n: usize) -> Result<(), TensorError> {
    if m.len() != n {
        return Err(TensorError::Dimension { want: n, got: m.len() });
    }
    for r in m {
        if r.len() != n {
            return Err(TensorError::Dimension { want: n, got: r.len() });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    chart: Chart,
    g: Mat,
}

impl Metric {
    pub fn new(chart: &Chart, g: Mat) -> Result<Metric, TensorError> {
        let n = chart.dim();
        check_square(&g, n)?;
        for i in 0..n {
            for j in i + 1..n {
                if g[i][j] != g[j][i] {
                    return Err(TensorError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Metric { chart: chart.clone(), g })
    }

    pub fn constant(chart: &Chart, rows: &[Vec<Q>]) -> Result<Metric, TensorError> {
        Metric::new(chart, linalg::from_rationals(chart, rows))
    }

    pub fn parse(chart: &Chart, rows: &[&[&str]]) -> Result<Metric, TensorError> {
        let g = rows
            .iter()
            .map(|r| r.iter().map(|s| ScalarField::parse(s, chart)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Mat, _>>()?;
        Metric::new(chart, g)
    }

    pub fn euclidean(chart: &Chart) -> Metric {
        Metric { chart: chart.clone(), g: linalg::identity(chart, chart.dim()) }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn matrix(&self) -> &Mat {
        &self.g
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.g[i][j]
    }

    pub fn det(&self) -> ScalarField {
        linalg::det(&self.g, &self.chart)
    }

    pub fn inverse(&self) -> Result<Mat, TensorError> {
        linalg::inverse(&self.g, &self.chart).ok_or(TensorError::Degenerate)
    }

    pub fn scaled(&self, s: &ScalarField) -> Metric {
        Metric { chart: self.chart.clone(), g: linalg::scale(&self.g, s) }
    }

    /// `g(X, Y)` as a field.
    pub fn pair(&self, x: &VectorField, y: &VectorField) -> ScalarField {
        let mut s = ScalarField::zero(&self.chart);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.g[i][j].is_zero() && !x.comps[i].is_zero() && !y.comps[j].is_zero() {
                    s = s + self.g[i][j].mul(&x.comps[i]).mul(&y.comps[j]);
                }
            }
        }
        s
    }

    pub fn embed(&self, chart: &Chart) -> Result<Mat, EvalError> {
        linalg::embed(&self.g, chart)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    pub comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<ScalarField>) -> Result<VectorField, TensorError> {
        if comps.len() != chart.dim() {
            return Err(TensorError::Dimension { want: chart.dim(), got: comps.len() });
        }
        Ok(VectorField { chart: chart.clone(), comps })
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<VectorField, TensorError> {
        let c = comps.iter().map(|s| ScalarField::parse(s, chart)).collect::<Result<Vec<_>, _>>()?;
        VectorField::new(chart, c)
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField { chart: chart.clone(), comps: vec![ScalarField::zero(chart); chart.dim()] }
    }

    /// Coordinate field `∂_i`.
    pub fn coordinate(chart: &Chart, i: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.comps[i] = ScalarField::one(chart);
        v
    }

    /// `Σ x^i ∂_i`.
    pub fn radial(chart: &Chart) -> VectorField {
        VectorField { chart: chart.clone(), comps: (0..chart.dim()).map(|i| ScalarField::var(chart, i)).collect() }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &ScalarField) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().map(|a| a * s).collect() }
    }

    /// Apply the derivation to a function.
    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let mut s = ScalarField::zero(&self.chart);
        for (i, x) in self.comps.iter().enumerate() {
            if !x.is_zero() {
                s = s + x.mul(&f.diff(i));
            }
        }
        s
    }

    pub fn bracket(&self, o: &VectorField) -> VectorField {
        let comps = (0..self.dim()).map(|k| self.apply(&o.comps[k]) - o.apply(&self.comps[k])).collect();
        VectorField { chart: self.chart.clone(), comps }
    }

    pub fn embed(&self, chart: &Chart, extra: usize) -> Result<VectorField, EvalError> {
        let mut comps = self.comps.iter().map(|c| c.embed(chart)).collect::<Result<Vec<_>, _>>()?;
        comps.extend((0..extra).map(|_| ScalarField::zero(chart)));
        Ok(VectorField { chart: chart.clone(), comps })
    }
}

/// Structure constants `c^k_ij` of a commutative multiplication together with its unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplication {
    chart: Chart,
    c: Tensor3,
    unit: VectorField,
}

impl Multiplication {
    pub fn new(chart: &Chart, c: Tensor3, unit: VectorField) -> Result<Multiplication, TensorError> {
        let n = chart.dim();
        if c.len() != n || unit.dim() != n {
            return Err(TensorError::Dimension { want: n, got: c.len() });
        }
        for ck in &c {
            check_square(ck, n)?;
        }
        if unit.chart != *chart {
            return Err(TensorError::ChartMismatch);
        }
        for (k, ck) in c.iter().enumerate() {
            for i in 0..n {
                for j in i + 1..n {
                    if ck[i][j] != ck[j][i] {
                        return Err(TensorError::NotCommutative(k, i, j));
                    }
                }
            }
        }
        Ok(Multiplication { chart: chart.clone(), c, unit })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.c
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        &self.c[k][i][j]
    }

    pub fn unit(&self) -> &VectorField {
        &self.unit
    }

    pub fn with_unit(&self, unit: VectorField) -> Multiplication {
        Multiplication { chart: self.chart.clone(), c: self.c.clone(), unit }
    }

    /// `X ∘ Y`.
    pub fn product(&self, x: &VectorField, y: &VectorField) -> VectorField {
        let n = self.dim();
        let mut out = VectorField::zero(&self.chart);
        for i in 0..n {
            if x.comps[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y.comps[j].is_zero() {
                    continue;
                }
                let xy = x.comps[i].mul(&y.comps[j]);
                for k in 0..n {
                    if !self.c[k][i][j].is_zero() {
                        out.comps[k] = &out.comps[k] + &self.c[k][i][j].mul(&xy);
                    }
                }
            }
        }
        out
    }

    /// Matrix of `v ↦ X ∘ v`, entry `[k][j]`.
    pub fn operator(&self, x: &VectorField) -> Mat {
        let n = self.dim();
        let mut m = linalg::zeros(&self.chart, n, n);
        for k in 0..n {
            for j in 0..n {
                let mut s = ScalarField::zero(&self.chart);
                for i in 0..n {
                    if !x.comps[i].is_zero() && !self.c[k][i][j].is_zero() {
                        s = s + self.c[k][i][j].mul(&x.comps[i]);
                    }
                }
                m[k][j] = s;
            }
        }
        m
    }

    /// Matrix of `φ_i = −∂_i ∘`, entry `[k][j]`.
    pub fn higgs(&self, i: usize) -> Mat {
        let n = self.dim();
        (0..n).map(|k| (0..n).map(|j| self.c[k][i][j].neg()).collect()).collect()
    }
}

/// Christoffel symbols of the Levi-Civita connection.
pub fn christoffel(g: &Metric) -> Result<Tensor3, TensorError> {
    let n = g.dim();
    let ginv = g.inverse()?;
    let dg: Vec<Mat> = (0..n).map(|a| g.g.iter().map(|r| r.iter().map(|x| x.diff(a)).collect()).collect()).collect();
    let zero = ScalarField::zero(&g.chart);
    let half = Q::new(1.into(), 2.into());
    let mut first = vec![vec![vec![zero.clone(); n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = (&dg[i][l][j] + &dg[j][l][i] - dg[l][i][j].clone()).scale(&half);
                first[l][i][j] = v.clone();
                first[l][j][i] = v;
            }
        }
    }
    let mut out = vec![vec![vec![zero.clone(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = zero.clone();
                for l in 0..n {
                    if !ginv[k][l].is_zero() && !first[l][i][j].is_zero() {
                        s = s + ginv[k][l].mul(&first[l][i][j]);
                    }
                }
                out[k][i][j] = s.clone();
                out[k][j][i] = s;
            }
        }
    }
    Ok(out)
}

/// Riemann tensor `R^l_ijk` computed symbolically from [`christoffel`].
pub fn riemann(g: &Metric) -> Result<Tensor4, TensorError> {
    let n = g.dim();
    let gam = christoffel(g)?;
    let zero = ScalarField::zero(&g.chart);
    let mut out = vec![vec![vec![vec![zero.clone(); n]; n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    let mut s = gam[l][j][k].diff(i) - gam[l][i][k].diff(j);
                    for m in 0..n {
                        s = s + gam[l][i][m].mul(&gam[m][j][k]) - gam[l][j][m].mul(&gam[m][i][k]);
                    }
                    out[l][i][j][k] = s;
                }
            }
        }
    }
    Ok(out)
}

fn same_chart(a: &Chart, b: &Chart) -> Result<(), TensorError> {
    if a == b {
        Ok(())
    } else {
        Err(TensorError::ChartMismatch)
    }
}

/// `(L_X c)^k_ij = X(c^k_ij) − c^m_ij ∂_m X^k + c^k_mj ∂_i X^m + c^k_im ∂_j X^m`.
pub fn lie_derivative_mult(x: &VectorField, c: &Multiplication) -> Result<Tensor3, TensorError> {
    same_chart(&x.chart, &c.chart)?;
    let n = c.dim();
    let dx: Vec<Vec<ScalarField>> = (0..n).map(|m| (0..n).map(|k| x.comps[k].diff(m)).collect()).collect();
    let mut out = c.c.clone();
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = x.apply(&c.c[k][i][j]);
                for m in 0..n {
                    s = s - c.c[m][i][j].mul(&dx[m][k]) + c.c[k][m][j].mul(&dx[i][m]) + c.c[k][i][m].mul(&dx[j][m]);
                }
                out[k][i][j] = s.clone();
                out[k][j][i] = s;
            }
        }
    }
    Ok(out)
}

/// `(L_X g)_ij = X(g_ij) + g_mj ∂_i X^m + g_im ∂_j X^m`.
pub fn lie_derivative_metric(x: &VectorField, g: &Metric) -> Result<Mat, TensorError> {
    same_chart(&x.chart, &g.chart)?;
    let n = g.dim();
    let mut out = g.g.clone();
    for i in 0..n {
        for j in i..n {
            let mut s = x.apply(&g.g[i][j]);
            for m in 0..n {
                s = s + g.g[m][j].mul(&x.comps[m].diff(i)) + g.g[i][m].mul(&x.comps[m].diff(j));
            }
            out[i][j] = s.clone();
            out[j][i] = s;
        }
    }
    Ok(out)
}

/// `(∇X)[k][i] = ∂_i X^k + Γ^k_im X^m`.
pub fn covariant_derivative(g: &Metric, x: &VectorField) -> Result<Mat, TensorError> {
    same_chart(&x.chart, &g.chart)?;
    let n = g.dim();
    let gam = christoffel(g)?;
    let mut out = linalg::zeros(&g.chart, n, n);
    for k in 0..n {
        for i in 0..n {
            let mut s = x.comps[k].diff(i);
            for m in 0..n {
                if !gam[k][i][m].is_zero() && !x.comps[m].is_zero() {
                    s = s + gam[k][i][m].mul(&x.comps[m]);
                }
            }
            out[k][i] = s;
        }
    }
    Ok(out)
}

/// First (and optionally second) derivatives of the metric components, prepared once.
pub struct MetricJets {
    n: usize,
    g: Mat,
    dg: Vec<Mat>,
    ddg: Option<Vec<Vec<Mat>>>,
}

/// Metric data at one point.
pub struct MetricAt {
    pub g: NMat,
    pub ginv: NMat,
    pub dg: Vec<NMat>,
    pub gamma: N3,
    pub dgamma: Option<N4>,
}

fn d_mat(m: &Mat, a: usize) -> Mat {
    m.iter().map(|r| r.iter().map(|x| x.diff(a)).collect()).collect()
}

impl MetricJets {
    pub fn new(g: &Metric, second: bool) -> MetricJets {
        let n = g.dim();
        let dg: Vec<Mat> = (0..n).map(|a| d_mat(&g.g, a)).collect();
        let ddg = second.then(|| (0..n).map(|a| (0..n).map(|b| d_mat(&dg[a], b)).collect()).collect());
        MetricJets { n, g: g.g.clone(), dg, ddg }
    }

    pub fn at(&self, vals: &[Num]) -> Result<MetricAt, EvalError> {
        let n = self.n;
        let g = linalg::eval(&self.g, vals)?;
        let ginv = linalg::num::inverse(&g)?;
        let dg: Vec<NMat> = self.dg.iter().map(|m| linalg::eval(m, vals)).collect::<Result<_, _>>()?;
        let half = Num::real(Q::new(1.into(), 2.into()));
        // first kind: first[l][i][j]
        let first = |dg: &Vec<NMat>, l: usize, i: usize, j: usize| -> Num {
            (&dg[i][l][j] + &dg[j][l][i] - dg[l][i][j].clone()).mul(&half)
        };
        let mut fk = vec![vec![vec![Num::zero(); n]; n]; n];
        for (l, fl) in fk.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    fl[i][j] = first(&dg, l, i, j);
                }
            }
        }
        let raise = |ginv: &NMat, fk: &N3| -> N3 {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| (0..n).map(|j| (0..n).fold(Num::zero(), |s, l| s + ginv[k][l].mul(&fk[l][i][j]))).collect())
                        .collect()
                })
                .collect()
        };
        let gamma = raise(&ginv, &fk);
        let dgamma = match &self.ddg {
            None => None,
            Some(ddg) => {
                let ddg: Vec<Vec<NMat>> = ddg
                    .iter()
                    .map(|r| r.iter().map(|m| linalg::eval(m, vals)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<_, _>>()?;
                let mut out = Vec::with_capacity(n);
                for a in 0..n {
                    // ∂_a g^{-1} = −g^{-1} (∂_a g) g^{-1}
                    let dginv = linalg::num::neg(&linalg::num::mul(&linalg::num::mul(&ginv, &dg[a]), &ginv));
                    let dg_a: Vec<NMat> = (0..n).map(|b| ddg[b][a].clone()).collect();
                    let mut dfk = vec![vec![vec![Num::zero(); n]; n]; n];
                    for (l, fl) in dfk.iter_mut().enumerate() {
                        for i in 0..n {
                            for j in 0..n {
                                fl[i][j] = first(&dg_a, l, i, j);
                            }
                        }
                    }
                    let t1 = raise(&dginv, &fk);
                    let t2 = raise(&ginv, &dfk);
                    out.push(
                        (0..n)
                            .map(|k| (0..n).map(|i| (0..n).map(|j| &t1[k][i][j] + &t2[k][i][j]).collect()).collect())
                            .collect(),
                    );
                }
                Some(out)
            }
        };
        Ok(MetricAt { g, ginv, dg, gamma, dgamma })
    }
}

impl MetricAt {
    /// Riemann tensor at the point; requires second-order jets.
    pub fn riemann(&self) -> N4 {
        let dgam = self.dgamma.as_ref().expect("second-order jets required");
        let gam = &self.gamma;
        let n = gam.len();
        let mut out = vec![vec![vec![vec![Num::zero(); n]; n]; n]; n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for k in 0..n {
                        let mut s = &dgam[i][l][j][k] - &dgam[j][l][i][k];
                        for m in 0..n {
                            s = s + gam[l][i][m].mul(&gam[m][j][k]) - gam[l][j][m].mul(&gam[m][i][k]);
                        }
                        out[l][i][j][k] = s;
                    }
                }
            }
        }
        out
    }

    /// `(∇X)[k][i]` from the value and first derivatives `dx[i][k] = ∂_i X^k`.
    pub fn covariant(&self, x: &[Num], dx: &[Vec<Num>]) -> NMat {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).fold(dx[i][k].clone(), |s, m| s + self.gamma[k][i][m].mul(&x[m])))
                    .collect()
            })
            .collect()
    }
}

/// Components of a vector field and their first derivatives, prepared once.
pub struct FieldJets {
    comps: Vec<ScalarField>,
    d: Vec<Vec<ScalarField>>,
}

impl FieldJets {
    pub fn new(x: &VectorField) -> FieldJets {
        let n = x.dim();
        FieldJets { comps: x.comps.clone(), d: (0..n).map(|i| x.comps.iter().map(|c| c.diff(i)).collect()).collect() }
    }

    /// `(X, dx)` with `dx[i][k] = ∂_i X^k`.
    pub fn at(&self, vals: &[Num]) -> Result<(Vec<Num>, NMat), EvalError> {
        Ok((linalg::eval_vec(&self.comps, vals)?, linalg::eval(&self.d, vals)?))
    }
}

/// Structure constants and their first derivatives, prepared once.
pub struct MultJets {
    c: Tensor3,
    dc: Vec<Tensor3>,
}

impl MultJets {
    pub fn new(m: &Multiplication) -> MultJets {
        let n = m.dim();
        let dc = (0..n)
            .map(|a| m.c.iter().map(|ck| ck.iter().map(|r| r.iter().map(|x| x.diff(a)).collect()).collect()).collect())
            .collect();
        MultJets { c: m.c.clone(), dc }
    }

    pub fn values(&self, vals: &[Num]) -> Result<N3, EvalError> {
        self.c.iter().map(|m| linalg::eval(m, vals)).collect()
    }

    /// `dc[a][k][i][j] = ∂_a c^k_ij`.
    pub fn derivs(&self, vals: &[Num]) -> Result<N4, EvalError> {
        self.dc.iter().map(|t| t.iter().map(|m| linalg::eval(m, vals)).collect()).collect()
    }
}

/// Numeric Lie derivative of a (1,2) tensor from point data.
pub fn lie_mult_at(c: &N3, dc: &N4, x: &[Num], dx: &NMat) -> N3 {
    let n = x.len();
    let mut out = vec![vec![vec![Num::zero(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = Num::zero();
                for m in 0..n {
                    s = s + x[m].mul(&dc[m][k][i][j]) - c[m][i][j].mul(&dx[m][k])
                        + c[k][m][j].mul(&dx[i][m])
                        + c[k][i][m].mul(&dx[j][m]);
                }
                out[k][i][j] = s;
            }
        }
    }
    out
}

/// Numeric Lie derivative of a symmetric 2-tensor from point data.
pub fn lie_metric_at(g: &NMat, dg: &[NMat], x: &[Num], dx: &NMat) -> NMat {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = Num::zero();
                    for m in 0..n {
                        s = s + x[m].mul(&dg[m][i][j]) + g[m][j].mul(&dx[i][m]) + g[i][m].mul(&dx[j][m]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn max_abs3(t: &N3) -> f64 {
    t.iter().flatten().flatten().map(Num::abs).fold(0.0, f64::max)
}

pub fn max_abs4(t: &N4) -> f64 {
    t.iter().flatten().flatten().flatten().map(Num::abs).fold(0.0, f64::max)
}

/// Sample points at which the metric is invertible and `extra` evaluates.
pub fn sample_for_metric(
    g: &Metric,
    opts: &CheckOpts,
    extra: &[&ScalarField],
) -> Result<Vec<Point>, TensorError> {
    let det = g.det();
    if det.is_zero() {
        return Err(TensorError::Degenerate);
    }
    let pts = sample_points(g.chart(), opts.points, opts.seed, |p| {
        let vals = p.values();
        matches!(det.eval_values(&vals), Ok(d) if !d.is_negligible())
            && g.g.iter().flatten().all(|x| x.eval_values(&vals).is_ok())
            && extra.iter().all(|x| x.eval_values(&vals).is_ok())
    })?;
    Ok(pts)
}

/// Max over sample points of the curvature components.
pub fn riemann_residual(g: &Metric, points: &[Point]) -> Result<f64, TensorError> {
    let jets = MetricJets::new(g, true);
    let mut worst: f64 = 0.0;
    for p in points {
        let at = jets.at(&p.values())?;
        worst = worst.max(max_abs4(&at.riemann()));
    }
    Ok(worst)
}

/// `∇X` vanishes at every sample point.
pub fn is_parallel(g: &Metric, x: &VectorField, opts: &CheckOpts) -> Result<Report, TensorError> {
    same_chart(&x.chart, &g.chart)?;
    let extra: Vec<&ScalarField> = x.comps.iter().collect();
    let points = sample_for_metric(g, opts, &extra)?;
    let mj = MetricJets::new(g, false);
    let fj = FieldJets::new(x);
    let mut worst: f64 = 0.0;
    for p in &points {
        let vals = p.values();
        let at = mj.at(&vals)?;
        let (xv, dx) = fj.at(&vals)?;
        worst = worst.max(linalg::num::max_abs(&at.covariant(&xv, &dx)));
    }
    let mut r = Report::new("parallel");
    r.vanish("nabla_X", worst, opts.tol);
    r.points = points;
    Ok(r)
}
