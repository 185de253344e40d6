//! (Almost) Frobenius structures from potentials or semisimple data, and their verifier.

use crate::error::{invalid, Result};
use crate::linalg::{self, Mat, NMat};
use crate::report::{CheckOpts, Report};
use crate::scalar::{Chart, Num, Point, ScalarField, Q};
use crate::tensor::{
    self, lie_metric_at, lie_mult_at, max_abs3, FieldJets, Metric, MetricJets, Multiplication, MultJets, Tensor3,
    VectorField, N3, N4,
};
use num_traits::Zero;

/// Potential-form data: constant flat metric, potential `F`, and the flat coordinate whose field is the unit.
#[derive(Clone, Debug)]
pub struct PotentialFrobenius {
    pub chart: Chart,
    pub flat_metric: Vec<Vec<Q>>,
    pub potential: ScalarField,
    pub unit_index: usize,
}

impl PotentialFrobenius {
    pub fn new(chart: &Chart, flat_metric: Vec<Vec<Q>>, potential: ScalarField, unit_index: usize) -> Result<Self> {
        let n = chart.dim();
        if flat_metric.len() != n || flat_metric.iter().any(|r| r.len() != n) {
            return invalid(format!("flat metric must be {n}x{n}"));
        }
        if unit_index >= n {
            return invalid("unit index out of range");
        }
        if potential.chart() != chart {
            return invalid("potential lives on a different chart");
        }
        let m = Metric::constant(chart, &flat_metric)?;
        if m.det().is_zero() {
            return invalid("flat metric is degenerate");
        }
        Ok(PotentialFrobenius { chart: chart.clone(), flat_metric, potential, unit_index })
    }

    pub fn parse(chart: &Chart, flat_metric: Vec<Vec<Q>>, potential: &str, unit_index: usize) -> Result<Self> {
        let f = ScalarField::parse(potential, chart)?;
        PotentialFrobenius::new(chart, flat_metric, f, unit_index)
    }

    pub fn metric(&self) -> Metric {
        Metric::constant(&self.chart, &self.flat_metric).expect("validated")
    }

    /// `F_ijk` as fields.
    pub fn third_derivatives(&self) -> Tensor3 {
        let n = self.chart.dim();
        let d1: Vec<ScalarField> = (0..n).map(|i| self.potential.diff(i)).collect();
        let d2: Vec<Vec<ScalarField>> = (0..n).map(|i| (0..n).map(|j| d1[i].diff(j)).collect()).collect();
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| d2[i][j].diff(k)).collect()).collect()).collect()
    }
}

/// Canonical coordinates `u` and metric potential `η`; the metric is `Σ η_k du^k ⊗ du^k`.
#[derive(Clone, Debug)]
pub struct SemisimpleData {
    pub chart: Chart,
    pub eta: ScalarField,
}

impl SemisimpleData {
    pub fn new(chart: &Chart, eta: ScalarField) -> Result<Self> {
        if eta.chart() != chart {
            return invalid("eta lives on a different chart");
        }
        for k in 0..chart.dim() {
            if eta.diff(k).is_zero() {
                return invalid(format!("eta_{} vanishes identically", k + 1));
            }
        }
        Ok(SemisimpleData { chart: chart.clone(), eta })
    }

    pub fn parse(chart: &Chart, eta: &str) -> Result<Self> {
        SemisimpleData::new(chart, ScalarField::parse(eta, chart)?)
    }

    /// `η_k = ∂η/∂u^k`.
    pub fn eta_k(&self, k: usize) -> ScalarField {
        self.eta.diff(k)
    }

    /// `η_kl`.
    pub fn eta_kl(&self, k: usize, l: usize) -> ScalarField {
        self.eta.diff(k).diff(l)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlmostFrobenius {
    pub metric: Metric,
    pub mult: Multiplication,
}

impl AlmostFrobenius {
    pub fn new(metric: Metric, mult: Multiplication) -> Result<Self> {
        if metric.chart() != mult.chart() {
            return invalid("metric and multiplication on different charts");
        }
        Ok(AlmostFrobenius { metric, mult })
    }

    pub fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn unit(&self) -> &VectorField {
        self.mult.unit()
    }

    /// Lowered constants `c_lij = g_lm c^m_ij`.
    pub fn lowered(&self) -> Tensor3 {
        let n = self.dim();
        let g = self.metric.matrix();
        let c = self.mult.constants();
        (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut s = ScalarField::zero(self.chart());
                                for m in 0..n {
                                    if !g[l][m].is_zero() && !c[m][i][j].is_zero() {
                                        s = s + g[l][m].mul(&c[m][i][j]);
                                    }
                                }
                                s
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Same structure with a different metric.
    pub fn with_metric(&self, metric: Metric) -> AlmostFrobenius {
        AlmostFrobenius { metric, mult: self.mult.clone() }
    }
}

pub fn from_potential(p: &PotentialFrobenius) -> Result<AlmostFrobenius> {
    let n = p.chart.dim();
    let metric = p.metric();
    let ginv = metric.inverse()?;
    let f3 = p.third_derivatives();
    let zero = ScalarField::zero(&p.chart);
    let mut c = vec![vec![vec![zero.clone(); n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = zero.clone();
                for m in 0..n {
                    if !ginv[k][m].is_zero() {
                        s = s + ginv[k][m].mul(&f3[i][j][m]);
                    }
                }
                c[k][i][j] = s;
            }
        }
    }
    let mult = Multiplication::new(&p.chart, c, VectorField::coordinate(&p.chart, p.unit_index))?;
    AlmostFrobenius::new(metric, mult)
}

pub fn from_semisimple(s: &SemisimpleData) -> Result<AlmostFrobenius> {
    let n = s.chart.dim();
    let zero = ScalarField::zero(&s.chart);
    let one = ScalarField::one(&s.chart);
    let mut g = linalg::zeros(&s.chart, n, n);
    let mut c = vec![vec![vec![zero.clone(); n]; n]; n];
    for k in 0..n {
        g[k][k] = s.eta_k(k);
        c[k][k][k] = one.clone();
    }
    let unit = VectorField::new(&s.chart, vec![one; n])?;
    AlmostFrobenius::new(Metric::new(&s.chart, g)?, Multiplication::new(&s.chart, c, unit)?)
}

/// Numeric data of an almost Frobenius structure at a point.
pub struct StructureAt {
    pub c: N3,
    pub dc: N4,
    pub metric: tensor::MetricAt,
    pub unit: Vec<Num>,
    pub dunit: NMat,
}

/// Derivative jets of a structure, prepared once and evaluated per point.
pub struct StructureJets {
    mult: MultJets,
    metric: MetricJets,
    unit: FieldJets,
}

impl StructureJets {
    pub fn new(a: &AlmostFrobenius, curvature: bool) -> StructureJets {
        StructureJets {
            mult: MultJets::new(&a.mult),
            metric: MetricJets::new(&a.metric, curvature),
            unit: FieldJets::new(a.unit()),
        }
    }

    pub fn at(&self, p: &Point) -> Result<StructureAt> {
        let vals = p.values();
        let (unit, dunit) = self.unit.at(&vals)?;
        Ok(StructureAt {
            c: self.mult.values(&vals)?,
            dc: self.mult.derivs(&vals)?,
            metric: self.metric.at(&vals)?,
            unit,
            dunit,
        })
    }
}

/// Points at which the structure (and `extra`) can be evaluated and the metric is invertible.
pub fn sample_structure(a: &AlmostFrobenius, opts: &CheckOpts, extra: &[&ScalarField]) -> Result<Vec<Point>> {
    let mut all: Vec<&ScalarField> = a.mult.constants().iter().flatten().flatten().collect();
    all.extend(a.unit().comps.iter());
    all.extend(extra.iter().copied());
    Ok(tensor::sample_for_metric(&a.metric, opts, &all)?)
}

pub fn associativity_at(c: &N3) -> f64 {
    let n = c.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = Num::zero();
                    for m in 0..n {
                        s = s + c[m][i][j].mul(&c[l][m][k]) - c[m][j][k].mul(&c[l][m][i]);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// `c^k_ij e^i − δ^k_j`.
pub fn unit_at(c: &N3, e: &[Num]) -> f64 {
    let n = c.len();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            let mut s = if k == j { Num::one().neg() } else { Num::zero() };
            for i in 0..n {
                s = s + c[k][i][j].mul(&e[i]);
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Total symmetry of `g_lm c^m_ij` (symmetry in `i, j` is structural).
pub fn invariance_at(c: &N3, g: &NMat) -> f64 {
    let n = c.len();
    let low = |l: usize, i: usize, j: usize| (0..n).fold(Num::zero(), |s, m| s + g[l][m].mul(&c[m][i][j]));
    let mut worst: f64 = 0.0;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((low(l, i, j) - low(i, l, j)).abs());
            }
        }
    }
    worst
}

pub fn commutativity_at(c: &N3) -> f64 {
    let n = c.len();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((&c[k][i][j] - &c[k][j][i]).abs());
            }
        }
    }
    worst
}

/// `(X ∘ T)^k_ij = c^k_am X^a T^m_ij` for a (1,2) tensor `T`.
fn left_mult(c: &N3, x: &[Num], t: &N3) -> N3 {
    let n = c.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut s = Num::zero();
                            for a in 0..n {
                                if x[a].is_zero() {
                                    continue;
                                }
                                for m in 0..n {
                                    s = s + c[k][a][m].mul(&x[a]).mul(&t[m][i][j]);
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `L_{X∘Y}(∘) − X∘L_Y(∘) − Y∘L_X(∘)` over all pairs of coordinate fields.
pub fn f_manifold_at(c: &N3, dc: &N4) -> f64 {
    let n = c.len();
    let coord = |a: usize| -> Vec<Num> { (0..n).map(|i| if i == a { Num::one() } else { Num::zero() }).collect() };
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            let z: Vec<Num> = (0..n).map(|k| c[k][a][b].clone()).collect();
            let dz: NMat = (0..n).map(|i| (0..n).map(|k| dc[i][k][a][b].clone()).collect()).collect();
            let lz = lie_mult_at(c, dc, &z, &dz);
            let xa = left_mult(c, &coord(a), &dc[b]);
            let xb = left_mult(c, &coord(b), &dc[a]);
            let r: N3 = (0..n)
                .map(|k| (0..n).map(|i| (0..n).map(|j| &lz[k][i][j] - &xa[k][i][j] - xb[k][i][j].clone()).collect()).collect())
                .collect();
            worst = worst.max(max_abs3(&r));
        }
    }
    worst
}

pub fn wdvv_residual(p: &PotentialFrobenius, opts: &CheckOpts) -> Result<Report> {
    let n = p.chart.dim();
    let metric = p.metric();
    let ginv = linalg::eval(&metric.inverse()?, &Point::origin(&p.chart).values())?;
    let f3 = p.third_derivatives();
    let points = crate::report::sample_points(&p.chart, opts.points, opts.seed, |_| true)?;
    let mut worst: f64 = 0.0;
    for pt in &points {
        let vals = pt.values();
        let f: N3 = f3.iter().map(|m| linalg::eval(m, &vals)).collect::<std::result::Result<_, _>>()?;
        // raised[m][k][r] = g^{ms} F_skr
        let up: N3 = (0..n)
            .map(|m| (0..n).map(|k| (0..n).map(|r| (0..n).fold(Num::zero(), |s, t| s + ginv[m][t].mul(&f[t][k][r]))).collect()).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for r in 0..n {
                        let mut s = Num::zero();
                        for m in 0..n {
                            s = s + f[i][j][m].mul(&up[m][k][r]) - f[k][j][m].mul(&up[m][i][r]);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
    }
    let mut rep = Report::new("wdvv");
    rep.vanish("wdvv", worst, opts.tol);
    rep.points = points;
    Ok(rep)
}

fn almost_checks(rep: &mut Report, at: &[StructureAt], tol: f64) {
    let max = |f: &dyn Fn(&StructureAt) -> f64| at.iter().map(f).fold(0.0, f64::max);
    rep.vanish("associativity", max(&|s| associativity_at(&s.c)), tol);
    rep.vanish("unit", max(&|s| unit_at(&s.c, &s.unit)), tol);
    rep.vanish("invariance", max(&|s| invariance_at(&s.c, &s.metric.g)), tol);
    rep.vanish("commutativity", max(&|s| commutativity_at(&s.c)), tol);
}

pub fn check_almost_frobenius(a: &AlmostFrobenius, opts: &CheckOpts) -> Result<Report> {
    let points = sample_structure(a, opts, &[])?;
    let jets = StructureJets::new(a, false);
    let at = points.iter().map(|p| jets.at(p)).collect::<Result<Vec<_>>>()?;
    let mut rep = Report::new("almost_frobenius");
    almost_checks(&mut rep, &at, opts.tol);
    rep.points = points;
    Ok(rep)
}

pub fn check_f_manifold(a: &AlmostFrobenius, opts: &CheckOpts) -> Result<Report> {
    let points = sample_structure(a, opts, &[])?;
    let jets = StructureJets::new(a, false);
    let mut worst: f64 = 0.0;
    for p in &points {
        let s = jets.at(p)?;
        worst = worst.max(f_manifold_at(&s.c, &s.dc));
    }
    let mut rep = Report::new("f_manifold");
    rep.vanish("f_manifold", worst, opts.tol);
    rep.points = points;
    Ok(rep)
}

/// Almost Frobenius axioms, F-manifold identity, parallel unit and flat metric.
pub fn check_frobenius(a: &AlmostFrobenius, opts: &CheckOpts) -> Result<Report> {
    let points = sample_structure(a, opts, &[])?;
    let jets = StructureJets::new(a, true);
    let at = points.iter().map(|p| jets.at(p)).collect::<Result<Vec<_>>>()?;
    let mut rep = Report::new("frobenius");
    almost_checks(&mut rep, &at, opts.tol);
    let max = |f: &dyn Fn(&StructureAt) -> f64| at.iter().map(f).fold(0.0, f64::max);
    rep.vanish("f_manifold", max(&|s| f_manifold_at(&s.c, &s.dc)), opts.tol);
    rep.vanish("unit_parallel", max(&|s| linalg::num::max_abs(&s.metric.covariant(&s.unit, &s.dunit))), opts.tol);
    rep.vanish("curvature", max(&|s| tensor::max_abs4(&s.metric.riemann())), opts.tol);
    rep.points = points;
    Ok(rep)
}

/// `L_E(∘) = ∘` and `L_E(g) = d·g`.
pub fn check_euler(a: &AlmostFrobenius, e: &VectorField, d: &Q, opts: &CheckOpts) -> Result<Report> {
    if e.chart() != a.chart() {
        return invalid("Euler field on a different chart");
    }
    let extra: Vec<&ScalarField> = e.comps.iter().collect();
    let points = sample_structure(a, opts, &extra)?;
    let jets = StructureJets::new(a, false);
    let ej = FieldJets::new(e);
    let dnum = Num::real(d.clone());
    let (mut wm, mut wg): (f64, f64) = (0.0, 0.0);
    let mut gee_nonzero = false;
    let n = a.dim();
    for p in &points {
        let s = jets.at(p)?;
        let (ev, dev) = ej.at(&p.values())?;
        let lc = lie_mult_at(&s.c, &s.dc, &ev, &dev);
        let rc: N3 = (0..n)
            .map(|k| (0..n).map(|i| (0..n).map(|j| &lc[k][i][j] - &s.c[k][i][j]).collect()).collect())
            .collect();
        wm = wm.max(max_abs3(&rc));
        let lg = lie_metric_at(&s.metric.g, &s.metric.dg, &ev, &dev);
        wg = wg.max(linalg::num::max_abs(&linalg::num::sub(&lg, &linalg::num::scale(&s.metric.g, &dnum))));
        let gee = (0..n).fold(Num::zero(), |acc, i| {
            (0..n).fold(acc, |acc, j| acc + s.metric.g[i][j].mul(&s.unit[i]).mul(&s.unit[j]))
        });
        gee_nonzero |= !gee.is_negligible();
    }
    let mut rep = Report::new("euler");
    rep.vanish("euler_mult", wm, opts.tol);
    rep.vanish("euler_metric", wg, opts.tol);
    if gee_nonzero && *d != Q::from_integer(2.into()) {
        rep.note("g(e,e) is nonzero at a sample point but d is not 2");
    }
    rep.points = points;
    Ok(rep)
}

/// Minimum over sample points and pairs `k ≠ l` of `|η_kl|` (nonzero rotation coefficients).
pub fn rotation_nonvanishing(s: &SemisimpleData, points: &[Point]) -> Result<f64> {
    let n = s.chart.dim();
    let mut best = f64::INFINITY;
    for p in points {
        let mut worst: f64 = f64::INFINITY;
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    worst = worst.min(s.eta_kl(k, l).evaluate(p)?.abs());
                }
            }
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// Leading principal minors of a matrix at a point, in order.
pub fn leading_minors(m: &Mat, p: &Point) -> Result<Vec<Num>> {
    let vals = p.values();
    let v = linalg::eval(m, &vals)?;
    Ok((1..=v.len())
        .map(|k| linalg::num::det(&v[..k].iter().map(|r| r[..k].to_vec()).collect::<Vec<_>>()))
        .collect())
}

pub fn is_positive_definite(m: &Mat, p: &Point) -> Result<bool> {
    Ok(leading_minors(m, p)?.iter().all(|d| d.is_real() && d.re > Q::zero() && !d.is_negligible()))
}
