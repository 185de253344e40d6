//! tt*-geometry on complex charts: the tt*-equations for a multiplication, an invariant metric
//! and a compatible real structure, the diagonal real structure of a semisimple structure, and
//! the condition system for the tt*-equations on the total space of a bundle.
//!
//! Hermitian objects are polarized: fields in `(z, z̄)` with `z̄` bound to the conjugate
//! coordinate on evaluation. A real structure acts as `v ↦ K v̄` with `K` stored as
//! `left · diag(|f_i| / f_i) · right`. Phase factors are only evaluated where every `f_i` is
//! real, so instances with varying phases are sampled on the real slice; their logarithmic
//! derivatives are exact, `∂ log(|f|/f) = (∂f̄/f̄ − ∂f/f) / 2`.
//!
//! Conventions: `h(u, w) = uᵀ H w̄` with `H = G K`; the Chern connection is
//! `D_k s = ∂_k s + Θ_k s` with `Θ_kᵀ = (∂_k H) H⁻¹`; its curvature is `R_{k l̄} = −∂̄_l Θ_k`;
//! `φ_k = −∂_k ∘` and `φ†_{l̄} = conj(H⁻¹ φ_lᵀ H)`.

use crate::bundle::{adapted_frames, build_total, check_conditions_multiplication, BundleData, Equivalence};
use crate::error::{invalid, precondition, Error, Result};
use crate::frobenius::{self, AlmostFrobenius, SemisimpleData};
use crate::linalg::{self, num as nm, Mat, NMat};
use crate::report::{sample_points, CheckOpts, Report};
use crate::scalar::{Chart, Num, Point, ScalarField, C, Q};
use crate::tensor::{christoffel, Multiplication, Tensor3};
use num_traits::{One, Zero};

fn half() -> Q {
    Q::new(1.into(), 2.into())
}

fn require_complex(chart: &Chart, what: &str) -> Result<()> {
    if !chart.is_complex() {
        return invalid(format!("{what} must live on a complex chart"));
    }
    Ok(())
}

fn all_holomorphic<'a>(fields: impl IntoIterator<Item = &'a ScalarField>) -> bool {
    fields.into_iter().all(ScalarField::is_holomorphic)
}

fn failing(rep: &Report) -> String {
    rep.failed().join(", ")
}

/// Anti-linear involution `v ↦ K v̄` of a rank-`n` bundle over a complex chart.
#[derive(Clone, Debug)]
pub struct RealStructure {
    chart: Chart,
    left: Mat,
    phase: Vec<ScalarField>,
    right: Mat,
}

impl RealStructure {
    /// `K = matrix`.
    pub fn new(matrix: Mat) -> Result<Self> {
        let chart = matrix.first().and_then(|r| r.first()).map(|f| f.chart().clone());
        let chart = chart.ok_or_else(|| Error::Invalid("empty real structure".into()))?;
        let n = matrix.len();
        RealStructure::from_parts(matrix, vec![ScalarField::one(&chart); n], linalg::identity(&chart, n))
    }

    /// `K = diag(|f_i| / f_i)`.
    pub fn diagonal_phase(phase: Vec<ScalarField>) -> Result<Self> {
        let chart = phase.first().map(|f| f.chart().clone());
        let chart = chart.ok_or_else(|| Error::Invalid("empty real structure".into()))?;
        let n = phase.len();
        RealStructure::from_parts(linalg::identity(&chart, n), phase, linalg::identity(&chart, n))
    }

    /// `K = left · diag(|f_i| / f_i) · right`.
    pub fn from_parts(left: Mat, phase: Vec<ScalarField>, right: Mat) -> Result<Self> {
        let n = phase.len();
        let chart = match phase.first() {
            Some(f) => f.chart().clone(),
            None => return invalid("empty real structure"),
        };
        require_complex(&chart, "a real structure")?;
        for (m, what) in [(&left, "left factor"), (&right, "right factor")] {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return invalid(format!("{what} must be {n}x{n}"));
            }
        }
        let fields = left.iter().flatten().chain(right.iter().flatten()).chain(&phase);
        if fields.into_iter().any(|f| f.chart() != &chart) {
            return invalid("real structure parts live on different charts");
        }
        if phase.iter().any(ScalarField::is_zero) {
            return invalid("phase factors must not vanish identically");
        }
        Ok(RealStructure { chart, left, phase, right })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.phase.len()
    }

    pub fn left(&self) -> &Mat {
        &self.left
    }

    pub fn phase(&self) -> &[ScalarField] {
        &self.phase
    }

    pub fn right(&self) -> &Mat {
        &self.right
    }

    /// True when some phase factor is not a constant, so values exist only on the real slice.
    pub fn varying_phase(&self) -> bool {
        self.phase.iter().any(|f| f.as_constant().is_none())
    }

    fn phase_at(&self, vals: &[Num]) -> Result<Vec<Num>> {
        self.phase
            .iter()
            .map(|f| {
                let v = f.eval_values(vals)?;
                let im = Num { re: Q::zero(), im: v.im.clone(), exact: v.exact };
                if !im.is_negligible() {
                    return precondition("phase factor is not real at the sample point");
                }
                if Num::real(v.re.clone()).is_negligible() {
                    return precondition("phase factor vanishes at the sample point");
                }
                Ok(Num::from_i64(if v.re > Q::zero() { 1 } else { -1 }))
            })
            .collect()
    }

    pub fn value_at(&self, vals: &[Num]) -> Result<NMat> {
        let ph = self.phase_at(vals)?;
        let mut l = linalg::eval(&self.left, vals)?;
        for row in l.iter_mut() {
            for (x, s) in row.iter_mut().zip(&ph) {
                *x = x.mul(s);
            }
        }
        Ok(nm::mul(&l, &linalg::eval(&self.right, vals)?))
    }

    /// `(∂K) K⁻¹` for the formal variable `var`.
    pub fn log_derivative(&self, var: usize) -> Result<Mat> {
        let n = self.dim();
        let c = &self.chart;
        let d = |m: &Mat| -> Mat { m.iter().map(|r| r.iter().map(|x| x.diff(var)).collect()).collect() };
        let is_identity = |m: &Mat| *m == linalg::identity(c, n);
        let inv = |m: &Mat| linalg::inverse(m, c).ok_or_else(|| Error::Invalid("real structure factor is singular".into()));
        let mut lam = linalg::zeros(c, n, n);
        for (i, f) in self.phase.iter().enumerate() {
            if f.as_constant().is_some() {
                continue;
            }
            let fb = f.conj();
            let quot = |g: &ScalarField| g.diff(var).checked_div(g).expect("nonzero phase");
            lam[i][i] = (quot(&fb) - quot(f)).scale(&half());
        }
        let mut out = if is_identity(&self.left) {
            lam
        } else {
            let li = inv(&self.left)?;
            linalg::add(&linalg::mul(&d(&self.left), &li), &linalg::mul(&linalg::mul(&self.left, &lam), &li))
        };
        let dr = d(&self.right);
        if !linalg::is_zero(&dr) {
            if self.varying_phase() {
                return invalid("right factor of a real structure with varying phases must not depend on the differentiated variable");
            }
            let signs: Vec<ScalarField> = self
                .phase
                .iter()
                .map(|f| {
                    let v = f.as_constant().expect("constant phase");
                    ScalarField::int(c, if v.re > Q::zero() { 1 } else { -1 })
                })
                .collect();
            let mut lphi = self.left.clone();
            for row in lphi.iter_mut() {
                for (x, s) in row.iter_mut().zip(&signs) {
                    *x = x.mul(s);
                }
            }
            let k = linalg::mul(&lphi, &self.right);
            out = linalg::add(&out, &linalg::mul(&linalg::mul(&lphi, &dr), &inv(&k)?));
        }
        Ok(out)
    }

    /// `(∂_v K) K⁻¹` for every formal variable `v`.
    pub fn log_derivatives(&self) -> Result<Vec<Mat>> {
        (0..self.chart.nvars()).map(|v| self.log_derivative(v)).collect()
    }

    /// Value and first derivatives of `K` at a point, given `log_derivatives`.
    fn jet_at(&self, logs: &[Mat], vals: &[Num]) -> Result<Jet> {
        let val = self.value_at(vals)?;
        let d = logs.iter().map(|l| Ok(nm::mul(&linalg::eval(l, vals)?, &val))).collect::<Result<_>>()?;
        Ok(Jet { val, d })
    }

    pub fn embed(&self, chart: &Chart) -> Result<Self> {
        RealStructure::from_parts(
            linalg::embed(&self.left, chart)?,
            self.phase.iter().map(|f| f.embed(chart)).collect::<std::result::Result<_, _>>()?,
            linalg::embed(&self.right, chart)?,
        )
    }

    /// Block-diagonal structure `diag(self, other)` on a common chart.
    fn direct_sum(&self, other: &RealStructure) -> RealStructure {
        let n = self.dim();
        let m = other.dim();
        let block = |a: &Mat, b: &Mat| {
            let mut out = linalg::zeros(&self.chart, n + m, n + m);
            for i in 0..n {
                for j in 0..n {
                    out[i][j] = a[i][j].clone();
                }
            }
            for i in 0..m {
                for j in 0..m {
                    out[n + i][n + j] = b[i][j].clone();
                }
            }
            out
        };
        RealStructure {
            chart: self.chart.clone(),
            left: block(&self.left, &other.left),
            phase: self.phase.iter().chain(&other.phase).cloned().collect(),
            right: block(&self.right, &other.right),
        }
    }
}

/// Value and first derivatives in every formal variable of a matrix function at a point.
struct Jet {
    val: NMat,
    d: Vec<NMat>,
}

impl Jet {
    fn of(m: &Mat, vals: &[Num]) -> Result<Jet> {
        let nvars = m.first().and_then(|r| r.first()).map_or(0, |f| f.chart().nvars());
        let val = linalg::eval(m, vals)?;
        let d = (0..nvars)
            .map(|v| {
                let dm: Mat = m.iter().map(|r| r.iter().map(|x| x.diff(v)).collect()).collect();
                linalg::eval(&dm, vals)
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Jet { val, d })
    }

    fn constant(val: NMat, nvars: usize) -> Jet {
        let z = nm::zeros(val.len(), val.first().map_or(0, Vec::len));
        Jet { val, d: vec![z; nvars] }
    }

    fn mul(&self, o: &Jet) -> Jet {
        let d = self.d.iter().zip(&o.d).map(|(a, b)| nm::add(&nm::mul(a, &o.val), &nm::mul(&self.val, b))).collect();
        Jet { val: nm::mul(&self.val, &o.val), d }
    }

    fn sub(&self, o: &Jet) -> Jet {
        Jet { val: nm::sub(&self.val, &o.val), d: self.d.iter().zip(&o.d).map(|(a, b)| nm::sub(a, b)).collect() }
    }

    fn transpose(&self) -> Jet {
        Jet { val: nm::transpose(&self.val), d: self.d.iter().map(nm::transpose).collect() }
    }

    /// Jet of the conjugate function, `∂_v conj(F) = conj(∂_{v̄} F)`.
    fn conj(&self, chart: &Chart) -> Jet {
        let d = (0..self.d.len()).map(|v| nm::conj(&self.d[chart.conj_index(v)])).collect();
        Jet { val: nm::conj(&self.val), d }
    }

    fn max_abs(&self) -> f64 {
        self.d.iter().fold(nm::max_abs(&self.val), |m, x| m.max(nm::max_abs(x)))
    }
}

/// Residuals of `K K̄ = Id` and `Kᵀ G K = Ḡ` to first order.
fn real_structure_residuals(k: &Jet, g: &Jet, chart: &Chart) -> (f64, f64) {
    let n = k.val.len();
    let kb = k.conj(chart);
    let inv = k.mul(&kb).sub(&Jet::constant(nm::identity(n), chart.nvars())).max_abs();
    let compat = k.transpose().mul(g).mul(k).sub(&g.conj(chart)).max_abs();
    (inv, compat)
}

/// Pseudo-Hermitian metric `h = g(·, k·)` with its Chern connection.
#[derive(Clone, Debug)]
pub struct HermitianData {
    g: Mat,
    real: RealStructure,
    chern: Vec<Mat>,
}

impl HermitianData {
    /// `g` is a holomorphic symmetric bilinear form on the same chart as `real`.
    pub fn new(g: Mat, real: RealStructure) -> Result<Self> {
        let c = real.chart().clone();
        let n = real.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return invalid(format!("bilinear form must be {n}x{n}"));
        }
        if g.iter().flatten().any(|f| f.chart() != &c) {
            return invalid("bilinear form and real structure live on different charts");
        }
        if !all_holomorphic(g.iter().flatten()) {
            return invalid("bilinear form must be holomorphic");
        }
        let ginv = linalg::inverse(&g, &c).ok_or_else(|| Error::Precondition("h is degenerate".into()))?;
        let mut chern = Vec::with_capacity(c.dim());
        for k in 0..c.dim() {
            let dg: Mat = g.iter().map(|r| r.iter().map(|x| x.diff(k)).collect()).collect();
            let lk = real.log_derivative(k)?;
            let t = linalg::add(&linalg::mul(&dg, &ginv), &linalg::mul(&linalg::mul(&g, &lk), &ginv));
            chern.push(linalg::transpose(&t));
        }
        Ok(HermitianData { g, real, chern })
    }

    pub fn chart(&self) -> &Chart {
        self.real.chart()
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn bilinear(&self) -> &Mat {
        &self.g
    }

    pub fn real_structure(&self) -> &RealStructure {
        &self.real
    }

    /// Connection matrix `Θ_k` of the Chern connection along `∂_k`.
    pub fn chern(&self, k: usize) -> &Mat {
        &self.chern[k]
    }

    /// `R_{k l̄} = −∂̄_l Θ_k`.
    pub fn curvature(&self, k: usize, l: usize) -> Mat {
        let bar = self.chart().conj_index(l);
        self.chern[k].iter().map(|r| r.iter().map(|x| x.diff(bar).neg()).collect()).collect()
    }

    /// `H = G K` at a point.
    pub fn value_at(&self, vals: &[Num]) -> Result<NMat> {
        Ok(nm::mul(&linalg::eval(&self.g, vals)?, &self.real.value_at(vals)?))
    }

    /// `h`-adjoint `conj(H⁻¹ Aᵀ H)` of an endomorphism at a point.
    pub fn adjoint_at(&self, a: &NMat, vals: &[Num]) -> Result<NMat> {
        let h = self.value_at(vals)?;
        let hi = nm::inverse(&h)?;
        Ok(nm::conj(&nm::mul(&nm::mul(&hi, &nm::transpose(a)), &h)))
    }

    /// `D h = 0` at a point: `∂_k H = Θ_kᵀ H` and `∂̄_k H = H conj(Θ_k)`, so the `(0,1)` part of
    /// `D` is `∂̄` on holomorphic frames.
    pub fn compatibility_at(&self, vals: &[Num]) -> Result<f64> {
        let c = self.chart();
        let logs = self.real.log_derivatives()?;
        let h = Jet::of(&self.g, vals)?.mul(&self.real.jet_at(&logs, vals)?);
        let mut worst = 0f64;
        for k in 0..c.dim() {
            let th = linalg::eval(&self.chern[k], vals)?;
            worst = worst.max(nm::max_abs(&nm::sub(&h.d[k], &nm::mul(&nm::transpose(&th), &h.val))));
            let bar = &h.d[c.conj_index(k)];
            worst = worst.max(nm::max_abs(&nm::sub(bar, &nm::mul(&h.val, &nm::conj(&th)))));
        }
        Ok(worst)
    }

    fn evaluable(&self, vals: &[Num]) -> bool {
        match self.value_at(vals) {
            Ok(h) => !nm::det(&h).is_negligible() && self.chern.iter().all(|m| linalg::eval(m, vals).is_ok()),
            Err(_) => false,
        }
    }
}

/// Points of `chart` (on the real slice when `slice`) accepted by `guard`.
fn sample(chart: &Chart, slice: bool, opts: &CheckOpts, guard: impl Fn(&Point) -> bool) -> Result<Vec<Point>> {
    let lift = |p: &Point| Point { chart: chart.clone(), coords: p.coords.clone() };
    let pts = if slice {
        let real = Chart::real(chart.names());
        sample_points(&real, opts.points, opts.seed, |p| guard(&lift(p)))?.iter().map(lift).collect()
    } else {
        sample_points(chart, opts.points, opts.seed, guard)?
    };
    Ok(pts)
}

/// A holomorphic multiplication with invariant metric and a compatible real structure.
#[derive(Clone, Debug)]
pub struct TTStarInstance {
    structure: AlmostFrobenius,
    herm: HermitianData,
    label: Option<String>,
}

impl TTStarInstance {
    pub fn new(structure: AlmostFrobenius, real: RealStructure) -> Result<Self> {
        let c = structure.chart();
        require_complex(c, "a tt* instance")?;
        if real.chart() != c || real.dim() != structure.dim() {
            return invalid("real structure does not match the structure's chart");
        }
        let mult = structure.mult.constants().iter().flatten().flatten();
        if !all_holomorphic(mult) {
            return invalid("multiplication must be holomorphic");
        }
        let herm = HermitianData::new(structure.metric.matrix().clone(), real)?;
        Ok(TTStarInstance { structure, herm, label: None })
    }

    /// Attach a note carried into every report on this instance.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn structure(&self) -> &AlmostFrobenius {
        &self.structure
    }

    pub fn hermitian(&self) -> &HermitianData {
        &self.herm
    }

    pub fn real_structure(&self) -> &RealStructure {
        self.herm.real_structure()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn higgs(&self, k: usize) -> Mat {
        self.structure.mult.higgs(k)
    }

    pub fn sample(&self, opts: &CheckOpts) -> Result<Vec<Point>> {
        let c = self.structure.constants_and_metric();
        sample(self.chart(), self.real_structure().varying_phase(), opts, |p| {
            let vals = p.values();
            self.herm.evaluable(&vals) && c.iter().all(|f| f.eval_values(&vals).is_ok())
        })
        .map_err(|e| Error::Precondition(format!("no admissible sample point for the Hermitian metric: {e}")))
    }

    /// Involution, compatibility with `g` and hermiticity of `h` to first order, and
    /// `φ†_{k̄} = k φ_k k`.
    pub fn check_invariants(&self, opts: &CheckOpts) -> Result<Report> {
        let pts = self.sample(opts)?;
        let n = self.dim();
        let (mut inv, mut compat, mut herm, mut adj) = (0f64, 0f64, 0f64, 0f64);
        let higgs: Vec<Mat> = (0..n).map(|k| self.higgs(k)).collect();
        let chart = self.chart();
        let logs = self.real_structure().log_derivatives()?;
        for p in &pts {
            let vals = p.values();
            let k = self.real_structure().jet_at(&logs, &vals)?;
            let g = Jet::of(self.structure.metric.matrix(), &vals)?;
            let (i, c) = real_structure_residuals(&k, &g, chart);
            inv = inv.max(i);
            compat = compat.max(c);
            let h = g.mul(&k);
            herm = herm.max(h.sub(&h.transpose().conj(chart)).max_abs());
            let k = k.val;
            for phi in &higgs {
                let f = linalg::eval(phi, &vals)?;
                let kfk = nm::mul(&nm::mul(&k, &nm::conj(&f)), &nm::conj(&k));
                adj = adj.max(nm::max_abs(&nm::sub(&self.herm.adjoint_at(&f, &vals)?, &kfk)));
            }
        }
        let mut rep = Report::new("tt_invariants");
        rep.vanish("involution", inv, opts.tol);
        rep.vanish("compatibility", compat, opts.tol);
        rep.vanish("hermitian", herm, opts.tol);
        rep.vanish("adjoint", adj, opts.tol);
        rep.points = pts;
        Ok(rep)
    }
}

impl AlmostFrobenius {
    fn constants_and_metric(&self) -> Vec<ScalarField> {
        self.mult.constants().iter().flatten().flatten().chain(self.metric.matrix().iter().flatten()).cloned().collect()
    }
}

fn require_invariants(t: &TTStarInstance, opts: &CheckOpts) -> Result<()> {
    let rep = t.check_invariants(opts)?;
    if !rep.pass() {
        return precondition(format!("tt* instance invariants failed: {}", failing(&rep)));
    }
    Ok(())
}

/// `(∂^D φ)_{kl}` as a matrix field.
fn first_equation(t: &TTStarInstance, k: usize, l: usize) -> Mat {
    let d = |m: &Mat, i: usize| -> Mat { m.iter().map(|r| r.iter().map(|x| x.diff(i)).collect()).collect() };
    let (pk, pl) = (t.higgs(k), t.higgs(l));
    let dk = linalg::add(&d(&pl, k), &linalg::commutator(t.herm.chern(k), &pl));
    let dl = linalg::add(&d(&pk, l), &linalg::commutator(t.herm.chern(l), &pk));
    linalg::sub(&dk, &dl)
}

/// Residuals of both tt*-equations over coordinate directions.
pub fn tt_residuals(t: &TTStarInstance, opts: &CheckOpts) -> Result<Report> {
    require_invariants(t, opts)?;
    let pts = t.sample(opts)?;
    let n = t.dim();
    let firsts: Vec<Mat> = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).map(|(k, l)| first_equation(t, k, l)).collect();
    let curv: Vec<Vec<Mat>> = (0..n).map(|k| (0..n).map(|l| t.herm.curvature(k, l)).collect()).collect();
    let higgs: Vec<Mat> = (0..n).map(|k| t.higgs(k)).collect();
    let (mut first, mut second) = (0f64, 0f64);
    for p in &pts {
        let vals = p.values();
        for m in &firsts {
            first = first.max(nm::max_abs(&linalg::eval(m, &vals)?));
        }
        let phis: Vec<NMat> = higgs.iter().map(|m| linalg::eval(m, &vals)).collect::<std::result::Result<_, _>>()?;
        let adjs: Vec<NMat> = phis.iter().map(|m| t.herm.adjoint_at(m, &vals)).collect::<Result<_>>()?;
        for k in 0..n {
            for l in 0..n {
                let r = linalg::eval(&curv[k][l], &vals)?;
                second = second.max(nm::max_abs(&nm::add(&r, &nm::commutator(&phis[k], &adjs[l]))));
            }
        }
    }
    let mut rep = Report::new("tt_star");
    rep.vanish("first", first, opts.tol);
    rep.vanish("second", second, opts.tol);
    if let Some(l) = t.label() {
        rep.note(l.to_string());
    }
    rep.points = pts;
    Ok(rep)
}

/// The two halves of the second tt*-equation separately: flatness of the Chern connection and
/// `[φ_k, φ†_{l̄}] = 0`.
pub fn decoupling(t: &TTStarInstance, opts: &CheckOpts) -> Result<Report> {
    require_invariants(t, opts)?;
    let pts = t.sample(opts)?;
    let n = t.dim();
    let (mut flat, mut comm) = (0f64, 0f64);
    for p in &pts {
        let vals = p.values();
        let phis: Vec<NMat> = (0..n).map(|k| linalg::eval(&t.higgs(k), &vals)).collect::<std::result::Result<_, _>>()?;
        for k in 0..n {
            for l in 0..n {
                flat = flat.max(nm::max_abs(&linalg::eval(&t.herm.curvature(k, l), &vals)?));
                let adj = t.herm.adjoint_at(&phis[l], &vals)?;
                comm = comm.max(nm::max_abs(&nm::commutator(&phis[k], &adj)));
            }
        }
    }
    let mut rep = Report::new("tt_decoupling");
    rep.vanish("chern_flat", flat, opts.tol);
    rep.vanish("higgs_commute", comm, opts.tol);
    rep.points = pts;
    Ok(rep)
}

fn chern_metric_residual(herm: &HermitianData, pts: &[Point]) -> Result<f64> {
    let g = herm.bilinear();
    let mut worst = 0f64;
    let forms: Vec<Mat> = (0..herm.chart().dim())
        .map(|k| {
            let dg: Mat = g.iter().map(|r| r.iter().map(|x| x.diff(k)).collect()).collect();
            let th = herm.chern(k);
            linalg::sub(&linalg::sub(&dg, &linalg::mul(&linalg::transpose(th), g)), &linalg::mul(g, th))
        })
        .collect();
    for p in pts {
        let vals = p.values();
        for f in &forms {
            worst = worst.max(nm::max_abs(&linalg::eval(f, &vals)?));
        }
    }
    Ok(worst)
}

/// `D^c(g) = 0` for the Chern connection `D^c` of `h` (the `(0,1)` part is `∂̄` and `g` is holomorphic).
pub fn chern_preserves_metric(t: &TTStarInstance, opts: &CheckOpts) -> Result<Report> {
    let pts = t.sample(opts)?;
    let mut rep = Report::new("chern_metric");
    rep.vanish("dc_g", chern_metric_residual(&t.herm, &pts)?, opts.tol);
    rep.points = pts;
    Ok(rep)
}

/// Semisimple structure in canonical coordinates with `k(∂_i) = (|η_i| / η_i) ∂_i`.
///
/// Values of `h` are taken on the real slice, where `η_i` must be real and nonzero. The
/// instance is labelled conditional when the semisimple structure fails `check_frobenius`.
pub fn diagonal_real_structure(s: &SemisimpleData, opts: &CheckOpts) -> Result<TTStarInstance> {
    require_complex(&s.chart, "semisimple data for a diagonal real structure")?;
    let a = frobenius::from_semisimple(s)?;
    let phase: Vec<ScalarField> = (0..s.chart.dim()).map(|k| s.eta_k(k)).collect();
    let t = TTStarInstance::new(a, RealStructure::diagonal_phase(phase)?)?;
    let verified = frobenius::check_frobenius(&t.structure, opts).map(|r| r.pass()).unwrap_or(false);
    Ok(if verified { t } else { t.with_label("conditional: the semisimple structure did not pass check_frobenius") })
}

/// Bundle data over a complex chart with real structures on the base and on the fiber.
#[derive(Clone, Debug)]
pub struct ExtensionTTData {
    bundle: BundleData,
    k_m: RealStructure,
    k_v: RealStructure,
}

impl ExtensionTTData {
    pub fn new(bundle: BundleData, k_m: RealStructure, k_v: RealStructure) -> Result<Self> {
        let c = bundle.chart();
        require_complex(c, "bundle data for tt*")?;
        if k_m.chart() != c || k_v.chart() != c {
            return invalid("real structures and bundle data live on different charts");
        }
        if k_m.dim() != bundle.dim() || k_v.dim() != bundle.rank() {
            return invalid("real structure dimensions do not match the bundle");
        }
        let fields = bundle
            .connection()
            .iter()
            .flatten()
            .flatten()
            .chain(bundle.mult_v().iter().flatten().flatten())
            .chain(bundle.unit_v())
            .chain(bundle.gram_v().iter().flatten())
            .chain(bundle.alpha().iter().flatten());
        if !all_holomorphic(fields) {
            return invalid("bundle data must be holomorphic");
        }
        Ok(ExtensionTTData { bundle, k_m, k_v })
    }

    pub fn bundle(&self) -> &BundleData {
        &self.bundle
    }

    pub fn k_m(&self) -> &RealStructure {
        &self.k_m
    }

    pub fn k_v(&self) -> &RealStructure {
        &self.k_v
    }

    pub fn base_instance(&self) -> Result<TTStarInstance> {
        TTStarInstance::new(self.bundle.base().clone(), self.k_m.clone())
    }

    /// `h_V = g_V(·, k_V ·)` with its Chern connection `D^V`.
    pub fn fiber_hermitian(&self) -> Result<HermitianData> {
        HermitianData::new(self.bundle.gram_v().clone(), self.k_v.clone())
    }

    /// `h_V − α*h_M`, equal to `(g_V − α*g_M)(·, k_V ·)` under `α ∘ k_V = k_M ∘ α`.
    pub fn difference_hermitian(&self) -> Result<HermitianData> {
        HermitianData::new(self.bundle.bundle_metric(), self.k_v.clone()).map_err(|e| match e {
            Error::Precondition(_) => Error::Precondition("h_V − α*h_M is degenerate".into()),
            other => other,
        })
    }

    fn varying_phase(&self) -> bool {
        self.k_m.varying_phase() || self.k_v.varying_phase()
    }

    /// The total-space instance: `k` is `k_M` on horizontal lifts and `k_V` on vertical vectors.
    pub fn total_instance(&self, opts: &CheckOpts) -> Result<TTStarInstance> {
        let t = build_total(&self.bundle, opts)?;
        let (tc, p, q) = adapted_frames(&self.bundle)?;
        let sum = self.k_m.embed(&tc)?.direct_sum(&self.k_v.embed(&tc)?);
        let real = RealStructure::from_parts(
            linalg::mul(&p, &sum.left),
            sum.phase,
            linalg::mul(&sum.right, &linalg::conj(&q)),
        )?;
        TTStarInstance::new(t.structure, real)
    }

    fn sample(&self, opts: &CheckOpts, herms: &[&HermitianData]) -> Result<Vec<Point>> {
        let b = &self.bundle;
        let fields: Vec<&ScalarField> = b
            .connection()
            .iter()
            .flatten()
            .flatten()
            .chain(b.gram_v().iter().flatten())
            .chain(b.alpha().iter().flatten())
            .chain(b.base().metric.matrix().iter().flatten())
            .collect();
        sample(b.chart(), self.varying_phase(), opts, |p| {
            let vals = p.values();
            fields.iter().all(|f| f.eval_values(&vals).is_ok())
                && self.k_m.value_at(&vals).is_ok()
                && self.k_v.value_at(&vals).is_ok()
                && herms.iter().all(|h| h.evaluable(&vals))
        })
        .map_err(|e| Error::Precondition(format!("no admissible sample point for the bundle data: {e}")))
    }

    /// `α ∘ k_V = k_M ∘ α` together with the involution and compatibility of `k_M` and `k_V`,
    /// all to first order at each point.
    pub fn check_compatibility(&self, opts: &CheckOpts) -> Result<Report> {
        let pts = self.sample(opts, &[])?;
        let b = &self.bundle;
        let c = b.chart();
        let (log_m, log_v) = (self.k_m.log_derivatives()?, self.k_v.log_derivatives()?);
        let (mut comp, mut inv, mut gm, mut gv) = (0f64, 0f64, 0f64, 0f64);
        for p in &pts {
            let vals = p.values();
            let km = self.k_m.jet_at(&log_m, &vals)?;
            let kv = self.k_v.jet_at(&log_v, &vals)?;
            let al = Jet::of(b.alpha(), &vals)?;
            comp = comp.max(al.mul(&kv).sub(&km.mul(&al.conj(c))).max_abs());
            for (k, g, slot) in [(&km, b.base().metric.matrix(), &mut gm), (&kv, b.gram_v(), &mut gv)] {
                let (i, cg) = real_structure_residuals(k, &Jet::of(g, &vals)?, c);
                inv = inv.max(i);
                *slot = slot.max(cg);
            }
        }
        let mut rep = Report::new("tt_compatibility");
        rep.vanish("alpha_real", comp, opts.tol);
        rep.vanish("involution", inv, opts.tol);
        rep.vanish("k_m_g_m", gm, opts.tol);
        rep.vanish("k_v_g_v", gv, opts.tol);
        rep.points = pts;
        Ok(rep)
    }

    /// `𝒟_k(α) = ∂_k α + Θ^M_k α − α Θ^V_k` (an `n × r` matrix field).
    pub fn d_alpha(&self, k: usize) -> Result<Mat> {
        let hm = self.base_instance()?.herm;
        let hv = self.fiber_hermitian()?;
        Ok(d_alpha_with(&self.bundle, &hm, &hv, k))
    }
}

fn d_alpha_with(b: &BundleData, hm: &HermitianData, hv: &HermitianData, k: usize) -> Mat {
    let al = b.alpha();
    let dal: Mat = al.iter().map(|r| r.iter().map(|x| x.diff(k)).collect()).collect();
    linalg::sub(&linalg::add(&dal, &linalg::mul(hm.chern(k), al)), &linalg::mul(al, hv.chern(k)))
}

/// Matrix of `w ∘_V ·`, entry `[c][b]`.
fn fiber_operator(mult_v: &Tensor3, w: &[ScalarField]) -> Mat {
    let r = w.len();
    (0..r)
        .map(|c| {
            (0..r)
                .map(|b| {
                    let mut s = ScalarField::zero(w[0].chart());
                    for (a, wa) in w.iter().enumerate() {
                        if !wa.is_zero() && !mult_v[c][a][b].is_zero() {
                            s = s + wa.mul(&mult_v[c][a][b]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Conditions (i)–(iv) and the tt*-equations on the base, against the tt*-equations on the
/// total space.
///
/// Condition (iv) is evaluated as
/// `h_V(R^V s, s₁) − h_M(R^M α(s), α(s₁)) + h_M(𝒟_X(α)(s), D^M_Y(α(s₁)) − α(D^{M,V}_Y s₁)) = 0`,
/// the form in which the curvature of the total Chern connection enters the second equation.
pub fn check_main_theorem(e: &ExtensionTTData, opts: &CheckOpts) -> Result<Equivalence> {
    let compat = e.check_compatibility(opts)?;
    if !compat.pass() {
        return invalid(format!("real structures are not compatible: {}", failing(&compat)));
    }
    let mult = check_conditions_multiplication(&e.bundle, opts)?;
    if !mult.pass() {
        return precondition(format!("the total space is not an F-manifold: {}", failing(&mult)));
    }
    let b = &e.bundle;
    let (n, r) = (b.dim(), b.rank());
    let frame = b.parallel_frame().ok_or_else(|| Error::Invalid("a parallel frame is required".into()))?;
    let base = e.base_instance()?;
    let hm = base.herm.clone();
    let hv = e.fiber_hermitian()?;
    let hmv = e.difference_hermitian()?;
    let pts = e.sample(opts, &[&hm, &hv, &hmv])?;
    let base_tt = tt_residuals(&base, opts)?;

    let mm = &b.base().mult;
    let d = |m: &Mat, i: usize| -> Mat { m.iter().map(|row| row.iter().map(|x| x.diff(i)).collect()).collect() };
    // (i): D^M-parallel multiplication by α(s) for parallel s
    let mut tt1 = Vec::new();
    for m in 0..r {
        let s: Vec<ScalarField> = (0..r).map(|a| frame[a][m].clone()).collect();
        let op = mm.operator(&b.alpha_of(&s));
        for k in 0..n {
            tt1.push(linalg::add(&d(&op, k), &linalg::commutator(hm.chern(k), &op)));
        }
    }
    // (ii): Θ^V_k − A_k − (D^V_k e_V) ∘_V
    let mut tt2 = Vec::new();
    for k in 0..n {
        let th = hv.chern(k);
        let dv_e: Vec<ScalarField> = b
            .unit_v()
            .iter()
            .zip(linalg::mul_vec(th, b.unit_v()))
            .map(|(u, t)| u.diff(k) + t)
            .collect();
        tt2.push(linalg::sub(&linalg::sub(th, &b.connection()[k]), &fiber_operator(b.mult_v(), &dv_e)));
    }
    let dal: Vec<Mat> = (0..n).map(|k| d_alpha_with(b, &hm, &hv, k)).collect();
    let w: Vec<Mat> = (0..n)
        .map(|l| {
            let al = b.alpha();
            let dl: Mat = al.iter().map(|row| row.iter().map(|x| x.diff(l)).collect()).collect();
            linalg::sub(&linalg::add(&dl, &linalg::mul(hm.chern(l), al)), &linalg::mul(al, hmv.chern(l)))
        })
        .collect();
    let rm: Vec<Vec<Mat>> = (0..n).map(|k| (0..n).map(|l| hm.curvature(k, l)).collect()).collect();
    let rv: Vec<Vec<Mat>> = (0..n).map(|k| (0..n).map(|l| hv.curvature(k, l)).collect()).collect();
    let phi_v: Vec<Mat> = (0..r).map(|a| (0..r).map(|c| (0..r).map(|dd| b.mult_v()[c][a][dd].neg()).collect()).collect()).collect();

    let (mut c1, mut c2, mut c3, mut c4) = (0f64, 0f64, 0f64, 0f64);
    for p in &pts {
        let vals = p.values();
        for m in tt1.iter().chain(&tt2) {
            let v = nm::max_abs(&linalg::eval(m, &vals)?);
            if tt1.iter().any(|x| std::ptr::eq(x, m)) {
                c1 = c1.max(v);
            } else {
                c2 = c2.max(v);
            }
        }
        let km = e.k_m.value_at(&vals)?;
        let kv = e.k_v.value_at(&vals)?;
        let al = linalg::eval(b.alpha(), &vals)?;
        let phis: Vec<NMat> = (0..n).map(|k| linalg::eval(&mm.higgs(k), &vals)).collect::<std::result::Result<_, _>>()?;
        let kphik = |k: &NMat, f: &NMat| nm::mul(&nm::mul(k, &nm::conj(f)), &nm::conj(k));
        for a in 0..r {
            let mut phi_a = nm::zeros(n, n);
            for (i, ph) in phis.iter().enumerate() {
                phi_a = nm::add(&phi_a, &nm::scale(ph, &al[i][a]));
            }
            let adj = kphik(&km, &phi_a);
            for ph in &phis {
                c3 = c3.max(nm::max_abs(&nm::commutator(ph, &adj)));
            }
        }
        let pv: Vec<NMat> = phi_v.iter().map(|m| linalg::eval(m, &vals)).collect::<std::result::Result<_, _>>()?;
        for x in &pv {
            for y in &pv {
                c3 = c3.max(nm::max_abs(&nm::commutator(x, &kphik(&kv, y))));
            }
        }
        let h_m = hm.value_at(&vals)?;
        let h_v = hv.value_at(&vals)?;
        let alb = nm::conj(&al);
        for k in 0..n {
            let dk = linalg::eval(&dal[k], &vals)?;
            for l in 0..n {
                let rvk = linalg::eval(&rv[k][l], &vals)?;
                let rmk = linalg::eval(&rm[k][l], &vals)?;
                let wl = linalg::eval(&w[l], &vals)?;
                let lhs_v = nm::mul(&nm::transpose(&rvk), &h_v);
                let lhs_m = nm::mul(&nm::mul(&nm::transpose(&nm::mul(&rmk, &al)), &h_m), &alb);
                let rhs = nm::mul(&nm::mul(&nm::transpose(&dk), &h_m), &nm::conj(&wl));
                c4 = c4.max(nm::max_abs(&nm::add(&nm::sub(&lhs_v, &lhs_m), &rhs)));
            }
        }
    }
    let mut conditions = Report::new("main_theorem_conditions");
    conditions.vanish("base_first", base_tt.residual("first"), opts.tol);
    conditions.vanish("base_second", base_tt.residual("second"), opts.tol);
    conditions.vanish("tt_1", c1, opts.tol);
    conditions.vanish("tt_2", c2, opts.tol);
    conditions.vanish("brackets", c3, opts.tol);
    conditions.vanish("curvature", c4, opts.tol);
    conditions.points = pts;
    let total = e.total_instance(opts)?;
    let direct = tt_residuals(&total, opts)?;
    Ok(Equivalence { conditions, direct })
}

/// `D^M(g_M)`, `D^V(g_V)` and, directly on the total space, `D^c(g)`.
pub fn check_chern_metric(e: &ExtensionTTData, opts: &CheckOpts) -> Result<Report> {
    let hm = e.base_instance()?.herm;
    let hv = e.fiber_hermitian()?;
    let pts = e.sample(opts, &[&hm, &hv])?;
    let total = e.total_instance(opts)?;
    let direct = chern_preserves_metric(&total, opts)?;
    let mut rep = Report::new("chern_metric");
    rep.vanish("dm_gm", chern_metric_residual(&hm, &pts)?, opts.tol);
    rep.vanish("dv_gv", chern_metric_residual(&hv, &pts)?, opts.tol);
    rep.vanish("dc_g", direct.residual("dc_g"), opts.tol);
    rep.points = pts;
    Ok(rep)
}

/// Tangent-bundle copy `V ≅ T^{1,0}M` over a semisimple structure: `α = Id`, `∘_V` and `k_V`
/// transported, `g_V = k0 α*g_M`, and `D` trivial in canonical coordinates.
pub fn build_detailed_example(s: &SemisimpleData, k0: &Q) -> Result<ExtensionTTData> {
    require_complex(&s.chart, "semisimple data for the tangent-copy extension")?;
    if k0.is_one() {
        return invalid("k0 = 1 makes g_V − α*g_M degenerate");
    }
    let base = frobenius::from_semisimple(s)?;
    let c = s.chart.clone();
    let n = c.dim();
    let kv = ScalarField::constant(&c, k0.clone());
    let gram = linalg::scale(base.metric.matrix(), &kv);
    let bundle = BundleData::new(
        base.clone(),
        vec![linalg::zeros(&c, n, n); n],
        base.mult.constants().clone(),
        base.unit().comps.clone(),
        gram,
        linalg::identity(&c, n),
    )?;
    let phase: Vec<ScalarField> = (0..n).map(|k| s.eta_k(k)).collect();
    let k = RealStructure::diagonal_phase(phase)?;
    ExtensionTTData::new(bundle, k.clone(), k)
}

/// Conclusions of the triviality statement (trivial multiplication and constant `k` in flat
/// coordinates, `k(Z₁∘Z₂) = μ̄ k(Z₁)∘k(Z₂)`) on an instance satisfying its hypotheses
/// (tt*-equations, `k(e) = μ e`, `D^c(g) = 0`).
pub fn check_prop_second(t: &TTStarInstance, mu: &C, opts: &CheckOpts) -> Result<Report> {
    let tt = tt_residuals(t, opts)?;
    let dc = chern_preserves_metric(t, opts)?;
    let pts = t.sample(opts)?;
    let n = t.dim();
    let mu_n = Num::from_c(mu);
    let unit = &t.structure.unit().comps;
    let mut ke = 0f64;
    for p in &pts {
        let vals = p.values();
        let k = t.real_structure().value_at(&vals)?;
        let e = linalg::eval_vec(unit, &vals)?;
        let ke_v = nm::mul_vec(&k, &e.iter().map(Num::conj).collect::<Vec<_>>());
        let diff: Vec<Num> = ke_v.iter().zip(&e).map(|(x, y)| x.sub(&mu_n.mul(y))).collect();
        ke = ke.max(nm::max_abs_vec(&diff));
    }
    let mut hyp = Vec::new();
    if !tt.pass() {
        hyp.push(format!("tt*-equations ({})", failing(&tt)));
    }
    if ke > opts.tol {
        hyp.push(format!("k(e) = μ e (residual {ke:.3e})"));
    }
    if !dc.pass() {
        hyp.push("D^c(g) = 0".to_string());
    }
    if !hyp.is_empty() {
        return precondition(format!("hypotheses not met: {}", hyp.join("; ")));
    }

    let gamma = christoffel(&t.structure.metric)?;
    let c = t.structure.mult.constants();
    let nabla_c = covariant_mult(&t.structure.mult, &gamma);
    let real = t.real_structure();
    let chart = t.chart();
    let logs: Vec<(Mat, Mat)> =
        (0..n).map(|k| Ok((real.log_derivative(k)?, real.log_derivative(chart.conj_index(k))?))).collect::<Result<_>>()?;
    let (mut triv, mut kconst, mut morph) = (0f64, 0f64, 0f64);
    let mu_bar = mu_n.conj();
    for p in &pts {
        let vals = p.values();
        for t3 in &nabla_c {
            for m in t3 {
                triv = triv.max(nm::max_abs(&linalg::eval(m, &vals)?));
            }
        }
        let k = real.value_at(&vals)?;
        let g3: Vec<NMat> = gamma.iter().map(|m| linalg::eval(m, &vals)).collect::<std::result::Result<_, _>>()?;
        for (m, (lk, lb)) in logs.iter().enumerate() {
            // Γ_m[a][b] = Γ^a_{mb}
            let gm: NMat = (0..n).map(|a| (0..n).map(|bb| g3[a][m][bb].clone()).collect()).collect();
            let dk = nm::mul(&linalg::eval(lk, &vals)?, &k);
            let db = nm::mul(&linalg::eval(lb, &vals)?, &k);
            kconst = kconst.max(nm::max_abs(&nm::add(&dk, &nm::mul(&gm, &k))));
            kconst = kconst.max(nm::max_abs(&nm::sub(&db, &nm::mul(&k, &nm::conj(&gm)))));
        }
        let cv: Vec<NMat> = c.iter().map(|m| linalg::eval(m, &vals)).collect::<std::result::Result<_, _>>()?;
        for i in 0..n {
            for j in 0..n {
                let prod: Vec<Num> = (0..n).map(|a| cv[a][i][j].conj()).collect();
                let lhs = nm::mul_vec(&k, &prod);
                for (a, l) in lhs.iter().enumerate() {
                    let mut rhs = Num::zero();
                    for x in 0..n {
                        for y in 0..n {
                            rhs = rhs.add(&k[x][i].mul(&k[y][j]).mul(&cv[a][x][y]));
                        }
                    }
                    morph = morph.max(l.sub(&mu_bar.mul(&rhs)).abs());
                }
            }
        }
    }
    let mut rep = Report::new("prop_second");
    rep.vanish("trivial", triv, opts.tol);
    rep.vanish("k_constant", kconst, opts.tol);
    rep.vanish("morphism", morph, opts.tol);
    rep.points = pts;
    Ok(rep)
}

/// `∇_m c^a_ij` for the Levi-Civita connection, indexed `[m][a][i][j]`.
fn covariant_mult(mult: &Multiplication, gamma: &Tensor3) -> Vec<Tensor3> {
    let n = mult.dim();
    let c = mult.constants();
    let z = ScalarField::zero(mult.chart());
    (0..n)
        .map(|m| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| {
                                    let mut s = c[a][i][j].diff(m);
                                    for bb in 0..n {
                                        s = s + gamma[a][m][bb].mul(&c[bb][i][j])
                                            - gamma[bb][m][i].mul(&c[a][bb][j])
                                            - gamma[bb][m][j].mul(&c[a][i][bb]);
                                    }
                                    if s.is_zero() {
                                        z.clone()
                                    } else {
                                        s
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

