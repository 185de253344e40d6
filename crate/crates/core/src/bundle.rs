//! Total spaces of vector bundles `V → M`: the multiplication and metric built from a
//! connection, fiberwise algebra data and a morphism `α: V → TM`, together with the
//! conditions under which the result is an F-manifold, carries an admissible metric,
//! or is flat.
//!
//! Conventions: sections are column vectors in the coordinate frame `e_a` of `V`;
//! `D_i s = ∂_i s + A_i s`; `alpha[k][a]` is the `∂_k` component of `α(e_a)`;
//! `mult_v[c][a][b]` is the `e_c` component of `e_a ∘_V e_b`. The total chart has the base
//! coordinates followed by fiber coordinates `v^a`, and the horizontal lift of `∂_i` is
//! `∂_{x^i} − (A_i v)^a ∂_{v^a}`.

use crate::error::{invalid, precondition, Error, Result};
use crate::frobenius::{self, associativity_at, commutativity_at, invariance_at, unit_at, AlmostFrobenius, SemisimpleData};
use crate::linalg::{self, Mat, NMat};
use crate::report::{sample_points, CheckOpts, Report};
use crate::scalar::{Chart, Num, Point, ScalarField, Q};
use crate::tensor::{self, christoffel, lie_derivative_mult, Metric, MetricJets, Multiplication, Tensor3, VectorField, N3};
use num_traits::Zero;

#[derive(Clone, Debug)]
pub struct BundleData {
    base: AlmostFrobenius,
    connection: Vec<Mat>,
    mult_v: Tensor3,
    unit_v: Vec<ScalarField>,
    gram_v: Mat,
    alpha: Mat,
    parallel: Option<Mat>,
    fiber_names: Vec<String>,
}

fn check_shape(m: &Mat, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return invalid(format!("{what} must be {rows}x{cols}"));
    }
    Ok(())
}

fn on_chart<'a>(fields: impl IntoIterator<Item = &'a ScalarField>, chart: &Chart, what: &str) -> Result<()> {
    if fields.into_iter().any(|f| f.chart() != chart) {
        return invalid(format!("{what} lives on a different chart than the base"));
    }
    Ok(())
}

fn default_fiber_names(base: &Chart, r: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(r);
    let mut k = 1;
    while out.len() < r {
        let name = format!("v{k}");
        if base.index_of(&name).is_none() {
            out.push(name);
        }
        k += 1;
    }
    out
}

impl BundleData {
    pub fn new(
        base: AlmostFrobenius,
        connection: Vec<Mat>,
        mult_v: Tensor3,
        unit_v: Vec<ScalarField>,
        gram_v: Mat,
        alpha: Mat,
    ) -> Result<Self> {
        let chart = base.chart().clone();
        let n = base.dim();
        let r = unit_v.len();
        if r == 0 {
            return invalid("bundle rank must be positive");
        }
        if connection.len() != n {
            return invalid(format!("expected {n} connection matrices, got {}", connection.len()));
        }
        for a in &connection {
            check_shape(a, r, r, "connection matrix")?;
            on_chart(a.iter().flatten(), &chart, "connection")?;
        }
        if mult_v.len() != r {
            return invalid(format!("fiber multiplication must be {r}x{r}x{r}"));
        }
        for m in &mult_v {
            check_shape(m, r, r, "fiber multiplication slice")?;
            on_chart(m.iter().flatten(), &chart, "fiber multiplication")?;
        }
        check_shape(&gram_v, r, r, "fiber metric")?;
        check_shape(&alpha, n, r, "alpha")?;
        on_chart(gram_v.iter().flatten(), &chart, "fiber metric")?;
        on_chart(alpha.iter().flatten(), &chart, "alpha")?;
        on_chart(unit_v.iter(), &chart, "fiber unit")?;
        for (c, m) in mult_v.iter().enumerate() {
            for a in 0..r {
                for b in a + 1..r {
                    if m[a][b] != m[b][a] {
                        return invalid(format!("fiber multiplication is not commutative at c^{}_{}{}", c + 1, a + 1, b + 1));
                    }
                }
            }
        }
        for a in 0..r {
            for b in a + 1..r {
                if gram_v[a][b] != gram_v[b][a] {
                    return invalid(format!("fiber metric is not symmetric at ({}, {})", a + 1, b + 1));
                }
            }
        }
        let fiber_names = default_fiber_names(&chart, r);
        Ok(BundleData { base, connection, mult_v, unit_v, gram_v, alpha, parallel: None, fiber_names })
    }

    /// Data given in a frame `G` of D-parallel sections (columns of `frame`): the connection is
    /// `A_i = −(∂_i G) G⁻¹` and the frame-constant data is transported to the coordinate frame.
    pub fn from_parallel_frame(
        base: AlmostFrobenius,
        frame: Mat,
        mult_frame: Tensor3,
        unit_frame: Vec<ScalarField>,
        gram_frame: Mat,
        alpha_frame: Mat,
    ) -> Result<Self> {
        let chart = base.chart().clone();
        let n = base.dim();
        let r = unit_frame.len();
        check_shape(&frame, r, r, "parallel frame")?;
        on_chart(frame.iter().flatten(), &chart, "parallel frame")?;
        let ginv = linalg::inverse(&frame, &chart).ok_or_else(|| Error::Invalid("parallel frame is degenerate".into()))?;
        let connection: Vec<Mat> = (0..n)
            .map(|i| {
                let dg: Mat = frame.iter().map(|row| row.iter().map(|x| x.diff(i).neg()).collect()).collect();
                linalg::mul(&dg, &ginv)
            })
            .collect();
        if mult_frame.len() != r {
            return invalid(format!("fiber multiplication must be {r}x{r}x{r}"));
        }
        for m in &mult_frame {
            check_shape(m, r, r, "fiber multiplication slice")?;
        }
        // c^k_ij = G^k_c ĉ^c_ab (G⁻¹)^a_i (G⁻¹)^b_j
        let zero = ScalarField::zero(&chart);
        let mut pulled: Vec<Mat> = Vec::with_capacity(r);
        for m in &mult_frame {
            pulled.push(linalg::mul(&linalg::mul(&linalg::transpose(&ginv), m), &ginv));
        }
        let mut mult_v = vec![vec![vec![zero.clone(); r]; r]; r];
        for (k, mk) in mult_v.iter_mut().enumerate() {
            for (c, pc) in pulled.iter().enumerate() {
                if frame[k][c].is_zero() {
                    continue;
                }
                for i in 0..r {
                    for j in 0..r {
                        mk[i][j] = &mk[i][j] + &frame[k][c].mul(&pc[i][j]);
                    }
                }
            }
        }
        let unit_v = linalg::mul_vec(&frame, &unit_frame);
        check_shape(&gram_frame, r, r, "fiber metric")?;
        let gram_v = linalg::mul(&linalg::mul(&linalg::transpose(&ginv), &gram_frame), &ginv);
        check_shape(&alpha_frame, n, r, "alpha")?;
        let alpha = linalg::mul(&alpha_frame, &ginv);
        BundleData::new(base, connection, mult_v, unit_v, gram_v, alpha)?.with_parallel_frame(frame)
    }

    /// Declare the columns of `frame` to be D-parallel sections spanning `V`.
    pub fn with_parallel_frame(mut self, frame: Mat) -> Result<Self> {
        let r = self.rank();
        check_shape(&frame, r, r, "parallel frame")?;
        on_chart(frame.iter().flatten(), self.base.chart(), "parallel frame")?;
        if linalg::det(&frame, self.base.chart()).is_zero() {
            return invalid("parallel frame is degenerate");
        }
        self.parallel = Some(frame);
        Ok(self)
    }

    pub fn with_fiber_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.rank() {
            return invalid(format!("expected {} fiber coordinate names", self.rank()));
        }
        self.fiber_names = names.iter().map(|s| s.as_ref().to_string()).collect();
        self.total_chart()?;
        Ok(self)
    }

    pub fn base(&self) -> &AlmostFrobenius {
        &self.base
    }

    pub fn chart(&self) -> &Chart {
        self.base.chart()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn rank(&self) -> usize {
        self.unit_v.len()
    }

    pub fn connection(&self) -> &[Mat] {
        &self.connection
    }

    pub fn mult_v(&self) -> &Tensor3 {
        &self.mult_v
    }

    pub fn unit_v(&self) -> &[ScalarField] {
        &self.unit_v
    }

    pub fn gram_v(&self) -> &Mat {
        &self.gram_v
    }

    pub fn alpha(&self) -> &Mat {
        &self.alpha
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber_names
    }

    /// The declared parallel frame, or the coordinate frame when the connection vanishes.
    pub fn parallel_frame(&self) -> Option<Mat> {
        match &self.parallel {
            Some(f) => Some(f.clone()),
            None if self.connection.iter().all(linalg::is_zero) => Some(linalg::identity(self.chart(), self.rank())),
            None => None,
        }
    }

    pub fn total_chart(&self) -> Result<Chart> {
        Ok(self.chart().extend(&self.fiber_names)?)
    }

    /// `g_V − α*g_M`.
    pub fn bundle_metric(&self) -> Mat {
        let pulled = linalg::mul(&linalg::mul(&linalg::transpose(&self.alpha), self.base.metric.matrix()), &self.alpha);
        linalg::sub(&self.gram_v, &pulled)
    }

    /// `α(s)` as a vector field on the base.
    pub fn alpha_of(&self, s: &[ScalarField]) -> VectorField {
        VectorField::new(self.chart(), linalg::mul_vec(&self.alpha, s)).expect("shape checked")
    }

    /// `s ∘_V t`.
    pub fn product_v(&self, s: &[ScalarField], t: &[ScalarField]) -> Vec<ScalarField> {
        let r = self.rank();
        (0..r)
            .map(|c| {
                let mut acc = ScalarField::zero(self.chart());
                for a in 0..r {
                    for b in 0..r {
                        if !self.mult_v[c][a][b].is_zero() && !s[a].is_zero() && !t[b].is_zero() {
                            acc = acc + self.mult_v[c][a][b].mul(&s[a]).mul(&t[b]);
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `D_i s`.
    pub fn covariant(&self, i: usize, s: &[ScalarField]) -> Vec<ScalarField> {
        let a = linalg::mul_vec(&self.connection[i], s);
        s.iter().zip(a).map(|(x, y)| x.diff(i) + y).collect()
    }

    /// `D_X s`.
    pub fn covariant_along(&self, x: &VectorField, s: &[ScalarField]) -> Vec<ScalarField> {
        let mut out = vec![ScalarField::zero(self.chart()); self.rank()];
        for (i, xi) in x.comps.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (o, d) in out.iter_mut().zip(self.covariant(i, s)) {
                *o = &*o + &xi.mul(&d);
            }
        }
        out
    }

    /// `R^D_ij = ∂_i A_j − ∂_j A_i + [A_i, A_j]`.
    pub fn curvature(&self, i: usize, j: usize) -> Mat {
        let da: Mat = self.connection[j].iter().map(|r| r.iter().map(|x| x.diff(i)).collect()).collect();
        let db: Mat = self.connection[i].iter().map(|r| r.iter().map(|x| x.diff(j)).collect()).collect();
        linalg::add(&linalg::sub(&da, &db), &linalg::commutator(&self.connection[i], &self.connection[j]))
    }

    fn coordinate_section(&self, a: usize) -> Vec<ScalarField> {
        (0..self.rank()).map(|b| if a == b { ScalarField::one(self.chart()) } else { ScalarField::zero(self.chart()) }).collect()
    }

    fn all_fields(&self) -> Vec<&ScalarField> {
        let mut v: Vec<&ScalarField> = self.base.mult.constants().iter().flatten().flatten().collect();
        v.extend(self.base.metric.matrix().iter().flatten());
        v.extend(self.base.unit().comps.iter());
        v.extend(self.connection.iter().flatten().flatten());
        v.extend(self.mult_v.iter().flatten().flatten());
        v.extend(self.unit_v.iter());
        v.extend(self.gram_v.iter().flatten());
        v.extend(self.alpha.iter().flatten());
        v
    }

    /// Base points where all data evaluates, `g_M` and `g_V − α*g_M` are invertible and `extra` evaluates.
    fn sample_base(&self, opts: &CheckOpts, extra: &[&ScalarField]) -> Result<Vec<Point>> {
        let dm = self.base.metric.det();
        let dh = linalg::det(&self.bundle_metric(), self.chart());
        if dh.is_zero() {
            return precondition("g_V − α*g_M is degenerate");
        }
        let fields = self.all_fields();
        Ok(sample_points(self.chart(), opts.points, opts.seed, |p| {
            let vals = p.values();
            let nz = |f: &ScalarField| matches!(f.eval_values(&vals), Ok(d) if !d.is_negligible());
            nz(&dm) && nz(&dh) && fields.iter().chain(extra).all(|f| f.eval_values(&vals).is_ok())
        })?)
    }

    /// Residuals of `α(e_V) = e_M`, `α(v ∘_V w) = α(v) ∘_M α(w)` and of the fiber algebra axioms.
    pub fn check_invariants(&self, opts: &CheckOpts) -> Result<Report> {
        let pts = self.sample_base(opts, &[])?;
        let r = self.rank();
        let n = self.dim();
        let mut rep = Report::new("bundle_data");
        let (mut wu, mut wm, mut va, mut vu, mut vi) = (0f64, 0f64, 0f64, 0f64, 0f64);
        for p in &pts {
            let vals = p.values();
            let cm = eval3(self.base.mult.constants(), &vals)?;
            let cv = eval3(&self.mult_v, &vals)?;
            let al = linalg::eval(&self.alpha, &vals)?;
            let ev = linalg::eval_vec(&self.unit_v, &vals)?;
            let em = linalg::eval_vec(&self.base.unit().comps, &vals)?;
            let gv = linalg::eval(&self.gram_v, &vals)?;
            let ae = linalg::num::mul_vec(&al, &ev);
            wu = wu.max(ae.iter().zip(&em).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            for a in 0..r {
                for b in 0..r {
                    for k in 0..n {
                        let mut lhs = Num::zero();
                        for c in 0..r {
                            lhs = lhs + al[k][c].mul(&cv[c][a][b]);
                        }
                        let mut rhs = Num::zero();
                        for i in 0..n {
                            for j in 0..n {
                                rhs = rhs + cm[k][i][j].mul(&al[i][a]).mul(&al[j][b]);
                            }
                        }
                        wm = wm.max((lhs - rhs).abs());
                    }
                }
            }
            va = va.max(associativity_at(&cv)).max(commutativity_at(&cv));
            vu = vu.max(unit_at(&cv, &ev));
            vi = vi.max(invariance_at(&cv, &gv));
        }
        rep.vanish("alpha_unit", wu, opts.tol);
        rep.vanish("alpha_mult", wm, opts.tol);
        rep.vanish("v_associativity", va, opts.tol);
        rep.vanish("v_unit", vu, opts.tol);
        rep.vanish("v_invariance", vi, opts.tol);
        rep.points = pts;
        Ok(rep)
    }
}

fn eval3(t: &Tensor3, vals: &[Num]) -> Result<N3> {
    Ok(t.iter().map(|m| linalg::eval(m, vals)).collect::<std::result::Result<_, _>>()?)
}

fn max_abs_at(fields: &[ScalarField], pts: &[Point], base_dim: usize) -> Result<f64> {
    let live: Vec<&ScalarField> = fields.iter().filter(|f| !f.is_zero()).collect();
    let mut worst: f64 = 0.0;
    if live.is_empty() {
        return Ok(worst);
    }
    for p in pts {
        let vals = &p.values()[..base_dim];
        for f in &live {
            worst = worst.max(f.eval_values(vals)?.abs());
        }
    }
    Ok(worst)
}

fn require_pass(rep: &Report, what: &str) -> Result<()> {
    if rep.pass() {
        Ok(())
    } else {
        precondition(format!("{what} failed: {}", rep.failed().join(", ")))
    }
}

/// Multiplication and metric on the total space, with the vertical unit `e_V`.
#[derive(Clone, Debug)]
pub struct TotalStructure {
    pub structure: AlmostFrobenius,
    pub base_dim: usize,
}

impl TotalStructure {
    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    pub fn mult(&self) -> &Multiplication {
        &self.structure.mult
    }

    pub fn metric(&self) -> &Metric {
        &self.structure.metric
    }

    pub fn unit(&self) -> &VectorField {
        self.structure.unit()
    }
}

/// Total chart, the matrix `P` whose columns are the adapted frame `(H_i, e_a)` in coordinates,
/// and its inverse `Q`.
pub(crate) fn adapted_frames(b: &BundleData) -> Result<(Chart, Mat, Mat)> {
    let tc = b.total_chart()?;
    let n = b.dim();
    let r = b.rank();
    let mut p = linalg::identity(&tc, n + r);
    let mut q = linalg::identity(&tc, n + r);
    for (i, ai) in b.connection.iter().enumerate() {
        for a in 0..r {
            let mut s = ScalarField::zero(&tc);
            for c in 0..r {
                if !ai[a][c].is_zero() {
                    s = s + ai[a][c].embed(&tc)?.mul(&ScalarField::var(&tc, n + c));
                }
            }
            p[n + a][i] = s.neg();
            q[n + a][i] = s;
        }
    }
    Ok((tc, p, q))
}

/// Assemble the total-space multiplication and metric in the coordinate frame `(∂_x, ∂_v)`.
pub fn build_total(b: &BundleData, opts: &CheckOpts) -> Result<TotalStructure> {
    require_pass(&b.check_invariants(opts)?, "bundle data invariants")?;
    b.sample_base(opts, &[])?;
    let (tc, p, q) = adapted_frames(b)?;
    let n = b.dim();
    let r = b.rank();
    let big = n + r;
    let zero = ScalarField::zero(&tc);
    let emb = |f: &ScalarField| f.embed(&tc);
    let cm = b.base.mult.constants();
    let mut adapted = vec![vec![vec![zero.clone(); big]; big]; big];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                adapted[k][i][j] = emb(&cm[k][i][j])?;
            }
        }
        for a in 0..r {
            for i in 0..n {
                let mut s = ScalarField::zero(b.chart());
                for m in 0..n {
                    if !b.alpha[m][a].is_zero() && !cm[k][m][i].is_zero() {
                        s = s + b.alpha[m][a].mul(&cm[k][m][i]);
                    }
                }
                let s = emb(&s)?;
                adapted[k][n + a][i] = s.clone();
                adapted[k][i][n + a] = s;
            }
        }
    }
    for c in 0..r {
        for a in 0..r {
            for d in 0..r {
                adapted[n + c][n + a][n + d] = emb(&b.mult_v[c][a][d])?;
            }
        }
    }
    let qt = linalg::transpose(&q);
    let pulled: Vec<Mat> = adapted.iter().map(|m| linalg::mul(&linalg::mul(&qt, m), &q)).collect();
    let mut coord = vec![vec![vec![zero.clone(); big]; big]; big];
    for (k, ck) in coord.iter_mut().enumerate() {
        for (l, pl) in pulled.iter().enumerate() {
            if p[k][l].is_zero() {
                continue;
            }
            for i in 0..big {
                for j in 0..big {
                    if !pl[i][j].is_zero() {
                        ck[i][j] = &ck[i][j] + &p[k][l].mul(&pl[i][j]);
                    }
                }
            }
        }
    }
    let gm = linalg::embed(b.base.metric.matrix(), &tc)?;
    let al = linalg::embed(&b.alpha, &tc)?;
    let gv = linalg::embed(&b.gram_v, &tc)?;
    let mixed = linalg::mul(&gm, &al);
    let mut ghat = linalg::zeros(&tc, big, big);
    for i in 0..n {
        for j in 0..n {
            ghat[i][j] = gm[i][j].clone();
        }
        for a in 0..r {
            ghat[i][n + a] = mixed[i][a].clone();
            ghat[n + a][i] = mixed[i][a].clone();
        }
    }
    for a in 0..r {
        for c in 0..r {
            ghat[n + a][n + c] = gv[a][c].clone();
        }
    }
    let g = linalg::mul(&linalg::mul(&qt, &ghat), &q);
    let mut unit = VectorField::zero(&tc);
    for a in 0..r {
        unit.comps[n + a] = emb(&b.unit_v[a])?;
    }
    let mult = Multiplication::new(&tc, coord, unit)?;
    let metric = Metric::new(&tc, g)?;
    Ok(TotalStructure { structure: AlmostFrobenius::new(metric, mult)?, base_dim: n })
}

/// Verdicts of a set of conditions and of the direct check they are claimed to be equivalent to.
#[derive(Clone, Debug)]
pub struct Equivalence {
    pub conditions: Report,
    pub direct: Report,
}

impl Equivalence {
    pub fn agree(&self) -> bool {
        self.conditions.pass() == self.direct.pass()
    }

    /// One `agreement` check plus both verdicts as notes.
    pub fn summary(&self, title: &str) -> Report {
        let mut rep = Report::new(title);
        rep.vanish("agreement", if self.agree() { 0.0 } else { 1.0 }, 0.0);
        let v = |r: &Report| if r.pass() { "pass" } else { "fail" };
        rep.note(format!("conditions: {}", v(&self.conditions)));
        rep.note(format!("direct: {}", v(&self.direct)));
        rep.points = self.conditions.points.clone();
        rep
    }
}

/// Conditions 1–4 for the total space to be an F-manifold: base F-manifold, flat `D`,
/// `L_{α(s)}(∘_M) = 0` and parallel closure plus `[α(s₁), α(s₂)] = 0` for parallel `s`.
pub fn check_conditions_multiplication(b: &BundleData, opts: &CheckOpts) -> Result<Report> {
    let pts = b.sample_base(opts, &[])?;
    let n = b.dim();
    let r = b.rank();
    let mut rep = Report::new("conditions_multiplication");
    rep.vanish("condition 1", frobenius::check_f_manifold(&b.base, opts)?.residual("f_manifold"), opts.tol);
    let mut curv = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            curv.extend(b.curvature(i, j).into_iter().flatten());
        }
    }
    let c2 = max_abs_at(&curv, &pts, n)?;
    rep.vanish("condition 2", c2, opts.tol);
    let flat = c2 <= opts.tol;

    // forms used in the proof, valid for arbitrary sections once D is flat
    let sections: Vec<Vec<ScalarField>> = (0..r).map(|a| b.coordinate_section(a)).collect();
    let coords: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(b.chart(), i)).collect();
    let mut alpha_s = Vec::new();
    for s in &sections {
        let w = b.alpha_of(s);
        let lie = lie_derivative_mult(&w, &b.base.mult)?;
        for i in 0..n {
            for j in 0..n {
                let zt = b.base.mult.product(&coords[i], &coords[j]);
                let t1 = b.alpha_of(&b.covariant_along(&zt, s));
                let t2 = b.base.mult.product(&coords[j], &b.alpha_of(&b.covariant(i, s)));
                let t3 = b.base.mult.product(&coords[i], &b.alpha_of(&b.covariant(j, s)));
                for k in 0..n {
                    alpha_s.push(&lie[k][i][j] + &t1.comps[k] - t2.comps[k].clone() - t3.comps[k].clone());
                }
            }
        }
    }
    let mut d_v = Vec::new();
    let mut bracket_s = Vec::new();
    for (a, s1) in sections.iter().enumerate() {
        for s2 in &sections[a..] {
            let prod = b.product_v(s1, s2);
            for i in 0..n {
                let lhs = b.covariant(i, &prod);
                let r1 = b.product_v(&b.covariant(i, s1), s2);
                let r2 = b.product_v(s1, &b.covariant(i, s2));
                d_v.extend(lhs.iter().zip(r1.iter().zip(&r2)).map(|(x, (y, z))| x - y - z.clone()));
            }
            let w1 = b.alpha_of(s1);
            let w2 = b.alpha_of(s2);
            let rhs = b.alpha_of(
                &b.covariant_along(&w1, s2).iter().zip(b.covariant_along(&w2, s1)).map(|(x, y)| x - &y).collect::<Vec<_>>(),
            );
            bracket_s.extend(w1.bracket(&w2).sub(&rhs).comps);
        }
    }
    let alpha_s = max_abs_at(&alpha_s, &pts, n)?;
    let d_v = max_abs_at(&d_v, &pts, n)?;
    let bracket_s = max_abs_at(&bracket_s, &pts, n)?;

    match b.parallel_frame() {
        Some(frame) => {
            let cols: Vec<Vec<ScalarField>> = (0..r).map(|a| frame.iter().map(|row| row[a].clone()).collect()).collect();
            let mut par = Vec::new();
            let mut c3 = Vec::new();
            let mut close = Vec::new();
            let mut brk = Vec::new();
            for s in &cols {
                for i in 0..n {
                    par.extend(b.covariant(i, s));
                }
                c3.extend(lie_derivative_mult(&b.alpha_of(s), &b.base.mult)?.into_iter().flatten().flatten());
            }
            for (a, s1) in cols.iter().enumerate() {
                for s2 in &cols[a..] {
                    let prod = b.product_v(s1, s2);
                    for i in 0..n {
                        close.extend(b.covariant(i, &prod));
                    }
                    brk.extend(b.alpha_of(s1).bracket(&b.alpha_of(s2)).comps);
                }
            }
            rep.vanish("parallel_frame", max_abs_at(&par, &pts, n)?, opts.tol);
            rep.vanish("condition 3", max_abs_at(&c3, &pts, n)?, opts.tol);
            rep.vanish("condition 4", max_abs_at(&close, &pts, n)?.max(max_abs_at(&brk, &pts, n)?), opts.tol);
            if flat {
                rep.vanish("alpha_s", alpha_s, opts.tol);
                rep.vanish("d_v", d_v, opts.tol);
                rep.vanish("bracket_s", bracket_s, opts.tol);
            }
        }
        None if flat => {
            rep.vanish("condition 3", alpha_s, opts.tol);
            rep.vanish("condition 4", d_v.max(bracket_s), opts.tol);
            rep.note("no parallel frame supplied: conditions 3 and 4 evaluated in their frame-free form");
        }
        None => {
            rep.vanish("condition 3", 0.0, opts.tol);
            rep.vanish("condition 4", 0.0, opts.tol);
            rep.note("D is not flat and no parallel frame was supplied: conditions 3 and 4 hold vacuously");
        }
    }
    rep.points = pts;
    Ok(rep)
}

/// Conditions of [`check_conditions_multiplication`] against the F-manifold identity on the total space.
pub fn check_f_manifold_equivalence(b: &BundleData, opts: &CheckOpts) -> Result<Equivalence> {
    let conditions = check_conditions_multiplication(b, opts)?;
    let total = build_total(b, opts)?;
    let direct = frobenius::check_f_manifold(&total.structure, opts)?;
    Ok(Equivalence { conditions, direct })
}

/// `D(g_V) = 0` and `dε_M = 0` against `∇e_V = 0` for the total metric.
pub fn check_admissible(b: &BundleData, opts: &CheckOpts) -> Result<Equivalence> {
    let total = build_total(b, opts)?;
    let pts = b.sample_base(opts, &[])?;
    let n = b.dim();
    let r = b.rank();
    let mut dg = Vec::new();
    for (i, a) in b.connection.iter().enumerate() {
        let d: Mat = b.gram_v.iter().map(|row| row.iter().map(|x| x.diff(i)).collect()).collect();
        let t = linalg::mul(&linalg::transpose(a), &b.gram_v);
        let u = linalg::mul(&b.gram_v, a);
        dg.extend(linalg::sub(&linalg::sub(&d, &t), &u).into_iter().flatten());
    }
    let eps = linalg::mul_vec(b.base.metric.matrix(), &b.base.unit().comps);
    let mut de = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            de.push(eps[j].diff(i) - eps[i].diff(j));
        }
    }
    let eps_v = linalg::mul_vec(&linalg::transpose(&b.gram_v), &b.unit_v);
    let mut dev = Vec::new();
    for (i, a) in b.connection.iter().enumerate() {
        for c in 0..r {
            let mut s = eps_v[c].diff(i);
            for d in 0..r {
                if !a[d][c].is_zero() {
                    s = s - eps_v[d].mul(&a[d][c]);
                }
            }
            dev.push(s);
        }
    }
    let mut conditions = Report::new("admissible");
    conditions.vanish("d_gram_v", max_abs_at(&dg, &pts, n)?, opts.tol);
    conditions.vanish("d_coidentity", max_abs_at(&de, &pts, n)?, opts.tol);
    conditions.note(format!("D(eps_V) residual {:.3e}", max_abs_at(&dev, &pts, n)?));
    conditions.points = pts;
    let par = tensor::is_parallel(total.metric(), total.unit(), opts)?;
    let mut direct = Report::new("nabla_e_v");
    direct.vanish("nabla_e_v", par.residual("nabla_X"), opts.tol);
    direct.points = par.points;
    Ok(Equivalence { conditions, direct })
}

/// Symbolic ingredients of the flatness conditions, all on the base chart.
struct FlatnessData {
    /// `nabla_alpha[a][k][i] = (∇^{M,D}_i α)(e_a)^k`.
    nabla_alpha: Vec<Mat>,
    /// `second[j][a][k][i] = (∇_j ∇^{M,D} α)(∂_i, e_a)^k`.
    second: Vec<Vec<Mat>>,
    h: Mat,
}

fn flatness_data(b: &BundleData) -> Result<FlatnessData> {
    let n = b.dim();
    let r = b.rank();
    let gam = christoffel(&b.base.metric)?;
    let chart = b.chart();
    let zero = ScalarField::zero(chart);
    let al = &b.alpha;
    let mut nabla_alpha = vec![linalg::zeros(chart, n, n); r];
    for (a, t) in nabla_alpha.iter_mut().enumerate() {
        for k in 0..n {
            for i in 0..n {
                let mut s = al[k][a].diff(i);
                for m in 0..n {
                    if !gam[k][i][m].is_zero() && !al[m][a].is_zero() {
                        s = s + gam[k][i][m].mul(&al[m][a]);
                    }
                }
                for c in 0..r {
                    if !b.connection[i][c][a].is_zero() && !al[k][c].is_zero() {
                        s = s - al[k][c].mul(&b.connection[i][c][a]);
                    }
                }
                t[k][i] = s;
            }
        }
    }
    let mut second = vec![vec![linalg::zeros(chart, n, n); r]; n];
    for (j, sj) in second.iter_mut().enumerate() {
        for (a, t) in sj.iter_mut().enumerate() {
            for k in 0..n {
                for i in 0..n {
                    let mut s = nabla_alpha[a][k][i].diff(j);
                    for m in 0..n {
                        if !gam[k][j][m].is_zero() {
                            s = s + gam[k][j][m].mul(&nabla_alpha[a][m][i]);
                        }
                        if !gam[m][j][i].is_zero() {
                            s = s - gam[m][j][i].mul(&nabla_alpha[a][k][m]);
                        }
                    }
                    for c in 0..r {
                        if !b.connection[j][c][a].is_zero() {
                            s = s - nabla_alpha[c][k][i].mul(&b.connection[j][c][a]);
                        }
                    }
                    t[k][i] = if s.is_zero() { zero.clone() } else { s };
                }
            }
        }
    }
    Ok(FlatnessData { nabla_alpha, second, h: b.bundle_metric() })
}

/// Numeric flatness data at a base point.
struct FlatAt {
    g: NMat,
    ginv: NMat,
    hinv: NMat,
    alpha: NMat,
    /// `low[a][i][j] = g_M((∇_i α)(e_a), ∂_j)`.
    low: Vec<NMat>,
    /// `second_low[y][a][z][x] = g_M((∇_y ∇_z α)(e_a), ∂_x)`.
    second_low: Vec<Vec<NMat>>,
}

impl FlatAt {
    fn new(b: &BundleData, d: &FlatnessData, vals: &[Num]) -> Result<FlatAt> {
        let n = b.dim();
        let g = linalg::eval(b.base.metric.matrix(), vals)?;
        let ginv = linalg::num::inverse(&g)?;
        let hinv = linalg::num::inverse(&linalg::eval(&d.h, vals)?)?;
        let alpha = linalg::eval(&b.alpha, vals)?;
        let lower = |t: &NMat| -> NMat {
            (0..n).map(|i| (0..n).map(|j| (0..n).fold(Num::zero(), |s, k| s + g[k][j].mul(&t[k][i]))).collect()).collect()
        };
        let low = d.nabla_alpha.iter().map(|t| Ok(lower(&linalg::eval(t, vals)?))).collect::<Result<Vec<_>>>()?;
        let second_low = d
            .second
            .iter()
            .map(|sj| sj.iter().map(|t| Ok(lower(&linalg::eval(t, vals)?))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(FlatAt { g, ginv, hinv, alpha, low, second_low })
    }

    /// `Q_a(i,j) = g((∇_i α)(e_a), ∂_j) + g((∇_j α)(e_a), ∂_i)`.
    fn sym(&self, a: usize, i: usize, j: usize) -> Num {
        &self.low[a][i][j] + &self.low[a][j][i]
    }

    /// `d(α(s)^♭)(∂_i, ∂_j)` for the parallel section through `e_a`.
    fn omega(&self, a: usize, i: usize, j: usize) -> Num {
        &self.low[a][i][j] - &self.low[a][j][i]
    }

    /// `d(α(s)^♭)(α(e_c), ∂_j)`.
    fn omega_alpha(&self, a: usize, c: usize, j: usize) -> Num {
        (0..self.g.len()).fold(Num::zero(), |s, m| s + self.alpha[m][c].mul(&self.omega(a, m, j)))
    }

    fn contract_h(&self, f: impl Fn(usize) -> Num, g: impl Fn(usize) -> Num) -> Num {
        let r = self.hinv.len();
        let fv: Vec<Num> = (0..r).map(&f).collect();
        let gv: Vec<Num> = (0..r).map(&g).collect();
        let mut s = Num::zero();
        for a in 0..r {
            for c in 0..r {
                if !self.hinv[a][c].is_zero() {
                    s = s + self.hinv[a][c].mul(&fv[a]).mul(&gv[c]);
                }
            }
        }
        s
    }

    fn s1(&self, x: usize, y: usize, z: usize, t: usize) -> Num {
        self.contract_h(|a| self.sym(a, y, z), |c| self.sym(c, x, t))
    }

    fn s2(&self, x: usize, y: usize, z: usize, s: usize) -> Num {
        self.contract_h(|a| self.omega_alpha(s, a, y), |c| self.sym(c, x, z))
    }

    fn reparat(&self, x: usize, y: usize, s: usize, st: usize) -> Num {
        let n = self.g.len();
        let mut acc = Num::zero();
        for k in 0..n {
            for l in 0..n {
                if !self.ginv[k][l].is_zero() {
                    acc = acc + self.ginv[k][l].mul(&self.omega(s, y, k)).mul(&self.omega(st, x, l));
                }
            }
        }
        acc + self.contract_h(|a| self.omega_alpha(s, a, y), |c| self.omega_alpha(st, c, x))
    }
}

fn flatness_preconditions(b: &BundleData, opts: &CheckOpts) -> Result<Vec<Point>> {
    require_pass(&check_conditions_multiplication(b, opts)?, "F-manifold conditions")?;
    require_pass(&check_admissible(b, opts)?.conditions, "admissibility conditions")?;
    let pts = b.sample_base(opts, &[])?;
    if tensor::riemann_residual(&b.base.metric, &pts)? > opts.tol {
        return precondition("base metric is not flat");
    }
    Ok(pts)
}

/// Conditions 1–3 of the flatness criterion (S1 symmetry, the S2 relation and the quadratic
/// condition on `d(α(s)^♭)`) against the curvature of the total metric. Orthonormal frames
/// enter only through `Σ ε_i v_i ⊗ v_i`, realized as the inverse of `g_V − α*g_M` (and of `g_M`).
pub fn check_flatness_conditions(b: &BundleData, opts: &CheckOpts) -> Result<Equivalence> {
    let pts = flatness_preconditions(b, opts)?;
    let data = flatness_data(b)?;
    let n = b.dim();
    let r = b.rank();
    let two = Num::from_i64(2);
    let (mut w1, mut w2, mut w3) = (0f64, 0f64, 0f64);
    for p in &pts {
        let at = FlatAt::new(b, &data, &p.values())?;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for t in 0..n {
                        w1 = w1.max((at.s1(x, y, z, t) - at.s1(y, x, z, t)).abs());
                    }
                    for s in 0..r {
                        let rhs = (&at.second_low[y][s][z][x] - &at.second_low[x][s][z][y]).mul(&two);
                        w2 = w2.max((at.s2(x, y, z, s) - at.s2(y, x, z, s) - rhs).abs());
                    }
                }
                for s in 0..r {
                    for st in 0..r {
                        w3 = w3.max(at.reparat(x, y, s, st).abs());
                    }
                }
            }
        }
    }
    let mut conditions = Report::new("flatness_conditions");
    conditions.vanish("s1_symmetry", w1, opts.tol);
    conditions.vanish("s2_relation", w2, opts.tol);
    conditions.vanish("reparat", w3, opts.tol);
    conditions.points = pts;
    let total = build_total(b, opts)?;
    let tpts = tensor::sample_for_metric(total.metric(), opts, &[])?;
    let mut direct = Report::new("total_curvature");
    direct.vanish("curvature", tensor::riemann_residual(total.metric(), &tpts)?, opts.tol);
    direct.points = tpts;
    Ok(Equivalence { conditions, direct })
}

/// Compare the Levi-Civita connection and curvature of the total metric with their
/// expressions through `∇^{M,D}α` and `g_V − α*g_M`.
pub fn lemma_spot_checks(b: &BundleData, opts: &CheckOpts) -> Result<Report> {
    flatness_preconditions(b, opts)?;
    let data = flatness_data(b)?;
    let total = build_total(b, opts)?;
    let tpts = tensor::sample_for_metric(total.metric(), opts, &[])?;
    let jets = MetricJets::new(total.metric(), true);
    let n = b.dim();
    let r = b.rank();
    let big = n + r;
    let half = Num::real(Q::new(1.into(), 2.into()));
    let quarter = half.mul(&half);
    let (mut w_ss, mut w_sx, mut w_rv, mut w_rh) = (0f64, 0f64, 0f64, 0f64);
    for p in &tpts {
        let vals = p.values();
        let at = jets.at(&vals)?;
        let base = FlatAt::new(b, &data, &vals[..n])?;
        let conn: Vec<NMat> = b.connection.iter().map(|a| linalg::eval(a, &vals[..n])).collect::<std::result::Result<_, _>>()?;
        // coordinate components of the horizontal lifts
        let lifts: Vec<Vec<Num>> = (0..n)
            .map(|i| {
                let mut h = vec![Num::zero(); big];
                h[i] = Num::one();
                for a in 0..r {
                    h[n + a] = (0..r).fold(Num::zero(), |s, c| s - conn[i][a][c].mul(&vals[n + c]));
                }
                h
            })
            .collect();
        let pair = |u: &[Num], w: &[Num]| -> Num {
            let mut s = Num::zero();
            for k in 0..big {
                for l in 0..big {
                    s = s + at.g[k][l].mul(&u[k]).mul(&w[l]);
                }
            }
            s
        };
        for k in 0..big {
            for a in 0..r {
                for c in 0..r {
                    w_ss = w_ss.max(at.gamma[k][n + a][n + c].abs());
                }
            }
        }
        for a in 0..r {
            for i in 0..n {
                // ∇_{∂_{v^a}} H_i
                let mut nab = vec![Num::zero(); big];
                for (c, slot) in nab[n..].iter_mut().enumerate() {
                    *slot = conn[i][c][a].neg();
                }
                for (k, slot) in nab.iter_mut().enumerate() {
                    for m in 0..big {
                        *slot = &*slot + &at.gamma[k][n + a][m].mul(&lifts[i][m]);
                    }
                }
                for j in 0..n {
                    let want = base.omega(a, i, j).mul(&half);
                    w_sx = w_sx.max((pair(&nab, &lifts[j]) - want).abs());
                }
            }
        }
        let riem = at.riemann();
        for l in 0..big {
            for a in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        w_rv = w_rv.max(riem[l][n + a][n + c][n + d].abs());
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // R(H_i, H_j)H_k in coordinates
                    let mut rv = vec![Num::zero(); big];
                    for (l, slot) in rv.iter_mut().enumerate() {
                        for ii in 0..big {
                            if lifts[i][ii].is_zero() {
                                continue;
                            }
                            for jj in 0..big {
                                if lifts[j][jj].is_zero() {
                                    continue;
                                }
                                for kk in 0..big {
                                    *slot = &*slot
                                        + &riem[l][ii][jj][kk].mul(&lifts[i][ii]).mul(&lifts[j][jj]).mul(&lifts[k][kk]);
                                }
                            }
                        }
                    }
                    for t in 0..n {
                        let direct = pair(&rv, &lifts[t]);
                        let formula = (base.contract_h(|a| base.sym(a, i, k), |c| base.sym(c, j, t))
                            - base.contract_h(|a| base.sym(a, j, k), |c| base.sym(c, i, t)))
                        .mul(&quarter);
                        w_rh = w_rh.max((direct - formula).abs());
                    }
                }
            }
        }
    }
    let mut rep = Report::new("levi_civita_and_curvature");
    rep.vanish("nabla_s1_s2", w_ss, opts.tol);
    rep.vanish("nabla_s_x", w_sx, opts.tol);
    rep.vanish("curvature_vertical", w_rv, opts.tol);
    rep.vanish("curvature_horizontal", w_rh, opts.tol);
    rep.points = tpts;
    Ok(rep)
}

/// Quadratic identity forced by flatness over a real semisimple base with positive definite
/// metric: for parallel sections with canonical coefficients `a`, `ã` of `α(s)`, `α(s̃)`,
/// `Σ_j (η_pj η_qj/η_j)(a_j − a_q)(ã_j − ã_p) + Σ_i w_i(a, q) w_i(ã, p) = 0`, where `w_i`
/// contracts `(a_s − a_q) η_sq du^s(α(v_i))` against a frame orthonormal for `g_V − α*g_M`.
pub fn corectat_witness(s: &SemisimpleData, b: &BundleData, opts: &CheckOpts) -> Result<Report> {
    if s.chart.is_complex() {
        return precondition("complex case: not decided by this tool");
    }
    if b.chart() != &s.chart {
        return invalid("bundle base and semisimple data use different charts");
    }
    let ss = frobenius::from_semisimple(s)?;
    if ss.metric != b.base.metric || ss.mult != b.base.mult {
        return invalid("bundle base is not the semisimple structure of the given metric potential");
    }
    let frame = b.parallel_frame().ok_or_else(|| Error::Invalid("a parallel frame is required".into()))?;
    let n = b.dim();
    let r = b.rank();
    let eta1: Vec<ScalarField> = (0..n).map(|k| s.eta_k(k)).collect();
    let eta2: Vec<Vec<ScalarField>> = (0..n).map(|k| (0..n).map(|l| s.eta_kl(k, l)).collect()).collect();
    let h = b.bundle_metric();
    let mut extra: Vec<&ScalarField> = eta2.iter().flatten().collect();
    extra.extend(frame.iter().flatten());
    let all = b.all_fields();
    let positive = |p: &Point| -> bool {
        let vals = p.values();
        let ok = all.iter().chain(&extra).all(|f| f.eval_values(&vals).is_ok());
        let off = (0..n).all(|k| {
            (0..n).all(|l| k == l || matches!(eta2[k][l].eval_values(&vals), Ok(v) if !v.is_negligible()))
        });
        ok && off
            && eta1.iter().all(|e| matches!(e.eval_values(&vals), Ok(v) if v.re > Q::zero() && !v.is_negligible()))
            && matches!(frobenius::is_positive_definite(&h, p), Ok(true))
    };
    let pts = sample_points(&s.chart, opts.points, opts.seed, positive).map_err(|e| {
        Error::Precondition(format!("positivity of η_k and g_V − α*g_M (with η_pj ≠ 0) not met at sampled points: {e}"))
    })?;
    let (mut concl, mut key, mut diag_max) = (0f64, 0f64, 0f64);
    let mut diag_min = f64::INFINITY;
    let mut forced = 0usize;
    for p in &pts {
        let vals = p.values();
        let e1 = linalg::eval_vec(&eta1, &vals)?;
        let e2 = linalg::eval(&eta2, &vals)?;
        let hinv = linalg::num::inverse(&linalg::eval(&h, &vals)?)?;
        let al = linalg::eval(&b.alpha, &vals)?;
        let fr = linalg::eval(&frame, &vals)?;
        let coeffs: Vec<Vec<Num>> =
            (0..r).map(|m| linalg::num::mul_vec(&al, &(0..r).map(|a| fr[a][m].clone()).collect::<Vec<_>>())).collect();
        let w = |a: &[Num], q: usize, c: usize| -> Num {
            (0..n).fold(Num::zero(), |acc, t| acc + (&a[t] - &a[q]).mul(&e2[t][q]).mul(&al[t][c]))
        };
        let value = |a: &[Num], at: &[Num], pp: usize, q: usize| -> Result<Num> {
            let mut s1 = Num::zero();
            for j in 0..n {
                s1 = s1 + e2[pp][j].mul(&e2[q][j]).mul(&(&a[j] - &a[q])).mul(&(&at[j] - &at[pp])).div(&e1[j])?;
            }
            let mut s2 = Num::zero();
            for c in 0..r {
                for d in 0..r {
                    s2 = s2 + hinv[c][d].mul(&w(a, q, c)).mul(&w(at, pp, d));
                }
            }
            Ok(s1 + s2)
        };
        for a in &coeffs {
            for k in 0..n {
                for l in 0..n {
                    key = key.max((&a[k] - &a[l]).abs());
                }
            }
            for at in &coeffs {
                for pp in 0..n {
                    for q in 0..n {
                        concl = concl.max(value(a, at, pp, q)?.abs());
                    }
                }
            }
            for pp in 0..n {
                if (0..n).all(|j| (&a[j] - &a[pp]).is_negligible()) {
                    continue;
                }
                let d = value(a, a, pp, pp)?.re_f64();
                diag_min = diag_min.min(d);
                diag_max = diag_max.max(d.abs());
                forced += 1;
            }
        }
    }
    let mut rep = Report::new("corectat_witness");
    rep.vanish("concl", concl, opts.tol);
    rep.vanish("key_eqn", key, opts.tol);
    if forced > 0 {
        rep.nonvanish("diagonal_positive", diag_min, opts.tol);
        rep.note(format!(
            "diagonal specialization positive (min {diag_min:.3e}, max {diag_max:.3e}) for sections with unequal canonical coefficients: flatness would force a_j = a_p"
        ));
    }
    rep.points = pts;
    Ok(rep)
}
