//! Saito bundles over a chart: axiom residuals, primitive sections, the
//! infinitesimal period map and reconstruction of Frobenius structures.
//!
//! Sections are column vectors in a fixed frame; endomorphisms act on columns.
//! The connection is `∇_{∂i} s = ∂_i s + A_i s`.

use num_traits::{One, Zero};

use crate::error::{invalid, precondition, Result};
use crate::extension::{FrobeniusAlgebra, LambdaFunctional};
use crate::frobenius::{check_euler, check_frobenius, AlmostFrobenius};
use crate::linalg::{self, Mat};
use crate::report::{sample_points, CheckOpts, Report};
use crate::scalar::{q, qr, Chart, ScalarField, Q};
use crate::tensor::{christoffel, covariant_derivative, lie_derivative_metric, Metric, Multiplication, VectorField};

/// `R_0`, `R_∞` and the weight `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Endomorphisms {
    pub r0: Mat,
    pub rinf: Mat,
    pub weight: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaitoBundle {
    chart: Chart,
    pub connection: Vec<Mat>,
    pub higgs: Vec<Mat>,
    pub pairing: Mat,
    pub endos: Option<Endomorphisms>,
}

fn check_shape(m: &Mat, r: usize, what: &str) -> Result<()> {
    if m.len() != r || m.iter().any(|row| row.len() != r) {
        return invalid(format!("{what} must be {r}x{r}"));
    }
    Ok(())
}

impl SaitoBundle {
    pub fn new(
        chart: &Chart,
        connection: Vec<Mat>,
        higgs: Vec<Mat>,
        pairing: Mat,
        endos: Option<Endomorphisms>,
    ) -> Result<Self> {
        let n = chart.dim();
        let m = pairing.len();
        if m == 0 {
            return invalid("bundle of rank 0");
        }
        if connection.len() != n || higgs.len() != n {
            return invalid(format!("need one connection and one Higgs matrix per coordinate ({n})"));
        }
        check_shape(&pairing, m, "pairing")?;
        for a in connection.iter().chain(&higgs) {
            check_shape(a, m, "connection and Higgs matrices")?;
        }
        if let Some(e) = &endos {
            check_shape(&e.r0, m, "R0")?;
            check_shape(&e.rinf, m, "R_inf")?;
        }
        for i in 0..m {
            for j in i + 1..m {
                if pairing[i][j] != pairing[j][i] {
                    return invalid(format!("pairing is not symmetric at ({}, {})", i + 1, j + 1));
                }
            }
        }
        Ok(SaitoBundle { chart: chart.clone(), connection, higgs, pairing, endos })
    }

    /// The tangent bundle of a Frobenius structure: Levi-Civita connection, `φ_X = −X∘`.
    /// With `(E, d, w)` also `R_0 = −φ_E` and `R_∞ = ∇E − (w + d)/2 · Id`.
    pub fn from_frobenius(a: &AlmostFrobenius, euler: Option<(&VectorField, &Q, &Q)>) -> Result<Self> {
        let n = a.dim();
        let chart = a.chart();
        let gam = christoffel(&a.metric)?;
        let connection = (0..n).map(|i| (0..n).map(|k| (0..n).map(|j| gam[k][i][j].clone()).collect()).collect()).collect();
        let higgs = (0..n).map(|i| a.mult.higgs(i)).collect();
        let endos = match euler {
            None => None,
            Some((e, d, w)) => {
                let shift = ScalarField::constant(chart, (w + d) * qr(1, 2));
                Some(Endomorphisms {
                    r0: a.mult.operator(e),
                    rinf: linalg::sub(&covariant_derivative(&a.metric, e)?, &linalg::scale(&linalg::identity(chart, n), &shift)),
                    weight: w.clone(),
                })
            }
        };
        SaitoBundle::new(chart, connection, higgs, a.metric.matrix().clone(), endos)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.pairing.len()
    }

    /// `∇_i` applied to an endomorphism: `∂_i T + [A_i, T]`.
    fn nabla_end(&self, i: usize, t: &Mat) -> Mat {
        let dt: Mat = t.iter().map(|r| r.iter().map(|x| x.diff(i)).collect()).collect();
        linalg::add(&dt, &linalg::commutator(&self.connection[i], t))
    }

    /// `∇_i s = ∂_i s + A_i s`.
    pub fn nabla_section(&self, i: usize, s: &[ScalarField]) -> Vec<ScalarField> {
        let a = linalg::mul_vec(&self.connection[i], s);
        s.iter().zip(a).map(|(x, y)| x.diff(i) + y).collect()
    }

    /// `G T − T^T G`: vanishes iff `T` is self-adjoint for the pairing.
    fn adjoint_defect(&self, t: &Mat) -> Mat {
        linalg::sub(&linalg::mul(&self.pairing, t), &linalg::mul(&linalg::transpose(t), &self.pairing))
    }
}

/// Maximum absolute entry of symbolic matrices over points where all of them evaluate.
fn max_over_points(groups: &[(&str, Vec<Mat>)], chart: &Chart, opts: &CheckOpts) -> Result<(Vec<f64>, Vec<crate::scalar::Point>)> {
    let all: Vec<&ScalarField> = groups.iter().flat_map(|(_, ms)| ms.iter().flatten().flatten()).collect();
    let points = sample_points(chart, opts.points, opts.seed, |p| {
        let vals = p.values();
        all.iter().all(|f| f.eval_values(&vals).is_ok())
    })?;
    let mut out = vec![0.0f64; groups.len()];
    for p in &points {
        let vals = p.values();
        for (g, (_, ms)) in groups.iter().enumerate() {
            for m in ms {
                out[g] = out[g].max(linalg::num::max_abs(&linalg::eval(m, &vals)?));
            }
        }
    }
    Ok((out, points))
}

/// One residual per Saito axiom, maximised over sample points.
pub fn check_saito(s: &SaitoBundle, opts: &CheckOpts) -> Result<Report> {
    let n = s.chart.dim();
    let chart = &s.chart;
    let mut groups: Vec<(&str, Vec<Mat>)> = Vec::new();
    let (mut curv, mut dphi, mut wedge) = (vec![], vec![], vec![]);
    for i in 0..n {
        for j in i + 1..n {
            let da = |a: usize, b: usize| -> Mat {
                s.connection[b].iter().map(|r| r.iter().map(|x| x.diff(a)).collect()).collect()
            };
            curv.push(linalg::add(
                &linalg::sub(&da(i, j), &da(j, i)),
                &linalg::commutator(&s.connection[i], &s.connection[j]),
            ));
            dphi.push(linalg::sub(&s.nabla_end(i, &s.higgs[j]), &s.nabla_end(j, &s.higgs[i])));
            wedge.push(linalg::commutator(&s.higgs[i], &s.higgs[j]));
        }
    }
    groups.push(("curvature", curv));
    groups.push(("d_nabla_phi", dphi));
    let ng = (0..n)
        .map(|i| {
            let dg: Mat = s.pairing.iter().map(|r| r.iter().map(|x| x.diff(i)).collect()).collect();
            let a = &s.connection[i];
            linalg::sub(&linalg::sub(&dg, &linalg::mul(&linalg::transpose(a), &s.pairing)), &linalg::mul(&s.pairing, a))
        })
        .collect();
    groups.push(("nabla_g", ng));
    groups.push(("phi_wedge_phi", wedge));
    groups.push(("phi_selfadjoint", s.higgs.iter().map(|p| s.adjoint_defect(p)).collect()));
    if let Some(e) = &s.endos {
        let flow = (0..n)
            .map(|i| {
                linalg::sub(
                    &linalg::add(&s.nabla_end(i, &e.r0), &s.higgs[i]),
                    &linalg::commutator(&s.higgs[i], &e.rinf),
                )
            })
            .collect();
        groups.push(("r0_flow", flow));
        groups.push(("r0_commutes", s.higgs.iter().map(|p| linalg::commutator(&e.r0, p)).collect()));
        groups.push(("r0_selfadjoint", vec![s.adjoint_defect(&e.r0)]));
        groups.push(("rinf_parallel", (0..n).map(|i| s.nabla_end(i, &e.rinf)).collect()));
        let w = ScalarField::constant(chart, e.weight.clone());
        let weight = linalg::add(
            &linalg::add(&linalg::mul(&linalg::transpose(&e.rinf), &s.pairing), &linalg::mul(&s.pairing, &e.rinf)),
            &linalg::scale(&s.pairing, &w),
        );
        groups.push(("rinf_weight", vec![weight]));
    }
    let (res, points) = max_over_points(&groups, chart, opts)?;
    let mut rep = Report::new("saito");
    for ((name, _), r) in groups.iter().zip(res) {
        rep.vanish(*name, r, opts.tol);
    }
    if s.endos.is_none() {
        rep.note("no R0/R_inf data: only the flat-connection and Higgs axioms were checked");
    }
    rep.points = points;
    Ok(rep)
}

/// A candidate primitive section, with its homogeneity degree once known.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveSection {
    pub components: Vec<ScalarField>,
    pub homogeneity: Option<Q>,
}

impl PrimitiveSection {
    pub fn new(components: Vec<ScalarField>) -> PrimitiveSection {
        PrimitiveSection { components, homogeneity: None }
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<PrimitiveSection> {
        let c = comps.iter().map(|s| ScalarField::parse(s, chart)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(PrimitiveSection::new(c))
    }
}

/// Matrix of `ψ^ω(X) = −φ_X(ω)`, column `i` for `∂_i`.
pub fn period_map(s: &SaitoBundle, omega: &PrimitiveSection) -> Result<Mat> {
    let n = s.chart.dim();
    let m = s.rank();
    if m != n {
        return invalid(format!("period map needs rank {m} equal to base dimension {n}"));
    }
    if omega.components.len() != m {
        return invalid(format!("section needs {m} components"));
    }
    let cols: Vec<Vec<ScalarField>> =
        (0..n).map(|i| linalg::mul_vec(&s.higgs[i], &omega.components).iter().map(|x| x.neg()).collect()).collect();
    Ok((0..m).map(|a| (0..n).map(|i| cols[i][a].clone()).collect()).collect())
}

/// `∇ω = 0` and `det ψ^ω ≠ 0` at sample points.
pub fn check_primitive(s: &SaitoBundle, omega: &PrimitiveSection, opts: &CheckOpts) -> Result<Report> {
    let psi = period_map(s, omega)?;
    let n = s.chart.dim();
    let nab: Vec<Mat> = (0..n).map(|i| vec![s.nabla_section(i, &omega.components)]).collect();
    let det = linalg::det(&psi, &s.chart);
    let groups = vec![("nabla_omega", nab), ("psi_det", vec![vec![vec![det.clone()]]])];
    let (res, points) = max_over_points(&groups, &s.chart, opts)?;
    let mut smallest = f64::INFINITY;
    for p in &points {
        smallest = smallest.min(det.evaluate(p)?.abs());
    }
    let mut rep = Report::new("primitive");
    rep.vanish("nabla_omega", res[0], opts.tol);
    rep.nonvanish("psi_det", smallest, opts.tol);
    rep.points = points;
    Ok(rep)
}

/// Output of [`reconstruct`].
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub structure: AlmostFrobenius,
    pub euler: Option<VectorField>,
    pub rinf_omega: Option<Mat>,
    pub q: Option<Q>,
    pub report: Report,
}

/// `q` with `R_∞ ω = −q ω`, if `ω` is an eigenvector with constant eigenvalue.
fn homogeneity(rinf: &Mat, omega: &[ScalarField]) -> Option<Q> {
    let image = linalg::mul_vec(rinf, omega);
    let pivot = omega.iter().position(|x| !x.is_zero())?;
    let ratio = image[pivot].checked_div(&omega[pivot])?.as_constant()?;
    if !ratio.im.is_zero() {
        return None;
    }
    let qv = -ratio.re;
    let ok = image.iter().zip(omega).all(|(r, w)| (r + &w.scale(&qv)).is_zero());
    ok.then_some(qv)
}

/// Frobenius structure induced by a primitive section: `X∘Y = ψ⁻¹(φ_X φ_Y ω)`, `g^ω = ψ^*g`,
/// unit `ψ⁻¹(ω)`; with homogeneous `ω` also `E^ω = ψ⁻¹(R_0 ω)` and `R_∞^ω = ψ⁻¹ R_∞ ψ`.
pub fn reconstruct(s: &SaitoBundle, omega: &PrimitiveSection, opts: &CheckOpts) -> Result<Reconstruction> {
    let prim = check_primitive(s, omega, opts)?;
    if !prim.pass() {
        return precondition(format!("section is not primitive: {}", prim.failed().join(", ")));
    }
    let chart = &s.chart;
    let n = chart.dim();
    let psi = period_map(s, omega)?;
    let psi_inv = match linalg::inverse(&psi, chart) {
        Some(m) => m,
        None => return precondition("period map is not invertible"),
    };
    let w = &omega.components;
    let unit = VectorField::new(chart, linalg::mul_vec(&psi_inv, w))?;
    let mut phi_e = linalg::identity(chart, n);
    for i in 0..n {
        phi_e = linalg::add(&phi_e, &linalg::scale(&s.higgs[i], &unit.comps[i]));
    }
    let phi_w: Vec<Vec<ScalarField>> = (0..n).map(|i| linalg::mul_vec(&s.higgs[i], w)).collect();
    let zero = ScalarField::zero(chart);
    let mut c = vec![vec![vec![zero.clone(); n]; n]; n];
    for i in 0..n {
        for j in i..n {
            let col = linalg::mul_vec(&psi_inv, &linalg::mul_vec(&s.higgs[i], &phi_w[j]));
            for k in 0..n {
                c[k][i][j] = col[k].clone();
                c[k][j][i] = col[k].clone();
            }
        }
    }
    let g = linalg::mul(&linalg::transpose(&psi), &linalg::mul(&s.pairing, &psi));
    let structure = AlmostFrobenius::new(Metric::new(chart, g)?, Multiplication::new(chart, c, unit)?)?;

    let mut report = Report::new("reconstruct");
    let mut groups: Vec<(&str, Vec<Mat>)> = vec![("unit_higgs", vec![phi_e])];
    let (mut euler, mut rinf_omega, mut qv) = (None, None, None);
    match &s.endos {
        None => {}
        Some(e) => match homogeneity(&e.rinf, w) {
            None => {
                report.note("section is not homogeneous: not an eigenvector of R_inf");
            }
            Some(qh) => {
                let ev = VectorField::new(chart, linalg::mul_vec(&psi_inv, &linalg::mul_vec(&e.r0, w)))?;
                let ro = linalg::mul(&psi_inv, &linalg::mul(&e.rinf, &psi));
                let factor = ScalarField::constant(chart, q(2) * (Q::one() + &qh) - &e.weight);
                let lg = lie_derivative_metric(&ev, &structure.metric)?;
                groups.push(("euler_metric", vec![linalg::sub(&lg, &linalg::scale(structure.metric.matrix(), &factor))]));
                let shift = ScalarField::constant(chart, Q::one() + &qh);
                let expected = linalg::sub(
                    &covariant_derivative(&structure.metric, &ev)?,
                    &linalg::scale(&linalg::identity(chart, n), &shift),
                );
                groups.push(("rinf_identity", vec![linalg::sub(&ro, &expected)]));
                euler = Some(ev);
                rinf_omega = Some(ro);
                qv = Some(qh);
            }
        },
    }
    let (res, points) = max_over_points(&groups, chart, opts)?;
    if res[0] > opts.tol {
        return precondition(format!("ψ⁻¹(ω) does not satisfy φ_e = −Id (residual {:.3e})", res[0]));
    }
    for ((name, _), r) in groups.iter().zip(res) {
        report.vanish(*name, r, opts.tol);
    }
    report.points = points;
    Ok(Reconstruction { structure, euler, rinf_omega, q: qv, report })
}

/// `diag(a, b)` on `chart`, with `a` and `b` re-expressed on it.
fn block_diag(a: &Mat, b: &Mat, chart: &Chart) -> Result<Mat> {
    let (p, r) = (a.len(), b.len());
    let mut out = linalg::zeros(chart, p + r, p + r);
    for i in 0..p {
        for j in 0..p {
            out[i][j] = a[i][j].embed(chart)?;
        }
    }
    for i in 0..r {
        for j in 0..r {
            out[p + i][p + j] = b[i][j].embed(chart)?;
        }
    }
    Ok(out)
}

fn const_mat(chart: &Chart, rows: &[Vec<Q>]) -> Mat {
    linalg::from_rationals(chart, rows)
}

fn next_taus(base: &Chart, r: usize) -> Result<Chart> {
    let mut chart = base.clone();
    for _ in 0..r {
        let name = (1..).map(|k| format!("tau{k}")).find(|s| chart.index_of(s).is_none()).expect("unbounded");
        chart = chart.extend(&[name])?;
    }
    Ok(chart)
}

/// Saito bundle `π*(TM ⊕ L)` over `M × K` with `φ' = π*φ − dτ ⊗ Id`.
/// With Euler data `(E, d)` (requires `d = 2`), adds `R'_0 = π*R_0 + τ Id` and
/// `R'_∞ = R_∞ ⊕ (−w/2)` for weight `w = 0`.
pub fn build_add_variable_saito(a: &AlmostFrobenius, euler: Option<(&VectorField, &Q)>, opts: &CheckOpts) -> Result<SaitoBundle> {
    let rep = check_frobenius(a, opts)?;
    if !rep.pass() {
        return precondition(format!("base is not Frobenius: {}", rep.failed().join(", ")));
    }
    let n = a.dim();
    let w = Q::zero();
    if let Some((e, d)) = euler {
        if *d != q(2) {
            return precondition("the section π*(e + v) is homogeneous only for d = 2");
        }
        let rep = check_euler(a, e, d, opts)?;
        if !rep.pass() {
            return precondition(format!("Euler check fails: {}", rep.failed().join(", ")));
        }
    }
    let base = SaitoBundle::from_frobenius(a, euler.map(|(e, d)| (e, d, &w)))?;
    let chart = next_taus(a.chart(), 1)?;
    let line_zero = linalg::zeros(a.chart(), 1, 1);
    let mut connection = base.connection.iter().map(|m| block_diag(m, &line_zero, &chart)).collect::<Result<Vec<_>>>()?;
    connection.push(linalg::zeros(&chart, n + 1, n + 1));
    let mut higgs = base.higgs.iter().map(|m| block_diag(m, &line_zero, &chart)).collect::<Result<Vec<_>>>()?;
    higgs.push(linalg::scale(&linalg::identity(&chart, n + 1), &ScalarField::int(&chart, -1)));
    let pairing = block_diag(&base.pairing, &const_mat(a.chart(), &[vec![q(1)]]), &chart)?;
    let endos = match base.endos {
        None => None,
        Some(e) => {
            let tau = ScalarField::var(&chart, n);
            let r0 = linalg::add(&block_diag(&e.r0, &line_zero, &chart)?, &linalg::scale(&linalg::identity(&chart, n + 1), &tau));
            let half_w = const_mat(a.chart(), &[vec![-(&w * qr(1, 2))]]);
            let rinf = block_diag(&e.rinf, &half_w, &chart)?;
            Some(Endomorphisms { r0, rinf, weight: w })
        }
    };
    SaitoBundle::new(&chart, connection, higgs, pairing, endos)
}

/// `π*(e + v)` for [`build_add_variable_saito`] (or `π*(X0 + v)` for a Legendre field `X0`).
pub fn add_variable_section(s: &SaitoBundle, x0: &VectorField) -> Result<PrimitiveSection> {
    let mut comps = x0.comps.iter().map(|c| c.embed(&s.chart)).collect::<std::result::Result<Vec<_>, _>>()?;
    comps.push(ScalarField::one(&s.chart));
    if comps.len() != s.rank() {
        return invalid("field does not match the bundle rank");
    }
    Ok(PrimitiveSection::new(comps))
}

/// Saito bundle `π*(TM ⊕ V)` of weight zero over `M × K^r` from a Frobenius base with Euler field
/// (`L_E g = 2g`), an algebra `(K^r, ∘_V, e_V, g_V)` and a multiplicative functional `λ`.
pub fn build_trivial_extension_saito(
    a: &AlmostFrobenius,
    e: &VectorField,
    alg: &FrobeniusAlgebra,
    lam: &LambdaFunctional,
    opts: &CheckOpts,
) -> Result<SaitoBundle> {
    let rep = check_frobenius(a, opts)?;
    if !rep.pass() {
        return precondition(format!("base is not Frobenius: {}", rep.failed().join(", ")));
    }
    let rep = check_euler(a, e, &q(2), opts)?;
    if !rep.pass() {
        return precondition(format!("Euler check fails: {}", rep.failed().join(", ")));
    }
    let n = a.dim();
    let r = alg.rank();
    let gee = a.metric.pair(a.unit(), a.unit());
    if (0..n).any(|i| !gee.diff(i).is_zero()) {
        return precondition("g(e, e) is not constant");
    }
    let gee = match gee.as_constant() {
        Some(c) if c.im.is_zero() => c.re,
        _ => return precondition("g(e, e) is not a real constant"),
    };
    let lc = lam.coeffs();
    let gmv: Vec<Vec<Q>> =
        (0..r).map(|s| (0..r).map(|t| &alg.gram()[s][t] - &gee * &lc[s] * &lc[t]).collect()).collect();
    if linalg::det(&const_mat(a.chart(), &gmv), a.chart()).is_zero() {
        return precondition("g_V - g(e,e) λ⊗λ is degenerate");
    }

    let base = SaitoBundle::from_frobenius(a, Some((e, &q(2), &Q::zero())))?;
    let chart = next_taus(a.chart(), r)?;
    let m = n + r;
    let vzero = linalg::zeros(a.chart(), r, r);
    let mut connection = base.connection.iter().map(|x| block_diag(x, &vzero, &chart)).collect::<Result<Vec<_>>>()?;
    let mut higgs = base.higgs.iter().map(|x| block_diag(x, &vzero, &chart)).collect::<Result<Vec<_>>>()?;
    for s in 0..r {
        connection.push(linalg::zeros(&chart, m, m));
        let mut h = linalg::zeros(&chart, m, m);
        for i in 0..n {
            h[i][i] = ScalarField::constant(&chart, -lc[s].clone());
        }
        for k in 0..r {
            for j in 0..r {
                h[n + k][n + j] = ScalarField::constant(&chart, -alg.constants()[k][s][j].clone());
            }
        }
        higgs.push(h);
    }
    let pairing = block_diag(&base.pairing, &const_mat(a.chart(), &gmv), &chart)?;
    let endos = base.endos.expect("Euler data supplied");
    let lam_tau = (0..r).fold(ScalarField::zero(&chart), |acc, s| acc + ScalarField::var(&chart, n + s).scale(&lc[s]));
    let mut r0 = block_diag(&endos.r0, &vzero, &chart)?;
    for i in 0..n {
        r0[i][i] = &r0[i][i] + &lam_tau;
    }
    for k in 0..r {
        for j in 0..r {
            r0[n + k][n + j] = (0..r).fold(ScalarField::zero(&chart), |acc, s| {
                acc + ScalarField::var(&chart, n + s).scale(&alg.constants()[k][j][s])
            });
        }
    }
    // ∇E − Id on π*TM, 0 on π*V
    let rinf = block_diag(&endos.rinf, &vzero, &chart)?;
    SaitoBundle::new(&chart, connection, higgs, pairing, Some(Endomorphisms { r0, rinf, weight: Q::zero() }))
}

/// `π*(e_M + e_V)` for [`build_trivial_extension_saito`].
pub fn trivial_extension_section(s: &SaitoBundle, a: &AlmostFrobenius, alg: &FrobeniusAlgebra) -> Result<PrimitiveSection> {
    let mut comps = a.unit().comps.iter().map(|c| c.embed(&s.chart)).collect::<std::result::Result<Vec<_>, _>>()?;
    comps.extend(alg.unit().iter().map(|x| ScalarField::constant(&s.chart, x.clone())));
    if comps.len() != s.rank() {
        return invalid("algebra does not match the bundle rank");
    }
    Ok(PrimitiveSection::new(comps))
}
