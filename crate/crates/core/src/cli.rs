//! Batch driver: read a manifest, run a construction or verification, produce a report document
//! and, for constructions, a manifest describing the result.
//!
//! Manifest kinds and their sections:
//!
//! | kind | sections |
//! |---|---|
//! | `potential` | `[potential]` metric (rationals), potential, unit (coordinate name) |
//! | `semisimple` | `[semisimple]` eta |
//! | `structure` | `[structure]` metric, mult (`c[k][i][j]`, coefficient of `∂_k` in `∂_i∘∂_j`), unit |
//! | `bundle` | `[base]` (one of the above, tagged by `type`), `[bundle]` |
//! | `saito` | `[saito]` connection, higgs, pairing; optional `[endomorphisms]` r0, rinf, weight; optional `[section]` omega |
//! | `ttstar` | `[base]`; either `[real]` or `[bundle]` with `[k_m]` and `[k_v]` |
//! | `extension-request` | `[request]` construction plus the sections that construction reads |
//!
//! `[bundle]` holds `mult`, `unit`, `gram`, `alpha` and either `connection` (data in the coordinate
//! frame, optionally with a parallel `frame`) or only `frame` (data given in that parallel frame).
//! A real structure section holds `matrix`, or `phase` with optional `left` and `right`.
//! Optional extra sections: `[euler]` field, d; `[legendre]` field; `[iterate]` fields, or z0 and
//! coefficients; `[algebra]` constants, unit, gram; `[lambda]` coeffs. The `k`-th iteration field
//! (from 0) lives on the chart extended by `k` coordinates named `tau1`, `tau2`, ... (skipping
//! names already taken).

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use sha2::{Digest, Sha256};

use crate::bundle::{self, BundleData, Equivalence};
use crate::error::Error;
use crate::extension::{self, ExtensionResult, FrobeniusAlgebra, LambdaFunctional};
use crate::frobenius::{self, AlmostFrobenius, PotentialFrobenius, SemisimpleData};
use crate::linalg::{self, Mat};
use crate::manifest::{as_int, as_list, as_str, get, Manifest, ManifestError, Section, Value};
use crate::report::{CheckKind, CheckOpts, Report};
use crate::saito::{self, Endomorphisms, PrimitiveSection, SaitoBundle};
use crate::scalar::{Chart, Domain, ScalarField, Q};
use crate::tensor::{Metric, Multiplication, Tensor3, VectorField};
use crate::ttstar::{self, ExtensionTTData, RealStructure, TTStarInstance};

pub const TOOL: &str = concat!("frobkit ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CheckFrobenius,
    CheckEuler,
    Legendre,
    AddVariable,
    Iterate,
    ExtendTrivial,
    SaitoCheck,
    SaitoReconstruct,
    BundleCheck,
    FlatnessConditions,
    Corectat,
    TtstarCheck,
    MainTheorem,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

impl std::str::FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Command, String> {
        <Command as ValueEnum>::from_str(s, false).map_err(|_| format!("unknown subcommand `{s}`"))
    }
}

/// Command-line overrides of the manifest's `[options]`.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Error => 2,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReportDocument {
    pub subcommand: Command,
    pub digest: String,
    pub opts: CheckOpts,
    pub domain: Option<Domain>,
    pub reports: Vec<Report>,
    pub error: Option<String>,
}

impl ReportDocument {
    pub fn verdict(&self) -> Verdict {
        if self.error.is_some() {
            Verdict::Error
        } else if self.reports.iter().all(Report::pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict().exit_code()
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = Manifest::new("report");
        m.top.insert("tool".into(), Value::str(TOOL));
        m.top.insert("subcommand".into(), Value::str(self.subcommand.name()));
        m.top.insert("input".into(), Value::str(&self.digest));
        m.top.insert("verdict".into(), Value::str(self.verdict().as_str()));
        if let Some(e) = &self.error {
            m.top.insert("error".into(), Value::str(e));
        }
        let o = m.section_mut("options");
        o.insert("points".into(), Value::Int(self.opts.points as i64));
        o.insert("seed".into(), Value::Int(self.opts.seed as i64));
        o.insert("tol".into(), Value::str(format!("{:e}", self.opts.tol)));
        if let Some(d) = self.domain {
            o.insert("domain".into(), Value::str(domain_name(d)));
        }
        for (i, r) in self.reports.iter().enumerate() {
            let s = m.section_mut(&format!("report.{:02}", i + 1));
            s.insert("title".into(), Value::str(&r.title));
            s.insert("verdict".into(), Value::str(if r.pass() { "pass" } else { "fail" }));
            let checks = r.checks.iter().map(|c| {
                Value::list([
                    c.name.clone(),
                    match c.kind {
                        CheckKind::Vanish => "vanish".into(),
                        CheckKind::Nonvanish => "nonvanish".into(),
                    },
                    format!("{:e}", c.residual),
                    format!("{:e}", c.tol),
                    if c.pass { "pass".into() } else { "fail".into() },
                ])
            });
            s.insert("checks".into(), Value::List(checks.collect()));
            if !r.notes.is_empty() {
                s.insert("notes".into(), Value::list(r.notes.iter().cloned()));
            }
            if !r.points.is_empty() {
                let pts = r.points.iter().map(|p| {
                    Value::list(p.coords.iter().map(|c| ScalarField::constant_c(&p.chart, c.clone()).to_string()))
                });
                s.insert("points".into(), Value::List(pts.collect()));
            }
        }
        m
    }
}

impl fmt::Display for ReportDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_manifest().fmt(f)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub document: ReportDocument,
    pub emitted: Option<Manifest>,
}

/// Input or precondition failure; maps to exit code 2.
#[derive(Clone, Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(e.to_string())
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Failure {
        Failure(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn fail<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure(msg.into()))
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Real => "real",
        Domain::Complex => "complex",
    }
}

pub fn run(cmd: Command, path: &Path, flags: &Flags) -> Outcome {
    match std::fs::read(path) {
        Ok(bytes) => run_bytes(cmd, &bytes, flags),
        Err(e) => Outcome {
            document: ReportDocument {
                subcommand: cmd,
                digest: String::new(),
                opts: default_opts(flags),
                domain: None,
                reports: Vec::new(),
                error: Some(format!("cannot read {}: {e}", path.display())),
            },
            emitted: None,
        },
    }
}

pub fn run_source(cmd: Command, src: &str, flags: &Flags) -> Outcome {
    run_bytes(cmd, src.as_bytes(), flags)
}

fn default_opts(flags: &Flags) -> CheckOpts {
    let d = CheckOpts::default();
    CheckOpts { points: flags.points.unwrap_or(d.points), seed: flags.seed.unwrap_or(d.seed), tol: flags.tol.unwrap_or(d.tol) }
}

fn run_bytes(cmd: Command, bytes: &[u8], flags: &Flags) -> Outcome {
    let mut document = ReportDocument {
        subcommand: cmd,
        digest: digest(bytes),
        opts: default_opts(flags),
        domain: None,
        reports: Vec::new(),
        error: None,
    };
    let mut emitted = None;
    let result = std::str::from_utf8(bytes)
        .map_err(|_| Failure("manifest is not valid UTF-8".into()))
        .and_then(|src| Ok(Manifest::parse(src)?))
        .and_then(|m| Input::new(m, flags))
        .and_then(|inp| {
            document.opts = inp.opts.clone();
            document.domain = Some(inp.domain);
            dispatch(cmd, &inp, &mut document.reports)
        });
    match result {
        Ok(e) => emitted = e,
        Err(Failure(msg)) => document.error = Some(msg),
    }
    Outcome { document, emitted }
}

struct Input {
    m: Manifest,
    chart: Chart,
    domain: Domain,
    opts: CheckOpts,
}

impl Input {
    fn new(m: Manifest, flags: &Flags) -> Res<Input> {
        m.kind()?;
        let empty = Section::new();
        let o = m.sections.get("options").unwrap_or(&empty);
        let d = CheckOpts::default();
        let points = match (flags.points, o.get("points")) {
            (Some(p), _) => p,
            (None, Some(v)) => usize::try_from(as_int(v, "[options] points")?).map_err(|_| Failure("[options] points must be non-negative".into()))?,
            (None, None) => d.points,
        };
        let seed = match (flags.seed, o.get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => u64::try_from(as_int(v, "[options] seed")?).map_err(|_| Failure("[options] seed must be non-negative".into()))?,
            (None, None) => d.seed,
        };
        let tol = match (flags.tol, o.get("tol")) {
            (Some(t), _) => t,
            (None, Some(v)) => {
                let s = as_str(v, "[options] tol")?;
                s.parse::<f64>().map_err(|_| Failure(format!("[options] tol: cannot read `{s}` as a number")))?
            }
            (None, None) => d.tol,
        };
        let domain = match o.get("domain").map(|v| as_str(v, "[options] domain")).transpose()? {
            None | Some("real") => Domain::Real,
            Some("complex") => Domain::Complex,
            Some(other) => return fail(format!("[options] domain must be \"real\" or \"complex\", not `{other}`")),
        };
        let names = as_list(get(&m.top, "top level", "chart")?, "chart")?
            .iter()
            .map(|v| as_str(v, "chart entries").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        let chart = Chart::new(&names, domain).map_err(Error::from)?;
        Ok(Input { m, chart, domain, opts: CheckOpts { points, seed, tol } })
    }

    fn kind(&self) -> &str {
        self.m.kind().expect("checked in Input::new")
    }

    fn section(&self, name: &str) -> Res<&Section> {
        Ok(self.m.section(name)?)
    }

    fn has(&self, name: &str) -> bool {
        self.m.sections.contains_key(name)
    }
}

fn expect_kind(inp: &Input, kinds: &[&str]) -> Res<()> {
    if kinds.contains(&inp.kind()) {
        return Ok(());
    }
    fail(format!("this subcommand takes kind {}, not `{}`", kinds.join(" | "), inp.kind()))
}

fn expr(chart: &Chart, v: &Value, what: &str) -> Res<ScalarField> {
    match v {
        Value::Int(n) => Ok(ScalarField::int(chart, *n)),
        other => {
            let s = as_str(other, what)?;
            ScalarField::parse(s, chart).map_err(|e| Failure(format!("{what}: {e}")))
        }
    }
}

fn exprs(chart: &Chart, v: &Value, what: &str) -> Res<Vec<ScalarField>> {
    as_list(v, what)?.iter().map(|x| expr(chart, x, what)).collect()
}

fn matrix(chart: &Chart, v: &Value, what: &str) -> Res<Mat> {
    as_list(v, what)?.iter().map(|row| exprs(chart, row, what)).collect()
}

fn matrices(chart: &Chart, v: &Value, what: &str) -> Res<Vec<Mat>> {
    as_list(v, what)?.iter().map(|m| matrix(chart, m, what)).collect()
}

fn rational(chart: &Chart, v: &Value, what: &str) -> Res<Q> {
    let f = expr(chart, v, what)?;
    match f.as_constant() {
        Some(c) if c.im == Q::from_integer(0.into()) => Ok(c.re),
        _ => fail(format!("{what} must be a rational constant")),
    }
}

fn rationals(chart: &Chart, v: &Value, what: &str) -> Res<Vec<Q>> {
    as_list(v, what)?.iter().map(|x| rational(chart, x, what)).collect()
}

fn rational_matrix(chart: &Chart, v: &Value, what: &str) -> Res<Vec<Vec<Q>>> {
    as_list(v, what)?.iter().map(|row| rationals(chart, row, what)).collect()
}

fn field(chart: &Chart, v: &Value, what: &str) -> Res<VectorField> {
    Ok(VectorField::new(chart, exprs(chart, v, what)?).map_err(Error::from)?)
}

fn key<'a>(s: &'a Section, sec: &str, k: &str) -> Res<&'a Value> {
    Ok(get(s, sec, k)?)
}

fn what(sec: &str, k: &str) -> String {
    format!("[{sec}] {k}")
}

struct Loaded {
    structure: AlmostFrobenius,
    potential: Option<PotentialFrobenius>,
    semisimple: Option<SemisimpleData>,
}

fn load_structure(chart: &Chart, s: &Section, sec: &str, ty: &str) -> Res<Loaded> {
    match ty {
        "potential" => {
            let metric = rational_matrix(chart, key(s, sec, "metric")?, &what(sec, "metric"))?;
            let f = expr(chart, key(s, sec, "potential")?, &what(sec, "potential"))?;
            let unit = as_str(key(s, sec, "unit")?, &what(sec, "unit"))?;
            let idx = chart.index_of(unit).filter(|&i| i < chart.dim());
            let idx = idx.ok_or_else(|| Failure(format!("{}: `{unit}` is not a coordinate", what(sec, "unit"))))?;
            let p = PotentialFrobenius::new(chart, metric, f, idx)?;
            Ok(Loaded { structure: frobenius::from_potential(&p)?, potential: Some(p), semisimple: None })
        }
        "semisimple" => {
            let eta = expr(chart, key(s, sec, "eta")?, &what(sec, "eta"))?;
            let d = SemisimpleData::new(chart, eta)?;
            Ok(Loaded { structure: frobenius::from_semisimple(&d)?, potential: None, semisimple: Some(d) })
        }
        "structure" => {
            let g = matrix(chart, key(s, sec, "metric")?, &what(sec, "metric"))?;
            let c: Tensor3 = as_list(key(s, sec, "mult")?, &what(sec, "mult"))?
                .iter()
                .map(|m| matrix(chart, m, &what(sec, "mult")))
                .collect::<Res<_>>()?;
            let e = field(chart, key(s, sec, "unit")?, &what(sec, "unit"))?;
            let metric = Metric::new(chart, g).map_err(Error::from)?;
            let mult = Multiplication::new(chart, c, e).map_err(Error::from)?;
            Ok(Loaded { structure: AlmostFrobenius::new(metric, mult)?, potential: None, semisimple: None })
        }
        other => fail(format!("[{sec}] type must be potential | semisimple | structure, not `{other}`")),
    }
}

/// The structure of a `potential | semisimple | structure` manifest, or the `[base]` of any other kind.
fn structure(inp: &Input) -> Res<Loaded> {
    match inp.kind() {
        k @ ("potential" | "semisimple" | "structure") => load_structure(&inp.chart, inp.section(k)?, k, k),
        _ => {
            let s = inp.section("base")?;
            let ty = as_str(key(s, "base", "type")?, "[base] type")?;
            load_structure(&inp.chart, s, "base", ty)
        }
    }
}

fn euler(inp: &Input, chart: &Chart) -> Res<Option<(VectorField, Q)>> {
    if !inp.has("euler") {
        return Ok(None);
    }
    let s = inp.section("euler")?;
    let e = field(chart, key(s, "euler", "field")?, "[euler] field")?;
    let d = rational(chart, key(s, "euler", "d")?, "[euler] d")?;
    Ok(Some((e, d)))
}

fn load_bundle(inp: &Input, base: AlmostFrobenius) -> Res<BundleData> {
    let c = &inp.chart;
    let s = inp.section("bundle")?;
    let mult: Tensor3 = matrices(c, key(s, "bundle", "mult")?, "[bundle] mult")?;
    let unit = exprs(c, key(s, "bundle", "unit")?, "[bundle] unit")?;
    let gram = matrix(c, key(s, "bundle", "gram")?, "[bundle] gram")?;
    let alpha = matrix(c, key(s, "bundle", "alpha")?, "[bundle] alpha")?;
    let frame = s.get("frame").map(|v| matrix(c, v, "[bundle] frame")).transpose()?;
    let mut b = match (s.get("connection"), frame) {
        (Some(v), frame) => {
            let conn = matrices(c, v, "[bundle] connection")?;
            let b = BundleData::new(base, conn, mult, unit, gram, alpha)?;
            match frame {
                Some(f) => b.with_parallel_frame(f)?,
                None => b,
            }
        }
        (None, Some(f)) => BundleData::from_parallel_frame(base, f, mult, unit, gram, alpha)?,
        (None, None) => return fail("[bundle] needs `connection` or `frame`"),
    };
    if let Some(v) = s.get("fiber_names") {
        let names = as_list(v, "[bundle] fiber_names")?
            .iter()
            .map(|x| as_str(x, "[bundle] fiber_names"))
            .collect::<Result<Vec<_>, _>>()?;
        b = b.with_fiber_names(&names)?;
    }
    Ok(b)
}

fn load_real(chart: &Chart, s: &Section, sec: &str) -> Res<RealStructure> {
    if let Some(v) = s.get("matrix") {
        return Ok(RealStructure::new(matrix(chart, v, &what(sec, "matrix"))?)?);
    }
    let phase = exprs(chart, key(s, sec, "phase")?, &what(sec, "phase"))?;
    let n = phase.len();
    let left = match s.get("left") {
        Some(v) => matrix(chart, v, &what(sec, "left"))?,
        None => linalg::identity(chart, n),
    };
    let right = match s.get("right") {
        Some(v) => matrix(chart, v, &what(sec, "right"))?,
        None => linalg::identity(chart, n),
    };
    Ok(RealStructure::from_parts(left, phase, right)?)
}

fn load_saito(inp: &Input) -> Res<(SaitoBundle, Option<PrimitiveSection>)> {
    let c = &inp.chart;
    let s = inp.section("saito")?;
    let connection = matrices(c, key(s, "saito", "connection")?, "[saito] connection")?;
    let higgs = matrices(c, key(s, "saito", "higgs")?, "[saito] higgs")?;
    let pairing = matrix(c, key(s, "saito", "pairing")?, "[saito] pairing")?;
    let endos = if inp.has("endomorphisms") {
        let e = inp.section("endomorphisms")?;
        Some(Endomorphisms {
            r0: matrix(c, key(e, "endomorphisms", "r0")?, "[endomorphisms] r0")?,
            rinf: matrix(c, key(e, "endomorphisms", "rinf")?, "[endomorphisms] rinf")?,
            weight: rational(c, key(e, "endomorphisms", "weight")?, "[endomorphisms] weight")?,
        })
    } else {
        None
    };
    let bundle = SaitoBundle::new(c, connection, higgs, pairing, endos)?;
    let section = if inp.has("section") {
        let s = inp.section("section")?;
        Some(PrimitiveSection::new(exprs(c, key(s, "section", "omega")?, "[section] omega")?))
    } else {
        None
    };
    Ok((bundle, section))
}

fn construction(inp: &Input) -> Res<&str> {
    let s = inp.section("request")?;
    Ok(as_str(key(s, "request", "construction")?, "[request] construction")?)
}

fn equivalence(out: &mut Vec<Report>, eq: Equivalence, title: &str) {
    out.push(eq.summary(title));
    out.push(eq.conditions);
    out.push(eq.direct);
}

fn exact_match(title: &str, a: &AlmostFrobenius, b: &AlmostFrobenius) -> Report {
    let mut rep = Report::new(title);
    rep.vanish("metric", if a.metric == b.metric { 0.0 } else { 1.0 }, 0.0);
    rep.vanish("multiplication", if a.mult == b.mult { 0.0 } else { 1.0 }, 0.0);
    rep
}

fn dispatch(cmd: Command, inp: &Input, out: &mut Vec<Report>) -> Res<Option<Manifest>> {
    let opts = &inp.opts;
    match cmd {
        Command::CheckFrobenius => {
            expect_kind(inp, &["potential", "semisimple", "structure"])?;
            let l = structure(inp)?;
            if let Some(p) = &l.potential {
                out.push(frobenius::wdvv_residual(p, opts)?);
            }
            out.push(frobenius::check_frobenius(&l.structure, opts)?);
            Ok(None)
        }
        Command::CheckEuler => {
            expect_kind(inp, &["potential", "semisimple", "structure"])?;
            let l = structure(inp)?;
            let (e, d) = euler(inp, &inp.chart)?.ok_or_else(|| Failure("missing section [euler]".into()))?;
            out.push(frobenius::check_euler(&l.structure, &e, &d, opts)?);
            Ok(None)
        }
        Command::Legendre => {
            expect_kind(inp, &["potential", "semisimple", "structure"])?;
            let l = structure(inp)?;
            let s = inp.section("legendre")?;
            let x0 = field(&inp.chart, key(s, "legendre", "field")?, "[legendre] field")?;
            let rep = extension::check_legendre_field(&l.structure, &x0, opts)?;
            let ok = rep.pass();
            out.push(rep);
            if !ok {
                return Ok(None);
            }
            let b = l.structure.with_metric(extension::legendre_metric(&l.structure, &x0)?);
            out.push(frobenius::check_frobenius(&b, opts)?);
            Ok(Some(emit_structure(&b, None, inp.domain, opts)))
        }
        Command::AddVariable => {
            expect_kind(inp, &["potential", "semisimple", "structure"])?;
            let l = structure(inp)?;
            let s = inp.section("legendre")?;
            let x0 = field(&inp.chart, key(s, "legendre", "field")?, "[legendre] field")?;
            let res = extension::add_variable(&l.structure, &x0, opts)?;
            Ok(Some(finish_extension(res, inp, out)?))
        }
        Command::Iterate => {
            expect_kind(inp, &["potential", "semisimple", "structure"])?;
            let l = structure(inp)?;
            let s = inp.section("iterate")?;
            let c = &inp.chart;
            let res = if let Some(v) = s.get("fields") {
                let mut fields = Vec::new();
                let mut step = c.clone();
                for f in as_list(v, "[iterate] fields")? {
                    fields.push(field(&step, f, "[iterate] fields")?);
                    let tau = (1..).map(|k| format!("tau{k}")).find(|s| step.index_of(s).is_none()).expect("unbounded");
                    step = step.extend(&[tau]).map_err(Error::from)?;
                }
                let res = extension::iterate(&l.structure, &fields, opts)?;
                let (z0, coeffs) = extension::iteration_data(&l.structure, &fields, opts)?;
                let cf = extension::closed_form(&l.structure, &z0, &coeffs, opts)?;
                out.push(exact_match("closed_form", &res.structure, &cf.structure));
                res
            } else {
                let z0 = field(c, key(s, "iterate", "z0")?, "[iterate] z0")?;
                let coeffs = rational_matrix(c, key(s, "iterate", "coefficients")?, "[iterate] coefficients")?;
                extension::closed_form(&l.structure, &z0, &coeffs, opts)?
            };
            Ok(Some(finish_extension(res, inp, out)?))
        }
        Command::ExtendTrivial => {
            expect_kind(inp, &["potential"])?;
            let l = structure(inp)?;
            let p = l.potential.expect("potential kind");
            let (e, _) = euler(inp, &inp.chart)?.ok_or_else(|| Failure("missing section [euler]".into()))?;
            let (alg, lam) = algebra(inp)?;
            let res = extension::extend_trivial(&p, &e, &alg, &lam, opts)?;
            Ok(Some(finish_extension(res, inp, out)?))
        }
        Command::SaitoCheck => {
            expect_kind(inp, &["saito", "extension-request"])?;
            if inp.kind() == "saito" {
                let (s, omega) = load_saito(inp)?;
                out.push(saito::check_saito(&s, opts)?);
                if let Some(w) = &omega {
                    out.push(saito::check_primitive(&s, w, opts)?);
                }
                return Ok(None);
            }
            let l = structure(inp)?;
            let (s, omega) = match construction(inp)? {
                "add-variable" => {
                    let eu = euler(inp, &inp.chart)?;
                    let s = saito::build_add_variable_saito(&l.structure, eu.as_ref().map(|(e, d)| (e, d)), opts)?;
                    let x0 = match inp.m.sections.get("legendre") {
                        Some(sec) => field(&inp.chart, key(sec, "legendre", "field")?, "[legendre] field")?,
                        None => l.structure.unit().clone(),
                    };
                    let w = saito::add_variable_section(&s, &x0)?;
                    (s, w)
                }
                "trivial-extension" => {
                    let (e, _) = euler(inp, &inp.chart)?.ok_or_else(|| Failure("missing section [euler]".into()))?;
                    let (alg, lam) = algebra(inp)?;
                    let s = saito::build_trivial_extension_saito(&l.structure, &e, &alg, &lam, opts)?;
                    let w = saito::trivial_extension_section(&s, &l.structure, &alg)?;
                    (s, w)
                }
                other => return fail(format!("[request] construction `{other}` does not produce a Saito bundle")),
            };
            out.push(saito::check_saito(&s, opts)?);
            out.push(saito::check_primitive(&s, &omega, opts)?);
            Ok(Some(emit_saito(&s, &omega, inp.domain, opts)))
        }
        Command::SaitoReconstruct => {
            expect_kind(inp, &["saito"])?;
            let (s, omega) = load_saito(inp)?;
            let omega = omega.ok_or_else(|| Failure("missing section [section]".into()))?;
            let rec = saito::reconstruct(&s, &omega, opts)?;
            out.push(rec.report);
            out.push(frobenius::check_frobenius(&rec.structure, opts)?);
            Ok(Some(emit_structure(&rec.structure, None, inp.domain, opts)))
        }
        Command::BundleCheck => {
            expect_kind(inp, &["bundle"])?;
            let b = load_bundle(inp, structure(inp)?.structure)?;
            equivalence(out, bundle::check_f_manifold_equivalence(&b, opts)?, "f_manifold_equivalence");
            Ok(None)
        }
        Command::FlatnessConditions => {
            expect_kind(inp, &["bundle"])?;
            let b = load_bundle(inp, structure(inp)?.structure)?;
            equivalence(out, bundle::check_admissible(&b, opts)?, "admissibility");
            equivalence(out, bundle::check_flatness_conditions(&b, opts)?, "flatness");
            Ok(None)
        }
        Command::Corectat => {
            expect_kind(inp, &["bundle"])?;
            let l = structure(inp)?;
            let s = l.semisimple.ok_or_else(|| Failure("corectat needs a [base] of type semisimple".into()))?;
            let b = load_bundle(inp, l.structure)?;
            out.push(bundle::corectat_witness(&s, &b, opts)?);
            Ok(None)
        }
        Command::TtstarCheck => {
            expect_kind(inp, &["ttstar"])?;
            let l = structure(inp)?;
            let t = if inp.has("real") {
                let k = load_real(&inp.chart, inp.section("real")?, "real")?;
                TTStarInstance::new(l.structure, k)?
            } else if let Some(s) = &l.semisimple {
                ttstar::diagonal_real_structure(s, opts)?
            } else {
                return fail("missing section [real] (only a semisimple base has a default real structure)");
            };
            let inv = t.check_invariants(opts)?;
            let ok = inv.pass();
            out.push(inv);
            if ok {
                out.push(ttstar::tt_residuals(&t, opts)?);
            }
            Ok(None)
        }
        Command::MainTheorem => {
            expect_kind(inp, &["ttstar", "extension-request"])?;
            let (e, emit) = if inp.kind() == "ttstar" {
                let l = structure(inp)?;
                let b = load_bundle(inp, l.structure)?;
                let k_m = load_real(&inp.chart, inp.section("k_m")?, "k_m")?;
                let k_v = load_real(&inp.chart, inp.section("k_v")?, "k_v")?;
                (ExtensionTTData::new(b, k_m, k_v)?, false)
            } else {
                match construction(inp)? {
                    "detailed-example" => {
                        let s = inp.section("request")?;
                        let eta = expr(&inp.chart, key(s, "request", "eta")?, "[request] eta")?;
                        let k0 = rational(&inp.chart, key(s, "request", "k0")?, "[request] k0")?;
                        let d = SemisimpleData::new(&inp.chart, eta)?;
                        (ttstar::build_detailed_example(&d, &k0)?, true)
                    }
                    other => return fail(format!("[request] construction `{other}` does not produce tt* extension data")),
                }
            };
            out.push(e.check_compatibility(opts)?);
            equivalence(out, ttstar::check_main_theorem(&e, opts)?, "main_theorem");
            Ok(emit.then(|| emit_ttstar(&e, inp.domain, opts)))
        }
    }
}

fn algebra(inp: &Input) -> Res<(FrobeniusAlgebra, LambdaFunctional)> {
    let c = &inp.chart;
    let s = inp.section("algebra")?;
    let constants = as_list(key(s, "algebra", "constants")?, "[algebra] constants")?
        .iter()
        .map(|m| rational_matrix(c, m, "[algebra] constants"))
        .collect::<Res<Vec<_>>>()?;
    let unit = rationals(c, key(s, "algebra", "unit")?, "[algebra] unit")?;
    let gram = rational_matrix(c, key(s, "algebra", "gram")?, "[algebra] gram")?;
    let alg = FrobeniusAlgebra::new(constants, unit, gram)?;
    let l = inp.section("lambda")?;
    let lam = LambdaFunctional::new(rationals(c, key(l, "lambda", "coeffs")?, "[lambda] coeffs")?, &alg)?;
    Ok((alg, lam))
}

fn finish_extension(res: ExtensionResult, inp: &Input, out: &mut Vec<Report>) -> Res<Manifest> {
    out.push(frobenius::check_frobenius(&res.structure, &inp.opts)?);
    if res.euler.is_some() {
        out.push(extension::euler_check_extension(&res, &inp.opts)?);
    }
    let eu = res.euler.as_ref().map(|e| (e, Q::from_integer(2.into())));
    Ok(emit_structure(&res.structure, eu.as_ref().map(|(e, d)| (*e, d)), inp.domain, &inp.opts))
}

fn strs(xs: &[ScalarField]) -> Value {
    Value::list(xs.iter().map(ToString::to_string))
}

fn mat_value(m: &Mat) -> Value {
    Value::List(m.iter().map(|r| strs(r)).collect())
}

fn mats_value(ms: &[Mat]) -> Value {
    Value::List(ms.iter().map(mat_value).collect())
}

fn skeleton(kind: &str, chart: &Chart, domain: Domain, opts: &CheckOpts) -> Manifest {
    let mut m = Manifest::new(kind);
    m.top.insert("chart".into(), Value::list(chart.names().iter().cloned()));
    let o = m.section_mut("options");
    o.insert("domain".into(), Value::str(domain_name(domain)));
    o.insert("points".into(), Value::Int(opts.points as i64));
    o.insert("seed".into(), Value::Int(opts.seed as i64));
    o.insert("tol".into(), Value::str(format!("{:e}", opts.tol)));
    m
}

fn structure_section(a: &AlmostFrobenius) -> Section {
    let mut s = Section::new();
    s.insert("metric".into(), mat_value(a.metric.matrix()));
    s.insert("mult".into(), mats_value(a.mult.constants()));
    s.insert("unit".into(), strs(&a.unit().comps));
    s
}

/// A `structure` manifest for `a`, with an `[euler]` section when `(E, d)` is given.
pub fn emit_structure(a: &AlmostFrobenius, euler: Option<(&VectorField, &Q)>, domain: Domain, opts: &CheckOpts) -> Manifest {
    let mut m = skeleton("structure", a.chart(), domain, opts);
    m.sections.insert("structure".into(), structure_section(a));
    if let Some((e, d)) = euler {
        let s = m.section_mut("euler");
        s.insert("field".into(), strs(&e.comps));
        s.insert("d".into(), Value::str(d.to_string()));
    }
    m
}

pub fn emit_saito(s: &SaitoBundle, omega: &PrimitiveSection, domain: Domain, opts: &CheckOpts) -> Manifest {
    let mut m = skeleton("saito", s.chart(), domain, opts);
    let sec = m.section_mut("saito");
    sec.insert("connection".into(), mats_value(&s.connection));
    sec.insert("higgs".into(), mats_value(&s.higgs));
    sec.insert("pairing".into(), mat_value(&s.pairing));
    if let Some(e) = &s.endos {
        let sec = m.section_mut("endomorphisms");
        sec.insert("r0".into(), mat_value(&e.r0));
        sec.insert("rinf".into(), mat_value(&e.rinf));
        sec.insert("weight".into(), Value::str(e.weight.to_string()));
    }
    m.section_mut("section").insert("omega".into(), strs(&omega.components));
    m
}

fn real_section(k: &RealStructure) -> Section {
    let mut s = Section::new();
    s.insert("left".into(), mat_value(k.left()));
    s.insert("phase".into(), strs(k.phase()));
    s.insert("right".into(), mat_value(k.right()));
    s
}

pub fn emit_ttstar(e: &ExtensionTTData, domain: Domain, opts: &CheckOpts) -> Manifest {
    let b = e.bundle();
    let mut m = skeleton("ttstar", b.chart(), domain, opts);
    let mut base = structure_section(b.base());
    base.insert("type".into(), Value::str("structure"));
    m.sections.insert("base".into(), base);
    let s = m.section_mut("bundle");
    s.insert("connection".into(), mats_value(b.connection()));
    s.insert("mult".into(), mats_value(b.mult_v()));
    s.insert("unit".into(), strs(b.unit_v()));
    s.insert("gram".into(), mat_value(b.gram_v()));
    s.insert("alpha".into(), mat_value(b.alpha()));
    s.insert("fiber_names".into(), Value::list(b.fiber_names().iter().cloned()));
    if let Some(f) = b.parallel_frame() {
        s.insert("frame".into(), mat_value(&f));
    }
    m.sections.insert("k_m".into(), real_section(e.k_m()));
    m.sections.insert("k_v".into(), real_section(e.k_v()));
    m
}
