//! Exact scalar fields on a coordinate chart.

pub mod field;
pub mod num;
mod parse;
pub mod poly;
mod print;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

pub use field::ScalarField;
pub use num::{q, qr, Num, C, Q};
pub use parse::ParseError;
pub use poly::ExpPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Real,
    Complex,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("duplicate variable `{0}`")]
    Duplicate(String),
    #[error("`{0}` is not a valid variable name")]
    BadName(String),
    #[error("chart must have at least one variable")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("denominator vanishes at the point")]
    Singular,
    #[error("exponential argument too large to evaluate")]
    Overflow,
    #[error("requested {requested} digits, supported range is {min}..={max}")]
    Precision { requested: u32, min: u32, max: u32 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("point has {got} coordinates, chart has dimension {want}")]
    Dimension { got: usize, want: usize },
    #[error("point and field live on different charts")]
    ChartMismatch,
}

#[derive(Debug, PartialEq, Eq)]
struct ChartInner {
    names: Vec<String>,
    vars: Vec<String>,
    domain: Domain,
}

/// Named coordinates. Complex charts carry one formal conjugate variable
/// `<name>_bar` per coordinate, stored after the holomorphic ones.
#[derive(Clone)]
pub struct Chart(Arc<ChartInner>);

fn valid_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
        && s != "exp"
        && s != "I"
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S], domain: Domain) -> Result<Chart, ChartError> {
        if names.is_empty() {
            return Err(ChartError::Empty);
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut vars = names.clone();
        if domain == Domain::Complex {
            vars.extend(names.iter().map(|n| format!("{n}_bar")));
        }
        for (i, v) in vars.iter().enumerate() {
            if !valid_ident(v) {
                return Err(ChartError::BadName(v.clone()));
            }
            if vars[..i].contains(v) {
                return Err(ChartError::Duplicate(v.clone()));
            }
        }
        Ok(Chart(Arc::new(ChartInner { names, vars, domain })))
    }

    pub fn real<S: AsRef<str>>(names: &[S]) -> Chart {
        Chart::new(names, Domain::Real).expect("valid chart")
    }

    pub fn complex<S: AsRef<str>>(names: &[S]) -> Chart {
        Chart::new(names, Domain::Complex).expect("valid chart")
    }

    /// `prefix1..prefixN`.
    pub fn numbered(prefix: &str, n: usize, domain: Domain) -> Chart {
        let names: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}")).collect();
        Chart::new(&names, domain).expect("valid chart")
    }

    /// Chart whose coordinates are those of `self` followed by `extra`.
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<Chart, ChartError> {
        let mut names = self.0.names.clone();
        names.extend(extra.iter().map(|s| s.as_ref().to_string()));
        Chart::new(&names, self.0.domain)
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    /// Number of formal variables (twice the dimension on complex charts).
    pub fn nvars(&self) -> usize {
        self.0.vars.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn var_names(&self) -> &[String] {
        &self.0.vars
    }

    pub fn domain(&self) -> Domain {
        self.0.domain
    }

    pub fn is_complex(&self) -> bool {
        self.0.domain == Domain::Complex
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.vars.iter().position(|v| v == name)
    }

    /// Index of the conjugate partner of formal variable `i` (identity on real charts).
    pub fn conj_index(&self, i: usize) -> usize {
        let n = self.dim();
        if !self.is_complex() {
            i
        } else if i < n {
            i + n
        } else {
            i - n
        }
    }

    pub fn conj_map(&self) -> Vec<usize> {
        (0..self.nvars()).map(|i| self.conj_index(i)).collect()
    }
}

impl PartialEq for Chart {
    fn eq(&self, o: &Chart) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}

impl Eq for Chart {}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({:?}, {:?})", self.0.names, self.0.domain)
    }
}

/// Exact coordinates of a point of a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub chart: Chart,
    pub coords: Vec<C>,
}

impl Point {
    pub fn new(chart: &Chart, coords: Vec<C>) -> Result<Point, EvalError> {
        if coords.len() != chart.dim() {
            return Err(EvalError::Dimension { got: coords.len(), want: chart.dim() });
        }
        if !chart.is_complex() && coords.iter().any(|c| !c.im.is_zero()) {
            return Err(EvalError::ChartMismatch);
        }
        Ok(Point { chart: chart.clone(), coords })
    }

    pub fn real(chart: &Chart, coords: Vec<Q>) -> Result<Point, EvalError> {
        Point::new(chart, coords.into_iter().map(|x| Complex::new(x, Q::zero())).collect())
    }

    pub fn origin(chart: &Chart) -> Point {
        Point { chart: chart.clone(), coords: vec![Complex::new(Q::zero(), Q::zero()); chart.dim()] }
    }

    /// Values of all formal variables; conjugate variables are bound to the conjugate coordinate.
    pub fn values(&self) -> Vec<Num> {
        let mut v: Vec<Num> = self.coords.iter().map(Num::from_c).collect();
        if self.chart.is_complex() {
            v.extend(self.coords.iter().map(|c| Num::from_c(&c.conj())));
        }
        v
    }

    /// Restriction to the first `chart.dim()` coordinates, relabelled on `chart`.
    pub fn project(&self, chart: &Chart) -> Point {
        Point { chart: chart.clone(), coords: self.coords[..chart.dim()].to_vec() }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if c.im.is_zero() {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "{}+{}*I", c.re, c.im)?;
            }
        }
        write!(f, ")")
    }
}
