//! Fractions of exp-polynomials with a canonical reduced representation.

use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};

use super::num::{Num, MAX_DIGITS, MIN_DIGITS, C, Q};
use super::poly::ExpPoly;
use super::{Chart, EvalError, ParseError, Point};

#[derive(Clone)]
pub struct ScalarField {
    chart: Chart,
    num: Arc<ExpPoly>,
    den: Arc<ExpPoly>,
}

fn c_one() -> C {
    Complex::new(Q::one(), Q::zero())
}

fn normalize(mut num: ExpPoly, mut den: ExpPoly) -> (ExpPoly, ExpPoly) {
    assert!(!den.is_zero(), "zero denominator");
    let n = num.nvars();
    if num.is_zero() {
        return (num, ExpPoly::one(n));
    }
    if den.is_one() {
        return (num, den);
    }
    let a = num.min_mono();
    let b = den.min_mono();
    let common: Vec<i64> = a.iter().zip(&b).map(|(x, y)| -(*x.min(y) as i64)).collect();
    let lead_form: Vec<Q> = den.leading().map(|(k, _)| k.form.clone()).unwrap_or_default();
    if common.iter().any(|&c| c != 0) || !lead_form.is_empty() {
        let neg: Vec<Q> = lead_form.iter().map(|x| -x.clone()).collect();
        num = num.shift(&common, &neg);
        den = den.shift(&common, &neg);
    }
    if let Some(c) = den.as_constant() {
        let inv = c_one() / c;
        return (num.scale(&inv), ExpPoly::one(n));
    }
    let lead = den.leading().map(|(_, c)| c.clone()).unwrap();
    let s = if den.all_real() {
        let r = den.real_content();
        let r = if lead.re.is_negative() { -r } else { r };
        Complex::new(Q::one() / r, Q::zero())
    } else {
        c_one() / lead
    };
    (num.scale(&s), den.scale(&s))
}

impl ScalarField {
    fn build(chart: &Chart, num: ExpPoly, den: ExpPoly) -> ScalarField {
        let (num, den) = normalize(num, den);
        ScalarField { chart: chart.clone(), num: Arc::new(num), den: Arc::new(den) }
    }

    /// `num / den`; panics if `den` is the zero polynomial.
    pub fn from_parts(chart: &Chart, num: ExpPoly, den: ExpPoly) -> ScalarField {
        ScalarField::build(chart, num, den)
    }

    pub fn from_poly(chart: &Chart, num: ExpPoly) -> ScalarField {
        let one = ExpPoly::one(chart.nvars());
        ScalarField { chart: chart.clone(), num: Arc::new(num), den: Arc::new(one) }
    }

    pub fn zero(chart: &Chart) -> ScalarField {
        ScalarField::from_poly(chart, ExpPoly::zero(chart.nvars()))
    }

    pub fn one(chart: &Chart) -> ScalarField {
        ScalarField::from_poly(chart, ExpPoly::one(chart.nvars()))
    }

    pub fn constant(chart: &Chart, x: Q) -> ScalarField {
        ScalarField::constant_c(chart, Complex::new(x, Q::zero()))
    }

    pub fn int(chart: &Chart, n: i64) -> ScalarField {
        ScalarField::constant(chart, super::q(n))
    }

    pub fn constant_c(chart: &Chart, c: C) -> ScalarField {
        ScalarField::from_poly(chart, ExpPoly::constant(chart.nvars(), c))
    }

    /// Formal variable by index (conjugate variables follow the holomorphic ones).
    pub fn var(chart: &Chart, i: usize) -> ScalarField {
        ScalarField::from_poly(chart, ExpPoly::var(chart.nvars(), i))
    }

    pub fn var_named(chart: &Chart, name: &str) -> Result<ScalarField, EvalError> {
        chart
            .index_of(name)
            .map(|i| ScalarField::var(chart, i))
            .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))
    }

    pub fn parse(src: &str, chart: &Chart) -> Result<ScalarField, ParseError> {
        super::parse::parse(src, chart)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn numer(&self) -> &ExpPoly {
        &self.num
    }

    pub fn denom(&self) -> &ExpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<C> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn has_exp(&self) -> bool {
        self.num.has_exp() || self.den.has_exp()
    }

    /// True when no conjugate variable occurs.
    pub fn is_holomorphic(&self) -> bool {
        if !self.chart.is_complex() {
            return true;
        }
        let n = self.chart.dim();
        let uses_bar = |p: &ExpPoly| {
            p.terms()
                .any(|(k, _)| k.mono[n..].iter().any(|&a| a > 0) || k.form[..].iter().skip(n).any(|x| !x.is_zero()))
        };
        !uses_bar(&self.num) && !uses_bar(&self.den)
    }

    /// Identical normalized representation (stronger than `==`).
    pub fn same_repr(&self, o: &ScalarField) -> bool {
        self.chart == o.chart && self.num == o.num && self.den == o.den
    }

    fn check_chart(&self, o: &ScalarField) {
        assert!(self.chart == o.chart, "fields on different charts: {:?} vs {:?}", self.chart, o.chart);
    }

    pub fn add(&self, o: &ScalarField) -> ScalarField {
        self.check_chart(o);
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return ScalarField::from_poly(&self.chart, self.num.add(&o.num));
        }
        if self.den == o.den {
            return ScalarField::build(&self.chart, self.num.add(&o.num), (*self.den).clone());
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        ScalarField::build(&self.chart, num, self.den.mul(&o.den))
    }

    pub fn neg(&self) -> ScalarField {
        ScalarField { chart: self.chart.clone(), num: Arc::new(self.num.neg()), den: self.den.clone() }
    }

    pub fn sub(&self, o: &ScalarField) -> ScalarField {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ScalarField) -> ScalarField {
        self.check_chart(o);
        if self.is_zero() || o.is_zero() {
            return ScalarField::zero(&self.chart);
        }
        if self.den.is_one() && o.den.is_one() {
            return ScalarField::from_poly(&self.chart, self.num.mul(&o.num));
        }
        if let Some(c) = o.as_constant() {
            return self.scale_c(&c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale_c(&c);
        }
        ScalarField::build(&self.chart, self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, s: &Q) -> ScalarField {
        self.scale_c(&Complex::new(s.clone(), Q::zero()))
    }

    pub fn scale_c(&self, s: &C) -> ScalarField {
        if s.re.is_zero() && s.im.is_zero() {
            return ScalarField::zero(&self.chart);
        }
        ScalarField { chart: self.chart.clone(), num: Arc::new(self.num.scale(s)), den: self.den.clone() }
    }

    /// `None` when the divisor is the zero field.
    pub fn checked_div(&self, o: &ScalarField) -> Option<ScalarField> {
        self.check_chart(o);
        if o.is_zero() {
            return None;
        }
        if let Some(c) = o.as_constant() {
            return Some(self.scale_c(&(c_one() / c)));
        }
        Some(ScalarField::build(&self.chart, self.num.mul(&o.den), self.den.mul(&o.num)))
    }

    pub fn recip(&self) -> Option<ScalarField> {
        ScalarField::one(&self.chart).checked_div(self)
    }

    pub fn pow(&self, e: u32) -> ScalarField {
        if self.den.is_one() {
            return ScalarField::from_poly(&self.chart, self.num.pow(e));
        }
        ScalarField::build(&self.chart, self.num.pow(e), self.den.pow(e))
    }

    /// Partial derivative with respect to formal variable `i`.
    pub fn diff(&self, i: usize) -> ScalarField {
        let dn = self.num.diff(i);
        if self.den.is_one() {
            return ScalarField::from_poly(&self.chart, dn);
        }
        let dd = self.den.diff(i);
        if dd.is_zero() {
            return ScalarField::build(&self.chart, dn, (*self.den).clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        ScalarField::build(&self.chart, num, self.den.mul(&self.den))
    }

    pub fn diff_var(&self, name: &str) -> Result<ScalarField, EvalError> {
        self.chart
            .index_of(name)
            .map(|i| self.diff(i))
            .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))
    }

    /// Complex conjugate: swaps each coordinate with its conjugate variable and conjugates coefficients.
    pub fn conj(&self) -> ScalarField {
        let map = self.chart.conj_map();
        ScalarField::build(&self.chart, self.num.conj_remap(&map), self.den.conj_remap(&map))
    }

    /// Re-express on a chart containing every variable of this one (matched by name).
    pub fn embed(&self, target: &Chart) -> Result<ScalarField, EvalError> {
        if *target == self.chart {
            return Ok(self.clone());
        }
        let map = self
            .chart
            .var_names()
            .iter()
            .map(|v| target.index_of(v).ok_or_else(|| EvalError::UnknownVariable(v.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let n = target.nvars();
        Ok(ScalarField::build(target, self.num.remap(&map, n), self.den.remap(&map, n)))
    }

    /// Re-express on a chart holding a subset of the variables (matched by name).
    /// Fails if a dropped variable occurs.
    pub fn restrict(&self, target: &Chart) -> Result<ScalarField, EvalError> {
        if *target == self.chart {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.chart.nvars());
        for (i, v) in self.chart.var_names().iter().enumerate() {
            match target.index_of(v) {
                Some(j) => map.push(j),
                None if self.num.uses_var(i) || self.den.uses_var(i) => {
                    return Err(EvalError::UnknownVariable(v.clone()))
                }
                None => map.push(0),
            }
        }
        let n = target.nvars();
        Ok(ScalarField::build(target, self.num.remap(&map, n), self.den.remap(&map, n)))
    }

    /// Exact value when the field is exp-free, otherwise a value on the working grid.
    pub fn evaluate(&self, p: &Point) -> Result<Num, EvalError> {
        if p.chart != self.chart {
            return Err(EvalError::ChartMismatch);
        }
        self.eval_values(&p.values())
    }

    /// Evaluate on precomputed variable values (see [`Point::values`]).
    pub fn eval_values(&self, vals: &[Num]) -> Result<Num, EvalError> {
        let n = self.num.eval(vals)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = self.den.eval(vals)?;
        n.div(&d)
    }

    /// Decimal rendering of the real and imaginary parts with `digits` significant digits.
    pub fn evaluate_digits(&self, p: &Point, digits: u32) -> Result<(String, String), EvalError> {
        if !(MIN_DIGITS..=MAX_DIGITS).contains(&digits) {
            return Err(EvalError::Precision { requested: digits, min: MIN_DIGITS, max: MAX_DIGITS });
        }
        let v = self.evaluate(p)?;
        Ok((super::num::to_decimal_string(&v.re, digits), super::num::to_decimal_string(&v.im, digits)))
    }
}

impl PartialEq for ScalarField {
    fn eq(&self, o: &ScalarField) -> bool {
        if self.chart != o.chart {
            return false;
        }
        if self.den == o.den {
            return self.num == o.num;
        }
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print_field(&self.chart, &self.num, &self.den))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({self})")
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl ops::$tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, o: &ScalarField) -> ScalarField {
                ScalarField::$m(self, o)
            }
        }
        impl ops::$tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, o: ScalarField) -> ScalarField {
                ScalarField::$m(&self, &o)
            }
        }
        impl ops::$tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, o: &ScalarField) -> ScalarField {
                ScalarField::$m(&self, o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(self)
    }
}

impl ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(&self)
    }
}
