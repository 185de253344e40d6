//! Exp-polynomials: finite sums of `c * x^a * exp(l(x))` with `l` a rational linear form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use num_traits::{One, Signed, Zero};

use super::num::{Num, C, Q};
use super::EvalError;

/// Term key: exponent multi-index and exponential form. A zero form is stored
/// as an empty vector so that plain polynomials carry no form allocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Key {
    pub mono: Vec<u32>,
    pub form: Vec<Q>,
}

impl Key {
    pub fn form_is_zero(&self) -> bool {
        self.form.is_empty()
    }

    pub fn form_coeff(&self, i: usize) -> Q {
        self.form.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> u32 {
        self.mono.iter().sum()
    }
}

fn cmp_forms(a: &[Q], b: &[Q], n: usize) -> Ordering {
    if a.is_empty() && b.is_empty() {
        return Ordering::Equal;
    }
    let zero = Q::zero();
    for i in 0..n {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

impl Ord for Key {
    // Graded on the monomial, then lexicographic, then the exponential form
    // compared numerically (so shifting every form by the same vector keeps order).
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.mono.cmp(&o.mono))
            .then_with(|| cmp_forms(&self.form, &o.form, self.mono.len()))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn canonical_form(v: Vec<Q>) -> Vec<Q> {
    if v.iter().all(|x| x.is_zero()) {
        Vec::new()
    } else {
        v
    }
}

fn add_forms(a: &[Q], b: &[Q], n: usize) -> Vec<Q> {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    canonical_form((0..n).map(|i| &a[i] + &b[i]).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpPoly {
    nvars: usize,
    terms: BTreeMap<Key, C>,
}

impl ExpPoly {
    pub fn zero(nvars: usize) -> ExpPoly {
        ExpPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> ExpPoly {
        let mut p = ExpPoly::zero(nvars);
        p.push(Key { mono: vec![0; nvars], form: Vec::new() }, c);
        p
    }

    pub fn one(nvars: usize) -> ExpPoly {
        ExpPoly::constant(nvars, Complex::new(Q::one(), Q::zero()))
    }

    pub fn var(nvars: usize, i: usize) -> ExpPoly {
        let mut mono = vec![0; nvars];
        mono[i] = 1;
        let mut p = ExpPoly::zero(nvars);
        p.push(Key { mono, form: Vec::new() }, Complex::new(Q::one(), Q::zero()));
        p
    }

    /// `exp(l)` for a linear form given by its coefficients.
    pub fn exp_of_form(nvars: usize, form: Vec<Q>) -> ExpPoly {
        let mut p = ExpPoly::zero(nvars);
        p.push(Key { mono: vec![0; nvars], form: canonical_form(form) }, Complex::new(Q::one(), Q::zero()));
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Key, C)>) -> ExpPoly {
        let mut p = ExpPoly::zero(nvars);
        for (k, c) in terms {
            p.push(k, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Key, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && {
            let (k, c) = self.terms.iter().next().unwrap();
            k.degree() == 0 && k.form_is_zero() && c.re.is_one() && c.im.is_zero()
        }
    }

    /// Constant value if the polynomial has no variables and no exponentials.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(Complex::new(Q::zero(), Q::zero())),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                (k.degree() == 0 && k.form_is_zero()).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Key, &C)> {
        self.terms.iter().next_back()
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(|k| !k.form_is_zero())
    }

    pub fn all_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    fn push(&mut self, k: Key, c: C) {
        if c.re.is_zero() && c.im.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.re.is_zero() && s.im.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(k.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> ExpPoly {
        ExpPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> ExpPoly {
        if s.re.is_zero() && s.im.is_zero() {
            return ExpPoly::zero(self.nvars);
        }
        ExpPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &ExpPoly) -> ExpPoly {
        let n = self.nvars;
        let mut out = ExpPoly::zero(n);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let mono = k1.mono.iter().zip(&k2.mono).map(|(a, b)| a + b).collect();
                let form = add_forms(&k1.form, &k2.form, n);
                out.push(Key { mono, form }, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> ExpPoly {
        let mut base = self.clone();
        let mut acc = ExpPoly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiply by `x^mono * exp(form)` where `mono` may be negative (caller
    /// guarantees the result has nonnegative exponents).
    pub fn shift(&self, mono: &[i64], form: &[Q]) -> ExpPoly {
        let n = self.nvars;
        let form = canonical_form(if form.is_empty() { vec![Q::zero(); n] } else { form.to_vec() });
        ExpPoly {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let m = k
                        .mono
                        .iter()
                        .zip(mono)
                        .map(|(a, b)| {
                            let v = *a as i64 + b;
                            assert!(v >= 0, "negative exponent after shift");
                            v as u32
                        })
                        .collect();
                    (Key { mono: m, form: add_forms(&k.form, &form, n) }, c.clone())
                })
                .collect(),
        }
    }

    pub fn diff(&self, i: usize) -> ExpPoly {
        let n = self.nvars;
        let mut out = ExpPoly::zero(n);
        for (k, c) in &self.terms {
            let a = k.mono[i];
            if a > 0 {
                let mut m = k.mono.clone();
                m[i] -= 1;
                let f = Complex::new(Q::from_integer(a.into()), Q::zero());
                out.push(Key { mono: m, form: k.form.clone() }, c * f);
            }
            let l = k.form_coeff(i);
            if !l.is_zero() {
                out.push(k.clone(), c * Complex::new(l, Q::zero()));
            }
        }
        out
    }

    /// Rename variables: old index `i` becomes `map[i]` in a space of `nvars` variables.
    pub fn remap(&self, map: &[usize], nvars: usize) -> ExpPoly {
        let mut out = ExpPoly::zero(nvars);
        for (k, c) in &self.terms {
            let mut m = vec![0; nvars];
            for (i, a) in k.mono.iter().enumerate() {
                m[map[i]] += a;
            }
            let form = if k.form.is_empty() {
                Vec::new()
            } else {
                let mut f = vec![Q::zero(); nvars];
                for (i, l) in k.form.iter().enumerate() {
                    f[map[i]] += l;
                }
                canonical_form(f)
            };
            out.push(Key { mono: m, form }, c.clone());
        }
        out
    }

    /// Whether variable `i` occurs in a monomial or an exponent.
    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|k| k.mono[i] > 0 || k.form.get(i).is_some_and(|l| !l.is_zero()))
    }

    /// Complex conjugation of the coefficients, after renaming variables by `map`.
    pub fn conj_remap(&self, map: &[usize]) -> ExpPoly {
        let p = self.remap(map, self.nvars);
        ExpPoly {
            nvars: p.nvars,
            terms: p.terms.into_iter().map(|(k, c)| (k, c.conj())).collect(),
        }
    }

    /// Componentwise minimum exponent over all terms.
    pub fn min_mono(&self) -> Vec<u32> {
        let mut it = self.terms.keys();
        let mut m = match it.next() {
            Some(k) => k.mono.clone(),
            None => return vec![0; self.nvars],
        };
        for k in it {
            for (a, b) in m.iter_mut().zip(&k.mono) {
                *a = (*a).min(*b);
            }
        }
        m
    }

    /// Positive rational `r` such that `self / r` has coprime integer coefficients,
    /// assuming all coefficients are real.
    pub fn real_content(&self) -> Q {
        use num_integer::Integer;
        let mut g = num_bigint::BigInt::zero();
        let mut l = num_bigint::BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.re.numer());
            l = l.lcm(c.re.denom());
        }
        if g.is_zero() {
            return Q::one();
        }
        Q::new(g.abs(), l)
    }

    pub fn eval(&self, vals: &[Num]) -> Result<Num, EvalError> {
        let mut pow_cache: HashMap<(usize, u32), Num> = HashMap::new();
        let mut exp_cache: HashMap<&Vec<Q>, Num> = HashMap::new();
        let mut acc = Num::zero();
        for (k, c) in &self.terms {
            let mut t = Num::from_c(c);
            for (i, &a) in k.mono.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let p = pow_cache.entry((i, a)).or_insert_with(|| vals[i].powu(a)).clone();
                t = t.mul(&p);
            }
            if !k.form.is_empty() {
                let e = match exp_cache.get(&k.form) {
                    Some(e) => e.clone(),
                    None => {
                        let mut arg = Num::zero();
                        for (i, l) in k.form.iter().enumerate() {
                            if !l.is_zero() {
                                arg = arg.add(&vals[i].scale(l));
                            }
                        }
                        let e = arg.exp()?;
                        exp_cache.insert(&k.form, e.clone());
                        e
                    }
                };
                t = t.mul(&e);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }
}
