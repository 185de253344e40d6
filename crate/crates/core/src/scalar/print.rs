//! Deterministic printer emitting the parser's grammar.

use num_traits::{One, Signed, Zero};

use super::num::{C, Q};
use super::poly::{ExpPoly, Key};
use super::Chart;

fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn factors(chart: &Chart, k: &Key) -> Vec<String> {
    let names = chart.var_names();
    let mut out = Vec::new();
    for (i, &a) in k.mono.iter().enumerate() {
        match a {
            0 => {}
            1 => out.push(names[i].clone()),
            _ => out.push(format!("{}^{}", names[i], a)),
        }
    }
    if !k.form_is_zero() {
        let mut s = String::new();
        for (i, l) in k.form.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let neg = l.is_negative();
            let a = l.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push(if neg { '-' } else { '+' });
            }
            if !a.is_one() {
                s.push_str(&fmt_q(&a));
                s.push('*');
            }
            s.push_str(&names[i]);
        }
        out.push(format!("exp({s})"));
    }
    out
}

/// Prints one term; the returned string starts with `-` for negative real coefficients.
fn term(chart: &Chart, k: &Key, c: &C) -> String {
    let f = factors(chart, k).join("*");
    if c.im.is_zero() {
        let neg = c.re.is_negative();
        let a = c.re.abs();
        let sign = if neg { "-" } else { "" };
        if f.is_empty() {
            format!("{sign}{}", fmt_q(&a))
        } else if a.is_one() {
            format!("{sign}{f}")
        } else {
            format!("{sign}{}*{f}", fmt_q(&a))
        }
    } else {
        let im_sign = if c.im.is_negative() { '-' } else { '+' };
        let coef = format!("({}{}{}*I)", fmt_q(&c.re), im_sign, fmt_q(&c.im.abs()));
        if f.is_empty() {
            coef
        } else {
            format!("{coef}*{f}")
        }
    }
}

pub fn print_poly(chart: &Chart, p: &ExpPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, c) in p.terms().rev() {
        let t = term(chart, k, c);
        if !s.is_empty() && !t.starts_with('-') {
            s.push('+');
        }
        s.push_str(&t);
    }
    s
}

pub fn print_field(chart: &Chart, num: &ExpPoly, den: &ExpPoly) -> String {
    if den.is_one() {
        print_poly(chart, num)
    } else {
        format!("({})/({})", print_poly(chart, num), print_poly(chart, den))
    }
}
