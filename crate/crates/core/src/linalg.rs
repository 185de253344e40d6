//! Small dense matrices of scalar fields (symbolic) and of point values (numeric).

use crate::scalar::{Chart, EvalError, Num, ScalarField, C, Q};

pub type Mat = Vec<Vec<ScalarField>>;
pub type NMat = Vec<Vec<Num>>;

pub fn zeros(chart: &Chart, r: usize, c: usize) -> Mat {
    vec![vec![ScalarField::zero(chart); c]; r]
}

pub fn identity(chart: &Chart, n: usize) -> Mat {
    let mut m = zeros(chart, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ScalarField::one(chart);
    }
    m
}

pub fn from_rationals(chart: &Chart, rows: &[Vec<Q>]) -> Mat {
    rows.iter().map(|r| r.iter().map(|x| ScalarField::constant(chart, x.clone())).collect()).collect()
}

pub fn from_complex(chart: &Chart, rows: &[Vec<C>]) -> Mat {
    rows.iter().map(|r| r.iter().map(|x| ScalarField::constant_c(chart, x.clone())).collect()).collect()
}

pub fn transpose(m: &Mat) -> Mat {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| {
                    let mut s = ScalarField::zero(row[0].chart());
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s = s.add(&row[k].mul(&b[k][j]));
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mul_vec(a: &Mat, v: &[ScalarField]) -> Vec<ScalarField> {
    a.iter()
        .map(|row| {
            let mut s = ScalarField::zero(v[0].chart());
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    s = s.add(&x.mul(y));
                }
            }
            s
        })
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
}

pub fn scale(a: &Mat, s: &ScalarField) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x.mul(s)).collect()).collect()
}

pub fn conj(a: &Mat) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x.conj()).collect()).collect()
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    sub(&mul(a, b), &mul(b, a))
}

pub fn embed(a: &Mat, chart: &Chart) -> Result<Mat, EvalError> {
    a.iter().map(|r| r.iter().map(|x| x.embed(chart)).collect()).collect()
}

pub fn is_zero(a: &Mat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

fn minor(m: &Mat, row: usize, col: usize) -> Mat {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Laplace expansion along the sparsest row.
pub fn det(m: &Mat, chart: &Chart) -> ScalarField {
    let n = m.len();
    match n {
        0 => return ScalarField::one(chart),
        1 => return m[0][0].clone(),
        2 => return m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {}
    }
    let row = (0..n).max_by_key(|&i| m[i].iter().filter(|x| x.is_zero()).count()).unwrap();
    let mut acc = ScalarField::zero(chart);
    for j in 0..n {
        if m[row][j].is_zero() {
            continue;
        }
        let t = m[row][j].mul(&det(&minor(m, row, j), chart));
        acc = if (row + j) % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// Inverse through adjugate and determinant; `None` if the determinant is identically zero.
pub fn inverse(m: &Mat, chart: &Chart) -> Option<Mat> {
    let n = m.len();
    let d = det(m, chart);
    if d.is_zero() {
        return None;
    }
    if n == 1 {
        return Some(vec![vec![d.recip()?]]);
    }
    let dinv = d.recip()?;
    let mut out = zeros(chart, n, n);
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(m, j, i), chart);
            let c = if (i + j) % 2 == 0 { c } else { c.neg() };
            out[i][j] = c.mul(&dinv);
        }
    }
    Some(out)
}

pub fn eval(m: &Mat, vals: &[Num]) -> Result<NMat, EvalError> {
    m.iter().map(|r| r.iter().map(|x| x.eval_values(vals)).collect()).collect()
}

pub fn eval_vec(v: &[ScalarField], vals: &[Num]) -> Result<Vec<Num>, EvalError> {
    v.iter().map(|x| x.eval_values(vals)).collect()
}

pub mod num {
    //! Numeric counterparts on point values.

    use super::NMat;
    use crate::scalar::{EvalError, Num};

    pub fn zeros(r: usize, c: usize) -> NMat {
        vec![vec![Num::zero(); c]; r]
    }

    pub fn identity(n: usize) -> NMat {
        let mut m = zeros(n, n);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Num::one();
        }
        m
    }

    pub fn transpose(m: &NMat) -> NMat {
        if m.is_empty() {
            return Vec::new();
        }
        (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
    }

    pub fn conj(m: &NMat) -> NMat {
        m.iter().map(|r| r.iter().map(Num::conj).collect()).collect()
    }

    pub fn mul(a: &NMat, b: &NMat) -> NMat {
        a.iter()
            .map(|row| {
                (0..b[0].len())
                    .map(|j| {
                        let mut s = Num::zero();
                        for (k, x) in row.iter().enumerate() {
                            if !x.is_zero() && !b[k][j].is_zero() {
                                s = s.add(&x.mul(&b[k][j]));
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mul_vec(a: &NMat, v: &[Num]) -> Vec<Num> {
        a.iter()
            .map(|row| row.iter().zip(v).fold(Num::zero(), |s, (x, y)| s.add(&x.mul(y))))
            .collect()
    }

    pub fn add(a: &NMat, b: &NMat) -> NMat {
        a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
    }

    pub fn sub(a: &NMat, b: &NMat) -> NMat {
        a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
    }

    pub fn scale(a: &NMat, s: &Num) -> NMat {
        a.iter().map(|r| r.iter().map(|x| x.mul(s)).collect()).collect()
    }

    pub fn neg(a: &NMat) -> NMat {
        a.iter().map(|r| r.iter().map(Num::neg).collect()).collect()
    }

    pub fn commutator(a: &NMat, b: &NMat) -> NMat {
        sub(&mul(a, b), &mul(b, a))
    }

    pub fn max_abs(a: &NMat) -> f64 {
        a.iter().flatten().map(Num::abs).fold(0.0, f64::max)
    }

    pub fn max_abs_vec(a: &[Num]) -> f64 {
        a.iter().map(Num::abs).fold(0.0, f64::max)
    }

    /// Gauss–Jordan inverse with largest-modulus pivoting.
    pub fn inverse(m: &NMat) -> Result<NMat, EvalError> {
        let n = m.len();
        let mut a: NMat = m.clone();
        let mut inv = identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].is_negligible() {
                return Err(EvalError::Singular);
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = a[col][j].div(&p)?;
                inv[col][j] = inv[col][j].div(&p)?;
            }
            for i in 0..n {
                if i == col || a[i][col].is_zero() {
                    continue;
                }
                let f = a[i][col].clone();
                for j in 0..n {
                    a[i][j] = a[i][j].sub(&f.mul(&a[col][j]));
                    inv[i][j] = inv[i][j].sub(&f.mul(&inv[col][j]));
                }
            }
        }
        Ok(inv)
    }

    pub fn det(m: &NMat) -> Num {
        let n = m.len();
        let mut a = m.clone();
        let mut d = Num::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if a[piv][col].is_zero() {
                return Num::zero();
            }
            if piv != col {
                a.swap(col, piv);
                d = d.neg();
            }
            let p = a[col][col].clone();
            d = d.mul(&p);
            for i in col + 1..n {
                if a[i][col].is_zero() {
                    continue;
                }
                let f = match a[i][col].div(&p) {
                    Ok(f) => f,
                    Err(_) => return Num::zero(),
                };
                for j in col..n {
                    a[i][j] = a[i][j].sub(&f.mul(&a[col][j]));
                }
            }
        }
        d
    }
}
