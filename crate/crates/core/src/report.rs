//! Residual reports and the sampling policy shared by every check.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{Chart, Point, Q};
use num_complex::Complex;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// Passes when the residual is at most the tolerance.
    Vanish,
    /// Passes when the residual exceeds the tolerance (detection of a nonzero quantity).
    Nonvanish,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub kind: CheckKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub points: Vec<Point>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Report {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn vanish(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> &mut Self {
        let pass = residual.is_finite() && residual <= tol;
        self.checks.push(Check { name: name.into(), residual, tol, pass, kind: CheckKind::Vanish });
        self
    }

    pub fn nonvanish(&mut self, name: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        let pass = value.is_finite() && value > tol;
        self.checks.push(Check { name: name.into(), residual: value, tol, pass, kind: CheckKind::Nonvanish });
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    /// Append the checks of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) -> &mut Self {
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.name = format!("{prefix}.{}", c.name);
            }
            self.checks.push(c);
        }
        self.notes.extend(other.notes);
        if self.points.is_empty() {
            self.points = other.points;
        }
        self
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Residual of the named check; panics if absent.
    pub fn residual(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no check named `{name}` in {:?}", self.names())).residual
    }

    pub fn passed(&self, name: &str) -> bool {
        self.get(name).unwrap_or_else(|| panic!("no check named `{name}` in {:?}", self.names())).pass
    }

    pub fn names(&self) -> Vec<&str> {
        self.checks.iter().map(|c| c.name.as_str()).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.title, if self.pass() { "PASS" } else { "FAIL" })?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<40} {:>12.3e} tol {:.1e} {}",
                c.name,
                c.residual,
                c.tol,
                if c.pass { "ok" } else { "FAIL" }
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOpts {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOpts {
    fn default() -> Self {
        CheckOpts { points: 20, seed: 0, tol: 1e-9 }
    }
}

impl CheckOpts {
    pub fn with_tol(&self, tol: f64) -> CheckOpts {
        CheckOpts { tol, ..self.clone() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("no admissible sample point found after {attempts} draws")]
pub struct SampleError {
    pub attempts: usize,
}

const MAX_DEN: i64 = 16;

fn draw(rng: &mut ChaCha8Rng) -> Q {
    let d = rng.random_range(1..=MAX_DEN);
    let n = rng.random_range(-d..=d);
    crate::scalar::qr(n, d)
}

/// Deterministic rational points in `[-1, 1]^n` (real and imaginary parts on complex
/// charts) with denominators at most 16; points rejected by `guard` are redrawn.
pub fn sample_points(
    chart: &Chart,
    count: usize,
    seed: u64,
    guard: impl Fn(&Point) -> bool,
) -> Result<Vec<Point>, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let budget = 200 * count.max(1);
    let mut attempts = 0;
    while out.len() < count {
        if attempts >= budget {
            return Err(SampleError { attempts });
        }
        attempts += 1;
        let coords = (0..chart.dim())
            .map(|_| {
                let re = draw(&mut rng);
                let im = if chart.is_complex() { draw(&mut rng) } else { Q::zero() };
                Complex::new(re, im)
            })
            .collect();
        let p = Point { chart: chart.clone(), coords };
        if guard(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

