use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{expr_equal, Atom, Expr, Lambda};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("variable x{index} is outside the supplied point of length {len}")]
    MissingVariable { index: usize, len: usize },
    #[error("evaluation produced a non-finite value ({0})")]
    NonFinite(f64),
    #[error("lambda slot encountered without a lambda value")]
    UnboundLambda,
}

impl Expr {
    /// Numeric value at `point`. λ is evaluated first, then the atoms that
    /// depend on it.
    pub fn eval(&self, point: &[f64], lambda: &Lambda) -> Result<f64, EvalError> {
        let lam = eval_inner(lambda.expr(), point, None)?;
        let value = eval_inner(self, point, Some(lam))?;
        finite(value)
    }
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(v))
    }
}

fn eval_inner(e: &Expr, point: &[f64], lam: Option<f64>) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut v = c.to_f64().unwrap_or(f64::NAN);
        for (atom, p) in m.atoms() {
            let base = match atom {
                Atom::Var(k) => *point.get(*k).ok_or(EvalError::MissingVariable {
                    index: *k,
                    len: point.len(),
                })?,
                Atom::Lam => lam.ok_or(EvalError::UnboundLambda)?,
                Atom::ExpLam => lam.ok_or(EvalError::UnboundLambda)?.exp(),
                Atom::Exp(u) => eval_inner(u, point, lam)?.exp(),
                Atom::Sin(u) => eval_inner(u, point, lam)?.sin(),
                Atom::Cos(u) => eval_inner(u, point, lam)?.cos(),
            };
            v *= base.powi(p);
        }
        total += v;
    }
    finite(total)
}

/// Outcome of comparing two expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// Canonical forms coincide.
    Exact,
    /// Canonical forms differ but the expressions agree at random points;
    /// only reported when transcendental atoms are present.
    NumericOnly,
    Different,
}

/// Randomized-evaluation oracle: compares `a` and `b` at `samples` points
/// drawn uniformly from `[-1, 1]^vars` with a fixed seed. Points where either
/// side fails to evaluate are skipped.
pub fn numeric_equivalent(
    a: &Expr,
    b: &Expr,
    lambda: &Lambda,
    vars: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..samples * 4 {
        if checked == samples {
            break;
        }
        let point: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (Ok(va), Ok(vb)) = (a.eval(&point, lambda), b.eval(&point, lambda)) else {
            continue;
        };
        checked += 1;
        let scale = 1.0_f64.max(va.abs()).max(vb.abs());
        if (va - vb).abs() > tol * scale {
            return false;
        }
    }
    checked > 0
}

impl Expr {
    /// Classifies how `self` and `other` relate: exact canonical equality,
    /// agreement only under numeric sampling (transcendental case), or not
    /// equal.
    pub fn equivalence(&self, other: &Expr, lambda: &Lambda, vars: usize) -> Equivalence {
        if expr_equal(self, other) {
            return Equivalence::Exact;
        }
        if (self.contains_transcendental() || other.contains_transcendental())
            && numeric_equivalent(self, other, lambda, vars, 30, 1e-9, 0x5eed)
        {
            Equivalence::NumericOnly
        } else {
            Equivalence::Different
        }
    }
}
