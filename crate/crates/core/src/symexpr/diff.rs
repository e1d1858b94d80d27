use super::{integer, Atom, Expr, Lambda, Monomial};

impl Expr {
    /// Exact partial derivative with respect to variable `k`.
    ///
    /// The λ slot is differentiated through the chain rule with the concrete
    /// `lambda`, so `∂ exp(mλ) = m·exp(mλ)·∂λ`.
    pub fn diff(&self, k: usize, lambda: &Lambda) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            let d = diff_monomial(m, k, lambda);
            if !d.is_zero() {
                out += d.scale(c);
            }
        }
        out
    }

    /// Gradient over variables `0..count`.
    pub fn gradient(&self, count: usize, lambda: &Lambda) -> Vec<Expr> {
        (0..count).map(|k| self.diff(k, lambda)).collect()
    }
}

fn diff_monomial(m: &Monomial, k: usize, lambda: &Lambda) -> Expr {
    let mut out = Expr::zero();
    for (atom, p) in m.atoms() {
        let d_atom = diff_atom_power(atom, p, k, lambda);
        if d_atom.is_zero() {
            continue;
        }
        let rest = Expr::term(integer(1), m.without(atom));
        out += &d_atom * &rest;
    }
    out
}

/// Derivative of `atom^p` with respect to variable `k`.
fn diff_atom_power(atom: &Atom, p: i32, k: usize, lambda: &Lambda) -> Expr {
    let pc = integer(p as i64);
    let pow = |a: Atom, q: i32| Expr::term(integer(1), Monomial::single(a, q));
    match atom {
        Atom::Var(j) => {
            if *j == k {
                pow(Atom::Var(*j), p - 1).scale(&pc)
            } else {
                Expr::zero()
            }
        }
        Atom::Lam => {
            let dl = lambda.expr().diff(k, &Lambda::zero());
            if dl.is_zero() {
                return Expr::zero();
            }
            &pow(Atom::Lam, p - 1).scale(&pc) * &dl
        }
        Atom::ExpLam => {
            let dl = lambda.expr().diff(k, &Lambda::zero());
            if dl.is_zero() {
                return Expr::zero();
            }
            &pow(Atom::ExpLam, p).scale(&pc) * &dl
        }
        Atom::Exp(u) => {
            let du = u.diff(k, lambda);
            if du.is_zero() {
                return Expr::zero();
            }
            // power is always 1 for general exponentials
            &Expr::exp(u.clone()).pow(p).expect("monomial power") * &du.scale(&pc)
        }
        Atom::Sin(u) => {
            let du = u.diff(k, lambda);
            if du.is_zero() {
                return Expr::zero();
            }
            let base = &pow(Atom::Sin(u.clone()), p - 1) * &pow(Atom::Cos(u.clone()), 1);
            &base.scale(&pc) * &du
        }
        Atom::Cos(u) => {
            let du = u.diff(k, lambda);
            if du.is_zero() {
                return Expr::zero();
            }
            let base = &pow(Atom::Cos(u.clone()), p - 1) * &pow(Atom::Sin(u.clone()), 1);
            &base.scale(&(-pc)) * &du
        }
    }
}
