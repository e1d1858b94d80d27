use super::{Atom, Expr, Monomial};

/// The shorter of the pairwise reduction and the `cos²`-free normal form,
/// preferring the pairwise one on ties.
pub(super) fn pythagorean(e: &Expr) -> Expr {
    let args = simplify_arguments(e);
    let normal = eliminate_cos_squared(&args);
    let mut paired = args;
    while let Some(next) = reduce_once(&paired) {
        paired = next;
    }
    if normal.len() < paired.len() {
        normal
    } else {
        paired
    }
}

/// Normal form modulo `sin²u + cos²u = 1`: every `cos^p u` with `p ≥ 2` is
/// rewritten through `cos²u = 1 − sin²u`.
pub(super) fn normal_form(e: &Expr) -> Expr {
    eliminate_cos_squared(&simplify_arguments(e))
}

fn eliminate_cos_squared(e: &Expr) -> Expr {
    let mut out = Expr::zero();
    for (m, c) in e.terms() {
        let mut rest = m.clone();
        let mut factor = Expr::one();
        for (atom, p) in m.atoms() {
            let Atom::Cos(u) = atom else { continue };
            if p < 2 {
                continue;
            }
            rest.insert_plain(atom.clone(), -(p - p % 2));
            let sin2 = Expr::sin(u.clone()).pow(2).expect("positive power");
            let one_minus = &Expr::one() - &sin2;
            factor = &factor * &one_minus.pow(p / 2).expect("positive power");
        }
        out += &Expr::term(c.clone(), rest) * &factor;
    }
    out
}

fn simplify_arguments(e: &Expr) -> Expr {
    if !e.contains_transcendental() {
        return e.clone();
    }
    let mut out = Expr::zero();
    for (m, c) in e.terms() {
        let mut acc = Expr::constant(c.clone());
        for (atom, p) in m.atoms() {
            let factor = match atom {
                Atom::Exp(u) => Expr::exp(pythagorean(u)),
                Atom::Sin(u) => Expr::sin(pythagorean(u)),
                Atom::Cos(u) => Expr::cos(pythagorean(u)),
                other => Expr::term(super::integer(1), Monomial::single(other.clone(), 1)),
            };
            acc = &acc * &factor.pow(p).expect("atom power");
        }
        out += acc;
    }
    out
}

/// Finds one pair `c·m·sin²u + c·m·cos²u` and replaces it by `c·m`.
fn reduce_once(e: &Expr) -> Option<Expr> {
    for (m, c) in e.terms() {
        for (atom, p) in m.atoms() {
            let Atom::Sin(u) = atom else { continue };
            if p < 2 {
                continue;
            }
            let cos = Atom::Cos(u.clone());
            let mut partner = m.clone();
            partner.insert_plain(atom.clone(), -2);
            partner.insert_plain(cos.clone(), 2);
            if e.terms.get(&partner) != Some(c) {
                continue;
            }
            let mut reduced = m.clone();
            reduced.insert_plain(atom.clone(), -2);
            let mut out = e.clone();
            out.terms.remove(m);
            out.terms.remove(&partner);
            out.add_term(reduced, c.clone());
            return Some(out);
        }
    }
    None
}
