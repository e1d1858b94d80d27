//! Printing in the parser's grammar. Output re-parses to the same canonical
//! form.

use std::fmt::{self, Write};

use num::{One, Signed};

use super::{Atom, Expr, Monomial};
use crate::chart::Chart;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, &|k| format!("x{k}"))
    }
}

impl Expr {
    /// Renders velocity symbols as `ẋk`; everything else as in `Display`.
    pub fn render(&self, chart: &Chart) -> String {
        let mut s = String::new();
        write_expr(&mut s, self, &|k| chart.var_name(k)).expect("string write");
        s
    }
}

type Namer<'a> = &'a dyn Fn(usize) -> String;

fn write_expr(out: &mut dyn Write, e: &Expr, name: Namer) -> fmt::Result {
    if e.is_zero() {
        return out.write_str("0");
    }
    for (i, (m, c)) in e.terms().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, false) => {}
            (0, true) => out.write_str("-")?,
            (_, false) => out.write_str(" + ")?,
            (_, true) => out.write_str(" - ")?,
        }
        let magnitude = c.abs();
        write_term(out, &magnitude, m, name, i == 0 && negative)?;
    }
    Ok(())
}

fn write_term(
    out: &mut dyn Write,
    magnitude: &super::Rational,
    m: &Monomial,
    name: Namer,
    leading_minus: bool,
) -> fmt::Result {
    let mut numer: Vec<String> = Vec::new();
    let mut denom: Vec<String> = Vec::new();
    let mut first_has_power = false;
    for (atom, p) in m.atoms() {
        let (text, p) = atom_text(atom, p, name);
        let target = if p < 0 { &mut denom } else { &mut numer };
        let q = p.abs();
        if target.is_empty() && p > 0 {
            first_has_power = q != 1;
        }
        if q == 1 {
            target.push(text);
        } else {
            target.push(format!("{text}^{q}"));
        }
    }
    // A leading unary minus would capture the first factor's power, so the
    // coefficient is kept explicit in that case.
    let show_coeff = !magnitude.is_one() || numer.is_empty() || (leading_minus && first_has_power);
    let mut parts: Vec<String> = Vec::new();
    if show_coeff {
        parts.push(magnitude.to_string());
    }
    parts.extend(numer);
    out.write_str(&parts.join("*"))?;
    for d in denom {
        write!(out, "/{d}")?;
    }
    Ok(())
}

/// Text for an atom and the power that should be attached to it.
/// `exp(kλ)` and `exp(u)` absorb their power into the argument.
fn atom_text(atom: &Atom, p: i32, name: Namer) -> (String, i32) {
    match atom {
        Atom::Var(k) => (name(*k), p),
        Atom::Lam => ("lam".into(), p),
        Atom::ExpLam => {
            let arg = match p {
                1 => "lam".to_string(),
                -1 => "-lam".to_string(),
                k => format!("{k}*lam"),
            };
            (format!("exp({arg})"), 1)
        }
        Atom::Exp(u) => (format!("exp({})", nested(u, name)), p),
        Atom::Sin(u) => (format!("sin({})", nested(u, name)), p),
        Atom::Cos(u) => (format!("cos({})", nested(u, name)), p),
    }
}

fn nested(e: &Expr, name: Namer) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, name).expect("string write");
    s
}
