//! Vector fields and differential forms with [`Expr`] coefficients.
//!
//! Forms are stored sparsely, keyed by strictly increasing index tuples.
//! The exterior derivative acts only on chart coordinates `0..4n`; velocity
//! symbols appearing in coefficients are treated as constants.
//!
//! Interior products contract the first slot:
//! `i_X(dx_{k1}∧…∧dx_{kp}) = Σ_m (−1)^{m−1} X^{k_m} dx_{k1}∧…^{k_m}…∧dx_{kp}`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chart::Chart;
use crate::structures::StructureEndo;
use crate::symexpr::{EvalError, Expr, Lambda};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: Chart, right: Chart },
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("basis index {index} out of range for {chart}")]
    IndexOutOfRange { index: usize, chart: Chart },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
}

fn same_chart(left: &Chart, right: &Chart) -> Result<(), FormError> {
    if left == right {
        Ok(())
    } else {
        Err(FormError::ChartMismatch {
            left: *left,
            right: *right,
        })
    }
}

/// `Σ_k X^k ∂/∂x_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Chart, components: Vec<Expr>) -> Result<Self, FormError> {
        if components.len() != chart.dim() {
            return Err(FormError::Arity {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        Ok(VectorField { chart, components })
    }

    pub fn zero(chart: Chart) -> Self {
        VectorField {
            chart,
            components: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate field `∂/∂x_k`.
    pub fn basis(chart: Chart, k: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.components[k] = Expr::one();
        v
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Expr {
        &self.components[k]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            chart: self.chart,
            components: self.components.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FormError> {
        same_chart(&self.chart, &other.chart)?;
        Ok(VectorField {
            chart: self.chart,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// The field acting as a derivation: `X(f) = Σ_k X^k ∂f/∂x_k`.
    pub fn derive(&self, f: &Expr, lambda: &Lambda) -> Expr {
        let mut out = Expr::zero();
        for (k, xk) in self.components.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            let d = f.diff(k, lambda);
            if !d.is_zero() {
                out += xk * &d;
            }
        }
        out
    }
}

/// Degree-`p` form `Σ_I ω_I dx_I` over strictly increasing tuples `I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialForm {
    chart: Chart,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl DifferentialForm {
    pub fn zero(chart: Chart, degree: usize) -> Self {
        DifferentialForm {
            chart,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: Chart, f: Expr) -> Self {
        let mut form = DifferentialForm::zero(chart, 0);
        form.add_term(Vec::new(), f);
        form
    }

    /// `dx_{k1} ∧ … ∧ dx_{kp}` for any order of indices; repeated indices
    /// give zero and unsorted ones pick up the permutation sign.
    pub fn basis(chart: Chart, indices: &[usize]) -> Result<Self, FormError> {
        if let Some(&index) = indices.iter().find(|&&k| k >= chart.dim()) {
            return Err(FormError::IndexOutOfRange { index, chart });
        }
        let mut form = DifferentialForm::zero(chart, indices.len());
        if let Some((sorted, sign)) = sort_with_sign(indices) {
            form.add_term(sorted, Expr::int(sign));
        }
        Ok(form)
    }

    /// `Σ_k c_k dx_k` from a list of `4n` coefficients.
    pub fn one_form(chart: Chart, coefficients: Vec<Expr>) -> Result<Self, FormError> {
        if coefficients.len() != chart.dim() {
            return Err(FormError::Arity {
                expected: chart.dim(),
                got: coefficients.len(),
            });
        }
        let mut form = DifferentialForm::zero(chart, 1);
        for (k, c) in coefficients.into_iter().enumerate() {
            form.add_term(vec![k], c);
        }
        Ok(form)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Coefficient of `dx_I` for a strictly increasing `I`.
    pub fn coefficient(&self, indices: &[usize]) -> Expr {
        self.terms.get(indices).cloned().unwrap_or_default()
    }

    /// Coefficients of a 1-form as a dense vector of length `4n`.
    pub fn one_form_coefficients(&self) -> Vec<Expr> {
        debug_assert_eq!(self.degree, 1);
        (0..self.chart.dim())
            .map(|k| self.coefficient(&[k]))
            .collect()
    }

    fn add_term(&mut self, key: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn scale(&self, f: &Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(self.chart, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm, FormError> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm, FormError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn neg(&self) -> DifferentialForm {
        self.scale(&Expr::int(-1))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(self.chart, self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    /// Numeric coefficients at a point (which may include velocity slots).
    pub fn eval(
        &self,
        point: &[f64],
        lambda: &Lambda,
    ) -> Result<BTreeMap<Vec<usize>, f64>, EvalError> {
        self.terms
            .iter()
            .map(|(k, c)| Ok((k.clone(), c.eval(point, lambda)?)))
            .collect()
    }
}

/// Sorts `indices`, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = indices.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// `α ∧ β`.
pub fn wedge(
    alpha: &DifferentialForm,
    beta: &DifferentialForm,
) -> Result<DifferentialForm, FormError> {
    same_chart(&alpha.chart, &beta.chart)?;
    let mut out = DifferentialForm::zero(alpha.chart, alpha.degree + beta.degree);
    for (i, a) in &alpha.terms {
        for (j, b) in &beta.terms {
            let joined: Vec<usize> = i.iter().chain(j).copied().collect();
            if let Some((sorted, sign)) = sort_with_sign(&joined) {
                out.add_term(sorted, (a * b).scale(&crate::symexpr::integer(sign)));
            }
        }
    }
    Ok(out)
}

/// Exterior derivative `dα`.
pub fn ext_d(alpha: &DifferentialForm, lambda: &Lambda) -> DifferentialForm {
    let chart = alpha.chart;
    let mut out = DifferentialForm::zero(chart, alpha.degree + 1);
    for (tuple, f) in &alpha.terms {
        for k in 0..chart.dim() {
            if tuple.binary_search(&k).is_ok() {
                continue;
            }
            let df = f.diff(k, lambda);
            if df.is_zero() {
                continue;
            }
            // dx_k ∧ dx_I: move dx_k past every index smaller than k.
            let before = tuple.iter().take_while(|&&i| i < k).count();
            let mut key = tuple.clone();
            key.insert(before, k);
            let df = if before % 2 == 1 { -df } else { df };
            out.add_term(key, df);
        }
    }
    out
}

/// Interior product `i_X α`, contracting the first slot.
pub fn interior(x: &VectorField, alpha: &DifferentialForm) -> Result<DifferentialForm, FormError> {
    same_chart(&x.chart, &alpha.chart)?;
    if alpha.degree == 0 {
        return Err(FormError::DegreeZero);
    }
    let mut out = DifferentialForm::zero(alpha.chart, alpha.degree - 1);
    for (tuple, f) in &alpha.terms {
        for (m, &k) in tuple.iter().enumerate() {
            let xk = &x.components[k];
            if xk.is_zero() {
                continue;
            }
            let mut key = tuple.clone();
            key.remove(m);
            let c = xk * f;
            out.add_term(key, if m % 2 == 1 { -c } else { c });
        }
    }
    Ok(out)
}

/// `W(X)`, the linear extension of the basis action of `W`.
pub fn apply_endo(w: &StructureEndo, x: &VectorField) -> Result<VectorField, FormError> {
    same_chart(&w.chart(), &x.chart)?;
    let mut out = VectorField::zero(x.chart);
    for (k, xk) in x.components.iter().enumerate() {
        if xk.is_zero() {
            continue;
        }
        let (target, weight) = w.image(k);
        out.components[target] += xk * &weight;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse_with_limit;

    fn chart() -> Chart {
        Chart::new(1).unwrap()
    }

    fn dx(idx: &[usize]) -> DifferentialForm {
        DifferentialForm::basis(chart(), idx).unwrap()
    }

    fn p(s: &str) -> Expr {
        parse_with_limit(s, 8).unwrap()
    }

    #[test]
    fn wedge_signs() {
        assert!(wedge(&dx(&[0]), &dx(&[0])).unwrap().is_zero());
        assert_eq!(wedge(&dx(&[1]), &dx(&[0])).unwrap(), dx(&[0, 1]).neg());
        let lhs = wedge(&dx(&[0]).scale(&p("x0")), &dx(&[1, 2])).unwrap();
        assert_eq!(lhs, dx(&[0, 1, 2]).scale(&p("x0")));
        assert_eq!(dx(&[2, 0, 1]), dx(&[0, 1, 2]));
        assert!(dx(&[1, 1]).is_zero());
    }

    #[test]
    fn exterior_derivative_examples() {
        let l = Lambda::zero();
        assert_eq!(
            ext_d(&DifferentialForm::scalar(chart(), p("x0")), &l),
            dx(&[0])
        );
        assert_eq!(ext_d(&dx(&[1]).scale(&p("x0")), &l), dx(&[0, 1]));
        assert_eq!(ext_d(&dx(&[0]).scale(&p("x1")), &l), dx(&[0, 1]).neg());
        let f = DifferentialForm::scalar(chart(), p("x0^2*x1"));
        assert!(ext_d(&ext_d(&f, &l), &l).is_zero());
    }

    #[test]
    fn interior_examples() {
        let e0 = VectorField::basis(chart(), 0);
        let e1 = VectorField::basis(chart(), 1);
        assert_eq!(interior(&e0, &dx(&[0, 1])).unwrap(), dx(&[1]));
        assert_eq!(interior(&e1, &dx(&[0, 1])).unwrap(), dx(&[0]).neg());
        let x = e0.scale(&p("x1"));
        assert_eq!(
            interior(&x, &dx(&[0, 1])).unwrap(),
            dx(&[1]).scale(&p("x1"))
        );
        assert_eq!(
            interior(&e0, &DifferentialForm::scalar(chart(), Expr::one())),
            Err(FormError::DegreeZero)
        );
    }

    #[test]
    fn chart_mismatch_reported() {
        let other = DifferentialForm::basis(Chart::new(2).unwrap(), &[0]).unwrap();
        assert!(matches!(
            wedge(&dx(&[0]), &other),
            Err(FormError::ChartMismatch { .. })
        ));
        assert!(DifferentialForm::basis(chart(), &[4]).is_err());
        assert!(VectorField::new(chart(), vec![Expr::zero(); 3]).is_err());
    }

    #[test]
    fn derivation_of_scalar() {
        let x =
            VectorField::new(chart(), vec![p("x4"), p("x5"), Expr::zero(), Expr::zero()]).unwrap();
        assert_eq!(x.derive(&p("x0*x1"), &Lambda::zero()), p("x1*x4 + x0*x5"));
    }
}
