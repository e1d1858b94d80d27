//! Lagrangian mechanics on the structured chart.
//!
//! Velocities are formal variables: the semispray component `X^k` is the
//! expression variable `4n + k`, the same symbol printed as `ẋk`. Exterior
//! derivatives only run over the `4n` chart coordinates, so these symbols
//! behave as constants under `d`.

use std::fmt;

use thiserror::Error;

use crate::chart::{Block, Chart};
use crate::exterior::{apply_endo, ext_d, interior, DifferentialForm, FormError, VectorField};
use crate::structures::{StructureEndo, StructureKind};
use crate::symexpr::{integer, Equivalence, Expr, Lambda, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanicsError {
    #[error("lagrangian uses x{index}, outside the {dim} chart coordinates")]
    OutsideChart { index: usize, dim: usize },
    #[error("lambda uses x{index}, outside the {dim} chart coordinates")]
    LambdaOutsideChart { index: usize, dim: usize },
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian {
    chart: Chart,
    expr: Expr,
}

impl Lagrangian {
    pub fn new(chart: Chart, expr: Expr) -> Result<Self, MechanicsError> {
        if let Some(index) = expr.max_var().filter(|&k| k >= chart.dim()) {
            return Err(MechanicsError::OutsideChart {
                index,
                dim: chart.dim(),
            });
        }
        Ok(Lagrangian { chart, expr })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

pub fn semispray(chart: Chart, components: Vec<Expr>) -> Result<VectorField, MechanicsError> {
    Ok(VectorField::new(chart, components)?)
}

/// `X = Σ ẋ_k ∂_k` with every component a formal velocity symbol.
pub fn formal_semispray(chart: Chart) -> VectorField {
    let components = (0..chart.dim())
        .map(|k| Expr::var(chart.velocity(k)))
        .collect();
    VectorField::new(chart, components).expect("arity matches chart")
}

/// `d_W L`, defined by `(d_W L)(Y) = dL(W Y)`.
pub fn vertical_differential(
    l: &Lagrangian,
    w: &StructureEndo,
) -> Result<DifferentialForm, MechanicsError> {
    check_chart(l, w)?;
    let coefficients = (0..l.chart.dim())
        .map(|j| {
            let (t, weight) = w.image(j);
            &weight * &l.expr.diff(t, w.lambda())
        })
        .collect();
    Ok(DifferentialForm::one_form(l.chart, coefficients)?)
}

pub fn liouville_field(x: &VectorField, w: &StructureEndo) -> Result<VectorField, MechanicsError> {
    Ok(apply_endo(w, x)?)
}

/// `Φ_L = −d d_W L`.
pub fn presymplectic(
    l: &Lagrangian,
    w: &StructureEndo,
) -> Result<DifferentialForm, MechanicsError> {
    let theta = vertical_differential(l, w)?;
    Ok(ext_d(&theta, w.lambda()).neg())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyExpr {
    pub expr: Expr,
    /// Expression variables carrying the semispray components.
    pub velocity_vars: Vec<usize>,
}

impl EnergyExpr {
    pub fn is_affine(&self) -> bool {
        self.velocity_vars
            .iter()
            .all(|&v| self.expr.degree_in(&[v]) <= 1)
    }

    /// Evaluates at the joint point `[x, ẋ]` of length `8n`.
    pub fn eval(&self, point: &[f64], lambda: &Lambda) -> Result<f64, crate::symexpr::EvalError> {
        self.expr.eval(point, lambda)
    }
}

/// `E_L = V(L) − L` with `V = W(X)`.
pub fn energy(
    l: &Lagrangian,
    x: &VectorField,
    w: &StructureEndo,
) -> Result<EnergyExpr, MechanicsError> {
    check_chart(l, w)?;
    let v = liouville_field(x, w)?;
    let expr = &v.derive(&l.expr, w.lambda()) - &l.expr;
    let mut velocity_vars: Vec<usize> = (0..l.chart.dim())
        .map(|k| l.chart.velocity(k))
        .filter(|&var| x.components().iter().any(|c| c.depends_on(var)))
        .collect();
    velocity_vars.dedup();
    Ok(EnergyExpr {
        expr,
        velocity_vars,
    })
}

/// `i_X Φ_L − dE_L`.
pub fn dynamical_residual(
    l: &Lagrangian,
    x: &VectorField,
    w: &StructureEndo,
) -> Result<DifferentialForm, MechanicsError> {
    let phi = presymplectic(l, w)?;
    let e = energy(l, x, w)?;
    let lhs = interior(x, &phi)?;
    let rhs = ext_d(&DifferentialForm::scalar(l.chart, e.expr), w.lambda());
    Ok(lhs.sub(&rhs)?)
}

fn check_chart(l: &Lagrangian, w: &StructureEndo) -> Result<(), MechanicsError> {
    if l.chart != w.chart() {
        return Err(FormError::ChartMismatch {
            left: l.chart,
            right: w.chart(),
        }
        .into());
    }
    let dim = l.chart.dim();
    if let Some(index) = w.lambda().expr().max_var().filter(|&k| k >= dim) {
        return Err(MechanicsError::LambdaOutsideChart { index, dim });
    }
    Ok(())
}

/// One row of a closed-form family:
/// `c ∂/∂t(e^{±λ} ∂L/∂x_m) ± ∂L/∂x_f = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct FamilyRow {
    exp_lambda: i32,
    momentum: Block,
    forcing_sign: i64,
    forcing: Block,
}

const fn row(exp_lambda: i32, momentum: Block, forcing_sign: i64, forcing: Block) -> FamilyRow {
    FamilyRow {
        exp_lambda,
        momentum,
        forcing_sign,
        forcing,
    }
}

fn family(kind: StructureKind) -> [FamilyRow; 4] {
    use Block::*;
    match kind {
        StructureKind::F => [
            row(-1, X, 1, Xn),
            row(1, Xn, -1, X),
            row(-1, X2n, 1, X3n),
            row(1, X3n, -1, X2n),
        ],
        StructureKind::G => [
            row(-1, X, 1, X2n),
            row(-1, Xn, -1, X3n),
            row(1, X2n, 1, X),
            row(1, X3n, -1, Xn),
        ],
        StructureKind::H => [
            row(-1, X, 1, X3n),
            row(-1, Xn, 1, X2n),
            row(1, X2n, 1, Xn),
            row(1, X3n, 1, X),
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationRecord {
    /// `a`, `b` or `ab`.
    pub coefficient: Rational,
    pub momentum_exp: i32,
    pub momentum_index: usize,
    /// `e^{±λ} ∂L/∂x_m`
    pub momentum: Expr,
    pub forcing_sign: i64,
    pub forcing_index: usize,
    /// `±∂L/∂x_f`
    pub forcing: Expr,
    /// `c Σ_j ẋ_j ∂_j(momentum)`
    pub momentum_rate: Expr,
}

impl EquationRecord {
    /// The left side with the time derivative expanded along the curve.
    pub fn expanded(&self) -> Expr {
        &self.momentum_rate + &self.forcing
    }

    /// The equation before substituting `L`.
    pub fn template(&self, kind: StructureKind) -> String {
        let weight = if self.momentum_exp < 0 {
            "exp(-lam)"
        } else {
            "exp(lam)"
        };
        let sign = if self.forcing_sign < 0 { '-' } else { '+' };
        format!(
            "{}*d/dt({weight}*dL/dx{}) {sign} dL/dx{} = 0",
            kind.parameter_name(),
            self.momentum_index,
            self.forcing_index
        )
    }

    /// `momentum-rate ± forcing = 0` with velocities printed as `ẋk`.
    pub fn render(&self, chart: &Chart) -> String {
        format!(
            "{} = 0",
            join_sum(&self.momentum_rate, &self.forcing, chart)
        )
    }
}

fn join_sum(left: &Expr, right: &Expr, chart: &Chart) -> String {
    if right.is_zero() {
        return left.render(chart);
    }
    if left.is_zero() {
        return right.render(chart);
    }
    let lhs = left.render(chart);
    let leading_negative = right
        .terms()
        .next()
        .is_some_and(|(_, c)| c < &Rational::from_integer(0.into()));
    match (leading_negative, right.len()) {
        (false, _) => format!("{lhs} + {}", right.render(chart)),
        (true, 1) => format!("{lhs} - {}", (-right).render(chart)),
        (true, _) => format!("{lhs} - ({})", (-right).render(chart)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheckItem {
    pub equation: usize,
    pub forcing_index: usize,
    /// Closed-form left side multiplied by its forcing sign.
    pub closed_form: Expr,
    /// Residual coefficient at `dx_f`.
    pub pipeline: Expr,
    pub status: Equivalence,
}

impl CrossCheckItem {
    pub fn matches(&self) -> bool {
        self.status != Equivalence::Different
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ELSystem {
    pub kind: StructureKind,
    pub a: Rational,
    pub b: Rational,
    pub lambda: Lambda,
    pub chart: Chart,
    pub lagrangian: Lagrangian,
    /// Closed-form equations, row `r·n + i` for family row `r` and block
    /// offset `i`.
    pub equations: Vec<EquationRecord>,
    /// `i_X Φ − dE` with `X^k = ẋ_k`.
    pub residual: DifferentialForm,
    pub cross_check: Vec<CrossCheckItem>,
}

impl ELSystem {
    /// Coefficients of the residual 1-form, one scalar equation per `dx_k`.
    pub fn pipeline_equations(&self) -> Vec<Expr> {
        self.residual.one_form_coefficients()
    }

    pub fn agrees(&self) -> bool {
        self.cross_check.iter().all(CrossCheckItem::matches)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lagrangian.expr.is_zero()
    }

    /// Records for block offset `i`, in family order.
    pub fn equations_for(&self, i: usize) -> impl Iterator<Item = &EquationRecord> {
        let n = self.chart.n();
        (0..4).map(move |r| &self.equations[r * n + i])
    }
}

impl fmt::Display for ELSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for eq in &self.equations {
            writeln!(f, "{}", eq.render(&self.chart))?;
        }
        Ok(())
    }
}

/// Builds the closed-form family for `w.kind()` and the residual system, and
/// cross-checks them equation by equation.
pub fn derive_el(l: &Lagrangian, w: &StructureEndo) -> Result<ELSystem, MechanicsError> {
    check_chart(l, w)?;
    let chart = l.chart;
    let n = chart.n();
    let lambda = w.lambda();
    let coefficient = w.kind().parameter(w.a(), w.b());
    let x = formal_semispray(chart);

    let mut equations = Vec::with_capacity(chart.dim());
    for r in family(w.kind()) {
        for i in 0..n {
            let m = chart.index(r.momentum, i);
            let f = chart.index(r.forcing, i);
            let momentum = &lambda.weight(r.exp_lambda) * &l.expr.diff(m, lambda);
            let momentum_rate = x.derive(&momentum, lambda).scale(&coefficient);
            let forcing = l.expr.diff(f, lambda).scale(&integer(r.forcing_sign));
            equations.push(EquationRecord {
                coefficient: coefficient.clone(),
                momentum_exp: r.exp_lambda,
                momentum_index: m,
                momentum,
                forcing_sign: r.forcing_sign,
                forcing_index: f,
                forcing,
                momentum_rate,
            });
        }
    }

    let residual = dynamical_residual(l, &x, w)?;
    let pipeline = residual.one_form_coefficients();
    let cross_check = equations
        .iter()
        .enumerate()
        .map(|(e, eq)| {
            let closed_form = eq.expanded().scale(&integer(eq.forcing_sign));
            let pipeline = pipeline[eq.forcing_index].clone();
            let status = closed_form.equivalence(&pipeline, lambda, 2 * chart.dim());
            CrossCheckItem {
                equation: e,
                forcing_index: eq.forcing_index,
                closed_form,
                pipeline,
                status,
            }
        })
        .collect();

    Ok(ELSystem {
        kind: w.kind(),
        a: w.a().clone(),
        b: w.b().clone(),
        lambda: lambda.clone(),
        chart,
        lagrangian: l.clone(),
        equations,
        residual,
        cross_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::build_structure;
    use crate::symexpr::parse_with_limit;

    fn c1() -> Chart {
        Chart::new(1).unwrap()
    }

    fn p(s: &str) -> Expr {
        parse_with_limit(s, 8).unwrap()
    }

    fn lag(s: &str) -> Lagrangian {
        Lagrangian::new(c1(), p(s)).unwrap()
    }

    fn endo(kind: StructureKind, a: i64, b: i64, lam: &str) -> StructureEndo {
        build_structure(
            kind,
            integer(a),
            integer(b),
            Lambda::new(p(lam)).unwrap(),
            c1(),
        )
        .unwrap()
    }

    fn dx(k: usize) -> DifferentialForm {
        DifferentialForm::basis(c1(), &[k]).unwrap()
    }

    #[test]
    fn lagrangian_rejects_velocities() {
        assert!(Lagrangian::new(c1(), p("x4")).is_err());
    }

    #[test]
    fn semispray_examples() {
        assert!(semispray(c1(), vec![Expr::zero(); 4]).unwrap().is_zero());
        assert_eq!(
            semispray(
                c1(),
                vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()]
            )
            .unwrap(),
            VectorField::basis(c1(), 0)
        );
        assert!(semispray(c1(), vec![Expr::zero(); 3]).is_err());
        assert_eq!(formal_semispray(c1()).component(2), &Expr::var(6));
    }

    #[test]
    fn vertical_differential_examples() {
        let f = endo(StructureKind::F, 1, -1, "0");
        assert_eq!(
            vertical_differential(&lag("x0^2"), &f).unwrap(),
            dx(1).scale(&p("0-2*x0"))
        );
        assert!(vertical_differential(&lag("7"), &f).unwrap().is_zero());
        let f = endo(StructureKind::F, 1, -1, "x0");
        assert_eq!(
            vertical_differential(&lag("x1"), &f).unwrap(),
            dx(0).scale(&p("exp(lam)"))
        );
    }

    #[test]
    fn liouville_examples() {
        let f = endo(StructureKind::F, 1, -1, "0");
        assert_eq!(
            liouville_field(&VectorField::basis(c1(), 0), &f).unwrap(),
            VectorField::basis(c1(), 1)
        );
        assert!(liouville_field(&VectorField::zero(c1()), &f)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn presymplectic_example() {
        let f = endo(StructureKind::F, 1, -1, "0");
        let phi = presymplectic(&lag("x0^2"), &f).unwrap();
        assert_eq!(
            phi,
            DifferentialForm::basis(c1(), &[0, 1])
                .unwrap()
                .scale(&Expr::int(2))
        );
    }

    #[test]
    fn energy_example() {
        let f = endo(StructureKind::F, 1, -1, "0");
        let l = lag("0.5*(x0^2 + x1^2 + x2^2 + x3^2)");
        let x = semispray(
            c1(),
            vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()],
        )
        .unwrap();
        let e = energy(&l, &x, &f).unwrap();
        assert_eq!(e.expr, &p("x1") - l.expr());
        let v = e.eval(&[1.0, 2.0, 0.0, 0.0], &Lambda::zero()).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        let e = energy(&l, &formal_semispray(c1()), &f).unwrap();
        assert!(e.is_affine());
        assert_eq!(e.velocity_vars, vec![4, 5, 6, 7]);
        assert_eq!(
            energy(&l, &VectorField::zero(c1()), &f).unwrap().expr,
            -l.expr().clone()
        );
    }

    #[test]
    fn residual_example() {
        let f = endo(StructureKind::F, 1, -1, "0");
        let r = dynamical_residual(&lag("x0^2"), &formal_semispray(c1()), &f).unwrap();
        let expect = dx(1)
            .scale(&p("2*x4"))
            .add(&dx(0).scale(&p("2*x0")))
            .unwrap();
        assert_eq!(r, expect);
        assert!(dynamical_residual(&lag("3"), &formal_semispray(c1()), &f)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn harmonic_family_f() {
        let f = endo(StructureKind::F, 1, -1, "0");
        let sys = derive_el(&lag("0.5*(x0^2+x1^2+x2^2+x3^2)"), &f).unwrap();
        let lines: Vec<String> = sys.equations.iter().map(|e| e.render(&c1())).collect();
        assert_eq!(
            lines,
            ["ẋ0 + x1 = 0", "ẋ1 - x0 = 0", "ẋ2 + x3 = 0", "ẋ3 - x2 = 0"]
        );
        assert!(sys.agrees());
        assert_eq!(
            sys.equations[0].template(StructureKind::F),
            "a*d/dt(exp(-lam)*dL/dx0) + dL/dx1 = 0"
        );
    }

    #[test]
    fn family_h_example() {
        let h = endo(StructureKind::H, 1, 1, "0");
        let sys = derive_el(&lag("x0^2"), &h).unwrap();
        // ab·Σ ẋ_j ∂_j(2x0) + ∂L/∂x3 = 2ẋ0
        assert_eq!(sys.equations[0].expanded(), p("2*x4"));
        assert_eq!(sys.equations[0].forcing_index, 3);
    }

    #[test]
    fn family_blocks_g() {
        let g = endo(StructureKind::G, 1, 3, "0");
        let sys = derive_el(&lag("x0*x2"), &g).unwrap();
        let pairs: Vec<(usize, usize)> = sys
            .equations
            .iter()
            .map(|e| (e.momentum_index, e.forcing_index))
            .collect();
        assert_eq!(pairs, [(0, 2), (1, 3), (2, 0), (3, 1)]);
        assert!(sys.equations.iter().all(|e| e.coefficient == integer(3)));
    }

    #[test]
    fn conformal_families_cross_check() {
        for kind in StructureKind::ALL {
            let w = endo(kind, 2, -3, "x0 + x2");
            let sys = derive_el(&lag("x0^2*x1 + x2*x3 + x3^2"), &w).unwrap();
            assert!(sys.agrees(), "{kind}: {:?}", sys.cross_check);
        }
    }

    #[test]
    fn degenerate_lagrangian() {
        let f = endo(StructureKind::F, 1, -1, "0");
        let sys = derive_el(&lag("0"), &f).unwrap();
        assert!(sys.is_degenerate());
        assert!(sys.equations.iter().all(|e| e.render(&c1()) == "0 = 0"));
    }
}
