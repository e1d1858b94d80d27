//! The generalized-quaternionic endomorphisms `W_F`, `W_G`, `W_H` with
//! parameters `(a, b)` and conformal factor `e^{±λ}`.
//!
//! Basis actions, with `i` ranging over a block:
//!
//! ```text
//! W_F: ∂_i → a e^λ ∂_{n+i}     ∂_{n+i} → −a e^{−λ} ∂_i
//!      ∂_{2n+i} → a e^λ ∂_{3n+i}   ∂_{3n+i} → −a e^{−λ} ∂_{2n+i}
//! W_G: ∂_i → −b e^λ ∂_{2n+i}   ∂_{n+i} → b e^λ ∂_{3n+i}
//!      ∂_{2n+i} → −b e^{−λ} ∂_i    ∂_{3n+i} → b e^{−λ} ∂_{n+i}
//! W_H: ∂_i → −ab e^λ ∂_{3n+i}  ∂_{n+i} → −ab e^λ ∂_{2n+i}
//!      ∂_{2n+i} → −ab e^{−λ} ∂_{n+i}  ∂_{3n+i} → −ab e^{−λ} ∂_i
//! ```
//!
//! With `λ ≡ 0` the exponential weights drop out. The quaternionic relations
//! `F² = −aI, G² = −bI, H² = −abI, FG = H, GH = bF, HF = aG` are checked by
//! composing these actions, not assumed: for general `(a, b)` or nonzero λ
//! several of them fail and the report carries the discrepancy.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::chart::{Block, Chart};
use crate::exterior::{ext_d, DifferentialForm};
use crate::symexpr::{integer, rational, Expr, Lambda, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("parameter {0} must be nonzero")]
    ZeroParameter(&'static str),
    #[error("metric compatibility is not defined for conformal actions (lambda = {0})")]
    ConformalCompatibility(String),
    #[error("metric needs {expected} entries, got {got}")]
    MetricArity { expected: usize, got: usize },
    #[error("metric entries must be +1 or -1, got {0}")]
    MetricEntry(i64),
    #[error("metric signature must be constant on each block")]
    MetricNotBlockConstant,
    #[error("structure and metric live on different charts")]
    ChartMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureKind {
    F,
    G,
    H,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [StructureKind::F, StructureKind::G, StructureKind::H];

    /// Basis-action row for a source block: target block, sign, which
    /// parameter product scales it, and the exponent of `e^λ`.
    fn row(self, source: Block) -> (Block, i64, Param, i32) {
        use Block::*;
        use StructureKind::*;
        match (self, source) {
            (F, X) => (Xn, 1, Param::A, 1),
            (F, Xn) => (X, -1, Param::A, -1),
            (F, X2n) => (X3n, 1, Param::A, 1),
            (F, X3n) => (X2n, -1, Param::A, -1),
            (G, X) => (X2n, -1, Param::B, 1),
            (G, Xn) => (X3n, 1, Param::B, 1),
            (G, X2n) => (X, -1, Param::B, -1),
            (G, X3n) => (Xn, 1, Param::B, -1),
            (H, X) => (X3n, -1, Param::Ab, 1),
            (H, Xn) => (X2n, -1, Param::Ab, 1),
            (H, X2n) => (Xn, -1, Param::Ab, -1),
            (H, X3n) => (X, -1, Param::Ab, -1),
        }
    }

    /// The scalar `a`, `b` or `ab` attached to this kind.
    pub fn parameter(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            StructureKind::F => a.clone(),
            StructureKind::G => b.clone(),
            StructureKind::H => a * b,
        }
    }

    pub fn parameter_name(self) -> &'static str {
        match self {
            StructureKind::F => "a",
            StructureKind::G => "b",
            StructureKind::H => "ab",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureKind::F => "F",
            StructureKind::G => "G",
            StructureKind::H => "H",
        })
    }
}

impl std::str::FromStr for StructureKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "F" | "f" => Ok(StructureKind::F),
            "G" | "g" => Ok(StructureKind::G),
            "H" | "h" => Ok(StructureKind::H),
            other => Err(format!("unknown structure '{other}' (expected F, G or H)")),
        }
    }
}

#[derive(Clone, Copy)]
enum Param {
    A,
    B,
    Ab,
}

/// Image of one basis vector: `∂_k ↦ factor · e^{exp_lambda·λ} ∂_target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisImage {
    pub target: usize,
    pub factor: Rational,
    pub exp_lambda: i32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureEndo {
    kind: StructureKind,
    a: Rational,
    b: Rational,
    lambda: Lambda,
    chart: Chart,
    images: Vec<BasisImage>,
}

pub fn build_structure(
    kind: StructureKind,
    a: Rational,
    b: Rational,
    lambda: Lambda,
    chart: Chart,
) -> Result<StructureEndo, StructureError> {
    if a.is_zero() {
        return Err(StructureError::ZeroParameter("a"));
    }
    if b.is_zero() {
        return Err(StructureError::ZeroParameter("b"));
    }
    let images = (0..chart.dim())
        .map(|k| {
            let (target_block, sign, param, exp_lambda) = kind.row(chart.block(k));
            let scale = match param {
                Param::A => a.clone(),
                Param::B => b.clone(),
                Param::Ab => &a * &b,
            };
            BasisImage {
                target: chart.index(target_block, chart.within(k)),
                factor: scale * integer(sign),
                exp_lambda,
            }
        })
        .collect();
    Ok(StructureEndo {
        kind,
        a,
        b,
        lambda,
        chart,
        images,
    })
}

impl StructureEndo {
    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn images(&self) -> &[BasisImage] {
        &self.images
    }

    /// `(target, weight)` with `W ∂_k = weight · ∂_target`.
    pub fn image(&self, k: usize) -> (usize, Expr) {
        let img = &self.images[k];
        (
            img.target,
            self.lambda.weight(img.exp_lambda).scale(&img.factor),
        )
    }

    pub fn as_map(&self) -> LinearMap {
        let columns = (0..self.chart.dim())
            .map(|k| {
                let (t, w) = self.image(k);
                BTreeMap::from([(t, w)])
            })
            .collect();
        LinearMap {
            chart: self.chart,
            columns,
        }
    }

    /// One line per basis vector, e.g. `W_F(∂0) = exp(lam)*∂1`.
    pub fn describe(&self) -> Vec<String> {
        (0..self.chart.dim())
            .map(|k| {
                let (t, w) = self.image(k);
                format!("W_{}(∂{k}) = {}*∂{t}", self.kind, paren(&w))
            })
            .collect()
    }
}

fn paren(e: &Expr) -> String {
    if e.len() > 1 {
        format!("({e})")
    } else {
        e.to_string()
    }
}

/// An endomorphism of the tangent space as sparse columns:
/// `M ∂_k = Σ_t columns[k][t] ∂_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    chart: Chart,
    columns: Vec<BTreeMap<usize, Expr>>,
}

impl LinearMap {
    pub fn identity(chart: Chart) -> Self {
        LinearMap::scalar(chart, Expr::one())
    }

    pub fn scalar(chart: Chart, c: Expr) -> Self {
        LinearMap {
            chart,
            columns: (0..chart.dim())
                .map(|k| {
                    let mut col = BTreeMap::new();
                    if !c.is_zero() {
                        col.insert(k, c.clone());
                    }
                    col
                })
                .collect(),
        }
    }

    pub fn column(&self, k: usize) -> &BTreeMap<usize, Expr> {
        &self.columns[k]
    }

    pub fn scale(&self, c: &Expr) -> LinearMap {
        LinearMap {
            chart: self.chart,
            columns: self
                .columns
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|(&t, e)| (t, e * c))
                        .filter(|(_, e)| !e.is_zero())
                        .collect()
                })
                .collect(),
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        let columns = inner
            .columns
            .iter()
            .map(|col| {
                let mut out: BTreeMap<usize, Expr> = BTreeMap::new();
                for (&mid, w) in col {
                    for (&t, v) in &self.columns[mid] {
                        *out.entry(t).or_default() += w * v;
                    }
                }
                out.retain(|_, e| !e.is_zero());
                out
            })
            .collect();
        LinearMap {
            chart: self.chart,
            columns,
        }
    }
}

/// The six algebraic identities of a generalized quaternionic structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    FSquared,
    GSquared,
    HSquared,
    FG,
    GH,
    HF,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::FSquared,
        Relation::GSquared,
        Relation::HSquared,
        Relation::FG,
        Relation::GH,
        Relation::HF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::FSquared => "F^2",
            Relation::GSquared => "G^2",
            Relation::HSquared => "H^2",
            Relation::FG => "FG",
            Relation::GH => "GH",
            Relation::HF => "HF",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Relation::FSquared => "f_squared",
            Relation::GSquared => "g_squared",
            Relation::HSquared => "h_squared",
            Relation::FG => "fg",
            Relation::GH => "gh",
            Relation::HF => "hf",
        }
    }

    /// The claimed right-hand side, symbolically.
    pub fn claim(self) -> &'static str {
        match self {
            Relation::FSquared => "-a*I",
            Relation::GSquared => "-b*I",
            Relation::HSquared => "-ab*I",
            Relation::FG => "H",
            Relation::GH => "b*F",
            Relation::HF => "a*G",
        }
    }

    /// Name of the operator on the right-hand side (`I`, `F`, `G`, `H`).
    fn rhs_operator(self) -> &'static str {
        match self {
            Relation::FSquared | Relation::GSquared | Relation::HSquared => "I",
            Relation::FG => "H",
            Relation::GH => "F",
            Relation::HF => "G",
        }
    }
}

/// How the composed left side differs from the claimed right side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Discrepancy {
    /// `LHS = factor · RHS` on every basis vector.
    Uniform { factor: Expr },
    /// Per basis vector `k`, the factor with `LHS ∂_k = factor · RHS ∂_k`,
    /// or `None` where the two are not proportional.
    PerBasis { factors: Vec<Option<Expr>> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub relation: Relation,
    pub holds: bool,
    /// Scalar multiplying the right-hand operator in the claim.
    pub required_scalar: Expr,
    pub discrepancy: Option<Discrepancy>,
}

impl RelationCheck {
    pub fn status(&self) -> &'static str {
        if self.holds {
            "holds"
        } else {
            "fails"
        }
    }

    /// Human-readable description of the actual composition.
    pub fn actual(&self) -> String {
        let op = self.relation.rhs_operator();
        match &self.discrepancy {
            None => format!("{}*{op}", paren(&self.required_scalar)),
            Some(Discrepancy::Uniform { factor }) => {
                format!("{}*{op}", paren(&(factor * &self.required_scalar)))
            }
            Some(Discrepancy::PerBasis { factors }) => {
                let parts: Vec<String> = factors
                    .iter()
                    .enumerate()
                    .map(|(k, f)| match f {
                        Some(f) => format!("∂{k}: {}", f),
                        None => format!("∂{k}: not proportional"),
                    })
                    .collect();
                format!(
                    "diag[{}]·{}*{op}",
                    parts.join(", "),
                    paren(&self.required_scalar)
                )
            }
        }
    }

    pub fn factor_text(&self) -> String {
        match &self.discrepancy {
            None => "1".into(),
            Some(Discrepancy::Uniform { factor }) => factor.to_string(),
            Some(Discrepancy::PerBasis { .. }) => "per-basis".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub a: Rational,
    pub b: Rational,
    pub lambda: Lambda,
    pub chart: Chart,
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, relation: Relation) -> &RelationCheck {
        self.checks
            .iter()
            .find(|c| c.relation == relation)
            .expect("every relation is reported")
    }

    /// One line per identity: name, status, actual composition.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let claim = format!("{} = {}", c.relation.name(), c.relation.claim());
            if c.holds {
                out.push_str(&format!("{claim:<14} holds\n"));
            } else {
                out.push_str(&format!(
                    "{claim:<14} fails  actual {} = {}  (required {}*{})\n",
                    c.relation.name(),
                    c.actual(),
                    paren(&c.required_scalar),
                    c.relation.rhs_operator()
                ));
            }
        }
        out
    }

    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = Vec::new();
        for c in &self.checks {
            let key = c.relation.key();
            kv.push((format!("relation.{key}.status"), c.status().to_string()));
            kv.push((format!("relation.{key}.factor"), c.factor_text()));
            kv.push((format!("relation.{key}.actual"), c.actual()));
        }
        kv
    }
}

/// Composes the structure endomorphisms on every basis vector and compares
/// against the six quaternionic identities.
pub fn verify_relations(
    a: &Rational,
    b: &Rational,
    lambda: &Lambda,
    chart: Chart,
) -> Result<RelationReport, StructureError> {
    let build = |kind| build_structure(kind, a.clone(), b.clone(), lambda.clone(), chart);
    let f = build(StructureKind::F)?.as_map();
    let g = build(StructureKind::G)?.as_map();
    let h = build(StructureKind::H)?.as_map();
    let id = LinearMap::identity(chart);
    let ab = a * b;
    let cases: [(Relation, LinearMap, Rational, &LinearMap); 6] = [
        (Relation::FSquared, f.compose(&f), -a.clone(), &id),
        (Relation::GSquared, g.compose(&g), -b.clone(), &id),
        (Relation::HSquared, h.compose(&h), -ab, &id),
        (Relation::FG, f.compose(&g), Rational::one(), &h),
        (Relation::GH, g.compose(&h), b.clone(), &f),
        (Relation::HF, h.compose(&f), a.clone(), &g),
    ];
    let checks = cases
        .into_iter()
        .map(|(relation, lhs, scalar, op)| {
            let required_scalar = Expr::constant(scalar);
            let rhs = op.scale(&required_scalar);
            compare(relation, &lhs, &rhs, required_scalar)
        })
        .collect();
    Ok(RelationReport {
        a: a.clone(),
        b: b.clone(),
        lambda: lambda.clone(),
        chart,
        checks,
    })
}

fn compare(
    relation: Relation,
    lhs: &LinearMap,
    rhs: &LinearMap,
    required_scalar: Expr,
) -> RelationCheck {
    if lhs == rhs {
        return RelationCheck {
            relation,
            holds: true,
            required_scalar,
            discrepancy: None,
        };
    }
    let factors: Vec<Option<Expr>> = lhs
        .columns
        .iter()
        .zip(&rhs.columns)
        .map(|(l, r)| column_ratio(l, r))
        .collect();
    let uniform = factors
        .first()
        .cloned()
        .flatten()
        .filter(|first| factors.iter().all(|f| f.as_ref() == Some(first)));
    let discrepancy = match uniform {
        Some(factor) => Discrepancy::Uniform { factor },
        None => Discrepancy::PerBasis { factors },
    };
    RelationCheck {
        relation,
        holds: false,
        required_scalar,
        discrepancy: Some(discrepancy),
    }
}

/// `s` with `lhs = s · rhs` entrywise, when such a single `s` exists.
fn column_ratio(lhs: &BTreeMap<usize, Expr>, rhs: &BTreeMap<usize, Expr>) -> Option<Expr> {
    if lhs.len() != rhs.len() || lhs.keys().ne(rhs.keys()) || lhs.is_empty() {
        return None;
    }
    let mut ratio: Option<Expr> = None;
    for (t, l) in lhs {
        let s = l.div(&rhs[t]).ok()?;
        match &ratio {
            Some(r) if *r != s => return None,
            _ => ratio = Some(s),
        }
    }
    ratio
}

/// Diagonal metric with entries `±1`, constant on each block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    chart: Chart,
    signature: Vec<i8>,
}

impl Metric {
    pub fn new(chart: Chart, signature: Vec<i64>) -> Result<Self, StructureError> {
        if signature.len() != chart.dim() {
            return Err(StructureError::MetricArity {
                expected: chart.dim(),
                got: signature.len(),
            });
        }
        if let Some(&bad) = signature.iter().find(|&&s| s != 1 && s != -1) {
            return Err(StructureError::MetricEntry(bad));
        }
        let constant =
            (0..chart.dim()).all(|k| signature[k] == signature[chart.index(chart.block(k), 0)]);
        if !constant {
            return Err(StructureError::MetricNotBlockConstant);
        }
        Ok(Metric {
            chart,
            signature: signature.into_iter().map(|s| s as i8).collect(),
        })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    /// `g(∂_j, ∂_k)`.
    pub fn entry(&self, j: usize, k: usize) -> i64 {
        if j == k {
            self.signature[j] as i64
        } else {
            0
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .signature
            .iter()
            .map(|&s| if s > 0 { "+1" } else { "-1" })
            .collect();
        write!(f, "diag({})", parts.join(", "))
    }
}

/// Neutral signature: `+1` on the blocks `x_i`, `x_{n+i}` and `−1` on
/// `x_{2n+i}`, `x_{3n+i}`.
pub fn default_metric(chart: Chart) -> Metric {
    let signature = (0..chart.dim())
        .map(|k| match chart.block(k) {
            Block::X | Block::Xn => 1,
            Block::X2n | Block::X3n => -1,
        })
        .collect();
    Metric { chart, signature }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck {
    pub j: usize,
    pub k: usize,
    /// `g(W∂_j, W∂_k)`
    pub lhs: Expr,
    /// `c · g(∂_j, ∂_k)` with `c` the kind's parameter.
    pub rhs: Expr,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub kind: StructureKind,
    pub pairs: Vec<PairCheck>,
}

impl CompatibilityReport {
    pub fn all_hold(&self) -> bool {
        self.pairs.iter().all(|p| p.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairCheck> {
        self.pairs.iter().filter(|p| !p.holds)
    }
}

/// Checks `g(WX, WY) = c·g(X, Y)` on all basis pairs, `c ∈ {a, b, ab}`.
/// Only defined for the non-conformal actions.
pub fn check_compatibility(
    w: &StructureEndo,
    g: &Metric,
) -> Result<CompatibilityReport, StructureError> {
    if !w.lambda.is_zero() {
        return Err(StructureError::ConformalCompatibility(
            w.lambda.expr().to_string(),
        ));
    }
    if w.chart != g.chart {
        return Err(StructureError::ChartMismatch);
    }
    let c = w.kind.parameter(&w.a, &w.b);
    let dim = w.chart.dim();
    let mut pairs = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        let (tj, wj) = w.image(j);
        for k in 0..dim {
            let (tk, wk) = w.image(k);
            let lhs = (&wj * &wk).scale(&integer(g.entry(tj, tk)));
            let rhs = Expr::constant(&c * integer(g.entry(j, k)));
            let holds = lhs == rhs;
            pairs.push(PairCheck {
                j,
                k,
                lhs,
                rhs,
                holds,
            });
        }
    }
    Ok(CompatibilityReport {
        kind: w.kind,
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KahlerForm {
    /// Skew part of `Q(X, Y) = g(X, W Y)` as a 2-form.
    pub form: DifferentialForm,
    /// Whether `Q(∂_j, ∂_k)` was already antisymmetric.
    pub skew: bool,
    /// `dQ ≡ 0`.
    pub closed: bool,
}

/// Assembles `Q(∂_j, ∂_k) = g(∂_j, W∂_k)` into a 2-form and tests `dQ = 0`.
pub fn kahler_form(g: &Metric, w: &StructureEndo) -> Result<KahlerForm, StructureError> {
    if w.chart != g.chart {
        return Err(StructureError::ChartMismatch);
    }
    let dim = w.chart.dim();
    let q = |j: usize, k: usize| -> Expr {
        let (t, weight) = w.image(k);
        weight.scale(&integer(g.entry(j, t)))
    };
    let half = rational(1, 2);
    let mut form = DifferentialForm::zero(w.chart, 2);
    let mut skew = true;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let qjk = q(j, k);
            let qkj = q(k, j);
            if qjk != -&qkj {
                skew = false;
            }
            let coeff = (&qjk - &qkj).scale(&half);
            if !coeff.is_zero() {
                let basis = DifferentialForm::basis(w.chart, &[j, k]).expect("indices in range");
                form = form.add(&basis.scale(&coeff)).expect("same chart");
            }
        }
        if !q(j, j).is_zero() {
            skew = false;
        }
    }
    let closed = ext_d(&form, &w.lambda).is_zero();
    Ok(KahlerForm { form, skew, closed })
}
