use confel_core::symexpr::{parse_with_limit, simplify};
use confel_core::{Expr, Lambda};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Tree {
    Var(usize),
    Const(i64),
    Lam,
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, u32),
    Sin(Box<Tree>),
    Cos(Box<Tree>),
    Exp(Box<Tree>),
}

impl Tree {
    fn build(&self) -> Expr {
        match self {
            Tree::Var(k) => Expr::var(*k),
            Tree::Const(c) => Expr::int(*c),
            Tree::Lam => Expr::lam(),
            Tree::Add(a, b) => &a.build() + &b.build(),
            Tree::Sub(a, b) => &a.build() - &b.build(),
            Tree::Mul(a, b) => &a.build() * &b.build(),
            Tree::Pow(a, k) => a.build().pow(*k as i32).unwrap(),
            Tree::Sin(a) => Expr::sin(a.build()),
            Tree::Cos(a) => Expr::cos(a.build()),
            Tree::Exp(a) => Expr::exp(a.build()),
        }
    }

    /// Direct floating-point evaluation with `λ = x0`.
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Tree::Var(k) => x[*k],
            Tree::Const(c) => *c as f64,
            Tree::Lam => x[0],
            Tree::Add(a, b) => a.eval(x) + b.eval(x),
            Tree::Sub(a, b) => a.eval(x) - b.eval(x),
            Tree::Mul(a, b) => a.eval(x) * b.eval(x),
            Tree::Pow(a, k) => a.eval(x).powi(*k as i32),
            Tree::Sin(a) => a.eval(x).sin(),
            Tree::Cos(a) => a.eval(x).cos(),
            Tree::Exp(a) => a.eval(x).exp(),
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0usize..4).prop_map(Tree::Var),
        (-3i64..=3).prop_map(Tree::Const),
        Just(Tree::Lam),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| Tree::Pow(Box::new(a), k)),
            inner.clone().prop_map(|a| Tree::Sin(Box::new(a))),
            inner.clone().prop_map(|a| Tree::Cos(Box::new(a))),
            inner.prop_map(|a| Tree::Exp(Box::new(a))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 4)
}

fn lam() -> Lambda {
    Lambda::new(Expr::var(0)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_roundtrip(t in tree()) {
        let e = t.build();
        let text = e.to_string();
        let back = parse_with_limit(&text, 4).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn canonical_form_preserves_value(t in tree(), x in point()) {
        let got = t.build().eval(&x, &lam()).unwrap();
        prop_assert!(close(got, t.eval(&x), 1e-9), "{} vs {}", got, t.eval(&x));
    }

    #[test]
    fn ring_laws(a in tree(), b in tree(), c in tree()) {
        let (a, b, c) = (a.build(), b.build(), c.build());
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn product_and_sum_rules(a in tree(), b in tree(), k in 0usize..4) {
        let l = lam();
        let (a, b) = (a.build(), b.build());
        let lhs = (&a * &b).diff(k, &l);
        let rhs = &(&a.diff(k, &l) * &b) + &(&a * &b.diff(k, &l));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!((&a + &b).diff(k, &l), &a.diff(k, &l) + &b.diff(k, &l));
    }

    #[test]
    fn derivative_matches_finite_difference(t in tree(), x in point(), k in 0usize..4) {
        let l = lam();
        let d = t.build().diff(k, &l).eval(&x, &l).unwrap();
        let step = 1e-5;
        let mut hi = x.clone();
        let mut lo = x.clone();
        hi[k] += step;
        lo[k] -= step;
        let fd = (t.eval(&hi) - t.eval(&lo)) / (2.0 * step);
        prop_assert!(close(d, fd, 1e-5), "symbolic {} vs fd {}", d, fd);
    }

    #[test]
    fn simplify_is_idempotent_and_value_preserving(t in tree(), x in point()) {
        let e = t.build();
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s.clone());
        let l = lam();
        prop_assert!(close(s.eval(&x, &l).unwrap(), e.eval(&x, &l).unwrap(), 1e-9));
    }
}

#[test]
fn pythagorean_inside_products() {
    let e = parse_with_limit("x1*(sin(x0+x2)^2 + cos(x0+x2)^2)^2", 4).unwrap();
    assert_eq!(simplify(&e), Expr::var(1));
}

#[test]
fn lambda_chain_rule() {
    let l = Lambda::new(parse_with_limit("x0*x1", 4).unwrap()).unwrap();
    let e = parse_with_limit("exp(-lam)*x2", 4).unwrap();
    let d = e.diff(0, &l);
    assert_eq!(d, parse_with_limit("0 - x1*x2*exp(-lam)", 4).unwrap());
}
