//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p confel --test acceptance -- --nocapture` to see
//! the lines.

use std::f64::consts::FRAC_PI_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use confel_core::dynamics::{integrate, max_residual, monitor_energy, IntegratorConfig};
use confel_core::exterior::{ext_d, wedge};
use confel_core::mechanics::{derive_el, presymplectic, Lagrangian};
use confel_core::sample::Sampler;
use confel_core::structures::{build_structure, verify_relations, Relation, StructureKind};
use confel_core::symexpr::{integer, parse_with_limit, Equivalence};
use confel_core::{Block, Chart, Expr, Lambda};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lam(text: &str, limit: usize) -> Lambda {
    Lambda::new(parse_with_limit(text, limit).unwrap()).unwrap()
}

fn criterion_1() -> Check {
    use Block::*;
    use StructureKind::*;
    let rows: [(StructureKind, Block, Block, i64, &str, i32); 12] = [
        (F, X, Xn, 1, "a", 1),
        (F, Xn, X, -1, "a", -1),
        (F, X2n, X3n, 1, "a", 1),
        (F, X3n, X2n, -1, "a", -1),
        (G, X, X2n, -1, "b", 1),
        (G, Xn, X3n, 1, "b", 1),
        (G, X2n, X, -1, "b", -1),
        (G, X3n, Xn, 1, "b", -1),
        (H, X, X3n, -1, "ab", 1),
        (H, Xn, X2n, -1, "ab", 1),
        (H, X2n, Xn, -1, "ab", -1),
        (H, X3n, X, -1, "ab", -1),
    ];
    let (a, b) = (integer(2), integer(3));
    let mut checked = 0;
    for n in 1..=2 {
        let chart = Chart::new(n).unwrap();
        for (lambda, conformal) in [(Lambda::zero(), false), (lam("x0 + x1", 4 * n), true)] {
            for &(kind, src, dst, sign, param, e) in &rows {
                let scale = match param {
                    "a" => a.clone(),
                    "b" => b.clone(),
                    _ => &a * &b,
                };
                let mut golden = Expr::constant(scale * integer(sign));
                if conformal {
                    golden = &golden * &Expr::exp_lam(e);
                }
                let w = build_structure(kind, a.clone(), b.clone(), lambda.clone(), chart).unwrap();
                for i in 0..n {
                    let (t, weight) = w.image(chart.index(src, i));
                    ensure(
                        t == chart.index(dst, i) && weight == golden,
                        format!("{kind} {src:?} n={n}: got {weight} on ∂{t}"),
                    )?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "{checked} basis images match the plain and conformal tables"
    ))
}

fn criterion_2() -> Check {
    for n in 1..=2 {
        let r = verify_relations(
            &integer(1),
            &integer(-1),
            &Lambda::zero(),
            Chart::new(n).unwrap(),
        )
        .unwrap();
        ensure(r.all_hold(), format!("title case n={n}:\n{}", r.to_text()))?;
    }
    let r = verify_relations(
        &integer(1),
        &integer(1),
        &Lambda::zero(),
        Chart::new(1).unwrap(),
    )
    .unwrap();
    for rel in [Relation::GSquared, Relation::HSquared] {
        let c = r.check(rel);
        ensure(
            !c.holds && c.actual() == "1*I",
            format!("{} not flagged with +I: {}", rel.name(), c.actual()),
        )?;
    }
    Ok("six identities hold for n=1,2; a=b=1 flags G^2 and H^2 as +I".into())
}

fn criterion_3() -> Check {
    let l = Lambda::zero();
    let mut s = Sampler::new(3);
    let mut forms = 0;
    for n in 1..=2 {
        let chart = Chart::new(n).unwrap();
        for p in 0..=3 {
            for _ in 0..30 {
                let alpha = s.form(chart, p, 4, 3);
                ensure(ext_d(&ext_d(&alpha, &l), &l).is_zero(), "d∘d ≠ 0")?;
                let q = s.index(4);
                let beta = s.form(chart, q, 3, 2);
                let ab = wedge(&alpha, &beta).unwrap();
                let ba = wedge(&beta, &alpha).unwrap();
                let sign = if (p * q).is_multiple_of(2) { 1 } else { -1 };
                ensure(ab == ba.scale(&Expr::int(sign)), "graded anticommutativity")?;
                forms += 2;
            }
        }
    }
    Ok(format!("{forms} random forms"))
}

fn criterion_4() -> Check {
    let mut s = Sampler::new(4);
    let chart = Chart::new(1).unwrap();
    let lambdas = [Lambda::zero(), lam("x0", 4), lam("x0 + x2", 4)];
    let mut count = 0;
    for _ in 0..50 {
        let l = Lagrangian::new(chart, s.polynomial(4, 3, 4)).unwrap();
        for lambda in &lambdas {
            for kind in StructureKind::ALL {
                let w =
                    build_structure(kind, integer(1), integer(-1), lambda.clone(), chart).unwrap();
                let phi = presymplectic(&l, &w).unwrap();
                ensure(
                    ext_d(&phi, lambda).is_zero(),
                    format!("dΦ ≠ 0 for L = {}", l.expr()),
                )?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} presymplectic forms closed"))
}

fn cross_check_report(kind: StructureKind, lambda: &Lambda, seed: u64) -> (String, usize) {
    let chart = Chart::new(1).unwrap();
    let w = build_structure(kind, integer(2), integer(-3), lambda.clone(), chart).unwrap();
    let mut s = Sampler::new(seed);
    let mut text = String::new();
    let mut mismatches = 0;
    for _ in 0..5 {
        let l = Lagrangian::new(chart, s.quadratic(4)).unwrap();
        let sys = derive_el(&l, &w).unwrap();
        for item in &sys.cross_check {
            let status = format!("{:?}", item.status);
            if !item.matches() {
                mismatches += 1;
            }
            text.push_str(&format!(
                "{} {} {} {status}\n",
                item.equation, item.closed_form, item.pipeline
            ));
        }
    }
    (text, mismatches)
}

fn criterion_5() -> Check {
    let chart = Chart::new(1).unwrap();
    let w = build_structure(
        StructureKind::F,
        integer(1),
        integer(-1),
        Lambda::zero(),
        chart,
    )
    .unwrap();
    let mut s = Sampler::new(5);
    for _ in 0..25 {
        let l = Lagrangian::new(chart, s.quadratic(4)).unwrap();
        let sys = derive_el(&l, &w).unwrap();
        for item in &sys.cross_check {
            ensure(
                item.status == Equivalence::Exact && item.closed_form == item.pipeline,
                format!("L = {}: equation {} differs", l.expr(), item.equation),
            )?;
        }
    }
    let mut notes = Vec::new();
    for kind in StructureKind::ALL {
        for lambda in [Lambda::zero(), lam("x0 + x2", 4)] {
            let (first, mismatches) = cross_check_report(kind, &lambda, 55);
            let (second, _) = cross_check_report(kind, &lambda, 55);
            ensure(first == second, "cross-check report not deterministic")?;
            notes.push(format!(
                "{kind}/λ={}: {mismatches} mismatches",
                lambda.expr()
            ));
        }
    }
    Ok(format!(
        "25 quadratics agree exactly; reports: {}",
        notes.join(", ")
    ))
}

fn harmonic() -> (
    confel_core::mechanics::ELSystem,
    Lagrangian,
    confel_core::structures::StructureEndo,
) {
    let chart = Chart::new(1).unwrap();
    let l = Lagrangian::new(
        chart,
        parse_with_limit("0.5*(x0^2+x1^2+x2^2+x3^2)", 4).unwrap(),
    )
    .unwrap();
    let w = build_structure(
        StructureKind::F,
        integer(1),
        integer(-1),
        Lambda::zero(),
        chart,
    )
    .unwrap();
    (derive_el(&l, &w).unwrap(), l, w)
}

fn endpoint_error(h: f64) -> f64 {
    let (sys, _, _) = harmonic();
    let traj = integrate(
        &sys,
        &[1.0, 0.0, 0.0, 0.0],
        &IntegratorConfig::new(FRAC_PI_2, h),
    )
    .unwrap();
    let x = &traj.last().unwrap().x;
    x.iter()
        .zip([0.0, 1.0, 0.0, 0.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn criterion_6() -> Check {
    let err = endpoint_error(1e-3);
    ensure(err <= 1e-6, format!("endpoint error {err:e} at h=1e-3"))?;
    let ratio = endpoint_error(0.1) / endpoint_error(0.05);
    ensure(
        (12.0..=20.0).contains(&ratio),
        format!("halving ratio {ratio}"),
    )?;
    Ok(format!(
        "endpoint error {err:.1e} at h=1e-3; halving ratio {ratio:.2} (h=0.1 vs 0.05)"
    ))
}

fn criterion_7() -> Check {
    let (sys, l, w) = harmonic();
    let mut traj = integrate(
        &sys,
        &[1.0, 0.0, 0.0, 0.0],
        &IntegratorConfig::new(10.0, 1e-3),
    )
    .unwrap();
    let drift = monitor_energy(&mut traj, &l, &w).unwrap();
    ensure(drift <= 1e-6, format!("drift {drift:e}"))?;
    Ok(format!(
        "max |E(t) - E(0)| = {drift:.1e} over {} states",
        traj.len()
    ))
}

fn criterion_8() -> Check {
    let (sys, _, _) = harmonic();
    let traj = integrate(
        &sys,
        &[1.0, 0.0, 0.0, 0.0],
        &IntegratorConfig::new(FRAC_PI_2, 1e-3),
    )
    .unwrap();
    let worst = max_residual(&traj, &sys.residual, &sys.lambda).unwrap();
    ensure(worst <= 1e-6, format!("residual {worst:e}"))?;
    Ok(format!(
        "max residual coefficient {worst:.1e} over {} states",
        traj.len()
    ))
}

fn criterion_9() -> Check {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests");
    let confel = |cmd: &str, config: &str| {
        Command::new(env!("CARGO_BIN_EXE_confel"))
            .args([cmd, root.join("fixtures").join(config).to_str().unwrap()])
            .output()
            .unwrap()
    };
    for config in ["harmonic", "quaternionic", "conformal"] {
        for cmd in ["verify", "derive"] {
            let first = confel(cmd, &format!("{config}.conf"));
            let second = confel(cmd, &format!("{config}.conf"));
            let golden =
                std::fs::read(root.join("golden").join(format!("{config}.{cmd}.txt"))).unwrap();
            ensure(
                first.stdout == golden && second.stdout == golden,
                format!("{cmd} {config} differs from golden"),
            )?;
        }
    }
    let codes = [
        (confel("verify", "harmonic.conf"), 0),
        (confel("verify", "quaternionic.conf"), 1),
        (confel("verify", "malformed.conf"), 2),
        (confel("simulate", "linear.conf"), 3),
    ];
    for (out, want) in codes {
        ensure(
            out.status.code() == Some(want),
            format!("expected exit {want}, got {:?}", out.status.code()),
        )?;
    }
    Ok("6 golden reports byte-identical; exit codes 0/1/2/3".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        (
            1,
            "structure-table fidelity",
            criterion_1,
            Duration::from_secs(1),
        ),
        (
            2,
            "para-quaternionic relations",
            criterion_2,
            Duration::from_secs(1),
        ),
        (
            3,
            "exterior-calculus laws",
            criterion_3,
            Duration::from_secs(10),
        ),
        (
            4,
            "closedness of the presymplectic form",
            criterion_4,
            Duration::from_secs(30),
        ),
        (
            5,
            "pipeline vs closed-form agreement",
            criterion_5,
            Duration::from_secs(30),
        ),
        (
            6,
            "harmonic trajectory and RK4 order",
            criterion_6,
            Duration::from_secs(1),
        ),
        (
            7,
            "energy conservation",
            criterion_7,
            Duration::from_secs(5),
        ),
        (
            8,
            "residual on solution",
            criterion_8,
            Duration::from_secs(5),
        ),
        (
            9,
            "CLI determinism and exit codes",
            criterion_9,
            Duration::from_secs(5),
        ),
    ];
    let mut failed = Vec::new();
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= budget {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(msg) => println!("criterion {id} PASS  {name}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                println!("criterion {id} FAIL  {name}: {msg} [{elapsed:.2?}]");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
