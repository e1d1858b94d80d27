use std::fmt::Write as _;

use confel_core::dynamics::{
    integrate, monitor_energy, write_csv, DynamicsError, IntegratorConfig,
};
use confel_core::mechanics::{derive_el, Lagrangian};
use confel_core::structures::{
    build_structure, check_compatibility, kahler_form, verify_relations, StructureKind,
};
use confel_core::symexpr::Equivalence;

use crate::config::ProblemConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Energy drift tolerance reported by `simulate`.
    pub tol: f64,
    pub cond_bound: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-6,
            cond_bound: confel_core::dynamics::DEFAULT_COND_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Main document: the report, derivation or summary.
    pub report: String,
    pub csv: Option<String>,
}

impl Outcome {
    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            report: format!("error: {message}\n"),
            csv: None,
        }
    }
}

fn header(out: &mut String, cfg: &ProblemConfig) {
    writeln!(
        out,
        "n = {}, a = {}, b = {}, lambda = {}",
        cfg.chart.n(),
        cfg.a,
        cfg.b,
        cfg.lambda.expr()
    )
    .unwrap();
}

pub fn verify(cfg: &ProblemConfig) -> Outcome {
    let mut out = String::new();
    let mut pass = true;
    out.push_str("# verify\n");
    header(&mut out, cfg);

    let relations = match verify_relations(&cfg.a, &cfg.b, &cfg.lambda, cfg.chart) {
        Ok(r) => r,
        Err(e) => return Outcome::input_error(e),
    };
    out.push_str("\n## relations\n");
    out.push_str(&relations.to_text());
    pass &= relations.all_hold();

    writeln!(out, "\n## metric compatibility, g = {}", cfg.metric).unwrap();
    for kind in StructureKind::ALL {
        let w = build_structure(
            kind,
            cfg.a.clone(),
            cfg.b.clone(),
            cfg.lambda.clone(),
            cfg.chart,
        )
        .expect("parameters checked");
        match check_compatibility(&w, &cfg.metric) {
            Ok(rep) if rep.all_hold() => {
                writeln!(
                    out,
                    "W_{kind}: holds on all {} pairs (c = {})",
                    rep.pairs.len(),
                    kind.parameter(&cfg.a, &cfg.b)
                )
                .unwrap();
            }
            Ok(rep) => {
                pass = false;
                let failures: Vec<_> = rep.failures().collect();
                writeln!(
                    out,
                    "W_{kind}: fails on {} of {} pairs",
                    failures.len(),
                    rep.pairs.len()
                )
                .unwrap();
                for p in failures {
                    writeln!(
                        out,
                        "  g(W∂{j}, W∂{k}) = {} but c*g(∂{j}, ∂{k}) = {}",
                        p.lhs,
                        p.rhs,
                        j = p.j,
                        k = p.k
                    )
                    .unwrap();
                }
            }
            Err(e) => {
                writeln!(out, "W_{kind}: not checked, {e}").unwrap();
            }
        }
    }

    out.push_str("\n## kahler forms Q(X, Y) = g(X, W Y)\n");
    for kind in StructureKind::ALL {
        let w = build_structure(
            kind,
            cfg.a.clone(),
            cfg.b.clone(),
            cfg.lambda.clone(),
            cfg.chart,
        )
        .expect("parameters checked");
        let k = kahler_form(&cfg.metric, &w).expect("same chart");
        pass &= k.closed;
        let terms: Vec<String> = k
            .form
            .terms()
            .map(|(idx, c)| format!("({c})*dx{}^dx{}", idx[0], idx[1]))
            .collect();
        let form = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        writeln!(
            out,
            "W_{kind}: Q = {form}\n  skew: {}, closed: {}",
            yes_no(k.skew),
            yes_no(k.closed)
        )
        .unwrap();
    }

    writeln!(out, "\nstatus: {}", if pass { "pass" } else { "fail" }).unwrap();
    Outcome {
        code: if pass { EXIT_OK } else { EXIT_VERIFY_FAILED },
        report: out,
        csv: None,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn derive(cfg: &ProblemConfig) -> Outcome {
    let Some(expr) = &cfg.lagrangian else {
        return Outcome::input_error("missing required key 'lagrangian'");
    };
    let l = match Lagrangian::new(cfg.chart, expr.clone()) {
        Ok(l) => l,
        Err(e) => return Outcome::input_error(e),
    };
    let w = build_structure(
        cfg.structure,
        cfg.a.clone(),
        cfg.b.clone(),
        cfg.lambda.clone(),
        cfg.chart,
    )
    .expect("parameters checked");
    let sys = match derive_el(&l, &w) {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(e),
    };
    let chart = cfg.chart;
    let mut out = String::new();
    writeln!(out, "# derive, structure {}", cfg.structure).unwrap();
    header(&mut out, cfg);
    writeln!(out, "L = {}", expr).unwrap();
    if sys.is_degenerate() {
        out.push_str("degenerate: L is identically zero, every equation reads 0 = 0\n");
    }

    out.push_str("\n## closed-form family\n");
    for eq in &sys.equations {
        writeln!(out, "{}", eq.template(cfg.structure)).unwrap();
        writeln!(out, "  {}", eq.render(&chart)).unwrap();
    }

    out.push_str("\n## pipeline system, i_X Phi - dE = 0\n");
    for (k, c) in sys.pipeline_equations().iter().enumerate() {
        writeln!(out, "dx{k}: {} = 0", c.render(&chart)).unwrap();
    }

    out.push_str("\n## cross-check\n");
    let mut matched = 0;
    for item in &sys.cross_check {
        let status = match item.status {
            Equivalence::Exact => "match",
            Equivalence::NumericOnly => "match (numeric only)",
            Equivalence::Different => "mismatch",
        };
        if item.matches() {
            matched += 1;
        }
        writeln!(
            out,
            "equation {} vs dx{}: {status}",
            item.equation, item.forcing_index
        )
        .unwrap();
        if !item.matches() {
            writeln!(out, "  closed form: {}", item.closed_form.render(&chart)).unwrap();
            writeln!(out, "  pipeline:    {}", item.pipeline.render(&chart)).unwrap();
        }
    }
    writeln!(
        out,
        "{matched} of {} equations match",
        sys.cross_check.len()
    )
    .unwrap();
    Outcome {
        code: EXIT_OK,
        report: out,
        csv: None,
    }
}

pub fn simulate(cfg: &ProblemConfig, opts: &Options) -> Outcome {
    let Some(expr) = &cfg.lagrangian else {
        return Outcome::input_error("missing required key 'lagrangian'");
    };
    let Some(t_end) = cfg.integrator.t_end else {
        return Outcome::input_error("missing required key 't_end'");
    };
    let Some(x0) = &cfg.x0 else {
        return Outcome::input_error("missing required key 'x0'");
    };
    let l = match Lagrangian::new(cfg.chart, expr.clone()) {
        Ok(l) => l,
        Err(e) => return Outcome::input_error(e),
    };
    let w = build_structure(
        cfg.structure,
        cfg.a.clone(),
        cfg.b.clone(),
        cfg.lambda.clone(),
        cfg.chart,
    )
    .expect("parameters checked");
    let sys = match derive_el(&l, &w) {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(e),
    };
    let icfg = IntegratorConfig {
        t_end,
        h: cfg.integrator.h,
        output_every: cfg.integrator.output_every,
        cond_bound: opts.cond_bound,
    };
    let steps = match icfg.steps() {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(e),
    };
    let mut traj = match integrate(&sys, x0, &icfg) {
        Ok(t) => t,
        Err(e @ DynamicsError::Singular { .. }) => {
            return Outcome {
                code: EXIT_NUMERIC,
                report: format!("error: {e}\n"),
                csv: None,
            }
        }
        Err(e @ (DynamicsError::Settings(_) | DynamicsError::Shape { .. })) => {
            return Outcome::input_error(e)
        }
        Err(e) => {
            return Outcome {
                code: EXIT_NUMERIC,
                report: format!("error: {e}\n"),
                csv: None,
            }
        }
    };
    let drift = match monitor_energy(&mut traj, &l, &w) {
        Ok(d) => d,
        Err(e) => {
            return Outcome {
                code: EXIT_NUMERIC,
                report: format!("error: {e}\n"),
                csv: None,
            }
        }
    };

    let mut csv = Vec::new();
    write_csv(&mut csv, cfg.chart, &traj).expect("in-memory write");
    let last = traj.last().expect("at least the initial state");
    let mut out = String::new();
    writeln!(out, "# simulate, structure {}", cfg.structure).unwrap();
    header(&mut out, cfg);
    writeln!(out, "steps: {steps}, rows: {}", traj.len()).unwrap();
    writeln!(out, "final t: {:.16e}", last.t).unwrap();
    let xs: Vec<String> = last.x.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "final x: {}", xs.join(", ")).unwrap();
    let verdict = if !cfg.lambda.is_constant() {
        "no conserved quantity for non-constant lambda"
    } else if drift <= opts.tol {
        "within tolerance"
    } else {
        "exceeds tolerance"
    };
    writeln!(
        out,
        "max energy drift: {drift:.3e} (tol {:.1e}, {verdict})",
        opts.tol
    )
    .unwrap();
    Outcome {
        code: EXIT_OK,
        report: out,
        csv: Some(String::from_utf8(csv).expect("ascii csv")),
    }
}
