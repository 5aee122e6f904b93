//! Plain-text rendering. Everything is formatted with fixed precision so that
//! repeated runs print identical bytes.

use std::fmt::Write;

use contact3::charts::{ClaimStatus, ExampleReport};
use contact3::expr::Point;
use contact3::nullity::{Classification, Stats};
use contact3::report::{CheckKind, CheckReport};

use crate::commands::{ChartOutput, DHomothetyOutput, ExamplesOutput, NullityOutput, VerifyOutput};

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn point(p: &Point) -> String {
    let [x, y, z] = p.coords();
    format!("({x:.6}, {y:.6}, {z:.6})")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"))
}

fn checks(out: &mut String, title: &str, r: &CheckReport) {
    let _ = writeln!(
        out,
        "{title} [{}]: {} ({} points, seed {}, tol {:e})",
        r.structure,
        verdict(r.passed),
        r.points,
        r.seed,
        r.tol
    );
    let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &r.checks {
        let what = match c.kind {
            CheckKind::Residual => "max",
            CheckKind::NonVanishing => "min",
        };
        let at = c.witness.as_ref().map(|p| format!(" at {}", point(p))).unwrap_or_default();
        let tol = if c.tol == r.tol { String::new() } else { format!(" (tol {:e})", c.tol) };
        let _ = writeln!(
            out,
            "  {:<4}  {:<width$}  {what} {:.3e}{at}{tol}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.worst,
        );
    }
    if !r.skipped.is_empty() {
        let _ = writeln!(
            out,
            "  {} sampled points skipped; first: {} ({})",
            r.skipped.len(),
            point(&r.skipped[0].point),
            r.skipped[0].reason
        );
    }
}

fn stats(s: &Option<Stats>) -> String {
    match s {
        Some(s) => format!("mean {:.6e}, std {:.3e}, range [{:.6e}, {:.6e}]", s.mean, s.std, s.min, s.max),
        None => "-".to_string(),
    }
}

fn classification(out: &mut String, c: &Classification) {
    let _ = writeln!(out, "classification: {}", c.label);
    let _ = writeln!(out, "  max lambda    {:.6e}", c.max_lambda);
    let _ = writeln!(out, "  max residual  {:.3e}", c.max_residual);
    let _ = writeln!(out, "  max |nu|      {:.3e}", c.max_abs_nu);
    let _ = writeln!(out, "  kappa         {}", stats(&c.kappa));
    let _ = writeln!(out, "  mu            {}", stats(&c.mu));
    if c.degenerate_points > 0 {
        let _ = writeln!(out, "  points with h = 0: {}", c.degenerate_points);
    }
}

pub fn verify(v: &VerifyOutput) -> String {
    let mut out = String::new();
    checks(&mut out, "axioms", &v.validation);
    checks(&mut out, "identities", &v.identities);
    checks(&mut out, "derivatives", &v.derivatives);
    let _ = writeln!(out, "verify {}: {}", v.structure, verdict(v.passed));
    out
}

pub fn nullity(n: &NullityOutput, verbose: bool) -> String {
    let mut out = String::new();
    checks(&mut out, "axioms", &n.validation);
    classification(&mut out, &n.classification);
    if verbose {
        let _ = writeln!(
            out,
            "{:<40} {:>14} {:>14} {:>14} {:>14} {:>10}",
            "point", "lambda", "kappa", "mu", "nu", "residual"
        );
        for r in &n.rows {
            let _ = writeln!(
                out,
                "{:<40} {:>14.6e} {:>14.6e} {:>14} {:>14} {:>10.3e}",
                point(&r.point),
                r.lambda,
                r.kappa,
                opt(r.mu),
                opt(r.nu),
                r.residual
            );
        }
    }
    if !n.skipped.is_empty() {
        let _ = writeln!(out, "{} sampled points skipped", n.skipped.len());
    }
    let _ = writeln!(out, "nullity {}: {}", n.structure, verdict(n.passed));
    out
}

pub fn dhomothety(d: &DHomothetyOutput, verbose: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alpha = {}", d.report.alpha);
    checks(&mut out, "transformation laws", &d.report.checks);
    checks(&mut out, "deformed axioms", &d.report.deformed_validation);
    if verbose {
        let _ =
            writeln!(out, "{:<40} {:>14} {:>14} {:>14} {:>14}", "point", "lambda", "lambda_bar", "kappa", "kappa_bar");
        for r in &d.report.rows {
            let _ = writeln!(
                out,
                "{:<40} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                point(&r.original.point),
                r.original.lambda,
                r.deformed.lambda,
                r.original.kappa,
                r.deformed.kappa
            );
        }
    }
    let _ = writeln!(out, "dhomothety {} -> {}: {}", d.structure, d.deformed, verdict(d.passed));
    out
}

pub fn chart(c: &ChartOutput, verbose: bool) -> String {
    let r = &c.report;
    let mut out = String::new();
    out.push_str(&c.spec);
    out.push('\n');
    let _ = writeln!(out, "case {}: lam_of_z = {}, F = {}", r.case.number(), r.lam_of_z, r.f);
    checks(&mut out, "axioms", &r.validation);
    checks(&mut out, "identities", &r.identities);
    checks(&mut out, "chart relations", &r.relations);
    classification(&mut out, &r.classification);
    if verbose {
        let _ = writeln!(
            out,
            "{:<40} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>3}",
            "point", "lambda", "a", "b", "c", "A", "B", "or"
        );
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{:<40} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>3}",
                point(&row.point),
                row.lambda,
                row.a,
                row.b,
                row.c,
                row.big_a,
                row.big_b,
                row.orientation
            );
        }
    }
    let _ = writeln!(out, "chart {}: {}", r.chart, verdict(c.passed));
    out
}

fn status(s: ClaimStatus) -> &'static str {
    match s {
        ClaimStatus::Asserted => "asserted",
        ClaimStatus::Reported => "reported",
    }
}

fn example(out: &mut String, e: &ExampleReport, verbose: bool) {
    let _ = writeln!(out, "== {} ==", e.name);
    checks(out, "axioms", &e.validation);
    checks(out, "identities", &e.identities);
    checks(out, "self-consistency", &e.consistency);
    classification(out, &e.classification);
    if let Some(l) = &e.label {
        let _ = writeln!(
            out,
            "  label claim ({}): expected {}, got {} -> {}",
            status(l.status),
            l.claimed,
            l.computed,
            if l.agrees { "agrees" } else { "differs" }
        );
    }
    let _ = writeln!(out, "claims:");
    for c in &e.claims {
        let misfit = c.fit_misfit.map(|m| format!(", fit misfit {m:.3e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "  {:<8} {:<16} = {:<20} max rel diff {:.3e}{misfit} -> {}",
            status(c.status),
            c.quantity.as_str(),
            c.claimed,
            c.max_rel_diff,
            if c.agrees { "agrees" } else { "differs" }
        );
    }
    let discrepancies: Vec<_> = e.discrepancies().collect();
    if !discrepancies.is_empty() {
        let _ = writeln!(out, "discrepancies:");
        for c in discrepancies {
            let _ = writeln!(
                out,
                "  {} claimed {}: at {} computed {} vs claimed {}",
                c.quantity.as_str(),
                c.claimed,
                c.witness.as_ref().map(point).unwrap_or_else(|| "-".into()),
                opt(c.computed_at_witness),
                opt(c.claimed_at_witness)
            );
        }
    }
    if verbose {
        let _ = writeln!(
            out,
            "{:<40} {:>14} {:>14} {:>14} {:>14} {:>14}",
            "point", "lambda", "kappa", "mu", "nu", "tau coeff"
        );
        for r in &e.rows {
            let _ = writeln!(
                out,
                "{:<40} {:>14.6e} {:>14.6e} {:>14} {:>14} {:>14.6e}",
                point(&r.point),
                r.lambda,
                r.kappa,
                opt(r.mu),
                opt(r.nu),
                r.tau_coefficient
            );
        }
    }
    let _ = writeln!(out, "{}: {}\n", e.name, verdict(e.passed));
}

pub fn examples(x: &ExamplesOutput, verbose: bool) -> String {
    let mut out = String::new();
    for e in &x.entries {
        example(&mut out, e, verbose);
    }
    let _ = writeln!(out, "examples: {}", verdict(x.passed));
    out
}
