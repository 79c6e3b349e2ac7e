//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use coeffzero::hill_oracle::HillSystem;
use coeffzero::linalg::determinant;
use coeffzero::moment_space::derive_moment_recursion;
use coeffzero::parallel::Executor;
use coeffzero::rootfinder::{certify_degeneracy_split, roots_at_order, track};
use coeffzero::tables::{evaluate_row, table_rows, RowStatus};
use coeffzero::{
    agreeing_digits, format_significant, matched_digits, Parity, PotentialSpec, PrecisionContext,
    Recurrence, ReferenceFunction, ScanWindow,
};
use rug::Float;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn(&Executor) -> Outcome>);

const TABLE_I_E0: &str = "1.392351641530291855657507876";
const TABLE_I_E1: &str = "4.64881270421207753637703291";
const SEXTIC_E0: &str = "1.435624619003392231569";

fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::with_digits(digits).expect("valid precision")
}

fn window(ctx: &PrecisionContext, lo: &str, hi: &str, grid: usize) -> ScanWindow {
    ScanWindow::new(ctx.parse(lo).unwrap(), ctx.parse(hi).unwrap(), grid).unwrap()
}

fn quartic_recurrence(beta: &str, parity: Parity, ctx: &PrecisionContext) -> Recurrence {
    let r = ReferenceFunction::gaussian(&ctx.parse(beta).unwrap(), ctx).unwrap();
    Recurrence::derive(&PotentialSpec::quartic(&ctx.float(1), ctx), &r, parity, ctx).unwrap()
}

fn first_root(roots: Vec<Float>) -> Result<Float, String> {
    roots
        .into_iter()
        .next()
        .ok_or_else(|| "no root in window".to_string())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Harmonic oscillator at beta = 1/2: the zeros are exactly 4k+1 (even)
/// and 4k+3 (odd).
fn harmonic_exactness(exec: &Executor) -> Outcome {
    let ctx = ctx(40);
    let tol = ctx.pow10(10 - 40);
    let r = ReferenceFunction::gaussian(&ctx.ratio(1, 2), &ctx).unwrap();
    let v = PotentialSpec::harmonic(&ctx);
    let mut worst = ctx.zero();
    for (parity, first) in [(Parity::Even, 1), (Parity::Odd, 3)] {
        let rec = Recurrence::derive(&v, &r, parity, &ctx).map_err(|e| e.to_string())?;
        let roots = roots_at_order(&rec, 40, &window(&ctx, "0", "162", 128), &ctx, exec)
            .map_err(|e| e.to_string())?;
        // a_{target} has degree target/2 in E; all of its zeros are exact.
        let expected = rec.target_index(40) / 2;
        if roots.len() != expected {
            return Err(format!(
                "{parity}: {} roots, expected {expected}",
                roots.len()
            ));
        }
        for (k, root) in roots.iter().enumerate() {
            let err = ctx.float(root - (first + 4 * k as i64)).abs();
            if err > worst {
                worst = err;
            }
        }
    }
    check(
        worst <= tol,
        format!("all exact zeros found, max error {:.2e}", worst.to_f64()),
    )
}

fn table_i_level(parity: Parity, printed: &str, lo: &str, hi: &str, exec: &Executor) -> Outcome {
    let ctx = ctx(60);
    let rec = quartic_recurrence("1", parity, &ctx);
    let e = first_root(
        roots_at_order(&rec, 160, &window(&ctx, lo, hi, 64), &ctx, exec)
            .map_err(|e| e.to_string())?,
    )?;
    let matched = matched_digits(&e, printed, &ctx).map_err(|e| e.to_string())?;
    let needed = coeffzero::precision::significant_digits(printed);
    check(
        matched >= needed,
        format!(
            "E = {}, {matched}/{needed} digits",
            format_significant(&e, 34)
        ),
    )
}

/// Agreement of the order-40 estimate with the order-160 one.
fn convergence_ladder(exec: &Executor) -> Outcome {
    let ctx = ctx(60);
    let mut stabilized = Vec::new();
    for beta in ["1", "0.5"] {
        let rec = quartic_recurrence(beta, Parity::Even, &ctx);
        let tracking = track(
            &rec,
            &[40, 160],
            &window(&ctx, "0.5", "3", 64),
            0,
            &ctx,
            exec,
        )
        .map_err(|e| e.to_string())?;
        let trace = tracking
            .nearest(&ctx.parse(TABLE_I_E0).unwrap())
            .ok_or("no trace")?;
        stabilized.push(
            trace
                .stabilized_at(160, ctx.digits())
                .ok_or("missing order")?,
        );
    }
    check(
        stabilized[0] >= 11 && stabilized[1] <= 8,
        format!(
            "beta=1: {} digits, beta=1/2: {} digits",
            stabilized[0], stabilized[1]
        ),
    )
}

fn table_rows_outcome(table: u8, digits: u32, exec: &Executor) -> Result<(bool, String), String> {
    let ctx = ctx(digits);
    let mut ok = true;
    let mut notes = Vec::new();
    for spec in table_rows(table).map_err(|e| e.to_string())? {
        let row = evaluate_row(&spec, &ctx, exec).map_err(|e| e.to_string())?;
        if row.status != RowStatus::Matched {
            ok = false;
            notes.push(format!(
                "{} {}/{} ({:?})",
                spec.label, row.matched, row.available, row.status
            ));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn table_ii(exec: &Executor) -> Outcome {
    let digits = coeffzero::tables::default_digits(2).unwrap();
    let (rows_ok, notes) = table_rows_outcome(2, digits, exec)?;

    let ctx = ctx(digits);
    let r = ReferenceFunction::gaussian(&ctx.float(4), &ctx).unwrap();
    let v = PotentialSpec::double_well(&ctx.float(25), &ctx);
    let w = window(&ctx, "-157.25", "-145.25", 64);
    let mut ground = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let rec = Recurrence::derive(&v, &r, parity, &ctx).map_err(|e| e.to_string())?;
        let tracking =
            track(&rec, &[120, 160, 200], &w, 27, &ctx, exec).map_err(|e| e.to_string())?;
        ground.push(tracking.traces.into_iter().next().ok_or("no trace")?);
    }
    let split = certify_degeneracy_split(&ground[0], &ground[1], &ctx);
    let split_ok = matches!(split, Ok(26));
    let detail = format!(
        "rows {}; split(Z2=25) = {:?}",
        if rows_ok {
            "all matched".to_string()
        } else {
            notes
        },
        split
    );
    check(rows_ok && split_ok, detail)
}

fn table_iii(exec: &Executor) -> Outcome {
    let digits = coeffzero::tables::default_digits(3).unwrap();
    let (ok, notes) = table_rows_outcome(3, digits, exec)?;
    check(ok, if ok { "3 rows matched".into() } else { notes })
}

fn momentum_cross_check(exec: &Executor) -> Outcome {
    let ctx = ctx(50);
    let beta = ctx.ratio(1, 4);
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, v, printed) in [
        (
            "quartic",
            PotentialSpec::quartic(&ctx.float(1), &ctx),
            TABLE_I_E0,
        ),
        (
            "sextic",
            PotentialSpec::anharmonic(6, &ctx.float(1), &ctx).unwrap(),
            SEXTIC_E0,
        ),
    ] {
        let sys = derive_moment_recursion(&v, &ctx)
            .and_then(|s| s.with_beta(&beta))
            .map_err(|e| e.to_string())?;
        let e = first_root(
            sys.missing_moment_roots(60, &window(&ctx, "0.5", "3", 64), &ctx, exec)
                .map_err(|e| e.to_string())?,
        )?;
        let agree = agreeing_digits(&e, &ctx.parse(printed).unwrap(), ctx.digits());
        ok &= agree >= 10;
        parts.push(format!("{label} m_s={} {agree} digits", sys.ms()));
    }
    check(ok, parts.join(", "))
}

fn table_iv(exec: &Executor) -> Outcome {
    let digits = coeffzero::tables::default_digits(4).unwrap();
    let (ok, notes) = table_rows_outcome(4, digits, exec)?;
    check(ok, if ok { "4 levels matched".into() } else { notes })
}

fn transcendental(exec: &Executor) -> Outcome {
    let ctx = ctx(40);
    let v = PotentialSpec::transcendental_exp(160, &ctx).map_err(|e| e.to_string())?;
    let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
    let even = Recurrence::derive(&v, &r, Parity::Even, &ctx).map_err(|e| e.to_string())?;
    let odd = Recurrence::derive(&v, &r, Parity::Odd, &ctx).map_err(|e| e.to_string())?;
    let even_roots = roots_at_order(&even, 80, &window(&ctx, "0.5", "12", 64), &ctx, exec)
        .map_err(|e| e.to_string())?;
    let odd_roots = roots_at_order(&odd, 80, &window(&ctx, "3", "7", 64), &ctx, exec)
        .map_err(|e| e.to_string())?;
    let levels = [
        (even_roots.first(), "1.356371240"),
        (odd_roots.first(), "4.633078503"),
        (even_roots.get(1), "8.9706782"),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, (root, printed)) in levels.into_iter().enumerate() {
        let Some(e) = root else {
            ok = false;
            parts.push(format!("E{n} missing"));
            continue;
        };
        let m = matched_digits(e, printed, &ctx).map_err(|e| e.to_string())?;
        let needed = coeffzero::precision::significant_digits(printed);
        ok &= m >= needed;
        parts.push(format!("E{n} {m}/{needed}"));
    }
    check(ok, parts.join(", "))
}

fn hill_agreement(exec: &Executor) -> Outcome {
    let ctx = ctx(60);
    let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
    let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
    let mut ok = true;
    let mut parts = Vec::new();
    for (parity, lo, hi) in [(Parity::Even, "0.5", "3"), (Parity::Odd, "3", "7")] {
        let w = window(&ctx, lo, hi, 64);
        let hill = HillSystem::new(&v, &r, 40, parity, &ctx).map_err(|e| e.to_string())?;
        let e_hill = first_root(hill.hill_roots(&w, &ctx, exec).map_err(|e| e.to_string())?)?;
        let rec = Recurrence::derive(&v, &r, parity, &ctx).map_err(|e| e.to_string())?;
        let e_coef =
            first_root(roots_at_order(&rec, 40, &w, &ctx, exec).map_err(|e| e.to_string())?)?;
        let agree = agreeing_digits(&e_hill, &e_coef, ctx.digits());
        ok &= agree >= 8;
        parts.push(format!("{parity} {agree} digits"));

        // Pivot products against expansion determinants.
        let rel_tol = ctx.pow10(-(ctx.digits() as i32) / 2);
        let e = ctx.parse("2.25").unwrap();
        let mut worst = ctx.zero();
        for order in 0..=12 {
            let sys = hill.with_order(order, &ctx);
            let direct = determinant(&sys.matrix(&e, &ctx), &ctx);
            let lu = sys.lu_pivots(&e, &ctx).map_err(|e| e.to_string())?;
            let rel = ctx.float(lu.determinant(&ctx) - &direct).abs() / direct.abs();
            if rel > worst {
                worst = rel;
            }
        }
        ok &= worst <= rel_tol;
        parts.push(format!("{parity} LU rel err {:.2e}", worst.to_f64()));
    }
    check(ok, parts.join(", "))
}

fn divergence(exec: &Executor) -> Outcome {
    let ctx = ctx(60);
    let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
    let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
    let hill = HillSystem::new(&v, &r, 40, Parity::Even, &ctx).map_err(|e| e.to_string())?;
    let root = first_root(
        hill.hill_roots(&window(&ctx, "0.5", "3", 64), &ctx, exec)
            .map_err(|e| e.to_string())?,
    )?;
    let mut ok = true;
    let mut parts = Vec::new();
    for side in [1i32, -1] {
        let mut previous: Option<Float> = None;
        let mut sizes = Vec::new();
        for exponent in [-2, -4, -6] {
            let e = ctx.float(&root + ctx.pow10(exponent) * side);
            let size = hill
                .divergent_component(&e, &ctx)
                .map_err(|e| e.to_string())?
                .abs();
            if let Some(p) = &previous {
                ok &= size > *p;
            }
            sizes.push(format_significant(&size, 12));
            previous = Some(size);
        }
        parts.push(format!(
            "{}: {}",
            if side > 0 { "above" } else { "below" },
            sizes.join(", ")
        ));
    }
    check(ok, parts.join(", "))
}

fn sextic_quartic_reference(exec: &Executor) -> Outcome {
    let ctx = ctx(40);
    let g = ctx.float(1);
    let v = PotentialSpec::anharmonic(6, &g, &ctx).unwrap();
    // Eigenvalues of x^2 + x^6 are positive; E = 0 is excluded because odd
    // coefficients a_{4k+3} vanish there identically for this reference.
    let w = window(&ctx, "0.5", "50", 64);
    let orders = [20, 40, 80, 160];
    let count = |r: &ReferenceFunction| -> Result<(usize, usize), String> {
        let mut total = 0;
        let mut converged = 0;
        for parity in [Parity::Even, Parity::Odd] {
            let rec = Recurrence::derive(&v, r, parity, &ctx).map_err(|e| e.to_string())?;
            let tracking = track(&rec, &orders, &w, 8, &ctx, exec).map_err(|e| e.to_string())?;
            total += tracking.traces.len();
            converged += tracking.converged().count();
        }
        Ok((total, converged))
    };
    let beta = ctx.float(g.sqrt_ref()) / 4u32;
    let quartic_ref = ReferenceFunction::new(ctx.zero(), beta, 4).map_err(|e| e.to_string())?;
    let (total, converged) = count(&quartic_ref)?;
    // Control: a Gaussian reference converges in the same window.
    let gaussian_ref = ReferenceFunction::gaussian(&ctx.float(4), &ctx).unwrap();
    let (_, control) = count(&gaussian_ref)?;
    check(
        converged == 0 && control > 0,
        format!("{converged} of {total} traces converged (Gaussian reference: {control})"),
    )
}

fn singular(exec: &Executor) -> Outcome {
    let ctx = ctx(40);
    let g = ctx.float(2);
    let v = PotentialSpec::singular(&g, &ctx).map_err(|e| e.to_string())?;
    let r =
        ReferenceFunction::for_singular(&g, &ctx.ratio(1, 2), &ctx).map_err(|e| e.to_string())?;
    let rec = Recurrence::derive(&v, &r, Parity::Even, &ctx).map_err(|e| e.to_string())?;
    let e = first_root(
        roots_at_order(&rec, 20, &window(&ctx, "0.5", "8", 64), &ctx, exec)
            .map_err(|e| e.to_string())?,
    )?;
    let err = ctx.float(&e - 5u32).abs();
    check(
        err <= ctx.bisection_tol(),
        format!("E = {}", format_significant(&e, 30)),
    )
}

fn main() -> ExitCode {
    let exec = Executor::available();
    let criteria: Vec<Criterion> = vec![
        ("harmonic exactness", Box::new(harmonic_exactness)),
        (
            "quartic ground state",
            Box::new(|x: &Executor| table_i_level(Parity::Even, TABLE_I_E0, "0.5", "3", x)),
        ),
        (
            "quartic first excited state",
            Box::new(|x: &Executor| table_i_level(Parity::Odd, TABLE_I_E1, "3", "7", x)),
        ),
        ("quartic convergence ladder", Box::new(convergence_ladder)),
        ("double well", Box::new(table_ii)),
        ("higher anharmonic", Box::new(table_iii)),
        ("momentum-space cross-check", Box::new(momentum_cross_check)),
        ("rational potential", Box::new(table_iv)),
        ("exp(x^2)-1 potential", Box::new(transcendental)),
        ("Hill determinant agreement", Box::new(hill_agreement)),
        ("Hill divergence at roots", Box::new(divergence)),
        (
            "sextic with quartic reference",
            Box::new(sextic_quartic_reference),
        ),
        ("singular potential", Box::new(singular)),
    ];

    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&exec)))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {name}: {detail} [{elapsed:.1}s]",
            i + 1
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
