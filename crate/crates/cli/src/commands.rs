//! One function per subcommand, each producing a [`Report`].

use coeffzero::hill_oracle::HillSystem;
use coeffzero::moment_space::{derive_moment_recursion, rational_ms0_roots};
use coeffzero::parallel::Executor;
use coeffzero::recurrence::wavefunction;
use coeffzero::rootfinder::{link_traces, roots_at_order, track, ScanWindow};
use coeffzero::tables::{reproduce_table, RowStatus};
use coeffzero::{
    format_significant, Parity, PotentialSpec, PrecisionContext, Recurrence, ReferenceFunction,
    Trace, Tracking,
};
use rug::Float;

use crate::config::{parse_number, Command, PotentialChoice, RunConfig, Setup};
use crate::error::CliError;
use crate::report::{Report, Status};

/// Significant digits for wavefunction samples and figure grids.
const SAMPLE_DIGITS: usize = 20;

/// Log-spaced coupling grid of figure 1: `10^-2 .. 10^2`.
const FIGURE1_DECADES: (i32, i32) = (-2, 2);

pub fn run(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    match cfg.command {
        Command::Solve => solve(cfg, exec),
        Command::Scan => scan(cfg, exec),
        Command::Track => track_levels(cfg, exec),
        Command::Wavefunction => sample_wavefunction(cfg, exec),
        Command::Hill => hill(cfg, exec),
        Command::Moments => moments(cfg, exec),
        Command::ReproduceTable => table(cfg, exec),
        Command::ExportFigure => figure(cfg, exec),
    }
}

/// Decimal string without trailing fractional zeros.
fn trim(text: String) -> String {
    if !text.contains('.') {
        return text;
    }
    let t = text.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

fn describe_setup(report: &mut Report, cfg: &RunConfig, s: &Setup) {
    report.meta("potential", s.potential.formula());
    if cfg.command != Command::Moments {
        let r = &s.reference;
        let power = if r.alpha.is_zero() {
            String::new()
        } else {
            format!("|x|^{} ", trim(format_significant(&r.alpha, SAMPLE_DIGITS)))
        };
        let beta = trim(format_significant(&r.beta, SAMPLE_DIGITS));
        report.meta("reference", format!("{power}exp(-{beta} |x|^{})", r.sigma));
        report.meta("parity", Parity::from(cfg.parity).to_string());
    }
    report.meta("digits", s.ctx.digits().to_string());
    report.meta(
        "window",
        format!(
            "[{}, {}] grid {}",
            trim(format_significant(&s.window.e_min, SAMPLE_DIGITS)),
            trim(format_significant(&s.window.e_max, SAMPLE_DIGITS)),
            s.window.grid_points
        ),
    );
}

fn trace_status(trace: &Trace, cap: u32) -> Status {
    if trace.converged {
        return Status::Matched;
    }
    let history = trace.agreement_history(cap);
    let tail = &history[history.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[0] <= w[1]);
    if trace.stabilized_digits > 0 && monotone {
        Status::BelowTarget
    } else {
        Status::Unconverged
    }
}

/// Final energy of every trace with its stabilized digits.
fn levels_report(tracking: &Tracking, cfg: &RunConfig, s: &Setup) -> Report {
    let mut report = Report::new(vec!["level", "order", "energy", "stabilized", "status"]);
    describe_setup(&mut report, cfg, s);
    report.meta("target", cfg.target.to_string());
    if !tracking.spurious.is_empty() {
        report.meta("spurious", tracking.spurious.len().to_string());
    }
    if tracking.traces.is_empty() {
        report.degrade(Status::Unconverged);
    }
    for trace in &tracking.traces {
        let status = trace_status(trace, s.ctx.digits());
        report.degrade(status);
        let (order, energy) = trace.per_order.last().expect("traces are never empty");
        report.push(vec![
            trace.level.to_string(),
            order.to_string(),
            s.ctx.format(energy),
            trace.stabilized_digits.to_string(),
            status.label().to_string(),
        ]);
    }
    report
}

fn recurrence(cfg: &RunConfig, s: &Setup) -> Result<Recurrence, CliError> {
    Ok(Recurrence::derive(
        &s.potential,
        &s.reference,
        cfg.parity.into(),
        &s.ctx,
    )?)
}

fn solve(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    let rec = recurrence(cfg, &s)?;
    let tracking = track(&rec, &cfg.orders()?, &s.window, cfg.target, &s.ctx, exec)?;
    Ok(levels_report(&tracking, cfg, &s))
}

fn scan(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    let rec = recurrence(cfg, &s)?;
    let mut report = Report::new(vec!["order", "index", "energy"]);
    describe_setup(&mut report, cfg, &s);
    let mut last_count = 0;
    for order in cfg.orders()? {
        let roots = roots_at_order(&rec, order, &s.window, &s.ctx, exec)?;
        last_count = roots.len();
        for (i, r) in roots.iter().enumerate() {
            report.push(vec![order.to_string(), i.to_string(), s.ctx.format(r)]);
        }
    }
    if last_count == 0 {
        report.degrade(Status::Unconverged);
    }
    Ok(report)
}

fn track_levels(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    let rec = recurrence(cfg, &s)?;
    let tracking = track(&rec, &cfg.orders()?, &s.window, cfg.target, &s.ctx, exec)?;
    let mut report = Report::new(vec!["level", "order", "energy", "agreement"]);
    describe_setup(&mut report, cfg, &s);
    report.meta("target", cfg.target.to_string());
    if tracking.traces.is_empty() {
        report.degrade(Status::Unconverged);
    }
    for trace in &tracking.traces {
        report.degrade(trace_status(trace, s.ctx.digits()));
        let history = trace.agreement_history(s.ctx.digits());
        let agreement =
            std::iter::once(String::from("-")).chain(history.iter().map(u32::to_string));
        for ((order, e), agree) in trace.per_order.iter().zip(agreement) {
            report.push(vec![
                trace.level.to_string(),
                order.to_string(),
                s.ctx.format(e),
                agree,
            ]);
        }
    }
    for (order, e) in &tracking.spurious {
        report.push(vec![
            "spurious".into(),
            order.to_string(),
            s.ctx.format(e),
            "-".into(),
        ]);
    }
    Ok(report)
}

fn hill(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    let per_order = cfg
        .orders()?
        .into_iter()
        .map(|order| {
            let sys =
                HillSystem::new(&s.potential, &s.reference, order, cfg.parity.into(), &s.ctx)?;
            Ok((order, sys.hill_roots(&s.window, &s.ctx, exec)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let tracking = link_traces(&per_order, cfg.target, &s.ctx)?;
    Ok(levels_report(&tracking, cfg, &s))
}

fn moments(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    // The momentum-side Gaussian is independent of the configuration-space one.
    let beta = match &cfg.beta {
        Some(b) => parse_number(b, &s.ctx)?,
        None => s.ctx.ratio(1, 2),
    };
    let orders = cfg.orders()?;
    let per_order = if let Some(r) = s.potential.rational_term() {
        orders
            .iter()
            .map(|&n| {
                Ok((
                    n,
                    rational_ms0_roots(&r.g, &r.lambda, n, &beta, &s.window, &s.ctx, exec)?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?
    } else {
        let sys = derive_moment_recursion(&s.potential, &s.ctx)?.with_beta(&beta)?;
        orders
            .iter()
            .map(|&n| Ok((n, sys.missing_moment_roots(n, &s.window, &s.ctx, exec)?)))
            .collect::<Result<Vec<_>, CliError>>()?
    };
    let tracking = link_traces(&per_order, cfg.target, &s.ctx)?;
    let mut report = levels_report(&tracking, cfg, &s);
    report.meta(
        "momentum beta",
        trim(format_significant(&beta, SAMPLE_DIGITS)),
    );
    Ok(report)
}

/// Uniform grid on `[-xmax, xmax]`.
fn sample_points(cfg: &RunConfig, ctx: &PrecisionContext) -> Result<Vec<Float>, CliError> {
    if cfg.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let xmax = parse_number(&cfg.xmax, ctx)?;
    if xmax <= 0 {
        return Err(CliError::Usage("--xmax must be positive".into()));
    }
    let steps = (cfg.points - 1) as u32;
    Ok((0..=steps)
        .map(|k| {
            let t = ctx.float(&xmax * (2 * k)) / steps;
            t - &xmax
        })
        .collect())
}

/// Wavefunction of the zero `e` of the order-`order` coefficient.
fn wavefunction_at(
    rec: &Recurrence,
    reference: &ReferenceFunction,
    order: usize,
    e: &Float,
    xs: &[Float],
    ctx: &PrecisionContext,
) -> Result<Vec<Float>, CliError> {
    let seq = rec.eval_coefficients(e, rec.target_index(order), ctx)?;
    Ok(wavefunction(&seq, reference, xs, ctx)?)
}

fn sample_wavefunction(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let s = cfg.setup()?;
    let rec = recurrence(cfg, &s)?;
    let order = *cfg.orders()?.last().expect("orders are non-empty");
    let xs = sample_points(cfg, &s.ctx)?;
    let mut report = Report::new(vec!["x", "psi"]);
    describe_setup(&mut report, cfg, &s);
    report.meta("order", order.to_string());
    report.meta("level", cfg.level.to_string());
    let roots = roots_at_order(&rec, order, &s.window, &s.ctx, exec)?;
    match roots.get(cfg.level) {
        Some(e) => {
            let psi = wavefunction_at(&rec, &s.reference, order, e, &xs, &s.ctx)?;
            report.meta("energy", s.ctx.format(e));
            for (x, p) in xs.iter().zip(&psi) {
                report.push(vec![
                    trim(format_significant(x, SAMPLE_DIGITS)),
                    format_significant(p, SAMPLE_DIGITS),
                ]);
            }
        }
        None => report.degrade(Status::Unconverged),
    }
    Ok(report)
}

fn table(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    let which = cfg
        .table
        .ok_or_else(|| CliError::Usage("missing table number".into()))?;
    let result = reproduce_table(which, cfg.digits, exec)?;
    let ctx = PrecisionContext::with_digits(result.digits)?;
    let mut report = Report::new(vec![
        "row",
        "computed",
        "printed",
        "matched",
        "available",
        "stabilized",
        "status",
    ]);
    report.meta("table", which.to_string());
    report.meta("digits", result.digits.to_string());
    for row in &result.rows {
        let status = match row.status {
            RowStatus::Matched => Status::Matched,
            RowStatus::Mismatch => Status::BelowTarget,
            RowStatus::Unconverged => Status::Unconverged,
        };
        report.degrade(status);
        let label = match status {
            Status::BelowTarget => "mismatch",
            other => other.label(),
        };
        report.push(vec![
            row.spec.label.clone(),
            row.computed
                .as_ref()
                .map_or_else(|| "-".into(), |e| ctx.format(e)),
            row.spec.printed.replace(' ', ""),
            row.matched.to_string(),
            row.available.to_string(),
            row.stabilized.map_or_else(|| "-".into(), |d| d.to_string()),
            label.to_string(),
        ]);
    }
    Ok(report)
}

fn figure(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    match cfg.figure {
        Some(1) => figure_ground_energy(cfg, exec),
        Some(2) => figure_wavefunctions(cfg, exec),
        Some(3) => Err(CliError::Usage(
            "figure 3 is out of scope: its potential family is not supported by this tool".into(),
        )),
        Some(n) => Err(CliError::Usage(format!(
            "no figure {n}; figures 1 and 2 can be exported"
        ))),
        None => Err(CliError::Usage("missing figure number".into())),
    }
}

/// Gaussian width that keeps the quartic series well conditioned: 1/2 at
/// `g = 0`, growing like `sqrt(g)/2`.
fn quartic_beta(g: &Float, cfg: &RunConfig, ctx: &PrecisionContext) -> Result<Float, CliError> {
    match &cfg.beta {
        Some(b) => parse_number(b, ctx),
        None => Ok((ctx.float(g.sqrt_ref()) + 1u32) / 2u32),
    }
}

fn figure_ground_energy(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    if cfg.potential != PotentialChoice::Quartic {
        return Err(CliError::Usage(
            "figure 1 is defined for the quartic oscillator".into(),
        ));
    }
    if cfg.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let ctx = cfg.context()?;
    let orders = cfg.orders()?;
    let mut report = Report::new(vec!["g", "beta", "E0", "stabilized", "status"]);
    report.meta("figure", "1");
    report.meta("potential", "x^2 + g*x^4");
    report.meta("digits", ctx.digits().to_string());
    report.meta("target", cfg.target.to_string());
    let (lo, hi) = FIGURE1_DECADES;
    let steps = (cfg.points - 1) as i32;
    let mut couplings = vec![String::from("0")];
    for k in 0..=steps {
        let exponent = ctx.float(lo) + ctx.float((hi - lo) * k) / steps;
        let g = rug::ops::Pow::pow(ctx.float(10u32), &exponent);
        couplings.push(trim(format_significant(&g, 6)));
    }
    for text in couplings {
        let g = ctx.parse(&text)?;
        let beta = quartic_beta(&g, cfg, &ctx)?;
        let v = PotentialSpec::quartic(&g, &ctx);
        let r = ReferenceFunction::gaussian(&beta, &ctx)?;
        let rec = Recurrence::derive(&v, &r, Parity::Even, &ctx)?;
        let window = ScanWindow::default_for(&v, 1, &ctx);
        let window = ScanWindow::new(window.e_min, window.e_max, cfg.grid)?;
        let tracking = track(&rec, &orders, &window, cfg.target, &ctx, exec)?;
        let row = match tracking.traces.first() {
            Some(t) => {
                let status = trace_status(t, ctx.digits());
                report.degrade(status);
                vec![
                    text,
                    trim(format_significant(&beta, SAMPLE_DIGITS)),
                    ctx.format(t.energy()),
                    t.stabilized_digits.to_string(),
                    status.label().to_string(),
                ]
            }
            None => {
                report.degrade(Status::Unconverged);
                vec![
                    text,
                    trim(format_significant(&beta, SAMPLE_DIGITS)),
                    "-".into(),
                    "0".into(),
                    Status::Unconverged.label().to_string(),
                ]
            }
        };
        report.push(row);
    }
    Ok(report)
}

fn figure_wavefunctions(cfg: &RunConfig, exec: &Executor) -> Result<Report, CliError> {
    if cfg.potential != PotentialChoice::Quartic {
        return Err(CliError::Usage(
            "figure 2 is defined for the quartic oscillator".into(),
        ));
    }
    let ctx = cfg.context()?;
    let g = parse_number(&cfg.g, &ctx)?;
    let beta = quartic_beta(&g, cfg, &ctx)?;
    let v = PotentialSpec::quartic(&g, &ctx);
    let r = ReferenceFunction::gaussian(&beta, &ctx)?;
    let window = ScanWindow::default_for(&v, 2, &ctx);
    let window = ScanWindow::new(window.e_min, window.e_max, cfg.grid)?;
    let order = *cfg.orders()?.last().expect("orders are non-empty");
    let xs = sample_points(cfg, &ctx)?;
    let mut report = Report::new(vec!["x", "psi0", "psi1"]);
    report.meta("figure", "2");
    report.meta("potential", v.formula());
    report.meta("beta", trim(format_significant(&beta, SAMPLE_DIGITS)));
    report.meta("order", order.to_string());
    let mut columns = Vec::new();
    for (parity, name) in [(Parity::Even, "E0"), (Parity::Odd, "E1")] {
        let rec = Recurrence::derive(&v, &r, parity, &ctx)?;
        let roots = roots_at_order(&rec, order, &window, &ctx, exec)?;
        match roots.first() {
            Some(e) => {
                report.meta(name, ctx.format(e));
                columns.push(wavefunction_at(&rec, &r, order, e, &xs, &ctx)?);
            }
            None => {
                report.degrade(Status::Unconverged);
                return Ok(report);
            }
        }
    }
    for (i, x) in xs.iter().enumerate() {
        report.push(vec![
            trim(format_significant(x, SAMPLE_DIGITS)),
            format_significant(&columns[0][i], SAMPLE_DIGITS),
            format_significant(&columns[1][i], SAMPLE_DIGITS),
        ]);
    }
    Ok(report)
}
