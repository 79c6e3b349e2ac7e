//! Published benchmark energies and the configurations that reproduce them.

use rug::Float;

use crate::error::{Error, Result};
use crate::model::{Parity, PotentialSpec, ReferenceFunction};
use crate::moment_space::rational_ms0_roots;
use crate::parallel::Executor;
use crate::precision::{agreeing_digits, matched_digits, significant_digits, PrecisionContext};
use crate::recurrence::Recurrence;
use crate::rootfinder::{roots_at_order, ScanWindow};

/// Extra orders used to measure how stable a converged row is.
const CHECK_STEP: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Quartic { g: &'static str },
    DoubleWell { z2: &'static str },
    Anharmonic { power: u32, g: &'static str },
}

impl PotentialKind {
    pub fn build(&self, ctx: &PrecisionContext) -> Result<PotentialSpec> {
        match self {
            PotentialKind::Quartic { g } => Ok(PotentialSpec::quartic(&ctx.parse(g)?, ctx)),
            PotentialKind::DoubleWell { z2 } => {
                Ok(PotentialSpec::double_well(&ctx.parse(z2)?, ctx))
            }
            PotentialKind::Anharmonic { power, g } => {
                PotentialSpec::anharmonic(*power, &ctx.parse(g)?, ctx)
            }
        }
    }
}

/// How a row is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Coefficient zeros of `a_{target}` for `Psi = P(x) exp(-beta x^2)`.
    Coefficient {
        potential: PotentialKind,
        beta: &'static str,
        parity: Parity,
        order: usize,
    },
    /// Momentum-space `m_s = 0` determinant for the rational potential.
    RationalMoments {
        g: &'static str,
        lambda: &'static str,
        beta: &'static str,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSpec {
    pub label: String,
    pub printed: &'static str,
    pub method: Method,
    /// Energy window; the row's value is the `level`-th root in it.
    pub window: (&'static str, &'static str),
    pub level: usize,
    /// True when the printed value is a converged limit rather than the
    /// value at one fixed truncation.
    pub is_limit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Matched,
    /// Stable computation that disagrees with some printed digits.
    Mismatch,
    Unconverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub spec: RowSpec,
    pub computed: Option<Float>,
    pub matched: u32,
    pub available: u32,
    pub stabilized: Option<u32>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub table: u8,
    pub digits: u32,
    pub rows: Vec<RowResult>,
}

impl TableReport {
    pub fn all_matched(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Matched)
    }
}

#[allow(clippy::too_many_arguments)]
fn coeff_row(
    label: String,
    printed: &'static str,
    potential: PotentialKind,
    beta: &'static str,
    parity: Parity,
    order: usize,
    window: (&'static str, &'static str),
    is_limit: bool,
) -> RowSpec {
    RowSpec {
        label,
        printed,
        method: Method::Coefficient {
            potential,
            beta,
            parity,
            order,
        },
        window,
        level: 0,
        is_limit,
    }
}

/// Row definitions of a table (1 to 4).
pub fn table_rows(table: u8) -> Result<Vec<RowSpec>> {
    let quartic = PotentialKind::Quartic { g: "1" };
    match table {
        1 => {
            let printed: [(usize, &str, &str, &str); 6] = [
                (10, "1/2", "1.41", "4.9"),
                (10, "1", "1.392", "4.65"),
                (40, "1/2", "1.392 349", "4.648 84"),
                (40, "1", "1.392 351 641 4", "4.648 812 70"),
                (160, "1/2", "1.392 351 641 530 291", "4.648 812 704 212"),
                (
                    160,
                    "1",
                    "1.392 351 641 530 291 855 657 507 876",
                    "4.648 812 704 212 077 536 377 032 91",
                ),
            ];
            let mut rows = Vec::new();
            for (order, beta, e0, e1) in printed {
                let b = if beta == "1/2" { "0.5" } else { "1" };
                rows.push(coeff_row(
                    format!("I={order} beta={beta} n=0"),
                    e0,
                    quartic.clone(),
                    b,
                    Parity::Even,
                    order,
                    ("0.5", "3"),
                    false,
                ));
                rows.push(coeff_row(
                    format!("I={order} beta={beta} n=1"),
                    e1,
                    quartic.clone(),
                    b,
                    Parity::Odd,
                    order,
                    ("3", "7"),
                    false,
                ));
            }
            Ok(rows)
        }
        2 => {
            let printed: [(&str, &str, &str, (&str, &str)); 6] = [
                (
                    "0",
                    "1.060 362 090 484 182 899 647 046 016",
                    "3.799 673 029 801 394 168 783 094 188",
                    ("-1", "11"),
                ),
                (
                    "1",
                    "0.657 653 005 180 715 123 059 021 723",
                    "2.834 536 202 119 304 214 654 676 208",
                    ("-1.25", "10.75"),
                ),
                (
                    "5",
                    "-3.410 142 761 239 829 475 297 709 653",
                    "-3.250 675 362 289 235 980 228 513 775",
                    ("-7.25", "4.75"),
                ),
                (
                    "10",
                    "-20.633 576 702 947 799 149 958 554 634",
                    "-20.633 546 884 404 911 079 343 874 899",
                    ("-26", "-14"),
                ),
                (
                    "15",
                    "-50.841 387 284 381 954 366 250 996 515",
                    "-50.841 387 284 187 005 154 710 149 735",
                    ("-57.25", "-45.25"),
                ),
                (
                    "25",
                    "-149.219 456 142 190 888 029 163 966 538",
                    "-149.219 456 142 190 888 029 163 958 974",
                    ("-157.25", "-145.25"),
                ),
            ];
            let mut rows = Vec::new();
            for (z2, plus, minus, window) in printed {
                for (parity, value) in [(Parity::Even, plus), (Parity::Odd, minus)] {
                    rows.push(coeff_row(
                        format!("Z2={z2} parity={}", parity.sign()),
                        value,
                        PotentialKind::DoubleWell { z2 },
                        "4",
                        parity,
                        160,
                        window,
                        true,
                    ));
                }
            }
            Ok(rows)
        }
        3 => Ok(vec![
            coeff_row(
                "x^2+x^6".into(),
                "1.435 624 619 003 392 231 569",
                PotentialKind::Anharmonic { power: 6, g: "1" },
                "4",
                Parity::Even,
                160,
                ("0.5", "3"),
                true,
            ),
            coeff_row(
                "x^2+x^8".into(),
                "1.491 019 895 662",
                PotentialKind::Anharmonic { power: 8, g: "1" },
                "8",
                Parity::Even,
                160,
                ("0.5", "3"),
                true,
            ),
            coeff_row(
                "x^2+x^10".into(),
                "1.546 263 512 6",
                PotentialKind::Anharmonic { power: 10, g: "1" },
                "16",
                Parity::Even,
                160,
                ("0.5", "3"),
                true,
            ),
        ]),
        4 => {
            let printed = [
                "1.043 173 713 044 445 233 778 700 870 546 094",
                "5.181 094 785 884 700 927 110 409 072 888 3",
                "9.272 816 970 035 252 254 582 438 478 9",
                "13.339 390 726 973 551 232 933 170 5",
            ];
            Ok(printed
                .into_iter()
                .enumerate()
                .map(|(level, value)| RowSpec {
                    label: format!("n={}", 2 * level),
                    printed: value,
                    method: Method::RationalMoments {
                        g: "0.1",
                        lambda: "0.1",
                        beta: "0.25",
                        n: 120,
                    },
                    window: ("0", "15"),
                    level,
                    is_limit: true,
                })
                .collect())
        }
        other => Err(Error::Input(format!(
            "no table {other}; tables 1 to 4 exist"
        ))),
    }
}

/// Default working precision: longest printed digit string plus 20.
pub fn default_digits(table: u8) -> Result<u32> {
    let rows = table_rows(table)?;
    Ok(rows
        .iter()
        .map(|r| significant_digits(r.printed))
        .max()
        .unwrap_or(0)
        + 20)
}

/// Roots of a row's method at a given truncation.
fn row_roots(
    spec: &RowSpec,
    truncation_shift: usize,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Vec<Float>> {
    let window = ScanWindow::new(ctx.parse(spec.window.0)?, ctx.parse(spec.window.1)?, 64)?;
    match &spec.method {
        Method::Coefficient {
            potential,
            beta,
            parity,
            order,
        } => {
            let r = ReferenceFunction::gaussian(&ctx.parse(beta)?, ctx)?;
            let rec = Recurrence::derive(&potential.build(ctx)?, &r, *parity, ctx)?;
            roots_at_order(&rec, order + truncation_shift, &window, ctx, exec)
        }
        Method::RationalMoments { g, lambda, beta, n } => rational_ms0_roots(
            &ctx.parse(g)?,
            &ctx.parse(lambda)?,
            n + truncation_shift,
            &ctx.parse(beta)?,
            &window,
            ctx,
            exec,
        ),
    }
}

/// Compute one row and compare it with the printed value.
pub fn evaluate_row(spec: &RowSpec, ctx: &PrecisionContext, exec: &Executor) -> Result<RowResult> {
    let available = significant_digits(spec.printed);
    let computed = row_roots(spec, 0, ctx, exec)?.get(spec.level).cloned();
    let Some(value) = computed else {
        return Ok(RowResult {
            spec: spec.clone(),
            computed: None,
            matched: 0,
            available,
            stabilized: None,
            status: RowStatus::Unconverged,
        });
    };
    let matched = matched_digits(&value, spec.printed, ctx)?;
    let stabilized = if spec.is_limit {
        let check = row_roots(spec, CHECK_STEP, ctx, exec)?;
        Some(
            check
                .get(spec.level)
                .map_or(0, |c| agreeing_digits(&value, c, ctx.digits())),
        )
    } else {
        None
    };
    let status = if matched >= available {
        RowStatus::Matched
    } else if stabilized.is_none_or(|s| s >= available) {
        RowStatus::Mismatch
    } else {
        RowStatus::Unconverged
    };
    Ok(RowResult {
        spec: spec.clone(),
        computed: Some(value),
        matched,
        available,
        stabilized,
        status,
    })
}

/// Reproduce every row of a table.
pub fn reproduce_table(table: u8, digits: Option<u32>, exec: &Executor) -> Result<TableReport> {
    let digits = match digits {
        Some(d) => d,
        None => default_digits(table)?,
    };
    let ctx = PrecisionContext::with_digits(digits)?;
    let rows = table_rows(table)?
        .iter()
        .map(|spec| evaluate_row(spec, &ctx, exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport {
        table,
        digits,
        rows,
    })
}
