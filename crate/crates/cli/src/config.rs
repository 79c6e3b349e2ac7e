//! Serializable run configuration and the solver objects built from it.

use std::path::PathBuf;

use clap::ValueEnum;
use coeffzero::rootfinder::ScanWindow;
use coeffzero::{parse_potential_file, Parity, PotentialSpec, PrecisionContext, ReferenceFunction};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Precision used when neither `--digits` nor a table default applies.
pub const DEFAULT_DIGITS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Scan,
    Track,
    Wavefunction,
    Hill,
    Moments,
    ReproduceTable,
    ExportFigure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PotentialChoice {
    Harmonic,
    Quartic,
    Doublewell,
    Sextic,
    Octic,
    Dectic,
    Exp,
    Rational,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ParityChoice {
    Even,
    Odd,
}

impl From<ParityChoice> for Parity {
    fn from(p: ParityChoice) -> Self {
        match p {
            ParityChoice::Even => Parity::Even,
            ParityChoice::Odd => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Everything a run depends on. Numbers are kept as the decimal (or `p/q`)
/// strings the user typed so that no binary rounding enters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub table: Option<u8>,
    pub figure: Option<u8>,
    pub potential: PotentialChoice,
    pub potential_file: Option<PathBuf>,
    pub g: String,
    pub z2: String,
    pub lambda: String,
    pub truncation: u32,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub sigma: u32,
    pub parity: ParityChoice,
    pub digits: Option<u32>,
    pub orders: Vec<usize>,
    pub emin: Option<String>,
    pub emax: Option<String>,
    pub grid: usize,
    pub target: u32,
    pub level: usize,
    pub xmax: String,
    pub points: usize,
    pub format: Format,
    pub jobs: Option<usize>,
}

/// Parse `"1.25"`, `"-3e-2"` or `"1/4"` exactly at working precision.
pub fn parse_number(text: &str, ctx: &PrecisionContext) -> Result<Float, CliError> {
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let den = ctx.parse(den)?;
            if den.is_zero() {
                return Err(CliError::Usage(format!("zero denominator in '{text}'")));
            }
            ctx.parse(num)? / den
        }
        None => ctx.parse(text)?,
    };
    Ok(value)
}

/// Solver inputs resolved from a [`RunConfig`].
pub struct Setup {
    pub ctx: PrecisionContext,
    pub potential: PotentialSpec,
    pub reference: ReferenceFunction,
    pub window: ScanWindow,
}

impl RunConfig {
    pub fn digits_or_default(&self) -> u32 {
        self.digits.unwrap_or(DEFAULT_DIGITS)
    }

    pub fn context(&self) -> Result<PrecisionContext, CliError> {
        Ok(PrecisionContext::with_digits(self.digits_or_default())?)
    }

    /// Orders sorted and deduplicated; at least one.
    pub fn orders(&self) -> Result<Vec<usize>, CliError> {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        orders.dedup();
        if orders.is_empty() || orders[0] == 0 {
            return Err(CliError::Usage("--orders needs positive integers".into()));
        }
        Ok(orders)
    }

    pub fn potential(
        &self,
        ctx: &PrecisionContext,
    ) -> Result<(PotentialSpec, FileReference), CliError> {
        if let Some(path) = &self.potential_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file = parse_potential_file(&text, ctx)?;
            let reference = FileReference {
                alpha: file.alpha,
                beta: file.beta,
                sigma: file.sigma,
            };
            return Ok((file.potential, reference));
        }
        let g = || parse_number(&self.g, ctx);
        let spec = match self.potential {
            PotentialChoice::Harmonic => PotentialSpec::harmonic(ctx),
            PotentialChoice::Quartic => PotentialSpec::quartic(&g()?, ctx),
            PotentialChoice::Doublewell => {
                PotentialSpec::double_well(&parse_number(&self.z2, ctx)?, ctx)
            }
            PotentialChoice::Sextic => PotentialSpec::anharmonic(6, &g()?, ctx)?,
            PotentialChoice::Octic => PotentialSpec::anharmonic(8, &g()?, ctx)?,
            PotentialChoice::Dectic => PotentialSpec::anharmonic(10, &g()?, ctx)?,
            PotentialChoice::Exp => PotentialSpec::transcendental_exp(self.truncation, ctx)?,
            PotentialChoice::Rational => {
                PotentialSpec::rational(&g()?, &parse_number(&self.lambda, ctx)?, ctx)?
            }
            PotentialChoice::Singular => PotentialSpec::singular(&g()?, ctx)?,
        };
        Ok((spec, FileReference::default()))
    }

    /// Configuration-space reference. Flags override the potential file;
    /// a singular term fixes `alpha` unless it is given explicitly.
    pub fn reference(
        &self,
        potential: &PotentialSpec,
        from_file: &FileReference,
        default_beta: &Float,
        ctx: &PrecisionContext,
    ) -> Result<ReferenceFunction, CliError> {
        let beta = match (&self.beta, &from_file.beta) {
            (Some(b), _) => parse_number(b, ctx)?,
            (None, Some(b)) => b.clone(),
            (None, None) => default_beta.clone(),
        };
        let sigma = if self.sigma != 2 {
            self.sigma
        } else {
            from_file.sigma.unwrap_or(2)
        };
        let alpha = match (&self.alpha, &from_file.alpha) {
            (Some(a), _) => Some(parse_number(a, ctx)?),
            (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let reference = match alpha {
            Some(a) => ReferenceFunction::new(a, beta, sigma)?,
            None if !potential.singular_coeff().is_zero() => {
                let r = ReferenceFunction::for_singular(potential.singular_coeff(), &beta, ctx)?;
                ReferenceFunction::new(r.alpha, r.beta, sigma)?
            }
            None => ReferenceFunction::new(ctx.zero(), beta, sigma)?,
        };
        Ok(reference)
    }

    /// Explicit `--emin/--emax` window, or one sized for the lowest levels.
    pub fn window(
        &self,
        potential: &PotentialSpec,
        ctx: &PrecisionContext,
    ) -> Result<ScanWindow, CliError> {
        let auto = ScanWindow::default_for(potential, 4, ctx);
        let lo = match &self.emin {
            Some(s) => parse_number(s, ctx)?,
            None => auto.e_min,
        };
        let hi = match &self.emax {
            Some(s) => parse_number(s, ctx)?,
            None => auto.e_max,
        };
        Ok(ScanWindow::new(lo, hi, self.grid)?)
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let ctx = self.context()?;
        let (potential, from_file) = self.potential(&ctx)?;
        let reference = self.reference(&potential, &from_file, &ctx.ratio(1, 2), &ctx)?;
        let window = self.window(&potential, &ctx)?;
        Ok(Setup {
            ctx,
            potential,
            reference,
            window,
        })
    }
}

/// Reference parameters supplied by a potential file.
#[derive(Debug, Clone, Default)]
pub struct FileReference {
    pub alpha: Option<Float>,
    pub beta: Option<Float>,
    pub sigma: Option<u32>,
}
