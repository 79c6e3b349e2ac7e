//! Working-precision contract shared by every solver module.
//!
//! All big-real arithmetic runs on MPFR floats whose binary precision is
//! derived from a decimal digit count. MPFR rounds every operation
//! correctly, so identical inputs under identical contexts give identical
//! digit strings.
//!
//! The module also hosts the decimal digit accounting used to compare
//! energies: [`agreeing_digits`] and [`matched_digits`] count significant
//! digits up to one unit in the last place.

use rug::float::Round;
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Smallest supported working precision in decimal digits.
pub const MIN_DIGITS: u32 = 30;

/// Guard bits carried on top of the requested decimal precision.
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    digits: u32,
    bits: u32,
    zero_tol: Float,
}

impl PrecisionContext {
    /// Context with `digits` decimal digits and the default zero tolerance
    /// `10^(-digits+10)`.
    pub fn with_digits(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::Config(format!(
                "working precision must be at least {MIN_DIGITS} digits, got {digits}"
            )));
        }
        let bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS;
        let zero_tol = Float::with_val(bits, 10u32).pow(10 - digits as i32);
        Ok(Self {
            digits,
            bits,
            zero_tol,
        })
    }

    /// Replace the zero tolerance; it must lie in `(0, 10^(-digits/2))`.
    pub fn with_zero_tol(mut self, tol: Float) -> Result<Self> {
        let ceiling = self.pow10(-(self.digits as i32) / 2);
        if tol <= 0 || tol >= ceiling {
            return Err(Error::Config(format!(
                "zero tolerance must lie in (0, 1e-{}), got {}",
                self.digits / 2,
                tol.to_string_radix(10, Some(6))
            )));
        }
        self.zero_tol = Float::with_val(self.bits, tol);
        Ok(self)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision handed to MPFR.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn zero_tol(&self) -> &Float {
        &self.zero_tol
    }

    /// A float at working precision holding `value` (correctly rounded).
    pub fn float<T>(&self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, value)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    /// Parse an exact decimal string such as `"0.1"`, `"-25"` or `"1e-3"`.
    ///
    /// Digit-group spaces and underscores are ignored, so table values
    /// like `"1.392 351 641"` parse directly.
    pub fn parse(&self, text: &str) -> Result<Float> {
        let cleaned: String = text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .collect();
        let parsed = Float::parse(&cleaned)
            .map_err(|e| Error::Input(format!("cannot parse '{text}' as a real number: {e}")))?;
        Ok(Float::with_val(self.bits, parsed))
    }

    /// Exact rational `num/den` rounded to working precision.
    pub fn ratio(&self, num: i64, den: i64) -> Float {
        let mut x = self.float(num);
        x /= den;
        x
    }

    pub fn pow10(&self, exponent: i32) -> Float {
        Float::with_val(self.bits, 10u32).pow(exponent)
    }

    /// Energy tolerance for bisection, `10^(-digits+8)`.
    pub fn bisection_tol(&self) -> Float {
        self.pow10(8 - self.digits as i32)
    }

    /// Positional decimal string with the context's full digit count.
    pub fn format(&self, x: &Float) -> String {
        format_significant(x, self.digits as usize)
    }
}

/// Positional decimal rendering of `x` with `sig` significant digits
/// (round to nearest), e.g. `-149.2194561421...`.
pub fn format_significant(x: &Float, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.into();
    }
    let (negative, digits, exp) = x.to_sign_string_exp_round(10, Some(sig.max(1)), Round::Nearest);
    let Some(exp) = exp else {
        return "0".into();
    };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let len = digits.len() as i32;
    if exp <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp) as usize));
        out.push_str(&digits);
    } else if exp >= len {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (exp - len) as usize));
    } else {
        out.push_str(&digits[..exp as usize]);
        out.push('.');
        out.push_str(&digits[exp as usize..]);
    }
    out
}

/// `floor(log10 |x|)` for nonzero finite `x`.
fn decimal_exponent(x: &Float) -> i64 {
    let mut l = Float::with_val(x.prec(), x.abs_ref());
    l.log10_mut();
    l.floor_mut();
    l.to_f64() as i64
}

/// Number of significant digits on which `a` and `b` agree, counted as the
/// largest `k` with `|a - b| <= 10^(e-k+1)` where `e` is the decimal exponent
/// of the larger magnitude. Identical values return `cap`.
pub fn agreeing_digits(a: &Float, b: &Float, cap: u32) -> u32 {
    let prec = a.prec().max(b.prec());
    let diff = Float::with_val(prec, a - b).abs();
    if diff.is_zero() {
        return cap;
    }
    let larger = if a.cmp_abs(b) == Some(std::cmp::Ordering::Less) {
        b
    } else {
        a
    };
    if larger.is_zero() {
        return 0;
    }
    digits_within(&diff, decimal_exponent(larger), cap)
}

fn digits_within(diff: &Float, leading_exponent: i64, cap: u32) -> u32 {
    let mut l = Float::with_val(diff.prec(), diff.log10_ref());
    l = Float::with_val(diff.prec(), (leading_exponent + 1) as f64) - l;
    l.floor_mut();
    let k = l.to_f64();
    if k <= 0.0 {
        0
    } else {
        (k as u64).min(u64::from(cap)) as u32
    }
}

/// Count of significant digits in a printed decimal string.
pub fn significant_digits(printed: &str) -> u32 {
    let digits: String = printed
        .chars()
        .take_while(|c| !matches!(c, 'e' | 'E'))
        .filter(|c| c.is_ascii_digit())
        .collect();
    digits.trim_start_matches('0').len() as u32
}

/// Decimal exponent of the leading significant digit of a printed value.
fn printed_exponent(printed: &str) -> Option<i64> {
    let body: String = printed
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .collect();
    let body = body.trim_start_matches(['-', '+']);
    let (mantissa, exp_part) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let int_trim = int_part.trim_start_matches('0');
    if !int_trim.is_empty() {
        return Some(int_trim.len() as i64 - 1 + exp_part);
    }
    let zeros = frac_part.chars().take_while(|c| *c == '0').count();
    if zeros == frac_part.len() {
        return None;
    }
    Some(-(zeros as i64) - 1 + exp_part)
}

/// How many of the printed significant digits of `printed` the computed
/// value reproduces, to within one unit in the last matched place.
///
/// Both truncated and rounded table entries count as fully matched when
/// the computed value is accurate.
pub fn matched_digits(computed: &Float, printed: &str, ctx: &PrecisionContext) -> Result<u32> {
    let reference = ctx.parse(printed)?;
    let available = significant_digits(printed);
    let Some(exponent) = printed_exponent(printed) else {
        return Err(Error::Input(format!(
            "'{printed}' has no significant digits"
        )));
    };
    let diff = ctx.float(computed - &reference).abs();
    if diff.is_zero() {
        return Ok(available);
    }
    Ok(digits_within(&diff, exponent, available))
}
