//! Sparse Laurent polynomials in `x` with big-real coefficients.
//!
//! Sums cancel exactly: when a coefficient is smaller than the zero
//! tolerance relative to its largest contribution it is dropped, so terms
//! such as `g - (sqrt g)^2` disappear instead of leaving a rounding residue
//! that would change the shape of a recurrence.

use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::Float;

use crate::precision::PrecisionContext;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Laurent {
    terms: BTreeMap<i32, Float>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(power: i32, coeff: Float) -> Self {
        let mut p = Self::zero();
        if !coeff.is_zero() {
            p.terms.insert(power, coeff);
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, Float)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            if c.is_zero() {
                continue;
            }
            match p.terms.get_mut(&k) {
                Some(existing) => *existing += c,
                None => {
                    p.terms.insert(k, c);
                }
            }
        }
        p.terms.retain(|_, c| !c.is_zero());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, power: i32) -> Option<&Float> {
        self.terms.get(&power)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Float)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self, ctx: &PrecisionContext) -> Self {
        let mut out = BTreeMap::new();
        for k in self.terms.keys().chain(other.terms.keys()) {
            if out.contains_key(k) {
                continue;
            }
            let sum = match (self.terms.get(k), other.terms.get(k)) {
                (Some(a), Some(b)) => cancel(ctx.float(a + b), [a, b], ctx),
                (Some(a), None) | (None, Some(a)) => Some(a.clone()),
                (None, None) => None,
            };
            if let Some(c) = sum {
                out.insert(*k, c);
            }
        }
        Self { terms: out }
    }

    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a Laurent>, ctx: &PrecisionContext) -> Self {
        parts
            .into_iter()
            .fold(Self::zero(), |acc, p| acc.add(p, ctx))
    }

    pub fn scale(&self, factor: &Float, ctx: &PrecisionContext) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, ctx.float(c * factor))))
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self, ctx: &PrecisionContext) -> Self {
        let mut acc = Self::zero();
        for (a, x) in &self.terms {
            let row = Self::from_terms(other.terms.iter().map(|(b, y)| (a + b, ctx.float(x * y))));
            acc = acc.add(&row, ctx);
        }
        acc
    }

    pub fn derivative(&self, ctx: &PrecisionContext) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| **k != 0)
                .map(|(k, c)| (k - 1, ctx.float(c * *k))),
        )
    }

    /// Exact division by `divisor`, or `None` when the remainder does not
    /// cancel. Both operands must be ordinary polynomials.
    pub fn div_exact(&self, divisor: &Self, ctx: &PrecisionContext) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (dmin, dmax) = (divisor.min_power()?, divisor.max_power()?);
        if dmin < 0 || self.min_power()? < 0 {
            return None;
        }
        let lead = divisor.terms[&dmax].clone();
        let mut rem = self.clone();
        let mut quotient = Self::zero();
        while let Some(top) = rem.max_power() {
            if top < dmax {
                return None;
            }
            let factor = ctx.float(&rem.terms[&top] / &lead);
            let step = Self::monomial(top - dmax, factor);
            rem = rem.add(&step.mul(divisor, ctx).neg(), ctx);
            if rem.coeff(top).is_some() {
                // Leading term failed to cancel.
                return None;
            }
            quotient = quotient.add(&step, ctx);
        }
        Some(quotient)
    }

    pub fn eval(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        let mut acc = ctx.zero();
        for (k, c) in &self.terms {
            let mut term = ctx.float(x.pow(*k));
            term *= c;
            acc += term;
        }
        acc
    }
}

/// Drop `sum` when it is a rounding residue of its contributions.
fn cancel(sum: Float, parts: [&Float; 2], ctx: &PrecisionContext) -> Option<Float> {
    if sum.is_zero() {
        return None;
    }
    let scale = if parts[0].cmp_abs(parts[1]) == Some(std::cmp::Ordering::Less) {
        parts[1]
    } else {
        parts[0]
    };
    let threshold = ctx.float(scale.abs_ref()) * ctx.zero_tol();
    if ctx.float(sum.abs_ref()) <= threshold {
        None
    } else {
        Some(sum)
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let s = crate::precision::format_significant(c, 12);
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{s}")?,
                1 => write!(f, "{s}*x")?,
                _ => write!(f, "{s}*x^{k}")?,
            }
        }
        Ok(())
    }
}
