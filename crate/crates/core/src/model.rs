//! Potentials, reference functions and the linear ODEs they induce.
//!
//! A wavefunction is represented as `Psi(x) = P(x) R(x)` with the reference
//! function `R(x) = x^alpha exp(-beta x^sigma)`. Everything downstream works
//! from a [`LinearOde`] with Laurent-polynomial coefficients, so modified
//! representations (a rational potential cleared of its denominator, the
//! sextic with its quartic exponential factored out) plug into the same
//! recurrence and moment machinery as the plain Schrödinger equation.

use std::collections::BTreeMap;
use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::poly::Laurent;
use crate::precision::{format_significant, PrecisionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Index of the lowest nonvanishing coefficient (normalized to 1).
    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn sign(self) -> &'static str {
        match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(Error::Input(format!("unknown parity '{other}'"))),
        }
    }
}

/// `g x^2 / (1 + lambda x^2)` added to the polynomial part.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTerm {
    pub g: Float,
    pub lambda: Float,
}

/// A symmetric potential: even power series, an optional `g/x^2` term and
/// an optional rational term.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    even_series: BTreeMap<u32, Float>,
    singular_coeff: Float,
    series_truncation: Option<u32>,
    rational: Option<RationalTerm>,
}

impl PotentialSpec {
    /// General constructor; validates every invariant.
    pub fn new(
        even_series: BTreeMap<u32, Float>,
        singular_coeff: Float,
        series_truncation: Option<u32>,
        rational: Option<RationalTerm>,
    ) -> Result<Self> {
        for k in even_series.keys() {
            if k % 2 != 0 || *k < 2 {
                return Err(Error::Input(format!(
                    "potential powers must be even and at least 2, got x^{k}"
                )));
            }
        }
        if !singular_coeff.is_zero() {
            let quarter = Float::with_val(singular_coeff.prec(), -0.25);
            if singular_coeff <= quarter {
                return Err(Error::Input(
                    "singular coefficient must exceed -1/4 for a real exponent".into(),
                ));
            }
        }
        if let Some(t) = series_truncation {
            if t < 2 || t % 2 != 0 {
                return Err(Error::Input(format!(
                    "series truncation must be an even power >= 2, got {t}"
                )));
            }
            if even_series.values().any(|c| *c < 0) {
                return Err(Error::Input(
                    "series-defined potentials must have non-negative (non-alternating) coefficients"
                        .into(),
                ));
            }
        }
        if let Some(r) = &rational {
            if r.lambda <= 0 {
                return Err(Error::Input("rational term needs lambda > 0".into()));
            }
        }
        let even_series = even_series
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(Self {
            even_series,
            singular_coeff,
            series_truncation,
            rational,
        })
    }

    fn polynomial(terms: impl IntoIterator<Item = (u32, Float)>, ctx: &PrecisionContext) -> Self {
        Self::new(terms.into_iter().collect(), ctx.zero(), None, None)
            .expect("constructor arguments satisfy the invariants")
    }

    pub fn harmonic(ctx: &PrecisionContext) -> Self {
        Self::polynomial([(2, ctx.float(1))], ctx)
    }

    /// `x^2 + g x^4`.
    pub fn quartic(g: &Float, ctx: &PrecisionContext) -> Self {
        Self::polynomial([(2, ctx.float(1)), (4, ctx.float(g))], ctx)
    }

    /// `-Z^2 x^2 + x^4`.
    pub fn double_well(z_squared: &Float, ctx: &PrecisionContext) -> Self {
        Self::polynomial([(2, ctx.float(-z_squared)), (4, ctx.float(1))], ctx)
    }

    /// `x^2 + g x^power` (sextic, octic, dectic, ...).
    pub fn anharmonic(power: u32, g: &Float, ctx: &PrecisionContext) -> Result<Self> {
        if power < 4 || !power.is_multiple_of(2) {
            return Err(Error::Input(format!(
                "anharmonic power must be even and at least 4, got {power}"
            )));
        }
        Ok(Self::polynomial(
            [(2, ctx.float(1)), (power, ctx.float(g))],
            ctx,
        ))
    }

    /// Taylor series of `exp(x^2) - 1` through `x^truncation`.
    pub fn transcendental_exp(truncation: u32, ctx: &PrecisionContext) -> Result<Self> {
        if truncation < 2 || !truncation.is_multiple_of(2) {
            return Err(Error::Input(format!(
                "truncation must be an even power >= 2, got {truncation}"
            )));
        }
        let mut series = BTreeMap::new();
        let mut coeff = ctx.float(1);
        for k in 1..=truncation / 2 {
            coeff /= k;
            series.insert(2 * k, coeff.clone());
        }
        Self::new(series, ctx.zero(), Some(truncation), None)
    }

    /// Series-defined potential; the coefficients must be non-negative.
    pub fn series(
        coeffs: impl IntoIterator<Item = (u32, Float)>,
        truncation: u32,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        Self::new(
            coeffs.into_iter().collect(),
            ctx.zero(),
            Some(truncation),
            None,
        )
    }

    /// `x^2 + g/x^2`.
    pub fn singular(g: &Float, ctx: &PrecisionContext) -> Result<Self> {
        Self::new(
            [(2, ctx.float(1))].into_iter().collect(),
            ctx.float(g),
            None,
            None,
        )
    }

    /// `x^2 + g x^2/(1 + lambda x^2)`.
    pub fn rational(g: &Float, lambda: &Float, ctx: &PrecisionContext) -> Result<Self> {
        if *lambda <= 0 {
            return Err(Error::Input("rational potential needs lambda > 0".into()));
        }
        Self::new(
            [(2, ctx.float(1))].into_iter().collect(),
            ctx.zero(),
            None,
            Some(RationalTerm {
                g: ctx.float(g),
                lambda: ctx.float(lambda),
            }),
        )
    }

    pub fn even_series(&self) -> &BTreeMap<u32, Float> {
        &self.even_series
    }

    pub fn singular_coeff(&self) -> &Float {
        &self.singular_coeff
    }

    pub fn series_truncation(&self) -> Option<u32> {
        self.series_truncation
    }

    pub fn rational_term(&self) -> Option<&RationalTerm> {
        self.rational.as_ref()
    }

    pub fn is_polynomial(&self) -> bool {
        self.singular_coeff.is_zero() && self.rational.is_none()
    }

    pub fn max_power(&self) -> u32 {
        self.even_series.keys().next_back().copied().unwrap_or(0)
    }

    /// Coefficient of `x^2` in the small-`x` expansion (used for default
    /// scan windows).
    pub fn quadratic_coeff(&self, ctx: &PrecisionContext) -> Float {
        let mut c = self
            .even_series
            .get(&2)
            .cloned()
            .unwrap_or_else(|| ctx.zero());
        if let Some(r) = &self.rational {
            c += &r.g;
        }
        ctx.float(c)
    }

    /// Value of the potential at `x` (x != 0 when singular).
    pub fn value(&self, x: &Float, ctx: &PrecisionContext) -> Float {
        let x2 = ctx.float(x * x);
        let mut v = ctx.zero();
        for (k, c) in &self.even_series {
            v += ctx.float(x2.pow_ref_u(k / 2)) * c;
        }
        if !self.singular_coeff.is_zero() {
            v += ctx.float(&self.singular_coeff / &x2);
        }
        if let Some(r) = &self.rational {
            let den = ctx.float(&r.lambda * &x2) + 1u32;
            v += ctx.float(&r.g * &x2) / den;
        }
        v
    }

    fn series_laurent(&self, ctx: &PrecisionContext) -> Laurent {
        let mut p = Laurent::from_terms(
            self.even_series
                .iter()
                .map(|(k, c)| (*k as i32, ctx.float(c))),
        );
        if !self.singular_coeff.is_zero() {
            p = p.add(&Laurent::monomial(-2, ctx.float(&self.singular_coeff)), ctx);
        }
        p
    }

    /// The Schrödinger equation `-Psi'' + V Psi = E Psi` as a linear ODE with
    /// Laurent-polynomial coefficients (rational terms cleared by
    /// multiplying through with `1 + lambda x^2`).
    pub fn ode(&self, ctx: &PrecisionContext) -> LinearOde {
        let v = self.series_laurent(ctx);
        let one = Laurent::monomial(0, ctx.float(1));
        match &self.rational {
            None => LinearOde {
                a: one.neg(),
                b: Laurent::zero(),
                c: v,
                w: one,
            },
            Some(r) => {
                let q = one.add(&Laurent::monomial(2, ctx.float(&r.lambda)), ctx);
                LinearOde {
                    a: q.neg(),
                    b: Laurent::zero(),
                    c: v.mul(&q, ctx)
                        .add(&Laurent::monomial(2, ctx.float(&r.g)), ctx),
                    w: q,
                }
            }
        }
    }

    /// Human-readable formula, e.g. `x^2 + x^4` or `-25*x^2 + x^4`.
    pub fn formula(&self) -> String {
        let mut parts: Vec<String> = self
            .even_series
            .iter()
            .map(|(k, c)| scaled_term(c, &format!("x^{k}")))
            .collect();
        if !self.singular_coeff.is_zero() {
            parts.push(format!("{}/x^2", short(&self.singular_coeff)));
        }
        if let Some(r) = &self.rational {
            parts.push(format!(
                "{}/(1 + {})",
                scaled_term(&r.g, "x^2"),
                scaled_term(&r.lambda, "x^2")
            ));
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        if let Some(t) = self.series_truncation {
            out.push_str(&format!(" [series through x^{t}]"));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Serialize to the potential-definition text format understood by
    /// [`parse_potential_file`].
    pub fn to_file_string(&self, sig: usize) -> String {
        let mut out = String::new();
        for (k, c) in &self.even_series {
            out.push_str(&format!("{k} {}\n", format_significant(c, sig)));
        }
        if !self.singular_coeff.is_zero() {
            out.push_str(&format!(
                "singular {}\n",
                format_significant(&self.singular_coeff, sig)
            ));
        }
        if let Some(r) = &self.rational {
            out.push_str(&format!(
                "rational {} {}\n",
                format_significant(&r.g, sig),
                format_significant(&r.lambda, sig)
            ));
        }
        if let Some(t) = self.series_truncation {
            out.push_str(&format!("truncation {t}\n"));
        }
        out
    }
}

trait PowU {
    fn pow_ref_u(&self, k: u32) -> Float;
}

impl PowU for Float {
    fn pow_ref_u(&self, k: u32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(k))
    }
}

fn short(c: &Float) -> String {
    let s = format_significant(c, 20);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn scaled_term(c: &Float, var: &str) -> String {
    let s = short(c);
    match s.as_str() {
        "1" => var.to_string(),
        "-1" => format!("-{var}"),
        _ => format!("{s}*{var}"),
    }
}

/// Reference function `R(x) = x^alpha exp(-beta x^sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFunction {
    pub alpha: Float,
    pub beta: Float,
    pub sigma: u32,
}

impl ReferenceFunction {
    pub fn new(alpha: Float, beta: Float, sigma: u32) -> Result<Self> {
        if beta <= 0 {
            return Err(Error::Input("reference decay beta must be positive".into()));
        }
        if !(2..=4).contains(&sigma) {
            return Err(Error::Input(format!(
                "reference decay power sigma must be 2, 3 or 4, got {sigma}"
            )));
        }
        if alpha < 0 {
            return Err(Error::Input("reference exponent alpha must be >= 0".into()));
        }
        Ok(Self { alpha, beta, sigma })
    }

    /// `exp(-beta x^2)`.
    pub fn gaussian(beta: &Float, ctx: &PrecisionContext) -> Result<Self> {
        Self::new(ctx.zero(), ctx.float(beta), 2)
    }

    /// `x^alpha exp(-beta x^2)` with `alpha = (1 + sqrt(1 + 4g))/2`, the
    /// regular exponent at the `g/x^2` singularity.
    pub fn for_singular(g: &Float, beta: &Float, ctx: &PrecisionContext) -> Result<Self> {
        let disc = ctx.float(g * 4u32) + 1u32;
        if disc <= 0 {
            return Err(Error::Input("singular coefficient must exceed -1/4".into()));
        }
        let alpha = (disc.sqrt() + 1u32) / 2u32;
        Self::new(alpha, ctx.float(beta), 2)
    }
}

/// `A(x) y'' + B(x) y' + (C(x) - E W(x)) y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOde {
    pub a: Laurent,
    pub b: Laurent,
    pub c: Laurent,
    pub w: Laurent,
}

impl LinearOde {
    /// ODE for `y` where the original unknown is `y * q(x) * exp(h(x))`.
    ///
    /// The transformed equation is multiplied through by `q` so that all
    /// coefficients stay polynomial.
    pub fn substitute(&self, q: &Laurent, h: &Laurent, ctx: &PrecisionContext) -> LinearOde {
        let dq = q.derivative(ctx);
        let ddq = dq.derivative(ctx);
        let dh = h.derivative(ctx);
        let ddh = dh.derivative(ctx);
        let two = ctx.float(2);
        // F'/F * q and F''/F * q for F = q e^h.
        let first = dq.add(&q.mul(&dh, ctx), ctx);
        let second = Laurent::sum(
            [
                &ddq,
                &dq.mul(&dh, ctx).scale(&two, ctx),
                &q.mul(&ddh, ctx),
                &q.mul(&dh.mul(&dh, ctx), ctx),
            ],
            ctx,
        );
        LinearOde {
            a: self.a.mul(q, ctx),
            b: self
                .a
                .mul(&first, ctx)
                .scale(&two, ctx)
                .add(&self.b.mul(q, ctx), ctx),
            c: Laurent::sum(
                [
                    &self.a.mul(&second, ctx),
                    &self.b.mul(&first, ctx),
                    &self.c.mul(q, ctx),
                ],
                ctx,
            ),
            w: self.w.mul(q, ctx),
        }
    }

    /// Divide all four coefficients by a common polynomial factor.
    pub fn divide_common(&self, factor: &Laurent, ctx: &PrecisionContext) -> Result<LinearOde> {
        let div = |p: &Laurent| {
            p.div_exact(factor, ctx).ok_or_else(|| {
                Error::Derivation(format!("coefficient {p} is not divisible by {factor}"))
            })
        };
        Ok(LinearOde {
            a: div(&self.a)?,
            b: div(&self.b)?,
            c: div(&self.c)?,
            w: div(&self.w)?,
        })
    }

    pub fn is_polynomial(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.w]
            .iter()
            .all(|p| p.min_power().is_none_or(|k| k >= 0))
    }
}

impl fmt::Display for LinearOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})y'' + ({})y' + ({} - E*({}))y = 0",
            self.a, self.b, self.c, self.w
        )
    }
}

/// A potential together with the ODE of a modified wavefunction whose
/// moments or series close without extra unknowns.
#[derive(Debug, Clone)]
pub struct ModifiedSystem {
    pub potential: PotentialSpec,
    pub ode: LinearOde,
    pub description: String,
}

/// `V = x^2 + g x^2/(1 + lambda x^2)` rewritten for
/// `Psi~ = Psi exp(-x^2/2) / (1 + lambda x^2)`.
pub fn modified_rational(
    g: &Float,
    lambda: &Float,
    ctx: &PrecisionContext,
) -> Result<ModifiedSystem> {
    if *g < 0 {
        return Err(Error::Input("rational potential needs g >= 0".into()));
    }
    let potential = PotentialSpec::rational(g, lambda, ctx)?;
    let q = Laurent::from_terms([(0, ctx.float(1)), (2, ctx.float(lambda))]);
    let h = Laurent::monomial(2, ctx.ratio(1, 2));
    let ode = potential
        .ode(ctx)
        .substitute(&q, &h, ctx)
        .divide_common(&q, ctx)?;
    Ok(ModifiedSystem {
        potential,
        ode,
        description: "Psi~ = Psi exp(-x^2/2)/(1 + lambda x^2)".into(),
    })
}

/// Sextic `x^2 + g x^6` rewritten for `Psi~ = Psi exp(-sqrt(g) x^4/4)`; the
/// `x^6` term cancels.
pub fn modified_sextic(g: &Float, ctx: &PrecisionContext) -> Result<ModifiedSystem> {
    if *g <= 0 {
        return Err(Error::Input("sextic coupling must be positive".into()));
    }
    let potential = PotentialSpec::anharmonic(6, g, ctx)?;
    let root = ctx.float(g.sqrt_ref());
    let h = Laurent::monomial(4, root / 4u32);
    let one = Laurent::monomial(0, ctx.float(1));
    let ode = potential.ode(ctx).substitute(&one, &h, ctx);
    Ok(ModifiedSystem {
        potential,
        ode,
        description: "Psi~ = Psi exp(-sqrt(g) x^4/4)".into(),
    })
}

/// Contents of a potential-definition file.
#[derive(Debug, Clone)]
pub struct PotentialFile {
    pub potential: PotentialSpec,
    pub alpha: Option<Float>,
    pub beta: Option<Float>,
    pub sigma: Option<u32>,
}

/// Parse the text format
///
/// ```text
/// # comment
/// 2 1          # power coefficient
/// 4 0.5
/// singular 2
/// rational 0.1 0.1
/// truncation 80
/// sigma 2
/// alpha 0
/// beta 1
/// ```
pub fn parse_potential_file(text: &str, ctx: &PrecisionContext) -> Result<PotentialFile> {
    let mut series = BTreeMap::new();
    let mut singular = ctx.zero();
    let mut rational = None;
    let mut truncation = None;
    let (mut alpha, mut beta, mut sigma) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| ctx.parse(s).map_err(|e| err(e.to_string()));
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(err(format!("expected {} fields", n)))
            }
        };
        match fields[0] {
            "singular" => {
                arity(2)?;
                singular = num(fields[1])?;
            }
            "rational" => {
                arity(3)?;
                rational = Some(RationalTerm {
                    g: num(fields[1])?,
                    lambda: num(fields[2])?,
                });
            }
            "truncation" => {
                arity(2)?;
                truncation = Some(
                    fields[1]
                        .parse::<u32>()
                        .map_err(|e| err(format!("bad truncation: {e}")))?,
                );
            }
            "sigma" => {
                arity(2)?;
                sigma = Some(
                    fields[1]
                        .parse::<u32>()
                        .map_err(|e| err(format!("bad sigma: {e}")))?,
                );
            }
            "alpha" => {
                arity(2)?;
                alpha = Some(num(fields[1])?);
            }
            "beta" => {
                arity(2)?;
                beta = Some(num(fields[1])?);
            }
            power => {
                arity(2)?;
                let k = power
                    .parse::<u32>()
                    .map_err(|_| err(format!("unknown directive '{power}'")))?;
                if series.insert(k, num(fields[1])?).is_some() {
                    return Err(err(format!("power {k} given twice")));
                }
            }
        }
    }
    let potential = PotentialSpec::new(series, singular, truncation, rational)?;
    Ok(PotentialFile {
        potential,
        alpha,
        beta,
        sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(40).unwrap()
    }

    #[test]
    fn quartic_constructors() {
        let ctx = ctx();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        assert_eq!(v.even_series().len(), 2);
        assert_eq!(v.even_series()[&4], 1);
        assert_eq!(v.formula(), "x^2 + x^4");
        let h = PotentialSpec::quartic(&ctx.zero(), &ctx);
        assert_eq!(h, PotentialSpec::harmonic(&ctx));
        assert_eq!(h.formula(), "x^2");
        let dw = PotentialSpec::double_well(&ctx.float(1), &ctx);
        assert_eq!(dw.even_series()[&2], -1);
        assert_eq!(dw.formula(), "-x^2 + x^4");
        let dw = PotentialSpec::double_well(&ctx.float(25), &ctx);
        assert_eq!(dw.formula(), "-25*x^2 + x^4");
    }

    #[test]
    fn exponential_series() {
        let ctx = ctx();
        let v = PotentialSpec::transcendental_exp(4, &ctx).unwrap();
        assert_eq!(v.even_series()[&2], 1);
        assert_eq!(v.even_series()[&4], 0.5);
        let v = PotentialSpec::transcendental_exp(6, &ctx).unwrap();
        assert_eq!(v.even_series()[&6], ctx.ratio(1, 6));
        let v = PotentialSpec::transcendental_exp(80, &ctx).unwrap();
        assert_eq!(v.even_series().len(), 40);
        assert!(PotentialSpec::transcendental_exp(5, &ctx).is_err());
    }

    #[test]
    fn alternating_series_rejected() {
        let ctx = ctx();
        let bad = PotentialSpec::series([(2, ctx.float(1)), (4, ctx.float(-1))], 4, &ctx);
        assert!(matches!(bad, Err(Error::Input(_))));
        let odd_power = PotentialSpec::new(
            [(3, ctx.float(1))].into_iter().collect(),
            ctx.zero(),
            None,
            None,
        );
        assert!(odd_power.is_err());
    }

    #[test]
    fn singular_bounds_and_reference() {
        let ctx = ctx();
        assert!(PotentialSpec::singular(&ctx.float(-1), &ctx).is_err());
        let v = PotentialSpec::singular(&ctx.float(2), &ctx).unwrap();
        assert_eq!(v.formula(), "x^2 + 2/x^2");
        let r = ReferenceFunction::for_singular(&ctx.float(2), &ctx.ratio(1, 2), &ctx).unwrap();
        assert_eq!(r.alpha, 2);
        let check = ctx.float(&r.alpha * &r.alpha) - &r.alpha;
        assert_eq!(check, 2);
    }

    #[test]
    fn reference_validation() {
        let ctx = ctx();
        assert!(ReferenceFunction::new(ctx.zero(), ctx.zero(), 2).is_err());
        assert!(ReferenceFunction::new(ctx.zero(), ctx.float(1), 5).is_err());
        assert!(ReferenceFunction::new(ctx.float(-1), ctx.float(1), 2).is_err());
        assert!(ReferenceFunction::new(ctx.zero(), ctx.float(1), 3).is_ok());
    }

    #[test]
    fn rational_formula_and_validation() {
        let ctx = ctx();
        let tenth = ctx.parse("0.1").unwrap();
        let v = PotentialSpec::rational(&tenth, &tenth, &ctx).unwrap();
        assert_eq!(v.formula(), "x^2 + 0.1*x^2/(1 + 0.1*x^2)");
        assert!(modified_rational(&tenth, &ctx.zero(), &ctx).is_err());
        assert!(modified_rational(&tenth, &ctx.float(-1), &ctx).is_err());
    }

    #[test]
    fn modified_rational_matches_hand_derivation() {
        // Substituting Psi = (1 + l x^2) e^{x^2/2} y and dividing by (1 + l x^2):
        // -(1 + l x^2) y'' - (2 + 4l) x y' - 2l x^3 y'
        //   + [-(1 + 2l) + (g - 5l) x^2 - E (1 + l x^2)] y = 0
        let ctx = ctx();
        let g = ctx.parse("0.3").unwrap();
        let l = ctx.parse("0.1").unwrap();
        let m = modified_rational(&g, &l, &ctx).unwrap();
        let c = |p: &Laurent, k: i32| p.coeff(k).map(|x| x.to_f64()).unwrap_or(0.0);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-30;
        assert!(close(c(&m.ode.a, 0), -1.0) && close(c(&m.ode.a, 2), -0.1));
        assert!(close(c(&m.ode.b, 1), -2.4) && close(c(&m.ode.b, 3), -0.2));
        assert!(close(c(&m.ode.c, 0), -1.2) && close(c(&m.ode.c, 2), -0.2));
        assert!(close(c(&m.ode.w, 0), 1.0) && close(c(&m.ode.w, 2), 0.1));
        assert_eq!(m.ode.a.max_power(), Some(2));
        assert_eq!(m.ode.c.max_power(), Some(2));
    }

    #[test]
    fn modified_sextic_cancels_top_power() {
        let ctx = ctx();
        let m = modified_sextic(&ctx.float(2), &ctx).unwrap();
        // -y'' - 2 sqrt(g) x^3 y' + (1 - 3 sqrt(g)) x^2 y = E y
        let root = ctx.float(2).sqrt();
        assert_eq!(m.ode.c.max_power(), Some(2));
        assert_eq!(m.ode.b.coeff(3), Some(&(-ctx.float(&root * 2u32))));
        let expected = ctx.float(1) - ctx.float(&root * 3u32);
        let diff = ctx.float(m.ode.c.coeff(2).unwrap() - &expected).abs();
        assert!(diff < *ctx.zero_tol());
        assert!(modified_sextic(&ctx.zero(), &ctx).is_err());
    }

    #[test]
    fn potential_file_round_trip() {
        let ctx = ctx();
        let tenth = ctx.parse("0.1").unwrap();
        for v in [
            PotentialSpec::quartic(&ctx.float(1), &ctx),
            PotentialSpec::double_well(&ctx.float(15), &ctx),
            PotentialSpec::transcendental_exp(12, &ctx).unwrap(),
            PotentialSpec::singular(&ctx.float(2), &ctx).unwrap(),
            PotentialSpec::rational(&tenth, &tenth, &ctx).unwrap(),
        ] {
            let text = v.to_file_string(60);
            let back = parse_potential_file(&text, &ctx).unwrap();
            assert_eq!(back.potential.formula(), v.formula(), "{text}");
        }
        let f = parse_potential_file("2 1\n6 1 # sextic\nsigma 3\nbeta 0.5\n", &ctx).unwrap();
        assert_eq!(f.potential.formula(), "x^2 + x^6");
        assert_eq!(f.sigma, Some(3));
        assert_eq!(f.beta, Some(ctx.ratio(1, 2)));
        let bad = parse_potential_file("2 1\nfoo 3\n", &ctx).unwrap_err();
        assert!(matches!(bad, Error::Parse { line: 2, .. }));
    }
}
