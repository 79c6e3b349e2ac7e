//! Linear recurrences for the coefficients of `P(x)` in `Psi = P(x) R(x)`.
//!
//! Substituting `Psi = P R` into `A Psi'' + B Psi' + (C - E W) Psi = 0` and
//! dividing by `R` gives an ODE for `P` with Laurent coefficients. A term
//! `c x^k P^(d)` shifts the index by `d - k`; collecting powers of `x` turns
//! every term into a weight on `a_{n - lag}` that is a polynomial of degree
//! at most 2 in `n` and at most 1 in `E`.

use rug::Float;

use crate::error::{Error, Result};
use crate::model::{LinearOde, Parity, PotentialSpec, ReferenceFunction};
use crate::poly::Laurent;
use crate::precision::PrecisionContext;

/// Polynomial `c0 + c1 n + c2 n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NPoly(pub [Float; 3]);

impl NPoly {
    fn zero(ctx: &PrecisionContext) -> Self {
        Self([ctx.zero(), ctx.zero(), ctx.zero()])
    }

    /// `c * (n - lag)(n - lag - 1)...` with `d` falling factors.
    fn falling(c: &Float, lag: i64, d: u32, ctx: &PrecisionContext) -> Self {
        // Coefficients of prod_{i<d} (n - lag - i) in n.
        let mut p = [ctx.float(1), ctx.zero(), ctx.zero()];
        for i in 0..d {
            let shift = -(lag + i64::from(i));
            let mut next = [ctx.zero(), ctx.zero(), ctx.zero()];
            for deg in 0..3 {
                next[deg] += ctx.float(&p[deg] * shift);
                if deg > 0 {
                    next[deg] += &p[deg - 1];
                }
            }
            p = next;
        }
        Self(p.map(|x| ctx.float(x * c)))
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, n: usize, ctx: &PrecisionContext) -> Float {
        let n = ctx.float(n as u64);
        let mut v = ctx.float(&self.0[2] * &n);
        v += &self.0[1];
        v *= &n;
        v += &self.0[0];
        v
    }

    /// Sum of coefficient magnitudes weighted by powers of `n`.
    fn magnitude(&self, n: usize, ctx: &PrecisionContext) -> Float {
        let n = ctx.float(n as u64);
        let mut v = ctx.float(self.0[2].abs_ref()) * &n;
        v += ctx.float(self.0[1].abs_ref());
        v *= &n;
        v += ctx.float(self.0[0].abs_ref());
        v
    }
}

/// Weight `base(n) + E energy(n)` on `a_{n - lag}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagWeight {
    pub lag: usize,
    pub base: NPoly,
    pub energy: NPoly,
}

/// `divisor(n) a_n = sum_lag (base(n) + E energy(n)) a_{n-lag}`, with
/// `a_n = 0` for `n < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    lags: Vec<LagWeight>,
    divisor: NPoly,
    parity: Parity,
    parity_coupled: bool,
    max_lag: usize,
    series_truncation: Option<u32>,
}

/// `a_0 .. a_N` at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    pub energy: Float,
    pub values: Vec<Float>,
    pub order: usize,
}

impl Recurrence {
    /// Recurrence for the Schrödinger equation of `potential` expanded over
    /// `reference`.
    pub fn derive(
        potential: &PotentialSpec,
        reference: &ReferenceFunction,
        parity: Parity,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        if !reference.alpha.is_zero() && potential.singular_coeff().is_zero() {
            return Err(Error::Derivation(
                "a nonzero prefactor exponent alpha needs a singular g/x^2 term".into(),
            ));
        }
        let mut rec = Self::from_ode(&potential.ode(ctx), reference, parity, ctx)?;
        rec.series_truncation = potential.series_truncation();
        Ok(rec)
    }

    /// Recurrence for an arbitrary linear ODE with Laurent coefficients.
    pub fn from_ode(
        ode: &LinearOde,
        reference: &ReferenceFunction,
        parity: Parity,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        if !reference.alpha.is_zero() && parity == Parity::Odd {
            return Err(Error::Derivation(
                "odd parity is not available with an x^alpha prefactor".into(),
            ));
        }
        let sigma = reference.sigma as i32;
        // w = R'/R = alpha/x - beta sigma x^(sigma-1)
        let w = Laurent::from_terms([
            (-1, ctx.float(&reference.alpha)),
            (sigma - 1, ctx.float(-(&reference.beta * ctx.float(sigma)))),
        ]);
        let two = ctx.float(2);
        let a2 = ode.a.clone();
        let b2 = ode.a.mul(&w, ctx).scale(&two, ctx).add(&ode.b, ctx);
        let c2 = Laurent::sum(
            [
                &ode.a.mul(&w.derivative(ctx).add(&w.mul(&w, ctx), ctx), ctx),
                &ode.b.mul(&w, ctx),
                &ode.c,
            ],
            ctx,
        );

        // (derivative order, power, coefficient, multiplies E)
        let mut terms: Vec<(u32, i32, Float, bool)> = Vec::new();
        for (d, p) in [(2u32, &a2), (1, &b2), (0, &c2)] {
            for (k, c) in p.terms() {
                terms.push((d, k, c.clone(), false));
            }
        }
        for (k, c) in ode.w.terms() {
            terms.push((0, k, ctx.float(-c), true));
        }
        if terms.is_empty() {
            return Err(Error::Derivation("empty differential equation".into()));
        }
        let jmax = terms
            .iter()
            .map(|(d, k, _, _)| *d as i32 - k)
            .max()
            .unwrap();

        let mut divisor = NPoly::zero(ctx);
        let mut by_lag: std::collections::BTreeMap<usize, LagWeight> = Default::default();
        for (d, k, c, is_e) in &terms {
            let lag = (jmax - (*d as i32 - k)) as usize;
            let poly = NPoly::falling(c, lag as i64, *d, ctx);
            if lag == 0 {
                if *is_e {
                    return Err(Error::Derivation(
                        "energy enters the leading divisor; the recurrence is not explicit".into(),
                    ));
                }
                divisor.add_assign(&poly);
                continue;
            }
            let entry = by_lag.entry(lag).or_insert_with(|| LagWeight {
                lag,
                base: NPoly::zero(ctx),
                energy: NPoly::zero(ctx),
            });
            if *is_e {
                entry.energy.add_assign(&poly);
            } else {
                entry.base.add_assign(&poly);
            }
        }
        // Move the lag-0 group to the left-hand side.
        for c in divisor.0.iter_mut() {
            *c = ctx.float(-&*c);
        }
        let lags: Vec<LagWeight> = by_lag
            .into_values()
            .filter(|w| !(w.base.is_zero() && w.energy.is_zero()))
            .collect();
        if lags.is_empty() {
            return Err(Error::Derivation("recurrence has no lagged terms".into()));
        }
        let offset = parity.offset();
        let seed_div = divisor.eval(offset, ctx);
        if !seed_div.is_zero()
            && ctx.float(seed_div.abs_ref())
                > ctx.float(divisor.magnitude(offset, ctx) * ctx.zero_tol())
        {
            return Err(Error::Derivation(format!(
                "index {offset} is not a free seed of the recurrence (indicial equation not satisfied); \
                 check that alpha(alpha-1) matches the singular coefficient"
            )));
        }
        let parity_coupled = lags.iter().any(|w| w.lag % 2 == 1);
        let max_lag = lags.iter().map(|w| w.lag).max().unwrap();
        Ok(Self {
            lags,
            divisor,
            parity,
            parity_coupled,
            max_lag,
            series_truncation: None,
        })
    }

    pub fn lags(&self) -> &[LagWeight] {
        &self.lags
    }

    pub fn divisor(&self) -> &NPoly {
        &self.divisor
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// True when odd lags occur (odd `sigma`), so both index parities are
    /// populated and parity is fixed only by the seeds.
    pub fn parity_coupled(&self) -> bool {
        self.parity_coupled
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// Index whose coefficient is quantized at expansion order `order`: the
    /// highest populated index not above `2 order`.
    pub fn target_index(&self, order: usize) -> usize {
        if self.parity_coupled || self.parity == Parity::Even {
            2 * order
        } else {
            2 * order - 1
        }
    }

    fn check_truncation(&self, n: usize) -> Result<()> {
        if let Some(t) = self.series_truncation {
            if n > t as usize + 2 {
                return Err(Error::Input(format!(
                    "potential series truncated at x^{t} cannot supply a_{n}; \
                     need truncation >= {}",
                    n - 2
                )));
            }
        }
        Ok(())
    }

    /// `a_0 .. a_n` at energy `e` by forward recursion.
    pub fn eval_coefficients(
        &self,
        e: &Float,
        n: usize,
        ctx: &PrecisionContext,
    ) -> Result<CoefficientSequence> {
        self.check_truncation(n)?;
        let offset = self.parity.offset();
        let mut values: Vec<Float> = Vec::with_capacity(n + 1);
        for idx in 0..=n {
            let value = if idx < offset {
                ctx.zero()
            } else if idx == offset {
                ctx.float(1)
            } else if !self.parity_coupled && (idx - offset) % 2 == 1 {
                ctx.zero()
            } else {
                self.next_value(&values, idx, e, ctx)?
            };
            values.push(value);
        }
        Ok(CoefficientSequence {
            energy: ctx.float(e),
            values,
            order: n,
        })
    }

    /// Right-hand side sum and the magnitude of its largest contribution.
    fn rhs(
        &self,
        values: &[Float],
        idx: usize,
        e: &Float,
        ctx: &PrecisionContext,
    ) -> (Float, Float) {
        let mut sum = ctx.zero();
        let mut scale = ctx.zero();
        for w in &self.lags {
            if w.lag > idx {
                continue;
            }
            let prev = &values[idx - w.lag];
            if prev.is_zero() {
                continue;
            }
            let mut weight = w.energy.eval(idx, ctx);
            weight *= e;
            weight += w.base.eval(idx, ctx);
            weight *= prev;
            let mag = ctx.float(weight.abs_ref());
            if mag > scale {
                scale = mag;
            }
            sum += weight;
        }
        (sum, scale)
    }

    fn next_value(
        &self,
        values: &[Float],
        idx: usize,
        e: &Float,
        ctx: &PrecisionContext,
    ) -> Result<Float> {
        let (sum, scale) = self.rhs(values, idx, e, ctx);
        let div = self.divisor.eval(idx, ctx);
        let div_small = div.is_zero()
            || ctx.float(div.abs_ref())
                <= ctx.float(self.divisor.magnitude(idx, ctx) * ctx.zero_tol());
        if div_small {
            let rhs_small =
                sum.is_zero() || ctx.float(sum.abs_ref()) <= ctx.float(&scale * ctx.zero_tol());
            return if rhs_small {
                Ok(ctx.zero())
            } else {
                Err(Error::DivisorVanishes { index: idx })
            };
        }
        Ok(sum / div)
    }

    /// The quantized coefficient `a_{target_index(order)}[e]`.
    pub fn coefficient_at(&self, e: &Float, order: usize, ctx: &PrecisionContext) -> Result<Float> {
        let n = self.target_index(order);
        let mut seq = self.eval_coefficients(e, n, ctx)?;
        Ok(seq.values.swap_remove(n))
    }

    /// Relative residual of every recursion step of `seq`.
    pub fn residuals(&self, seq: &CoefficientSequence, ctx: &PrecisionContext) -> Vec<Float> {
        let offset = self.parity.offset();
        (offset + 1..=seq.order)
            .map(|idx| {
                let (sum, scale) = self.rhs(&seq.values, idx, &seq.energy, ctx);
                let lhs = ctx.float(self.divisor.eval(idx, ctx) * &seq.values[idx]);
                let denom = ctx.float(lhs.abs_ref()).max(&scale);
                let r = ctx.float(&lhs - &sum).abs();
                if r.is_zero() {
                    r
                } else {
                    r / denom
                }
            })
            .collect()
    }
}

/// Truncated wavefunction `sum a_i x^i |x|^alpha exp(-beta |x|^sigma)` at
/// each sample point, scaled so that `max |Psi| = 1`.
pub fn wavefunction(
    seq: &CoefficientSequence,
    reference: &ReferenceFunction,
    xs: &[Float],
    ctx: &PrecisionContext,
) -> Result<Vec<Float>> {
    if xs.is_empty() {
        return Err(Error::Input(
            "wavefunction needs at least one sample point".into(),
        ));
    }
    let mut out: Vec<Float> = xs
        .iter()
        .map(|x| {
            let mut p = ctx.zero();
            for a in seq.values.iter().rev() {
                p *= x;
                p += a;
            }
            let ax = ctx.float(x.abs_ref());
            let mut decay = ctx.float(rug::ops::Pow::pow(&ax, reference.sigma));
            decay *= &reference.beta;
            decay = -decay;
            decay.exp_mut();
            p *= decay;
            if !reference.alpha.is_zero() {
                p *= ctx.float(rug::ops::Pow::pow(&ax, &reference.alpha));
            }
            p
        })
        .collect();
    let peak = out
        .iter()
        .map(|v| ctx.float(v.abs_ref()))
        .fold(ctx.zero(), |m, v| if v > m { v } else { m });
    if peak.is_zero() {
        return Err(Error::Input(
            "wavefunction vanishes on the whole grid".into(),
        ));
    }
    for v in &mut out {
        *v /= &peak;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(50).unwrap()
    }

    fn harmonic(ctx: &PrecisionContext, parity: Parity) -> Recurrence {
        let r = ReferenceFunction::gaussian(&ctx.ratio(1, 2), ctx).unwrap();
        Recurrence::derive(&PotentialSpec::harmonic(ctx), &r, parity, ctx).unwrap()
    }

    /// Reference weights typed in from the quartic recursion
    /// n(n-1) a_n = (4 beta n - 6 beta - E) a_{n-2} + (1 - 4 beta^2) a_{n-4} + g a_{n-6}.
    #[test]
    fn quartic_weights_match_closed_form() {
        let ctx = ctx();
        for (g, beta) in [(1.0, 1.0), (0.25, 0.75), (3.0, 2.5)] {
            let gf = ctx.float(g);
            let bf = ctx.float(beta);
            let r = ReferenceFunction::gaussian(&bf, &ctx).unwrap();
            let rec =
                Recurrence::derive(&PotentialSpec::quartic(&gf, &ctx), &r, Parity::Even, &ctx)
                    .unwrap();
            let lags: Vec<usize> = rec.lags().iter().map(|w| w.lag).collect();
            assert_eq!(lags, vec![2, 4, 6]);
            for n in 0..=200usize {
                let nf = n as f64;
                assert_eq!(rec.divisor().eval(n, &ctx), ctx.float(nf * (nf - 1.0)));
                let w2 = &rec.lags()[0];
                assert_eq!(
                    w2.base.eval(n, &ctx),
                    ctx.float(4.0 * beta * nf - 6.0 * beta)
                );
                assert_eq!(w2.energy.eval(n, &ctx), -1);
                assert_eq!(
                    rec.lags()[1].base.eval(n, &ctx),
                    ctx.float(1.0 - 4.0 * beta * beta)
                );
                assert!(rec.lags()[1].energy.is_zero());
                assert_eq!(rec.lags()[2].base.eval(n, &ctx), gf);
            }
        }
    }

    #[test]
    fn harmonic_first_coefficient() {
        let ctx = ctx();
        let rec = harmonic(&ctx, Parity::Even);
        for e in [0.0, 1.0, 2.5, 7.0] {
            let seq = rec.eval_coefficients(&ctx.float(e), 2, &ctx).unwrap();
            assert_eq!(seq.values[0], 1);
            assert_eq!(seq.values[1], 0);
            assert_eq!(seq.values[2], ctx.float((1.0 - e) / 2.0));
        }
    }

    #[test]
    fn harmonic_series_terminates_at_eigenvalues() {
        let ctx = ctx();
        let even = harmonic(&ctx, Parity::Even);
        let odd = harmonic(&ctx, Parity::Odd);
        for k in 0..20u32 {
            let e = ctx.float(4 * k + 1);
            assert!(
                even.coefficient_at(&e, 40, &ctx).unwrap().is_zero(),
                "E={e}"
            );
            let e = ctx.float(4 * k + 3);
            assert!(odd.coefficient_at(&e, 40, &ctx).unwrap().is_zero(), "E={e}");
        }
        assert!(!even
            .coefficient_at(&ctx.float(3), 40, &ctx)
            .unwrap()
            .is_zero());
    }

    /// a_6 for the harmonic oscillator with beta=1/2, expanded by hand:
    /// a_2 = (1-E)/2, a_4 = (5-E)a_2/12, a_6 = (9-E)a_4/30.
    #[test]
    fn harmonic_low_coefficients_by_hand() {
        let ctx = ctx();
        let rec = harmonic(&ctx, Parity::Even);
        let e = ctx.parse("2.75").unwrap();
        let seq = rec.eval_coefficients(&e, 6, &ctx).unwrap();
        let a2 = ctx.float(1 - e.clone()) / 2u32;
        let a4 = ctx.float(5 - e.clone()) * &a2 / 12u32;
        let a6 = ctx.float(9 - e.clone()) * &a4 / 30u32;
        assert_eq!(seq.values[6], a6);
    }

    #[test]
    fn singular_ground_state() {
        let ctx = ctx();
        let g = ctx.float(2);
        let v = PotentialSpec::singular(&g, &ctx).unwrap();
        let r = ReferenceFunction::for_singular(&g, &ctx.ratio(1, 2), &ctx).unwrap();
        let rec = Recurrence::derive(&v, &r, Parity::Even, &ctx).unwrap();
        // a_2 = (2 alpha + 1 - E) / (2 (1 + 2 alpha)) with alpha = 2
        let seq = rec.eval_coefficients(&ctx.float(3), 2, &ctx).unwrap();
        assert_eq!(seq.values[2], ctx.ratio(2, 10));
        let a = rec.coefficient_at(&ctx.float(5), 10, &ctx).unwrap();
        assert!(a.is_zero());
        assert!(Recurrence::derive(&v, &r, Parity::Odd, &ctx).is_err());
        let wrong = ReferenceFunction::new(ctx.float(1), ctx.ratio(1, 2), 2).unwrap();
        assert!(matches!(
            Recurrence::derive(&v, &wrong, Parity::Even, &ctx),
            Err(Error::Derivation(_))
        ));
        let plain = ReferenceFunction::new(ctx.float(2), ctx.ratio(1, 2), 2).unwrap();
        assert!(
            Recurrence::derive(&PotentialSpec::harmonic(&ctx), &plain, Parity::Even, &ctx).is_err()
        );
    }

    #[test]
    fn degree_in_energy() {
        // Finite differences of order floor(n/2)+1 vanish; order floor(n/2) does not.
        let ctx = ctx();
        let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
        let rec = Recurrence::derive(
            &PotentialSpec::quartic(&ctx.float(1), &ctx),
            &r,
            Parity::Even,
            &ctx,
        )
        .unwrap();
        for n in [2usize, 4, 6, 8, 10] {
            let samples: Vec<Float> = (0..=n / 2 + 1)
                .map(|i| {
                    let seq = rec
                        .eval_coefficients(&ctx.float(i as u32), n, &ctx)
                        .unwrap();
                    seq.values[n].clone()
                })
                .collect();
            let mut diffs = samples;
            for _ in 0..n / 2 {
                diffs = diffs.windows(2).map(|w| ctx.float(&w[1] - &w[0])).collect();
            }
            assert!(diffs.iter().all(|d| !d.is_zero()));
            let last = ctx.float(&diffs[1] - &diffs[0]);
            assert!(ctx.float(last.abs_ref()) < ctx.pow10(-30), "n={n}");
        }
    }

    #[test]
    fn residuals_vanish() {
        let ctx = ctx();
        let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
        let rec = Recurrence::derive(
            &PotentialSpec::quartic(&ctx.float(1), &ctx),
            &r,
            Parity::Odd,
            &ctx,
        )
        .unwrap();
        let seq = rec
            .eval_coefficients(&ctx.parse("4.6").unwrap(), 120, &ctx)
            .unwrap();
        assert_eq!(seq.values[0], 0);
        assert_eq!(seq.values[1], 1);
        assert!(rec.residuals(&seq, &ctx).iter().all(|r| r < ctx.zero_tol()));
    }

    #[test]
    fn cubic_reference_couples_parities() {
        let ctx = ctx();
        let r = ReferenceFunction::new(ctx.zero(), ctx.ratio(1, 3), 3).unwrap();
        let v = PotentialSpec::anharmonic(6, &ctx.float(1), &ctx).unwrap();
        let rec = Recurrence::derive(&v, &r, Parity::Even, &ctx).unwrap();
        assert!(rec.parity_coupled());
        assert_eq!(rec.target_index(10), 20);
        let seq = rec.eval_coefficients(&ctx.float(1), 12, &ctx).unwrap();
        assert!(!seq.values[3].is_zero());
    }

    #[test]
    fn truncated_series_guard() {
        let ctx = ctx();
        let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
        let v = PotentialSpec::transcendental_exp(20, &ctx).unwrap();
        let rec = Recurrence::derive(&v, &r, Parity::Even, &ctx).unwrap();
        assert!(rec.eval_coefficients(&ctx.float(1), 22, &ctx).is_ok());
        assert!(matches!(
            rec.eval_coefficients(&ctx.float(1), 24, &ctx),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn harmonic_wavefunction_is_gaussian() {
        let ctx = ctx();
        let rec = harmonic(&ctx, Parity::Even);
        let r = ReferenceFunction::gaussian(&ctx.ratio(1, 2), &ctx).unwrap();
        let seq = rec.eval_coefficients(&ctx.float(1), 30, &ctx).unwrap();
        let xs: Vec<Float> = (-8..=8).map(|i| ctx.ratio(i, 2)).collect();
        let psi = wavefunction(&seq, &r, &xs, &ctx).unwrap();
        let tol = ctx.pow10(-(ctx.digits() as i32 - 10));
        for (x, p) in xs.iter().zip(&psi) {
            let mut exact = ctx.float(x * x) / 2u32;
            exact = -exact;
            exact.exp_mut();
            assert!(ctx.float(p - &exact).abs() < tol);
        }
        let odd = harmonic(&ctx, Parity::Odd);
        let seq = odd.eval_coefficients(&ctx.float(3), 30, &ctx).unwrap();
        let psi = wavefunction(&seq, &r, &xs, &ctx).unwrap();
        assert!(psi[8].is_zero());
        assert!(wavefunction(&seq, &r, &[], &ctx).is_err());
    }
}
