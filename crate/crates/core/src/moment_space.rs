//! Momentum-space quantization through Hamburger moments.
//!
//! Integrating `x^p` against `A y'' + B y' + (C - E W) y = 0` turns a term
//! `c x^k y^(d)` into `c (-1)^d (p+k)(p+k-1)... mu(p+k-d)` after `d`
//! integrations by parts. The highest shift determines each new even moment
//! `u(rho) = mu(2 rho)` from lower ones, leaving `u(0..=m_s)` free. Writing the
//! Fourier transform as `(sum a_2n k^2n) exp(-beta k^2)` expresses every
//! `a_2n` linearly in the free moments; requiring `m_s + 1` consecutive
//! coefficients to vanish gives a determinant condition on `E`.

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::{adjugate_column, determinant};
use crate::model::{modified_rational, modified_sextic, LinearOde, PotentialSpec};
use crate::parallel::Executor;
use crate::precision::PrecisionContext;
use crate::rootfinder::{find_roots, ScanWindow};

/// Largest missing-moment order accepted (the determinant is expanded
/// exactly).
const MAX_MISSING: usize = 8;

#[derive(Debug, Clone, PartialEq)]
struct MomentTerm {
    shift: i64,
    power: i64,
    derivative: u32,
    coeff: Float,
    energy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    terms: Vec<MomentTerm>,
    top: i64,
    ms: usize,
    beta: Float,
}

fn falling(m: i64, d: u32) -> i64 {
    (0..i64::from(d)).map(|i| m - i).product()
}

impl MomentSystem {
    /// Even-moment recursion of an ODE with polynomial coefficients.
    pub fn from_ode(ode: &LinearOde, beta: &Float, ctx: &PrecisionContext) -> Result<Self> {
        if *beta <= 0 {
            return Err(Error::Input("momentum-side beta must be positive".into()));
        }
        if !ode.is_polynomial() {
            return Err(Error::Unsupported(
                "moment recursion needs polynomial coefficients (no g/x^2 term)".into(),
            ));
        }
        let mut terms = Vec::new();
        for (d, p) in [(2u32, &ode.a), (1, &ode.b), (0, &ode.c)] {
            for (k, c) in p.terms() {
                terms.push(MomentTerm {
                    shift: i64::from(k) - i64::from(d),
                    power: i64::from(k),
                    derivative: d,
                    coeff: c.clone(),
                    energy: false,
                });
            }
        }
        for (k, c) in ode.w.terms() {
            terms.push(MomentTerm {
                shift: i64::from(k),
                power: i64::from(k),
                derivative: 0,
                coeff: ctx.float(-c),
                energy: true,
            });
        }
        if terms.iter().any(|t| t.shift % 2 != 0) {
            return Err(Error::Unsupported(
                "odd moment shifts couple even and odd moments".into(),
            ));
        }
        let top = terms
            .iter()
            .map(|t| t.shift)
            .max()
            .ok_or_else(|| Error::Derivation("empty differential equation".into()))?;
        if top < 2 {
            return Err(Error::Derivation(
                "moment recursion does not close upward".into(),
            ));
        }
        let ms = (top / 2 - 1) as usize;
        if ms > MAX_MISSING {
            return Err(Error::Unsupported(format!(
                "missing-moment order {ms} exceeds {MAX_MISSING}"
            )));
        }
        Ok(Self {
            terms,
            top,
            ms,
            beta: ctx.float(beta),
        })
    }

    pub fn ms(&self) -> usize {
        self.ms
    }

    pub fn beta(&self) -> &Float {
        &self.beta
    }

    pub fn with_beta(mut self, beta: &Float) -> Result<Self> {
        if *beta <= 0 {
            return Err(Error::Input("momentum-side beta must be positive".into()));
        }
        self.beta = beta.clone();
        Ok(self)
    }

    /// Coefficient of `mu(p + shift)` in the moment equation at power `p`.
    fn weight(&self, t: &MomentTerm, p: i64, e: &Float, ctx: &PrecisionContext) -> Float {
        let ff = falling(p + t.power, t.derivative);
        let mut w = ctx.float(&t.coeff * ff);
        if t.derivative % 2 == 1 {
            w = -w;
        }
        if t.energy {
            w *= e;
        }
        w
    }

    /// `M_E(rho, l)` for `rho < rows`: each row expresses `u(rho)` in the
    /// free moments `u(0..=m_s)`. When the energy multiplies the highest
    /// moment (rational potentials) the entries are rational in `E`; they
    /// are always evaluated at a fixed `E`.
    pub fn transfer(
        &self,
        e: &Float,
        rows: usize,
        ctx: &PrecisionContext,
    ) -> Result<Vec<Vec<Float>>> {
        self.transfer_with_leads(e, rows, ctx).map(|(m, _)| m)
    }

    /// Transfer rows plus the sign of each step's leading coefficient.
    fn transfer_with_leads(
        &self,
        e: &Float,
        rows: usize,
        ctx: &PrecisionContext,
    ) -> Result<(Vec<Vec<Float>>, Vec<bool>)> {
        let width = self.ms + 1;
        let mut negative_leads = Vec::new();
        let mut m: Vec<Vec<Float>> = (0..width.min(rows))
            .map(|l| {
                (0..width)
                    .map(|j| if j == l { ctx.float(1) } else { ctx.zero() })
                    .collect()
            })
            .collect();
        let mut r = 0i64;
        while m.len() < rows {
            let p = 2 * r;
            let mut lead = ctx.zero();
            let mut acc = vec![ctx.zero(); width];
            for t in &self.terms {
                let w = self.weight(t, p, e, ctx);
                if w.is_zero() {
                    continue;
                }
                if t.shift == self.top {
                    lead += w;
                    continue;
                }
                let idx = p + t.shift;
                if idx < 0 {
                    continue;
                }
                for (a, x) in acc.iter_mut().zip(&m[(idx / 2) as usize]) {
                    *a += ctx.float(&w * x);
                }
            }
            if lead.is_zero() {
                return Err(Error::DivisorVanishes {
                    index: (p + self.top) as usize,
                });
            }
            negative_leads.push(lead.is_sign_negative());
            m.push(acc.into_iter().map(|a| -a / &lead).collect());
            r += 1;
        }
        Ok((m, negative_leads))
    }

    /// Residual of the raw moment equations for `u = M u_free`, for powers
    /// `p = 0, 2, ..` while all referenced moments are available.
    pub fn recursion_residuals(
        &self,
        moments: &[Float],
        e: &Float,
        ctx: &PrecisionContext,
    ) -> Vec<Float> {
        let mut out = Vec::new();
        let mut p = 0i64;
        while ((p + self.top) / 2) < moments.len() as i64 {
            let mut sum = ctx.zero();
            let mut scale = ctx.zero();
            for t in &self.terms {
                let idx = p + t.shift;
                if idx < 0 {
                    continue;
                }
                let term = ctx.float(self.weight(t, p, e, ctx) * &moments[(idx / 2) as usize]);
                let mag = ctx.float(term.abs_ref());
                if mag > scale {
                    scale = mag;
                }
                sum += term;
            }
            out.push(if sum.is_zero() {
                sum
            } else {
                sum.abs() / scale
            });
            p += 2;
        }
        out
    }

    /// `D^(n)[E]`: rows `n..=n+m_s`, columns `l = 0..=m_s`, with
    /// `D_{row,l} = sum_{r1+r2=row} (-1)^r1 M_E(r1,l) beta^r2 / ((2 r1)! r2!)`.
    pub fn d_matrix(&self, e: &Float, n: usize, ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>> {
        self.d_matrix_with_sign(e, n, ctx).map(|(d, _)| d)
    }

    /// `D^(n)[E]` and the sign that clears its denominators: row `n + l`
    /// carries the product of the leading coefficients of every recursion
    /// step up to that row.
    fn d_matrix_with_sign(
        &self,
        e: &Float,
        n: usize,
        ctx: &PrecisionContext,
    ) -> Result<(Vec<Vec<Float>>, bool)> {
        let width = self.ms + 1;
        let rows = n + width;
        let (m, negative_leads) = self.transfer_with_leads(e, rows, ctx)?;
        let mut flip = false;
        for l in 0..width {
            let steps = (n + l + 1).saturating_sub(width);
            flip ^= negative_leads[..steps].iter().filter(|x| **x).count() % 2 == 1;
        }
        // 1/(2r)! and beta^r / r!
        let mut inv_even_fact = vec![ctx.float(1)];
        let mut beta_pow = vec![ctx.float(1)];
        for r in 1..rows {
            let prev = inv_even_fact[r - 1].clone();
            inv_even_fact.push(prev / ((2 * r * (2 * r - 1)) as u64));
            let prev = beta_pow[r - 1].clone();
            beta_pow.push(ctx.float(prev * &self.beta) / r as u64);
        }
        let d = (0..width)
            .map(|l1| {
                let row = n + l1;
                (0..width)
                    .map(|l2| {
                        let mut s = ctx.zero();
                        for r1 in 0..=row {
                            let mut t = ctx.float(&m[r1][l2] * &inv_even_fact[r1]);
                            t *= &beta_pow[row - r1];
                            if r1 % 2 == 0 {
                                s += t;
                            } else {
                                s -= t;
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        Ok((d, flip))
    }

    /// `Det D^(n)[E]`, sign-corrected so that poles of the transfer rows
    /// (energies where a leading coefficient vanishes) do not register as
    /// sign changes.
    pub fn determinant(&self, e: &Float, n: usize, ctx: &PrecisionContext) -> Result<Float> {
        let (d, flip) = self.d_matrix_with_sign(e, n, ctx)?;
        let det = determinant(&d, ctx);
        Ok(if flip { -det } else { det })
    }

    /// Zeros of `E -> Det D^(n)[E]` in `window`.
    pub fn missing_moment_roots(
        &self,
        n: usize,
        window: &ScanWindow,
        ctx: &PrecisionContext,
        exec: &Executor,
    ) -> Result<Vec<Float>> {
        if n < 1 {
            return Err(Error::Input("moment order n must be at least 1".into()));
        }
        find_roots(|e| self.determinant(e, n, ctx), window, ctx, exec)
    }

    /// Free moments spanning the null space of `D^(n)[E]` (from the largest
    /// adjugate column), scaled to `u(0) = 1`, then propagated to
    /// `u(0..count)`.
    pub fn null_moments(
        &self,
        e: &Float,
        n: usize,
        count: usize,
        ctx: &PrecisionContext,
    ) -> Result<Vec<Float>> {
        let d = self.d_matrix(e, n, ctx)?;
        let width = self.ms + 1;
        let free = if width == 1 {
            vec![ctx.float(1)]
        } else {
            let norm = |v: &Vec<Float>| v.iter().fold(ctx.zero(), |acc, x| acc + ctx.float(x * x));
            (0..width)
                .map(|j| adjugate_column(&d, j, ctx))
                .max_by(|a, b| {
                    norm(a)
                        .partial_cmp(&norm(b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("at least one column")
        };
        if free[0].is_zero() {
            return Err(Error::Input(
                "null vector has u(0) = 0; cannot normalize".into(),
            ));
        }
        let m = self.transfer(e, count.max(width), ctx)?;
        Ok(m.iter()
            .take(count)
            .map(|row| {
                let mut u = ctx.zero();
                for (c, f) in row.iter().zip(&free) {
                    u += ctx.float(c * f);
                }
                u / &free[0]
            })
            .collect())
    }
}

/// Moment system of the Schrödinger equation for `potential` with the
/// default momentum-side reference `exp(-k^2/2)`.
pub fn derive_moment_recursion(
    potential: &PotentialSpec,
    ctx: &PrecisionContext,
) -> Result<MomentSystem> {
    MomentSystem::from_ode(&potential.ode(ctx), &ctx.ratio(1, 2), ctx)
}

/// Sextic `x^2 + g x^6` through the moments of `Psi exp(-sqrt(g) x^4/4)`,
/// which need no missing moments.
pub fn sextic_ms0_roots(
    g: &Float,
    n: usize,
    beta: &Float,
    window: &ScanWindow,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Vec<Float>> {
    let sys = modified_sextic(g, ctx)?;
    let msys = MomentSystem::from_ode(&sys.ode, beta, ctx)?;
    debug_assert_eq!(msys.ms(), 0);
    msys.missing_moment_roots(n, window, ctx, exec)
}

/// `x^2 + g x^2/(1 + lambda x^2)` through the moments of
/// `Psi exp(-x^2/2)/(1 + lambda x^2)`, which need no missing moments.
pub fn rational_ms0_roots(
    g: &Float,
    lambda: &Float,
    n: usize,
    beta: &Float,
    window: &ScanWindow,
    ctx: &PrecisionContext,
    exec: &Executor,
) -> Result<Vec<Float>> {
    let sys = modified_rational(g, lambda, ctx)?;
    let msys = MomentSystem::from_ode(&sys.ode, beta, ctx)?;
    msys.missing_moment_roots(n, window, ctx, exec)
}
