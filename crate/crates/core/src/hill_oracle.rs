//! Hill determinant over the Gaussian basis `B_i = x^(2i+p) exp(-beta x^2)`.
//!
//! The matrix `M_ij[E] = <B_i|H|B_j> - E <B_i|B_j>` is assembled from exact
//! Gaussian moments. An `L D L^T` elimination without pivoting yields the
//! vectors `V^(I)` (with `V^(I)_I = 1`) that solve the first `I` rows of
//! `M^(I) V = 0`, and the pivots `D_I`, whose product is the determinant.

use rug::Float;

use crate::error::{Error, Result};
use crate::model::{Parity, PotentialSpec, ReferenceFunction};
use crate::parallel::Executor;
use crate::precision::PrecisionContext;
use crate::rootfinder::{find_roots, ScanWindow};

/// `integral x^(i+j) exp(-2 beta x^2) dx` over the real line.
pub fn gaussian_overlap(i: u32, j: u32, beta: &Float, ctx: &PrecisionContext) -> Float {
    let s = i + j;
    if s % 2 == 1 {
        return ctx.zero();
    }
    let mut g = gaussian_base(beta, ctx);
    let four_beta = ctx.float(beta * 4u32);
    for t in (0..s).step_by(2) {
        g *= t + 1;
        g /= &four_beta;
    }
    g
}

/// `sqrt(pi / (2 beta))`.
fn gaussian_base(beta: &Float, ctx: &PrecisionContext) -> Float {
    let pi = ctx.float(rug::float::Constant::Pi);
    (pi / ctx.float(beta * 2u32)).sqrt()
}

/// Gaussian moments `G(s)` for even `s` up to a fixed maximum.
#[derive(Debug, Clone)]
pub struct OverlapTable {
    even: Vec<Float>,
}

impl OverlapTable {
    pub fn new(max_power: u32, beta: &Float, ctx: &PrecisionContext) -> Self {
        let four_beta = ctx.float(beta * 4u32);
        let mut even = vec![gaussian_base(beta, ctx)];
        for t in (0..max_power).step_by(2) {
            let next = ctx.float(even.last().unwrap() * (t + 1)) / &four_beta;
            even.push(next);
        }
        Self { even }
    }

    /// `G(s)`; zero for odd `s` (and for the negative powers that only
    /// appear with vanishing prefactors).
    pub fn get(&self, s: i64) -> Option<&Float> {
        if s < 0 || s % 2 == 1 {
            return None;
        }
        self.even.get((s / 2) as usize)
    }
}

/// Hill problem of a given order: basis indices `0..=order`.
#[derive(Debug, Clone)]
pub struct HillSystem {
    potential: PotentialSpec,
    beta: Float,
    order: usize,
    parity: Parity,
    overlaps: OverlapTable,
}

/// Pivots and elimination vectors at one energy.
#[derive(Debug, Clone)]
pub struct LUSequence {
    pub energy: Float,
    /// `vectors[I]` has length `I+1` and ends in 1.
    pub vectors: Vec<Vec<Float>>,
    pub pivots: Vec<Float>,
}

impl LUSequence {
    pub fn determinant(&self, ctx: &PrecisionContext) -> Float {
        self.pivots.iter().fold(ctx.float(1), |acc, d| acc * d)
    }
}

impl HillSystem {
    pub fn new(
        potential: &PotentialSpec,
        reference: &ReferenceFunction,
        order: usize,
        parity: Parity,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        if reference.sigma != 2 || !reference.alpha.is_zero() {
            return Err(Error::Unsupported(
                "the Hill oracle needs a plain Gaussian reference (sigma = 2, alpha = 0)".into(),
            ));
        }
        if !potential.is_polynomial() || potential.series_truncation().is_some() {
            return Err(Error::Unsupported(
                "the Hill oracle handles polynomial potentials only".into(),
            ));
        }
        let top = 2 * (2 * order as u32 + 1) + potential.max_power() + 2;
        Ok(Self {
            potential: potential.clone(),
            beta: ctx.float(&reference.beta),
            order,
            parity,
            overlaps: OverlapTable::new(top, &reference.beta, ctx),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Same system truncated at another order (shares the overlap table
    /// when it is large enough).
    pub fn with_order(&self, order: usize, ctx: &PrecisionContext) -> Self {
        if order <= self.order {
            let mut s = self.clone();
            s.order = order;
            return s;
        }
        let r = ReferenceFunction::gaussian(&self.beta, ctx).expect("beta validated");
        Self::new(&self.potential, &r, order, self.parity, ctx).expect("validated system")
    }

    fn power(&self, i: usize) -> i64 {
        (2 * i + self.parity.offset()) as i64
    }

    fn g(&self, s: i64) -> Float {
        self.overlaps
            .get(s)
            .cloned()
            .unwrap_or_else(|| Float::new(self.beta.prec()))
    }

    /// `<B_i|-d^2/dx^2 + V|B_j> - E <B_i|B_j>`.
    pub fn matrix_element(&self, i: usize, j: usize, e: &Float, ctx: &PrecisionContext) -> Float {
        let (a, b) = (self.power(i), self.power(j));
        let s = a + b;
        let beta = &self.beta;
        // (x^b e^{-beta x^2})'' = [b(b-1) x^{b-2} - 2 beta (2b+1) x^b + 4 beta^2 x^{b+2}] e^{-beta x^2}
        let mut m = ctx.zero();
        if b >= 2 {
            m -= ctx.float(&self.g(s - 2) * (b * (b - 1)));
        }
        m += ctx.float(beta * (2 * (2 * b + 1))) * self.g(s);
        m -= ctx.float(beta * beta) * 4u32 * self.g(s + 2);
        for (k, c) in self.potential.even_series() {
            m += ctx.float(c * &self.g(s + i64::from(*k)));
        }
        m -= ctx.float(e * &self.g(s));
        m
    }

    pub fn matrix(&self, e: &Float, ctx: &PrecisionContext) -> Vec<Vec<Float>> {
        let n = self.order + 1;
        let mut m = vec![vec![ctx.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.matrix_element(i, j, e, ctx);
                m[j][i] = v.clone();
                m[i][j] = v;
            }
        }
        m
    }

    /// Elimination at a single energy; fails on a singular leading minor
    /// before the last stage.
    fn factor(&self, e: &Float, ctx: &PrecisionContext) -> Result<LUSequence> {
        let m = self.matrix(e, ctx);
        let n = self.order + 1;
        // l[k][i] for i < k: unit lower-triangular factor.
        let mut l: Vec<Vec<Float>> = Vec::with_capacity(n);
        let mut pivots: Vec<Float> = Vec::with_capacity(n);
        for k in 0..n {
            let mut row: Vec<Float> = Vec::with_capacity(k);
            for i in 0..k {
                let mut v = m[k][i].clone();
                for t in 0..i {
                    v -= ctx.float(&row[t] * &l[i][t]) * &pivots[t];
                }
                v /= &pivots[i];
                row.push(v);
            }
            let mut d = m[k][k].clone();
            for t in 0..k {
                d -= ctx.float(&row[t] * &row[t]) * &pivots[t];
            }
            let scale = ctx.float(m[k][k].abs_ref());
            let singular = d.is_zero() || ctx.float(d.abs_ref()) <= scale * ctx.zero_tol();
            if singular && k < self.order {
                return Err(Error::SingularMinor { stage: k });
            }
            l.push(row);
            pivots.push(d);
        }
        // V^(I) = (L^T)^{-1} e_I by back substitution.
        let vectors = (0..n)
            .map(|big_i| {
                let mut v = vec![ctx.zero(); big_i + 1];
                v[big_i] = ctx.float(1);
                for r in (0..big_i).rev() {
                    let mut acc = ctx.zero();
                    for c in r + 1..=big_i {
                        acc += ctx.float(&l[c][r] * &v[c]);
                    }
                    v[r] = -acc;
                }
                v
            })
            .collect();
        Ok(LUSequence {
            energy: ctx.float(e),
            vectors,
            pivots,
        })
    }

    /// Pivots and vectors at `e`, nudging the energy once by
    /// `10^(-digits+15)` when an intermediate minor is singular.
    pub fn lu_pivots(&self, e: &Float, ctx: &PrecisionContext) -> Result<LUSequence> {
        match self.factor(e, ctx) {
            Err(Error::SingularMinor { .. }) => {
                let nudged = ctx.float(e + ctx.pow10(15 - ctx.digits() as i32));
                self.factor(&nudged, ctx)
            }
            other => other,
        }
    }

    /// `V^(I+1)_I = -sum_i V^(I)_i M_{i,I+1} / D_I`, the component that
    /// diverges at the roots of `D_I`.
    pub fn divergent_component(&self, e: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let lu = self.lu_pivots(e, ctx)?;
        let big_i = self.order;
        let v = &lu.vectors[big_i];
        let mut acc = ctx.zero();
        for (i, vi) in v.iter().enumerate() {
            acc += ctx.float(vi * &self.matrix_element(i, big_i + 1, &lu.energy, ctx));
        }
        Ok(-acc / &lu.pivots[big_i])
    }

    /// Zeros of the Hill determinant in `window`.
    pub fn hill_roots(
        &self,
        window: &ScanWindow,
        ctx: &PrecisionContext,
        exec: &Executor,
    ) -> Result<Vec<Float>> {
        find_roots(
            |e| self.lu_pivots(e, ctx).map(|lu| lu.determinant(ctx)),
            window,
            ctx,
            exec,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(60).unwrap()
    }

    fn system(
        v: &PotentialSpec,
        beta: &Float,
        order: usize,
        parity: Parity,
        ctx: &PrecisionContext,
    ) -> HillSystem {
        let r = ReferenceFunction::gaussian(beta, ctx).unwrap();
        HillSystem::new(v, &r, order, parity, ctx).unwrap()
    }

    #[test]
    fn overlaps() {
        let ctx = ctx();
        let half = ctx.ratio(1, 2);
        let pi = ctx.float(rug::float::Constant::Pi);
        let root_pi = ctx.float(pi.sqrt_ref());
        let close = |a: &Float, b: &Float| ctx.float(a - b).abs() < ctx.pow10(-55);
        assert!(close(&gaussian_overlap(0, 0, &half, &ctx), &root_pi));
        assert!(gaussian_overlap(1, 0, &ctx.float(3), &ctx).is_zero());
        assert!(close(
            &gaussian_overlap(2, 0, &half, &ctx),
            &(root_pi.clone() / 2u32)
        ));
        let t = OverlapTable::new(20, &half, &ctx);
        assert!(close(
            t.get(6).unwrap(),
            &gaussian_overlap(3, 3, &half, &ctx)
        ));
    }

    #[test]
    fn harmonic_elements() {
        let ctx = ctx();
        let h = PotentialSpec::harmonic(&ctx);
        let sys = system(&h, &ctx.ratio(1, 2), 4, Parity::Even, &ctx);
        assert!(sys.matrix_element(0, 0, &ctx.float(1), &ctx).is_zero());
        let lu = sys
            .with_order(0, &ctx)
            .lu_pivots(&ctx.float(1), &ctx)
            .unwrap();
        assert!(lu.pivots[0].is_zero());
        assert_eq!(lu.vectors[0], vec![ctx.float(1)]);
        let sys = system(
            &PotentialSpec::quartic(&ctx.float(1), &ctx),
            &ctx.float(1),
            3,
            Parity::Even,
            &ctx,
        );
        assert!(sys.matrix_element(0, 0, &ctx.zero(), &ctx) > 0);
    }

    #[test]
    fn matrix_is_symmetric() {
        let ctx = ctx();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        for parity in [Parity::Even, Parity::Odd] {
            let sys = system(&v, &ctx.parse("0.7").unwrap(), 6, parity, &ctx);
            let m = sys.matrix(&ctx.parse("2.3").unwrap(), &ctx);
            for i in 0..7 {
                for j in 0..7 {
                    let d = ctx.float(
                        sys.matrix_element(i, j, &ctx.parse("2.3").unwrap(), &ctx) - &m[j][i],
                    );
                    let scale = ctx.float(m[i][j].abs_ref()) + 1u32;
                    assert!(d.abs() <= scale * ctx.pow10(-50), "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn elimination_vectors_solve_leading_rows() {
        let ctx = ctx();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        let sys = system(&v, &ctx.float(1), 8, Parity::Odd, &ctx);
        let e = ctx.parse("4.1").unwrap();
        let lu = sys.lu_pivots(&e, &ctx).unwrap();
        let m = sys.matrix(&e, &ctx);
        for (big_i, vec) in lu.vectors.iter().enumerate() {
            for (i, row) in m.iter().enumerate().take(big_i + 1) {
                let mut dot = ctx.zero();
                for (j, vj) in vec.iter().enumerate() {
                    dot += ctx.float(&row[j] * vj);
                }
                if i < big_i {
                    assert!(dot.abs() < ctx.pow10(-40), "I={big_i} i={i}");
                } else {
                    let d = ctx.float(&dot - &lu.pivots[big_i]).abs();
                    assert!(d < ctx.pow10(-40));
                }
            }
        }
    }

    #[test]
    fn pivot_product_is_determinant() {
        let ctx = ctx();
        let v = PotentialSpec::double_well(&ctx.float(5), &ctx);
        for order in [0usize, 3, 7, 12] {
            let sys = system(&v, &ctx.float(1), order, Parity::Even, &ctx);
            let e = ctx.parse("-2.5").unwrap();
            let lu = sys.lu_pivots(&e, &ctx).unwrap();
            let direct = determinant(&sys.matrix(&e, &ctx), &ctx);
            let rel = ctx.float(lu.determinant(&ctx) - &direct).abs() / ctx.float(direct.abs_ref());
            assert!(rel < ctx.pow10(-30), "order {order}");
        }
    }

    #[test]
    fn ratio_formula_matches_next_order() {
        let ctx = ctx();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        let sys = system(&v, &ctx.float(1), 10, Parity::Even, &ctx);
        let e = ctx.parse("1.5").unwrap();
        let by_ratio = sys.divergent_component(&e, &ctx).unwrap();
        let next = sys.with_order(11, &ctx).lu_pivots(&e, &ctx).unwrap();
        let direct = &next.vectors[11][10];
        let rel = ctx.float(&by_ratio - direct).abs() / ctx.float(direct.abs_ref());
        assert!(rel < ctx.pow10(-40));
    }

    #[test]
    fn divergence_inside_final_bracket() {
        // The numerator of the ratio vanishes close to the root as well, so
        // the blow-up only shows once the offset is below the gap between
        // the two zeros (about 1e-13 here).
        let ctx = ctx();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        let sys = system(&v, &ctx.ratio(1, 4), 40, Parity::Even, &ctx);
        let w = ScanWindow::new(ctx.float(1), ctx.float(2), 16).unwrap();
        let root = sys.hill_roots(&w, &ctx, &Executor::serial()).unwrap()[0].clone();
        for side in [1i32, -1] {
            let sizes: Vec<Float> = [-16, -20, -24]
                .iter()
                .map(|&k| {
                    let e = ctx.float(&root + ctx.pow10(k) * side);
                    sys.divergent_component(&e, &ctx).unwrap().abs()
                })
                .collect();
            assert!(sizes[0] > 1e6);
            assert!(sizes.windows(2).all(|p| p[1] > p[0]), "side {side}");
        }
    }

    #[test]
    fn harmonic_roots_exact() {
        let ctx = ctx();
        let sys = system(
            &PotentialSpec::harmonic(&ctx),
            &ctx.ratio(1, 2),
            6,
            Parity::Even,
            &ctx,
        );
        let w = ScanWindow::new(ctx.parse("0.3").unwrap(), ctx.parse("10.3").unwrap(), 40).unwrap();
        let roots = sys.hill_roots(&w, &ctx, &Executor::serial()).unwrap();
        // Near an exact root the leading minor is singular and the energy is
        // nudged by 10^(-digits+15).
        let tol = ctx.pow10(16 - ctx.digits() as i32);
        for (r, exact) in roots.iter().zip([1, 5, 9]) {
            assert!(ctx.float(r - exact).abs() <= tol, "{r}");
        }
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn rejects_unsupported() {
        let ctx = ctx();
        let r3 = ReferenceFunction::new(ctx.zero(), ctx.float(1), 3).unwrap();
        let v = PotentialSpec::quartic(&ctx.float(1), &ctx);
        assert!(matches!(
            HillSystem::new(&v, &r3, 4, Parity::Even, &ctx),
            Err(Error::Unsupported(_))
        ));
        let s = PotentialSpec::singular(&ctx.float(2), &ctx).unwrap();
        let r = ReferenceFunction::gaussian(&ctx.float(1), &ctx).unwrap();
        assert!(matches!(
            HillSystem::new(&s, &r, 4, Parity::Even, &ctx),
            Err(Error::Unsupported(_))
        ));
    }
}
