//! Exact-expansion determinants for small dense matrices.

use rug::Float;

use crate::precision::PrecisionContext;

/// Determinant by Laplace expansion along successive rows, memoized over
/// column subsets (`O(2^n n)`). Intended for `n <= 16`.
pub fn determinant(m: &[Vec<Float>], ctx: &PrecisionContext) -> Float {
    let n = m.len();
    assert!(
        n <= 20,
        "expansion determinant is limited to small matrices"
    );
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    if n == 0 {
        return ctx.float(1);
    }
    // minors[mask] = determinant of the rows 0..|mask| restricted to the
    // columns in mask.
    let mut minors: Vec<Float> = vec![ctx.zero(); 1 << n];
    minors[0] = ctx.float(1);
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = ctx.zero();
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let rest = mask & !(1 << col);
            if minors[rest].is_zero() {
                continue;
            }
            // Columns of the minor that lie after `col` fix the sign.
            let after = (rest >> col).count_ones();
            let term = ctx.float(&m[row][col] * &minors[rest]);
            if after % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        minors[mask] = acc;
    }
    minors[(1 << n) - 1].clone()
}

/// Column `j` of the adjugate: the cofactors `C_{j,i}` for every row `i`.
/// For a singular matrix of rank `n-1` any nonzero adjugate column spans
/// the null space.
pub fn adjugate_column(m: &[Vec<Float>], j: usize, ctx: &PrecisionContext) -> Vec<Float> {
    let n = m.len();
    (0..n)
        .map(|i| {
            // Cofactor C_{j,i}: delete row j, column i.
            let minor: Vec<Vec<Float>> = (0..n)
                .filter(|r| *r != j)
                .map(|r| {
                    (0..n)
                        .filter(|c| *c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let d = determinant(&minor, ctx);
            if (i + j).is_multiple_of(2) {
                d
            } else {
                -d
            }
        })
        .collect()
}
