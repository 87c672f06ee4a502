//! Dense matrices and the linear-algebra kernels behind the rank solvers:
//! LU factorization with partial pivoting, full and blockwise inversion, and
//! the analytic inverse for complete graphs.

use thiserror::Error;

use crate::graph::DirectedGraph;

/// Pivot magnitudes below this are treated as singular.
const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("c out of range: {0} (must be in (0,1))")]
    COutOfRange(f64),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid complete-graph size {0} (need at least 2)")]
    InvalidN(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub(crate) fn check_c(c: f64) -> Result<(), LinalgError> {
    if c.is_finite() && c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(LinalgError::COutOfRange(c))
    }
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length must match columns");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Largest absolute entry difference; matrices must share a shape.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of column `j`.
    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }
}

/// Split index for 2x2 block operations: the leading block is `split x split`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    pub split: usize,
}

/// The rank system matrix `I - c A^T`, where `A` spreads each node's unit
/// mass uniformly over its out-links and dangling rows stay zero.
pub fn system_matrix(g: &DirectedGraph, c: f64) -> Result<DenseMatrix, LinalgError> {
    check_c(c)?;
    let n = g.n();
    let mut m = DenseMatrix::identity(n);
    for src in 0..n {
        let deg = g.out_degree(src);
        if deg == 0 {
            continue;
        }
        let share = c / deg as f64;
        for &dst in g.out_links(src) {
            let cur = m.get(dst, src);
            m.set(dst, src, cur - share);
        }
    }
    Ok(m)
}

/// Compact LU factorization with partial pivoting. Returns the packed
/// factors and the row permutation.
pub(crate) fn lu_factor(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<usize>), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!("{}x{} matrix is not square", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu.get(k, k).abs();
        for i in k + 1..n {
            let mag = lu.get(i, k).abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag < PIVOT_TOL {
            return Err(LinalgError::Singular(format!(
                "pivot {pivot_mag:.3e} below threshold at column {k}"
            )));
        }
        if pivot_row != k {
            for j in 0..n {
                let a = lu.get(k, j);
                lu.set(k, j, lu.get(pivot_row, j));
                lu.set(pivot_row, j, a);
            }
            perm.swap(k, pivot_row);
        }
        let pivot = lu.get(k, k);
        for i in k + 1..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            if factor == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let cur = lu.get(i, j);
                lu.set(i, j, cur - factor * lu.get(k, j));
            }
        }
    }
    Ok((lu, perm))
}

pub(crate) fn lu_solve_factored(lu: &DenseMatrix, perm: &[usize], rhs: &[f64]) -> Vec<f64> {
    let n = lu.rows();
    let mut x: Vec<f64> = perm.iter().map(|&p| rhs[p]).collect();
    for i in 1..n {
        let mut s = x[i];
        for j in 0..i {
            s -= lu.get(i, j) * x[j];
        }
        x[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu.get(i, j) * x[j];
        }
        x[i] = s / lu.get(i, i);
    }
    x
}

/// Solves `m x = rhs` by LU with partial pivoting.
pub fn lu_solve(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if m.rows() != rhs.len() {
        return Err(LinalgError::Shape(format!(
            "matrix is {}x{} but rhs has length {}",
            m.rows(),
            m.cols(),
            rhs.len()
        )));
    }
    let (lu, perm) = lu_factor(m)?;
    Ok(lu_solve_factored(&lu, &perm, rhs))
}

/// Full inverse via one LU factorization and `n` unit-vector solves.
pub fn invert(m: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let (lu, perm) = lu_factor(m)?;
    let n = m.rows();
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = lu_solve_factored(&lu, &perm, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv)
}

fn submatrix(m: &DenseMatrix, r0: usize, r1: usize, c0: usize, c1: usize) -> DenseMatrix {
    DenseMatrix::from_fn(r1 - r0, c1 - c0, |i, j| m.get(r0 + i, c0 + j))
}

/// Inverts a square matrix through its 2x2 block partition
/// `[[B, C], [D, E]]`: with `S = B - C E^-1 D`,
///
/// ```text
/// inv = [[S^-1,            -S^-1 C E^-1                ],
///        [-E^-1 D S^-1,     E^-1 + E^-1 D S^-1 C E^-1  ]]
/// ```
///
/// Equals [`invert`] wherever both `E` and `S` are invertible.
pub fn block_invert(m: &DenseMatrix, p: BlockPartition) -> Result<DenseMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape(format!("{}x{} matrix is not square", m.rows, m.cols)));
    }
    let n = m.rows();
    if p.split == 0 || p.split >= n {
        return Err(LinalgError::Shape(format!(
            "split {} outside 1..={} for an {n}x{n} matrix",
            p.split,
            n - 1
        )));
    }
    let k = p.split;
    let b = submatrix(m, 0, k, 0, k);
    let c = submatrix(m, 0, k, k, n);
    let d = submatrix(m, k, n, 0, k);
    let e = submatrix(m, k, n, k, n);

    let e_inv = invert(&e).map_err(|_| LinalgError::Singular("trailing block E".into()))?;
    let c_einv = c.mul(&e_inv);
    // S = B - C E^-1 D
    let mut s = b.clone();
    let ced = c_einv.mul(&d);
    for i in 0..k {
        for j in 0..k {
            s.set(i, j, s.get(i, j) - ced.get(i, j));
        }
    }
    let s_inv =
        invert(&s).map_err(|_| LinalgError::Singular("Schur complement B - C E^-1 D".into()))?;

    let top_right = {
        let mut t = s_inv.mul(&c_einv);
        for v in &mut t.data {
            *v = -*v;
        }
        t
    };
    let einv_d = e_inv.mul(&d);
    let bottom_left = {
        let mut t = einv_d.mul(&s_inv);
        for v in &mut t.data {
            *v = -*v;
        }
        t
    };
    let bottom_right = {
        let mut t = e_inv.clone();
        let add = einv_d.mul(&s_inv).mul(&c_einv);
        for i in 0..n - k {
            for j in 0..n - k {
                t.set(i, j, t.get(i, j) + add.get(i, j));
            }
        }
        t
    };

    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            out.set(i, j, s_inv.get(i, j));
        }
        for j in k..n {
            out.set(i, j, top_right.get(i, j - k));
        }
    }
    for i in k..n {
        for j in 0..k {
            out.set(i, j, bottom_left.get(i - k, j));
        }
        for j in k..n {
            out.set(i, j, bottom_right.get(i - k, j - k));
        }
    }
    Ok(out)
}

/// Analytic inverse of `I - c A^T` for the complete graph on `n` nodes:
/// constant diagonal `((n-1) - c(n-2)) / q` and off-diagonal `c / q` with
/// `q = (n-1) - c(n-2) - c^2`.
pub fn complete_graph_inverse(n: usize, c: f64) -> Result<DenseMatrix, LinalgError> {
    if n < 2 {
        return Err(LinalgError::InvalidN(n));
    }
    check_c(c)?;
    let nf = n as f64;
    let q = (nf - 1.0) - c * (nf - 2.0) - c * c;
    let diag = ((nf - 1.0) - c * (nf - 2.0)) / q;
    let off = c / q;
    Ok(DenseMatrix::from_fn(n, n, |i, j| if i == j { diag } else { off }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, StructureSpec};

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn system_matrix_for_line_has_superdiagonal() {
        let g = generate(&StructureSpec::line(4)).unwrap();
        let m = system_matrix(&g, 0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j {
                    1.0
                } else if j == i + 1 {
                    -0.5
                } else {
                    0.0
                };
                assert_eq!(m.get(i, j), want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn system_matrix_for_all_dangling_graph_is_identity() {
        let g = crate::graph::DirectedGraph::from_edges(3, &[]).unwrap();
        let m = system_matrix(&g, 0.85).unwrap();
        assert_eq!(m.max_abs_diff(&DenseMatrix::identity(3)), 0.0);
    }

    #[test]
    fn system_matrix_rejects_bad_c() {
        let g = generate(&StructureSpec::line(2)).unwrap();
        assert!(matches!(system_matrix(&g, 0.0), Err(LinalgError::COutOfRange(_))));
        assert!(matches!(system_matrix(&g, 1.0), Err(LinalgError::COutOfRange(_))));
        assert!(matches!(system_matrix(&g, 1.5), Err(LinalgError::COutOfRange(_))));
    }

    #[test]
    fn lu_solves_identity() {
        let m = DenseMatrix::identity(3);
        let x = lu_solve(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn lu_solves_line_system_to_geometric_sums() {
        // x_i = sum_{k<=5-i} c^k at c = 0.85.
        let g = generate(&StructureSpec::line(5)).unwrap();
        let m = system_matrix(&g, 0.85).unwrap();
        let x = lu_solve(&m, &[1.0; 5]).unwrap();
        let want = [3.70863125, 3.186625, 2.5725, 1.85, 1.0];
        for (a, b) in x.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn lu_detects_singular_matrix() {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 0, 1.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 0.5);
        m.set(1, 1, 1.0);
        assert!(matches!(lu_solve(&m, &[1.0, 1.0]), Err(LinalgError::Singular(_))));
    }

    #[test]
    fn lu_residual_is_small() {
        let g = generate(&StructureSpec::share(6, 4, 3)).unwrap();
        let m = system_matrix(&g, 0.95).unwrap();
        let rhs: Vec<f64> = (0..g.n()).map(|i| 1.0 + i as f64).collect();
        let x = lu_solve(&m, &rhs).unwrap();
        let back = m.mul_vec(&x);
        let res: Vec<f64> = back.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(max_abs(&res) <= 1e-10 * max_abs(&rhs));
    }

    #[test]
    fn invert_recovers_geometric_structure_for_line() {
        let g = generate(&StructureSpec::line(5)).unwrap();
        let c = 0.5;
        let m = system_matrix(&g, c).unwrap();
        let inv = invert(&m).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if j >= i { c.powi((j - i) as i32) } else { 0.0 };
                assert!((inv.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invert_satisfies_residual_contract() {
        let g = generate(&StructureSpec::complete_with_outlink(6)).unwrap();
        let m = system_matrix(&g, 0.85).unwrap();
        let inv = invert(&m).unwrap();
        assert!(m.mul(&inv).max_abs_diff(&DenseMatrix::identity(m.rows())) <= 1e-9);
    }

    #[test]
    fn block_invert_matches_invert_on_block_diagonal() {
        let mut m = DenseMatrix::identity(4);
        m.set(0, 1, 0.3);
        m.set(1, 0, 0.1);
        m.set(2, 3, -0.4);
        m.set(3, 2, 0.2);
        let full = invert(&m).unwrap();
        let blocked = block_invert(&m, BlockPartition { split: 2 }).unwrap();
        assert!(full.max_abs_diff(&blocked) <= 1e-12);
    }

    #[test]
    fn block_invert_matches_invert_on_rank_system() {
        let g = generate(&StructureSpec::complete_with_outlink(5)).unwrap();
        let m = system_matrix(&g, 0.85).unwrap();
        let full = invert(&m).unwrap();
        for split in 1..m.rows() {
            let blocked = block_invert(&m, BlockPartition { split }).unwrap();
            assert!(full.max_abs_diff(&blocked) <= 1e-9, "split {split}");
        }
    }

    #[test]
    fn block_invert_reports_singular_block() {
        // E block is singular while the whole matrix is too; the E failure
        // is reported first.
        let mut m = DenseMatrix::identity(3);
        m.set(2, 2, 0.0);
        let err = block_invert(&m, BlockPartition { split: 1 }).unwrap_err();
        assert_eq!(err, LinalgError::Singular("trailing block E".into()));
    }

    #[test]
    fn block_invert_rejects_bad_split() {
        let m = DenseMatrix::identity(3);
        assert!(block_invert(&m, BlockPartition { split: 0 }).is_err());
        assert!(block_invert(&m, BlockPartition { split: 3 }).is_err());
    }

    #[test]
    fn complete_graph_inverse_small_case() {
        // n = 2, c = 0.5: q = 1 - 0.25, diagonal 4/3, off-diagonal 2/3.
        let inv = complete_graph_inverse(2, 0.5).unwrap();
        assert!((inv.get(0, 0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((inv.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn complete_graph_inverse_matches_numeric_inverse() {
        for n in [2usize, 3, 5, 9] {
            for c in [0.05, 0.5, 0.85, 0.95] {
                let g = generate(&StructureSpec::complete(n)).unwrap();
                let m = system_matrix(&g, c).unwrap();
                let num = invert(&m).unwrap();
                let ana = complete_graph_inverse(n, c).unwrap();
                assert!(num.max_abs_diff(&ana) <= 1e-11, "n={n} c={c}");
            }
        }
    }

    #[test]
    fn complete_graph_inverse_row_sums_hit_no_dangling_bound() {
        let inv = complete_graph_inverse(7, 0.85).unwrap();
        let want = 1.0 / (1.0 - 0.85);
        for i in 0..7 {
            let s: f64 = (0..7).map(|j| inv.get(i, j)).sum();
            assert!((s - want).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_graph_inverse_near_zero_c_is_identity() {
        let inv = complete_graph_inverse(4, 1e-12).unwrap();
        assert!(inv.max_abs_diff(&DenseMatrix::identity(4)) <= 1e-11);
    }

    #[test]
    fn complete_graph_inverse_rejects_small_n() {
        assert_eq!(complete_graph_inverse(1, 0.5).unwrap_err(), LinalgError::InvalidN(1));
    }
}
