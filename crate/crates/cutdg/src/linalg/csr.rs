use nalgebra::DMatrix;

/// Accumulator for matrix entries in arbitrary order.
///
/// Entries with the same position are summed. Conversion to CSR sorts by
/// (row, col) with a stable sort and adds duplicates in insertion order, so
/// the assembled matrix is bit-reproducible for a fixed emission sequence.
#[derive(Clone, Debug)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row as u32, col as u32, value));
        }
    }

    pub fn max_band(&self) -> usize {
        self.entries
            .iter()
            .map(|&(r, c, _)| (r as i64 - c as i64).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(u32, u32)> = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r as usize + 1] += 1;
                cols.push(c as usize);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, cols, vals }
    }
}

/// Compressed sparse row matrix with f64 entries.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// out = self * x
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for i in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[i] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// xᵀ A y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.nrows {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut row = 0.0;
            for k in lo..hi {
                row += self.vals[k] * y[self.cols[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] += *v;
            }
        }
        m
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute difference against another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let a = self.to_dense();
        let b = other.to_dense();
        (a - b).abs().max()
    }

    /// Connected components of the symmetric sparsity graph (an edge between
    /// i and j whenever entry (i,j) or (j,i) is structurally present).
    /// Components are returned with sorted indices, ordered by smallest index.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.nrows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for k in lo..hi {
                let j = self.cols[k];
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut buckets: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            buckets.entry(r).or_default().push(i);
        }
        buckets.into_values().collect()
    }

    /// Dense submatrix on the given (sorted) index set.
    pub fn gather_block(&self, idx: &[usize]) -> DMatrix<f64> {
        let pos: std::collections::HashMap<usize, usize> =
            idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut block = DMatrix::zeros(idx.len(), idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                if let Some(&kc) = pos.get(c) {
                    block[(k, kc)] += *v;
                }
            }
        }
        block
    }

    /// Symmetry defect max |A - Aᵀ|.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.transpose()).abs().max()
    }
}

/// Direct solver for symmetric positive definite block-diagonal systems.
///
/// The matrix is split into connected components that are factored once with
/// a dense Cholesky (LU fallback for indefinite diagnostics) and reused for
/// every solve. Mass matrices couple only elements sharing stabilized faces,
/// so components stay small.
pub struct BlockDiagSolver {
    components: Vec<ComponentFactor>,
    n: usize,
    /// 2-norm condition estimate over all components.
    pub condition: f64,
    /// Smallest eigenvalue seen across components (symmetrized).
    pub min_eigenvalue: f64,
}

struct ComponentFactor {
    idx: Vec<usize>,
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl BlockDiagSolver {
    pub fn new(m: &CsrMatrix) -> Result<Self, SolverError> {
        let comps = m.connected_components();
        let mut components = Vec::with_capacity(comps.len());
        let mut sig_max: f64 = 0.0;
        let mut sig_min = f64::INFINITY;
        let mut min_eig = f64::INFINITY;
        for idx in comps {
            let block = m.gather_block(&idx);
            let sym = (block.clone() + block.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            for e in eig.eigenvalues.iter() {
                min_eig = min_eig.min(*e);
                sig_max = sig_max.max(e.abs());
                sig_min = sig_min.min(e.abs());
            }
            match nalgebra::Cholesky::new(block.clone()) {
                Some(chol) => components.push(ComponentFactor { idx, chol: Some(chol), lu: None }),
                None => {
                    let lu = block.lu();
                    if lu.determinant().abs() == 0.0 {
                        return Err(SolverError::Singular { condition: sig_max / sig_min.max(f64::MIN_POSITIVE) });
                    }
                    components.push(ComponentFactor { idx, chol: None, lu: Some(lu) });
                }
            }
        }
        Ok(Self { components, n: m.nrows(), condition: sig_max / sig_min, min_eigenvalue: min_eig })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        for comp in &self.components {
            let mut local = nalgebra::DVector::from_iterator(comp.idx.len(), comp.idx.iter().map(|&i| v[i]));
            if let Some(chol) = &comp.chol {
                chol.solve_mut(&mut local);
            } else if let Some(lu) = &comp.lu {
                local = lu.solve(&local).expect("factored block must be solvable");
            }
            for (k, &i) in comp.idx.iter().enumerate() {
                v[i] = local[k];
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_accumulate_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.5);
        t.push(1, 0, -1.0);
        let m = t.into_csr();
        assert_eq!(m.nnz(), 2);
        let d = m.to_dense();
        assert_eq!(d[(0, 0)], 3.5);
        assert_eq!(d[(1, 0)], -1.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 1, 2.0);
        t.push(1, 0, -3.0);
        t.push(2, 2, 4.0);
        t.push(2, 0, 0.5);
        let m = t.into_csr();
        let x = vec![1.0, 2.0, 3.0];
        let y = m.mul_vec(&x);
        let yd = m.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..3 {
            assert!((y[i] - yd[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn components_found() {
        let mut t = Triplets::new(5, 5);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(3, 4, 1.0);
        for i in 0..5 {
            t.push(i, i, 1.0);
        }
        let comps = t.into_csr().connected_components();
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    #[test]
    fn block_solver_solves_spd_system() {
        let mut t = Triplets::new(4, 4);
        t.push(0, 0, 4.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 3.0);
        t.push(2, 2, 2.0);
        t.push(3, 3, 5.0);
        let m = t.into_csr();
        let solver = BlockDiagSolver::new(&m).unwrap();
        let x_true = vec![1.0, -2.0, 0.5, 3.0];
        let mut rhs = m.mul_vec(&x_true);
        solver.solve_in_place(&mut rhs);
        for i in 0..4 {
            assert!((rhs[i] - x_true[i]).abs() < 1e-13);
        }
        assert!(solver.min_eigenvalue > 0.0);
    }
}
