//! Small linear-algebra kernels shared by the assembly and solver modules.
//!
//! Assembled operators are block sparse with very regular structure: mass
//! matrices are block diagonal up to the stabilized cluster around the
//! interface, and space-time slab systems are banded when degrees of freedom
//! are numbered along the mesh. The types here exploit exactly that and no
//! more; dense factorizations of the small coupled blocks go through
//! `nalgebra`.

mod banded;
mod csr;

pub use banded::{BandedError, BandedLu};
pub use csr::{BlockDiagSolver, CsrMatrix, SolverError, Triplets};

use nalgebra::DMatrix;

/// Union of per-component condition numbers of a symmetric block-diagonal
/// matrix. Connected components of the sparsity graph are factored densely;
/// the singular values of the whole matrix are the union over components, so
/// this equals the dense two-norm condition number.
pub fn block_condition_number(m: &CsrMatrix) -> f64 {
    let comps = m.connected_components();
    let mut sig_max: f64 = 0.0;
    let mut sig_min = f64::INFINITY;
    for comp in &comps {
        let block = m.gather_block(comp);
        let svd = block.singular_values();
        for s in svd.iter() {
            sig_max = sig_max.max(*s);
            sig_min = sig_min.min(*s);
        }
    }
    sig_max / sig_min
}

/// Smallest eigenvalue of a symmetric matrix given densely.
pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_condition_number_of_identity_is_one() {
        let mut t = Triplets::new(4, 4);
        for i in 0..4 {
            t.push(i, i, 1.0);
        }
        let m = t.into_csr();
        assert!((block_condition_number(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn block_condition_number_matches_dense_svd() {
        // Two decoupled 2x2 blocks.
        let mut t = Triplets::new(4, 4);
        t.push(0, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 2.0);
        t.push(2, 2, 5.0);
        t.push(2, 3, -1.0);
        t.push(3, 2, -1.0);
        t.push(3, 3, 5.0);
        let m = t.into_csr();
        let dense = m.to_dense();
        let sv = dense.singular_values();
        let kappa_dense = sv.max() / sv.min();
        assert!((block_condition_number(&m) - kappa_dense).abs() < 1e-12 * kappa_dense);
    }
}
