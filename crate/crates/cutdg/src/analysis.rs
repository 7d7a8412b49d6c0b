//! Interface stability theory as executable checks: S-matrices for the scalar
//! (stationary and moving) and acoustic interface treatments, feasibility
//! intervals for the energy weight η, and weighted-energy evaluation.

use crate::acoustic::AcousticSystem;
use crate::assembly1d::DgOperators;
use crate::geometry1d::Side;
use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AnalysisError {
    #[error("effective speeds have mixed signs; interface problem is ill-posed")]
    IllPosedInterface,
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    AsymmetricInput { defect: f64 },
}

/// Symmetric quadratic-form matrix of the interface terms: energy decay
/// requires positive semidefiniteness.
#[derive(Clone, Debug)]
pub struct StabilityMatrix {
    pub entries: DMatrix<f64>,
}

/// Scalar 2x2 interface matrix. For a moving interface pass the interface
/// speed; effective speeds ã_i = a_i - x_Γ' replace a_i.
pub fn build_s_scalar(
    a1: f64,
    a2: f64,
    lambda1: f64,
    lambda2: f64,
    eta: f64,
    x_gamma_prime: f64,
) -> Result<StabilityMatrix, AnalysisError> {
    let at1 = a1 - x_gamma_prime;
    let at2 = a2 - x_gamma_prime;
    if at1 == 0.0 || at2 == 0.0 || at1 * at2 < 0.0 {
        return Err(AnalysisError::IllPosedInterface);
    }
    let s11 = (0.5 - lambda1) * at1;
    let s22 = -(lambda2 + 0.5) * eta * at2;
    let s12 = 0.5 * (at2 * lambda1 + at1 * eta * lambda2);
    Ok(StabilityMatrix { entries: DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22]) })
}

/// Blocked 4x4 acoustic interface matrix:
/// diag blocks (1/2-λ1) A1ᵀB1 and -(1/2+λ2) A2ᵀB2, off-diagonal
/// ((λ1+λ2)/2) A1ᵀB2; symmetric because (A2ᵀB1)ᵀ = A1ᵀB2.
pub fn build_s_acoustic(system: &AcousticSystem, lambda1: f64, lambda2: f64) -> StabilityMatrix {
    let a1 = system.flux_matrix(Side::One);
    let a2 = system.flux_matrix(Side::Two);
    let b1 = system.energy_matrix(Side::One);
    let b2 = system.energy_matrix(Side::Two);
    let d11 = (a1.transpose() * b1) * (0.5 - lambda1);
    let d22 = (a2.transpose() * b2) * (-(0.5 + lambda2));
    let off_ur = (a1.transpose() * b2) * (0.5 * (lambda1 + lambda2));
    let off_ll = (a2.transpose() * b1) * (0.5 * (lambda1 + lambda2));
    let mut s = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            s[(i, j)] = d11[(i, j)];
            s[(i + 2, j + 2)] = d22[(i, j)];
            s[(i, j + 2)] = off_ur[(i, j)];
            s[(i + 2, j)] = off_ll[(i, j)];
        }
    }
    StabilityMatrix { entries: s }
}

/// Positive-semidefiniteness test; returns the smallest eigenvalue.
pub fn psd_check(s: &StabilityMatrix, tol: f64) -> Result<(bool, f64), AnalysisError> {
    let m = &s.entries;
    let defect = (m - m.transpose()).abs().max();
    let scale = m.abs().max().max(1.0);
    if defect > 1e-12 * scale {
        return Err(AnalysisError::AsymmetricInput { defect });
    }
    let min_eig = if m.nrows() == 2 {
        // Closed form for symmetric 2x2.
        let (a, b, d) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let tr = a + d;
        let disc = ((a - d) * 0.5).hypot(b);
        0.5 * tr - disc
    } else {
        let eig = m.clone().symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let norm = m.abs().max();
    Ok((min_eig >= -tol * norm.max(1e-300), min_eig))
}

/// Default relative tolerance for PSD checks.
pub const PSD_TOL: f64 = 1e-12;

/// Feasible η interval (closed) or None when empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Feasible η range making the scalar S matrix positive semi-definite.
///
/// Conservative pairs (λ2 = λ1 - 1): for positive speeds the condition reads
/// (λ2+1)²/λ2² ≤ ηβ ≤ 1 with β = a1/a2 (reversed for negative speeds); the
/// neutral pair λ = (1/2, -1/2) pins ηβ = 1. Without the conservation
/// relation the wider sufficient region needs λ1 - λ2 ≥ 1/2.
pub fn feasible_eta(
    a1: f64,
    a2: f64,
    lambda1: f64,
    lambda2: f64,
    conservative: bool,
) -> Option<EtaInterval> {
    if a1 == 0.0 || a2 == 0.0 || a1 * a2 < 0.0 {
        return None;
    }
    let beta = a1 / a2;
    let positive = a1 > 0.0;
    if conservative {
        if (lambda2 - lambda1 + 1.0).abs() > 1e-12 {
            return None;
        }
        let ok_signs = if positive {
            lambda1 <= 0.5 && lambda2 <= -0.5
        } else {
            lambda1 >= 0.5 && lambda2 >= -0.5
        };
        if !ok_signs {
            return None;
        }
        let ratio = (lambda2 + 1.0) * (lambda2 + 1.0) / (lambda2 * lambda2);
        let (lo_bp, hi_bp) = if positive { (ratio, 1.0) } else { (1.0, ratio) };
        if lo_bp > hi_bp {
            return None;
        }
        return Some(EtaInterval { lo: lo_bp / beta, hi: hi_bp / beta });
    }
    // Sufficient region without the conservation relation.
    let ok_signs = if positive {
        lambda1 <= 0.5 && lambda2 <= -0.5
    } else {
        lambda1 >= 0.5 && lambda2 >= -0.5
    };
    if !ok_signs || lambda1 - lambda2 < 0.5 {
        return None;
    }
    let gap = lambda1 - lambda2 - 0.5;
    let delta = gap * (2.0 * lambda1 - 1.0) * (lambda2 + 0.5);
    if delta < 0.0 {
        return None;
    }
    let mid = gap + lambda1 * lambda2;
    let l2sq = lambda2 * lambda2;
    if l2sq == 0.0 {
        return None;
    }
    let lo_bp = ((mid - delta.sqrt()) / l2sq).max(0.0);
    let hi_bp = (mid + delta.sqrt()) / l2sq;
    if hi_bp <= 0.0 || lo_bp > hi_bp {
        return None;
    }
    Some(EtaInterval { lo: lo_bp / beta, hi: hi_bp / beta })
}

/// Weighted energy 1/2 (uᵀ W M u) with the diagonal side weighting
/// W = blkdiag(I, η I) and M the stabilized mass.
pub fn weighted_energy(ops: &DgOperators, u: &[f64], eta: f64) -> f64 {
    assert!(eta > 0.0);
    let split = ops.dof_map.range1.len() * ops.dof_map.block();
    let weighted: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, v)| if i < split { *v } else { eta * v })
        .collect();
    0.5 * ops.mass.bilinear(&weighted, u)
}

/// Side weighting applied to a vector (1 on side 1, η on side 2).
pub fn side_weighting(ops: &DgOperators, eta: f64, u: &[f64]) -> Vec<f64> {
    let split = ops.dof_map.range1.len() * ops.dof_map.block();
    u.iter().enumerate().map(|(i, v)| if i < split { *v } else { eta * v }).collect()
}

/// Brute-force fallback: scan a log-spaced η grid for PSD points.
pub fn eta_grid_scan(
    a1: f64,
    a2: f64,
    lambda1: f64,
    lambda2: f64,
    x_gamma_prime: f64,
    grid: (f64, f64, usize),
) -> Vec<f64> {
    let (lo, hi, n) = grid;
    let mut found = Vec::new();
    for k in 0..n {
        let eta = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        if let Ok(s) = build_s_scalar(a1, a2, lambda1, lambda2, eta, x_gamma_prime) {
            if psd_check(&s, PSD_TOL).map(|(ok, _)| ok).unwrap_or(false) {
                found.push(eta);
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::AcousticMaterial;
    use rand::{Rng, SeedableRng};

    #[test]
    fn neutral_pair_gives_zero_matrix() {
        // ηβ = 1 with λ = (1/2, -1/2) zeroes S.
        let s = build_s_scalar(2.0, 1.0, 0.5, -0.5, 0.5, 0.0).unwrap();
        assert!(s.entries.abs().max() < 1e-15);
        let (ok, min) = psd_check(&s, PSD_TOL).unwrap();
        assert!(ok && min.abs() < 1e-15);
    }

    #[test]
    fn direct_entries_example() {
        let s = build_s_scalar(2.0, 1.0, 0.1, -0.9, 0.2, 0.0).unwrap();
        assert!((s.entries[(0, 0)] - 0.8).abs() < 1e-15);
        assert!((s.entries[(1, 1)] - 0.08).abs() < 1e-15);
        assert!((s.entries[(0, 1)] + 0.13).abs() < 1e-15);
        let (ok, _) = psd_check(&s, PSD_TOL).unwrap();
        assert!(ok);
    }

    #[test]
    fn moving_case_substitutes_effective_speeds() {
        let s = build_s_scalar(2.0, 1.0, 0.1, -0.9, 0.2, 0.111).unwrap();
        let direct = build_s_scalar(2.0 - 0.111, 1.0 - 0.111, 0.1, -0.9, 0.2, 0.0).unwrap();
        assert!((s.entries.clone() - direct.entries).abs().max() < 1e-15);
    }

    #[test]
    fn feasible_interval_closed_form() {
        let iv = feasible_eta(2.0, 1.0, 0.1, -0.9, true).unwrap();
        let lo_bp = 0.01f64 / 0.81;
        assert!((iv.lo - lo_bp / 2.0).abs() < 1e-15);
        assert!((iv.hi - 0.5).abs() < 1e-15);
        // Every η in the interval yields PSD S.
        for eta in [iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi] {
            let s = build_s_scalar(2.0, 1.0, 0.1, -0.9, eta, 0.0).unwrap();
            assert!(psd_check(&s, 1e-10).unwrap().0, "eta={eta}");
        }
    }

    #[test]
    fn neutral_pair_interval_degenerates() {
        let iv = feasible_eta(2.0, 1.0, 0.5, -0.5, true).unwrap();
        assert!((iv.lo - 0.5).abs() < 1e-14);
        assert!((iv.hi - 0.5).abs() < 1e-14);
    }

    #[test]
    fn outside_region_is_empty() {
        assert_eq!(feasible_eta(2.0, 1.0, 0.6, -0.5, true), None);
        assert_eq!(feasible_eta(2.0, 1.0, 0.6, -0.4, true), None);
        // Mixed signs ill-posed.
        assert_eq!(feasible_eta(2.0, -1.0, 0.1, -0.9, true), None);
    }

    #[test]
    fn lemma2_region_sample_psd() {
        let (a1, a2) = (1.0, 1.0);
        // λ2 > -1/2 makes S22 = -(λ2+1/2) η a2 negative for every η > 0, so
        // the PSD set is empty no matter how large the gap λ1 - λ2 is.
        assert_eq!(feasible_eta(a1, a2, 0.5, -0.25, false), None);
        let scan = eta_grid_scan(a1, a2, 0.5, -0.25, 0.0, (1e-3, 10.0, 10_000));
        assert!(scan.is_empty());
        // Boundary sample (λ2 = -1/2): the interval degenerates to a point
        // that is still PSD.
        let iv = feasible_eta(a1, a2, 0.25, -0.5, false).unwrap();
        assert!((iv.hi - iv.lo).abs() < 1e-14);
        let s = build_s_scalar(a1, a2, 0.25, -0.5, 0.5 * (iv.lo + iv.hi), 0.0).unwrap();
        assert!(psd_check(&s, 1e-10).unwrap().0);
        // Interior sample: non-conservative pair with both sign conditions
        // and gap >= 1/2; grid scan agrees with the closed-form interval.
        let (l1, l2) = (0.3, -0.9);
        let iv = feasible_eta(a1, a2, l1, l2, false).unwrap();
        let mid = 0.5 * (iv.lo + iv.hi);
        let s = build_s_scalar(a1, a2, l1, l2, mid, 0.0).unwrap();
        assert!(psd_check(&s, 1e-10).unwrap().0);
        let scan = eta_grid_scan(a1, a2, l1, l2, 0.0, (1e-4, 1e4, 10_000));
        assert!(!scan.is_empty());
        for eta in scan {
            assert!(eta >= iv.lo * (1.0 - 1e-6) && eta <= iv.hi * (1.0 + 1e-6));
        }
    }

    #[test]
    fn zero_matrix_is_psd() {
        let s = StabilityMatrix { entries: DMatrix::zeros(2, 2) };
        let (ok, min) = psd_check(&s, PSD_TOL).unwrap();
        assert!(ok && min == 0.0);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let s = StabilityMatrix { entries: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]) };
        let (ok, min) = psd_check(&s, PSD_TOL).unwrap();
        assert!(!ok && min < 0.0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let s = StabilityMatrix { entries: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]) };
        assert!(matches!(psd_check(&s, PSD_TOL), Err(AnalysisError::AsymmetricInput { .. })));
    }

    #[test]
    fn acoustic_neutral_pair_is_zero_for_random_materials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let sys = AcousticSystem::new(
                AcousticMaterial::new(rng.gen_range(1.0..5e3), rng.gen_range(1.0..5e3)),
                AcousticMaterial::new(rng.gen_range(1.0..5e3), rng.gen_range(1.0..5e3)),
            );
            let s = build_s_acoustic(&sys, 0.5, -0.5);
            assert!(s.entries.abs().max() == 0.0);
        }
    }

    #[test]
    fn acoustic_matrix_is_symmetric() {
        let sys = AcousticSystem::new(AcousticMaterial::new(1000.0, 1500.0), AcousticMaterial::new(1200.0, 2800.0));
        let s = build_s_acoustic(&sys, 0.3, -0.1);
        let defect = (&s.entries - s.entries.transpose()).abs().max();
        assert!(defect <= 1e-14 * s.entries.abs().max());
    }

    #[test]
    fn region_soundness_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..2000 {
            let l1: f64 = rng.gen_range(-2.0..0.5);
            let l2 = l1 - 1.0;
            let a2: f64 = rng.gen_range(0.1..10.0);
            let a1: f64 = rng.gen_range(0.1..10.0);
            let iv = feasible_eta(a1, a2, l1, l2, true).expect("conservative region is nonempty");
            let mid = 0.5 * (iv.lo + iv.hi);
            let s = build_s_scalar(a1, a2, l1, l2, mid, 0.0).unwrap();
            assert!(psd_check(&s, 1e-9).unwrap().0, "l1={l1} a1={a1} a2={a2}");
        }
    }

    #[test]
    fn region_sharpness_just_outside() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let eps: f64 = rng.gen_range(1e-4..1.0);
            let l1 = 0.5 + eps;
            let l2 = l1 - 1.0;
            let a2: f64 = rng.gen_range(0.1..10.0);
            let a1: f64 = rng.gen_range(0.1..10.0);
            assert_eq!(feasible_eta(a1, a2, l1, l2, true), None);
            let scan = eta_grid_scan(a1, a2, l1, l2, 0.0, (1e-6, 100.0, 2000));
            assert!(scan.is_empty(), "PSD found outside region at l1={l1}");
        }
    }
}
