//! The 1D two-material acoustic system in conservative variables.
//!
//! With momentum m = ρu and strain q = p/(ρc²) the system takes the flux
//! form U_t + (A U)_x = 0 with A = ((0, ρc²), (1/ρ, 0)) per material. The
//! physical energy uses the diagonal weights B = diag(1/ρ, ρc²); B A is
//! symmetric and (A₂ᵀB₁)ᵀ = A₁ᵀB₂, which is exactly what makes the
//! conservative penalty pair λ = (1/2, -1/2) energy neutral at the interface.

use crate::assembly1d::{DgOperators, FluxModel};
use crate::geometry1d::Side;
use nalgebra::{DMatrix, Matrix2};

#[derive(Clone, Copy, Debug)]
pub struct AcousticMaterial {
    /// Density in kg/m³.
    pub rho: f64,
    /// Sound speed in m/s.
    pub c: f64,
}

impl AcousticMaterial {
    pub fn new(rho: f64, c: f64) -> Self {
        assert!(rho > 0.0 && c > 0.0, "material parameters must be positive");
        Self { rho, c }
    }

    /// Acoustic impedance ρc.
    pub fn impedance(&self) -> f64 {
        self.rho * self.c
    }
}

/// Convert primitive (velocity, pressure) to conservative (momentum, strain).
pub fn to_conservative(mat: AcousticMaterial, u: f64, p: f64) -> (f64, f64) {
    (mat.rho * u, p / (mat.rho * mat.c * mat.c))
}

/// Convert conservative (momentum, strain) back to primitive (velocity, pressure).
pub fn to_primitive(mat: AcousticMaterial, m: f64, q: f64) -> (f64, f64) {
    (m / mat.rho, q * mat.rho * mat.c * mat.c)
}

#[derive(Clone, Debug)]
pub struct AcousticSystem {
    pub material_1: AcousticMaterial,
    pub material_2: AcousticMaterial,
}

impl AcousticSystem {
    pub fn new(material_1: AcousticMaterial, material_2: AcousticMaterial) -> Self {
        Self { material_1, material_2 }
    }

    pub fn material(&self, side: Side) -> AcousticMaterial {
        match side {
            Side::One => self.material_1,
            Side::Two => self.material_2,
        }
    }

    /// Flux matrix A_i = ((0, ρc²), (1/ρ, 0)).
    pub fn flux_matrix(&self, side: Side) -> Matrix2<f64> {
        let m = self.material(side);
        Matrix2::new(0.0, m.rho * m.c * m.c, 1.0 / m.rho, 0.0)
    }

    /// Energy weight B_i = diag(1/ρ, ρc²).
    pub fn energy_matrix(&self, side: Side) -> Matrix2<f64> {
        let m = self.material(side);
        Matrix2::new(1.0 / m.rho, 0.0, 0.0, m.rho * m.c * m.c)
    }

    /// Flux model for assembly; the spectral radius of A_i is c_i.
    pub fn flux_model(&self) -> FluxModel {
        let to_dyn = |m: Matrix2<f64>| DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
        FluxModel::System {
            a1: to_dyn(self.flux_matrix(Side::One)),
            a2: to_dyn(self.flux_matrix(Side::Two)),
            edge_speeds: [self.material_1.c, self.material_2.c],
        }
    }

    /// Diagonal energy weight for a global dof index.
    fn weight(&self, side: Side, comp: usize) -> f64 {
        let m = self.material(side);
        match comp {
            0 => 1.0 / m.rho,
            _ => m.rho * m.c * m.c,
        }
    }
}

/// Discrete energy E_h = 1/2 (∫ UᵀBU + γ_M J1(U, BU)) evaluated through the
/// assembled stabilized mass matrix.
pub fn acoustic_energy(system: &AcousticSystem, ops: &DgOperators, u: &[f64]) -> f64 {
    assert_eq!(ops.dof_map.n_comp, 2, "acoustic energy needs a 2-component system");
    let n = ops.n_dofs();
    let mut weighted = vec![0.0; n];
    let block = ops.dof_map.block();
    let split = ops.dof_map.range1.len() * block;
    for i in 0..n {
        let side = if i < split { Side::One } else { Side::Two };
        let comp = i % ops.dof_map.n_comp;
        weighted[i] = system.weight(side, comp) * u[i];
    }
    0.5 * ops.mass.bilinear(u, &weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conversion_example() {
        let mat = AcousticMaterial::new(1000.0, 1500.0);
        let (m, q) = to_conservative(mat, 2e-3, 3e3);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((q - 3e3 / 2.25e9).abs() < 1e-21);
        let (u, p) = to_primitive(mat, m, q);
        assert!((u - 2e-3).abs() < 1e-18);
        assert!((p - 3e3).abs() < 1e-12);
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let mat = AcousticMaterial::new(1200.0, 2800.0);
        assert_eq!(to_conservative(mat, 0.0, 0.0), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn matrix_identities_hold(
            rho1 in 1.0f64..5000.0,
            c1 in 1.0f64..5000.0,
            rho2 in 1.0f64..5000.0,
            c2 in 1.0f64..5000.0,
        ) {
            let sys = AcousticSystem::new(AcousticMaterial::new(rho1, c1), AcousticMaterial::new(rho2, c2));
            for side in Side::both() {
                let a = sys.flux_matrix(side);
                let b = sys.energy_matrix(side);
                let ba = b * a;
                prop_assert!((ba - ba.transpose()).abs().max() == 0.0);
            }
            let a1 = sys.flux_matrix(Side::One);
            let a2 = sys.flux_matrix(Side::Two);
            let b1 = sys.energy_matrix(Side::One);
            let b2 = sys.energy_matrix(Side::Two);
            let lhs = (a2.transpose() * b1).transpose();
            let rhs = a1.transpose() * b2;
            let scale = rhs.abs().max().max(1.0);
            prop_assert!((lhs - rhs).abs().max() <= 1e-14 * scale);
        }

        #[test]
        fn round_trip_conversion(
            rho in 1.0f64..5000.0,
            c in 1.0f64..5000.0,
            u in -10.0f64..10.0,
            p in -1e6f64..1e6,
        ) {
            let mat = AcousticMaterial::new(rho, c);
            let (m, q) = to_conservative(mat, u, p);
            let (u2, p2) = to_primitive(mat, m, q);
            prop_assert!((u - u2).abs() <= 1e-15 * u.abs().max(1.0));
            prop_assert!((p - p2).abs() <= 1e-12 * p.abs().max(1.0));
        }
    }

    #[test]
    fn spectral_radius_is_sound_speed() {
        let sys = AcousticSystem::new(AcousticMaterial::new(1000.0, 1500.0), AcousticMaterial::new(1200.0, 2800.0));
        for side in Side::both() {
            let a = sys.flux_matrix(side);
            let eig = nalgebra::DMatrix::from_fn(2, 2, |i, j| a[(i, j)])
                .eigenvalues()
                .expect("real eigenvalues");
            let rad = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            assert!((rad - sys.material(side).c).abs() < 1e-9 * rad);
        }
    }
}
