//! Bundled experiment presets with their exact solutions and reference
//! configurations.

use crate::acoustic::{AcousticMaterial, AcousticSystem};
use crate::geometry1d::Side;
use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetId {
    StationaryScalarAccuracy,
    StationaryScalarConservation,
    Acoustic,
    MovingAccuracy,
    MovingConservation,
    Coupled,
    TwodConvergence,
    TwodConservation,
    AlphaSweep,
    RegionMap,
}

impl PresetId {
    pub fn all() -> [PresetId; 10] {
        use PresetId::*;
        [
            StationaryScalarAccuracy,
            StationaryScalarConservation,
            Acoustic,
            MovingAccuracy,
            MovingConservation,
            Coupled,
            TwodConvergence,
            TwodConservation,
            AlphaSweep,
            RegionMap,
        ]
    }

    pub fn name(self) -> &'static str {
        use PresetId::*;
        match self {
            StationaryScalarAccuracy => "stationary_scalar_accuracy",
            StationaryScalarConservation => "stationary_scalar_conservation",
            Acoustic => "acoustic",
            MovingAccuracy => "moving_accuracy",
            MovingConservation => "moving_conservation",
            Coupled => "coupled",
            TwodConvergence => "twod_convergence",
            TwodConservation => "twod_conservation",
            AlphaSweep => "alpha_sweep",
            RegionMap => "region_map",
        }
    }

    pub fn parse(s: &str) -> Option<PresetId> {
        PresetId::all().into_iter().find(|p| p.name() == s)
    }
}

/// Stationary scalar accuracy problem: two-sided sine waves coupled through
/// the interface at x_Γ = 1e-4 with speeds (2, 1).
pub struct StationaryAccuracy;

impl StationaryAccuracy {
    pub const A: (f64, f64) = (2.0, 1.0);
    pub const X_GAMMA: f64 = 1e-4;

    pub fn initial(side: Side, x: f64) -> f64 {
        match side {
            Side::One => (TWO_PI * x).sin(),
            Side::Two => 2.0 * (2.0 * TWO_PI * (x - Self::X_GAMMA / 2.0)).sin(),
        }
    }

    pub fn exact(side: Side, x: f64, t: f64) -> f64 {
        match side {
            Side::One => (TWO_PI * (x - 2.0 * t)).sin(),
            Side::Two => 2.0 * (2.0 * TWO_PI * (x - t - Self::X_GAMMA / 2.0)).sin(),
        }
    }

    pub fn inflow(t: f64) -> f64 {
        (TWO_PI * (-1.0 - 2.0 * t)).sin()
    }

    pub fn inflow_dt(t: f64) -> f64 {
        -2.0 * TWO_PI * (TWO_PI * (-1.0 - 2.0 * t)).cos()
    }

    pub fn inflow_dtt(t: f64) -> f64 {
        -4.0 * TWO_PI * TWO_PI * (TWO_PI * (-1.0 - 2.0 * t)).sin()
    }
}

/// Stationary conservation problem: zero initial data, inflow wave train.
pub struct StationaryConservation;

impl StationaryConservation {
    pub const A: (f64, f64) = (2.0, 1.0);
    pub const X_GAMMA: f64 = 1e-4;

    pub fn inflow(t: f64) -> f64 {
        (4.0 * PI * (-1.0 + 3.0 * t)).sin()
    }

    pub fn inflow_dt(t: f64) -> f64 {
        12.0 * PI * (4.0 * PI * (-1.0 + 3.0 * t)).cos()
    }

    pub fn inflow_dtt(t: f64) -> f64 {
        -36.0 * PI * PI * 4.0 * PI * (4.0 * PI * (-1.0 + 3.0 * t)).sin()
    }

    pub fn exact(side: Side, x: f64, t: f64) -> f64 {
        let g = Self::inflow;
        match side {
            Side::One => {
                let tau = t - (x + 1.0) / 2.0;
                if tau >= 0.0 {
                    g(tau)
                } else {
                    0.0
                }
            }
            Side::Two => {
                let tau = t - x + (Self::X_GAMMA + (-1.0)) / 2.0;
                if tau >= 0.0 {
                    2.0 * g(tau)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Acoustic two-material pulse: right-going incident wave reflected and
/// transmitted at the impedance jump.
pub struct AcousticPreset;

impl AcousticPreset {
    pub const DOMAIN: (f64, f64) = (0.0, 300.0);
    pub const X_GAMMA: f64 = 96.3;
    pub const T0: f64 = 0.051;
    pub const FC: f64 = 50.0;
    pub const T_END: f64 = 0.039;

    pub fn system() -> AcousticSystem {
        AcousticSystem::new(AcousticMaterial::new(1000.0, 1500.0), AcousticMaterial::new(1200.0, 2800.0))
    }

    /// Windowed sinusoidal pulse profile.
    pub fn window(xi: f64) -> f64 {
        if xi <= 0.0 || xi >= 1.0 / Self::FC {
            return 0.0;
        }
        let w = TWO_PI * Self::FC;
        (w * xi).sin() - (21.0 / 32.0) * (2.0 * w * xi).sin() + (63.0 / 768.0) * (4.0 * w * xi).sin()
            - (1.0 / 512.0) * (8.0 * w * xi).sin()
    }

    /// Incident velocity profile: u = psi(t - x/c1).
    fn psi(s: f64) -> f64 {
        -Self::window(Self::T0 + s)
    }

    /// Exact primitive solution (velocity, pressure) per side at time t.
    pub fn exact_primitive(side: Side, x: f64, t: f64) -> (f64, f64) {
        let sys = Self::system();
        let m1 = sys.material_1;
        let m2 = sys.material_2;
        let (z1, z2) = (m1.impedance(), m2.impedance());
        let xg = Self::X_GAMMA;
        match side {
            Side::One => {
                let r = (z1 - z2) / (z1 + z2);
                let inc = Self::psi(t - x / m1.c);
                let refl = r * Self::psi(t + (x - 2.0 * xg) / m1.c);
                (inc + refl, z1 * inc - z1 * refl)
            }
            Side::Two => {
                let tr = 2.0 * z1 / (z1 + z2);
                let v = tr * Self::psi(t - xg / m1.c - (x - xg) / m2.c);
                (v, z2 * v)
            }
        }
    }

    /// Initial conservative state (m, q); the pulse starts inside material 1.
    pub fn initial_conservative(x: f64) -> (f64, f64) {
        let sys = Self::system();
        let m1 = sys.material_1;
        let u = Self::psi(-x / m1.c);
        (m1.rho * u, u / m1.c)
    }
}

/// Moving-interface accuracy problem: constant interface speed 0.111.
pub struct MovingAccuracy;

impl MovingAccuracy {
    pub const A: (f64, f64) = (2.0, 1.0);
    pub const X_GAMMA0: f64 = 1e-4;
    pub const VELOCITY: f64 = 0.111;
    pub const T_END: f64 = 0.1;

    pub fn beta() -> f64 {
        (Self::A.0 - Self::VELOCITY) / (Self::A.1 - Self::VELOCITY)
    }

    pub fn exact(side: Side, x: f64, t: f64) -> f64 {
        let beta = Self::beta();
        match side {
            Side::One => (TWO_PI * (x - 2.0 * t)).sin(),
            Side::Two => beta * (TWO_PI * beta * (x - t) + TWO_PI * Self::X_GAMMA0 * (1.0 - beta)).sin(),
        }
    }

    pub fn inflow(t: f64) -> f64 {
        Self::exact(Side::One, -1.0, t)
    }
}

/// Moving-interface conservation problem: sinusoidally oscillating interface,
/// zero initial data, inflow wave train.
pub struct MovingConservation;

impl MovingConservation {
    pub const A: (f64, f64) = (2.0, 1.0);
    pub const X_GAMMA0: f64 = -0.499;

    pub fn amplitude() -> f64 {
        0.4 * (Self::X_GAMMA0 - (-1.0)) * (1.0 - Self::X_GAMMA0)
    }

    pub fn inflow(t: f64) -> f64 {
        (4.0 * PI * (-1.0 + 3.0 * t)).sin()
    }
}

/// 2D convergence problem: plane waves across the diagonal line x + y = 0.5.
pub struct TwodConvergence;

impl TwodConvergence {
    pub const A1: [f64; 2] = [3.0, 1.0];
    pub const A2: [f64; 2] = [2.0, 1.0];
    pub const C0: f64 = 0.5;

    pub fn exact(side: usize, x: f64, y: f64, t: f64) -> f64 {
        if side == 0 {
            (PI * (x + y - 4.0 * t)).sin()
        } else {
            4.0 / 3.0 * (4.0 / 3.0 * PI * (x + y - 3.0 * t - Self::C0 / 4.0)).sin()
        }
    }

    pub fn exact_dt(side: usize, x: f64, y: f64, t: f64) -> f64 {
        if side == 0 {
            -4.0 * PI * (PI * (x + y - 4.0 * t)).cos()
        } else {
            -4.0 * PI * (4.0 / 3.0) * (4.0 / 3.0 * PI * (x + y - 3.0 * t - Self::C0 / 4.0)).cos()
        }
    }

    pub fn exact_dtt(side: usize, x: f64, y: f64, t: f64) -> f64 {
        if side == 0 {
            -16.0 * PI * PI * (PI * (x + y - 4.0 * t)).sin()
        } else {
            -16.0 * PI * PI * (4.0f64 / 3.0).powi(2) * (4.0 / 3.0 * PI * (x + y - 3.0 * t - Self::C0 / 4.0)).sin()
        }
    }
}

/// 2D conservation problem: circular indicator crossing the line x + y = 0.25.
pub struct TwodConservation;

impl TwodConservation {
    pub const A1: [f64; 2] = [3.0, 1.0];
    pub const A2: [f64; 2] = [1.0, 2.0];
    pub const C0: f64 = 0.25;
    pub const CENTER: [f64; 2] = [-0.3, -0.3];
    pub const RADIUS: f64 = 0.3;
    pub const T_END: f64 = 0.4;

    pub fn initial(x: f64, y: f64) -> f64 {
        let dx = x - Self::CENTER[0];
        let dy = y - Self::CENTER[1];
        if dx * dx + dy * dy <= Self::RADIUS * Self::RADIUS {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in PresetId::all() {
            assert_eq!(PresetId::parse(p.name()), Some(p));
        }
        assert_eq!(PresetId::parse("nope"), None);
    }

    #[test]
    fn stationary_accuracy_satisfies_interface_condition() {
        // a1 u1 = a2 u2 at the interface for all t.
        for k in 0..50 {
            let t = 0.02 * k as f64;
            let u1 = StationaryAccuracy::exact(Side::One, StationaryAccuracy::X_GAMMA, t);
            let u2 = StationaryAccuracy::exact(Side::Two, StationaryAccuracy::X_GAMMA, t);
            assert!((2.0 * u1 - u2).abs() < 1e-12, "t={t}");
        }
        // Initial data matches the exact solution at t = 0.
        for x in [-0.9, -0.3, 0.0001, 0.4, 0.97] {
            let side = if x < 1e-4 { Side::One } else { Side::Two };
            assert!(
                (StationaryAccuracy::initial(side, x) - StationaryAccuracy::exact(side, x, 0.0)).abs() < 1e-14
            );
        }
        // Inflow matches the side-1 exact trace at the left boundary.
        for k in 0..10 {
            let t = 0.1 * k as f64;
            assert!((StationaryAccuracy::inflow(t) - StationaryAccuracy::exact(Side::One, -1.0, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn conservation_exact_satisfies_interface_condition() {
        for k in 1..40 {
            let t = 0.025 * k as f64;
            let u1 = StationaryConservation::exact(Side::One, StationaryConservation::X_GAMMA, t);
            let u2 = StationaryConservation::exact(Side::Two, StationaryConservation::X_GAMMA, t);
            assert!((2.0 * u1 - u2).abs() < 1e-10, "t={t}: {u1} {u2}");
        }
    }

    #[test]
    fn moving_accuracy_interface_condition_along_path() {
        // (a1 - x') u1 = (a2 - x') u2 along the moving interface.
        for k in 0..50 {
            let t = 0.002 * k as f64;
            let xg = MovingAccuracy::X_GAMMA0 + MovingAccuracy::VELOCITY * t;
            let u1 = MovingAccuracy::exact(Side::One, xg, t);
            let u2 = MovingAccuracy::exact(Side::Two, xg, t);
            let f1 = (2.0 - MovingAccuracy::VELOCITY) * u1;
            let f2 = (1.0 - MovingAccuracy::VELOCITY) * u2;
            assert!((f1 - f2).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn acoustic_exact_matches_initial_state() {
        let sys = AcousticPreset::system();
        for x in [10.0, 46.6, 60.0, 76.4, 90.0, 200.0] {
            let side = if x <= AcousticPreset::X_GAMMA { Side::One } else { Side::Two };
            let (u, p) = AcousticPreset::exact_primitive(side, x, 0.0);
            let (m, q) = AcousticPreset::initial_conservative(x);
            let mat = sys.material(side);
            assert!((m - mat.rho * u).abs() < 1e-12 * m.abs().max(1.0), "x={x}");
            assert!((q - p / (mat.rho * mat.c * mat.c)).abs() < 1e-15, "x={x}");
        }
        // Pulse support sits inside material 1.
        let (m, _q) = AcousticPreset::initial_conservative(60.0);
        assert!(m.abs() > 0.0);
        let (m, _q) = AcousticPreset::initial_conservative(100.0);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn acoustic_exact_continuity_at_interface() {
        // [u] = [p] = 0 across the interface for all times.
        for k in 0..80 {
            let t = 0.0005 * k as f64;
            let (u1, p1) = AcousticPreset::exact_primitive(Side::One, AcousticPreset::X_GAMMA, t);
            let (u2, p2) = AcousticPreset::exact_primitive(Side::Two, AcousticPreset::X_GAMMA, t);
            assert!((u1 - u2).abs() < 1e-12 * u1.abs().max(1e-6), "t={t}");
            assert!((p1 - p2).abs() < 1e-9 * p1.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn twod_exact_satisfies_interface_condition() {
        let n = [1.0 / 2.0f64.sqrt(), 1.0 / 2.0f64.sqrt()];
        let an1 = TwodConvergence::A1[0] * n[0] + TwodConvergence::A1[1] * n[1];
        let an2 = TwodConvergence::A2[0] * n[0] + TwodConvergence::A2[1] * n[1];
        for k in 0..20 {
            let t = 0.05 * k as f64;
            let (x, y) = (0.1, TwodConvergence::C0 - 0.1);
            let f1 = an1 * TwodConvergence::exact(0, x, y, t);
            let f2 = an2 * TwodConvergence::exact(1, x, y, t);
            assert!((f1 - f2).abs() < 1e-12, "t={t}");
        }
    }
}
