//! Parameter presets for the eight figures.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::config::{Command, Mode, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FigureId(pub u8);

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId(1),
        FigureId(2),
        FigureId(3),
        FigureId(4),
        FigureId(5),
        FigureId(6),
        FigureId(7),
        FigureId(8),
    ];
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fig{}", self.0)
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.strip_prefix("fig")
            .and_then(|n| n.parse::<u8>().ok())
            .filter(|n| (1..=8).contains(n))
            .map(FigureId)
            .ok_or_else(|| format!("unknown figure '{s}', expected fig1 .. fig8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: FigureId,
    pub title: &'static str,
    /// Full run configuration with the caption parameters.
    pub config: RunConfig,
    /// Pump values swept by the spectral family (empty otherwise).
    pub pumps: Vec<f64>,
    /// Properties the output is expected to show.
    pub checklist: &'static [&'static str],
}

const KAPPA: f64 = 0.01;

fn travelling_wave(id: FigureId) -> RunConfig {
    let a = Complex64::new(1000.0 / 2f64.sqrt(), 0.0);
    RunConfig {
        command: Command::Reproduce(id),
        kappa: KAPPA,
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 0.0,
        eps1: Complex64::default(),
        eps2: Complex64::default(),
        mode: Mode::TravellingWave,
        alpha0: [a, a, Complex64::default()],
        dt: Some(5e-4),
        t_max: 8.0,
        stride: 100,
        n_traj: 100_000,
        seed: 1,
        ..RunConfig::default()
    }
}

fn cavity(id: FigureId, gamma2: f64, gamma3: f64, eps1: f64, eps2: f64) -> RunConfig {
    RunConfig {
        command: Command::Reproduce(id),
        kappa: KAPPA,
        gamma1: 1.0,
        gamma2,
        gamma3,
        eps1: Complex64::new(eps1, 0.0),
        eps2: Complex64::new(eps2, 0.0),
        mode: Mode::Cavity,
        ..RunConfig::default()
    }
}

/// Pumps of the symmetric spectral family.
pub const SPECTRAL_PUMPS: [f64; 3] = [200.0, 400.0, 600.0];

pub fn preset(id: FigureId) -> FigurePreset {
    let (title, config, pumps, checklist): (_, _, Vec<f64>, &'static [&'static str]) = match id.0 {
        1 => (
            "travelling-wave mean intensities",
            travelling_wave(id),
            vec![],
            &[
                "n1+n3, n2+n3 and n1-n2 constant within error",
                "near-complete conversion into mode 3, then partial reconversion",
            ],
        ),
        2 => (
            "travelling-wave X3 squeezing and Fano factor of N1+N2",
            travelling_wave(id),
            vec![],
            &[
                "V(X3) below 1 until the conversion peak",
                "Fano(N1+N2) below 1 early, lost as n1, n2 approach their minima",
            ],
        ),
        3 => (
            "travelling-wave Duan-Simon/4 and EPR products; stability map",
            travelling_wave(id),
            vec![],
            &[
                "Duan-Simon/4 below 1 (entanglement)",
                "EPR12 = EPR21 below 1 (steering)",
                "stability boundary increases with gamma3/gamma as 2 sqrt(gamma3/gamma)/kappa",
            ],
        ),
        4 => (
            "output spectral variance of X3",
            cavity(id, 1.0, 10.0, 600.0, 600.0),
            SPECTRAL_PUMPS.to_vec(),
            &["minimum below 1 for each pump", "squeezing deepens with the pump"],
        ),
        5 => (
            "Duan-Simon spectra V(X1+X2)+V(Y1-Y2)",
            cavity(id, 1.0, 10.0, 600.0, 600.0),
            SPECTRAL_PUMPS.to_vec(),
            &["minimum below 4 for each pump", "violation deepens with the pump"],
        ),
        6 => (
            "symmetric EPR spectra",
            cavity(id, 1.0, 10.0, 600.0, 600.0),
            SPECTRAL_PUMPS.to_vec(),
            &["below 1 at the highest pump", "product decreases with the pump"],
        ),
        7 => (
            "asymmetric steering spectra EPR12 and EPR21",
            cavity(id, 40.0, 2.0, 400.0, 2400.0),
            vec![],
            &["EPR12 below 1 somewhere (2 steers 1)", "EPR21 at least 1 everywhere (1 cannot steer 2)"],
        ),
        8 => (
            "above-threshold intracavity intensities",
            RunConfig {
                alpha0: [Complex64::default(); 3],
                dt: Some(1e-4),
                t_max: 12.0,
                stride: 1000,
                n_traj: 10_000,
                seed: 8,
                ..cavity(id, 1.0, 10.0, 1000.0, 1000.0)
            },
            vec![],
            &[
                "late-time n1 above and n3 below the semiclassical fixed point",
                "semiclassical path settles on the fixed point",
            ],
        ),
        _ => unreachable!("figure ids run from 1 to 8"),
    };
    FigurePreset {
        id,
        title,
        config,
        pumps,
        checklist,
    }
}
