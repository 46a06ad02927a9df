use std::f64::consts::PI;

use rand::Rng;

use super::spec::{EmbryoSpec, FilterSpec};
use crate::gp::{TerminalKind, TerminalSampler};

/// Log-uniform component ranges derived from the embryo resistances and the
/// cutoff band.
///
/// With `Rc = sqrt(R_S R_L)` and cutoff band `[f_min, f_max]`:
/// capacitance in `[1/(2 pi f_max Rc 50), 50/(2 pi f_min Rc)]`,
/// inductance in `[Rc/(2 pi f_max 50), 50 Rc/(2 pi f_min)]`,
/// resistance in `[R_L/10, 10 R_S]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterRanges {
    pub capacitance: (f64, f64),
    pub inductance: (f64, f64),
    pub resistance: (f64, f64),
}

const SPREAD: f64 = 50.0;

impl ParameterRanges {
    pub fn new(espec: &EmbryoSpec, fspec: &FilterSpec) -> Self {
        let rc = espec.characteristic_resistance();
        let (f_min, f_max) = fspec.kind.band();
        Self {
            capacitance: (1.0 / (2.0 * PI * f_max * rc * SPREAD), SPREAD / (2.0 * PI * f_min * rc)),
            inductance: (rc / (2.0 * PI * f_max * SPREAD), SPREAD * rc / (2.0 * PI * f_min)),
            resistance: (espec.load_resistance / 10.0, 10.0 * espec.source_resistance),
        }
    }

    pub fn bounds(&self, kind: TerminalKind) -> (f64, f64) {
        match kind {
            TerminalKind::AddA => self.capacitance,
            TerminalKind::AddD => self.resistance,
            TerminalKind::AddT => self.inductance,
        }
    }
}

/// One log-uniform draw for a new element of the given kind.
pub fn sample_parameter<R: Rng + ?Sized>(kind: TerminalKind, ranges: &ParameterRanges, rng: &mut R) -> f64 {
    let (lo, hi) = ranges.bounds(kind);
    let (a, b) = (lo.ln(), hi.ln());
    let v = (a + (b - a) * rng.random::<f64>()).exp();
    v.clamp(lo, hi)
}

impl TerminalSampler for ParameterRanges {
    fn sample_value<R: Rng + ?Sized>(&self, kind: TerminalKind, rng: &mut R) -> f64 {
        sample_parameter(kind, self, rng)
    }
}
