use serde::{Deserialize, Serialize};

use super::FilterError;
use crate::dynamics::log_space;

/// Fixed scaffold around the evolved circuit: a voltage source with its
/// internal resistance, and the load resistance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbryoSpec {
    pub source_voltage: f64,
    pub source_resistance: f64,
    pub load_resistance: f64,
}

impl EmbryoSpec {
    /// 10 V source, 750 Ohm internal resistance, 50 Ohm load.
    pub const REFERENCE: EmbryoSpec = EmbryoSpec {
        source_voltage: 10.0,
        source_resistance: 750.0,
        load_resistance: 50.0,
    };

    pub fn validate(&self) -> Result<(), FilterError> {
        let vals = [self.source_voltage, self.source_resistance, self.load_resistance];
        if vals.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(FilterError::InvalidSpec(
                "embryo values must be positive and finite".into(),
            ))
        }
    }

    /// `sqrt(R_S * R_L)`, the scale used for reactive component ranges.
    pub fn characteristic_resistance(&self) -> f64 {
        (self.source_resistance * self.load_resistance).sqrt()
    }

    /// Load voltage magnitude of the bare resistive divider.
    pub fn divider_voltage(&self) -> f64 {
        self.source_voltage * self.load_resistance / (self.source_resistance + self.load_resistance)
    }
}

/// Ideal response shape, cutoffs in hertz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterKind {
    LowPass { cutoff_hz: f64 },
    HighPass { cutoff_hz: f64 },
    BandPass { low_hz: f64, high_hz: f64 },
}

impl FilterKind {
    /// `(f_min, f_max)` of the cutoff band; equal for low- and high-pass.
    pub fn band(&self) -> (f64, f64) {
        match *self {
            FilterKind::LowPass { cutoff_hz } | FilterKind::HighPass { cutoff_hz } => (cutoff_hz, cutoff_hz),
            FilterKind::BandPass { low_hz, high_hz } => (low_hz, high_hz),
        }
    }

    /// Passband membership; cutoff frequencies belong to the passband.
    pub fn passes(&self, f: f64) -> bool {
        match *self {
            FilterKind::LowPass { cutoff_hz } => f <= cutoff_hz,
            FilterKind::HighPass { cutoff_hz } => f >= cutoff_hz,
            FilterKind::BandPass { low_hz, high_hz } => (low_hz..=high_hz).contains(&f),
        }
    }
}

/// Target response plus the frequency grid it is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub grid_points: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
}

impl FilterSpec {
    pub const DEFAULT_GRID_POINTS: usize = 200;
    /// Decades added on each side of the cutoff band by the default grid.
    pub const DEFAULT_GRID_MARGIN: f64 = 100.0;

    /// Spec with the default grid: 200 log-spaced points from `f_min / 100`
    /// to `f_max * 100`.
    pub fn new(kind: FilterKind) -> Self {
        let (lo, hi) = kind.band();
        Self {
            kind,
            grid_points: Self::DEFAULT_GRID_POINTS,
            grid_lo: lo / Self::DEFAULT_GRID_MARGIN,
            grid_hi: hi * Self::DEFAULT_GRID_MARGIN,
        }
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        let (lo, hi) = self.kind.band();
        let err = |m: &str| Err(FilterError::InvalidSpec(m.into()));
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0) {
            return err("cutoff frequencies must be positive and finite");
        }
        if matches!(self.kind, FilterKind::BandPass { .. }) && lo >= hi {
            return err("band-pass needs low_hz < high_hz");
        }
        if self.grid_points < 2 {
            return err("grid_points must be at least 2");
        }
        if !(self.grid_lo.is_finite() && self.grid_hi.is_finite() && self.grid_lo > 0.0 && self.grid_lo < self.grid_hi)
        {
            return err("grid needs 0 < grid_lo < grid_hi");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        log_space(self.grid_lo, self.grid_hi, self.grid_points)
    }
}

/// Brick-wall target load voltage: the full source voltage in the passband,
/// zero in the stopband.
pub fn target_magnitude(fspec: &FilterSpec, espec: &EmbryoSpec, f: f64) -> f64 {
    if fspec.kind.passes(f) {
        espec.source_voltage
    } else {
        0.0
    }
}
