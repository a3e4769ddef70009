//! Unit handling. Everything is stored in SI (m, m³/s) internally; a network
//! remembers the unit system its source data used so that reported heads,
//! diameters and flows match the benchmark literature.

/// Exact conversion factors.
pub const METERS_PER_FOOT: f64 = 0.3048;
pub const METERS_PER_INCH: f64 = 0.0254;
pub const METERS_PER_MM: f64 = 1e-3;
/// 1 ft³/s in m³/s (0.3048³).
pub const M3S_PER_CFS: f64 = 0.028316846592;
/// 1 m³/h in m³/s.
pub const M3S_PER_CMH: f64 = 1.0 / 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LengthUnit {
    Meter,
    Foot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DiameterUnit {
    Meter,
    Millimeter,
    Inch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FlowUnit {
    /// m³/s
    CubicMetersPerSecond,
    /// m³/h (EPANET "CMH")
    CubicMetersPerHour,
    /// ft³/s (EPANET "CFS")
    CubicFeetPerSecond,
}

impl LengthUnit {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            LengthUnit::Meter => v,
            LengthUnit::Foot => v * METERS_PER_FOOT,
        }
    }

    pub fn from_si(self, v: f64) -> f64 {
        match self {
            LengthUnit::Meter => v,
            LengthUnit::Foot => v / METERS_PER_FOOT,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            LengthUnit::Meter => "m",
            LengthUnit::Foot => "ft",
        }
    }
}

impl DiameterUnit {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            DiameterUnit::Meter => v,
            DiameterUnit::Millimeter => v * METERS_PER_MM,
            DiameterUnit::Inch => v * METERS_PER_INCH,
        }
    }

    pub fn from_si(self, v: f64) -> f64 {
        match self {
            DiameterUnit::Meter => v,
            DiameterUnit::Millimeter => v / METERS_PER_MM,
            DiameterUnit::Inch => v / METERS_PER_INCH,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DiameterUnit::Meter => "m",
            DiameterUnit::Millimeter => "mm",
            DiameterUnit::Inch => "in",
        }
    }
}

impl FlowUnit {
    pub fn to_si(self, v: f64) -> f64 {
        match self {
            FlowUnit::CubicMetersPerSecond => v,
            FlowUnit::CubicMetersPerHour => v * M3S_PER_CMH,
            FlowUnit::CubicFeetPerSecond => v * M3S_PER_CFS,
        }
    }

    pub fn from_si(self, v: f64) -> f64 {
        match self {
            FlowUnit::CubicMetersPerSecond => v,
            FlowUnit::CubicMetersPerHour => v / M3S_PER_CMH,
            FlowUnit::CubicFeetPerSecond => v / M3S_PER_CFS,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FlowUnit::CubicMetersPerSecond => "m3/s",
            FlowUnit::CubicMetersPerHour => "m3/h",
            FlowUnit::CubicFeetPerSecond => "cfs",
        }
    }
}

/// The unit system of a network's source data. Heads and lengths share the
/// length unit; pipe unit costs are per native length unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitSpec {
    pub length: LengthUnit,
    pub diameter: DiameterUnit,
    pub flow: FlowUnit,
}

impl UnitSpec {
    /// EPANET "CFS" convention: ft, inches, ft³/s.
    pub fn us_customary() -> Self {
        UnitSpec {
            length: LengthUnit::Foot,
            diameter: DiameterUnit::Inch,
            flow: FlowUnit::CubicFeetPerSecond,
        }
    }

    /// EPANET "CMH" convention: m, mm, m³/h.
    pub fn metric() -> Self {
        UnitSpec {
            length: LengthUnit::Meter,
            diameter: DiameterUnit::Millimeter,
            flow: FlowUnit::CubicMetersPerHour,
        }
    }

    /// Plain SI, used by synthetic test networks and serialized output.
    pub fn si() -> Self {
        UnitSpec {
            length: LengthUnit::Meter,
            diameter: DiameterUnit::Meter,
            flow: FlowUnit::CubicMetersPerSecond,
        }
    }
}

impl Default for UnitSpec {
    fn default() -> Self {
        UnitSpec::si()
    }
}
