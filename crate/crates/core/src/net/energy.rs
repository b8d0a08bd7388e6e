use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// An amount of energy held as integer picojoules so that accounting is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Energy(u64);

const PJ_PER_J: f64 = 1e12;

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub fn from_picojoules(pj: u64) -> Self {
        Energy(pj)
    }

    /// Rounds to the nearest picojoule. Negative and NaN inputs map to zero.
    pub fn from_joules(j: f64) -> Self {
        if !(j > 0.0) {
            return Energy(0);
        }
        Energy((j * PJ_PER_J).round() as u64)
    }

    pub fn picojoules(self) -> u64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 as f64 / PJ_PER_J
    }

    pub fn saturating_sub(self, rhs: Energy) -> Energy {
        Energy(self.0.saturating_sub(rhs.0))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sub for Energy {
    type Output = Energy;
    fn sub(self, rhs: Energy) -> Energy {
        Energy(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}J", self.joules())
    }
}

/// Radio energy costs. Defaults model an 802.15.4-class transceiver at 250 kbps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    pub tx_joules_per_bit: f64,
    pub rx_joules_per_bit: f64,
    pub idle_joules_per_second: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            tx_joules_per_bit: 2.0e-7,
            rx_joules_per_bit: 2.2e-7,
            idle_joules_per_second: 0.0,
        }
    }
}

impl EnergyConfig {
    pub fn tx_cost(&self, bits: u32) -> Energy {
        Energy::from_joules(self.tx_joules_per_bit * f64::from(bits))
    }

    pub fn rx_cost(&self, bits: u32) -> Energy {
        Energy::from_joules(self.rx_joules_per_bit * f64::from(bits))
    }

    pub fn idle_cost(&self, seconds: f64) -> Energy {
        Energy::from_joules(self.idle_joules_per_second * seconds)
    }

    pub fn is_valid(&self) -> bool {
        [
            self.tx_joules_per_bit,
            self.rx_joules_per_bit,
            self.idle_joules_per_second,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChargeKind {
    Tx,
    Rx,
    Idle,
}

impl ChargeKind {
    pub fn label(self) -> &'static str {
        match self {
            ChargeKind::Tx => "tx",
            ChargeKind::Rx => "rx",
            ChargeKind::Idle => "idle",
        }
    }
}

/// Running sum of every charge actually applied to a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChargeLedger {
    pub total: Energy,
    pub charges: u64,
    pub tx: Energy,
    pub rx: Energy,
    pub idle: Energy,
}

impl ChargeLedger {
    pub fn record(&mut self, kind: ChargeKind, amount: Energy) {
        self.total += amount;
        self.charges += 1;
        match kind {
            ChargeKind::Tx => self.tx += amount,
            ChargeKind::Rx => self.rx += amount,
            ChargeKind::Idle => self.idle += amount,
        }
    }
}
