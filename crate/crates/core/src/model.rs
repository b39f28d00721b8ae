//! Shared domain types: phases on the unit circle, the control/target
//! register layout, and the eigenphase description of the black-box `Q`.
//!
//! A basis label `k` is laid out as `k = m * 2^t + s`, where `m` is the
//! control value and `s` the (zero-based) eigenvector index. Control qubit
//! `l` (numbered `1..=c`, as in `|x_1 ... x_c>`) is the `l`-th most
//! significant bit of `m`. Eigenvector `s = 0` is the distinguished `|q>`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest control register the engines accept.
pub const MAX_CONTROL_QUBITS: usize = 20;
/// Largest target register the engines accept.
pub const MAX_TARGET_QUBITS: usize = 4;

/// A fraction of a full turn, always reduced into `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    /// Reduces `value` modulo 1.
    pub fn new(value: f64) -> Self {
        let v = value.rem_euclid(1.0);
        // rem_euclid can round a tiny negative input up to exactly 1.0
        Phase(if v >= 1.0 { 0.0 } else { v })
    }

    /// `num / den` reduced modulo 1.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Phase((num % den) as f64 / den as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p * self` reduced modulo 1 without first forming the (possibly huge)
    /// product in floating point.
    ///
    /// A finite `f64` in `[0, 1)` is exactly `mantissa * 2^-shift` with a
    /// 53-bit mantissa, so the reduction is an exact integer mask on
    /// `p * mantissa`.
    pub fn scaled(self, p: u64) -> Phase {
        if self.0 == 0.0 || p == 0 {
            return Phase::ZERO;
        }
        let bits = self.0.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, shift) = if biased == 0 {
            (frac, 1074)
        } else {
            (frac | (1u64 << 52), 1075 - biased)
        };
        if shift >= 128 {
            // p * mantissa < 2^117 <= 2^shift: nothing to reduce
            return Phase::new(self.0 * p as f64);
        }
        let product = p as u128 * mantissa as u128;
        let reduced = product & ((1u128 << shift) - 1);
        Phase::new(reduced as f64 * 2f64.powi(-shift))
    }

    /// `e^{2 pi i phase}`. This is the only place a phase becomes an angle.
    pub fn unit(self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.0)
    }
}

impl Add for Phase {
    type Output = Phase;

    fn add(self, rhs: Phase) -> Phase {
        let s = self.0 + rhs.0;
        Phase(if s >= 1.0 { s - 1.0 } else { s })
    }
}

impl Neg for Phase {
    type Output = Phase;

    fn neg(self) -> Phase {
        Phase::new(-self.0)
    }
}

impl Sub for Phase {
    type Output = Phase;

    fn sub(self, rhs: Phase) -> Phase {
        self + (-rhs)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Distance between two phases on the unit circle, in `[0, 1/2]`.
pub fn circular_distance(a: Phase, b: Phase) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(1.0 - d)
}

/// Sizes of the control (`c`) and target (`t`) registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    control: usize,
    target: usize,
}

impl RegisterLayout {
    pub fn new(control: usize, target: usize) -> Result<Self> {
        if !(1..=MAX_CONTROL_QUBITS).contains(&control) || !(1..=MAX_TARGET_QUBITS).contains(&target)
        {
            return Err(Error::LayoutOutOfRange {
                c: control,
                t: target,
                max_c: MAX_CONTROL_QUBITS,
                max_t: MAX_TARGET_QUBITS,
            });
        }
        Ok(RegisterLayout { control, target })
    }

    pub fn control_qubits(&self) -> usize {
        self.control
    }

    pub fn target_qubits(&self) -> usize {
        self.target
    }

    /// `2^c`
    pub fn control_dim(&self) -> usize {
        1 << self.control
    }

    /// `2^t`, the number of eigenvectors of `Q`.
    pub fn target_dim(&self) -> usize {
        1 << self.target
    }

    /// `2^(c+t)`
    pub fn dim(&self) -> usize {
        1 << (self.control + self.target)
    }

    pub fn label(&self, m: usize, s: usize) -> usize {
        debug_assert!(m < self.control_dim() && s < self.target_dim());
        (m << self.target) | s
    }

    /// Splits a basis label into `(m, s)`.
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k >> self.target, k & (self.target_dim() - 1))
    }

    /// Bit of the full basis label that carries control qubit `l`.
    pub fn control_mask(&self, l: usize) -> Result<usize> {
        self.check_control(l)?;
        Ok(1 << (self.target + self.control - l))
    }

    pub fn check_control(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.control {
            return Err(Error::ControlOutOfRange { l, c: self.control });
        }
        Ok(())
    }

    pub fn check_label(&self, k: usize) -> Result<()> {
        if k >= self.dim() {
            return Err(Error::LabelOutOfRange { k, dim: self.dim() });
        }
        Ok(())
    }

    pub fn expect(&self, other: &RegisterLayout) -> Result<()> {
        if self != other {
            return Err(Error::LayoutMismatch {
                expected_c: self.control,
                expected_t: self.target,
                got_c: other.control,
                got_t: other.target,
            });
        }
        Ok(())
    }
}

/// The estimate `m / 2^c` read off the control register of outcome `k`.
pub fn phase_of_outcome(k: usize, layout: &RegisterLayout) -> Result<Phase> {
    layout.check_label(k)?;
    let (m, _) = layout.split(k);
    Ok(Phase::from_ratio(m as u64, layout.control_dim() as u64))
}

/// Eigenphases of a `Q` that is diagonal in the simulation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpec {
    layout: RegisterLayout,
    phases: Vec<Phase>,
}

impl EigenSpec {
    pub fn new(layout: RegisterLayout, phases: Vec<Phase>) -> Result<Self> {
        if phases.len() != layout.target_dim() {
            return Err(Error::PhaseCount {
                expected: layout.target_dim(),
                got: phases.len(),
            });
        }
        Ok(EigenSpec { layout, phases })
    }

    /// `|q>` carries `phase`, every other eigenvector carries phase 0.
    pub fn with_target_phase(layout: RegisterLayout, phase: Phase) -> Self {
        let mut phases = vec![Phase::ZERO; layout.target_dim()];
        phases[0] = phase;
        EigenSpec { layout, phases }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// The phase of the distinguished eigenvector `|q>`.
    pub fn target_phase(&self) -> Phase {
        self.phases[0]
    }

    /// Same spec with the phase of `|q>` replaced.
    pub fn with_first(&self, phase: Phase) -> Self {
        let mut phases = self.phases.clone();
        phases[0] = phase;
        EigenSpec {
            layout: self.layout,
            phases,
        }
    }
}
