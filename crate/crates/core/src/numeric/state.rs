use num_complex::Complex64;

use super::kernels;
use super::unitary::Unitary;
use crate::error::{Error, Result};
use crate::model::{EigenSpec, RegisterLayout};

/// Tolerance on the squared norm of a state handed to the engine.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// `2^(c+t)` amplitudes over the control register tensored with the
/// eigenbasis of `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amps`, which must already have unit norm.
    pub fn new(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::AmplitudeCount {
                expected: layout.dim(),
                got: amps.len(),
            });
        }
        let state = StateVector { layout, amps };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(layout: RegisterLayout, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: norm * norm });
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::new(layout, amps)
    }

    /// The basis state `|k>`.
    pub fn basis(layout: RegisterLayout, k: usize) -> Result<Self> {
        layout.check_label(k)?;
        let mut amps = vec![Complex64::default(); layout.dim()];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    /// `|0>|q>`, the usual starting point.
    pub fn zero(layout: RegisterLayout) -> Self {
        StateVector::basis(layout, 0).expect("label 0 always exists")
    }

    pub(crate) fn from_raw(layout: RegisterLayout, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), layout.dim());
        StateVector { layout, amps }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, m: usize, s: usize) -> Complex64 {
        self.amps[self.layout.label(m, s)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `max_k |self_k - other_k|`.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Controlled `Q^p` on control qubit `l`: every amplitude whose control
    /// bit `l` is set picks up `e^{2 pi i p phi_s}`.
    pub fn apply_power_query(&mut self, l: usize, p: u64, spec: &EigenSpec) -> Result<()> {
        self.layout.expect(spec.layout())?;
        let mask = self.layout.control_mask(l)?;
        if p == 0 {
            return Ok(());
        }
        let factors: Vec<Complex64> = spec.phases().iter().map(|phi| phi.scaled(p).unit()).collect();
        let targets = factors.len();
        for (k, amp) in self.amps.iter_mut().enumerate() {
            if k & mask != 0 {
                *amp *= factors[k & (targets - 1)];
            }
        }
        Ok(())
    }

    pub fn apply_hadamard_layer(&mut self) {
        kernels::hadamard_layer(&mut self.amps, &self.layout);
    }

    pub fn apply_inverse_qft(&mut self) {
        kernels::inverse_qft(&mut self.amps, &self.layout);
    }

    pub fn apply_qft(&mut self) {
        kernels::qft(&mut self.amps, &self.layout);
    }

    pub fn apply_fixed_unitary(&mut self, u: &Unitary) -> Result<()> {
        if u.dim() != self.layout.dim() {
            return Err(Error::MatrixShape {
                rows: u.dim(),
                cols: u.dim(),
                dim: self.layout.dim(),
            });
        }
        self.amps = u.apply(&self.amps);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Phase;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(layout: RegisterLayout, rng: &mut impl Rng) -> StateVector {
        let amps = (0..layout.dim())
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(layout, amps).unwrap()
    }

    #[test]
    fn zero_power_is_identity() {
        let layout = RegisterLayout::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = EigenSpec::new(layout, vec![Phase::new(0.3), Phase::new(0.8)]).unwrap();
        let before = random_state(layout, &mut rng);
        let mut after = before.clone();
        after.apply_power_query(1, 0, &spec).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn clear_control_bit_is_identity() {
        let layout = RegisterLayout::new(3, 1).unwrap();
        let spec = EigenSpec::with_target_phase(layout, Phase::new(0.37));
        // control value 0b101 has qubit 2 clear
        let mut state = StateVector::basis(layout, layout.label(0b101, 0)).unwrap();
        let before = state.clone();
        state.apply_power_query(2, 5, &spec).unwrap();
        assert_eq!(before, state);
    }

    #[test]
    fn set_control_bit_multiplies_by_phase() {
        let layout = RegisterLayout::new(1, 1).unwrap();
        let spec = EigenSpec::new(layout, vec![Phase::new(0.9), Phase::new(0.25)]).unwrap();
        let mut state = StateVector::basis(layout, layout.label(1, 1)).unwrap();
        state.apply_power_query(1, 3, &spec).unwrap();
        // e^{2 pi i 0.75} = -i
        let a = state.amplitude(1, 1);
        assert!((a - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn power_query_checks_arguments() {
        let layout = RegisterLayout::new(2, 1).unwrap();
        let other = RegisterLayout::new(3, 1).unwrap();
        let mut state = StateVector::zero(layout);
        let spec = EigenSpec::with_target_phase(layout, Phase::ZERO);
        assert!(matches!(
            state.apply_power_query(3, 1, &spec),
            Err(Error::ControlOutOfRange { l: 3, c: 2 })
        ));
        let wrong = EigenSpec::with_target_phase(other, Phase::ZERO);
        assert!(matches!(
            state.apply_power_query(1, 1, &wrong),
            Err(Error::LayoutMismatch { .. })
        ));
    }

    #[test]
    fn hadamard_layer_spreads_control() {
        let layout = RegisterLayout::new(3, 1).unwrap();
        let mut state = StateVector::zero(layout);
        state.apply_hadamard_layer();
        let w = 1.0 / 8f64.sqrt();
        for m in 0..8 {
            assert!((state.amplitude(m, 0) - c(w, 0.0)).norm() < 1e-15);
            assert_eq!(state.amplitude(m, 1), c(0.0, 0.0));
        }
        state.apply_hadamard_layer();
        assert!(state.max_distance(&StateVector::zero(layout)) < 1e-15);
    }

    #[test]
    fn single_qubit_inverse_qft_is_hadamard() {
        let layout = RegisterLayout::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = random_state(layout, &mut rng);
        let mut via_h = state.clone();
        via_h.apply_hadamard_layer();
        let mut via_qft = state;
        via_qft.apply_inverse_qft();
        assert!(via_h.max_distance(&via_qft) < 1e-15);
    }

    #[test]
    fn inverse_qft_resolves_phase_gradient() {
        let layout = RegisterLayout::new(3, 1).unwrap();
        let amps = (0..layout.dim())
            .map(|k| {
                let (m, s) = layout.split(k);
                if s == 0 {
                    Phase::from_ratio(2 * m as u64, 8).unit() / 8f64.sqrt()
                } else {
                    c(0.0, 0.0)
                }
            })
            .collect();
        let mut state = StateVector::new(layout, amps).unwrap();
        state.apply_inverse_qft();
        let expected = StateVector::basis(layout, layout.label(2, 0)).unwrap();
        assert!(state.max_distance(&expected) < 1e-12);
    }

    #[test]
    fn qft_round_trip() {
        let layout = RegisterLayout::new(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = random_state(layout, &mut rng);
        let mut out = state.clone();
        out.apply_inverse_qft();
        out.apply_qft();
        assert!(out.max_distance(&state) < 1e-12);
    }

    #[test]
    fn fixed_unitary_examples() {
        let layout = RegisterLayout::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = random_state(layout, &mut rng);
        let mut same = state.clone();
        same.apply_fixed_unitary(&Unitary::identity(4)).unwrap();
        assert_eq!(same, state);

        let mut swapped = state.clone();
        swapped.apply_fixed_unitary(&Unitary::permutation(&[0, 2, 1, 3]).unwrap()).unwrap();
        assert_eq!(swapped.amplitudes()[1], state.amplitudes()[2]);
        assert_eq!(swapped.amplitudes()[2], state.amplitudes()[1]);

        let mut bad = state;
        assert!(bad.apply_fixed_unitary(&Unitary::identity(8)).is_err());
    }

    #[test]
    fn constructor_validation() {
        let layout = RegisterLayout::new(1, 1).unwrap();
        assert!(matches!(
            StateVector::new(layout, vec![c(1.0, 0.0); 3]),
            Err(Error::AmplitudeCount { .. })
        ));
        assert!(matches!(
            StateVector::new(layout, vec![c(1.0, 0.0); 4]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::normalized(layout, vec![c(0.0, 0.0); 4]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn power_queries_compose(seed in any::<u64>(), a in 0u64..1_000_000, b in 0u64..1_000_000, l in 1usize..=3) {
            let layout = RegisterLayout::new(3, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phases = (0..4).map(|_| Phase::new(rng.random())).collect();
            let spec = EigenSpec::new(layout, phases).unwrap();
            let state = random_state(layout, &mut rng);
            let mut split = state.clone();
            split.apply_power_query(l, a, &spec).unwrap();
            split.apply_power_query(l, b, &spec).unwrap();
            let mut joint = state;
            joint.apply_power_query(l, a + b, &spec).unwrap();
            prop_assert!(split.max_distance(&joint) < 1e-12);
        }

        #[test]
        fn distinct_controls_commute(seed in any::<u64>(), a in 1u64..64, b in 1u64..64) {
            let layout = RegisterLayout::new(3, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = EigenSpec::new(layout, vec![Phase::new(rng.random()), Phase::new(rng.random())]).unwrap();
            let state = random_state(layout, &mut rng);
            let mut ab = state.clone();
            ab.apply_power_query(1, a, &spec).unwrap();
            ab.apply_power_query(3, b, &spec).unwrap();
            let mut ba = state;
            ba.apply_power_query(3, b, &spec).unwrap();
            ba.apply_power_query(1, a, &spec).unwrap();
            prop_assert!(ab.max_distance(&ba) < 1e-12);
        }

        #[test]
        fn every_gate_preserves_norm(seed in any::<u64>(), c_bits in 1usize..=4, t_bits in 1usize..=2) {
            let layout = RegisterLayout::new(c_bits, t_bits).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phases = (0..layout.target_dim()).map(|_| Phase::new(rng.random())).collect();
            let spec = EigenSpec::new(layout, phases).unwrap();
            let mut state = random_state(layout, &mut rng);
            state.apply_hadamard_layer();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
            state.apply_inverse_qft();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
            state.apply_power_query(rng.random_range(1..=c_bits), rng.random_range(0..1u64 << 40), &spec).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
            state.apply_fixed_unitary(&Unitary::random(layout.dim(), &mut rng)).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
