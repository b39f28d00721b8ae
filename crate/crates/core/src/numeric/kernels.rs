//! In-place kernels on raw amplitude slices laid out as `k = m * 2^t + s`.
//!
//! The symbolic engine applies the same linear maps to its per-frequency
//! coefficient vectors, so nothing here assumes a normalized input.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::model::RegisterLayout;

/// `H` on every control qubit, identity on the target register.
pub(crate) fn hadamard_layer(amps: &mut [Complex64], layout: &RegisterLayout) {
    debug_assert_eq!(amps.len(), layout.dim());
    let t = layout.target_qubits();
    for q in 0..layout.control_qubits() {
        let stride = 1usize << (t + q);
        for block in amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        }
    }
}

/// Inverse DFT on the control register:
/// `|m> -> 2^{-c/2} sum_n e^{-2 pi i m n / 2^c} |n>`.
///
/// With this sign the phase gradient `sum_m e^{2 pi i m r / 2^c} |m>` lands
/// on `|r>`.
pub(crate) fn inverse_qft(amps: &mut [Complex64], layout: &RegisterLayout) {
    control_dft(amps, layout, FftDirection::Forward);
}

/// Forward QFT on the control register, the inverse of [`inverse_qft`].
pub(crate) fn qft(amps: &mut [Complex64], layout: &RegisterLayout) {
    control_dft(amps, layout, FftDirection::Inverse);
}

// rustfft's Forward direction is sum_m x_m e^{-2 pi i m n / M}, which is the
// map |m> -> sum_n e^{-2 pi i m n / M} |n> applied to amplitudes.
fn control_dft(amps: &mut [Complex64], layout: &RegisterLayout, direction: FftDirection) {
    debug_assert_eq!(amps.len(), layout.dim());
    let len = layout.control_dim();
    let targets = layout.target_dim();
    let fft = FftPlanner::new().plan_fft(len, direction);
    let scale = 1.0 / (len as f64).sqrt();
    let mut column = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for s in 0..targets {
        for (m, slot) in column.iter_mut().enumerate() {
            *slot = amps[m * targets + s];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for (m, value) in column.iter().enumerate() {
            amps[m * targets + s] = value * scale;
        }
    }
}
