//! Algorithm states as trigonometric polynomials in the eigenphases.
//!
//! Each amplitude of `|m, psi_s>` is a finite sum
//! `sum_j alpha_{m,s,j} e^{2 pi i (j . phi)}` over multi-indices `j` with one
//! non-negative entry per eigenvector. A power query on control qubit `l`
//! shifts entry `s` of every index by `p` for the labels with bit `l` set; a
//! fixed unitary mixes labels but acts separately on each frequency, so it
//! never creates new ones.
//!
//! [`SymbolicState`] stores the coefficients frequency-major: one dense
//! coefficient vector over all `2^(c+t)` labels per multi-index. That makes
//! the unitary step a plain matrix-vector product per frequency.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freqset::ScalarFreqSet;
use crate::model::{Phase, RegisterLayout};
use crate::numeric::{self, Circuit, Gate, StateVector, Unitary};

/// Coefficients below this magnitude are treated as exact zeros.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Per-eigenvector multiplicities `(j_1, ..., j_{2^t})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u64>);

impl MultiIndex {
    pub fn new(components: Vec<u64>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(width: usize) -> Self {
        MultiIndex(vec![0; width])
    }

    pub fn components(&self) -> &[u64] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Copy with `p` added to component `s`.
    pub fn shifted(&self, s: usize, p: u64) -> MultiIndex {
        let mut out = self.clone();
        out.0[s] += p;
        out
    }

    /// `j . phi` modulo 1, reduced exactly per component.
    pub fn dot(&self, phases: &[Phase]) -> Phase {
        debug_assert_eq!(self.0.len(), phases.len());
        self.0
            .iter()
            .zip(phases)
            .fold(Phase::ZERO, |acc, (&j, &phi)| acc + phi.scaled(j))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A sparse trigonometric polynomial in all eigenphases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPoly {
    pub fn new() -> Self {
        TrigPoly::default()
    }

    /// Adds `coefficient` to the term at `index`, dropping it if it cancels.
    pub fn add_term(&mut self, index: MultiIndex, coefficient: Complex64) {
        let entry = self.terms.entry(index).or_default();
        *entry += coefficient;
        if entry.norm() < PRUNE_THRESHOLD {
            self.terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        }
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.terms.keys()
    }

    pub fn evaluate(&self, phases: &[Phase]) -> Complex64 {
        self.terms.iter().map(|(j, c)| c * j.dot(phases).unit()).sum()
    }
}

/// A trigonometric polynomial in the single phase `phi` of `|q>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarTrigPoly {
    terms: BTreeMap<u64, Complex64>,
}

impl ScalarTrigPoly {
    pub fn terms(&self) -> &BTreeMap<u64, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, frequency: u64) -> Complex64 {
        self.terms.get(&frequency).copied().unwrap_or_default()
    }

    pub fn support(&self) -> ScalarFreqSet {
        self.terms.keys().map(|&l| l as i64).collect()
    }

    pub fn evaluate(&self, phase: Phase) -> Complex64 {
        self.terms.iter().map(|(&l, c)| c * phase.scaled(l).unit()).sum()
    }
}

/// Substitutes numbers for `phi_2, ..., phi_{2^t}` and groups the terms of
/// `poly` by their multiplicity of `phi_1`.
pub fn restrict_to_first_phase(poly: &TrigPoly, fixed: &[Phase]) -> Result<ScalarTrigPoly> {
    let mut out = ScalarTrigPoly::default();
    for (j, c) in &poly.terms {
        if j.width() != fixed.len() + 1 {
            return Err(Error::PhaseCount {
                expected: j.width() - 1,
                got: fixed.len(),
            });
        }
        let rest = MultiIndex(j.0[1..].to_vec()).dot(fixed);
        *out.terms.entry(j.0[0]).or_default() += c * rest.unit();
    }
    out.terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
    Ok(out)
}

/// Every amplitude of a power-query algorithm's state as a [`TrigPoly`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    layout: RegisterLayout,
    terms: BTreeMap<MultiIndex, Vec<Complex64>>,
}

impl SymbolicState {
    /// `U_0 |psi_0>` as constant polynomials.
    pub fn initial(u0: &Unitary, initial: &StateVector) -> Result<Self> {
        let mut state = initial.clone();
        state.apply_fixed_unitary(u0)?;
        Ok(SymbolicState::from_state(&state))
    }

    /// The constant polynomials equal to `state`.
    pub fn from_state(state: &StateVector) -> Self {
        let layout = *state.layout();
        let mut sym = SymbolicState {
            layout,
            terms: BTreeMap::from([(MultiIndex::zero(layout.target_dim()), state.amplitudes().to_vec())]),
        };
        sym.prune();
        sym
    }

    /// Symbolic execution of `circuit` from `initial`. No phases are needed.
    pub fn run(circuit: &Circuit, initial: &StateVector) -> Result<Self> {
        circuit.layout().expect(initial.layout())?;
        let mut sym = SymbolicState::from_state(initial);
        for gate in circuit.gates() {
            sym.apply(gate)?;
        }
        Ok(sym)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::FixedUnitary(u) => self.apply_fixed_unitary(u),
            Gate::HadamardLayer => {
                self.map_frequencies(numeric::hadamard_layer);
                Ok(())
            }
            Gate::InverseQft => {
                self.map_frequencies(numeric::inverse_qft);
                Ok(())
            }
            Gate::PowerQuery { control, power } => self.apply_power_query(*control, *power),
        }
    }

    /// Shifts entry `s` of every multi-index by `p` on the labels `(m, s)`
    /// whose control bit `l` is set.
    pub fn apply_power_query(&mut self, l: usize, p: u64) -> Result<()> {
        let mask = self.layout.control_mask(l)?;
        if p == 0 {
            return Ok(());
        }
        let dim = self.layout.dim();
        let targets = self.layout.target_dim();
        let mut next: BTreeMap<MultiIndex, Vec<Complex64>> = BTreeMap::new();
        for (j, coeffs) in std::mem::take(&mut self.terms) {
            for (k, c) in coeffs.into_iter().enumerate() {
                if c == Complex64::default() {
                    continue;
                }
                let target = if k & mask != 0 {
                    j.shifted(k & (targets - 1), p)
                } else {
                    j.clone()
                };
                next.entry(target).or_insert_with(|| vec![Complex64::default(); dim])[k] += c;
            }
        }
        self.terms = next;
        self.prune();
        Ok(())
    }

    /// Multiplies the coefficient vector of every frequency by `u`.
    pub fn apply_fixed_unitary(&mut self, u: &Unitary) -> Result<()> {
        if u.dim() != self.layout.dim() {
            return Err(Error::MatrixShape {
                rows: u.dim(),
                cols: u.dim(),
                dim: self.layout.dim(),
            });
        }
        for coeffs in self.terms.values_mut() {
            *coeffs = u.apply(coeffs);
        }
        self.prune();
        Ok(())
    }

    fn map_frequencies(&mut self, f: impl Fn(&mut [Complex64], &RegisterLayout)) {
        for coeffs in self.terms.values_mut() {
            f(coeffs, &self.layout);
        }
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, coeffs| {
            for c in coeffs.iter_mut() {
                if c.norm() < PRUNE_THRESHOLD {
                    *c = Complex64::default();
                }
            }
            coeffs.iter().any(|c| *c != Complex64::default())
        });
    }

    /// Numeric state at the given eigenphases.
    pub fn evaluate(&self, phases: &[Phase]) -> Result<StateVector> {
        if phases.len() != self.layout.target_dim() {
            return Err(Error::PhaseCount {
                expected: self.layout.target_dim(),
                got: phases.len(),
            });
        }
        let mut amps = vec![Complex64::default(); self.layout.dim()];
        for (j, coeffs) in &self.terms {
            let w = j.dot(phases).unit();
            for (a, c) in amps.iter_mut().zip(coeffs) {
                *a += c * w;
            }
        }
        Ok(StateVector::from_raw(self.layout, amps))
    }

    /// The polynomial for basis label `k`.
    pub fn label_poly(&self, k: usize) -> Result<TrigPoly> {
        self.layout.check_label(k)?;
        let terms = self
            .terms
            .iter()
            .filter(|(_, coeffs)| coeffs[k] != Complex64::default())
            .map(|(j, coeffs)| (j.clone(), coeffs[k]))
            .collect();
        Ok(TrigPoly { terms })
    }

    /// Union of the supports over all labels.
    pub fn frequency_support(&self) -> BTreeSet<MultiIndex> {
        self.terms.keys().cloned().collect()
    }

    /// `sum_j |coefficient vector at j|^2`; invariant under fixed unitaries.
    pub fn coefficient_energy(&self) -> f64 {
        self.terms.values().flatten().map(|c| c.norm_sqr()).sum()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}
