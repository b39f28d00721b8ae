use super::state::StateVector;
use super::unitary::Unitary;
use crate::error::{Error, Result};
use crate::model::{EigenSpec, RegisterLayout};

/// One step of a power-query algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// A fixed unitary on the whole `c + t` qubit register.
    FixedUnitary(Unitary),
    /// `H` on every control qubit.
    HadamardLayer,
    /// Inverse QFT on the control register.
    InverseQft,
    /// Controlled `Q^power` on control qubit `control` (`1..=c`).
    PowerQuery { control: usize, power: u64 },
}

/// An ordered gate list over a fixed register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Circuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        match &gate {
            Gate::FixedUnitary(u) if u.dim() != self.layout.dim() => {
                return Err(Error::MatrixShape {
                    rows: u.dim(),
                    cols: u.dim(),
                    dim: self.layout.dim(),
                })
            }
            Gate::PowerQuery { control, .. } => self.layout.check_control(*control)?,
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Builder form of [`Circuit::push`].
    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Powers `(p_1, ..., p_T)` of the power queries, in order.
    pub fn power_schedule(&self) -> Vec<u64> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::PowerQuery { power, .. } => Some(*power),
                _ => None,
            })
            .collect()
    }

    /// Number of power queries `T`.
    pub fn query_count(&self) -> usize {
        self.power_schedule().len()
    }
}

impl StateVector {
    pub fn apply(&mut self, gate: &Gate, spec: &EigenSpec) -> Result<()> {
        match gate {
            Gate::FixedUnitary(u) => self.apply_fixed_unitary(u),
            Gate::HadamardLayer => {
                self.apply_hadamard_layer();
                Ok(())
            }
            Gate::InverseQft => {
                self.apply_inverse_qft();
                Ok(())
            }
            Gate::PowerQuery { control, power } => self.apply_power_query(*control, *power, spec),
        }
    }
}

/// Applies the gates of `circuit` to `initial`, left to right.
pub fn run_circuit(circuit: &Circuit, spec: &EigenSpec, initial: StateVector) -> Result<StateVector> {
    circuit.layout.expect(spec.layout())?;
    circuit.layout.expect(initial.layout())?;
    let mut state = initial;
    for gate in &circuit.gates {
        state.apply(gate, spec)?;
        debug_assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    }
    Ok(state)
}
