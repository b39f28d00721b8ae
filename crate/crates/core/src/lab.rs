//! Concrete experiments on power-query phase estimation.
//!
//! The hard instances are `Q_r`, `r = 0..N`, whose `|q>` phase sits on the
//! grid `r / N` with `N = 1/(2 eps)`. An outcome belongs to bucket `B_r` when
//! its estimate is strictly within `eps` of `r / N`, so buckets are disjoint.
//! A successful algorithm puts at least 3/4 of its mass in `B_r` on input
//! `Q_r`; [`dft_frequency_audit`] then checks that each bucket probability,
//! as a trigonometric polynomial in the phase, needs at least `N` distinct
//! frequencies.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freqset::{schedule_differences, PowerSchedule, ScalarFreqSet};
use crate::model::{EigenSpec, Phase, RegisterLayout, MAX_CONTROL_QUBITS};
use crate::numeric::{check_epsilon, measurement_distribution, run_circuit, Circuit, Gate, StateVector, Unitary};
use crate::symbolic::{restrict_to_first_phase, SymbolicState};

/// An aliased DFT class counts as nonzero above this magnitude.
pub const NONZERO_TOLERANCE: f64 = 1e-9;
/// Success threshold for a single instance.
pub const SUCCESS_PROBABILITY: f64 = 0.75;

/// Textbook phase estimation with `queries` control qubits: a Hadamard layer,
/// `W_T^1, W_{T-1}^2, ..., W_1^{2^{T-1}}`, then the inverse QFT.
pub fn build_qpe_circuit(queries: usize, target_qubits: usize) -> Result<Circuit> {
    if !(1..=MAX_CONTROL_QUBITS).contains(&queries) {
        return Err(Error::QueryCountOutOfRange {
            t: queries,
            min: 1,
            max: MAX_CONTROL_QUBITS,
        });
    }
    let layout = RegisterLayout::new(queries, target_qubits)?;
    let mut circuit = Circuit::new(layout);
    circuit.push(Gate::HadamardLayer)?;
    for j in 0..queries {
        circuit.push(Gate::PowerQuery {
            control: queries - j,
            power: 1 << j,
        })?;
    }
    circuit.push(Gate::InverseQft)?;
    Ok(circuit)
}

/// Phase estimation with `T` queries, or for `T = 0` a one-qubit circuit
/// with no gates that always answers 0.
pub fn qpe_family(target_qubits: usize) -> impl Fn(usize) -> Result<Circuit> {
    move |queries| {
        if queries == 0 {
            Ok(Circuit::new(RegisterLayout::new(1, target_qubits)?))
        } else {
            build_qpe_circuit(queries, target_qubits)
        }
    }
}

/// `N` for a precision whose `1/(2 eps)` must be a positive integer.
pub fn grid_from_epsilon(eps: f64) -> Result<u64> {
    check_epsilon(eps)?;
    let value = 1.0 / (2.0 * eps);
    let n = value.round();
    if (value - n).abs() > 1e-9 * value || n < 1.0 {
        return Err(Error::NonIntegerGrid { value });
    }
    Ok(n as u64)
}

/// `i / resolution` for `i = 0..resolution`.
pub fn uniform_grid(resolution: u64) -> Vec<Phase> {
    (0..resolution).map(|i| Phase::from_ratio(i, resolution)).collect()
}

/// The hard instance `Q_r`: `|q>` has phase `r / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrInstance {
    pub r: u64,
    pub n: u64,
    pub spec: EigenSpec,
}

impl QrInstance {
    pub fn epsilon(&self) -> f64 {
        1.0 / (2.0 * self.n as f64)
    }
}

/// Builds `Q_r` on `layout`. `other_phases` gives the phases of the remaining
/// `2^t - 1` eigenvectors; an empty slice means all zero.
pub fn make_qr(r: u64, eps: f64, layout: RegisterLayout, other_phases: &[Phase]) -> Result<QrInstance> {
    let n = grid_from_epsilon(eps)?;
    if r >= n {
        return Err(Error::GridIndexOutOfRange { r, n });
    }
    let mut phases = vec![Phase::from_ratio(r, n)];
    if other_phases.is_empty() {
        phases.resize(layout.target_dim(), Phase::ZERO);
    } else {
        phases.extend_from_slice(other_phases);
    }
    let spec = EigenSpec::new(layout, phases)?;
    Ok(QrInstance { r, n, spec })
}

/// Outcomes whose estimate `m / 2^c` lies strictly within `eps = 1/(2N)` of
/// `r / N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    pub r: u64,
    pub n: u64,
    members: Vec<usize>,
}

impl Bucket {
    /// Membership is decided in integers: `|m N - r 2^c|` taken around the
    /// circle of circumference `N 2^c` must be below `2^c / 2`.
    pub fn new(r: u64, n: u64, layout: &RegisterLayout) -> Result<Self> {
        if n == 0 || r >= n {
            return Err(Error::GridIndexOutOfRange { r, n });
        }
        let control = layout.control_dim() as u128;
        let circle = n as u128 * control;
        let centre = r as u128 * control;
        let members = (0..layout.dim())
            .filter(|&k| {
                let (m, _) = layout.split(k);
                let offset = (m as u128 * n as u128 + circle - centre) % circle;
                let dist = offset.min(circle - offset);
                2 * dist < control
            })
            .collect();
        Ok(Bucket { r, n, members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    pub fn mass(&self, probabilities: &[f64]) -> f64 {
        self.members.iter().map(|&k| probabilities[k]).sum()
    }
}

/// All `N` buckets for `layout`.
pub fn buckets(n: u64, layout: &RegisterLayout) -> Result<Vec<Bucket>> {
    (0..n).map(|r| Bucket::new(r, n, layout)).collect()
}

/// Outcome probabilities of `circuit` when `|q>` has phase `phase` and the
/// other eigenphases come from `spec`.
pub fn probabilities_at(
    circuit: &Circuit,
    initial: &StateVector,
    spec: &EigenSpec,
    phase: Phase,
) -> Result<Vec<f64>> {
    let state = run_circuit(circuit, &spec.with_first(phase), initial.clone())?;
    Ok(measurement_distribution(&state).probabilities().to_vec())
}

/// `p_{B_r}(phi)` at every phase of `grid`.
pub fn bucket_probability_curve(
    circuit: &Circuit,
    initial: &StateVector,
    bucket: &Bucket,
    spec: &EigenSpec,
    grid: &[Phase],
) -> Result<Vec<(Phase, f64)>> {
    grid.par_iter()
        .map(|&phi| {
            let probs = probabilities_at(circuit, initial, spec, phi)?;
            Ok((phi, bucket.mass(&probs)))
        })
        .collect()
}

/// Full width at half maximum of the highest peak of a curve sampled on a
/// uniform circular grid, with linear interpolation at the crossings.
pub fn full_width_half_max(curve: &[(Phase, f64)]) -> Option<f64> {
    let len = curve.len();
    if len < 3 {
        return None;
    }
    let step = 1.0 / len as f64;
    let (peak_idx, peak) = curve
        .iter()
        .enumerate()
        .map(|(i, &(_, p))| (i, p))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let half = peak / 2.0;
    let value = |i: isize| curve[i.rem_euclid(len as isize) as usize].1;
    let crossing = |dir: isize| -> Option<f64> {
        let mut prev = peak;
        for off in 1..len as isize {
            let cur = value(peak_idx as isize + dir * off);
            if cur < half {
                let frac = (prev - half) / (prev - cur);
                return Some((off as f64 - 1.0 + frac) * step);
            }
            prev = cur;
        }
        None
    };
    Some(crossing(-1)? + crossing(1)?)
}

/// Frequency analysis of one bucket probability `p_{B_r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketAudit {
    pub r: u64,
    pub members: Vec<usize>,
    /// `gamma_{l,l'} = sum_{k in B_r} beta_{k,l} conj(beta_{k,l'})`.
    pub gamma: BTreeMap<(u64, u64), Complex64>,
    /// `eta_m = sum_{l - l' = m} gamma_{l,l'}`, so that
    /// `p_{B_r}(phi) = sum_m eta_m e^{2 pi i m phi}`.
    pub eta: BTreeMap<i64, Complex64>,
    /// `p_{B_r}(n/N)` from the numeric engine.
    pub samples: Vec<f64>,
    /// `sum_n p_{B_r}(n/N) e^{-2 pi i k n / N}`.
    pub dft: Vec<Complex64>,
    /// `N sum_{m = k mod N} eta_m`.
    pub aliased: Vec<Complex64>,
}

impl BucketAudit {
    pub fn reconstruct(&self, phase: Phase) -> Complex64 {
        self.eta
            .iter()
            .map(|(&m, c)| {
                let w = if m >= 0 {
                    phase.scaled(m as u64)
                } else {
                    -phase.scaled(m.unsigned_abs())
                };
                c * w.unit()
            })
            .sum()
    }

    /// `max_k |dft_k - aliased_k|`.
    pub fn dft_error(&self) -> f64 {
        self.dft
            .iter()
            .zip(&self.aliased)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `p_{B_r}(r/N)`.
    pub fn diagonal_mass(&self) -> f64 {
        self.samples[self.r as usize]
    }

    /// `sum_{n != r} p_{B_r}(n/N)`.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .filter(|&(n, _)| n as u64 != self.r)
            .map(|(_, p)| p)
            .sum()
    }

    /// Whether the off-diagonal mass stays below 3/4.
    pub fn is_concentrated(&self) -> bool {
        self.off_diagonal_mass() < SUCCESS_PROBABILITY
    }

    /// Residue classes `k mod N` whose aliased coefficient is nonzero.
    pub fn nonzero_classes(&self) -> usize {
        self.aliased.iter().filter(|c| c.norm() > NONZERO_TOLERANCE).count()
    }

    /// Frequencies with a nonzero coefficient.
    pub fn nonzero_frequencies(&self) -> usize {
        self.eta.values().filter(|c| c.norm() > NONZERO_TOLERANCE).count()
    }

    /// `max_m |eta_{-m} - conj(eta_m)|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.eta
            .iter()
            .map(|(&m, c)| {
                let mirror = self.eta.get(&-m).copied().unwrap_or_default();
                (mirror - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyAudit {
    pub n: u64,
    pub schedule: PowerSchedule,
    /// `M_T` for the circuit's schedule.
    pub differences: ScalarFreqSet,
    pub buckets: Vec<BucketAudit>,
}

impl FrequencyAudit {
    pub fn max_dft_error(&self) -> f64 {
        self.buckets.iter().map(BucketAudit::dft_error).fold(0.0, f64::max)
    }

    /// Every concentrated bucket has all `N` residue classes nonzero.
    pub fn concentrated_buckets_resolve_grid(&self) -> bool {
        self.buckets
            .iter()
            .filter(|b| b.is_concentrated())
            .all(|b| b.nonzero_classes() == self.n as usize)
    }

    /// Every bucket polynomial uses only frequencies from `M_T`.
    pub fn supports_within_differences(&self) -> bool {
        self.buckets
            .iter()
            .all(|b| b.eta.keys().all(|&m| self.differences.contains(m)))
    }

    pub fn concentrated_fraction(&self) -> f64 {
        let good = self.buckets.iter().filter(|b| b.is_concentrated()).count();
        good as f64 / self.n as f64
    }
}

/// Extracts `eta_{r,m}` for every bucket from the symbolic engine and checks
/// it against the `N`-point inverse DFT of the numerically sampled curve.
///
/// `spec` fixes the layout and the phases of the eigenvectors other than
/// `|q>`; its first phase is ignored.
pub fn dft_frequency_audit(
    circuit: &Circuit,
    initial: &StateVector,
    spec: &EigenSpec,
    eps: f64,
) -> Result<FrequencyAudit> {
    let n = grid_from_epsilon(eps)?;
    let layout = *circuit.layout();
    let schedule = PowerSchedule::new(circuit.power_schedule())?;
    let differences = schedule_differences(&schedule)?;

    let sym = SymbolicState::run(circuit, initial)?;
    let fixed = &spec.phases()[1..];
    let betas = (0..layout.dim())
        .map(|k| restrict_to_first_phase(&sym.label_poly(k)?, fixed))
        .collect::<Result<Vec<_>>>()?;

    let grid = uniform_grid(n);
    let distributions = grid
        .par_iter()
        .map(|&phi| probabilities_at(circuit, initial, spec, phi))
        .collect::<Result<Vec<_>>>()?;

    let buckets = buckets(n, &layout)?
        .into_iter()
        .map(|bucket| {
            let mut gamma: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
            for &k in bucket.members() {
                let beta = betas[k].terms();
                for (&l, a) in beta {
                    for (&lp, b) in beta {
                        *gamma.entry((l, lp)).or_default() += a * b.conj();
                    }
                }
            }
            let mut eta: BTreeMap<i64, Complex64> = BTreeMap::new();
            for (&(l, lp), g) in &gamma {
                *eta.entry(l as i64 - lp as i64).or_default() += g;
            }
            let samples: Vec<f64> = distributions.iter().map(|p| bucket.mass(p)).collect();
            let dft = (0..n)
                .map(|k| {
                    samples
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| p * (-Phase::from_ratio(k * i as u64 % n, n)).unit())
                        .sum()
                })
                .collect();
            let mut aliased = vec![Complex64::default(); n as usize];
            for (&m, c) in &eta {
                aliased[m.rem_euclid(n as i64) as usize] += c * n as f64;
            }
            BucketAudit {
                r: bucket.r,
                members: bucket.members().to_vec(),
                gamma,
                eta,
                samples,
                dft,
                aliased,
            }
        })
        .collect();

    Ok(FrequencyAudit {
        n,
        schedule,
        differences,
        buckets,
    })
}

/// How the buckets of one circuit split by off-diagonal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodBucketReport {
    pub n: u64,
    /// `p_{B_r}(r/N)`, the success probability on `Q_r`.
    pub diagonal: Vec<f64>,
    /// `sum_{n != r} p_{B_r}(n/N)`.
    pub off_diagonal: Vec<f64>,
    /// Fraction of `r` with off-diagonal mass below 3/4.
    pub fraction: f64,
    /// Success probability at least 3/4 on every `Q_r`.
    pub meets_success_condition: bool,
}

pub fn fraction_good_buckets(
    circuit: &Circuit,
    initial: &StateVector,
    spec: &EigenSpec,
    eps: f64,
) -> Result<GoodBucketReport> {
    let n = grid_from_epsilon(eps)?;
    let layout = *circuit.layout();
    let distributions = uniform_grid(n)
        .par_iter()
        .map(|&phi| probabilities_at(circuit, initial, spec, phi))
        .collect::<Result<Vec<_>>>()?;
    let mut diagonal = Vec::with_capacity(n as usize);
    let mut off_diagonal = Vec::with_capacity(n as usize);
    for bucket in buckets(n, &layout)? {
        let masses: Vec<f64> = distributions.iter().map(|p| bucket.mass(p)).collect();
        diagonal.push(masses[bucket.r as usize]);
        off_diagonal.push(masses.iter().sum::<f64>() - masses[bucket.r as usize]);
    }
    let good = off_diagonal.iter().filter(|&&m| m < SUCCESS_PROBABILITY).count();
    Ok(GoodBucketReport {
        n,
        meets_success_condition: diagonal.iter().all(|&p| p >= SUCCESS_PROBABILITY - 1e-12),
        fraction: good as f64 / n as f64,
        diagonal,
        off_diagonal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalMinT {
    Found(usize),
    Exhausted { max_queries: usize },
}

impl EmpiricalMinT {
    pub fn found(self) -> Option<usize> {
        match self {
            EmpiricalMinT::Found(t) => Some(t),
            EmpiricalMinT::Exhausted { .. } => None,
        }
    }
}

/// Smallest `T <= max_queries` for which `family(T)` succeeds with
/// probability at least 3/4 on every `Q_r` at precision `eps`, starting from
/// `|0>|q>` with the other eigenphases zero.
pub fn empirical_min_t<F>(eps: f64, max_queries: usize, family: F) -> Result<EmpiricalMinT>
where
    F: Fn(usize) -> Result<Circuit>,
{
    let n = grid_from_epsilon(eps)?;
    for queries in 0..=max_queries {
        let circuit = family(queries)?;
        if solves_every_instance(&circuit, n)? {
            return Ok(EmpiricalMinT::Found(queries));
        }
    }
    Ok(EmpiricalMinT::Exhausted { max_queries })
}

fn solves_every_instance(circuit: &Circuit, n: u64) -> Result<bool> {
    let layout = *circuit.layout();
    let initial = StateVector::zero(layout);
    let base = EigenSpec::with_target_phase(layout, Phase::ZERO);
    let results = (0..n)
        .into_par_iter()
        .map(|r| {
            let bucket = Bucket::new(r, n, &layout)?;
            let probs = probabilities_at(circuit, &initial, &base, Phase::from_ratio(r, n))?;
            Ok(bucket.mass(&probs) >= SUCCESS_PROBABILITY - 1e-12)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(results.into_iter().all(|ok| ok))
}

/// Shape limits for [`random_algorithm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomCircuitShape {
    pub max_queries: usize,
    pub max_control: usize,
    pub max_target: usize,
    pub max_power: u64,
}

impl Default for RandomCircuitShape {
    fn default() -> Self {
        RandomCircuitShape {
            max_queries: 5,
            max_control: 4,
            max_target: 2,
            max_power: 8,
        }
    }
}

/// A random instance of the general form `U_T W ... U_1 W U_0` together with
/// a random starting basis state.
pub fn random_algorithm<R: Rng + ?Sized>(
    shape: RandomCircuitShape,
    rng: &mut R,
) -> Result<(Circuit, StateVector)> {
    let control = rng.random_range(1..=shape.max_control);
    let target = rng.random_range(1..=shape.max_target);
    let queries = rng.random_range(0..=shape.max_queries);
    let layout = RegisterLayout::new(control, target)?;
    let mut circuit = Circuit::new(layout);
    circuit.push(Gate::FixedUnitary(Unitary::random(layout.dim(), rng)))?;
    for _ in 0..queries {
        circuit.push(Gate::PowerQuery {
            control: rng.random_range(1..=control),
            power: rng.random_range(1..=shape.max_power),
        })?;
        circuit.push(Gate::FixedUnitary(Unitary::random(layout.dim(), rng)))?;
    }
    let initial = StateVector::basis(layout, rng.random_range(0..layout.dim()))?;
    Ok((circuit, initial))
}

/// Agreement between the two engines on one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub max_error: f64,
    pub max_norm_defect: f64,
    /// Symbolic support is contained in `J_T`.
    pub support_within_multi_indices: bool,
    pub term_count: usize,
}

/// Runs `circuit` symbolically once and numerically at `samples` random
/// eigenphase vectors, comparing amplitudes.
pub fn cross_engine_check<R: Rng + ?Sized>(
    circuit: &Circuit,
    initial: &StateVector,
    samples: usize,
    rng: &mut R,
) -> Result<CrossCheck> {
    let layout = *circuit.layout();
    let sym = SymbolicState::run(circuit, initial)?;
    let schedule = PowerSchedule::new(circuit.power_schedule())?;
    let j_t = crate::freqset::multi_index_set(&schedule, layout.target_qubits())?;
    let support_within_multi_indices = sym.frequency_support().is_subset(&j_t);
    let mut max_error = 0.0f64;
    let mut max_norm_defect = 0.0f64;
    for _ in 0..samples {
        let phases = (0..layout.target_dim()).map(|_| Phase::new(rng.random())).collect();
        let spec = EigenSpec::new(layout, phases)?;
        let numeric = run_circuit(circuit, &spec, initial.clone())?;
        let symbolic = sym.evaluate(spec.phases())?;
        max_error = max_error.max(numeric.max_distance(&symbolic));
        max_norm_defect = max_norm_defect.max((symbolic.norm_sqr() - 1.0).abs());
    }
    Ok(CrossCheck {
        max_error,
        max_norm_defect,
        support_within_multi_indices,
        term_count: sym.term_count(),
    })
}
