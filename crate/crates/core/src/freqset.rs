//! Integer frequency sets generated by a power schedule: the multi-index set
//! `J_T`, its first-component projection `L_T` (all subset sums of the
//! schedule) and the difference set `M_T = L_T - L_T`.
//!
//! After `T` power queries every bucket probability is a trigonometric
//! polynomial with frequencies in `M_T`, and resolving `N = 1/(2 eps)` grid
//! phases needs at least `N` of them. Since `|M_T| <= |L_T|^2 <= 4^T`, this
//! caps how few queries can work.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::check_epsilon;
use crate::symbolic::MultiIndex;

/// Largest schedule [`subset_sums`] will expand.
pub const MAX_SUBSET_SUM_QUERIES: usize = 30;
/// Largest pair count [`difference_set`] will enumerate.
pub const MAX_DIFFERENCE_PAIRS: u128 = 1 << 26;
/// Largest `(1 + 2^t)^T` [`multi_index_set`] will enumerate.
pub const MAX_MULTI_INDEX_BOUND: u128 = 1 << 20;
/// Largest number of schedules [`cardinality_bound_audit`] will visit.
pub const MAX_AUDITED_SCHEDULES: u128 = 1 << 24;

/// Powers `(p_1, ..., p_T)`, each at least 1.
///
/// A zero power is an identity query; it never adds frequencies and only
/// inflates `T`, so schedules exclude it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerSchedule(Vec<u64>);

impl PowerSchedule {
    pub fn new(powers: Vec<u64>) -> Result<Self> {
        if let Some(index) = powers.iter().position(|&p| p == 0) {
            return Err(Error::ZeroPower { index });
        }
        Ok(PowerSchedule(powers))
    }

    /// `p_j = 2^{j-1}`, the textbook phase estimation choice.
    pub fn geometric(queries: usize) -> Self {
        assert!(queries < 64);
        PowerSchedule((0..queries).map(|j| 1u64 << j).collect())
    }

    /// `p_j = 1`.
    pub fn unit(queries: usize) -> Self {
        PowerSchedule(vec![1; queries])
    }

    pub fn powers(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PowerSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A sorted set of integer frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScalarFreqSet(Vec<i64>);

impl ScalarFreqSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, value: i64) -> bool {
        self.0.binary_search(&value).is_ok()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &ScalarFreqSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

impl FromIterator<i64> for ScalarFreqSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut values: Vec<i64> = iter.into_iter().collect();
        values.sort_unstable();
        values.dedup();
        ScalarFreqSet(values)
    }
}

/// `J_T` for a target register of `target_qubits` qubits, built from
/// `J_0 = {0}` by adding `p_{T+1}` to one component at a time.
pub fn multi_index_set(schedule: &PowerSchedule, target_qubits: usize) -> Result<BTreeSet<MultiIndex>> {
    let width = 1usize << target_qubits;
    let bound = (1u128 + width as u128).checked_pow(schedule.len() as u32);
    if bound.is_none_or(|b| b > MAX_MULTI_INDEX_BOUND) {
        return Err(Error::GuardExceeded {
            what: "multi-index set bound (1 + 2^t)^T",
            size: bound.unwrap_or(u128::MAX),
            limit: MAX_MULTI_INDEX_BOUND,
        });
    }
    let mut set = BTreeSet::from([MultiIndex::zero(width)]);
    for &p in schedule.powers() {
        let mut next = set.clone();
        for j in &set {
            for s in 0..width {
                next.insert(j.shifted(s, p));
            }
        }
        set = next;
    }
    Ok(set)
}

/// `L_T`: every subset sum of the schedule, including the empty sum.
pub fn subset_sums(schedule: &PowerSchedule) -> Result<ScalarFreqSet> {
    if schedule.len() > MAX_SUBSET_SUM_QUERIES {
        return Err(Error::GuardExceeded {
            what: "subset-sum schedule length",
            size: schedule.len() as u128,
            limit: MAX_SUBSET_SUM_QUERIES as u128,
        });
    }
    let mut sums = vec![0i64];
    for &p in schedule.powers() {
        let p = i64::try_from(p).map_err(|_| overflow())?;
        let shifted = sums
            .iter()
            .map(|&s| s.checked_add(p).ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        sums.extend(shifted);
        sums.sort_unstable();
        sums.dedup();
    }
    Ok(ScalarFreqSet(sums))
}

fn overflow() -> Error {
    Error::GuardExceeded {
        what: "subset sum magnitude",
        size: u128::MAX,
        limit: i64::MAX as u128,
    }
}

/// `{l - l' : l, l' in set}`.
pub fn difference_set(set: &ScalarFreqSet) -> Result<ScalarFreqSet> {
    let pairs = (set.len() as u128).pow(2);
    if pairs > MAX_DIFFERENCE_PAIRS {
        return Err(Error::GuardExceeded {
            what: "difference-set pair count",
            size: pairs,
            limit: MAX_DIFFERENCE_PAIRS,
        });
    }
    let values = set.as_slice();
    let mut out = Vec::with_capacity(values.len() * values.len());
    for &a in values {
        for &b in values {
            out.push(a.checked_sub(b).ok_or_else(overflow)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// `M_T` straight from a schedule.
pub fn schedule_differences(schedule: &PowerSchedule) -> Result<ScalarFreqSet> {
    difference_set(&subset_sums(schedule)?)
}

/// Integer grid size `N` for precision `eps`: `floor(1/(2 eps))`, with a
/// small allowance so that decimal inputs such as `1/30` land on 15.
pub fn grid_size(eps: f64) -> Result<u64> {
    check_epsilon(eps)?;
    Ok((1.0 / (2.0 * eps) + 1e-9).floor() as u64)
}

/// Outcome of the frequency-count necessary condition for one schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecessaryCondition {
    pub queries: usize,
    pub subset_sum_count: usize,
    pub difference_count: usize,
    /// `N = floor(1/(2 eps))`.
    pub threshold: u64,
    pub satisfied: bool,
}

/// Whether `|M_T| >= N` for this schedule. Failing means no algorithm using
/// these powers can reach precision `eps`; passing proves nothing.
pub fn necessary_condition(schedule: &PowerSchedule, eps: f64) -> Result<NecessaryCondition> {
    let threshold = grid_size(eps)?;
    let sums = subset_sums(schedule)?;
    let diffs = difference_set(&sums)?;
    Ok(NecessaryCondition {
        queries: schedule.len(),
        subset_sum_count: sums.len(),
        difference_count: diffs.len(),
        threshold,
        satisfied: diffs.len() as u64 >= threshold,
    })
}

/// Smallest `T` with `4^T >= 1/(2 eps)`, i.e. `ceil(log2(1/(2 eps)) / 2)`.
pub fn min_queries_bound(eps: f64) -> Result<u32> {
    check_epsilon(eps)?;
    let needed = 1.0 / (2.0 * eps) * (1.0 - 1e-12);
    let mut t = 0u32;
    while 4f64.powi(t as i32) < needed {
        t += 1;
    }
    Ok(t)
}

/// Exhaustive statistics for all schedules of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityRow {
    pub queries: usize,
    pub schedules: usize,
    pub max_subset_sums: usize,
    pub max_differences: usize,
    pub max_subset_sum_witnesses: Vec<PowerSchedule>,
    pub max_difference_witnesses: Vec<PowerSchedule>,
    /// Schedules with `|L_T| > 2^T` or `|M_T| > 4^T`; always empty for a
    /// correct implementation.
    pub violations: Vec<PowerSchedule>,
}

impl CardinalityRow {
    pub fn subset_sum_bound(&self) -> u128 {
        1u128 << self.queries
    }

    pub fn difference_bound(&self) -> u128 {
        1u128 << (2 * self.queries)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityAudit {
    pub max_power: u64,
    pub rows: Vec<CardinalityRow>,
}

impl CardinalityAudit {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.violations.is_empty())
    }
}

/// Visits every schedule with `T <= max_queries` and `1 <= p_i <= max_power`
/// and checks `|L_T| <= 2^T` and `|M_T| <= 4^T`.
pub fn cardinality_bound_audit(max_queries: usize, max_power: u64) -> Result<CardinalityAudit> {
    let total: Option<u128> = (0..=max_queries as u32)
        .map(|t| (max_power as u128).checked_pow(t))
        .sum();
    if max_power == 0 || total.is_none_or(|n| n > MAX_AUDITED_SCHEDULES) {
        return Err(Error::GuardExceeded {
            what: "audited schedule count",
            size: total.unwrap_or(u128::MAX),
            limit: MAX_AUDITED_SCHEDULES,
        });
    }
    let rows = (0..=max_queries)
        .map(|t| audit_length(t, max_power))
        .collect::<Result<Vec<_>>>()?;
    Ok(CardinalityAudit { max_power, rows })
}

fn audit_length(queries: usize, max_power: u64) -> Result<CardinalityRow> {
    let count = max_power.pow(queries as u32);
    let stats = (0..count)
        .into_par_iter()
        .map(|mut code| {
            let mut powers = Vec::with_capacity(queries);
            for _ in 0..queries {
                powers.push(code % max_power + 1);
                code /= max_power;
            }
            let schedule = PowerSchedule(powers);
            let sums = subset_sums(&schedule)?;
            let diffs = difference_set(&sums)?;
            Ok((schedule, sums.len(), diffs.len()))
        })
        .collect::<Result<Vec<_>>>()?;

    let max_l = stats.iter().map(|s| s.1).max().unwrap_or(0);
    let max_m = stats.iter().map(|s| s.2).max().unwrap_or(0);
    let l_bound = 1u128 << queries;
    let m_bound = 1u128 << (2 * queries);
    let pick = |pred: &dyn Fn(&(PowerSchedule, usize, usize)) -> bool| {
        let mut v: Vec<PowerSchedule> = stats.iter().filter(|s| pred(s)).map(|s| s.0.clone()).collect();
        v.sort();
        v
    };
    Ok(CardinalityRow {
        queries,
        schedules: stats.len(),
        max_subset_sums: max_l,
        max_differences: max_m,
        max_subset_sum_witnesses: pick(&|s| s.1 == max_l),
        max_difference_witnesses: pick(&|s| s.2 == max_m),
        violations: pick(&|s| s.1 as u128 > l_bound || s.2 as u128 > m_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sched(p: &[u64]) -> PowerSchedule {
        PowerSchedule::new(p.to_vec()).unwrap()
    }

    fn set(v: &[i64]) -> ScalarFreqSet {
        v.iter().copied().collect()
    }

    /// Brute force over all 2^T subsets, independent of the doubling loop.
    fn subset_sums_by_mask(p: &[u64]) -> ScalarFreqSet {
        (0u32..(1 << p.len()))
            .map(|mask| {
                p.iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &x)| x as i64)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn zero_powers_rejected() {
        assert_eq!(PowerSchedule::new(vec![1, 0]), Err(Error::ZeroPower { index: 1 }));
    }

    #[test]
    fn multi_index_examples() {
        let j0 = multi_index_set(&sched(&[]), 1).unwrap();
        assert_eq!(j0.into_iter().collect::<Vec<_>>(), vec![MultiIndex::zero(2)]);

        let first = |s: &[u64]| -> Vec<u64> {
            let j = multi_index_set(&sched(s), 1).unwrap();
            let mut v: Vec<u64> = j.iter().map(|m| m.components()[0]).collect();
            v.sort();
            v.dedup();
            v
        };
        assert_eq!(first(&[1, 2]), vec![0, 1, 2, 3]);
        assert_eq!(first(&[1, 2, 4]), (0..8).collect::<Vec<_>>());

        // one query over two eigenvectors: {0, p e_1, p e_2}
        let j1 = multi_index_set(&sched(&[3]), 1).unwrap();
        assert_eq!(j1.len(), 3);
        assert!(j1.contains(&MultiIndex::new(vec![0, 3])));
    }

    #[test]
    fn multi_index_guard() {
        assert!(multi_index_set(&PowerSchedule::unit(12), 1).is_ok());
        assert!(matches!(
            multi_index_set(&PowerSchedule::unit(13), 1),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sums(&sched(&[])).unwrap(), set(&[0]));
        assert_eq!(subset_sums(&sched(&[1, 2, 4])).unwrap(), set(&[0, 1, 2, 3, 4, 5, 6, 7]));
        assert_eq!(subset_sums(&sched(&[1, 1, 1])).unwrap(), set(&[0, 1, 2, 3]));
        assert!(subset_sums(&PowerSchedule::unit(31)).is_err());
        assert!(subset_sums(&sched(&[u64::MAX])).is_err());
    }

    #[test]
    fn difference_examples() {
        let geo = schedule_differences(&PowerSchedule::geometric(3)).unwrap();
        assert_eq!(geo, (-7..=7).collect());
        assert_eq!(geo.len(), 15);
        let unit = schedule_differences(&PowerSchedule::unit(3)).unwrap();
        assert_eq!(unit, (-3..=3).collect());
        assert_eq!(difference_set(&set(&[0])).unwrap(), set(&[0]));
    }

    #[test]
    fn necessary_condition_examples() {
        let geo = necessary_condition(&PowerSchedule::geometric(3), 1.0 / 30.0).unwrap();
        assert_eq!(geo.threshold, 15);
        assert_eq!(geo.difference_count, 15);
        assert_eq!(geo.subset_sum_count, 8);
        assert!(geo.satisfied);

        let unit = necessary_condition(&PowerSchedule::unit(3), 1.0 / 30.0).unwrap();
        assert_eq!(unit.difference_count, 7);
        assert!(!unit.satisfied);

        for s in [sched(&[]), sched(&[5]), PowerSchedule::unit(4)] {
            assert!(necessary_condition(&s, 0.5).unwrap().satisfied);
        }
        assert!(necessary_condition(&sched(&[1]), 0.0).is_err());
    }

    #[test]
    fn non_integer_grid_uses_floor() {
        // 1/(2 eps) = 4.5 -> N = 4
        assert_eq!(grid_size(1.0 / 9.0).unwrap(), 4);
        assert_eq!(grid_size(1.0 / 30.0).unwrap(), 15);
        assert_eq!(grid_size(0.1).unwrap(), 5);
    }

    #[test]
    fn min_queries_examples() {
        assert_eq!(min_queries_bound(0.5).unwrap(), 0);
        assert_eq!(min_queries_bound(2f64.powi(-9)).unwrap(), 4);
        assert_eq!(min_queries_bound(2f64.powi(-8)).unwrap(), 4);
        assert_eq!(min_queries_bound(2f64.powi(-3)).unwrap(), 1);
        assert!(min_queries_bound(0.75).is_err());
    }

    #[test]
    fn audit_examples() {
        let audit = cardinality_bound_audit(3, 8).unwrap();
        assert!(audit.holds());
        let t3 = &audit.rows[3];
        assert_eq!(t3.schedules, 512);
        assert_eq!(t3.max_subset_sums, 8);
        assert!(t3.max_subset_sum_witnesses.contains(&sched(&[1, 2, 4])));

        let t1 = &audit.rows[1];
        assert_eq!(t1.max_differences, 3);
        assert!(t1.difference_bound() == 4);

        let t0 = &audit.rows[0];
        assert_eq!(t0.schedules, 1);
        assert_eq!(t0.max_differences, 1);

        assert!(cardinality_bound_audit(30, 8).is_err());
    }

    #[test]
    fn geometric_and_unit_cardinalities() {
        for t in 1..=10 {
            let geo = schedule_differences(&PowerSchedule::geometric(t)).unwrap();
            assert_eq!(geo.len(), (1 << (t + 1)) - 1);
            let unit = schedule_differences(&PowerSchedule::unit(t)).unwrap();
            assert_eq!(unit.len(), 2 * t + 1);
        }
    }

    fn small_schedule() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(1u64..=40, 0..=8)
    }

    proptest! {
        #[test]
        fn subset_sums_match_brute_force(p in small_schedule()) {
            let fast = subset_sums(&sched(&p)).unwrap();
            prop_assert_eq!(&fast, &subset_sums_by_mask(&p));
            prop_assert!(fast.len() as u64 <= 1 << p.len());
            let distinct = {
                let mut all: Vec<i64> = (0u32..(1 << p.len()))
                    .map(|mask| p.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &x)| x as i64).sum())
                    .collect();
                all.sort();
                all.windows(2).all(|w| w[0] != w[1])
            };
            prop_assert_eq!(fast.len() as u64 == 1 << p.len(), distinct);
        }

        #[test]
        fn differences_symmetric_with_zero(p in small_schedule()) {
            let m = schedule_differences(&sched(&p)).unwrap();
            prop_assert!(m.contains(0));
            for v in m.iter() {
                prop_assert!(m.contains(-v));
            }
        }

        #[test]
        fn appending_never_shrinks(p in small_schedule(), extra in 1u64..=40) {
            let base = sched(&p);
            let mut longer = p.clone();
            longer.push(extra);
            let longer = sched(&longer);
            let (l0, l1) = (subset_sums(&base).unwrap(), subset_sums(&longer).unwrap());
            prop_assert!(l1.len() >= l0.len());
            prop_assert!(l0.is_subset(&l1));
            prop_assert!(schedule_differences(&longer).unwrap().len() >= schedule_differences(&base).unwrap().len());
        }

        #[test]
        fn projection_of_multi_indices_is_subset_sums(p in prop::collection::vec(1u64..=16, 0..=5), t in 1usize..=2) {
            let j = multi_index_set(&sched(&p), t).unwrap();
            let first: ScalarFreqSet = j.iter().map(|m| m.components()[0] as i64).collect();
            prop_assert_eq!(first, subset_sums(&sched(&p)).unwrap());
        }
    }
}
