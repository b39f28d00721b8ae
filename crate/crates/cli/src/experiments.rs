//! One function per subcommand. Each returns a [`Report`]; the checks in it
//! decide the exit status.

use pqlab_core::freqset::{
    difference_set, min_queries_bound, multi_index_set, necessary_condition, subset_sums,
};
use pqlab_core::lab::{
    bucket_probability_curve, build_qpe_circuit, cross_engine_check, dft_frequency_audit,
    empirical_min_t, fraction_good_buckets, full_width_half_max, grid_from_epsilon, qpe_family,
    random_algorithm, uniform_grid, Bucket, EmpiricalMinT, RandomCircuitShape,
};
use pqlab_core::numeric::measurement_distribution;
use pqlab_core::{
    run_circuit, EigenSpec, Phase, PowerSchedule, RegisterLayout, Result, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Settings};
use crate::output::{Cell, Report, Table};

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let name = config.kind.name();
    match &config.settings {
        Settings::Simulate {
            queries,
            target_qubits,
            phi,
            other_phases,
            eps,
        } => simulate(name, *queries, *target_qubits, *phi, other_phases, *eps),
        Settings::Freqset {
            schedule,
            target_qubits,
            eps,
        } => freqset(name, schedule, *target_qubits, *eps),
        Settings::QpeCurve {
            queries,
            target_qubits,
            bucket,
            eps,
            grid,
            other_phases,
        } => qpe_curve(name, *queries, *target_qubits, *bucket, *eps, *grid, other_phases),
        Settings::Audit {
            queries,
            target_qubits,
            eps,
            other_phases,
        } => audit(name, *queries, *target_qubits, *eps, other_phases),
        Settings::BoundSweep { eps, max_queries } => bound_sweep(name, eps, *max_queries),
        Settings::Selftest { seed, trials } => selftest(name, *seed, *trials),
    }
}

fn spec_for(layout: RegisterLayout, phi: Phase, others: &[Phase]) -> Result<EigenSpec> {
    let mut phases = vec![phi];
    phases.extend_from_slice(others);
    EigenSpec::new(layout, phases)
}

fn simulate(
    name: &str,
    queries: usize,
    target_qubits: usize,
    phi: Phase,
    others: &[Phase],
    eps: Option<f64>,
) -> Result<Report> {
    let circuit = build_qpe_circuit(queries, target_qubits)?;
    let layout = *circuit.layout();
    let spec = spec_for(layout, phi, others)?;
    let state = run_circuit(&circuit, &spec, StateVector::zero(layout))?;
    let dist = measurement_distribution(&state);

    let mut table = Table::new(&["k", "m", "s", "estimate", "probability"]);
    for (k, &p) in dist.probabilities().iter().enumerate() {
        let (m, s) = layout.split(k);
        let estimate = Phase::from_ratio(m as u64, layout.control_dim() as u64);
        table.push(vec![k.into(), m.into(), s.into(), estimate.value().into(), p.into()]);
    }
    let marginal = dist.control_marginal();
    let (best, best_p) = marginal
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));

    let mut report = Report::new(name, table);
    report.note("T", queries);
    report.note("phi", phi);
    report.note("most_likely_m", best);
    report.note("most_likely_estimate", best as f64 / layout.control_dim() as f64);
    report.note("most_likely_probability", best_p);
    if let Some(eps) = eps {
        report.note("success_probability", dist.success_probability(phi, eps)?);
    }
    let defect = (dist.total() - 1.0).abs();
    report.check("norm", defect < 1e-12, format!("|sum p - 1| = {defect:.2e}"));
    Ok(report)
}

fn freqset(
    name: &str,
    schedule: &PowerSchedule,
    target_qubits: Option<usize>,
    eps: Option<f64>,
) -> Result<Report> {
    let sums = subset_sums(schedule)?;
    let diffs = difference_set(&sums)?;
    let queries = schedule.len();

    let mut table = Table::new(&["set", "m"]);
    for l in sums.iter() {
        table.push(vec!["L".into(), l.into()]);
    }
    for m in diffs.iter() {
        table.push(vec!["M".into(), m.into()]);
    }

    let mut report = Report::new(name, table);
    report.note("schedule", schedule);
    report.note("T", queries);
    report.note("|L|", sums.len());
    report.note("|M|", diffs.len());
    if let Some(t) = target_qubits {
        report.note("|J|", multi_index_set(schedule, t)?.len());
    }
    if let Some(eps) = eps {
        let cond = necessary_condition(schedule, eps)?;
        report.note("N", cond.threshold);
        report.note("necessary_condition", cond.satisfied);
        report.note("min_queries_bound", min_queries_bound(eps)?);
    }

    let l_bound = 1u128 << queries;
    let m_bound = 1u128 << (2 * queries);
    report.check(
        "|L| <= 2^T",
        sums.len() as u128 <= l_bound,
        format!("{} <= {l_bound}", sums.len()),
    );
    report.check(
        "|M| <= 4^T",
        diffs.len() as u128 <= m_bound,
        format!("{} <= {m_bound}", diffs.len()),
    );
    let symmetric = diffs.iter().all(|m| diffs.contains(-m));
    report.check("M = -M", symmetric, "difference set closed under negation");
    Ok(report)
}

fn qpe_curve(
    name: &str,
    queries: usize,
    target_qubits: usize,
    r: u64,
    eps: f64,
    grid: u64,
    others: &[Phase],
) -> Result<Report> {
    let n = grid_from_epsilon(eps)?;
    let circuit = build_qpe_circuit(queries, target_qubits)?;
    let layout = *circuit.layout();
    let spec = spec_for(layout, Phase::ZERO, others)?;
    let bucket = Bucket::new(r, n, &layout)?;
    let curve = bucket_probability_curve(
        &circuit,
        &StateVector::zero(layout),
        &bucket,
        &spec,
        &uniform_grid(grid),
    )?;

    let mut table = Table::new(&["phi", "p_B_r"]);
    for &(phi, p) in &curve {
        table.push(vec![phi.value().into(), p.into()]);
    }
    let (peak_phi, peak) = curve
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((Phase::ZERO, 0.0));

    let mut report = Report::new(name, table);
    report.note("T", queries);
    report.note("N", n);
    report.note("r", r);
    report.note("bucket_size", bucket.members().len());
    report.note("peak_phi", peak_phi);
    report.note("peak", peak);
    if let Some(w) = full_width_half_max(&curve) {
        report.note("fwhm", w);
    }
    let in_range = curve.iter().all(|&(_, p)| (-1e-12..=1.0 + 1e-12).contains(&p));
    report.check("0 <= p_B_r <= 1", in_range, format!("{} samples", curve.len()));
    Ok(report)
}

fn audit(
    name: &str,
    queries: usize,
    target_qubits: usize,
    eps: f64,
    others: &[Phase],
) -> Result<Report> {
    let circuit = build_qpe_circuit(queries, target_qubits)?;
    let layout = *circuit.layout();
    let spec = spec_for(layout, Phase::ZERO, others)?;
    let initial = StateVector::zero(layout);
    let audit = dft_frequency_audit(&circuit, &initial, &spec, eps)?;
    let good = fraction_good_buckets(&circuit, &initial, &spec, eps)?;

    let mut table = Table::new(&["r", "m", "eta_real", "eta_imag"]);
    for b in &audit.buckets {
        for (&m, eta) in &b.eta {
            table.push(vec![b.r.into(), m.into(), eta.re.into(), eta.im.into()]);
        }
    }

    let mut report = Report::new(name, table);
    report.note("T", queries);
    report.note("N", audit.n);
    report.note("|M|", audit.differences.len());
    for b in &audit.buckets {
        report.note(
            &format!("B_{}", b.r),
            format!(
                "nonzero_classes={} nonzero_frequencies={} dft_error={:.2e} p_diag={:.6}",
                b.nonzero_classes(),
                b.nonzero_frequencies(),
                b.dft_error(),
                b.diagonal_mass(),
            ),
        );
    }
    report.note("success_condition", good.meets_success_condition);
    report.note("fraction_good_buckets", good.fraction);

    let dft = audit.max_dft_error();
    report.check("inverse DFT = aliased eta", dft < 1e-9, format!("max error {dft:.2e}"));
    report.check(
        "eta support within M",
        audit.supports_within_differences(),
        format!("|M| = {}", audit.differences.len()),
    );
    let asym = audit
        .buckets
        .iter()
        .map(|b| b.conjugate_asymmetry())
        .fold(0.0, f64::max);
    report.check("eta_-m = conj(eta_m)", asym < 1e-12, format!("max {asym:.2e}"));
    report.check(
        "concentrated buckets have N nonzero classes",
        audit.concentrated_buckets_resolve_grid(),
        format!("{:.3} of buckets concentrated", audit.concentrated_fraction()),
    );
    if good.meets_success_condition {
        report.check(
            "fraction_good_buckets >= 2/3",
            good.fraction >= 2.0 / 3.0,
            format!("{:.6}", good.fraction),
        );
    }
    Ok(report)
}

fn bound_sweep(name: &str, eps_list: &[f64], max_queries: usize) -> Result<Report> {
    let mut table = Table::new(&["eps", "N", "min_queries_bound", "empirical_min_T"]);
    let mut report = Report::new(name, Table::default());
    let mut consistent = true;
    let mut detail = Vec::new();
    for &eps in eps_list {
        let n = grid_from_epsilon(eps)?;
        let bound = min_queries_bound(eps)? as usize;
        let empirical = empirical_min_t(eps, max_queries, qpe_family(1))?;
        let cell: Cell = match empirical {
            EmpiricalMinT::Found(t) => {
                consistent &= t >= bound;
                detail.push(format!("{bound}<={t}"));
                t.into()
            }
            // the true minimum lies above the cap, so nothing contradicts the bound
            EmpiricalMinT::Exhausted { max_queries } => {
                detail.push(format!("{bound}<=(>{max_queries})"));
                format!(">{max_queries}").into()
            }
        };
        table.push(vec![eps.into(), n.into(), bound.into(), cell]);
    }
    report.table = table;
    report.note("max_T", max_queries);
    report.check("empirical_min_T >= min_queries_bound", consistent, detail.join(" "));
    Ok(report)
}

fn selftest(name: &str, seed: u64, trials: usize) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["check", "value", "tolerance", "passed"]);
    let mut report = Report::new(name, Table::default());
    let mut record = |table: &mut Table, check: &str, value: f64, tol: f64, passed: bool| {
        table.push(vec![check.into(), value.into(), tol.into(), passed.into()]);
        report.check(check, passed, format!("{value:.3e} (tolerance {tol:.0e})"));
    };

    let mut worst = 0.0f64;
    let mut norm = 0.0f64;
    let mut inside = true;
    for _ in 0..trials {
        let (circuit, initial) = random_algorithm(RandomCircuitShape::default(), &mut rng)?;
        let c = cross_engine_check(&circuit, &initial, 20, &mut rng)?;
        worst = worst.max(c.max_error);
        norm = norm.max(c.max_norm_defect);
        inside &= c.support_within_multi_indices;
    }
    record(&mut table, "symbolic = numeric", worst, 1e-9, worst < 1e-9);
    record(&mut table, "norm preserved", norm, 1e-9, norm < 1e-9);
    record(&mut table, "support within J_T", 0.0, 0.0, inside);

    let mut qpe = 0.0f64;
    for t in 1..=6 {
        let circuit = build_qpe_circuit(t, 1)?;
        let layout = *circuit.layout();
        for r in 0..(1u64 << t) {
            let spec = spec_for(layout, Phase::from_ratio(r, 1 << t), &[Phase::new(rng.random())])?;
            let out = run_circuit(&circuit, &spec, StateVector::zero(layout))?;
            let p = measurement_distribution(&out).control_marginal()[r as usize];
            qpe = qpe.max((p - 1.0).abs());
        }
    }
    record(&mut table, "exact-phase QPE", qpe, 1e-12, qpe < 1e-12);

    let mut formulas = true;
    for t in 1..=10 {
        let geometric = difference_set(&subset_sums(&PowerSchedule::geometric(t))?)?.len();
        let unit = difference_set(&subset_sums(&PowerSchedule::unit(t))?)?.len();
        formulas &= geometric == (1 << (t + 1)) - 1 && unit == 2 * t + 1;
    }
    record(&mut table, "|M| closed forms", 0.0, 0.0, formulas);

    report.table = table;
    report.note("seed", seed);
    report.note("trials", trials);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentKind, Params};

    fn run(kind: ExperimentKind, p: Params) -> Report {
        run_experiment(&ExperimentConfig::resolve(kind, &p).unwrap()).unwrap()
    }

    fn note<'a>(r: &'a Report, key: &str) -> &'a str {
        &r.summary.iter().find(|(k, _)| k == key).unwrap().1
    }

    #[test]
    fn freqset_geometric_counts() {
        let r = run(
            ExperimentKind::Freqset,
            Params {
                schedule: Some(vec![1, 2, 4]),
                ..Params::default()
            },
        );
        assert_eq!(note(&r, "|L|"), "8");
        assert_eq!(note(&r, "|M|"), "15");
        assert!(r.passed());
        assert_eq!(r.table.rows.len(), 23);
    }

    #[test]
    fn curve_peaks_at_bucket_center() {
        let r = run(
            ExperimentKind::QpeCurve,
            Params {
                bucket: Some(2),
                grid: Some(64),
                ..Params::default()
            },
        );
        assert!(r.passed());
        assert_eq!(note(&r, "peak_phi"), Phase::new(0.25).to_string());
        let peak: f64 = note(&r, "peak").parse().unwrap();
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_on_qpe_passes() {
        let r = run(ExperimentKind::Audit, Params::default());
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(note(&r, "N"), "8");
        assert_eq!(note(&r, "fraction_good_buckets"), "1");
    }

    #[test]
    fn sweep_rows() {
        let r = run(
            ExperimentKind::BoundSweep,
            Params {
                eps: Some("2^-3..2^-5".into()),
                ..Params::default()
            },
        );
        assert!(r.passed());
        assert_eq!(r.table.rows.len(), 3);
        let bounds = r.table.column("min_queries_bound").unwrap();
        assert_eq!(bounds, vec![&Cell::Int(1), &Cell::Int(2), &Cell::Int(2)]);
    }

    #[test]
    fn sweep_cap_reports_exhaustion() {
        let r = run(
            ExperimentKind::BoundSweep,
            Params {
                eps: Some("2^-6".into()),
                max_queries: Some(2),
                ..Params::default()
            },
        );
        assert_eq!(r.table.rows[0][3], Cell::Text(">2".into()));
    }

    #[test]
    fn simulate_exact_phase() {
        let r = run(
            ExperimentKind::Simulate,
            Params {
                phi: Some(0.375),
                eps: Some("2^-4".into()),
                ..Params::default()
            },
        );
        assert!(r.passed());
        assert_eq!(note(&r, "most_likely_m"), "3");
        assert_eq!(note(&r, "success_probability").parse::<f64>().unwrap().round(), 1.0);
    }

    #[test]
    fn selftest_small() {
        let r = run(
            ExperimentKind::Selftest,
            Params {
                trials: Some(5),
                ..Params::default()
            },
        );
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.checks.len(), 5);
    }
}
