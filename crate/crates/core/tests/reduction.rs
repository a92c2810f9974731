use proptest::prelude::*;
use simplex_reduce::experiments::{complexity_audit, AuditSpec};
use simplex_reduce::reduction::{compute_degrees, compute_indices, verify_nash};
use simplex_reduce::{betti_numbers, reduce, ReduceOptions, Simplex, SimplicialComplex, VertexId};

fn small_spec(seed: u64) -> AuditSpec {
    AuditSpec { runs: 100, n_min: 6, n_max: 14, epsilon: 0.35, k0_values: vec![1, 2, 3], seed, ..Default::default() }
}

#[test]
fn incremental_tables_match_full_recomputation() {
    let spec = small_spec(11);
    for run in 0..spec.runs {
        let case = spec.case(run).unwrap();
        let opts = ReduceOptions { verify_tables: true, ..Default::default() };
        let report = reduce(&case.complex, &case.critical, case.k0, &opts, run as u64).unwrap();
        assert_eq!(report.table_mismatches, 0, "run {run}");
        let fresh = compute_indices(&report.final_complex, &compute_degrees(&report.final_complex, case.k0));
        for (v, i) in fresh.iter() {
            if !case.critical.contains(&v) && !report.rejected.contains(&v) {
                assert_eq!(report.final_indices[&v], i, "run {run} vertex {v:?}");
            }
        }
    }
}

#[test]
fn every_step_preserves_homology_and_shrinks_the_complex() {
    let spec = AuditSpec { runs: 60, seed: 5, ..Default::default() };
    for run in 0..spec.runs {
        let case = spec.case(run).unwrap();
        let report = reduce(&case.complex, &case.critical, case.k0, &ReduceOptions::default(), 3).unwrap();
        let mut x = case.complex.clone();
        let mut prev = x.s_counts();
        for step in &report.removal_order {
            assert!(!case.critical.contains(&step.vertex));
            x.remove_vertex(step.vertex).unwrap();
            let counts = x.s_counts();
            assert!(counts.iter().zip(prev.iter().chain(std::iter::repeat(&0))).all(|(a, b)| a <= b));
            assert!(counts.len() <= prev.len());
            assert_eq!(betti_numbers(&x, case.k0, Default::default()).betti, report.initial_betti);
            assert_eq!(step.s_counts, counts);
            prev = counts;
        }
        assert_eq!(x, report.final_complex);
        assert!(verify_nash(&report, &case.complex).unwrap(), "run {run}");
        for v in &case.critical {
            assert!(report.final_complex.contains_vertex(*v));
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let case = AuditSpec { seed: 2, ..Default::default() }.case(7).unwrap();
    let a = reduce(&case.complex, &case.critical, case.k0, &ReduceOptions::default(), 42).unwrap();
    let b = reduce(&case.complex, &case.critical, case.k0, &ReduceOptions::default(), 42).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn operation_counts_stay_within_the_complexity_bound() {
    let spec = AuditSpec { runs: 100, seed: 9, ..Default::default() };
    for run in 0..spec.runs {
        let case = spec.case(run).unwrap();
        let report = reduce(&case.complex, &case.critical, case.k0, &ReduceOptions::default(), run as u64).unwrap();
        let audit = complexity_audit(&report, &case.complex);
        assert!(audit.passed, "run {run}: {} > {}", audit.measured, audit.bound);
    }
}

fn random_complex() -> impl Strategy<Value = SimplicialComplex> {
    prop::collection::vec(prop::collection::btree_set(0u32..12, 1..=4), 1..=10).prop_map(|sets| {
        SimplicialComplex::from_maximal(sets.into_iter().map(|s| Simplex::new(s).unwrap())).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn arbitrary_complexes_reduce_consistently(c in random_complex(), mask in any::<u16>(), k0 in 1usize..=3, seed in any::<u64>()) {
        let critical: Vec<VertexId> = c.vertices().filter(|v| mask >> (v.0 % 16) & 1 == 1).collect();
        let opts = ReduceOptions { verify_tables: true, ..Default::default() };
        let report = reduce(&c, &critical, k0, &opts, seed).unwrap();
        prop_assert_eq!(report.table_mismatches, 0);
        prop_assert_eq!(&report.final_betti, &report.initial_betti);
        prop_assert!(verify_nash(&report, &c).unwrap());
        prop_assert!(complexity_audit(&report, &c).passed);
    }
}
