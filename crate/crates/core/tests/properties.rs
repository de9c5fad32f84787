use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypermono::function::{instantiate, to_truth_table, BooleanFunction, FamilySpec, QueryMeter, TruthTable};
use hypermono::hypercube::{random_walk, sample_point, Edge, Point, StepRule, WalkPath};
use hypermono::oracles::is_monotone;
use hypermono::stats::{chi_square_critical, chi_square_uniform};
use hypermono::tester::{
    binary_search_influential, is_violation, query_bound, query_bound_for_length, run_once_metered,
};

fn table_strategy(max_n: usize) -> impl Strategy<Value = TruthTable> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), 1 << n)
            .prop_map(move |bits| TruthTable::from_fn(n, |x| bits[x as usize]).unwrap())
    })
}

fn path_strategy(max_n: usize, max_ell: usize) -> impl Strategy<Value = (TruthTable, WalkPath)> {
    table_strategy(max_n).prop_flat_map(move |f| {
        let n = f.dim();
        let steps = proptest::collection::vec(1..=n, 1..=max_ell);
        (Just(f), 0..1u64 << n, steps).prop_map(|(f, start, steps)| {
            let path = WalkPath::new(Point::from_index(f.dim(), start).unwrap(), steps).unwrap();
            (f, path)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn binary_search_returns_adjacent_influential_pair((f, path) in path_strategy(8, 40)) {
        let values: Vec<bool> = path.vertices().map(|v| f.eval(&v)).collect();
        match binary_search_influential(&f, &path) {
            Ok((edge, t)) => {
                prop_assert!(values[0] != values[path.len()]);
                prop_assert!((1..=path.len()).contains(&t));
                prop_assert_eq!(&edge, &path.edge_at(t).unwrap());
                prop_assert!(values[t - 1] != values[t]);
            }
            Err(_) => prop_assert_eq!(values[0], values[path.len()]),
        }
    }

    #[test]
    fn witnesses_reverify_and_queries_stay_bounded(f in table_strategy(9), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut meter = QueryMeter::new(&f);
        for _ in 0..50 {
            let out = run_once_metered(&mut meter, &mut rng, None, StepRule::Simple);
            prop_assert!(out.stats.distinct <= query_bound_for_length(out.walk_length.unwrap()));
            prop_assert!(out.stats.distinct <= query_bound(f.dim()));
            if let Some(w) = out.witness() {
                prop_assert!(is_violation(&f, &w.edge));
                prop_assert!(w.edge.lower().precedes(&w.edge.upper()).unwrap());
            }
            if is_monotone(&f) {
                prop_assert!(!out.is_reject());
            }
        }
    }

    #[test]
    fn monotone_families_never_reject(seed in any::<u64>(), cones in 1usize..12, n in 1usize..40) {
        let f = instantiate(&FamilySpec::RandomMonotone { seed, cones }, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut meter = QueryMeter::new(&f);
        for _ in 0..100 {
            prop_assert!(!run_once_metered(&mut meter, &mut rng, None, StepRule::Simple).is_reject());
        }
    }

    #[test]
    fn truth_tables_round_trip(f in table_strategy(10)) {
        let text = f.to_string();
        prop_assert_eq!(text.parse::<TruthTable>().unwrap(), f.clone());
        prop_assert_eq!(text.trim_end().parse::<TruthTable>().unwrap(), f);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), p in 0.0f64..=1.0, n in 1usize..12, cones in 1usize..6) {
        for spec in [FamilySpec::RandomBernoulli { p, seed }, FamilySpec::RandomMonotone { seed, cones }] {
            let a = to_truth_table(&instantiate(&spec, n).unwrap()).unwrap();
            let b = to_truth_table(&instantiate(&spec.to_string().parse().unwrap(), n).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn points_round_trip_and_edges_canonicalize(n in 1usize..150, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sample_point(&mut rng, n);
        prop_assert_eq!(x.to_string().parse::<Point>().unwrap(), x.clone());
        let path = random_walk(&mut rng, &x, 6);
        for t in 1..=6 {
            let (a, b) = (path.vertex(t - 1).unwrap(), path.vertex(t).unwrap());
            let e = path.edge_at(t).unwrap();
            prop_assert_eq!(&e, &Edge::between(&b, &a).unwrap());
            prop_assert!(e.lower().precedes(&e.upper()).unwrap());
        }
    }
}

#[test]
fn walk_marginals_are_uniform() {
    // alpha = 0.001 per (n, t)
    let z = 3.090_232;
    for n in 1..=4usize {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + n as u64);
        let ell = 6;
        let mut counts = vec![vec![0u64; 1 << n]; ell + 1];
        for _ in 0..1_000_000 / 4 {
            let start = sample_point(&mut rng, n);
            let path = random_walk(&mut rng, &start, ell);
            for (t, v) in path.vertices().enumerate() {
                counts[t][v.index().unwrap() as usize] += 1;
            }
        }
        let critical = chi_square_critical((1 << n) - 1, z);
        for (t, c) in counts.iter().enumerate() {
            let stat = chi_square_uniform(c);
            assert!(stat <= critical, "n = {n}, t = {t}: chi-square {stat} > {critical}");
        }
    }
}

#[test]
fn crossed_edge_is_exactly_uniform() {
    // every start and step sequence, counted by hand
    for n in 1..=3usize {
        for ell in 1..=3usize {
            let mut counts: Vec<HashMap<(u64, usize), u64>> = vec![HashMap::new(); ell + 1];
            let sequences = n.pow(ell as u32);
            for start in 0..1u64 << n {
                for seq in 0..sequences {
                    let mut x = start;
                    let mut rest = seq;
                    for slot in counts.iter_mut().skip(1) {
                        let b = rest % n;
                        rest /= n;
                        let y = x ^ (1 << b);
                        *slot.entry((x.min(y), b)).or_default() += 1;
                        x = y;
                    }
                }
            }
            let edges = n << (n - 1);
            for slot in counts.iter().skip(1) {
                assert_eq!(slot.len(), edges);
                assert!(slot.values().all(|&c| c as usize * edges == (1 << n) * sequences));
            }
        }
    }
}
