use std::time::Duration;

use proptest::prelude::*;

use rwalk::connector::{connect_pair, connection_length_cap, sample_reservoir, Exclusions};
use rwalk::forest::{iterated_component_cap, iterated_path_forest, switching_path_forest};
use rwalk::graph::{validate_proper_colouring, validate_rainbow, ColouredDigraph};
use rwalk::greedy::{greedy_min_outdeg_path, StartPolicy};
use rwalk::group::{cayley_graph, path_to_rearrangement, walk_to_rearrangement, GeneratorSet, GroupTable};
use rwalk::io::{generate, random_regular_proper, Instance};
use rwalk::mop::schrijver_long_path;
use rwalk::oracle::{brute_longest_rainbow_path, brute_rearrangeable};
use rwalk::params::ParamSet;
use rwalk::rearrange::rearrangement_walk;
use rwalk::rng::stage_rng;

fn group_strategy() -> impl Strategy<Value = GroupTable> {
    prop_oneof![
        (5usize..80).prop_map(GroupTable::cyclic),
        (3usize..7).prop_map(GroupTable::elementary_abelian_2),
        (3usize..30).prop_map(|k| GroupTable::dihedral(2 * k)),
        Just(GroupTable::quaternion8()),
        ((2usize..6), (2usize..6))
            .prop_map(|(a, b)| GroupTable::product(&GroupTable::cyclic(a), &GroupTable::cyclic(b))),
    ]
}

/// A group, a generating set of size at least 2 drawn from it, and a seed.
fn cayley_case() -> impl Strategy<Value = (GroupTable, GeneratorSet, u64)> {
    (group_strategy(), any::<u64>(), 0.1f64..1.0).prop_map(|(group, seed, frac)| {
        let d = ((frac * (group.order() - 1) as f64) as usize).max(2);
        let s = GeneratorSet::random(&group, d, &mut stage_rng(seed, "prop")).unwrap();
        (group, s, seed)
    })
}

fn regular_case() -> impl Strategy<Value = (ColouredDigraph, usize)> {
    (3usize..12, 0usize..20, any::<u64>()).prop_map(|(d, extra, seed)| {
        let n = 2 * d + 2 * extra;
        (random_regular_proper(n, d, seed).unwrap(), d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn generated_instances_are_proper_and_round_trip((g, d) in regular_case()) {
        prop_assert!(validate_proper_colouring(&g).is_empty());
        prop_assert_eq!(g.min_out_degree(), d);
        prop_assert_eq!(g.max_out_degree(), d);
        let inst = Instance::from_graph(g, true, vec![("origin".into(), "test".into())]);
        let text = inst.to_text();
        prop_assert_eq!(Instance::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn cayley_graphs_are_proper((group, s, _) in cayley_case()) {
        let cay = cayley_graph(&group, &s).unwrap();
        prop_assert!(validate_proper_colouring(&cay.graph).is_empty());
        prop_assert_eq!(cay.graph.min_out_degree(), s.len());
        prop_assert_eq!(cay.graph.min_in_degree(), s.len());
    }

    #[test]
    fn greedy_reaches_half_the_min_degree((group, s, _) in cayley_case()) {
        let g = cayley_graph(&group, &s).unwrap().graph;
        let p = greedy_min_outdeg_path(&g, StartPolicy::Vertex(0));
        prop_assert_eq!(validate_rainbow(&g, &p), Ok(()));
        prop_assert!(p.len() >= s.len().div_ceil(2));
    }

    #[test]
    fn forests_are_rainbow_and_capped((g, _) in regular_case(), eps in 0.2f64..1.0) {
        let run = iterated_path_forest(&g, eps).unwrap();
        prop_assert_eq!(validate_rainbow(&g, &run.forest), Ok(()));
        prop_assert!(run.forest.component_count() <= iterated_component_cap(eps));
        prop_assert!(run.forest.edge_count() <= g.colour_count());
        prop_assert!(run.forest.paths.iter().all(|p| !p.colours.is_empty()));
        if let Ok(run) = switching_path_forest(&g, eps) {
            prop_assert_eq!(validate_rainbow(&g, &run.forest), Ok(()));
        }
    }

    #[test]
    fn rearranger_walks_are_valid((group, s, seed) in cayley_case()) {
        prop_assume!(s.len() >= 3);
        let cay = cayley_graph(&group, &s).unwrap();
        let run = rearrangement_walk(&group, &s, &ParamSet::default(), seed).unwrap();
        prop_assert_eq!(validate_rainbow(&cay.graph, &run.walk), Ok(()));
        prop_assert_eq!(run.walk.len(), s.len());
        prop_assert!(run.repetition_count <= s.len() / 2);
        let r = walk_to_rearrangement(&group, &cay, &run.walk).unwrap();
        prop_assert_eq!(r.distinct_prefix_count, group.distinct_prefix_count(&r.ordering));
        prop_assert_eq!(r.ordering, run.rearrangement.ordering);
    }

    #[test]
    fn a_path_gives_one_more_distinct_product((group, s, _) in cayley_case()) {
        let cay = cayley_graph(&group, &s).unwrap();
        let p = greedy_min_outdeg_path(&cay.graph, StartPolicy::Vertex(group.identity()));
        let r = path_to_rearrangement(&group, &cay, &p).unwrap();
        let expected = if p.len() < s.len() { p.len() + 1 } else { p.len() };
        prop_assert!(r.distinct_prefix_count >= expected);
    }

    #[test]
    fn schrijver_paths_validate((g, d) in regular_case(), seed in any::<u64>()) {
        let run = schrijver_long_path(&g, &ParamSet::default(), seed).unwrap();
        prop_assert_eq!(validate_rainbow(&g, &run.path), Ok(()));
        prop_assert!(run.path.len() >= d.div_ceil(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn connections_stay_inside_the_reservoir(seed in any::<u64>(), u in 0usize..53, w in 0usize..53) {
        prop_assume!(u != w);
        let z = GroupTable::cyclic(53);
        let g = cayley_graph(&z, &GeneratorSet::new(&z, (1..=20).collect()).unwrap()).unwrap().graph;
        let nu = 0.05;
        let res = sample_reservoir(&g, 0.4, &ParamSet { retry_cap: 200, ..ParamSet::default() }, seed);
        prop_assume!(res.is_ok());
        let res = res.unwrap();
        let mut excl = Exclusions::new(53, 20);
        if let Ok(first) = connect_pair(&g, &res, u, w, &excl, nu, 50_000) {
            prop_assert_eq!(validate_rainbow(&g, &first.path), Ok(()));
            prop_assert!(first.path.len() <= connection_length_cap(nu, 53));
            prop_assert!(first.path.colours.iter().all(|&c| res.colours[c]));
            let k = first.path.vertices.len();
            prop_assert!(first.path.vertices[1..k - 1].iter().all(|&x| res.vertices[x]));
            excl.add_path(&first.path);
            if let Ok(second) = connect_pair(&g, &res, w, u, &excl, nu, 50_000) {
                prop_assert!(second.path.colours.iter().all(|&c| !excl.colours[c]));
                let k = second.path.vertices.len();
                prop_assert!(second.path.vertices[1..k - 1].iter().all(|&x| !excl.vertices[x]));
            }
        }
    }

    #[test]
    fn heuristics_never_beat_the_oracle(d in 3usize..6, extra in 0usize..3, seed in any::<u64>()) {
        let g = random_regular_proper(2 * d + 2 * extra, d, seed).unwrap();
        let exact = brute_longest_rainbow_path(&g, Duration::from_secs(10));
        prop_assert!(exact.exact);
        prop_assert_eq!(validate_rainbow(&g, &exact.path), Ok(()));
        let greedy = greedy_min_outdeg_path(&g, StartPolicy::EveryVertex);
        let schrijver = schrijver_long_path(&g, &ParamSet::default(), seed).unwrap();
        prop_assert!(greedy.len() <= exact.length);
        prop_assert!(schrijver.path.len() <= exact.length);
    }

    #[test]
    fn rearrangeable_exactly_when_a_long_path_exists(n in 5usize..12, seed in any::<u64>(), d in 2usize..6) {
        let z = GroupTable::cyclic(n);
        let d = d.min(n - 1);
        let s = GeneratorSet::random(&z, d, &mut stage_rng(seed, "oracle")).unwrap();
        let g = cayley_graph(&z, &s).unwrap().graph;
        let ordering = brute_rearrangeable(&z, s.elements()).unwrap();
        let longest = brute_longest_rainbow_path(&g, Duration::from_secs(10));
        prop_assert!(longest.exact);
        prop_assert_eq!(ordering.is_some(), longest.length + 1 >= d);
        if let Some(o) = ordering {
            prop_assert_eq!(z.distinct_prefix_count(&o), d);
        }
    }
}

#[test]
fn generator_specs_are_reproducible() {
    for spec in [
        "regular-proper:40:6:3",
        "cayley:dihedral:24:random:10:5",
        "cayley:prod:cyclic:3,cyclic:5:all",
        "circulant:17:1,2,-2",
    ] {
        assert_eq!(generate(spec).unwrap().to_text(), generate(spec).unwrap().to_text(), "{spec}");
    }
}
