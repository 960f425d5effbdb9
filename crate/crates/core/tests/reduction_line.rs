use griduso::bits::BitString;
use griduso::eopl::{check_answer, check_preconditions, enumerate_answers, walk_line, EoplInstance, UfeoplAnswer, Ufv1Kind};
use griduso::findsink::{find_sink, FindSinkResult};
use griduso::lab::{edges, generate, is_uso, orientation_from_mask, unique_sink, GeneratorSpec};
use griduso::reduction::{build_instance, solve_via_eopl, StateClass};
use griduso::{refined_index, verify_certificate, Certificate, Grid, Outmap};
use proptest::prelude::*;

const GUARD: u64 = 4096;

fn orientations(sizes: &[usize]) -> (Grid, Vec<Outmap>) {
    let g = Grid::from_sizes(sizes).unwrap();
    let es = edges(&g);
    let all = (0..1u64 << es.len())
        .map(|mask| Outmap::from_table(orientation_from_mask(&g, &es, mask)))
        .collect();
    (g, all)
}

#[test]
fn square_reductions_are_single_lines_exactly_on_usos() {
    let (g, all) = orientations(&[2, 2]);
    for (mask, sigma) in all.iter().enumerate() {
        let inst = build_instance(&g, sigma);
        check_preconditions(&inst).unwrap();
        let set = enumerate_answers(&inst, 24).unwrap();
        if is_uso(&g, sigma, GUARD).unwrap() {
            assert_eq!(set.uf1.len(), 1, "mask {mask}");
            assert_eq!(set.violation_count(), 0, "mask {mask}");
            let sink = unique_sink(&g, sigma, GUARD).unwrap().unwrap();
            let cert = inst.map_solution(&UfeoplAnswer::Uf1(set.uf1[0].clone()), GUARD).unwrap();
            assert_eq!(cert, Certificate::Sink(sink));
        } else {
            assert!(!set.is_empty());
            for ans in set.all() {
                let cert = inst.map_solution(&ans, GUARD).unwrap();
                assert!(verify_certificate(&g, sigma, &cert), "mask {mask}: {ans:?}");
            }
        }
    }
}

#[test]
fn successor_is_a_fixed_point_or_strictly_improves() {
    let (g, all) = orientations(&[2, 2]);
    for sigma in &all {
        let inst = build_instance(&g, sigma);
        for v in 0..1u64 << inst.node_bits() {
            let v = BitString::from_u64(inst.node_bits(), v);
            let s = inst.successor(&v);
            if s != v {
                assert_eq!(inst.is_vertex(&v), StateClass::ValidStep);
                assert!(inst.cost(&s) > inst.cost(&v));
            }
        }
    }
}

#[test]
fn two_by_three_walks_end_at_the_sink_or_a_certificate() {
    let (g, all) = orientations(&[2, 3]);
    for (mask, sigma) in all.iter().enumerate() {
        let res = solve_via_eopl(&g, sigma, GUARD, true).unwrap();
        let path = res.walk.path.as_ref().unwrap();
        assert!(path.windows(2).all(|w| w[0].1 < w[1].1), "mask {mask}");
        assert!(verify_certificate(&g, sigma, &res.certificate), "mask {mask}");
        if is_uso(&g, sigma, GUARD).unwrap() {
            let sink = unique_sink(&g, sigma, GUARD).unwrap().unwrap();
            assert_eq!(res.certificate, Certificate::Sink(sink), "mask {mask}");
        }
    }
}

#[test]
fn walk_and_direct_search_agree() {
    let (g, all) = orientations(&[2, 3]);
    for sigma in &all {
        let direct = find_sink(&g, sigma).unwrap();
        let via = solve_via_eopl(&g, sigma, GUARD, false).unwrap();
        match direct {
            FindSinkResult::Sink { point, .. } => assert_eq!(via.certificate, Certificate::Sink(point)),
            FindSinkResult::Violation { .. } => assert!(via.certificate.is_violation()),
        }
    }
}

#[test]
fn equal_cost_pair_of_two_sinks_maps_to_zero_index_collision() {
    // sinks (2,3) and (1,4) in the square {1,2}x{3,4}
    let (g, all) = orientations(&[2, 3]);
    let sigma = &all[3];
    let inst = build_instance(&g, sigma);
    let set = enumerate_answers(&inst, 24).unwrap();
    let pair = set
        .ufv1
        .iter()
        .find(|a| matches!(a, UfeoplAnswer::Ufv1 { kind: Ufv1Kind::EqualCost, .. }))
        .unwrap();
    let cert = inst.map_solution(pair, GUARD).unwrap();
    let Certificate::IndexCollision { sub, p, q } = &cert else { panic!("{cert:?}") };
    assert_eq!(sub.to_string(), "{1,2}x{3,4}");
    assert!(refined_index(sub, sigma, p).unwrap().is_zero());
    assert!(refined_index(sub, sigma, q).unwrap().is_zero());
    assert!(verify_certificate(&g, sigma, &cert));
}

#[test]
fn answers_are_checked_before_mapping() {
    let g = Grid::from_sizes(&[2, 2]).unwrap();
    let sigma = generate(&g, &GeneratorSpec::ascending(&g)).unwrap();
    let inst = build_instance(&g, &sigma);
    let start = BitString::zeros(inst.node_bits());
    assert!(!check_answer(&inst, &UfeoplAnswer::Uf1(start.clone())).unwrap());
    assert!(inst.map_solution(&UfeoplAnswer::Uf1(start), GUARD).is_err());
}

fn combed_grid() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn combed_usos_walk_to_their_sink(sizes in combed_grid(), seed in any::<u64>()) {
        let g = Grid::from_sizes(&sizes).unwrap();
        let sigma = generate(&g, &GeneratorSpec::Combed { seed }).unwrap();
        let inst = build_instance(&g, &sigma);
        let walk = walk_line(&inst, true).unwrap();
        let costs: Vec<_> = walk.path.unwrap().into_iter().map(|(_, c)| c).collect();
        prop_assert!(costs.windows(2).all(|w| w[0] < w[1]));
        let cert = inst.map_solution(&UfeoplAnswer::Uf1(walk.end), GUARD).unwrap();
        let sink = unique_sink(&g, &sigma, GUARD).unwrap().unwrap();
        prop_assert_eq!(cert, Certificate::Sink(sink));
    }

    #[test]
    fn random_orientations_map_to_valid_certificates(sizes in combed_grid(), seed in any::<u64>(), inconsistent in any::<bool>()) {
        let g = Grid::from_sizes(&sizes).unwrap();
        let spec = if inconsistent {
            GeneratorSpec::InconsistentRandom { seed }
        } else {
            GeneratorSpec::Random { seed }
        };
        let sigma = generate(&g, &spec).unwrap();
        let res = solve_via_eopl(&g, &sigma, GUARD, false).unwrap();
        prop_assert!(verify_certificate(&g, &sigma, &res.certificate));
        if is_uso(&g, &sigma, GUARD).unwrap() {
            prop_assert!(!res.certificate.is_violation());
        }
    }
}
