use geolabel::biclique::validate_decomposition;
use geolabel::instance::{
    adjacency_matrix, generate_instance, oracle_adjacent, Family, GenParams,
};
use geolabel::labeling::decode_adjacent;
use geolabel::predicate::segment_intersection_spec;
use geolabel::rat::Q;
use geolabel_cli::pipeline::{
    build_labels, compatible_schemes, segment_relation_decomposition, unit_disk_decomposition,
    Scheme, SchemeParams,
};
use proptest::prelude::*;

fn gen(family: Family, n: usize, seed: u64) -> geolabel::instance::Instance {
    generate_instance(family, n, seed, &GenParams::default()).unwrap()
}

#[test]
fn unit_disk_merged_decomposition_partitions_the_edges() {
    for seed in [1, 2, 3] {
        let inst = gen(Family::UnitDisk, 96, seed);
        let dec = unit_disk_decomposition(&inst, &SchemeParams::default()).unwrap();
        let m = adjacency_matrix(&inst).unwrap();
        let report = validate_decomposition(&dec, &m).unwrap();
        assert!(report.ok, "seed {seed}: {report:?}");
    }
}

/// Every composition slot's relation decomposition must cover the ordered
/// pair (u, n+v) exactly when the slot's orientation sign is >= 0; slot 2i
/// evaluates polynomial i+1 in id order, slot 2i+1 in reversed order.
#[test]
fn segment_relation_decompositions_match_the_orientation_signs() {
    let inst = gen(Family::SegmentIntersection, 24, 5);
    let segs = match &inst.payload {
        geolabel::instance::Payload::Segments(s) => s.clone(),
        _ => unreachable!(),
    };
    let coords = |w: usize| -> Vec<Q> {
        let (a, b) = &segs[w];
        vec![a.x.clone(), a.y.clone(), b.x.clone(), b.y.clone()]
    };
    let spec = segment_intersection_spec();
    let n = segs.len();
    for slot in 0..8 {
        let dec =
            segment_relation_decomposition(&segs, slot, inst.seed, &SchemeParams::default())
                .unwrap();
        let mut covered = vec![vec![0usize; n]; n];
        for b in &dec.bicliques {
            for &u in &b.left {
                for &v in &b.right {
                    covered[u][v - n] += 1;
                }
            }
        }
        let poly = slot / 2;
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let (x, y) = if slot % 2 == 0 { (u, v) } else { (v, u) };
                let want = spec.eval_sign(poly + 1, &coords(x), &coords(y)).unwrap() >= 0;
                assert_eq!(
                    covered[u][v] == 1,
                    want,
                    "slot {slot} pair ({u},{v}) covered {} times",
                    covered[u][v]
                );
                assert!(covered[u][v] <= 1);
            }
        }
    }
}

#[test]
fn composed_labels_decode_the_oracle() {
    let inst = gen(Family::SegmentIntersection, 48, 9);
    let built = build_labels(&inst, Scheme::Composed, &SchemeParams::default()).unwrap();
    for u in 0..inst.n {
        for v in u + 1..inst.n {
            let got =
                decode_adjacent(&built.labels.descriptor, &built.labels.labels[u], &built.labels.labels[v])
                    .unwrap();
            assert_eq!(got, oracle_adjacent(&inst, u, v).unwrap(), "pair ({u},{v})");
        }
    }
}

#[test]
fn every_family_rejects_incompatible_schemes() {
    let inst = gen(Family::Disk, 8, 1);
    let err = build_labels(&inst, Scheme::Capped, &SchemeParams::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("valid pairs"), "{msg}");
    assert!(msg.contains("disk: star, switch_rows"), "{msg}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Baseline schemes round-trip on every family they claim to support.
    #[test]
    fn baselines_decode_the_oracle(seed in 1u64..1000, fam in 0usize..10) {
        let family = [
            Family::UnitDisk,
            Family::Disk,
            Family::PointHalfplane,
            Family::SegmentIntersection,
            Family::SemilinearDnf,
            Family::Boxicity,
            Family::PolygonVisibility,
            Family::TerrainVisibility,
            Family::CappedAbstract,
            Family::BichromaticSegments,
        ][fam];
        let n = if family == Family::PolygonVisibility { 16 } else { 24 };
        let inst = generate_instance(family, n, seed, &GenParams::default()).unwrap();
        for scheme in [Scheme::Star, Scheme::SwitchRows] {
            prop_assert!(compatible_schemes(family).contains(&scheme));
            let built = build_labels(&inst, scheme, &SchemeParams::default()).unwrap();
            for u in 0..n {
                for v in u + 1..n {
                    let got = decode_adjacent(
                        &built.labels.descriptor,
                        &built.labels.labels[u],
                        &built.labels.labels[v],
                    ).unwrap();
                    prop_assert_eq!(got, oracle_adjacent(&inst, u, v).unwrap());
                }
            }
        }
    }

    /// The oracle is symmetric in its two arguments.
    #[test]
    fn oracle_is_symmetric(seed in 1u64..500, fam in 0usize..10) {
        let family = [
            Family::UnitDisk,
            Family::Disk,
            Family::PointHalfplane,
            Family::SegmentIntersection,
            Family::SemilinearDnf,
            Family::Boxicity,
            Family::PolygonVisibility,
            Family::TerrainVisibility,
            Family::CappedAbstract,
            Family::BichromaticSegments,
        ][fam];
        let n = if family == Family::PolygonVisibility { 12 } else { 20 };
        let inst = generate_instance(family, n, seed, &GenParams::default()).unwrap();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    prop_assert_eq!(
                        oracle_adjacent(&inst, u, v).unwrap(),
                        oracle_adjacent(&inst, v, u).unwrap()
                    );
                }
            }
        }
    }

    /// The segment predicate spec agrees with the geometric oracle.
    #[test]
    fn segment_phi_matches_the_oracle(seed in 1u64..500) {
        let inst = generate_instance(Family::SegmentIntersection, 16, seed, &GenParams::default()).unwrap();
        let segs = match &inst.payload {
            geolabel::instance::Payload::Segments(s) => s.clone(),
            _ => unreachable!(),
        };
        let spec = segment_intersection_spec();
        let coords = |w: usize| -> Vec<Q> {
            let (a, b) = &segs[w];
            vec![a.x.clone(), a.y.clone(), b.x.clone(), b.y.clone()]
        };
        for u in 0..16 {
            for v in 0..16 {
                if u != v {
                    prop_assert_eq!(
                        spec.eval(&coords(u), &coords(v)).unwrap(),
                        oracle_adjacent(&inst, u, v).unwrap()
                    );
                }
            }
        }
    }
}
