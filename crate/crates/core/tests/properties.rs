use std::collections::BTreeSet;

use flowcert::{
    apply_move, automorph, certify_degree, compatible, exchange_pair, permute, signature, transform_colorings,
    translate, Coloring, Flow, FlowMultiset, Group, Move, PairExchange,
};
use proptest::prelude::*;

fn groups() -> Vec<Group> {
    vec![
        Group::cyclic(2).unwrap(),
        Group::cyclic(3).unwrap(),
        Group::cyclic(4).unwrap(),
        Group::cyclic(5).unwrap(),
        Group::new(&[2, 2]).unwrap(),
    ]
}

fn flow_from(group: &Group, raw: &[u32]) -> Flow {
    let q = group.order();
    let mut codes: Vec<u32> = raw[..raw.len() - 1].iter().map(|c| c % q).collect();
    let total = group.sum(codes.iter().map(|&c| group.elem(c).unwrap())).unwrap();
    codes.push(group.neg(total).unwrap().code());
    Flow::from_codes(group, &codes).unwrap()
}

/// Group, n, and `d` flows on `n` edges.
fn multiset_input(max_n: usize, max_d: usize) -> impl Strategy<Value = (Group, usize, Vec<Flow>)> {
    (0..groups().len(), 2..=max_n, 1..=max_d).prop_flat_map(|(gi, n, d)| {
        proptest::collection::vec(proptest::collection::vec(0u32..1000, n), d).prop_map(move |raw| {
            let g = groups()[gi].clone();
            let flows = raw.iter().map(|r| flow_from(&g, r)).collect();
            (g, n, flows)
        })
    })
}

/// A fixed-`d` variant of `multiset_input` together with an index subset.
fn flows_with_indices(max_n: usize, d: usize) -> impl Strategy<Value = (Group, usize, Vec<Flow>, BTreeSet<usize>)> {
    (0..groups().len(), 2..=max_n).prop_flat_map(move |(gi, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(0u32..1000, n), d),
            proptest::collection::btree_set(0..n, 0..=n),
        )
            .prop_map(move |(raw, indices)| {
                let g = groups()[gi].clone();
                let flows = raw.iter().map(|r| flow_from(&g, r)).collect();
                (g, n, flows, indices)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn exchange_pair_is_valid_iff_partial_sums_agree(
        (g, n, flows, indices) in flows_with_indices(8, 2),
    ) {
        let (f, h) = (&flows[0], &flows[1]);
        let lhs = g.sum(indices.iter().map(|&i| f.get(i))).unwrap();
        let rhs = g.sum(indices.iter().map(|&i| h.get(i))).unwrap();
        match exchange_pair(&g, f, h, &indices) {
            Ok((f2, h2)) => {
                prop_assert_eq!(lhs, rhs);
                let before = FlowMultiset::new(&g, n, vec![f.clone(), h.clone()]).unwrap();
                let after = FlowMultiset::new(&g, n, vec![f2.clone(), h2.clone()]).unwrap();
                prop_assert!(compatible(&before, &after).unwrap());
                for i in 0..n {
                    let (a, b) = if indices.contains(&i) { (h, f) } else { (f, h) };
                    prop_assert_eq!(f2.get(i), a.get(i));
                    prop_assert_eq!(h2.get(i), b.get(i));
                }
                let (f3, h3) = exchange_pair(&g, &f2, &h2, &indices).unwrap();
                prop_assert_eq!((&f3, &h3), (f, h));
            }
            Err(e) => {
                prop_assert_ne!(lhs, rhs);
                prop_assert_eq!(e.kind(), "invalid-exchange");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn moves_preserve_signature_and_invert(
        (g, n, flows) in multiset_input(6, 5),
        first in 0usize..5,
        second in 0usize..5,
        mask in proptest::collection::vec(any::<bool>(), 6),
    ) {
        prop_assume!(flows.len() >= 2);
        let m = FlowMultiset::new(&g, n, flows.clone()).unwrap();
        let (a, b) = (first % flows.len(), second % flows.len());
        prop_assume!(a != b);
        let indices: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        if let Ok(mv) = PairExchange::new(a, b, indices).to_move(&m) {
            let moved = apply_move(&m, &mv).unwrap();
            prop_assert_eq!(signature(&moved), signature(&m));
            prop_assert_eq!(apply_move(&moved, &mv.inverse()).unwrap(), m.clone());
            prop_assert_eq!(mv.inverse().inverse(), mv);
        }
    }

    #[test]
    fn move_between_compatible_multisets_replays(
        (g, n, flows, indices) in flows_with_indices(5, 4),
    ) {
        // swap some entries between the first two flows; when partial sums
        // agree this stays in the fiber
        let m = FlowMultiset::new(&g, n, flows.clone()).unwrap();
        if let Ok((f2, h2)) = exchange_pair(&g, &flows[0], &flows[1], &indices) {
            let mut other = flows.clone();
            other[0] = f2;
            other[1] = h2;
            let target = FlowMultiset::new(&g, n, other).unwrap();
            let mv = Move::between(&m, &target).unwrap();
            prop_assert!(mv.degree() <= 2);
            prop_assert_eq!(apply_move(&m, &mv).unwrap(), target);
        }
    }

    #[test]
    fn symmetries_preserve_compatibility(
        (g, n, flows) in multiset_input(6, 4),
        h_raw in proptest::collection::vec(0u32..1000, 6),
        shuffle in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        unit in 1u32..5,
    ) {
        prop_assume!(flows.len() >= 2);
        let half = flows.len() / 2;
        let a = FlowMultiset::new(&g, n, flows[..half.max(1)].to_vec()).unwrap();
        let b = FlowMultiset::new(&g, n, flows[flows.len() - half.max(1)..].to_vec()).unwrap();
        let before = compatible(&a, &b).unwrap();

        let h = flow_from(&g, &h_raw[..n]);
        let sigma: Vec<usize> = shuffle.iter().copied().filter(|&i| i < n).collect();
        let auts = g.automorphisms().ok();
        let aut = auts.as_ref().map(|all| all[unit as usize % all.len()].clone());

        let map = |m: &FlowMultiset, op: &dyn Fn(&Flow) -> Flow| {
            FlowMultiset::new(&g, n, m.flows().iter().map(op).collect()).unwrap()
        };
        let translated = |f: &Flow| translate(&g, f, &h).unwrap();
        let permuted = |f: &Flow| permute(f, &sigma).unwrap();
        prop_assert_eq!(compatible(&map(&a, &translated), &map(&b, &translated)).unwrap(), before);
        prop_assert_eq!(compatible(&map(&a, &permuted), &map(&b, &permuted)).unwrap(), before);
        if let Some(aut) = aut {
            let mapped = |f: &Flow| automorph(f, &aut);
            prop_assert_eq!(compatible(&map(&a, &mapped), &map(&b, &mapped)).unwrap(), before);
        }
    }

    #[test]
    fn adding_a_flow_preserves_compatibility(
        (g, n, flows, indices) in flows_with_indices(6, 3),
        extra in proptest::collection::vec(0u32..1000, 6),
        other in proptest::collection::vec(0u32..1000, 6),
    ) {
        let a = FlowMultiset::new(&g, n, flows.clone()).unwrap();
        let b = match exchange_pair(&g, &flows[0], &flows[1], &indices) {
            Ok((f2, h2)) => FlowMultiset::new(&g, n, vec![f2, h2, flows[2].clone()]).unwrap(),
            Err(_) => FlowMultiset::new(&g, n, vec![flows[0].clone(), flows[1].clone(), flow_from(&g, &other[..n])]).unwrap(),
        };
        let before = compatible(&a, &b).unwrap();
        let f = flow_from(&g, &extra[..n]);
        let after = compatible(&a.with_flow(f.clone()).unwrap(), &b.with_flow(f).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn transform_colorings_preserves_columns(
        colors in 1u32..4,
        values in proptest::collection::vec((0u32..4, 0u32..4), 2..8),
        k1 in 0usize..8,
        k2 in 0usize..8,
    ) {
        let n = values.len();
        let (k1, k2) = (k1 % n, k2 % n);
        let mut v1: Vec<u32> = values.iter().map(|p| p.0 % (colors + 1)).collect();
        let mut v2: Vec<u32> = values.iter().map(|p| p.1 % (colors + 1)).collect();
        v1[k1] = 0;
        v2[k2] = 0;
        v1[k2] = v2[k1];
        prop_assume!(v2[k2] == 0 && v1[k1] == 0);
        let f1 = Coloring::new(colors, v1).unwrap();
        let f2 = Coloring::new(colors, v2).unwrap();
        let (g1, g2) = transform_colorings(&f1, &f2, k1, k2).unwrap();
        for k in 0..n {
            let mut before = [f1.values()[k], f2.values()[k]];
            let mut after = [g1.values()[k], g2.values()[k]];
            before.sort_unstable();
            after.sort_unstable();
            prop_assert_eq!(before, after);
        }
        prop_assert_eq!(g1.values()[k1], f2.values()[k1]);
        prop_assert_eq!(g2.values()[k2], f1.values()[k2]);
    }
}

#[test]
fn certification_is_monotone_in_m() {
    for (g, n, d) in [
        (Group::cyclic(2).unwrap(), 4, 4),
        (Group::cyclic(3).unwrap(), 3, 4),
        (Group::cyclic(3).unwrap(), 4, 4),
    ] {
        let verified: Vec<bool> = (2..=d)
            .map(|m| certify_degree(&g, n, d, m).unwrap().is_verified())
            .collect();
        for w in verified.windows(2) {
            assert!(!w[0] || w[1], "{g} n={n}: {verified:?}");
        }
        assert!(verified.last().copied().unwrap());
    }
}
