//! Generative edge oracle for fiber graphs.
//!
//! Builds edges by actually performing moves: remove every sub-multiset of
//! size at most `m`, enumerate all compatible replacements through the fiber
//! module and record where each result lands. Used only to cross-check the
//! intersection rule in [`super::component_representatives`].

use std::collections::{BTreeSet, HashMap};

use crate::error::{FlowError, Result};
use crate::fiber::{enumerate_fiber_indices, ColumnSignature, FlowTable, DEFAULT_FIBER_CAP};

fn signature_of(table: &FlowTable, members: &[u32]) -> ColumnSignature {
    let order = table.group().order() as usize;
    let mut rows = vec![vec![0u32; order]; table.n()];
    for &k in members {
        for (i, v) in table.flow(k).values().iter().enumerate() {
            rows[i][v.code() as usize] += 1;
        }
    }
    ColumnSignature::from_rows(&rows).expect("rows of a multiset signature share their total")
}

/// Distinct sub-multisets of a sorted slice with sizes in `1..=max`, as
/// (chosen, rest) pairs.
fn sub_multisets(items: &[u32], max: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = BTreeSet::new();
    let len = items.len();
    for mask in 1u64..(1u64 << len) {
        if (mask.count_ones() as usize) > max {
            continue;
        }
        let (mut chosen, mut rest) = (Vec::new(), Vec::new());
        for (k, &x) in items.iter().enumerate() {
            if mask & (1 << k) != 0 {
                chosen.push(x);
            } else {
                rest.push(x);
            }
        }
        out.insert((chosen, rest));
    }
    out.into_iter().collect()
}

/// Edges `(a, b)` with `a < b` between positions of `members` (a whole fiber,
/// canonical order) reachable by one move of degree at most `m`.
pub fn generative_edges(table: &FlowTable, members: &[Vec<u32>], m: usize) -> Result<BTreeSet<(usize, usize)>> {
    let position: HashMap<&[u32], usize> = members.iter().enumerate().map(|(k, v)| (v.as_slice(), k)).collect();
    let mut edges = BTreeSet::new();
    let mut replacements: HashMap<ColumnSignature, Vec<Vec<u32>>> = HashMap::new();
    for (a, member) in members.iter().enumerate() {
        if member.len() > 63 {
            return Err(FlowError::Precondition("oracle supports degree at most 63".into()));
        }
        for (removed, rest) in sub_multisets(member, m) {
            let sig = signature_of(table, &removed);
            if !replacements.contains_key(&sig) {
                let found = enumerate_fiber_indices(table, &sig, DEFAULT_FIBER_CAP)?;
                replacements.insert(sig.clone(), found);
            }
            for inserted in &replacements[&sig] {
                if *inserted == removed {
                    continue;
                }
                let mut next: Vec<u32> = rest.iter().chain(inserted).copied().collect();
                next.sort_unstable();
                let b = *position
                    .get(next.as_slice())
                    .ok_or_else(|| FlowError::InternalInvariant("move result fell outside the fiber".into()))?;
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    Ok(edges)
}

/// Edges under the intersection rule: distinct members sharing at least
/// `d - m` flows.
pub fn intersection_edges(members: &[Vec<u32>], m: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for a in 0..members.len() {
        let d = members[a].len();
        for b in a + 1..members.len() {
            if super::common_count(&members[a], &members[b]) + m >= d {
                edges.insert((a, b));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::enumerate_all_fibers;
    use crate::group::Group;

    #[test]
    fn oracle_agrees_on_small_fibers() {
        let g = Group::cyclic(2).unwrap();
        let p = enumerate_all_fibers(&g, 4, 3).unwrap();
        for view in p.iter() {
            let members: Vec<Vec<u32>> = view.members().map(<[u32]>::to_vec).collect();
            for m in 1..=3 {
                assert_eq!(
                    generative_edges(p.table(), &members, m).unwrap(),
                    intersection_edges(&members, m)
                );
            }
        }
    }

    #[test]
    fn sub_multisets_are_distinct() {
        let subs = sub_multisets(&[1, 1, 2], 2);
        let chosen: Vec<Vec<u32>> = subs.iter().map(|(c, _)| c.clone()).collect();
        assert_eq!(chosen, vec![vec![1], vec![1, 1], vec![1, 2], vec![2]]);
    }
}
