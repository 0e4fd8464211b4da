//! Exhaustive reference answers for small instances.
//!
//! The crossing oracle searches every host child order and every order of
//! parasite leaves inside each host leaf, with heights fixed by the time
//! order and inner parasite nodes placed above their first non-switch
//! child. Inside that family it is exact; it is not a search over all
//! drawings.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::layout::crossings::{count_pairs_bounded, ArcGeom};
use crate::layout::{Arrangement, Frame, HPLayout, LayoutError};
use crate::reconcile::{Reconciliation, TimeOrder};
use crate::tree::NodeId;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is {value}, above the oracle limit of {limit}")]
    LimitExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_host_leaves: usize,
    pub max_parasite_leaves: usize,
    pub max_states: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_host_leaves: 10,
            max_parasite_leaves: 10,
            max_states: 20_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub min_crossings: usize,
    /// Witness drawing; the first minimum in enumeration order.
    pub layout: HPLayout,
    /// Size of the search space.
    pub states: u64,
}

fn permutations(items: &[NodeId]) -> Vec<Vec<NodeId>> {
    fn go(rest: &mut Vec<NodeId>, cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut items.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Number of states the crossing oracle would visit.
pub fn state_count(rec: &Reconciliation) -> Result<u128, OracleError> {
    let frame = Frame::new(rec, false)?;
    Ok(count_states(rec, &frame))
}

fn count_states(rec: &Reconciliation, frame: &Frame) -> u128 {
    let h = rec.host();
    let flips = 1u128
        .checked_shl(h.internal_nodes().count() as u32)
        .unwrap_or(u128::MAX);
    h.leaves()
        .map(|l| (1..=frame.leaves_at(l).len() as u128).product::<u128>())
        .fold(flips, |a, b| a.saturating_mul(b))
}

/// Minimum crossing count over the canonical family, with a witness.
pub fn brute_force_min_crossings(
    rec: &Reconciliation,
    limits: OracleLimits,
) -> Result<OracleResult, OracleError> {
    let h = rec.host();
    let p = rec.parasite();
    let check = |what, value: usize, limit: usize| {
        if value > limit {
            Err(OracleError::LimitExceeded {
                what,
                value: value as u128,
                limit: limit as u128,
            })
        } else {
            Ok(())
        }
    };
    check("host leaf count", h.leaf_count(), limits.max_host_leaves)?;
    check(
        "parasite leaf count",
        p.leaf_count(),
        limits.max_parasite_leaves,
    )?;
    let frame = Frame::new(rec, false)?;
    let states = count_states(rec, &frame);
    if states > limits.max_states as u128 {
        return Err(OracleError::LimitExceeded {
            what: "state count",
            value: states,
            limit: limits.max_states as u128,
        });
    }

    let internal: Vec<NodeId> = h.internal_nodes().collect();
    let host_leaves: Vec<NodeId> = h.leaves().collect();
    let perms: Vec<Vec<Vec<NodeId>>> = host_leaves
        .iter()
        .map(|&l| permutations(frame.leaves_at(l)))
        .collect();
    let perm_total: usize = perms.iter().map(Vec::len).product();
    let n_flips = 1usize << internal.len();

    let flip_children = |mask: usize| -> Vec<Option<[NodeId; 2]>> {
        let mut ch: Vec<_> = h.nodes().map(|v| h.children(v)).collect();
        for (i, v) in internal.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if let Some([a, b]) = ch[v.0] {
                    ch[v.0] = Some([b, a]);
                }
            }
        }
        ch
    };
    let digits = |mut idx: usize| -> Vec<usize> {
        perms
            .iter()
            .map(|ps| {
                let d = idx % ps.len();
                idx /= ps.len();
                d
            })
            .collect()
    };

    // lowest flip index known to reach zero; later flips are skipped
    let zero_at = AtomicUsize::new(usize::MAX);
    let best = (0..n_flips)
        .into_par_iter()
        .filter_map(|mask| {
            if mask > zero_at.load(Ordering::Relaxed) {
                return None;
            }
            let arr = Arrangement {
                host_children: flip_children(mask),
                leaf_rank: vec![0; p.len()],
            };
            let base = frame.place(&arr);
            // first slot of every host leaf under this flip
            let mut first_slot = vec![0i64; h.len()];
            for &hl in &host_leaves {
                first_slot[hl.0] = base.rect_x[hl.0].0 / 2;
            }
            let mut x = base.x.clone();
            let of = &frame.expanded.of_original;
            let mut local: Option<(usize, usize)> = None;
            let mut arcs: Vec<ArcGeom> = frame.arc_geoms(&x);
            for idx in 0..perm_total {
                for (k, d) in digits(idx).into_iter().enumerate() {
                    let s = first_slot[host_leaves[k].0];
                    for (pos, l) in perms[k][d].iter().enumerate() {
                        x[of[l.0]] = 2 * (s + pos as i64) + 1;
                    }
                }
                for i in 0..x.len() {
                    x[i] = x[frame.src_leaf[i]];
                }
                for g in arcs.iter_mut() {
                    g.from.0 = x[of[g.parent]];
                    g.to.0 = x[of[g.child]];
                }
                let limit = local.map_or(usize::MAX, |(c, _)| c.saturating_sub(1));
                let c = count_pairs_bounded(&arcs, limit);
                if local.is_none_or(|(b, _)| c < b) {
                    local = Some((c, idx));
                    if c == 0 {
                        zero_at.fetch_min(mask, Ordering::Relaxed);
                        break;
                    }
                }
            }
            local.map(|(c, idx)| (c, mask, idx))
        })
        .min()
        .expect("at least one state");

    let (min_crossings, mask, idx) = best;
    let mut leaf_rank = vec![0usize; p.len()];
    for (k, d) in digits(idx).into_iter().enumerate() {
        for (pos, l) in perms[k][d].iter().enumerate() {
            leaf_rank[l.0] = pos;
        }
    }
    let arr = Arrangement {
        host_children: flip_children(mask),
        leaf_rank,
    };
    let layout = frame.to_layout(&frame.place(&arr));
    debug_assert_eq!(layout.crossing_count(), min_crossings);
    Ok(OracleResult {
        min_crossings,
        layout,
        states: states as u64,
    })
}

/// Largest parasite tree the ordering oracle accepts.
pub const MAX_ORDERING_NODES: usize = 8;

/// Decides time consistency by trying every linear order of the parasite
/// nodes (Heap's algorithm). Returns a witness order when one exists.
pub fn enumerate_orderings_time_check(
    rec: &Reconciliation,
) -> Result<Option<TimeOrder>, OracleError> {
    let p = rec.parasite();
    let n = p.len();
    if n > MAX_ORDERING_NODES {
        return Err(OracleError::LimitExceeded {
            what: "parasite node count",
            value: n as u128,
            limit: MAX_ORDERING_NODES as u128,
        });
    }
    let mut order: Vec<NodeId> = p.nodes().collect();
    let as_time_order = |order: &[NodeId]| {
        let mut rank = vec![0usize; n];
        for (i, v) in order.iter().enumerate() {
            rank[v.0] = i + 1;
        }
        TimeOrder {
            order: order.to_vec(),
            rank,
        }
    };
    let t = as_time_order(&order);
    if t.is_valid_for(rec) {
        return Ok(Some(t));
    }
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            let t = as_time_order(&order);
            if t.is_valid_for(rec) {
                return Ok(Some(t));
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::tests::rec;
    use crate::layout::{check_layout, planar_draw, LayoutOptions};

    #[test]
    fn planar_instance_has_zero() {
        let r = rec(
            "((a,b)u,c)r;",
            "((x,y)q1,z)q0;",
            &[("x", "a"), ("y", "c"), ("z", "b")],
            &[("q1", "r"), ("q0", "r")],
        );
        let res = brute_force_min_crossings(&r, OracleLimits::default()).unwrap();
        assert_eq!(res.min_crossings, 0);
        assert!(check_layout(&res.layout, &r).is_valid());
        assert_eq!(
            planar_draw(&r, LayoutOptions::default())
                .unwrap()
                .crossing_count(),
            0
        );
    }

    #[test]
    fn two_leaves_on_one_host_leaf_can_cross() {
        // x and y share host leaf a but their parents hang from opposite
        // sides; one order of the pair is forced to cross.
        let r = rec(
            "(a,b)r;",
            "((x,w)q1,(y,z)q2)q0;",
            &[("x", "a"), ("w", "b"), ("y", "a"), ("z", "b")],
            &[("q1", "r"), ("q2", "r"), ("q0", "r")],
        );
        let res = brute_force_min_crossings(&r, OracleLimits::default()).unwrap();
        assert_eq!(res.layout.crossing_count(), res.min_crossings);
        assert!(check_layout(&res.layout, &r).is_valid());
    }

    #[test]
    fn limits_are_enforced() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let tight = OracleLimits {
            max_states: 1,
            ..OracleLimits::default()
        };
        assert!(matches!(
            brute_force_min_crossings(&r, tight),
            Err(OracleError::LimitExceeded {
                what: "state count",
                ..
            })
        ));
        let tight = OracleLimits {
            max_host_leaves: 1,
            ..OracleLimits::default()
        };
        assert!(matches!(
            brute_force_min_crossings(&r, tight),
            Err(OracleError::LimitExceeded { .. })
        ));
        assert_eq!(state_count(&r).unwrap(), 2);
    }

    #[test]
    fn ordering_oracle_matches_on_small_cases() {
        let ok = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let t = enumerate_orderings_time_check(&ok).unwrap().unwrap();
        assert!(t.is_valid_for(&ok));
        assert!(ok.check_time_consistency().is_some());
    }
}
