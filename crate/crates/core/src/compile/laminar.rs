//! Lower-quota evaluation for laminar class systems.
//!
//! When the constrained classes form a laminar family, the admissible sets
//! are exactly the selections that pick, inside every class `C`, between
//! `lo(C)` and `hi(C)` doctors.  The induced lower quota
//! `p(B) = min { |X ∩ B| : X admissible }` then decomposes over the nesting
//! forest: each node reports, for every admissible selection size `t` inside
//! its class, the cheapest attainable `|selection ∩ B|`; children combine by
//! min-plus convolution, and elements in no child class are filled greedily
//! from outside `B` first.

use crate::quota::ClassBound;
use crate::sets::BitSubset;

/// Returns indices of two classes that overlap without nesting, if any.
pub(crate) fn non_laminar_pair(classes: &[ClassBound]) -> Option<(usize, usize)> {
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            let a = &classes[i].members;
            let b = &classes[j].members;
            let inter = a.intersection_card(b);
            if inter != 0 && inter != a.card() && inter != b.card() {
                return Some((i, j));
            }
        }
    }
    None
}

struct Node {
    lo: u32,
    hi: u32,
    children: Vec<usize>,
    /// Members in no child class; only these contribute new elements here.
    free: BitSubset,
}

/// The nesting forest of a laminar class system, ready for evaluation.
/// Ground positions outside every class need no tracking: they can always
/// be skipped, so they never contribute to the lower quota.
pub(crate) struct LaminarForest {
    roots: Vec<usize>,
    nodes: Vec<Node>,
}

/// Selection sizes `offset..offset+vals.len()` mapped to the cheapest
/// attainable `|selection ∩ B|`; `None` marks unattainable sizes.
struct Table {
    offset: u32,
    vals: Vec<Option<u32>>,
}

impl Table {
    fn singleton() -> Table {
        Table {
            offset: 0,
            vals: vec![Some(0)],
        }
    }

    fn min_value(&self) -> Option<u32> {
        self.vals.iter().flatten().copied().min()
    }
}

fn convolve(a: &Table, b: &Table) -> Table {
    let mut vals = vec![None; (a.vals.len() + b.vals.len()).saturating_sub(1)];
    for (i, x) in a.vals.iter().enumerate() {
        let Some(x) = x else { continue };
        for (j, y) in b.vals.iter().enumerate() {
            let Some(y) = y else { continue };
            let slot = &mut vals[i + j];
            *slot = Some(slot.map_or(x + y, |cur: u32| cur.min(x + y)));
        }
    }
    Table {
        offset: a.offset + b.offset,
        vals,
    }
}

/// Appends `free` unconstrained elements, of which `in_b` lie inside `B`:
/// taking `j` of them costs `max(0, j - (free - in_b))`.
fn extend_free(t: &Table, free: u32, in_b: u32) -> Table {
    let out_b = free - in_b;
    let mut vals = vec![None; t.vals.len() + free as usize];
    for (i, x) in t.vals.iter().enumerate() {
        let Some(x) = x else { continue };
        for j in 0..=free {
            let cost = x + j.saturating_sub(out_b);
            let slot = &mut vals[i + j as usize];
            *slot = Some(slot.map_or(cost, |cur: u32| cur.min(cost)));
        }
    }
    Table {
        offset: t.offset,
        vals,
    }
}

/// Restricts a table to sizes in `[lo, hi]`.
fn clamp(t: Table, lo: u32, hi: u32) -> Table {
    let mut vals = Vec::new();
    for tt in lo..=hi {
        let idx = tt.checked_sub(t.offset).map(|i| i as usize);
        vals.push(idx.and_then(|i| t.vals.get(i).copied().flatten()));
    }
    Table { offset: lo, vals }
}

impl LaminarForest {
    /// Builds the forest.  Callers must have verified laminarity; classes
    /// with identical members are merged (tightest bounds win).
    pub(crate) fn build(classes: &[ClassBound], ground: usize) -> LaminarForest {
        debug_assert!(non_laminar_pair(classes).is_none());
        debug_assert!(classes.iter().all(|c| c.members.universe() == ground));
        let mut merged: Vec<ClassBound> = Vec::new();
        for c in classes {
            match merged.iter_mut().find(|m| m.members == c.members) {
                Some(m) => {
                    m.lo = m.lo.max(c.lo);
                    m.hi = m.hi.min(c.hi);
                }
                None => merged.push(c.clone()),
            }
        }

        let parent_of = |i: usize| -> Option<usize> {
            merged
                .iter()
                .enumerate()
                .filter(|(j, c)| {
                    *j != i
                        && c.members.card() > merged[i].members.card()
                        && merged[i].members.is_subset_of(&c.members)
                })
                .min_by_key(|(_, c)| c.members.card())
                .map(|(j, _)| j)
        };

        let mut children = vec![Vec::new(); merged.len()];
        let mut roots = Vec::new();
        for i in 0..merged.len() {
            match parent_of(i) {
                Some(p) => children[p].push(i),
                None => roots.push(i),
            }
        }

        let nodes = merged
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut free = c.members.clone();
                for &ch in &children[i] {
                    free = free.difference(&merged[ch].members);
                }
                Node {
                    lo: c.lo,
                    hi: c.hi,
                    children: std::mem::take(&mut children[i]),
                    free,
                }
            })
            .collect();

        LaminarForest { roots, nodes }
    }

    fn node_table(&self, i: usize, b: &BitSubset) -> Table {
        let node = &self.nodes[i];
        let mut t = Table::singleton();
        for &ch in &node.children {
            t = convolve(&t, &self.node_table(ch, b));
        }
        let free = node.free.card() as u32;
        let in_b = node.free.intersection_card(b) as u32;
        t = extend_free(&t, free, in_b);
        clamp(t, node.lo, node.hi)
    }

    /// `p(B)`, or `None` when the class system admits no selection at all.
    pub(crate) fn eval(&self, b: &BitSubset) -> Option<u32> {
        let mut t = Table::singleton();
        for &r in &self.roots {
            t = convolve(&t, &self.node_table(r, b));
        }
        // Loose elements can always be skipped, so they never cost anything.
        t.min_value()
    }
}

/// Does the (laminar) class system admit any selection?
pub(crate) fn laminar_feasible(classes: &[ClassBound], ground: usize) -> bool {
    LaminarForest::build(classes, ground)
        .eval(&BitSubset::empty(ground))
        .is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(n: usize, members: &[usize], lo: u32, hi: u32) -> ClassBound {
        ClassBound {
            members: BitSubset::from_indices(n, members.iter().copied()),
            lo,
            hi,
        }
    }

    /// Brute-force `min |X ∩ B|` over all selections meeting the bounds.
    fn brute_lower(classes: &[ClassBound], n: usize, b: &BitSubset) -> Option<u32> {
        (0u64..1 << n)
            .map(|mask| BitSubset::from_mask(n, mask))
            .filter(|x| {
                classes.iter().all(|c| {
                    let k = x.intersection_card(&c.members) as u32;
                    c.lo <= k && k <= c.hi
                })
            })
            .map(|x| x.intersection_card(b) as u32)
            .min()
    }

    #[test]
    fn single_class_with_floor_can_be_dodged() {
        // One class requiring a member; any proper B missing part of the
        // class costs nothing.
        let n = 3;
        let classes = vec![class(n, &[0, 1, 2], 1, 3)];
        let forest = LaminarForest::build(&classes, n);
        assert_eq!(forest.eval(&BitSubset::from_mask(n, 0b011)), Some(0));
        assert_eq!(forest.eval(&BitSubset::full(n)), Some(1));
        assert_eq!(forest.eval(&BitSubset::empty(n)), Some(0));
    }

    #[test]
    fn no_classes_means_a_free_quota() {
        let forest = LaminarForest::build(&[], 4);
        assert_eq!(forest.eval(&BitSubset::full(4)), Some(0));
        assert!(laminar_feasible(&[], 0));
    }

    #[test]
    fn nested_floors_accumulate() {
        // {0,1} needs one, the enclosing {0,1,2,3} needs three: any
        // admissible set has 3 members, one inside {0,1}.
        let n = 5;
        let classes = vec![class(n, &[0, 1], 1, 2), class(n, &[0, 1, 2, 3], 3, 4)];
        let forest = LaminarForest::build(&classes, n);
        for mask in 0u64..1 << n {
            let b = BitSubset::from_mask(n, mask);
            assert_eq!(
                forest.eval(&b),
                brute_lower(&classes, n, &b),
                "B mask {mask:#b}"
            );
        }
    }

    #[test]
    fn infeasible_systems_report_none() {
        let n = 3;
        // Inner floor exceeds outer ceiling.
        let classes = vec![class(n, &[0, 1], 2, 2), class(n, &[0, 1, 2], 0, 1)];
        assert!(!laminar_feasible(&classes, n));
        assert_eq!(
            LaminarForest::build(&classes, n).eval(&BitSubset::empty(n)),
            None
        );
    }

    #[test]
    fn duplicate_classes_merge_to_the_tightest_bounds() {
        let n = 2;
        let classes = vec![class(n, &[0, 1], 0, 2), class(n, &[0, 1], 1, 2)];
        let forest = LaminarForest::build(&classes, n);
        assert_eq!(forest.eval(&BitSubset::full(n)), Some(1));
    }

    #[test]
    fn matches_brute_force_on_random_forests() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1a_1a);
        for _ in 0..300 {
            let n = rng.gen_range(1..=7);
            let mut classes = Vec::new();
            // Random laminar family: recursively split random intervals of a
            // shuffled ground ordering.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let mut stack = vec![(0usize, n)];
            while let Some((a, b)) = stack.pop() {
                if b - a == 0 || classes.len() >= 6 {
                    continue;
                }
                if rng.gen_bool(0.7) {
                    let size = (b - a) as u32;
                    let hi = rng.gen_range(0..=size);
                    let lo = rng.gen_range(0..=hi);
                    classes.push(class(n, &perm[a..b], lo, hi));
                }
                if b - a >= 2 && rng.gen_bool(0.8) {
                    let mid = rng.gen_range(a + 1..b);
                    stack.push((a, mid));
                    stack.push((mid, b));
                }
            }
            assert!(non_laminar_pair(&classes).is_none());
            let forest = LaminarForest::build(&classes, n);
            for mask in 0u64..1 << n {
                let b = BitSubset::from_mask(n, mask);
                assert_eq!(
                    forest.eval(&b),
                    brute_lower(&classes, n, &b),
                    "n={n} classes={classes:?} B={mask:#b}"
                );
            }
        }
    }
}
