//! The static complete tree `P`, its preferred-child state, and the
//! interleave lower bound.

use crate::cost_model::Key;
use crate::error::{Error, Result};

/// Left-complete binary tree on `1..=n`, labeled in symmetric order.
///
/// Heap slot `i` has children `2i` and `2i + 1`; every node therefore has no
/// children, two children, or only a left child.
#[derive(Debug, Clone)]
pub struct CompleteTree {
    n: usize,
    key_of_slot: Vec<Key>,
    slot_of_key: Vec<u32>,
}

impl CompleteTree {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooSmall { n, min: 1 });
        }
        if n >= u32::MAX as usize / 2 {
            return Err(Error::Parse(format!("universe size {n} is too large")));
        }
        let mut key_of_slot = vec![0; n + 1];
        let mut slot_of_key = vec![0; n + 1];
        let mut next: Key = 1;
        let mut stack = Vec::new();
        let mut cur = 1usize;
        while cur <= n || !stack.is_empty() {
            while cur <= n {
                stack.push(cur);
                cur *= 2;
            }
            let s = stack.pop().expect("non-empty");
            key_of_slot[s] = next;
            slot_of_key[next as usize] = s as u32;
            next += 1;
            cur = 2 * s + 1;
        }
        Ok(CompleteTree {
            n,
            key_of_slot,
            slot_of_key,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> Key {
        self.key_of_slot[1]
    }

    #[inline]
    fn slot(&self, key: Key) -> usize {
        self.slot_of_key[key as usize] as usize
    }

    #[inline]
    fn key_at(&self, slot: usize) -> Option<Key> {
        (slot >= 1 && slot <= self.n).then(|| self.key_of_slot[slot])
    }

    pub fn contains(&self, key: Key) -> bool {
        key >= 1 && key as usize <= self.n
    }

    pub fn check_key(&self, key: Key) -> Result<()> {
        if self.contains(key) {
            Ok(())
        } else {
            Err(Error::KeyOutOfRange { key, n: self.n })
        }
    }

    pub fn parent(&self, key: Key) -> Option<Key> {
        self.key_at(self.slot(key) / 2)
    }

    pub fn left(&self, key: Key) -> Option<Key> {
        self.key_at(2 * self.slot(key))
    }

    pub fn right(&self, key: Key) -> Option<Key> {
        self.key_at(2 * self.slot(key) + 1)
    }

    pub fn depth(&self, key: Key) -> u32 {
        self.slot(key).ilog2()
    }

    pub fn is_leaf(&self, key: Key) -> bool {
        self.left(key).is_none()
    }

    /// Height of the tree in edges.
    pub fn height(&self) -> u32 {
        self.n.ilog2()
    }

    /// Keys from the root down to `key`, inclusive.
    pub fn path_to(&self, key: Key) -> Vec<Key> {
        let mut s = self.slot(key);
        let mut out = Vec::with_capacity(s.ilog2() as usize + 1);
        while s >= 1 {
            out.push(self.key_of_slot[s]);
            s /= 2;
        }
        out.reverse();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preferred {
    None,
    Left,
    Right,
}

/// Preferred-child changes caused by one access.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct AccessReport {
    /// Left/right flips: the access's contribution to the interleave bound.
    pub ib_increment: u64,
    /// Nodes that had no preferred child before this access.
    pub first_touch: u64,
}

impl AccessReport {
    /// Total preferred-child pointers changed.
    pub fn updates(&self) -> u64 {
        self.ib_increment + self.first_touch
    }
}

/// `P` together with the preferred child of every node.
#[derive(Debug, Clone)]
pub struct ReferenceModel {
    tree: CompleteTree,
    preferred: Vec<Preferred>,
    ib_total: u64,
}

impl ReferenceModel {
    pub fn new(n: usize) -> Result<Self> {
        let tree = CompleteTree::new(n)?;
        Ok(ReferenceModel {
            tree,
            preferred: vec![Preferred::None; n + 1],
            ib_total: 0,
        })
    }

    pub fn tree(&self) -> &CompleteTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    pub fn ib_total(&self) -> u64 {
        self.ib_total
    }

    pub fn preferred(&self, key: Key) -> Preferred {
        self.preferred[key as usize]
    }

    /// Makes the root-to-`key` path preferred. The accessed node itself lies
    /// in its own left region, so it prefers its left child when it has one.
    pub fn record_access(&mut self, key: Key) -> Result<AccessReport> {
        self.tree.check_key(key)?;
        let mut report = AccessReport::default();
        let target = self.tree.slot(key);
        let levels = target.ilog2();
        for shift in (0..=levels).rev() {
            let s = target >> shift;
            let want = if shift == 0 {
                if 2 * s > self.tree.n {
                    continue;
                }
                Preferred::Left
            } else if (target >> (shift - 1)) & 1 == 0 {
                Preferred::Left
            } else {
                Preferred::Right
            };
            let v = self.tree.key_of_slot[s] as usize;
            match self.preferred[v] {
                p if p == want => {}
                Preferred::None => report.first_touch += 1,
                _ => report.ib_increment += 1,
            }
            self.preferred[v] = want;
        }
        self.ib_total += report.ib_increment;
        Ok(report)
    }

    /// Maximal chains of preferred children.
    pub fn preferred_path_decomposition(&self) -> Partition {
        let t = &self.tree;
        let mut paths = Vec::new();
        for k in 1..=t.n as Key {
            let heads_path = match t.parent(k) {
                None => true,
                Some(p) => self.preferred_child(p) != Some(k),
            };
            if heads_path {
                let mut path = vec![k];
                let mut cur = k;
                while let Some(c) = self.preferred_child(cur) {
                    path.push(c);
                    cur = c;
                }
                paths.push(path);
            }
        }
        Partition::new(paths)
    }

    /// The preferred path starting at the root, top first.
    pub fn root_path(&self) -> Vec<Key> {
        let mut cur = self.tree.root();
        let mut out = vec![cur];
        while let Some(c) = self.preferred_child(cur) {
            out.push(c);
            cur = c;
        }
        out
    }

    fn preferred_child(&self, key: Key) -> Option<Key> {
        match self.preferred[key as usize] {
            Preferred::None => None,
            Preferred::Left => self.tree.left(key),
            Preferred::Right => self.tree.right(key),
        }
    }
}

/// A set partition of `1..=n`, kept in canonical order so partitions from
/// different sources compare with `==`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<Key>>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<Key>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b.first().copied());
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<Key>] {
        &self.blocks
    }

    pub fn block_of(&self, key: Key) -> Option<&[Key]> {
        self.blocks
            .iter()
            .find(|b| b.binary_search(&key).is_ok())
            .map(|b| b.as_slice())
    }
}

/// Per-access interleave increments and their sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaveTrace {
    pub per_access_increment: Vec<u64>,
    pub total: u64,
}

/// Interleave bound by replaying `xs` through a fresh model.
pub fn interleave_bound(xs: &[Key], n: usize) -> Result<InterleaveTrace> {
    let mut model = ReferenceModel::new(n)?;
    let mut per_access_increment = Vec::with_capacity(xs.len());
    for &x in xs {
        per_access_increment.push(model.record_access(x)?.ib_increment);
    }
    Ok(InterleaveTrace {
        per_access_increment,
        total: model.ib_total(),
    })
}

/// Interleave bound straight from its definition: for each node, the number
/// of left/right region switches among the accesses inside its subtree.
///
/// The tree is rebuilt here from subtree sizes rather than heap slots, so it
/// shares nothing with [`ReferenceModel`].
pub fn direct_interleave_bound(xs: &[Key], n: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::TooSmall { n, min: 1 });
    }
    if let Some(&bad) = xs.iter().find(|&&x| x == 0 || x as usize > n) {
        return Err(Error::KeyOutOfRange { key: bad, n });
    }
    let mut total = 0;
    let mut stack = vec![(1u64, n as u64)];
    while let Some((lo, size)) = stack.pop() {
        if size == 0 {
            continue;
        }
        let left = left_subtree_size(size);
        let root = lo + left;
        let hi = lo + size - 1;
        let mut last: Option<bool> = None;
        for &x in xs {
            let x = x as u64;
            if x < lo || x > hi {
                continue;
            }
            let in_left = x <= root;
            if last.is_some_and(|l| l != in_left) {
                total += 1;
            }
            last = Some(in_left);
        }
        stack.push((lo, left));
        stack.push((root + 1, size - left - 1));
    }
    Ok(total)
}

/// Size of the left subtree of a left-complete tree with `size` nodes.
fn left_subtree_size(size: u64) -> u64 {
    if size <= 1 {
        return 0;
    }
    let h = size.ilog2();
    let above = (1u64 << h) - 1;
    let last_level = size - above;
    let half = 1u64 << (h - 1);
    (half - 1) + last_level.min(half)
}

/// `max(m, IB/2 − n)`.
pub fn lower_bound_from(ib: u64, m: usize, n: usize) -> f64 {
    (m as f64).max(ib as f64 / 2.0 - n as f64)
}

/// Lower bound on the optimal offline cost of serving `xs`.
pub fn opt_lower_bound(xs: &[Key], n: usize) -> Result<f64> {
    let ib = interleave_bound(xs, n)?.total;
    Ok(lower_bound_from(ib, xs.len(), n))
}

/// Leading-order probability `2 lg n / n` that two random keys share a
/// root-to-leaf path of `P`.
pub fn rho(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    Ok(2.0 * (n as f64).log2() / n as f64)
}

/// An exact fraction, not reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Fraction of unordered key pairs where one key is an ancestor of the
/// other in `P`.
pub fn exact_common_path_probability(n: usize) -> Result<Ratio> {
    if n < 2 {
        return Err(Error::TooSmall { n, min: 2 });
    }
    // each node has exactly depth(v) ancestors
    let num: u64 = (1..=n as u64).map(|s| s.ilog2() as u64).sum();
    let n = n as u64;
    Ok(Ratio {
        num,
        den: n * (n - 1) / 2,
    })
}

/// Per-access `lg(min_i t_ij + |x_i − x_j| + 2)`, with `t_ij` the number of
/// distinct keys accessed strictly between `i` and `j`. The first access
/// gets `lg(n + 2)`.
pub fn unified_bound(xs: &[Key], n: usize) -> Result<Vec<f64>> {
    if let Some(&bad) = xs.iter().find(|&&x| x == 0 || x as usize > n) {
        return Err(Error::KeyOutOfRange { key: bad, n });
    }
    let mut stamp = vec![usize::MAX; n + 1];
    let mut out = Vec::with_capacity(xs.len());
    for (j, &xj) in xs.iter().enumerate() {
        if j == 0 {
            out.push(((n + 2) as f64).log2());
            continue;
        }
        let mut best = u64::MAX;
        let mut distinct = 0u64;
        for i in (0..j).rev() {
            let xi = xs[i];
            if distinct + 2 >= best {
                break;
            }
            // a later occurrence of the same key already had a smaller t
            if stamp[xi as usize] != j {
                let cand = distinct + xi.abs_diff(xj) as u64 + 2;
                best = best.min(cand);
                stamp[xi as usize] = j;
                distinct += 1;
            }
        }
        out.push((best as f64).log2());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Brute-force IB: per node of an explicit shape, scan the whole sequence.
    fn brute_ib(xs: &[Key], t: &CompleteTree) -> u64 {
        let mut total = 0;
        for v in 1..=t.n() as Key {
            let sub = subtree(t, v);
            let mut last = None;
            for &x in xs {
                if !sub.contains(&x) {
                    continue;
                }
                let left = x <= v;
                if last.is_some_and(|l| l != left) {
                    total += 1;
                }
                last = Some(left);
            }
        }
        total
    }

    fn subtree(t: &CompleteTree, v: Key) -> Vec<Key> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            let k = out[i];
            out.extend(t.left(k));
            out.extend(t.right(k));
            i += 1;
        }
        out
    }

    #[test]
    fn three_node_shape() {
        let t = CompleteTree::new(3).unwrap();
        assert_eq!(t.root(), 2);
        assert_eq!((t.left(2), t.right(2)), (Some(1), Some(3)));
        assert_eq!((t.depth(2), t.depth(1), t.depth(3)), (0, 1, 1));
    }

    #[test]
    fn fifteen_node_shape() {
        let t = CompleteTree::new(15).unwrap();
        assert_eq!(t.root(), 8);
        assert_eq!((t.left(8), t.right(8)), (Some(4), Some(12)));
        for k in (1..=15).step_by(2) {
            assert_eq!(t.depth(k), 3);
        }
    }

    #[test]
    fn six_node_shape() {
        let t = CompleteTree::new(6).unwrap();
        assert_eq!(t.root(), 4);
        assert_eq!(subtree(&t, t.left(4).unwrap()).len(), 3);
        assert_eq!(subtree(&t, t.right(4).unwrap()).len(), 2);
        for k in 1..=6 {
            assert!(!(t.left(k).is_none() && t.right(k).is_some()));
        }
    }

    #[test]
    fn zero_keys_rejected() {
        assert!(CompleteTree::new(0).is_err());
        assert!(ReferenceModel::new(0).is_err());
    }

    #[test]
    fn alternating_three_nodes() {
        let mut m = ReferenceModel::new(3).unwrap();
        let incs: Vec<u64> = [1, 3, 1, 3]
            .iter()
            .map(|&k| m.record_access(k).unwrap().ib_increment)
            .collect();
        assert_eq!(incs, vec![0, 1, 1, 1]);
        assert_eq!(m.ib_total(), 3);
        assert_eq!(brute_ib(&[1, 3, 1, 3], m.tree()), 3);
    }

    #[test]
    fn repeats_cost_nothing() {
        assert_eq!(interleave_bound(&[1, 1, 1], 3).unwrap().total, 0);
        assert_eq!(interleave_bound(&[5], 9).unwrap().total, 0);
    }

    #[test]
    fn out_of_range_key() {
        let mut m = ReferenceModel::new(3).unwrap();
        assert_eq!(
            m.record_access(4),
            Err(Error::KeyOutOfRange { key: 4, n: 3 })
        );
        assert!(m.record_access(0).is_err());
    }

    #[test]
    fn sequential_pass_matches_brute_force() {
        let xs: Vec<Key> = (1..=7).collect();
        let t = CompleteTree::new(7).unwrap();
        let ib = interleave_bound(&xs, 7).unwrap().total;
        assert_eq!(ib, brute_ib(&xs, &t));
        assert_eq!(ib, direct_interleave_bound(&xs, 7).unwrap());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_from(0, 10, 100), 10.0);
        assert_eq!(opt_lower_bound(&[1, 3, 1, 3], 3).unwrap(), 4.0);
        let xs: Vec<Key> = std::iter::repeat_n([1, 3], 100).flatten().collect();
        let ib = brute_ib(&xs, &CompleteTree::new(4).unwrap());
        let expect = (200f64).max(ib as f64 / 2.0 - 4.0);
        assert_eq!(opt_lower_bound(&xs, 4).unwrap(), expect);
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(1024).unwrap(), 0.01953125);
        assert_eq!(rho(4).unwrap(), 1.0);
        assert!(rho(1).is_err());
        assert!((rho(3).unwrap() - 1.0566416671474375).abs() < 1e-12);
    }

    fn brute_common_path(n: usize) -> Ratio {
        let t = CompleteTree::new(n).unwrap();
        let mut num = 0;
        for a in 1..=n as Key {
            for b in a + 1..=n as Key {
                if t.path_to(a).contains(&b) || t.path_to(b).contains(&a) {
                    num += 1;
                }
            }
        }
        Ratio {
            num,
            den: (n * (n - 1) / 2) as u64,
        }
    }

    #[test]
    fn common_path_probability_small() {
        assert_eq!(
            exact_common_path_probability(3).unwrap(),
            Ratio { num: 2, den: 3 }
        );
        assert_eq!(
            exact_common_path_probability(7).unwrap(),
            Ratio { num: 10, den: 21 }
        );
        assert_eq!(exact_common_path_probability(2).unwrap().value(), 1.0);
        for n in 2..60 {
            assert_eq!(
                exact_common_path_probability(n).unwrap(),
                brute_common_path(n)
            );
        }
        for h in 2..12u32 {
            let n = (1usize << h) - 1;
            let sum: u64 = (0..h as u64).map(|l| (1u64 << l) * l).sum();
            assert_eq!(exact_common_path_probability(n).unwrap().num, sum);
        }
    }

    #[test]
    fn common_path_ratio_approaches_one() {
        let ratios: Vec<f64> = (4..=15)
            .map(|h| {
                let n = (1usize << h) - 1;
                exact_common_path_probability(n).unwrap().value() / rho(n).unwrap()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        // exact/leading-order ratio behaves like 1 − 2/lg n for full trees
        let n = (1usize << 15) - 1;
        let r = ratios.last().unwrap();
        let lg = (n as f64).log2();
        assert!((r - (lg - 2.0) / lg).abs() < 0.01, "{r}");
    }

    #[test]
    fn unified_bound_examples() {
        assert_eq!(unified_bound(&[5, 5], 9).unwrap()[1], 1.0);
        assert_eq!(unified_bound(&[5, 6], 9).unwrap()[1], 3f64.log2());
        assert_eq!(unified_bound(&[1, 9, 2], 9).unwrap()[2], 2.0);
        assert_eq!(unified_bound(&[1], 6).unwrap()[0], 3.0);
    }

    fn brute_unified(xs: &[Key], n: usize) -> Vec<f64> {
        let mut out = vec![((n + 2) as f64).log2()];
        for j in 1..xs.len() {
            let mut best = u64::MAX;
            for i in 0..j {
                let mut between: Vec<Key> = xs[i + 1..j].to_vec();
                between.sort_unstable();
                between.dedup();
                best = best.min(between.len() as u64 + xs[i].abs_diff(xs[j]) as u64 + 2);
            }
            out.push((best as f64).log2());
        }
        out
    }

    #[test]
    fn fig1_paths() {
        let mut m = ReferenceModel::new(15).unwrap();
        for k in [1, 15, 9, 5] {
            m.record_access(k).unwrap();
        }
        let expect = Partition::new(vec![
            vec![8, 4, 6, 5],
            vec![12, 10, 9],
            vec![2, 1],
            vec![14, 15],
            vec![3],
            vec![7],
            vec![11],
            vec![13],
        ]);
        assert_eq!(m.preferred_path_decomposition(), expect);
        assert_eq!(m.root_path(), vec![8, 4, 6, 5]);
    }

    #[test]
    fn fresh_and_single_access_paths() {
        let mut m = ReferenceModel::new(7).unwrap();
        assert_eq!(m.preferred_path_decomposition().blocks().len(), 7);
        let r = m.record_access(1).unwrap();
        assert_eq!(
            r,
            AccessReport {
                ib_increment: 0,
                first_touch: 2
            }
        );
        let p = m.preferred_path_decomposition();
        assert_eq!(p.block_of(4), Some(&[1, 2, 4][..]));
        assert_eq!(p.blocks().len(), 5);
    }

    #[test]
    fn own_access_prefers_left() {
        let mut m = ReferenceModel::new(7).unwrap();
        m.record_access(7).unwrap();
        let r = m.record_access(4).unwrap();
        assert_eq!(
            r,
            AccessReport {
                ib_increment: 1,
                first_touch: 0
            }
        );
        assert_eq!(m.root_path(), vec![4, 2]);
    }

    proptest! {
        #[test]
        fn replay_matches_direct_definition(
            n in 1usize..80,
            raw in prop::collection::vec(any::<u32>(), 0..120),
        ) {
            let xs: Vec<Key> = raw.iter().map(|r| r % n as u32 + 1).collect();
            let t = CompleteTree::new(n).unwrap();
            let trace = interleave_bound(&xs, n).unwrap();
            prop_assert_eq!(trace.total, trace.per_access_increment.iter().sum::<u64>());
            prop_assert_eq!(trace.total, direct_interleave_bound(&xs, n).unwrap());
            prop_assert_eq!(trace.total, brute_ib(&xs, &t));
        }

        #[test]
        fn accessed_path_is_preferred(n in 1usize..200, raw in prop::collection::vec(any::<u32>(), 1..40)) {
            let mut m = ReferenceModel::new(n).unwrap();
            let mut prev = None;
            for r in raw {
                let k = r % n as u32 + 1;
                let rep = m.record_access(k).unwrap();
                if prev == Some(k) {
                    prop_assert_eq!(rep.updates(), 0);
                }
                prev = Some(k);
                let block = m.preferred_path_decomposition();
                let block = block.block_of(k).unwrap();
                for a in m.tree().path_to(k) {
                    prop_assert!(block.contains(&a));
                }
            }
        }

        #[test]
        fn tree_shape_is_left_complete(n in 1usize..300) {
            let t = CompleteTree::new(n).unwrap();
            let mut order = Vec::new();
            let mut stack = Vec::new();
            let mut cur = Some(t.root());
            while cur.is_some() || !stack.is_empty() {
                while let Some(c) = cur {
                    stack.push(c);
                    cur = t.left(c);
                }
                let k = stack.pop().unwrap();
                order.push(k);
                cur = t.right(k);
            }
            prop_assert_eq!(order, (1..=n as Key).collect::<Vec<_>>());
            for k in 1..=n as Key {
                prop_assert!(!(t.left(k).is_none() && t.right(k).is_some()));
                if let Some(p) = t.parent(k) {
                    prop_assert_eq!(t.depth(k), t.depth(p) + 1);
                }
            }
        }

        #[test]
        fn unified_matches_brute_force(n in 1usize..40, raw in prop::collection::vec(any::<u32>(), 1..40)) {
            let xs: Vec<Key> = raw.iter().map(|r| r % n as u32 + 1).collect();
            prop_assert_eq!(unified_bound(&xs, n).unwrap(), brute_unified(&xs, n));
        }
    }
}
