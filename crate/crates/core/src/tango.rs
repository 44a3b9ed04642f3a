//! Tango tree: every preferred path of the reference tree is a red-black
//! auxiliary tree, and the auxiliary trees hang together as one BST.
//!
//! Cuts and joins are red-black split and concatenate built from single
//! rotations. Black heights are known at auxiliary roots (`rank`) and
//! tracked downward from there during each search.

use crate::cost_model::{Augment, CostMeter, Cursor, Key, Nodes, Side, Tree};
use crate::error::{Error, Result};
use crate::reference::{CompleteTree, Partition};
use crate::skeleton::{self, LeftBracket, PathAug, PathInfo};
use crate::structure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TangoAug {
    pub path: PathInfo,
    pub black: bool,
    /// Black height of the auxiliary tree; meaningful only at its root.
    pub rank: u32,
}

impl PathAug for TangoAug {
    fn fresh(d: u32, ref_has_left: bool) -> Self {
        TangoAug {
            path: PathInfo::singleton(d, ref_has_left),
            black: true,
            rank: 1,
        }
    }
    fn path(&self) -> &PathInfo {
        &self.path
    }
    fn path_mut(&mut self) -> &mut PathInfo {
        &mut self.path
    }
    fn is_black(&self) -> bool {
        self.black
    }
}

impl Augment for TangoAug {
    fn rotated(nodes: &mut Nodes<Self>, lifted: Key, lowered: Key) {
        if nodes.aug(lowered).path.aux_root {
            nodes.aug_mut(lifted).rank = nodes.aug(lowered).rank;
        }
        skeleton::on_rotation(nodes, lifted, lowered);
    }
}

type C<'a, 't> = &'a mut Cursor<'t, TangoAug>;

/// One side of a pending concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    /// Nothing, or only a hanging auxiliary tree.
    Empty,
    /// A red-black subtree of the stated black height.
    Internal(u32),
    /// A hanging auxiliary tree to be merged in.
    Absorb,
}

pub struct TangoTree {
    shape: CompleteTree,
    tree: Tree<TangoAug>,
}

impl TangoTree {
    /// Locks a tree shaped like the reference tree, every node its own
    /// auxiliary tree.
    pub fn new(n: usize) -> Result<Self> {
        let shape = CompleteTree::new(n)?;
        let tree = skeleton::build(&shape);
        Ok(TangoTree { shape, tree })
    }

    pub fn tree(&self) -> &Tree<TangoAug> {
        &self.tree
    }

    pub fn access(&mut self, key: Key) -> Result<u64> {
        self.shape.check_key(key)?;
        let before = self.tree.meter();
        let mut c = self.tree.begin_access()?;
        let crossings = skeleton::search(&mut c, key)?;
        for x in crossings {
            let dp = x.a - 1;
            if c.aug().path.b > dp {
                cut(&mut c, dp)?;
            }
            join_child(&mut c, x.key, x.a)?;
        }
        Ok((self.tree.meter() - before).total())
    }

    /// Detaches every node deeper than `dp` from the global root's auxiliary
    /// tree. The detached nodes become their own auxiliary tree.
    pub fn cut(&mut self, dp: u32) -> Result<()> {
        let mut c = self.tree.maintenance_cursor()?;
        if c.aug().path.b <= dp {
            return Err(Error::NothingToCut);
        }
        cut(&mut c, dp)
    }

    /// Merges the auxiliary tree rooted at `v` into the global root's.
    pub fn join(&mut self, v: Key) -> Result<()> {
        self.shape.check_key(v)?;
        let a = {
            let view = self.tree.inspect();
            let p = view.node(v).aug.path;
            if !p.aux_root || view.root() == Some(v) {
                return Err(Error::BadJoin);
            }
            p.a
        };
        let mut c = self.tree.maintenance_cursor()?;
        join_child(&mut c, v, a)
    }

    /// Red-black validity of every auxiliary tree, unmetered.
    pub fn check_red_black(&self) -> Result<()> {
        let view = self.tree.inspect();
        let n = view.len();
        let mut height = vec![0u32; n + 1];
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<Key> = view.root().into_iter().collect();
        while let Some(k) = stack.pop() {
            order.push(k);
            let rec = view.node(k);
            stack.extend(rec.left());
            stack.extend(rec.right());
        }
        let inner = |c: Option<Key>| c.filter(|&c| !view.node(c).aug.path.aux_root);
        for &k in order.iter().rev() {
            let rec = view.node(k);
            let (l, r) = (inner(rec.left()), inner(rec.right()));
            let hl = l.map_or(0, |c| height[c as usize]);
            let hr = r.map_or(0, |c| height[c as usize]);
            if hl != hr {
                return Err(Error::Invariant(format!(
                    "black heights differ below {k}: {hl} vs {hr}"
                )));
            }
            if !rec.aug.black
                && [l, r]
                    .into_iter()
                    .flatten()
                    .any(|c| !view.node(c).aug.black)
            {
                return Err(Error::Invariant(format!("red node {k} has a red child")));
            }
            height[k as usize] = hl + rec.aug.black as u32;
            if rec.aug.path.aux_root {
                if !rec.aug.black {
                    return Err(Error::Invariant(format!("auxiliary root {k} is red")));
                }
                if rec.aug.rank != height[k as usize] {
                    return Err(Error::Invariant(format!(
                        "rank of {k} is {}, black height is {}",
                        rec.aug.rank, height[k as usize]
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Structure for TangoTree {
    fn n(&self) -> usize {
        self.shape.n()
    }

    fn access(&mut self, key: Key) -> Result<u64> {
        TangoTree::access(self, key)
    }

    fn meter(&self) -> CostMeter {
        self.tree.meter()
    }

    fn validate(&self) -> Result<()> {
        skeleton::validate(&self.tree, &self.shape)?;
        self.check_red_black()
    }

    fn aux_partition(&self) -> Option<Partition> {
        Some(skeleton::partition(&self.tree))
    }
}

#[inline]
fn bc(black: bool) -> u32 {
    black as u32
}

fn is_top(c: &Cursor<'_, TangoAug>, boundary: Option<Key>) -> bool {
    if c.aug().path.aux_root {
        return true;
    }
    match c.parent() {
        None => true,
        Some(p) => Some(p.key()) == boundary,
    }
}

fn classify(c: C, side: Side, bh: u32) -> Result<Piece> {
    if !c.has_child(side) {
        return Ok(Piece::Empty);
    }
    if bh > 0 {
        return Ok(Piece::Internal(bh));
    }
    c.down(side)?;
    let hanging = c.aug().path.aux_root;
    c.up()?;
    Ok(if hanging {
        Piece::Empty
    } else {
        Piece::Internal(0)
    })
}

/// Lifts the cursor's node to the top of its piece. On the way up the
/// subtrees it passes are concatenated into two pieces, returned as the
/// node's new left and right sides. `bh` is the node's black height where
/// it started.
fn split_to_top(c: C, bh: u32, boundary: Option<Key>) -> Result<(Piece, Piece)> {
    let below = bh - bc(c.aug().black);
    let mut left = classify(c, Side::Left, below)?;
    let mut right = classify(c, Side::Right, below)?;
    let mut sibling = bh;
    while !is_top(c, boundary) {
        let x = c.key();
        let (p, p_black) = {
            let p = c.parent().expect("not top");
            (p.key(), p.aug.black)
        };
        let side = if x < p { Side::Left } else { Side::Right };
        c.rotate_up()?;
        c.down(side.opposite())?;
        let s = classify(c, side.opposite(), sibling)?;
        match side {
            Side::Left => right = Piece::Internal(join(c, Some(x), right, s)?),
            Side::Right => left = Piece::Internal(join(c, Some(x), s, left)?),
        }
        c.up()?;
        sibling += bc(p_black);
    }
    Ok((left, right))
}

fn absorb(c: C, side: Side, piece: Piece) -> Result<Option<u32>> {
    match piece {
        Piece::Empty => Ok(None),
        Piece::Internal(h) => Ok(Some(h)),
        Piece::Absorb => {
            c.down(side)?;
            let me = c.aug_mut();
            me.path.aux_root = false;
            let h = me.rank;
            c.up()?;
            Ok(Some(h))
        }
    }
}

/// Concatenates the two sides of the cursor's node, which sits at the top
/// of its piece, into one red-black tree with the node in between. Returns
/// the black height; the cursor ends at the new top.
fn join(c: C, boundary: Option<Key>, left: Piece, right: Piece) -> Result<u32> {
    let l = absorb(c, Side::Left, left)?;
    let r = absorb(c, Side::Right, right)?;
    skeleton::pull(c);
    let mut hl = l.unwrap_or(0);
    let mut hr = r.unwrap_or(0);
    if hl != hr {
        let (short, present) = if hl < hr {
            (Side::Left, l.is_some())
        } else {
            (Side::Right, r.is_some())
        };
        if present {
            c.down(short)?;
            if !c.aug().black {
                c.aug_mut().black = true;
                match short {
                    Side::Left => hl += 1,
                    Side::Right => hr += 1,
                }
            }
            c.up()?;
        }
    }
    let bh = if hl == hr {
        c.aug_mut().black = true;
        hl + 1
    } else {
        let (tall, hs, ht) = if hl > hr {
            (Side::Left, hr, hl)
        } else {
            (Side::Right, hl, hr)
        };
        sink(c, tall, hs, ht)?;
        ht + insert_fixup(c, boundary)?
    };
    if c.aug().path.aux_root {
        c.aug_mut().rank = bh;
    }
    Ok(bh)
}

/// Rotates the cursor's node down the inner spine of its `tall` side until
/// the subtree beside it has black height `hs` and a black root.
fn sink(c: C, tall: Side, hs: u32, ht: u32) -> Result<()> {
    let inward = tall.opposite();
    let mut cur = ht;
    loop {
        if cur == hs {
            if !c.has_child(tall) {
                break;
            }
            c.down(tall)?;
            let me = c.aug();
            if me.path.aux_root || me.black {
                c.up()?;
                break;
            }
        } else {
            c.down(tall)?;
        }
        let black = c.aug().black;
        c.rotate_up()?;
        c.down(inward)?;
        cur -= bc(black);
    }
    c.aug_mut().black = false;
    Ok(())
}

/// Repairs a red-red edge above the cursor's red node and climbs to the top
/// of the piece, which is left black. Returns 1 if that raised the black
/// height.
fn insert_fixup(c: C, boundary: Option<Key>) -> Result<u32> {
    loop {
        if is_top(c, boundary) {
            break;
        }
        let x = c.key();
        let (p, p_black) = {
            let p = c.parent().expect("not top");
            (p.key(), p.aug.black)
        };
        if p_black {
            break;
        }
        c.up()?;
        if is_top(c, boundary) {
            break;
        }
        let g = c.parent().expect("not top").key();
        let p_side = if p < g { Side::Left } else { Side::Right };
        c.up()?;
        let u_side = p_side.opposite();
        let uncle_red = if c.has_child(u_side) {
            c.down(u_side)?;
            let me = c.aug_mut();
            let red = !me.black && !me.path.aux_root;
            if red {
                me.black = true;
            }
            c.up()?;
            red
        } else {
            false
        };
        c.aug_mut().black = false;
        if uncle_red {
            c.down(p_side)?;
            c.aug_mut().black = true;
            c.up()?;
            continue;
        }
        c.down(p_side)?;
        let x_side = if x < p { Side::Left } else { Side::Right };
        if x_side != p_side {
            c.down(x_side)?;
            c.rotate_up()?;
        }
        c.rotate_up()?;
        c.aug_mut().black = true;
        break;
    }
    while !is_top(c, boundary) {
        c.up()?;
        skeleton::pull(c);
    }
    if c.aug().black {
        Ok(0)
    } else {
        c.aug_mut().black = true;
        Ok(1)
    }
}

/// Marks the child on `side` as a new auxiliary root.
fn detach(c: C, side: Side, piece: Piece) -> Result<()> {
    let Piece::Internal(mut h) = piece else {
        return Err(Error::Invariant("deep range is empty".into()));
    };
    c.down(side)?;
    let me = c.aug_mut();
    if !me.black {
        me.black = true;
        h += 1;
    }
    me.path.aux_root = true;
    me.rank = h;
    c.up()?;
    skeleton::pull(c);
    Ok(())
}

fn cut(c: C, dp: u32) -> Result<()> {
    let rank = c.aug().rank;
    match skeleton::find_left_bracket(c, rank, dp)? {
        LeftBracket::Found(l, bh) => {
            let (a, b) = split_to_top(c, bh, None)?;
            let Piece::Internal(hb) = b else {
                return Err(Error::Invariant("deep range is empty".into()));
            };
            c.down(Side::Right)?;
            match skeleton::find_right_bracket(c, hb, dp)? {
                Some((_, rb)) => {
                    let (d, e) = split_to_top(c, rb, Some(l))?;
                    detach(c, Side::Left, d)?;
                    skeleton::note_left_cut(c, dp);
                    let hb = join(c, Some(l), Piece::Empty, e)?;
                    c.up()?;
                    join(c, None, a, Piece::Internal(hb))?;
                }
                None => {
                    skeleton::climb_to(c, l)?;
                    detach(c, Side::Right, b)?;
                    join(c, None, a, Piece::Empty)?;
                }
            }
        }
        LeftBracket::Missing => {
            skeleton::climb_to_aux_root(c)?;
            let rank = c.aug().rank;
            let (_, rb) = skeleton::find_right_bracket(c, rank, dp)?.ok_or(Error::NothingToKeep)?;
            let (d, e) = split_to_top(c, rb, None)?;
            detach(c, Side::Left, d)?;
            skeleton::note_left_cut(c, dp);
            join(c, None, Piece::Empty, e)?;
        }
    }
    Ok(())
}

fn join_child(c: C, v: Key, a: u32) -> Result<()> {
    if c.aug().path.b + 1 != a {
        return Err(Error::BadJoin);
    }
    let rank = c.aug().rank;
    let (l, r) = skeleton::locate_gap(c, rank, v)?;
    match (l, r) {
        (Some((lk, lb)), _) => {
            skeleton::climb_to(c, lk)?;
            let (left, right) = split_to_top(c, lb, None)?;
            match right {
                Piece::Internal(mut bh) => {
                    c.down(Side::Right)?;
                    while let Some(cb) = skeleton::step(c, Side::Left, bh)? {
                        bh = cb;
                    }
                    let (_, e) = split_to_top(c, bh, Some(lk))?;
                    skeleton::note_left_join(c, a);
                    let hb = join(c, Some(lk), Piece::Absorb, e)?;
                    c.up()?;
                    join(c, None, left, Piece::Internal(hb))?;
                }
                _ => {
                    join(c, None, left, Piece::Absorb)?;
                }
            }
        }
        (None, Some((_, rb))) => {
            let (_, e) = split_to_top(c, rb, None)?;
            skeleton::note_left_join(c, a);
            join(c, None, Piece::Absorb, e)?;
        }
        (None, None) => return Err(Error::BadJoin),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::ReferenceModel;
    use proptest::prelude::*;

    fn block(t: &TangoTree, k: Key) -> Vec<Key> {
        t.aux_partition().unwrap().block_of(k).unwrap().to_vec()
    }

    #[test]
    fn lock_state() {
        let t = TangoTree::new(3).unwrap();
        assert_eq!(t.tree.inspect().root(), Some(2));
        assert_eq!(t.aux_partition().unwrap().blocks().len(), 3);
        let t = TangoTree::new(15).unwrap();
        let v = t.tree.inspect();
        assert_eq!(v.node(8).aug.path.d, 0);
        assert_eq!(v.node(4).aug.path.d, 1);
        assert_eq!(v.node(12).aug.path.d, 1);
        for k in 1..=15 {
            let p = v.node(k).aug.path;
            assert!(p.a == p.d && p.b == p.d && p.aux_root);
            assert!(v.node(k).aug.black);
        }
        t.validate().unwrap();
        assert_eq!(t.meter().total(), 0);
    }

    #[test]
    fn single_key() {
        let mut t = TangoTree::new(1).unwrap();
        assert_eq!(t.access(1).unwrap(), 1);
        assert_eq!(t.access(1).unwrap(), 1);
    }

    #[test]
    fn first_access_joins_root_path() {
        let mut t = TangoTree::new(7).unwrap();
        t.access(1).unwrap();
        t.validate().unwrap();
        let expect = Partition::new(vec![vec![4, 2, 1], vec![3], vec![5], vec![6], vec![7]]);
        assert_eq!(t.aux_partition().unwrap(), expect);
    }

    #[test]
    fn fig2_partition() {
        let mut t = TangoTree::new(15).unwrap();
        for k in [1, 15, 9, 5] {
            t.access(k).unwrap();
            t.validate().unwrap();
        }
        let expect = Partition::new(vec![
            vec![8, 4, 6, 5],
            vec![2, 1],
            vec![3],
            vec![7],
            vec![12, 10, 9],
            vec![11],
            vec![14, 15],
            vec![13],
        ]);
        assert_eq!(t.aux_partition().unwrap(), expect);
    }

    #[test]
    fn cut_top_of_short_path() {
        let mut t = TangoTree::new(7).unwrap();
        t.access(1).unwrap();
        t.cut(0).unwrap();
        t.validate().unwrap();
        assert_eq!(block(&t, 4), vec![4]);
        assert_eq!(block(&t, 1), vec![1, 2]);
    }

    #[test]
    fn cut_fig2_path() {
        let mut t = TangoTree::new(15).unwrap();
        t.access(5).unwrap();
        assert_eq!(block(&t, 8), vec![4, 5, 6, 8]);
        t.cut(1).unwrap();
        t.validate().unwrap();
        assert_eq!(block(&t, 8), vec![4, 8]);
        assert_eq!(block(&t, 5), vec![5, 6]);
    }

    #[test]
    fn cut_needs_deeper_nodes() {
        let mut t = TangoTree::new(7).unwrap();
        assert_eq!(t.cut(0), Err(Error::NothingToCut));
        assert_eq!(t.cut(5), Err(Error::NothingToCut));
    }

    #[test]
    fn join_inverts_cut() {
        let mut t = TangoTree::new(7).unwrap();
        t.access(1).unwrap();
        t.cut(0).unwrap();
        let top = t.tree.inspect().root().unwrap();
        let hanging = (1..=7).find(|&k| {
            k != top && block(&t, k) == vec![1, 2] && t.tree.inspect().node(k).aug.path.aux_root
        });
        t.join(hanging.unwrap()).unwrap();
        t.validate().unwrap();
        assert_eq!(block(&t, 4), vec![1, 2, 4]);
    }

    #[test]
    fn join_two_singletons() {
        let mut t = TangoTree::new(3).unwrap();
        t.join(1).unwrap();
        t.validate().unwrap();
        assert_eq!(block(&t, 2), vec![1, 2]);
    }

    #[test]
    fn join_rejects_depth_gap() {
        let mut t = TangoTree::new(7).unwrap();
        assert_eq!(t.join(1), Err(Error::BadJoin));
        assert_eq!(t.join(4), Err(Error::BadJoin));
    }

    #[test]
    fn long_path_stays_balanced() {
        // a full root-to-leaf path of 16 nodes, then rebuilt from the other end
        let n = (1 << 16) - 1;
        let mut t = TangoTree::new(n).unwrap();
        t.access(1).unwrap();
        t.validate().unwrap();
        t.access(n as Key).unwrap();
        t.validate().unwrap();
        let root = t.tree.inspect().root().unwrap();
        assert_eq!(block(&t, root).len(), 16);
        // red-black height bound for 16 nodes
        let deepest = block(&t, root)
            .iter()
            .map(|&k| t.tree.inspect().depth(k))
            .max()
            .unwrap();
        assert!(deepest <= 2 * 5);
    }

    fn replay(n: usize, xs: &[Key]) -> std::result::Result<(), TestCaseError> {
        let mut t = TangoTree::new(n).unwrap();
        let mut m = ReferenceModel::new(n).unwrap();
        for &x in xs {
            let cost = t.access(x).unwrap();
            m.record_access(x).unwrap();
            prop_assert!(cost >= 1);
            t.validate()
                .map_err(|e| TestCaseError::fail(format!("{e} after {x}")))?;
            prop_assert_eq!(t.aux_partition().unwrap(), m.preferred_path_decomposition());
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn matches_reference_paths(n in 1usize..130, raw in prop::collection::vec(any::<u32>(), 1..60)) {
            let xs: Vec<Key> = raw.iter().map(|r| r % n as u32 + 1).collect();
            replay(n, &xs)?;
        }

        #[test]
        fn cut_then_join_restores_partition(h in 2u32..8, leaf in any::<u32>(), frac in 0.0f64..1.0) {
            let n = (1usize << h) - 1;
            let mut t = TangoTree::new(n).unwrap();
            let x = leaf % n as u32 + 1;
            t.access(x).unwrap();
            let before = t.aux_partition().unwrap();
            let b = t.tree.inspect().node(t.tree.inspect().root().unwrap()).aug.path.b;
            prop_assume!(b > 0);
            let dp = ((b as f64) * frac) as u32;
            t.cut(dp.min(b - 1)).unwrap();
            t.validate().unwrap();
            let v = t.tree.inspect();
            let root = v.root().unwrap();
            let hanging = (1..=n as Key)
                .find(|&k| k != root && v.node(k).aug.path.aux_root && v.node(k).aug.path.a == dp.min(b - 1) + 1
                    && before.block_of(k) == before.block_of(root))
                .unwrap();
            t.join(hanging).unwrap();
            t.validate().unwrap();
            prop_assert_eq!(t.aux_partition().unwrap(), before);
        }
    }
}
