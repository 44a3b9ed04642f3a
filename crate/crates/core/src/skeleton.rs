//! Machinery shared by the two path-decomposition trees: per-node depth
//! augmentation, the boundary-recording search, bracket searches, and
//! unmetered validation against the reference tree.

use crate::cost_model::{Augment, Cursor, Direction, Key, Nodes, Side, Tree};
use crate::error::{Error, Result};
use crate::reference::{CompleteTree, Partition};

/// Depth bookkeeping carried by every node of a path-decomposition tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathInfo {
    /// Depth in the reference tree.
    pub d: u32,
    /// Minimum `d` over this node's auxiliary subtree.
    pub a: u32,
    /// Maximum `d` over this node's auxiliary subtree.
    pub b: u32,
    pub aux_root: bool,
    /// The reference-tree left child lies in this node's auxiliary tree.
    pub left_preferred: bool,
    /// The node has a left child in the reference tree.
    pub ref_has_left: bool,
}

impl PathInfo {
    pub fn singleton(d: u32, ref_has_left: bool) -> Self {
        PathInfo {
            d,
            a: d,
            b: d,
            aux_root: true,
            left_preferred: false,
            ref_has_left,
        }
    }
}

pub trait PathAug: Augment {
    fn fresh(d: u32, ref_has_left: bool) -> Self;
    fn path(&self) -> &PathInfo;
    fn path_mut(&mut self) -> &mut PathInfo;
    /// Colour as seen by black-height tracking; uncoloured trees report red.
    fn is_black(&self) -> bool {
        false
    }
}

impl PathAug for PathInfo {
    fn fresh(d: u32, ref_has_left: bool) -> Self {
        PathInfo::singleton(d, ref_has_left)
    }
    fn path(&self) -> &PathInfo {
        self
    }
    fn path_mut(&mut self) -> &mut PathInfo {
        self
    }
}

impl Augment for PathInfo {
    fn rotated(nodes: &mut Nodes<Self>, lifted: Key, lowered: Key) {
        on_rotation(nodes, lifted, lowered);
    }
}

fn span<A: PathAug>(own: &PathInfo, l: Option<&A>, r: Option<&A>) -> (u32, u32) {
    let mut a = own.d;
    let mut b = own.d;
    for c in [l, r].into_iter().flatten() {
        let c = c.path();
        if !c.aux_root {
            a = a.min(c.a);
            b = b.max(c.b);
        }
    }
    (a, b)
}

fn refresh<A: PathAug>(nodes: &mut Nodes<A>, key: Key) {
    let rec = nodes.get(key);
    let l = rec.left().map(|k| *nodes.aug(k));
    let r = rec.right().map(|k| *nodes.aug(k));
    let (a, b) = span(rec.aug.path(), l.as_ref(), r.as_ref());
    let p = nodes.aug_mut(key).path_mut();
    p.a = a;
    p.b = b;
}

/// Rotation hook: the auxiliary-root mark follows the top of the tree and
/// both rotated nodes recompute their depth span.
pub(crate) fn on_rotation<A: PathAug>(nodes: &mut Nodes<A>, lifted: Key, lowered: Key) {
    if nodes.aug(lowered).path().aux_root {
        nodes.aug_mut(lowered).path_mut().aux_root = false;
        nodes.aug_mut(lifted).path_mut().aux_root = true;
    }
    refresh(nodes, lowered);
    refresh(nodes, lifted);
}

pub(crate) fn pull<A: PathAug>(c: &mut Cursor<'_, A>) {
    c.pull(|me, l, r| {
        let (a, b) = span(me.path(), l, r);
        let p = me.path_mut();
        p.a = a;
        p.b = b;
    });
}

pub(crate) fn build<A: PathAug>(shape: &CompleteTree) -> Tree<A> {
    Tree::from_shape(shape, |k| A::fresh(shape.depth(k), shape.left(k).is_some()))
}

#[inline]
fn black_count<A: PathAug>(a: &A) -> u32 {
    a.is_black() as u32
}

/// An auxiliary tree entered during the search, with the least depth it
/// holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Crossing {
    pub key: Key,
    pub a: u32,
}

/// Walks from the root to `x`, recording every auxiliary tree entered. If
/// `x` has a reference-tree left child outside its own auxiliary tree, that
/// child's tree is found next to `x` and recorded last. Returns with the
/// cursor back at the global root.
pub(crate) fn search<A: PathAug>(c: &mut Cursor<'_, A>, x: Key) -> Result<Vec<Crossing>> {
    let mut crossings = Vec::new();
    while c.key() != x {
        let side = if x < c.key() { Side::Left } else { Side::Right };
        c.down(side)?;
        let p = c.aug().path();
        if p.aux_root {
            crossings.push(Crossing {
                key: c.key(),
                a: p.a,
            });
        }
    }
    let here = *c.aug().path();
    if here.ref_has_left && !here.left_preferred {
        c.down(Side::Left)?;
        while !c.aug().path().aux_root {
            c.down(Side::Right)?;
        }
        crossings.push(Crossing {
            key: c.key(),
            a: here.d + 1,
        });
    }
    while c.has(Direction::Parent) {
        c.up()?;
    }
    Ok(crossings)
}

/// Moves to the child on `side` if it belongs to the current piece.
/// `bh` is the black height of the current node; returns the child's.
pub(crate) fn step<A: PathAug>(c: &mut Cursor<'_, A>, side: Side, bh: u32) -> Result<Option<u32>> {
    if !c.has_child(side) {
        return Ok(None);
    }
    let below = bh - black_count(c.aug());
    c.down(side)?;
    if below == 0 && c.aug().path().aux_root {
        c.up()?;
        return Ok(None);
    }
    Ok(Some(below))
}

pub(crate) fn climb_to<A: PathAug>(c: &mut Cursor<'_, A>, key: Key) -> Result<()> {
    while c.key() != key {
        c.up()?;
    }
    Ok(())
}

pub(crate) fn climb_to_aux_root<A: PathAug>(c: &mut Cursor<'_, A>) -> Result<()> {
    while !c.aug().path().aux_root {
        c.up()?;
    }
    Ok(())
}

/// Where the cursor was left by [`find_left_bracket`].
pub(crate) enum LeftBracket {
    /// At the bracket, with its black height.
    Found(Key, u32),
    /// No shallow key precedes the deep range; cursor somewhere inside.
    Missing,
}

/// From an auxiliary root with black height `bh`, finds the largest key
/// preceding every node deeper than `dp`.
pub(crate) fn find_left_bracket<A: PathAug>(
    c: &mut Cursor<'_, A>,
    mut bh: u32,
    dp: u32,
) -> Result<LeftBracket> {
    let mut last_right: Option<(Key, u32)> = None;
    // locate the smallest deep key
    loop {
        // an all-deep subtree: the bracket is above it, if anywhere
        if c.aug().path().a > dp {
            return match last_right {
                Some((k, kb)) => {
                    climb_to(c, k)?;
                    Ok(LeftBracket::Found(k, kb))
                }
                None => Ok(LeftBracket::Missing),
            };
        }
        if let Some(cb) = step(c, Side::Left, bh)? {
            if c.aug().path().b > dp {
                bh = cb;
                continue;
            }
            c.up()?;
        }
        if c.aug().path().d > dp {
            break;
        }
        last_right = Some((c.key(), bh));
        bh = step(c, Side::Right, bh)?
            .ok_or_else(|| Error::Invariant("deep keys vanished".into()))?;
    }
    // its predecessor
    if let Some(cb) = step(c, Side::Left, bh)? {
        bh = cb;
        while let Some(cb) = step(c, Side::Right, bh)? {
            bh = cb;
        }
        return Ok(LeftBracket::Found(c.key(), bh));
    }
    match last_right {
        Some((k, kb)) => {
            climb_to(c, k)?;
            Ok(LeftBracket::Found(k, kb))
        }
        None => Ok(LeftBracket::Missing),
    }
}

/// From the root of a piece whose smallest keys are exactly the deep ones,
/// finds the first shallow key. Leaves the cursor there when it exists.
pub(crate) fn find_right_bracket<A: PathAug>(
    c: &mut Cursor<'_, A>,
    mut bh: u32,
    dp: u32,
) -> Result<Option<(Key, u32)>> {
    let mut cand = None;
    loop {
        // a deep subtree with no shallow keys ends the search here
        if c.aug().path().a > dp {
            break;
        }
        let side = if c.aug().path().d > dp {
            Side::Right
        } else {
            cand = Some((c.key(), bh));
            Side::Left
        };
        match step(c, side, bh)? {
            Some(cb) => bh = cb,
            None => break,
        }
    }
    if let Some((k, _)) = cand {
        climb_to(c, k)?;
    }
    Ok(cand)
}

/// A key with its black height.
type Bracket = (Key, u32);

/// From an auxiliary root, searches toward `v` (a key of a hanging tree)
/// and returns the nearest keys on either side of the gap holding it.
/// Leaves the cursor at the last node visited, which is one of the two.
pub(crate) fn locate_gap<A: PathAug>(
    c: &mut Cursor<'_, A>,
    mut bh: u32,
    v: Key,
) -> Result<(Option<Bracket>, Option<Bracket>)> {
    let mut l = None;
    let mut r = None;
    loop {
        let here = (c.key(), bh);
        let side = if v < c.key() {
            r = Some(here);
            Side::Left
        } else {
            l = Some(here);
            Side::Right
        };
        match step(c, side, bh)? {
            Some(cb) => bh = cb,
            None => break,
        }
    }
    Ok((l, r))
}

pub(crate) fn note_left_join<A: PathAug>(c: &mut Cursor<'_, A>, a: u32) {
    let p = c.aug_mut().path_mut();
    if p.d + 1 == a {
        p.left_preferred = true;
    }
}

pub(crate) fn note_left_cut<A: PathAug>(c: &mut Cursor<'_, A>, dp: u32) {
    let p = c.aug_mut().path_mut();
    if p.d == dp {
        p.left_preferred = false;
    }
}

/// For each key, the root of its auxiliary tree.
pub(crate) fn owners<A: PathAug>(tree: &Tree<A>) -> Vec<Key> {
    let view = tree.inspect();
    let mut owner = vec![0; view.len() + 1];
    let Some(root) = view.root() else {
        return owner;
    };
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        let rec = view.node(k);
        owner[k as usize] = if rec.aug.path().aux_root {
            k
        } else {
            owner[rec.parent().expect("unmarked root") as usize]
        };
        stack.extend(rec.left());
        stack.extend(rec.right());
    }
    owner
}

pub(crate) fn partition<A: PathAug>(tree: &Tree<A>) -> Partition {
    let owner = owners(tree);
    let mut blocks: Vec<Vec<Key>> = vec![Vec::new(); owner.len()];
    for k in 1..owner.len() {
        blocks[owner[k] as usize].push(k as Key);
    }
    Partition::new(blocks.into_iter().filter(|b| !b.is_empty()).collect())
}

/// Unmetered check of everything the path skeleton promises: BST order,
/// depth labels, spans, that every auxiliary tree is one reference path,
/// and the left-preference bits.
pub(crate) fn validate<A: PathAug>(tree: &Tree<A>, shape: &CompleteTree) -> Result<()> {
    let view = tree.inspect();
    view.check_bst()?;
    let root = view.root().ok_or(Error::EmptyTree)?;
    if !view.node(root).aug.path().aux_root {
        return Err(Error::Invariant(
            "global root is not an auxiliary root".into(),
        ));
    }
    let n = view.len();
    for k in 1..=n as Key {
        let p = view.node(k).aug.path();
        if p.d != shape.depth(k) || p.ref_has_left != shape.left(k).is_some() {
            return Err(Error::Invariant(format!("static labels of {k} are wrong")));
        }
    }
    // spans, children before parents
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        order.push(k);
        let rec = view.node(k);
        stack.extend(rec.left());
        stack.extend(rec.right());
    }
    let mut span_of = vec![(0u32, 0u32); n + 1];
    for &k in order.iter().rev() {
        let rec = view.node(k);
        let p = rec.aug.path();
        let (mut a, mut b) = (p.d, p.d);
        for c in [rec.left(), rec.right()].into_iter().flatten() {
            if !view.node(c).aug.path().aux_root {
                a = a.min(span_of[c as usize].0);
                b = b.max(span_of[c as usize].1);
            }
        }
        span_of[k as usize] = (a, b);
        if (p.a, p.b) != (a, b) {
            return Err(Error::Invariant(format!(
                "span of {k} is ({}, {}), expected ({a}, {b})",
                p.a, p.b
            )));
        }
    }
    let owner = owners(tree);
    for block in partition(tree).blocks() {
        let mut by_depth: Vec<Key> = block.clone();
        by_depth.sort_unstable_by_key(|&k| shape.depth(k));
        for w in by_depth.windows(2) {
            if shape.parent(w[1]) != Some(w[0]) {
                return Err(Error::Invariant(format!(
                    "auxiliary tree {block:?} is not a reference path"
                )));
            }
        }
    }
    for k in 1..=n as Key {
        let want = shape
            .left(k)
            .is_some_and(|l| owner[l as usize] == owner[k as usize]);
        if view.node(k).aug.path().left_preferred != want {
            return Err(Error::Invariant(format!("left preference of {k} is stale")));
        }
    }
    Ok(())
}
