//! Unit-cost pointer machine shared by every tree in the lab.
//!
//! Nodes live in an arena indexed by key: keys are `1..=n` and slot 0 stands
//! for the null link. Links can only change through a [`Cursor`], which
//! charges one unit per link followed and one unit per rotation, plus one unit
//! for placing the cursor at the root when an access begins. Reading the
//! current node, peeking at its parent record, and rewriting augmentation
//! fields are free.

use std::ops::Sub;

use crate::error::{Error, Result};
use crate::reference::CompleteTree;

/// A key of the fixed universe `1..=n`. Node ids coincide with keys.
pub type Key = u32;

const NIL: u32 = 0;

/// Counters for the three chargeable events of the model.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CostMeter {
    pub access_inits: u64,
    pub link_follows: u64,
    pub rotations: u64,
}

impl CostMeter {
    pub fn total(&self) -> u64 {
        self.access_inits + self.link_follows + self.rotations
    }
}

impl Sub for CostMeter {
    type Output = CostMeter;

    fn sub(self, rhs: CostMeter) -> CostMeter {
        CostMeter {
            access_inits: self.access_inits - rhs.access_inits,
            link_follows: self.link_follows - rhs.link_follows,
            rotations: self.rotations - rhs.rotations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    #[inline]
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Parent,
    Left,
    Right,
}

impl From<Side> for Direction {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => Direction::Left,
            Side::Right => Direction::Right,
        }
    }
}

/// One node: key, links, and the owning structure's augmentation.
#[derive(Debug, Clone)]
pub struct NodeRecord<A> {
    key: Key,
    parent: u32,
    left: u32,
    right: u32,
    pub aug: A,
}

#[inline]
fn link(id: u32) -> Option<Key> {
    (id != NIL).then_some(id)
}

impl<A> NodeRecord<A> {
    pub fn key(&self) -> Key {
        self.key
    }
    pub fn parent(&self) -> Option<Key> {
        link(self.parent)
    }
    pub fn left(&self) -> Option<Key> {
        link(self.left)
    }
    pub fn right(&self) -> Option<Key> {
        link(self.right)
    }
    pub fn child(&self, side: Side) -> Option<Key> {
        match side {
            Side::Left => self.left(),
            Side::Right => self.right(),
        }
    }
}

/// Read access to the arena, plus free augmentation writes. Handed to
/// [`Augment::rotated`] so structures can repair their payloads.
#[derive(Debug, Clone)]
pub struct Nodes<A> {
    slots: Vec<NodeRecord<A>>,
}

impl<A> Nodes<A> {
    #[inline]
    pub fn get(&self, key: Key) -> &NodeRecord<A> {
        &self.slots[key as usize]
    }
    #[inline]
    pub fn aug(&self, key: Key) -> &A {
        &self.slots[key as usize].aug
    }
    #[inline]
    pub fn aug_mut(&mut self, key: Key) -> &mut A {
        &mut self.slots[key as usize].aug
    }
    pub fn len(&self) -> usize {
        self.slots.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-structure payload maintenance. Rotations call [`Augment::rotated`]
/// after relinking; the call is free under the model.
pub trait Augment: Copy {
    fn rotated(_nodes: &mut Nodes<Self>, _lifted: Key, _lowered: Key) {}
}

impl Augment for () {}

/// A locked binary search tree over `1..=n` with its cost meter.
#[derive(Debug, Clone)]
pub struct Tree<A> {
    nodes: Nodes<A>,
    root: u32,
    meter: CostMeter,
}

impl<A: Augment> Tree<A> {
    /// Lays the tree out in the shape of the reference tree. Construction
    /// happens before locking and is not metered.
    pub fn from_shape(shape: &CompleteTree, mut init: impl FnMut(Key) -> A) -> Self {
        let n = shape.n();
        let mut slots = Vec::with_capacity(n + 1);
        slots.push(NodeRecord {
            key: 0,
            parent: NIL,
            left: NIL,
            right: NIL,
            aug: init_dummy(&mut init),
        });
        for k in 1..=n as Key {
            slots.push(NodeRecord {
                key: k,
                parent: shape.parent(k).unwrap_or(NIL),
                left: shape.left(k).unwrap_or(NIL),
                right: shape.right(k).unwrap_or(NIL),
                aug: init(k),
            });
        }
        Tree {
            nodes: Nodes { slots },
            root: shape.root(),
            meter: CostMeter::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn meter(&self) -> CostMeter {
        self.meter
    }

    /// Places a fresh cursor at the root, charging the initialization.
    pub fn begin_access(&mut self) -> Result<Cursor<'_, A>> {
        if self.root == NIL {
            return Err(Error::EmptyTree);
        }
        self.meter.access_inits += 1;
        let at = self.root;
        Ok(Cursor { tree: self, at })
    }

    /// Cursor at the root for restructuring outside an access. Moves and
    /// rotations are still charged; no access is counted.
    pub(crate) fn maintenance_cursor(&mut self) -> Result<Cursor<'_, A>> {
        if self.root == NIL {
            return Err(Error::EmptyTree);
        }
        let at = self.root;
        Ok(Cursor { tree: self, at })
    }

    /// Unmetered read-only walker for validation and tests. Access
    /// algorithms never go through it.
    pub fn inspect(&self) -> Inspector<'_, A> {
        Inspector { tree: self }
    }
}

// slot 0 needs some payload; borrow the constructor for key 1
fn init_dummy<A>(init: &mut impl FnMut(Key) -> A) -> A {
    init(1)
}

/// The single access pointer of the model.
pub struct Cursor<'t, A: Augment> {
    tree: &'t mut Tree<A>,
    at: u32,
}

impl<'t, A: Augment> Cursor<'t, A> {
    #[inline]
    fn rec(&self) -> &NodeRecord<A> {
        &self.tree.nodes.slots[self.at as usize]
    }

    #[inline]
    pub fn key(&self) -> Key {
        self.at
    }

    #[inline]
    pub fn aug(&self) -> &A {
        &self.rec().aug
    }

    #[inline]
    pub fn aug_mut(&mut self) -> &mut A {
        &mut self.tree.nodes.slots[self.at as usize].aug
    }

    #[inline]
    pub fn has(&self, dir: Direction) -> bool {
        let r = self.rec();
        match dir {
            Direction::Parent => r.parent != NIL,
            Direction::Left => r.left != NIL,
            Direction::Right => r.right != NIL,
        }
    }

    #[inline]
    pub fn has_child(&self, side: Side) -> bool {
        self.has(side.into())
    }

    /// Which child of its parent the current node is.
    #[inline]
    pub fn side(&self) -> Option<Side> {
        let r = self.rec();
        if r.parent == NIL {
            return None;
        }
        if self.tree.nodes.slots[r.parent as usize].left == self.at {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    /// Free look at the parent's record.
    #[inline]
    pub fn parent(&self) -> Option<&NodeRecord<A>> {
        let p = self.rec().parent;
        (p != NIL).then(|| &self.tree.nodes.slots[p as usize])
    }

    /// Recomputes the current node's payload from its children's payloads.
    #[inline]
    pub fn pull(&mut self, f: impl FnOnce(&mut A, Option<&A>, Option<&A>)) {
        let r = self.rec();
        let slots = &self.tree.nodes.slots;
        let l = (r.left != NIL).then(|| slots[r.left as usize].aug);
        let rt = (r.right != NIL).then(|| slots[r.right as usize].aug);
        f(self.aug_mut(), l.as_ref(), rt.as_ref());
    }

    /// Follows one link (unit cost).
    #[inline]
    pub fn go(&mut self, dir: Direction) -> Result<()> {
        let r = self.rec();
        let next = match dir {
            Direction::Parent => r.parent,
            Direction::Left => r.left,
            Direction::Right => r.right,
        };
        if next == NIL {
            return Err(Error::NullLink);
        }
        self.tree.meter.link_follows += 1;
        self.at = next;
        Ok(())
    }

    #[inline]
    pub fn down(&mut self, side: Side) -> Result<()> {
        self.go(side.into())
    }

    #[inline]
    pub fn up(&mut self) -> Result<()> {
        self.go(Direction::Parent)
    }

    /// Single rotation lifting the current node above its parent (unit
    /// cost). The cursor stays on the lifted node.
    #[inline]
    pub fn rotate_up(&mut self) -> Result<()> {
        if self.rec().parent == NIL {
            return Err(Error::RotateRoot);
        }
        self.tree.rotate(self.at);
        Ok(())
    }

    /// Rotation lifting the parent above the grandparent while the cursor
    /// stays put: the first half of a zig-zig step (unit cost).
    #[inline]
    pub fn rotate_parent_up(&mut self) -> Result<()> {
        let p = self.rec().parent;
        if p == NIL {
            return Err(Error::NullLink);
        }
        if self.tree.nodes.slots[p as usize].parent == NIL {
            return Err(Error::RotateRoot);
        }
        self.tree.rotate(p);
        Ok(())
    }

    pub fn meter(&self) -> CostMeter {
        self.tree.meter
    }
}

impl<A: Augment> Tree<A> {
    fn rotate(&mut self, x: u32) {
        let s = &mut self.nodes.slots;
        let p = s[x as usize].parent;
        let g = s[p as usize].parent;
        if s[p as usize].left == x {
            let b = s[x as usize].right;
            s[p as usize].left = b;
            if b != NIL {
                s[b as usize].parent = p;
            }
            s[x as usize].right = p;
        } else {
            let b = s[x as usize].left;
            s[p as usize].right = b;
            if b != NIL {
                s[b as usize].parent = p;
            }
            s[x as usize].left = p;
        }
        s[p as usize].parent = x;
        s[x as usize].parent = g;
        if g == NIL {
            self.root = x;
        } else if s[g as usize].left == p {
            s[g as usize].left = x;
        } else {
            s[g as usize].right = x;
        }
        self.meter.rotations += 1;
        A::rotated(&mut self.nodes, x, p);
    }
}

/// Unmetered read-only view of a tree.
pub struct Inspector<'t, A> {
    tree: &'t Tree<A>,
}

impl<'t, A> Inspector<'t, A> {
    pub fn root(&self) -> Option<Key> {
        link(self.tree.root)
    }

    pub fn node(&self, key: Key) -> &NodeRecord<A> {
        self.tree.nodes.get(key)
    }

    pub fn len(&self) -> usize {
        self.tree.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.nodes.is_empty()
    }

    /// Keys in symmetric order.
    pub fn in_order(&self) -> Vec<Key> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.tree.root;
        while cur != NIL || !stack.is_empty() {
            while cur != NIL {
                stack.push(cur);
                cur = self.tree.nodes.slots[cur as usize].left;
            }
            let k = stack.pop().expect("non-empty");
            out.push(k);
            cur = self.tree.nodes.slots[k as usize].right;
        }
        out
    }

    /// Depth of `key` counted in edges from the root.
    pub fn depth(&self, key: Key) -> usize {
        let mut d = 0;
        let mut cur = self.tree.nodes.get(key).parent;
        while cur != NIL {
            d += 1;
            cur = self.tree.nodes.slots[cur as usize].parent;
        }
        d
    }

    /// Checks parent/child symmetry and that the in-order walk is `1..=n`.
    pub fn check_bst(&self) -> Result<()> {
        let s = &self.tree.nodes.slots;
        if self.tree.root != NIL && s[self.tree.root as usize].parent != NIL {
            return Err(Error::Invariant("root has a parent".into()));
        }
        for k in 1..s.len() {
            let r = &s[k];
            for c in [r.left, r.right] {
                if c != NIL && s[c as usize].parent != k as u32 {
                    return Err(Error::Invariant(format!(
                        "child {c} of {k} does not point back"
                    )));
                }
            }
            if r.parent != NIL {
                let p = &s[r.parent as usize];
                if p.left != k as u32 && p.right != k as u32 {
                    return Err(Error::Invariant(format!("parent of {k} does not own it")));
                }
            }
        }
        let order = self.in_order();
        if order.len() != self.len() || order.iter().enumerate().any(|(i, &k)| k != i as Key + 1) {
            return Err(Error::Invariant("in-order walk is not 1..=n".into()));
        }
        Ok(())
    }
}
