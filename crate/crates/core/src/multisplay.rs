//! Multi-splay tree: the tango layout with splay trees as auxiliary trees.
//! Cuts and joins splay the bracketing keys to the top of their auxiliary
//! tree and flip one mark; the accessed key is then splayed to the root.

use crate::cost_model::{CostMeter, Cursor, Key, Side, Tree};
use crate::error::{Error, Result};
use crate::reference::{CompleteTree, Partition};
use crate::skeleton::{self, LeftBracket, PathInfo};
use crate::structure::Structure;

type C<'a, 't> = &'a mut Cursor<'t, PathInfo>;

pub struct MultiSplayTree {
    shape: CompleteTree,
    tree: Tree<PathInfo>,
}

impl MultiSplayTree {
    pub fn new(n: usize) -> Result<Self> {
        let shape = CompleteTree::new(n)?;
        let tree = skeleton::build(&shape);
        Ok(MultiSplayTree { shape, tree })
    }

    pub fn tree(&self) -> &Tree<PathInfo> {
        &self.tree
    }

    pub fn access(&mut self, key: Key) -> Result<u64> {
        self.shape.check_key(key)?;
        let before = self.tree.meter();
        let mut c = self.tree.begin_access()?;
        let crossings = skeleton::search(&mut c, key)?;
        for x in crossings {
            let dp = x.a - 1;
            if c.aug().b > dp {
                cut(&mut c, dp)?;
            }
            join_child(&mut c, x.key, x.a)?;
        }
        while c.key() != key {
            let side = if key < c.key() {
                Side::Left
            } else {
                Side::Right
            };
            c.down(side)?;
        }
        splay(&mut c, None)?;
        Ok((self.tree.meter() - before).total())
    }
}

impl Structure for MultiSplayTree {
    fn n(&self) -> usize {
        self.shape.n()
    }

    fn access(&mut self, key: Key) -> Result<u64> {
        MultiSplayTree::access(self, key)
    }

    fn meter(&self) -> CostMeter {
        self.tree.meter()
    }

    fn validate(&self) -> Result<()> {
        skeleton::validate(&self.tree, &self.shape)
    }

    fn aux_partition(&self) -> Option<Partition> {
        Some(skeleton::partition(&self.tree))
    }
}

/// Splays the cursor's node to the top of its auxiliary tree, or to just
/// below `stop`.
fn splay(c: C, stop: Option<Key>) -> Result<()> {
    loop {
        if c.aug().aux_root {
            return Ok(());
        }
        let (p, p_top, g) = {
            let p = c.parent().expect("unmarked node has a parent");
            if Some(p.key()) == stop {
                return Ok(());
            }
            let top = p.aug.aux_root || p.parent().is_some_and(|g| Some(g) == stop);
            (p.key(), top, p.parent())
        };
        if p_top {
            c.rotate_up()?;
            continue;
        }
        let g = g.expect("parent is not on top");
        let x = c.key();
        if (x < p) == (p < g) {
            c.rotate_parent_up()?;
        } else {
            c.rotate_up()?;
        }
        c.rotate_up()?;
    }
}

/// Marks the child on `side` as a new auxiliary root.
fn detach(c: C, side: Side) -> Result<()> {
    c.down(side)?;
    c.aug_mut().aux_root = true;
    c.up()?;
    skeleton::pull(c);
    Ok(())
}

fn absorb(c: C, side: Side) -> Result<()> {
    c.down(side)?;
    c.aug_mut().aux_root = false;
    c.up()?;
    skeleton::pull(c);
    Ok(())
}

fn cut(c: C, dp: u32) -> Result<()> {
    match skeleton::find_left_bracket(c, 0, dp)? {
        LeftBracket::Found(l, _) => {
            splay(c, None)?;
            c.down(Side::Right)?;
            match skeleton::find_right_bracket(c, 0, dp)? {
                Some(_) => {
                    splay(c, Some(l))?;
                    detach(c, Side::Left)?;
                    skeleton::note_left_cut(c, dp);
                    c.up()?;
                    skeleton::pull(c);
                }
                None => {
                    skeleton::climb_to(c, l)?;
                    detach(c, Side::Right)?;
                }
            }
        }
        LeftBracket::Missing => {
            skeleton::climb_to_aux_root(c)?;
            skeleton::find_right_bracket(c, 0, dp)?.ok_or(Error::NothingToKeep)?;
            splay(c, None)?;
            detach(c, Side::Left)?;
            skeleton::note_left_cut(c, dp);
        }
    }
    Ok(())
}

fn join_child(c: C, v: Key, a: u32) -> Result<()> {
    if c.aug().b + 1 != a {
        return Err(Error::BadJoin);
    }
    match skeleton::locate_gap(c, 0, v)? {
        (Some((l, _)), r) => {
            skeleton::climb_to(c, l)?;
            splay(c, None)?;
            if r.is_some() {
                c.down(Side::Right)?;
                while skeleton::step(c, Side::Left, 0)?.is_some() {}
                splay(c, Some(l))?;
                absorb(c, Side::Left)?;
                skeleton::note_left_join(c, a);
                c.up()?;
                skeleton::pull(c);
            } else {
                absorb(c, Side::Right)?;
            }
        }
        (None, Some(_)) => {
            splay(c, None)?;
            absorb(c, Side::Left)?;
            skeleton::note_left_join(c, a);
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

    #[test]
    fn lock_state() {
        let t = MultiSplayTree::new(3).unwrap();
        assert_eq!(t.aux_partition().unwrap().blocks().len(), 3);
        let t = MultiSplayTree::new(15).unwrap();
        let v = t.tree.inspect();
        assert_eq!(v.root(), Some(8));
        assert_eq!((v.node(8).left(), v.node(8).right()), (Some(4), Some(12)));
        for k in 1..=15 {
            let p = v.node(k).aug;
            assert!(p.a == p.d && p.b == p.d && p.aux_root);
        }
        t.validate().unwrap();
    }

    #[test]
    fn single_key() {
        let mut t = MultiSplayTree::new(1).unwrap();
        assert_eq!(t.access(1).unwrap(), 1);
    }

    #[test]
    fn first_access_joins_root_path() {
        let mut t = MultiSplayTree::new(7).unwrap();
        t.access(1).unwrap();
        t.validate().unwrap();
        let expect = Partition::new(vec![vec![4, 2, 1], vec![3], vec![5], vec![6], vec![7]]);
        assert_eq!(t.aux_partition().unwrap(), expect);
    }

    #[test]
    fn repeated_access_costs_one() {
        let mut t = MultiSplayTree::new(63).unwrap();
        for k in [17, 40, 3, 3, 63, 1] {
            t.access(k).unwrap();
            assert_eq!(t.access(k).unwrap(), 1);
            assert_eq!(t.tree.inspect().root(), Some(k));
        }
    }

    proptest! {
        #[test]
        fn matches_reference_paths(n in 1usize..130, raw in prop::collection::vec(any::<u32>(), 1..60)) {
            let mut t = MultiSplayTree::new(n).unwrap();
            let mut m = ReferenceModel::new(n).unwrap();
            for r in raw {
                let x = r % n as u32 + 1;
                t.access(x).unwrap();
                m.record_access(x).unwrap();
                t.validate().map_err(|e| TestCaseError::fail(format!("{e} after {x}")))?;
                prop_assert_eq!(t.tree.inspect().root(), Some(x));
                prop_assert_eq!(t.aux_partition().unwrap(), m.preferred_path_decomposition());
            }
        }
    }
}
