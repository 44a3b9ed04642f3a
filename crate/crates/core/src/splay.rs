//! Bottom-up splay tree on the metered substrate.

use crate::cost_model::{CostMeter, Key, Side, Tree};
use crate::error::Result;
use crate::reference::CompleteTree;
use crate::structure::Structure;

pub struct SplayTree {
    shape: CompleteTree,
    tree: Tree<()>,
}

impl SplayTree {
    /// Starts from the reference tree's shape.
    pub fn new(n: usize) -> Result<Self> {
        let shape = CompleteTree::new(n)?;
        let tree = Tree::from_shape(&shape, |_| ());
        Ok(SplayTree { shape, tree })
    }

    pub fn tree(&self) -> &Tree<()> {
        &self.tree
    }

    /// Searches for `key`, then splays it to the root. Returns the cost.
    pub fn access(&mut self, key: Key) -> Result<u64> {
        self.shape.check_key(key)?;
        let before = self.tree.meter();
        let mut c = self.tree.begin_access()?;
        while c.key() != key {
            c.down(if key < c.key() {
                Side::Left
            } else {
                Side::Right
            })?;
        }
        while let Some(p) = c.parent() {
            let p_key = p.key();
            match p.parent() {
                None => c.rotate_up()?,
                Some(g) => {
                    if (key < p_key) == (p_key < g) {
                        c.rotate_parent_up()?;
                    } else {
                        c.rotate_up()?;
                    }
                    c.rotate_up()?;
                }
            }
        }
        Ok((self.tree.meter() - before).total())
    }
}

impl Structure for SplayTree {
    fn n(&self) -> usize {
        self.shape.n()
    }

    fn access(&mut self, key: Key) -> Result<u64> {
        SplayTree::access(self, key)
    }

    fn meter(&self) -> CostMeter {
        self.tree.meter()
    }

    fn validate(&self) -> Result<()> {
        self.tree.inspect().check_bst()
    }
}
