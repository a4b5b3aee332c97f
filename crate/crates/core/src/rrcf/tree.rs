//! A single robust random cut tree.
//!
//! Points are stored at leaves with duplicate counts; internal nodes hold an
//! axis-aligned cut and the bounding box of their subtree. Insertion draws
//! the cut dimension with probability proportional to the extended box's
//! side lengths and the cut value uniformly within that side; a cut that
//! separates the new point from the existing box makes the point a sibling
//! of the whole subtree, otherwise insertion recurses along the existing
//! cut. Deletion splices the sibling into the parent's place and restores
//! bounding boxes exactly.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone)]
struct LeafNode {
    point: Vec<f64>,
    count: usize,
    parent: Option<usize>,
}

#[derive(Debug, Clone)]
struct InternalNode {
    cut_dim: usize,
    cut_value: f64,
    left: usize,
    right: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    count: usize,
    parent: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(LeafNode),
    Internal(InternalNode),
}

#[derive(Debug, Clone)]
enum Slot {
    Occupied(Node),
    Vacant,
}

/// Robust random cut tree over fixed-dimension points with a sliding-window
/// capacity.
#[derive(Debug, Clone)]
pub struct RcTree {
    nodes: Vec<Slot>,
    free: Vec<usize>,
    root: Option<usize>,
    leaf_of: HashMap<u64, usize>,
    order: VecDeque<u64>,
    capacity: usize,
    dim: usize,
    rng: Rng,
}

impl RcTree {
    pub fn new(dim: usize, capacity: usize, seed: u64) -> Self {
        RcTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: None,
            leaf_of: HashMap::new(),
            order: VecDeque::new(),
            capacity,
            dim,
            rng: Rng::new(seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total stored multiplicity (duplicates counted).
    pub fn point_count(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Occupied arena slots; zero when the tree is empty.
    pub fn active_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    fn node(&self, idx: usize) -> &Node {
        match &self.nodes[idx] {
            Slot::Occupied(node) => node,
            Slot::Vacant => unreachable!("dangling node index"),
        }
    }

    fn node_mut(&mut self, idx: usize) -> &mut Node {
        match &mut self.nodes[idx] {
            Slot::Occupied(node) => node,
            Slot::Vacant => unreachable!("dangling node index"),
        }
    }

    fn alloc(&mut self, node: Node) -> usize {
        if let Some(idx) = self.free.pop() {
            self.nodes[idx] = Slot::Occupied(node);
            idx
        } else {
            self.nodes.push(Slot::Occupied(node));
            self.nodes.len() - 1
        }
    }

    fn release(&mut self, idx: usize) {
        self.nodes[idx] = Slot::Vacant;
        self.free.push(idx);
    }

    fn count_of(&self, idx: usize) -> usize {
        match self.node(idx) {
            Node::Leaf(l) => l.count,
            Node::Internal(n) => n.count,
        }
    }

    fn bbox_of(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        match self.node(idx) {
            Node::Leaf(l) => (l.point.clone(), l.point.clone()),
            Node::Internal(n) => (n.lo.clone(), n.hi.clone()),
        }
    }

    fn parent_of(&self, idx: usize) -> Option<usize> {
        match self.node(idx) {
            Node::Leaf(l) => l.parent,
            Node::Internal(n) => n.parent,
        }
    }

    fn set_parent(&mut self, idx: usize, parent: Option<usize>) {
        match self.node_mut(idx) {
            Node::Leaf(l) => l.parent = parent,
            Node::Internal(n) => n.parent = parent,
        }
    }

    /// Insert a point under a fresh id. At capacity the oldest id is
    /// evicted first (sliding window).
    pub fn insert_point(&mut self, point: &[f64], id: u64) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} in a {}-dimensional tree",
                point.len(),
                self.dim
            )));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "point".into(),
                legal: "finite coordinates".into(),
            });
        }
        if self.leaf_of.contains_key(&id) {
            return Err(Error::InvalidParameter {
                name: "id".into(),
                legal: format!("unused id (got duplicate {id})"),
            });
        }
        if self.capacity > 0 && self.order.len() >= self.capacity {
            let oldest = *self.order.front().expect("non-empty at capacity");
            self.forget_point(oldest)?;
        }

        let Some(root) = self.root else {
            let leaf = self.alloc(Node::Leaf(LeafNode {
                point: point.to_vec(),
                count: 1,
                parent: None,
            }));
            self.root = Some(leaf);
            self.leaf_of.insert(id, leaf);
            self.order.push_back(id);
            return Ok(());
        };

        let mut current = root;
        loop {
            // Exact duplicate: bump the leaf count, no structural change.
            if let Node::Leaf(leaf) = self.node(current) {
                if leaf.point == point {
                    let leaf_idx = current;
                    if let Node::Leaf(l) = self.node_mut(leaf_idx) {
                        l.count += 1;
                    }
                    self.bump_ancestors(leaf_idx, point);
                    self.leaf_of.insert(id, leaf_idx);
                    self.order.push_back(id);
                    return Ok(());
                }
            }

            let (lo, hi) = self.bbox_of(current);
            let ext_lo: Vec<f64> = lo.iter().zip(point).map(|(a, b)| a.min(*b)).collect();
            let ext_hi: Vec<f64> = hi.iter().zip(point).map(|(a, b)| a.max(*b)).collect();
            let total: f64 = ext_lo.iter().zip(&ext_hi).map(|(a, b)| b - a).sum();
            debug_assert!(total > 0.0, "degenerate extended box for non-duplicate");

            let draw = self.rng.next_f64() * total;
            let mut cut_dim = 0;
            let mut cut_value = ext_lo[0];
            let mut cumulative = 0.0;
            for d in 0..self.dim {
                let side = ext_hi[d] - ext_lo[d];
                if cumulative + side > draw {
                    cut_dim = d;
                    cut_value = ext_lo[d] + (draw - cumulative);
                    break;
                }
                cumulative += side;
            }

            if cut_value < lo[cut_dim] || cut_value >= hi[cut_dim] {
                // The cut separates the new point from the whole subtree.
                let point_left = point[cut_dim] <= cut_value;
                let parent = self.parent_of(current);
                let leaf = self.alloc(Node::Leaf(LeafNode {
                    point: point.to_vec(),
                    count: 1,
                    parent: None,
                }));
                let (left, right) = if point_left {
                    (leaf, current)
                } else {
                    (current, leaf)
                };
                let count = self.count_of(current) + 1;
                let merged = self.alloc(Node::Internal(InternalNode {
                    cut_dim,
                    cut_value,
                    left,
                    right,
                    lo: ext_lo,
                    hi: ext_hi,
                    count,
                    parent,
                }));
                self.set_parent(leaf, Some(merged));
                self.set_parent(current, Some(merged));
                match parent {
                    None => self.root = Some(merged),
                    Some(p) => self.replace_child(p, current, merged),
                }
                self.bump_ancestors(merged, point);
                self.leaf_of.insert(id, leaf);
                self.order.push_back(id);
                return Ok(());
            }

            // Cut fell inside the existing box: follow the stored cut.
            let Node::Internal(n) = self.node(current) else {
                unreachable!("leaf boxes are degenerate; the cut always separates")
            };
            current = if point[n.cut_dim] <= n.cut_value {
                n.left
            } else {
                n.right
            };
        }
    }

    fn replace_child(&mut self, parent: usize, old: usize, new: usize) {
        let Node::Internal(n) = self.node_mut(parent) else {
            unreachable!("parent must be internal")
        };
        if n.left == old {
            n.left = new;
        } else {
            debug_assert_eq!(n.right, old);
            n.right = new;
        }
    }

    /// Walk from `start`'s parent to the root, adding one to counts and
    /// extending boxes with the new point.
    fn bump_ancestors(&mut self, start: usize, point: &[f64]) {
        let mut current = self.parent_of(start);
        while let Some(idx) = current {
            let Node::Internal(n) = self.node_mut(idx) else {
                unreachable!()
            };
            n.count += 1;
            for d in 0..point.len() {
                n.lo[d] = n.lo[d].min(point[d]);
                n.hi[d] = n.hi[d].max(point[d]);
            }
            current = n.parent;
        }
    }

    /// Remove an id. Duplicate leaves decrement; the last copy splices the
    /// sibling subtree into the parent's place and restores every ancestor
    /// bounding box as if the point never existed.
    pub fn forget_point(&mut self, id: u64) -> Result<()> {
        let leaf_idx = self.leaf_of.remove(&id).ok_or(Error::UnknownPoint { id })?;
        self.order.retain(|&queued| queued != id);

        let (count, parent) = match self.node(leaf_idx) {
            Node::Leaf(l) => (l.count, l.parent),
            Node::Internal(_) => unreachable!("id maps to a leaf"),
        };

        if count > 1 {
            if let Node::Leaf(l) = self.node_mut(leaf_idx) {
                l.count -= 1;
            }
            let mut current = parent;
            while let Some(idx) = current {
                let Node::Internal(n) = self.node_mut(idx) else {
                    unreachable!()
                };
                n.count -= 1;
                current = n.parent;
            }
            // Duplicates do not stretch boxes, so no box shrink is needed.
            return Ok(());
        }

        let Some(parent_idx) = parent else {
            self.release(leaf_idx);
            self.root = None;
            return Ok(());
        };

        let Node::Internal(p) = self.node(parent_idx) else {
            unreachable!()
        };
        let sibling = if p.left == leaf_idx { p.right } else { p.left };
        let grandparent = p.parent;

        self.set_parent(sibling, grandparent);
        match grandparent {
            None => self.root = Some(sibling),
            Some(g) => self.replace_child(g, parent_idx, sibling),
        }
        self.release(leaf_idx);
        self.release(parent_idx);

        // Restore counts and recompute boxes bottom-up from the splice point.
        let mut current = grandparent;
        while let Some(idx) = current {
            let (left, right) = match self.node(idx) {
                Node::Internal(n) => (n.left, n.right),
                Node::Leaf(_) => unreachable!(),
            };
            let count = self.count_of(left) + self.count_of(right);
            let (l_lo, l_hi) = self.bbox_of(left);
            let (r_lo, r_hi) = self.bbox_of(right);
            let Node::Internal(n) = self.node_mut(idx) else {
                unreachable!()
            };
            n.count = count;
            for d in 0..n.lo.len() {
                n.lo[d] = l_lo[d].min(r_lo[d]);
                n.hi[d] = l_hi[d].max(r_hi[d]);
            }
            current = n.parent;
        }
        Ok(())
    }

    /// Collusive displacement: the maximum over ancestors of the sibling's
    /// point mass divided by the own subtree's point mass. A lone leaf
    /// scores 0.
    pub fn codisp(&self, id: u64) -> Result<f64> {
        let leaf_idx = *self.leaf_of.get(&id).ok_or(Error::UnknownPoint { id })?;
        let mut best: f64 = 0.0;
        let mut current = leaf_idx;
        while let Some(parent_idx) = self.parent_of(current) {
            let Node::Internal(p) = self.node(parent_idx) else {
                unreachable!()
            };
            let sibling = if p.left == current { p.right } else { p.left };
            let ratio = self.count_of(sibling) as f64 / self.count_of(current) as f64;
            best = best.max(ratio);
            current = parent_idx;
        }
        Ok(best)
    }

    /// The cut stored immediately above an id's leaf, if any. Exposed for
    /// inspecting where an insertion attached.
    pub fn parent_cut(&self, id: u64) -> Option<(usize, f64)> {
        let leaf_idx = *self.leaf_of.get(&id)?;
        let parent = self.parent_of(leaf_idx)?;
        match self.node(parent) {
            Node::Internal(n) => Some((n.cut_dim, n.cut_value)),
            Node::Leaf(_) => None,
        }
    }

    /// Structural equality: same shape, cuts, bounding boxes, leaf points
    /// and duplicate counts. Ignores ids, arena layout, and RNG state.
    pub fn same_structure(&self, other: &RcTree) -> bool {
        match (self.root, other.root) {
            (None, None) => true,
            (Some(a), Some(b)) => self.subtree_equal(a, other, b),
            _ => false,
        }
    }

    fn subtree_equal(&self, a: usize, other: &RcTree, b: usize) -> bool {
        match (self.node(a), other.node(b)) {
            (Node::Leaf(x), Node::Leaf(y)) => x.point == y.point && x.count == y.count,
            (Node::Internal(x), Node::Internal(y)) => {
                x.cut_dim == y.cut_dim
                    && x.cut_value == y.cut_value
                    && x.count == y.count
                    && x.lo == y.lo
                    && x.hi == y.hi
                    && self.subtree_equal(x.left, other, y.left)
                    && self.subtree_equal(x.right, other, y.right)
            }
            _ => false,
        }
    }
}
