use std::collections::HashMap;

use super::{EdgeLabel, VertexId, NONE};

/// Interned vertices of a regular tree, addressed by reduced words.
///
/// Slot 0 goes up, slots `1..=children` go down to child `i`, and an optional
/// last slot is the flat (unoriented) edge. A vertex's word ends with the
/// letter of `creator_slot`; a vertex reached by an up or flat step is child 0
/// of its own parent. Linked slots are exactly the interned neighbors, so new
/// vertices never need a lookup.
#[derive(Debug, Clone)]
pub(crate) struct TreeStore {
    pub children: usize,
    pub has_flat: bool,
    pub nbr: Vec<u32>,
    pub height: Vec<i32>,
    pub depth: Vec<u32>,
    child_index: Vec<u8>,
    creator: Vec<u32>,
    creator_slot: Vec<u8>,
}

impl TreeStore {
    pub fn new(children: usize, has_flat: bool) -> Self {
        let mut store = TreeStore {
            children,
            has_flat,
            nbr: Vec::new(),
            height: Vec::new(),
            depth: Vec::new(),
            child_index: Vec::new(),
            creator: Vec::new(),
            creator_slot: Vec::new(),
        };
        store.push(0, 0, 0, NONE, 0);
        store
    }

    pub fn arity(&self) -> usize {
        1 + self.children + usize::from(self.has_flat)
    }

    pub fn len(&self) -> usize {
        self.height.len()
    }

    fn flat_slot(&self) -> usize {
        1 + self.children
    }

    pub fn slot_increment(&self, slot: usize) -> i32 {
        match slot {
            0 => 1,
            s if s <= self.children => -1,
            _ => 0,
        }
    }

    pub fn slot_label(&self, slot: usize) -> EdgeLabel {
        match slot {
            0 => EdgeLabel::Up,
            s if s <= self.children => EdgeLabel::Down((s - 1) as u8),
            _ => EdgeLabel::Flat,
        }
    }

    fn push(
        &mut self,
        height: i32,
        depth: u32,
        child_index: u8,
        creator: u32,
        creator_slot: u8,
    ) -> u32 {
        let id = self.height.len() as u32;
        self.nbr.extend(std::iter::repeat_n(NONE, self.arity()));
        self.height.push(height);
        self.depth.push(depth);
        self.child_index.push(child_index);
        self.creator.push(creator);
        self.creator_slot.push(creator_slot);
        id
    }

    pub fn existing(&self, t: u32, slot: usize) -> Option<u32> {
        let id = self.nbr[t as usize * self.arity() + slot];
        (id != NONE).then_some(id)
    }

    pub fn resolve(&mut self, t: u32, slot: usize) -> u32 {
        if let Some(id) = self.existing(t, slot) {
            return id;
        }
        let arity = self.arity();
        let tu = t as usize;
        let height = self.height[tu] + self.slot_increment(slot);
        let depth = self.depth[tu] + 1;
        let (child_index, back_slot) = match slot {
            0 => (0, 1 + self.child_index[tu] as usize),
            s if s <= self.children => ((s - 1) as u8, 0),
            _ => (0, self.flat_slot()),
        };
        let id = self.push(height, depth, child_index, t, slot as u8);
        self.nbr[tu * arity + slot] = id;
        self.nbr[id as usize * arity + back_slot] = t;
        id
    }

    /// Reduced word from the root to `t`.
    pub fn word(&self, mut t: u32) -> Vec<EdgeLabel> {
        let mut word = Vec::with_capacity(self.depth[t as usize] as usize);
        while t != 0 {
            word.push(self.slot_label(self.creator_slot[t as usize] as usize));
            t = self.creator[t as usize];
        }
        word.reverse();
        word
    }
}

/// Interned vertices of the end-fixed tree times the integer lattice.
#[derive(Debug, Clone)]
pub(crate) struct ProductStore {
    pub tree: TreeStore,
    pub dims: usize,
    pub nbr: Vec<u32>,
    pub height: Vec<i32>,
    pub depth: Vec<u32>,
    tree_of: Vec<u32>,
    lattice: Vec<i32>,
    index: HashMap<(u32, Vec<i32>), u32>,
}

impl ProductStore {
    pub fn new(children: usize, dims: usize) -> Self {
        let mut store = ProductStore {
            tree: TreeStore::new(children, false),
            dims,
            nbr: Vec::new(),
            height: Vec::new(),
            depth: Vec::new(),
            tree_of: Vec::new(),
            lattice: Vec::new(),
            index: HashMap::new(),
        };
        store.intern(0, vec![0; dims]);
        store
    }

    pub fn arity(&self) -> usize {
        self.tree.arity() + 2 * self.dims
    }

    pub fn len(&self) -> usize {
        self.height.len()
    }

    pub fn slot_increment(&self, slot: usize) -> i32 {
        if slot < self.tree.arity() {
            self.tree.slot_increment(slot)
        } else {
            0
        }
    }

    pub fn slot_label(&self, slot: usize) -> EdgeLabel {
        let ta = self.tree.arity();
        if slot < ta {
            self.tree.slot_label(slot)
        } else {
            let s = slot - ta;
            EdgeLabel::Lattice {
                axis: (s / 2) as u8,
                positive: s.is_multiple_of(2),
            }
        }
    }

    pub fn tree_vertex(&self, v: u32) -> u32 {
        self.tree_of[v as usize]
    }

    pub fn lattice_point(&self, v: u32) -> &[i32] {
        let start = v as usize * self.dims;
        &self.lattice[start..start + self.dims]
    }

    fn intern(&mut self, t: u32, point: Vec<i32>) -> u32 {
        if let Some(&id) = self.index.get(&(t, point.clone())) {
            return id;
        }
        let id = self.height.len() as u32;
        let arity = self.arity();
        self.nbr.extend(std::iter::repeat_n(NONE, arity));
        self.height.push(self.tree.height[t as usize]);
        let l1: u32 = point.iter().map(|c| c.unsigned_abs()).sum();
        self.depth.push(self.tree.depth[t as usize] + l1);
        self.tree_of.push(t);
        self.lattice.extend_from_slice(&point);
        self.index.insert((t, point), id);
        id
    }

    fn target(&self, v: u32, slot: usize) -> (Option<u32>, Vec<i32>) {
        let ta = self.tree.arity();
        let t = self.tree_of[v as usize];
        let mut point = self.lattice_point(v).to_vec();
        if slot < ta {
            (self.tree.existing(t, slot), point)
        } else {
            let s = slot - ta;
            point[s / 2] += if s.is_multiple_of(2) { 1 } else { -1 };
            (Some(t), point)
        }
    }

    pub fn existing(&self, v: u32, slot: usize) -> Option<u32> {
        let id = self.nbr[v as usize * self.arity() + slot];
        if id != NONE {
            return Some(id);
        }
        let (t, point) = self.target(v, slot);
        t.and_then(|t| self.index.get(&(t, point)).copied())
    }

    pub fn resolve(&mut self, v: u32, slot: usize) -> u32 {
        let idx = v as usize * self.arity() + slot;
        if self.nbr[idx] != NONE {
            return self.nbr[idx];
        }
        let ta = self.tree.arity();
        let (t, point) = self.target(v, slot);
        let t = match t {
            Some(t) => t,
            None => self.tree.resolve(self.tree_of[v as usize], slot),
        };
        debug_assert!(slot >= ta || self.tree.existing(self.tree_of[v as usize], slot) == Some(t));
        let id = self.intern(t, point);
        self.nbr[idx] = id;
        id
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Store {
    Tree(TreeStore),
    Product(ProductStore),
}

impl Store {
    pub fn arity(&self) -> usize {
        match self {
            Store::Tree(s) => s.arity(),
            Store::Product(s) => s.arity(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Store::Tree(s) => s.len(),
            Store::Product(s) => s.len(),
        }
    }

    pub fn nbr(&self) -> &[u32] {
        match self {
            Store::Tree(s) => &s.nbr,
            Store::Product(s) => &s.nbr,
        }
    }

    pub fn heights(&self) -> &[i32] {
        match self {
            Store::Tree(s) => &s.height,
            Store::Product(s) => &s.height,
        }
    }

    pub fn depths(&self) -> &[u32] {
        match self {
            Store::Tree(s) => &s.depth,
            Store::Product(s) => &s.depth,
        }
    }

    pub fn slot_increment(&self, slot: usize) -> i32 {
        match self {
            Store::Tree(s) => s.slot_increment(slot),
            Store::Product(s) => s.slot_increment(slot),
        }
    }

    pub fn slot_label(&self, slot: usize) -> EdgeLabel {
        match self {
            Store::Tree(s) => s.slot_label(slot),
            Store::Product(s) => s.slot_label(slot),
        }
    }

    pub fn existing(&self, v: u32, slot: usize) -> Option<u32> {
        match self {
            Store::Tree(s) => s.existing(v, slot),
            Store::Product(s) => s.existing(v, slot),
        }
    }

    pub fn resolve(&mut self, v: u32, slot: usize) -> u32 {
        match self {
            Store::Tree(s) => s.resolve(v, slot),
            Store::Product(s) => s.resolve(v, slot),
        }
    }

    /// Fill every slot that points at an already interned vertex.
    pub fn link_existing(&mut self, v: u32) {
        let arity = self.arity();
        for slot in 0..arity {
            if let Some(id) = self.existing(v, slot) {
                if let Store::Product(s) = self {
                    s.nbr[v as usize * arity + slot] = id;
                }
            }
        }
    }

    pub fn address(&self, v: VertexId) -> (Vec<EdgeLabel>, Vec<i32>) {
        match self {
            Store::Tree(s) => (s.word(v), Vec::new()),
            Store::Product(s) => (s.tree.word(s.tree_vertex(v)), s.lattice_point(v).to_vec()),
        }
    }
}
