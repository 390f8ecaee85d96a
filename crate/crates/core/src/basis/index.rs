use std::collections::HashMap;
use std::hash::Hash;

/// Ordered basis with a dense integer index.
#[derive(Clone, Debug)]
pub struct BasisIndex<T: Eq + Hash + Clone> {
    elements: Vec<T>,
    lookup: HashMap<T, usize>,
}

impl<T: Eq + Hash + Clone> BasisIndex<T> {
    /// Panics if `elements` contains duplicates.
    pub fn new(elements: Vec<T>) -> Self {
        let mut lookup = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            let prev = lookup.insert(e.clone(), i);
            assert!(prev.is_none(), "duplicate basis element at position {i}");
        }
        Self { elements, lookup }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, e: &T) -> Option<usize> {
        self.lookup.get(e).copied()
    }

    pub fn element(&self, i: usize) -> &T {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.elements.iter()
    }
}
