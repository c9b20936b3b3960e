//! Jet coordinates: the atoms expressions are built from.

use core::fmt;
use smallvec::SmallVec;

/// Index of a field inside its [`BundleSpec`](crate::BundleSpec).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldId(pub u16);

/// An unordered multiset of base indices (1-based), stored sorted.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[u8; 6]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn from_indices<I: IntoIterator<Item = u8>>(it: I) -> Self {
        let mut v: SmallVec<[u8; 6]> = it.into_iter().collect();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    /// `I ∪ {i}` as a multiset.
    pub fn with(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        let pos = v.iter().position(|&k| k > i).unwrap_or(v.len());
        v.insert(pos, i);
        MultiIndex(v)
    }

    /// Splits off the largest index: `J = K ∪ {i}` returns `(K, i)`.
    pub fn split_last(&self) -> Option<(MultiIndex, u8)> {
        let mut v = self.0.clone();
        let i = v.pop()?;
        Some((MultiIndex(v), i))
    }

    /// Number of occurrences of `i`.
    pub fn count(&self, i: u8) -> usize {
        self.0.iter().filter(|&&k| k == i).count()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// Fiber component indices of a field: empty for scalars, `[a]` for covectors,
/// `[a, b]` with `a <= b` for symmetric 2-tensors.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comp(SmallVec<[u8; 2]>);

impl Comp {
    pub fn scalar() -> Self {
        Comp(SmallVec::new())
    }

    pub fn vector(a: u8) -> Self {
        let mut v = SmallVec::new();
        v.push(a);
        Comp(v)
    }

    /// Symmetric pair; `(b, a)` with `a < b` maps onto the same component.
    pub fn pair(a: u8, b: u8) -> Self {
        let mut v = SmallVec::new();
        v.push(a.min(b));
        v.push(a.max(b));
        Comp(v)
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// One coordinate of the (extended) jet space.
///
/// Variant order is the canonical kind order used for printing and hashing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Base coordinate `x^i`.
    Base(u8),
    /// Jet variable `y^α_I` of a field component.
    Jet {
        field: FieldId,
        comp: Comp,
        derivs: MultiIndex,
    },
    /// Formal base vector field component `D^i` and its derivatives `D^i_{,J}`.
    Aux { index: u8, derivs: MultiIndex },
    /// Formal `sqrt(det g)` for a symmetric 2-tensor field of the given dimension.
    Root { field: FieldId, dim: u8 },
    /// Formal scalar parameter used by homotopy integrals.
    Param(u8),
}

impl Atom {
    pub fn jet(field: FieldId, comp: Comp, derivs: MultiIndex) -> Atom {
        Atom::Jet {
            field,
            comp,
            derivs,
        }
    }

    pub fn aux(index: u8, derivs: MultiIndex) -> Atom {
        Atom::Aux { index, derivs }
    }

    /// Jet order of derivative-carrying atoms, zero otherwise.
    pub fn order(&self) -> usize {
        match self {
            Atom::Jet { derivs, .. } | Atom::Aux { derivs, .. } => derivs.order(),
            _ => 0,
        }
    }

    pub fn is_root(&self) -> bool {
        matches!(self, Atom::Root { .. })
    }

    pub fn is_aux(&self) -> bool {
        matches!(self, Atom::Aux { .. })
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Atom::Jet { .. })
    }
}

/// A fiber component `y^α` of a bundle, the key for source equations and
/// evolutionary fields.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component {
    pub field: FieldId,
    pub comp: Comp,
}

impl Component {
    pub fn new(field: FieldId, comp: Comp) -> Self {
        Component { field, comp }
    }

    /// The jet coordinate `y^α_I` of this component.
    pub fn jet(&self, derivs: MultiIndex) -> Atom {
        Atom::jet(self.field, self.comp.clone(), derivs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_is_a_sorted_multiset() {
        let a = MultiIndex::from_indices([2, 1, 2]);
        assert_eq!(a.indices(), &[1, 2, 2]);
        assert_eq!(a.with(1).indices(), &[1, 1, 2, 2]);
        let (k, i) = a.split_last().unwrap();
        assert_eq!(i, 2);
        assert_eq!(k.indices(), &[1, 2]);
        assert_eq!(
            MultiIndex::from_indices([1, 2]),
            MultiIndex::from_indices([2, 1])
        );
    }

    #[test]
    fn symmetric_pairs_normalize() {
        assert_eq!(Comp::pair(2, 1), Comp::pair(1, 2));
    }
}
