//! Bundle declarations and the typed values that live on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::atom::{Atom, Comp, Component, FieldId};
use crate::error::{Error, Result};
use crate::expr::Expression;

pub const DEFAULT_ORDER_BOUND: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldKind {
    Scalar,
    Covector,
    Symmetric2,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Covector => "covector",
            FieldKind::Symmetric2 => "symmetric2",
        }
    }

    pub fn parse(s: &str) -> Option<FieldKind> {
        match s {
            "scalar" => Some(FieldKind::Scalar),
            "covector" => Some(FieldKind::Covector),
            "symmetric2" => Some(FieldKind::Symmetric2),
            _ => None,
        }
    }

    /// Number of component indices (tensor rank).
    pub fn rank(self) -> usize {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Covector => 1,
            FieldKind::Symmetric2 => 2,
        }
    }
}

/// A field of the bundle.
///
/// External fields are coordinates of the jet space that are never varied: they
/// carry jets and total derivatives act on them, but they contribute no fiber
/// components. They model generic coefficient functions (for instance the
/// entries of an arbitrary source equation).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub kind: FieldKind,
    pub external: bool,
}

impl FieldDecl {
    pub fn new(name: &str, kind: FieldKind) -> Self {
        FieldDecl {
            name: name.into(),
            kind,
            external: false,
        }
    }

    pub fn external(name: &str, kind: FieldKind) -> Self {
        FieldDecl {
            name: name.into(),
            kind,
            external: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleSpec {
    dim: usize,
    fields: Vec<FieldDecl>,
    order_bound: usize,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "x" | "det" | "sqrtdet" | "inv")
}

impl BundleSpec {
    pub fn new(dim: usize, fields: Vec<FieldDecl>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBundle(
                "base dimension must be at least 1".into(),
            ));
        }
        if dim > 9 {
            return Err(Error::InvalidBundle(
                "base dimension above 9 is not supported".into(),
            ));
        }
        if fields.len() > u16::MAX as usize {
            return Err(Error::InvalidBundle("too many fields".into()));
        }
        for (i, f) in fields.iter().enumerate() {
            if !valid_name(&f.name) {
                return Err(Error::InvalidBundle(format!(
                    "invalid field name `{}`",
                    f.name
                )));
            }
            if fields[..i].iter().any(|g| g.name == f.name) {
                return Err(Error::InvalidBundle(format!(
                    "duplicate field name `{}`",
                    f.name
                )));
            }
        }
        Ok(BundleSpec {
            dim,
            fields,
            order_bound: DEFAULT_ORDER_BOUND,
        })
    }

    pub fn with_order_bound(mut self, bound: usize) -> Self {
        self.order_bound = bound;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order_bound(&self) -> usize {
        self.order_bound
    }

    pub fn fields(&self) -> &[FieldDecl] {
        &self.fields
    }

    pub fn field(&self, id: FieldId) -> &FieldDecl {
        &self.fields[id.0 as usize]
    }

    pub fn field_id(&self, name: &str) -> Option<FieldId> {
        self.fields
            .iter()
            .position(|f| f.name == name)
            .map(|i| FieldId(i as u16))
    }

    /// Component tuples of a field kind in canonical order.
    pub fn comps_of(&self, kind: FieldKind) -> Vec<Comp> {
        let n = self.dim as u8;
        match kind {
            FieldKind::Scalar => alloc::vec![Comp::scalar()],
            FieldKind::Covector => (1..=n).map(Comp::vector).collect(),
            FieldKind::Symmetric2 => {
                let mut v = Vec::new();
                for a in 1..=n {
                    for b in a..=n {
                        v.push(Comp::pair(a, b));
                    }
                }
                v
            }
        }
    }

    /// Independent fiber components of the dynamic (non-external) fields.
    pub fn components(&self) -> Vec<Component> {
        let mut out = Vec::new();
        for (i, f) in self.fields.iter().enumerate() {
            if f.external {
                continue;
            }
            for c in self.comps_of(f.kind) {
                out.push(Component::new(FieldId(i as u16), c));
            }
        }
        out
    }

    /// Components of every field, external ones included.
    pub fn all_components(&self) -> Vec<Component> {
        let mut out = Vec::new();
        for (i, f) in self.fields.iter().enumerate() {
            for c in self.comps_of(f.kind) {
                out.push(Component::new(FieldId(i as u16), c));
            }
        }
        out
    }

    pub fn is_dynamic(&self, field: FieldId) -> bool {
        self.fields
            .get(field.0 as usize)
            .is_some_and(|f| !f.external)
    }

    /// `sqrtdet` atom of a symmetric field.
    pub fn root(&self, field: FieldId) -> Atom {
        Atom::Root {
            field,
            dim: self.dim as u8,
        }
    }

    /// Human-readable component label: `u`, `A[1]`, `g[1,2]`.
    pub fn component_label(&self, c: &Component) -> String {
        let name = &self.field(c.field).name;
        let idx = c.comp.indices();
        if idx.is_empty() {
            name.clone()
        } else {
            let parts: Vec<String> = idx.iter().map(|i| format!("{i}")).collect();
            format!("{}[{}]", name, parts.join(","))
        }
    }

    /// Inverse of [`component_label`](Self::component_label).
    pub fn parse_component(&self, label: &str) -> Result<Component> {
        let label = label.trim();
        let (name, rest) = match label.find('[') {
            Some(p) => (&label[..p], Some(&label[p..])),
            None => (label, None),
        };
        let id = self
            .field_id(name)
            .ok_or_else(|| Error::UnknownField(name.into()))?;
        let kind = self.field(id).kind;
        let idx: Vec<u8> = match rest {
            None => Vec::new(),
            Some(r) => {
                let inner = r
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| Error::Syntax {
                        pos: 0,
                        msg: format!("bad component label `{label}`"),
                    })?;
                let mut v = Vec::new();
                for p in inner.split(',').filter(|p| !p.trim().is_empty()) {
                    let i: u8 = p.trim().parse().map_err(|_| Error::Syntax {
                        pos: 0,
                        msg: format!("bad index in `{label}`"),
                    })?;
                    v.push(i);
                }
                v
            }
        };
        if idx.len() != kind.rank() || idx.iter().any(|&i| i == 0 || i as usize > self.dim) {
            return Err(Error::IndexOutOfRange {
                pos: 0,
                msg: format!("component `{label}`"),
            });
        }
        let comp = match kind {
            FieldKind::Scalar => Comp::scalar(),
            FieldKind::Covector => Comp::vector(idx[0]),
            FieldKind::Symmetric2 => Comp::pair(idx[0], idx[1]),
        };
        let c = Component::new(id, comp);
        if self.field(id).external {
            return Err(Error::ComponentMismatch(format!(
                "`{label}` belongs to an external field"
            )));
        }
        Ok(c)
    }
}

/// An `(n,0)`-form `L dx¹∧…∧dxⁿ`, stored by its coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub coeff: Expression,
}

impl Density {
    pub fn new(coeff: Expression) -> Self {
        Density { coeff }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }
}

/// An `(n-1,0)`-form `Σ ωⁱ · i_{∂ᵢ}(dx¹∧…∧dxⁿ)`, stored by its divergence
/// components, so that `d_h ω = Σ Dᵢ ωⁱ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizontalForm {
    pub comps: Vec<Expression>,
}

impl HorizontalForm {
    pub fn zero(n: usize) -> Self {
        HorizontalForm {
            comps: alloc::vec![Expression::zero(); n],
        }
    }

    pub fn new(comps: Vec<Expression>) -> Self {
        HorizontalForm { comps }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expression::is_zero)
    }
}

fn check_keys(
    bundle: &BundleSpec,
    keys: impl Iterator<Item = Component>,
    what: &str,
) -> Result<()> {
    let expected = bundle.components();
    let got: Vec<Component> = keys.collect();
    if got != expected {
        return Err(Error::ComponentMismatch(format!(
            "{what} has {} components, bundle has {}",
            got.len(),
            expected.len()
        )));
    }
    Ok(())
}

macro_rules! component_map {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq)]
        pub struct $name {
            comps: BTreeMap<Component, Expression>,
        }

        impl $name {
            /// Builds from a map whose keys must be exactly the bundle's
            /// independent components.
            pub fn new(bundle: &BundleSpec, comps: BTreeMap<Component, Expression>) -> Result<Self> {
                check_keys(bundle, comps.keys().cloned(), stringify!($name))?;
                Ok($name { comps })
            }

            /// Missing components are zero.
            pub fn from_partial(bundle: &BundleSpec, mut comps: BTreeMap<Component, Expression>) -> Result<Self> {
                let all = bundle.components();
                if let Some(k) = comps.keys().find(|k| !all.contains(k)) {
                    return Err(Error::ComponentMismatch(format!("{k:?} is not a fiber component")));
                }
                for c in all {
                    comps.entry(c).or_insert_with(Expression::zero);
                }
                Ok($name { comps })
            }

            pub fn zero(bundle: &BundleSpec) -> Self {
                $name { comps: bundle.components().into_iter().map(|c| (c, Expression::zero())).collect() }
            }

            pub fn get(&self, c: &Component) -> Option<&Expression> {
                self.comps.get(c)
            }

            pub fn iter(&self) -> impl Iterator<Item = (&Component, &Expression)> {
                self.comps.iter()
            }

            pub fn is_zero(&self) -> bool {
                self.comps.values().all(Expression::is_zero)
            }

            pub fn len(&self) -> usize {
                self.comps.len()
            }

            pub fn is_empty(&self) -> bool {
                self.comps.is_empty()
            }

            #[allow(dead_code)]
            pub(crate) fn from_map_unchecked(comps: BTreeMap<Component, Expression>) -> Self {
                $name { comps }
            }
        }
    };
}

component_map!(
    /// A source equation `T = Σ T_α dy^α ⊗ dX`, one expression per fiber component.
    SourceEquation
);
component_map!(
    /// An evolutionary (vertical) vector field `V = Σ V^α ∂/∂y^α`.
    EvolutionaryField
);

impl SourceEquation {
    pub fn components_match(&self, v: &EvolutionaryField) -> bool {
        self.comps.keys().eq(v.comps.keys())
    }
}
