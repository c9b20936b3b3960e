//! Built-in models: scalar field theories, two-dimensional gravity and
//! electromagnetism, and generic sources on metric bundles.

mod geometry;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::bundle::{BundleSpec, Density, EvolutionaryField, FieldDecl, FieldKind, SourceEquation};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::Jets;
use crate::parse::parse_expression;
use crate::rational::Rational;
use crate::variational::euler_lagrange;

pub use geometry::{covariant_divergence_oracle, Metric};

pub const MODEL_NAMES: &[&str] = &[
    "laplace-1d",
    "wave-1d",
    "laplace-2d",
    "hilbert-2d",
    "maxwell-2d",
    "metric-generic-2d",
    "em-generic-2d",
];

#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub bundle: BundleSpec,
    pub lagrangian: Option<Density>,
    pub source: Option<SourceEquation>,
    pub known_symmetries: Vec<(String, EvolutionaryField)>,
    pub notes: String,
}

impl Model {
    /// Assembles a model, checking `source = E(lagrangian)` when both are given.
    pub fn new(
        name: &str,
        bundle: BundleSpec,
        lagrangian: Option<Density>,
        source: Option<SourceEquation>,
        known_symmetries: Vec<(String, EvolutionaryField)>,
        notes: &str,
    ) -> Result<Model> {
        match (&lagrangian, &source) {
            (None, None) => {
                return Err(Error::InconsistentModel(format!(
                    "model `{name}` has neither a Lagrangian nor a source"
                )))
            }
            (Some(l), Some(t)) => {
                let e = euler_lagrange(&Jets::new(&bundle), l)?;
                if &e != t {
                    return Err(Error::InconsistentModel(format!(
                        "source of `{name}` is not the Euler–Lagrange form of its Lagrangian"
                    )));
                }
            }
            _ => {}
        }
        Ok(Model {
            name: name.into(),
            bundle,
            lagrangian,
            source,
            known_symmetries,
            notes: notes.into(),
        })
    }

    /// The stated source, or `E(L)` computed on demand.
    pub fn source_equation(&self, jets: &Jets) -> Result<SourceEquation> {
        match (&self.source, &self.lagrangian) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(l)) => euler_lagrange(jets, l),
            (None, None) => Err(Error::InconsistentModel("no Lagrangian or source".into())),
        }
    }

    pub fn symmetry(&self, name: &str) -> Option<&EvolutionaryField> {
        self.known_symmetries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

pub fn builtin_model(name: &str) -> Result<Model> {
    match name {
        "laplace-1d" => laplace(1),
        "wave-1d" => wave(),
        "laplace-2d" => laplace(2),
        "hilbert-2d" => hilbert(),
        "maxwell-2d" => maxwell(),
        "metric-generic-2d" => metric_generic(),
        "em-generic-2d" => em_generic(),
        _ => Err(Error::UnknownModel(name.into())),
    }
}

fn scalar_field(bundle: &BundleSpec, src: &str) -> Result<EvolutionaryField> {
    let c = bundle.components().remove(0);
    EvolutionaryField::new(
        bundle,
        [(c, parse_expression(src, bundle)?)].into_iter().collect(),
    )
}

fn scalar_source(bundle: &BundleSpec, src: &str) -> Result<SourceEquation> {
    let c = bundle.components().remove(0);
    SourceEquation::new(
        bundle,
        [(c, parse_expression(src, bundle)?)].into_iter().collect(),
    )
}

fn laplace(n: usize) -> Result<Model> {
    let b = BundleSpec::new(n, vec![FieldDecl::new("u", FieldKind::Scalar)])?;
    let l: Vec<String> = (1..=n).map(|i| format!("u[;{i}]^2/2")).collect();
    let t: Vec<String> = (1..=n).map(|i| format!("-u[;{i},{i}]")).collect();
    let mut syms = Vec::new();
    for i in 1..=n {
        let name = if n == 1 {
            "translation".to_string()
        } else {
            format!("translation-{i}")
        };
        syms.push((name, scalar_field(&b, &format!("u[;{i}]"))?));
    }
    syms.push(("shift".to_string(), scalar_field(&b, "1")?));
    let lagrangian = Density::new(parse_expression(&l.join(" + "), &b)?);
    let source = scalar_source(&b, &t.join(" "))?;
    Model::new(
        &format!("laplace-{n}d"),
        b,
        Some(lagrangian),
        Some(source),
        syms,
        "Dirichlet energy of a scalar field; translations and constant shifts are symmetries.",
    )
}

fn wave() -> Result<Model> {
    let b = BundleSpec::new(2, vec![FieldDecl::new("u", FieldKind::Scalar)])?;
    let syms = vec![
        ("translation-1".to_string(), scalar_field(&b, "u[;1]")?),
        ("translation-2".to_string(), scalar_field(&b, "u[;2]")?),
        ("shift".to_string(), scalar_field(&b, "1")?),
    ];
    let lagrangian = Density::new(parse_expression("u[;1]^2/2 - u[;2]^2/2", &b)?);
    let source = scalar_source(&b, "-u[;1,1] + u[;2,2]")?;
    Model::new(
        "wave-1d",
        b,
        Some(lagrangian),
        Some(source),
        syms,
        "Wave equation in one space dimension; x[1] is time and x[2] is space.",
    )
}

fn metric_bundle(extra: Vec<FieldDecl>) -> Result<BundleSpec> {
    let mut fields = vec![FieldDecl::new("g", FieldKind::Symmetric2)];
    fields.extend(extra);
    BundleSpec::new(2, fields)
}

fn hilbert() -> Result<Model> {
    let b = metric_bundle(Vec::new())?;
    let jets = Jets::new(&b);
    let g = b.field_id("g").unwrap();
    let metric = Metric::new(jets, g)?;
    let l = &metric.sqrtdet() * &metric.scalar_curvature()?;
    Model::new(
        "hilbert-2d",
        b,
        Some(Density::new(l)),
        None,
        Vec::new(),
        "Hilbert Lagrangian sqrtdet(g)*R on surfaces; its Euler-Lagrange form vanishes identically.",
    )
}

fn maxwell() -> Result<Model> {
    let b = metric_bundle(vec![FieldDecl::new("A", FieldKind::Covector)])?;
    let g = b.field_id("g").unwrap();
    let metric = Metric::new(Jets::new(&b), g)?;
    let n = b.dim();
    let f = |i: usize, j: usize| parse_expression(&format!("A[{j};{i}] - A[{i};{j}]"), &b);
    let mut acc = Expression::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let fij = f(i + 1, j + 1)?;
            for k in 0..n {
                for l in 0..n {
                    if k == l {
                        continue;
                    }
                    let term = &(&fij * &f(k + 1, l + 1)?) * &(metric.inv(i, k) * metric.inv(j, l));
                    acc = &acc + &term;
                }
            }
        }
    }
    let l = (&metric.sqrtdet() * &acc).scale(Rational::new(-1, 4));
    Model::new(
        "maxwell-2d",
        b,
        Some(Density::new(l)),
        None,
        Vec::new(),
        "Maxwell Lagrangian -1/4*sqrtdet(g)*F_ij*F_kl*inv(g)[i,k]*inv(g)[j,l] with F_ij = A[j;i] - A[i;j].",
    )
}

fn generic_source(b: &BundleSpec) -> Result<SourceEquation> {
    let mut comps = BTreeMap::new();
    for c in b.components() {
        let label = b.component_label(&c);
        let ext = match b.field(c.field).name.as_str() {
            "g" => label.replacen('g', "T", 1),
            "A" => label.replacen('A', "J", 1),
            _ => unreachable!(),
        };
        comps.insert(c, parse_expression(&ext, b)?);
    }
    SourceEquation::new(b, comps)
}

fn metric_generic() -> Result<Model> {
    let b = metric_bundle(vec![FieldDecl::external("T", FieldKind::Symmetric2)])?;
    let source = generic_source(&b)?;
    Model::new(
        "metric-generic-2d",
        b,
        None,
        Some(source),
        Vec::new(),
        "Generic source on surface metrics; the external field T stands for arbitrary functions on the jet space.",
    )
}

fn em_generic() -> Result<Model> {
    let b = metric_bundle(vec![
        FieldDecl::new("A", FieldKind::Covector),
        FieldDecl::external("T", FieldKind::Symmetric2),
        FieldDecl::external("J", FieldKind::Covector),
    ])?;
    let source = generic_source(&b)?;
    Model::new(
        "em-generic-2d",
        b,
        None,
        Some(source),
        Vec::new(),
        "Generic source on metrics times 1-forms; the external fields T and J stand for arbitrary functions.",
    )
}
