//! JSON model files.
//!
//! ```json
//! {
//!   "name": "laplace-1d",
//!   "dimension": 1,
//!   "fields": [{ "name": "u", "kind": "scalar" }],
//!   "expressions": { "L": "1/2*u[;1]^2", "T_u": "-u[;1,1]", "tr": "u[;1]" },
//!   "lagrangian": "L",
//!   "source": { "u": "T_u" },
//!   "vectorfields": { "translation": { "u": "tr" } }
//! }
//! ```
//!
//! Expression strings use the library's expression grammar. `source` and
//! `vectorfields` map component labels (`u`, `A[1]`, `g[1,2]`) to names in
//! `expressions`; components omitted from a vector field are zero.

use std::collections::BTreeMap;
use std::path::Path;

use noether_core::catalog::Model;
use noether_core::{
    format_expression, parse_expression, BundleSpec, Density, EvolutionaryField, Expression,
    FieldDecl, FieldKind, SourceEquation,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub fields: Vec<FieldEntry>,
    #[serde(default)]
    pub expressions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vectorfields: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldEntry {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub external: bool,
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<ModelFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(path.display().to_string(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::ModelFile(format!("{}: {e}", path.display())))
    }

    fn bundle(&self, order_bound: Option<usize>) -> Result<BundleSpec, CliError> {
        let mut fields = Vec::with_capacity(self.fields.len());
        for f in &self.fields {
            let kind = FieldKind::parse(&f.kind).ok_or_else(|| {
                CliError::ModelFile(format!("field `{}` has unknown kind `{}`", f.name, f.kind))
            })?;
            fields.push(if f.external {
                FieldDecl::external(&f.name, kind)
            } else {
                FieldDecl::new(&f.name, kind)
            });
        }
        let mut b = BundleSpec::new(self.dimension, fields)?;
        if let Some(k) = order_bound.or(self.order_bound) {
            b = b.with_order_bound(k);
        }
        Ok(b)
    }

    fn lookup<'a>(&'a self, name: &str) -> Result<&'a str, CliError> {
        self.expressions
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| CliError::ModelFile(format!("expression `{name}` is not defined")))
    }

    fn component_map(
        &self,
        b: &BundleSpec,
        map: &BTreeMap<String, String>,
    ) -> Result<BTreeMap<noether_core::Component, Expression>, CliError> {
        let mut out = BTreeMap::new();
        for (label, name) in map {
            let c = b.parse_component(label)?;
            let e = parse_expression(self.lookup(name)?, b)?;
            if out.insert(c, e).is_some() {
                return Err(CliError::ModelFile(format!(
                    "component `{label}` given twice"
                )));
            }
        }
        Ok(out)
    }

    /// Builds the model; every failure here is an input error.
    pub fn into_model(self, order_bound: Option<usize>) -> Result<Model, CliError> {
        self.build(order_bound).map_err(|e| match e {
            CliError::Core(e) => CliError::ModelFile(e.to_string()),
            e => e,
        })
    }

    fn build(&self, order_bound: Option<usize>) -> Result<Model, CliError> {
        let b = self.bundle(order_bound)?;
        let lagrangian = match &self.lagrangian {
            Some(name) => Some(Density::new(parse_expression(self.lookup(name)?, &b)?)),
            None => None,
        };
        let source = match &self.source {
            Some(map) => Some(SourceEquation::new(&b, self.component_map(&b, map)?)?),
            None => None,
        };
        let mut syms = Vec::new();
        for (name, map) in &self.vectorfields {
            syms.push((
                name.clone(),
                EvolutionaryField::from_partial(&b, self.component_map(&b, map)?)?,
            ));
        }
        let name = self.name.clone().unwrap_or_else(|| "model".to_string());
        Ok(Model::new(
            &name,
            b,
            lagrangian,
            source,
            syms,
            self.notes.as_deref().unwrap_or(""),
        )?)
    }

    /// Model-file form of a model; expression names are derived from component labels.
    pub fn from_model(m: &Model) -> ModelFile {
        let b = &m.bundle;
        let mut expressions = BTreeMap::new();
        let lagrangian = m.lagrangian.as_ref().map(|l| {
            expressions.insert("L".to_string(), format_expression(&l.coeff, b));
            "L".to_string()
        });
        let source = m.source.as_ref().map(|t| {
            t.iter()
                .map(|(c, e)| {
                    let label = b.component_label(c);
                    let name = format!("T:{label}");
                    expressions.insert(name.clone(), format_expression(e, b));
                    (label, name)
                })
                .collect()
        });
        let mut vectorfields = BTreeMap::new();
        for (vname, v) in &m.known_symmetries {
            let mut comps = BTreeMap::new();
            for (c, e) in v.iter().filter(|(_, e)| !e.is_zero()) {
                let label = b.component_label(c);
                let name = format!("{vname}:{label}");
                expressions.insert(name.clone(), format_expression(e, b));
                comps.insert(label, name);
            }
            vectorfields.insert(vname.clone(), comps);
        }
        ModelFile {
            name: Some(m.name.clone()),
            dimension: b.dim(),
            fields: b
                .fields()
                .iter()
                .map(|f| FieldEntry {
                    name: f.name.clone(),
                    kind: f.kind.name().to_string(),
                    external: f.external,
                })
                .collect(),
            expressions,
            lagrangian,
            source,
            vectorfields,
            order_bound: (b.order_bound() != noether_core::DEFAULT_ORDER_BOUND)
                .then_some(b.order_bound()),
            notes: (!m.notes.is_empty()).then(|| m.notes.clone()),
        }
    }
}
