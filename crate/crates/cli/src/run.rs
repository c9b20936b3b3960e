use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;

use clap::{Parser, Subcommand, ValueEnum};
use noether_core::catalog::{builtin_model, Model, MODEL_NAMES};
use noether_core::natural::{generalized_divergence, is_natural};
use noether_core::variational::{
    conserved_current, euler_lagrange, is_locally_variational, is_null_lagrangian, is_symmetry,
};
use noether_core::{format_expression, Error, Jets};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::model_file::ModelFile;

#[derive(Debug, Parser)]
#[command(
    name = "noether",
    version,
    about = "Exact variational calculus on jet bundles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Model file (JSON).
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// Built-in model name (see `list-models`).
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Vector field name for `symmetry` and `current`.
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,
    /// Maximum jet order admitted during the computation.
    #[arg(long, global = true)]
    pub order_bound: Option<usize>,
    /// Cancel the computation after this many seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Euler–Lagrange source equation of the model's Lagrangian.
    El,
    /// Decide whether the model's source equation is locally variational.
    CheckVariational,
    /// Decide whether the model's Lagrangian has vanishing Euler–Lagrange form.
    Null,
    /// Decide whether the vector field given by --field is a symmetry of the source.
    Symmetry,
    /// Conserved current of the symmetry given by --field.
    Current,
    /// Generalized divergence of the source equation.
    Divergence,
    /// Decide whether the source equation is natural.
    CheckNatural,
    /// List built-in models.
    ListModels,
    /// Print a built-in model in model-file format.
    ExportModel { name: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::El => "el",
            Command::CheckVariational => "check-variational",
            Command::Null => "null",
            Command::Symmetry => "symmetry",
            Command::Current => "current",
            Command::Divergence => "divergence",
            Command::CheckNatural => "check-natural",
            Command::ListModels => "list-models",
            Command::ExportModel { .. } => "export-model",
        }
    }
}

/// What a command produced: text lines, the JSON result, and whether a
/// verdict came out negative.
struct Outcome {
    lines: Vec<String>,
    result: Value,
    negative: bool,
}

impl Outcome {
    fn value(lines: Vec<String>, result: Value) -> Self {
        Outcome {
            lines,
            result,
            negative: false,
        }
    }

    fn verdict(key: &str, holds: bool) -> Self {
        Outcome {
            lines: vec![format!("{key}: {holds}")],
            result: json!({ key: holds }),
            negative: !holds,
        }
    }
}

fn load_model(cli: &Cli) -> Result<Model, CliError> {
    match (&cli.model, &cli.builtin) {
        (Some(path), None) => ModelFile::read(path)?.into_model(cli.order_bound),
        (None, Some(name)) => {
            let mut m = builtin_model(name)?;
            if let Some(k) = cli.order_bound {
                m.bundle = m.bundle.with_order_bound(k);
            }
            Ok(m)
        }
        _ => Err(CliError::Usage(
            "exactly one of --model FILE or --builtin NAME is required".into(),
        )),
    }
}

fn lagrangian(m: &Model) -> Result<&noether_core::Density, CliError> {
    m.lagrangian
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("model `{}` has no Lagrangian", m.name)))
}

fn field_arg<'a>(
    cli: &'a Cli,
    m: &'a Model,
) -> Result<(&'a str, &'a noether_core::EvolutionaryField), CliError> {
    let name = cli
        .field
        .as_deref()
        .ok_or_else(|| CliError::Usage("--field NAME is required".into()))?;
    let v = m.symmetry(name).ok_or_else(|| {
        let known: Vec<&str> = m.known_symmetries.iter().map(|(n, _)| n.as_str()).collect();
        CliError::Usage(format!(
            "model `{}` has no vector field `{name}` (known: {})",
            m.name,
            known.join(", ")
        ))
    })?;
    Ok((name, v))
}

fn execute(cli: &Cli, cancel: &AtomicBool) -> Result<(Option<String>, Outcome), CliError> {
    match &cli.command {
        Command::ListModels => {
            let lines: Vec<String> = MODEL_NAMES.iter().map(|s| s.to_string()).collect();
            return Ok((
                None,
                Outcome::value(lines, json!({ "models": MODEL_NAMES })),
            ));
        }
        Command::ExportModel { name } => {
            let m = builtin_model(name)?;
            let file =
                serde_json::to_value(ModelFile::from_model(&m)).expect("model file serializes");
            let text = serde_json::to_string_pretty(&file).expect("model file serializes");
            return Ok((Some(m.name), Outcome::value(vec![text], file)));
        }
        _ => {}
    }

    let m = load_model(cli)?;
    let b = &m.bundle;
    let jets = Jets::new(b).with_cancel(cancel);
    let fmt = |e: &noether_core::Expression| format_expression(e, b);
    let outcome = match &cli.command {
        Command::El => {
            let t = euler_lagrange(&jets, lagrangian(&m)?)?;
            let mut lines = Vec::new();
            let mut map = serde_json::Map::new();
            for (c, e) in t.iter() {
                let label = b.component_label(c);
                lines.push(format!("T[{label}] = {}", fmt(e)));
                map.insert(label, Value::String(fmt(e)));
            }
            Outcome::value(lines, json!({ "source": map }))
        }
        Command::CheckVariational => {
            let t = m.source_equation(&jets)?;
            Outcome::verdict("variational", is_locally_variational(&jets, &t)?)
        }
        Command::Null => Outcome::verdict("null", is_null_lagrangian(&jets, lagrangian(&m)?)?),
        Command::Symmetry => {
            let (_, v) = field_arg(cli, &m)?;
            let t = m.source_equation(&jets)?;
            Outcome::verdict("symmetry", is_symmetry(&jets, v, &t)?)
        }
        Command::Current => {
            let (_, v) = field_arg(cli, &m)?;
            let t = m.source_equation(&jets)?;
            match conserved_current(&jets, v, &t) {
                Ok(w) => {
                    let comps: Vec<String> = w.comps.iter().map(fmt).collect();
                    let lines = comps
                        .iter()
                        .enumerate()
                        .map(|(i, s)| format!("omega[{}] = {s}", i + 1))
                        .collect();
                    Outcome::value(lines, json!({ "current": comps }))
                }
                Err(Error::NotExact { residual }) => Outcome {
                    lines: vec![
                        "current: none".into(),
                        format!("residual = {}", fmt(&residual)),
                    ],
                    result: json!({ "current": Value::Null, "residual": fmt(&residual) }),
                    negative: true,
                },
                Err(e) => return Err(e.into()),
            }
        }
        Command::Divergence => {
            let t = m.source_equation(&jets)?;
            let div = generalized_divergence(&jets, &t)?;
            let comps: Vec<String> = div.comps.iter().map(fmt).collect();
            let lines = comps
                .iter()
                .enumerate()
                .map(|(i, s)| format!("Div[{}] = {s}", i + 1))
                .collect();
            Outcome::value(lines, json!({ "divergence": comps }))
        }
        Command::CheckNatural => {
            let t = m.source_equation(&jets)?;
            Outcome::verdict("natural", is_natural(&jets, &t)?)
        }
        Command::ListModels | Command::ExportModel { .. } => unreachable!(),
    };
    Ok((Some(m.name), outcome))
}

fn status(code: u8) -> &'static str {
    match code {
        0 => "ok",
        1 => "false",
        2 => "input-error",
        _ => "internal-error",
    }
}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: &Cli, cancel: &AtomicBool, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let model_name = cli
        .builtin
        .clone()
        .or_else(|| cli.model.as_ref().map(|p| p.display().to_string()));
    let (code, model, result, lines) = match execute(cli, cancel) {
        Ok((name, o)) => {
            let code = if o.negative { 1 } else { 0 };
            (code, name.or(model_name), o.result, Some(o.lines))
        }
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(err, "error: {e}");
            (code, model_name, json!({ "error": e.to_string() }), None)
        }
    };
    let written = match cli.output {
        Format::Text => lines.map_or(Ok(()), |ls| {
            ls.iter().try_for_each(|l| writeln!(out, "{l}"))
        }),
        Format::Json => {
            let doc = json!({
                "command": cli.command.name(),
                "model": model,
                "result": result,
                "status": status(code),
            });
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("output serializes")
            )
        }
    };
    if written.is_err() {
        return 2;
    }
    code
}
