//! Building risk functionals from command-line flags and parameter files.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use riskcal::measures::{
    alpha_meu_ce, expected_transformed_loss, lambda_var, parse_measure, rdeu_ce, two_level_lambda_var, AcceptanceSet,
    AlphaMeuParams, EligibleAsset, LambdaFn, LambdaMode, QSpec, RdeuParams, ScalarFn, Side,
};
use riskcal::prob::ScenarioTable;
use riskcal::{FiniteSpace, Result, RiskError, RiskFunctional, Rv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Kind {
    LambdaVar,
    TwoLevel,
    AlphaMeu,
    Rdeu,
    TransformedLoss,
    EligibleAsset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Primal,
    InfEnvelope,
    SupEnvelope,
}

impl From<ModeArg> for LambdaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Primal => LambdaMode::Primal,
            ModeArg::InfEnvelope => LambdaMode::InfEnvelope,
            ModeArg::SupEnvelope => LambdaMode::SupEnvelope,
        }
    }
}

/// Selects a measure either by shorthand or by kind plus parameter files.
#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    /// Shorthand `kind:params`: var:t, es:t, mean, entropic:g, capped_mean:c, two_level:a:b:z, put_premium.
    #[arg(long, conflicts_with_all = ["kind", "lambda", "params"])]
    pub measure: Option<String>,
    /// Structured measure kind; parameters come from --lambda or --params.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// LambdaFn JSON file: {"breakpoints": [...], "values": [...]}.
    #[arg(long)]
    pub lambda: Option<PathBuf>,
    /// JSON parameter file for two_level, alpha_meu, rdeu, transformed_loss and eligible_asset.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Evaluation route for lambda_var.
    #[arg(long, value_enum, default_value = "primal")]
    pub mode: ModeArg,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoLevelParams {
    alpha: f64,
    beta: f64,
    z: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformedLossParams {
    f: ScalarFn,
    side: Side,
    #[serde(default = "reference")]
    q: QSpec,
}

fn reference() -> QSpec {
    QSpec::Reference
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EligibleParams {
    accept: AcceptanceSet,
    s0: f64,
    st: Vec<f64>,
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(RiskError::Input(msg.into()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

impl MeasureArgs {
    /// Builds the measure; `space` pins measures whose parameters live on a fixed space.
    pub fn build(&self, space: Option<&FiniteSpace>) -> Result<RiskFunctional> {
        if let Some(s) = &self.measure {
            return parse_measure(s);
        }
        let Some(kind) = self.kind else {
            return usage("one of --measure or --kind is required");
        };
        if kind == Kind::LambdaVar {
            if self.params.is_some() {
                return usage("lambda_var takes --lambda, not --params");
            }
            let Some(path) = &self.lambda else {
                return usage("lambda_var needs --lambda");
            };
            let lam: LambdaFn = read_json(path)?;
            return Ok(lambda_var(lam, self.mode.into()));
        }
        if self.lambda.is_some() {
            return usage("--lambda applies only to lambda_var");
        }
        let Some(path) = &self.params else {
            return usage(format!("{} needs --params", kind.to_possible_value().unwrap().get_name()));
        };
        match kind {
            Kind::LambdaVar => unreachable!(),
            Kind::TwoLevel => {
                let p: TwoLevelParams = read_json(path)?;
                two_level_lambda_var(p.alpha, p.beta, p.z)
            }
            Kind::AlphaMeu => alpha_meu_ce(read_json::<AlphaMeuParams>(path)?, space),
            Kind::Rdeu => rdeu_ce(read_json::<RdeuParams>(path)?),
            Kind::TransformedLoss => {
                let p: TransformedLossParams = read_json(path)?;
                expected_transformed_loss(p.f, p.side, p.q, space)
            }
            Kind::EligibleAsset => {
                let p: EligibleParams = read_json(path)?;
                let space = match space {
                    Some(s) => s.clone(),
                    None => FiniteSpace::uniform(p.st.len()),
                };
                let st = Rv::new(space, p.st)?;
                Ok(EligibleAsset::new(p.accept, p.s0, st)?.to_functional())
            }
        }
    }
}

/// A scenario file plus the column to use.
#[derive(Debug, Clone, Args)]
pub struct VariableArgs {
    /// Scenario CSV: first column `prob`, then one column per variable.
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Column to evaluate; optional when the file has a single variable.
    #[arg(long)]
    pub var: Option<String>,
}

impl VariableArgs {
    pub fn load(&self) -> Result<(String, Rv)> {
        let table = ScenarioTable::from_path(&self.scenarios)?;
        pick(&table, self.var.as_deref())
    }
}

pub fn pick(table: &ScenarioTable, var: Option<&str>) -> Result<(String, Rv)> {
    match var {
        Some(name) => Ok((name.to_string(), table.column(name)?.clone())),
        None if table.names().len() == 1 => Ok((table.names()[0].clone(), table.columns()[0].clone())),
        None => usage("the scenario file has several variables; choose one with --var"),
    }
}
