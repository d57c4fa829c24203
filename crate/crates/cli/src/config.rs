//! Run configuration: what the command line parses into, and what
//! `--config` files contain.

use clap::{Args, Subcommand, ValueEnum};
use isochrone::potential::{make_family, FamilyParams};
use isochrone::{PotentialSpec, Result, TruncSeries};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// One complete run. Round-trips through JSON exactly; unknown keys are errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    /// Write here instead of stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Families,
    Period(PeriodArgs),
    Certify(CertifyArgs),
    Involution(InvolutionArgs),
    Series(SeriesArgs),
    Wkb(WkbArgs),
    Oracle(OracleArgs),
    Compare(CompareArgs),
}

/// Potential descriptor: a catalog id plus optional parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct PotentialArg {
    /// Catalog id (see `families`).
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Upper end of the `G` range for families defined through `P(G)`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_max: Option<f64>,
    /// Exact coefficients `c₀, c₁, …` of `G(x)` for the `series` family.
    #[arg(long = "series-coeffs", value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<String>>,
}

impl PotentialArg {
    pub fn build(&self) -> Result<PotentialSpec> {
        let coeffs = match &self.coeffs {
            Some(cs) => Some(TruncSeries::from_strings(cs)?),
            None => None,
        };
        let params = FamilyParams {
            alpha: self.alpha,
            beta: self.beta,
            a: self.a,
            b: self.b,
            c: self.c,
            g_max: self.g_max,
            coeffs,
        };
        make_family(&self.family, &params)
    }
}

/// Log-spaced energy grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct EnergyArgs {
    #[arg(long, default_value_t = 0.05)]
    pub emin: f64,
    #[arg(long, default_value_t = 2.0)]
    pub emax: f64,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct PeriodArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[command(flatten)]
    pub energies: EnergyArgs,
    /// Add a column with the ODE-integrated period.
    #[arg(long)]
    #[serde(default)]
    pub ode: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Criterion ids or numerals (i–v); all five when omitted.
    #[arg(long = "criterion", value_delimiter = ',')]
    #[serde(default)]
    pub criteria: Vec<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub energies: EnergyArgs,
    /// Sample at these points instead of the turning points of the energy grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    /// Exit with status 2 when any verdict is NotIsochronous.
    #[arg(long)]
    #[serde(default)]
    pub expect_isochronous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct InvolutionArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub points: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct SeriesArgs {
    #[command(subcommand)]
    pub op: SeriesOp,
}

/// Exact series recursions. Coefficients are rationals such as `1`, `-3/4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Subcommand)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeriesOp {
    /// Odd force coefficients a3, a5, … from even ones a2, a4, ….
    OddFromEven {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        coeffs: Vec<String>,
    },
    /// Potential series G(x) from the coefficients b0, b1, … of d/dx[G/g²] in G.
    GFromF {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        coeffs: Vec<String>,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// h(X) = X/g − 1 for a potential series c0, c1, c2, … (c2 = 1/2).
    UrabeH {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        coeffs: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    #[default]
    Direct,
    Abel,
}

impl From<RouteArg> for isochrone::wkb::Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Direct => isochrone::wkb::Route::Direct,
            RouteArg::Abel => isochrone::wkb::Route::Abel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct WkbArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// 0, 2 or 4.
    #[arg(long, default_value_t = 4)]
    pub order: u8,
    /// Number of levels, n = 0 … levels − 1.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
    #[serde(default)]
    pub route: RouteArg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Intervals on the coarse grid.
    #[arg(long, default_value_t = 4000)]
    pub grid: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hi: Option<f64>,
    /// Skip the N/2N extrapolation.
    #[arg(long)]
    #[serde(default)]
    pub no_richardson: bool,
}

impl OracleArgs {
    pub fn settings(&self) -> isochrone::schrodinger::OracleSettings {
        isochrone::schrodinger::OracleSettings {
            hbar: self.hbar,
            levels: self.levels,
            grid: self.grid,
            e_max: self.e_max,
            margin: self.margin,
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            richardson: !self.no_richardson,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema, Args)]
#[serde(deny_unknown_fields)]
pub struct CompareArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 4)]
    pub order: u8,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, default_value_t = 4000)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
    #[serde(default)]
    pub route: RouteArg,
}

/// JSON schema of [`RunConfig`], pretty-printed.
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(RunConfig);
    serde_json::to_string_pretty(&schema).expect("schema serialises")
}
