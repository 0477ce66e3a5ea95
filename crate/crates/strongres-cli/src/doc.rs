//! Serialized forms of run artifacts. Polynomials are strings in the problem syntax and
//! rationals are `p/q` strings, so documents are exact.

use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub text: String,
    pub variables: Vec<String>,
    pub generators: Vec<String>,
    pub exceptional: Vec<String>,
    pub threshold: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterDoc {
    pub chart: usize,
    pub coordinates: Vec<String>,
}

/// One center of a step; steps blowing up several charts appear once per chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub index: usize,
    pub phase: String,
    pub level: usize,
    pub t_value: Option<String>,
    pub f_value: Option<String>,
    pub divisor: u32,
    pub center: CenterDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorDoc {
    pub divisor: u32,
    pub coordinate: String,
    pub birth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentDoc {
    pub divisor: u32,
    pub exponent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDoc {
    pub id: usize,
    pub parent: Option<usize>,
    pub pivot: Option<String>,
    pub created_at: Option<usize>,
    pub leaf: bool,
    pub variables: Vec<String>,
    pub exceptional: Vec<DivisorDoc>,
    pub to_root: Vec<String>,
    pub c_exponents: Option<Vec<ExponentDoc>>,
    pub weak_generators: Option<Vec<String>>,
    pub strict_transform_generators: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartReportDoc {
    pub chart: usize,
    pub factorization: bool,
    pub smooth: bool,
    pub normal_crossings: bool,
    pub weak_nonvanishing: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterImageDoc {
    pub step: usize,
    pub chart: usize,
    pub image: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongReportDoc {
    pub passed: bool,
    pub factorization: bool,
    pub smooth: bool,
    pub normal_crossings: bool,
    pub weak_nonvanishing: bool,
    pub relative_property: bool,
    pub rsing: Vec<String>,
    pub center_images: Vec<CenterImageDoc>,
    pub per_chart: Vec<ChartReportDoc>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoszulChartDoc {
    pub chart: usize,
    pub divisible: Vec<bool>,
    pub twists: Vec<Vec<ExponentDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongDoc {
    pub schema: u32,
    pub command: String,
    pub problem: ProblemDoc,
    pub codim: usize,
    pub regular_value: Option<String>,
    pub steps: Vec<StepDoc>,
    pub charts: Vec<ChartDoc>,
    pub report: StrongReportDoc,
    pub koszul: Option<Vec<KoszulChartDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalizeReportDoc {
    pub passed: bool,
    pub resolved: bool,
    pub monomial: bool,
    pub centers_inside_input: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalizeDoc {
    pub schema: u32,
    pub command: String,
    pub problem: ProblemDoc,
    pub steps: Vec<StepDoc>,
    pub charts: Vec<ChartDoc>,
    pub report: PrincipalizeReportDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanionDoc {
    pub generators: Vec<String>,
    pub b: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactDoc {
    pub coordinate: String,
    pub divisor: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartLevelDoc {
    pub chart: usize,
    pub object: Vec<String>,
    pub order: u32,
    pub n: u32,
    pub sing: Vec<String>,
    pub w_locus: Vec<String>,
    pub t_locus: Option<Vec<String>>,
    pub hypersurface: Option<String>,
    pub companion: Option<CompanionDoc>,
    pub contact: Option<ContactDoc>,
    pub gamma: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDoc {
    pub depth: usize,
    pub dim: usize,
    pub b: u32,
    pub max_w_ord: String,
    pub t: String,
    pub e_minus: Vec<u32>,
    pub terminal: Option<String>,
    pub charts: Vec<ChartLevelDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDoc {
    pub point: Vec<String>,
    pub f_value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsDoc {
    pub schema: u32,
    pub command: String,
    pub problem: ProblemDoc,
    pub f_value: String,
    pub max_locus: Vec<String>,
    pub center: Vec<CenterDoc>,
    pub levels: Vec<LevelDoc>,
    pub samples: Vec<SampleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub reason: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub schema: u32,
    pub command: String,
    pub problem: Option<ProblemDoc>,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub name: String,
    pub passed: bool,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub schema: u32,
    pub command: String,
    pub passed: bool,
    pub checks: Vec<CheckDoc>,
}
