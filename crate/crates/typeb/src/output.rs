//! Serializable result documents and their CSV renderings.

use serde::{Deserialize, Serialize};
use typeb_core::clt::ConvergenceRow;
use typeb_core::poly::IntPoly;

use crate::manifest::RunManifest;

/// One monomial `coeff * x^e1 * y^e2`. `e2` is absent for one-variable
/// families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRow {
    pub e1: u32,
    pub e2: Option<u32>,
    pub coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsDoc {
    pub manifest: RunManifest,
    pub family: String,
    pub order: usize,
    /// Variable names for `e1` and `e2`.
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Sorted monomials of `poly`; `univariate` drops the second exponent.
pub fn term_rows(poly: &IntPoly, univariate: bool) -> Vec<TermRow> {
    let mut rows: Vec<TermRow> = poly
        .terms()
        .map(|(e1, e2, &c)| TermRow {
            e1,
            e2: (!univariate).then_some(e2),
            coeff: c,
        })
        .collect();
    rows.sort_by_key(|r| (r.e1, r.e2));
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub moment: Option<f64>,
    pub limit: f64,
    pub abs_error: Option<f64>,
    pub expected_moment: Option<f64>,
    /// Binding capacity limit when the row was refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl From<&ConvergenceRow> for CltRow {
    fn from(r: &ConvergenceRow) -> Self {
        Self {
            seed: r.seed,
            n: r.n,
            moment: r.moment,
            limit: r.limit,
            abs_error: r.abs_error,
            expected_moment: r.expected_moment,
            skipped: r.skipped.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltDoc {
    pub manifest: RunManifest,
    pub rows: Vec<CltRow>,
}

pub const CLT_CSV_HEADER: [&str; 6] = ["seed", "N", "moment", "limit", "abs_error", "expected_moment"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub manifest: RunManifest,
    pub pass: bool,
    pub items: Vec<CheckItem>,
}

impl CheckDoc {
    pub fn new(manifest: RunManifest, items: Vec<CheckItem>) -> Self {
        let pass = items.iter().all(|i| i.pass);
        Self { manifest, pass, items }
    }

    /// Fixed-width text table, one line per item.
    pub fn table(&self) -> String {
        let width = self.items.iter().map(|i| i.name.len()).max().unwrap_or(4).max(5);
        let mut out = format!("{:<width$}  {:<6}  {:>12}  {:>12}  detail\n", "check", "result", "value", "threshold");
        for i in &self.items {
            out.push_str(&format!(
                "{:<width$}  {:<6}  {:>12.4e}  {:>12.4e}  {}\n",
                i.name,
                if i.pass { "PASS" } else { "FAIL" },
                i.value,
                i.threshold,
                i.detail
            ));
        }
        out.push_str(if self.pass { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }
}

/// Formats `v` with 15 significant digits, trailing zeros trimmed.
pub fn fmt_sig15(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".to_owned() } else { v.to_string() };
    }
    let sci = format!("{v:.14e}");
    let (mant, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Float cell for CSV: shortest round-trip representation, or empty.
pub fn float_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}
