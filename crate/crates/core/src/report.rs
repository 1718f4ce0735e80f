//! Run manifests and plain-text renderings of the analysis reports.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::agreement::AgreementMatrix;
use crate::bounds::BoundsReport;
use crate::certify::{
    Certification, CertificationResult, CertificationStatus, Method, UpperStatistic,
};
use crate::sim::ConvergenceRow;
use crate::validate::{AssumptionReport, Verdict};

/// Provenance attached to every emitted report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub options: serde_json::Value,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` wins when set.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        inputs: Vec<String>,
        options: serde_json::Value,
        seed: Option<u64>,
    ) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
        Self {
            command: command.to_string(),
            inputs,
            options,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp,
        }
    }
}

/// A report body with its manifest alongside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<T> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: T,
}

/// Four decimals, or `<0` for negative scores.
pub fn format_score(score: f64) -> String {
    if score < 0.0 {
        "<0".to_string()
    } else {
        format!("{score:.4}")
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.digits$}"))
}

pub fn agreement_table(am: &AgreementMatrix) -> String {
    let width = am
        .annotator_ids()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(6);
    let mut s = format!("{:width$}", "");
    for id in am.annotator_ids() {
        let _ = write!(s, "  {id:>width$}");
    }
    s.push('\n');
    for (i, id) in am.annotator_ids().iter().enumerate() {
        let _ = write!(s, "{id:width$}");
        for j in 0..am.k() {
            let _ = write!(s, "  {:>width$.4}", am.value(i, j));
        }
        s.push('\n');
    }
    let _ = writeln!(s, "N = {}", am.n());
    s
}

/// Both upper bounds, the model's lower bound with
/// † (exceeds U^(e)) and ‡ (exceeds U^(t)) marks, and the margin.
pub fn bounds_table(report: &BoundsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:<24} {:>8}", "bound", "labeler", "score");
    let _ = writeln!(
        s,
        "{:<10} {:<24} {:>8.3}",
        "U_N(t)", "avg. annotator", report.u_theoretical
    );
    let _ = writeln!(
        s,
        "{:<10} {:<24} {:>8.3}",
        "U_N(e)", "avg. annotator", report.u_empirical
    );
    if let Some(l) = report.l_model {
        let mark = match (report.exceeds_empirical, report.exceeds_theoretical) {
            (_, Some(true)) => " ‡",
            (Some(true), _) => " †",
            _ => "",
        };
        let reference = report.reference_id.as_deref().unwrap_or("?");
        let _ = writeln!(
            s,
            "{:<10} {:<24} {:>8.3}{mark}",
            "L_N",
            format!("model vs {reference}"),
            l
        );
        let _ = writeln!(
            s,
            "margin L_N − U_N(e) = {:+.4}",
            report.margin.unwrap_or(f64::NAN)
        );
    }
    let _ = writeln!(
        s,
        "K = {}, N = {}, status = {:?}",
        report.k, report.n, report.status
    );
    s.push_str("† exceeds U_N(e); ‡ exceeds U_N(t)\n");
    s
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Hms => "HMS",
        Method::Oms => "OMS",
    }
}

/// One-paragraph human verdict.
pub fn verdict(result: &CertificationResult, upper: Option<UpperStatistic>) -> String {
    let statistic = match upper {
        Some(UpperStatistic::Theoretical) => " using U_N(t)",
        Some(UpperStatistic::Empirical) => " using U_N(e)",
        None => "",
    };
    let method = method_name(result.method);
    match result.status {
        CertificationStatus::Certified => format!(
            "certified: with confidence S = {} ({method}{statistic}, N = {}) the model's oracle accuracy exceeds the average annotator's by at least τ = {}. Nothing is claimed about the best annotator.",
            format_score(result.score.unwrap_or(f64::NAN)),
            result.n,
            result.tau
        ),
        CertificationStatus::Vacuous => format!(
            "not certified: margin is positive but S = {} ({method}{statistic}, N = {}); more samples are needed.",
            format_score(result.score.unwrap_or(f64::NAN)),
            result.n
        ),
        CertificationStatus::NotCertified => format!(
            "not certified: L_N = {:.4} does not exceed U_N + τ = {:.4}.",
            result.l_n,
            result.u_n + result.tau
        ),
        CertificationStatus::Refused => format!(
            "not certified: {}.",
            result.detail.as_deref().unwrap_or("split refused")
        ),
    }
}

pub fn certification_table(result: &CertificationResult, bounds: Option<&BoundsReport>) -> String {
    let mut s = String::new();
    if let Some(b) = bounds {
        s.push_str(&bounds_table(b));
        s.push('\n');
    }
    let _ = writeln!(s, "method  {}", method_name(result.method));
    let _ = writeln!(s, "L_N     {:.6}", result.l_n);
    let _ = writeln!(s, "U_N     {:.6}", result.u_n);
    let _ = writeln!(s, "N       {}", result.n);
    let _ = writeln!(s, "tau     {}", result.tau);
    let _ = writeln!(s, "t_u     {}", opt(result.t_u, 6));
    let _ = writeln!(s, "t_l     {}", opt(result.t_l, 6));
    let _ = writeln!(
        s,
        "delta_u {}",
        result
            .delta_u
            .map_or("undefined".into(), |d| format!("{d:.6e}"))
    );
    let _ = writeln!(
        s,
        "delta_l {}",
        result
            .delta_l
            .map_or("undefined".into(), |d| format!("{d:.6e}"))
    );
    let _ = writeln!(
        s,
        "S       {}",
        result.score.map_or("—".into(), format_score)
    );
    s
}

pub fn certify_report_table(c: &Certification) -> String {
    let mut s = certification_table(&c.result, Some(&c.bounds));
    s.push_str(&verdict(&c.result, Some(c.upper_statistic)));
    s.push('\n');
    s
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "VIOLATED",
        Verdict::Undefined => "undefined",
    }
}

/// Two-part layout: (a) positive correlation of annotators, pooled then per
/// pair; (b) model behaviour where the reference is wrong.
pub fn assumption_table(report: &AssumptionReport) -> String {
    let mut s = String::new();
    let pc = &report.positive_correlation;
    s.push_str("(a) P(l_i = l* | l_j = l*) >= P(l_i = l*), i != j\n");
    let _ = writeln!(
        s,
        "{:<14} {:>12} {:>12} {:>10} {:>10}",
        "pair", "conditional", "marginal", "support", "verdict"
    );
    let _ = writeln!(
        s,
        "{:<14} {:>12} {:>12.3} {:>10} {:>10}",
        "pooled",
        opt(pc.pooled.lhs, 3),
        pc.pooled.rhs,
        pc.pooled.support,
        verdict_name(pc.pooled.verdict)
    );
    for p in &pc.pairs {
        let _ = writeln!(
            s,
            "{:<14} {:>12} {:>12.3} {:>10} {:>10}",
            format!("{}|{}", p.i, p.j),
            opt(p.lhs, 3),
            p.rhs,
            p.support,
            verdict_name(p.verdict)
        );
    }
    s.push('\n');
    s.push_str("(b) P(l_b = l* | l_a != l*) >= sum over wrong labels of P(l_b = lx | l_a != l*)\n");
    match &report.lower_bound_check {
        Some(c) => {
            let _ = writeln!(
                s,
                "{:<14} {:>12} {:>12} {:>10} {:>10}",
                "model", "correct", "wrong (sum)", "support", "verdict"
            );
            let _ = writeln!(
                s,
                "{:<14} {:>12} {:>12} {:>10} {:>10}",
                format!("{} vs {}", c.model_id, c.reference_id),
                opt(c.lhs, 3),
                opt(c.rhs_sum, 3),
                c.support,
                verdict_name(c.verdict)
            );
        }
        None => s.push_str("no model column\n"),
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "average annotator oracle accuracy {:.4}",
        report.average_annotator_accuracy
    );
    let _ = writeln!(
        s,
        "reference oracle accuracy         {:.4}",
        report.reference_accuracy
    );
    if let Some(a) = report.model_accuracy {
        let _ = writeln!(s, "model oracle accuracy             {a:.4}");
    }
    s
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{:>4} {:>8} {:>8} {:>9} {:>9} {:>9}\n",
        "K", "u_t", "u_e", "l_strong", "l_weak", "mean_acc"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>4} {:>8.4} {:>8.4} {:>9} {:>9} {:>9.4}",
            r.k,
            r.u_t,
            r.u_e,
            r.l_strong.map_or("—".into(), |v| format!("{v:.4}")),
            r.l_weak.map_or("—".into(), |v| format!("{v:.4}")),
            r.mean_acc
        );
    }
    s
}
