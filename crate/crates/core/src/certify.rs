//! Hoeffding certificates and confidence scores for out-performance.
//!
//! Given the sample upper bound `u_n` on the average annotator's oracle
//! accuracy and the sample lower bound `l_n` on the model's, any split of
//! the margin into slacks `t_u, t_l ≥ 0` with
//!
//! ```text
//! l_n − t_l − sqrt(t_u + u_n²) = τ
//! ```
//!
//! certifies that the model beats the average annotator by at least τ with
//! probability at least `S = 1 − exp(−2n·t_u²) − exp(−2n·t_l²)`.
//!
//! Two ways of choosing the split are provided: [`confidence_hms`] gives
//! half the margin to `t_u`; [`confidence_oms`] starts there and runs
//! projected gradient ascent on `S(t_u)`, keeping the best iterate.

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, AggregationRule};
use crate::bounds::{bounds_report, BoundsReport};
use crate::data::{AnnotationMatrix, LabelColumn};
use crate::error::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;
pub const DEFAULT_ITERATIONS: usize = 100;

/// `exp(−2·n·t²)`: the Hoeffding tail bound for a mean of n variables in
/// [0, 1] deviating by at least t.
pub fn hoeffding_delta(n: u64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "slack must be a finite non-negative number, got {t}"
        )));
    }
    Ok((-2.0 * n as f64 * t * t).exp())
}

/// A bound that fails with probability at most `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub bound: f64,
    pub delta: f64,
}

/// With probability ≥ 1 − δ_u the average annotator's oracle accuracy is
/// at most `sqrt(t_u + u_n²)`.
pub fn sample_upper_certificate(u_n: f64, n: u64, t_u: f64) -> Result<Certificate> {
    let delta = hoeffding_delta(n, t_u)?;
    Ok(Certificate {
        bound: (t_u + u_n * u_n).sqrt(),
        delta,
    })
}

/// With probability ≥ 1 − δ_l the model's oracle accuracy is at least
/// `l_n − t_l`.
pub fn sample_lower_certificate(l_n: f64, n: u64, t_l: f64) -> Result<Certificate> {
    let delta = hoeffding_delta(n, t_l)?;
    Ok(Certificate {
        bound: l_n - t_l,
        delta,
    })
}

/// The one-parameter family of margin splits for fixed `(l_n, u_n, n, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginSplit {
    pub l_n: f64,
    pub u_n: f64,
    pub n: u64,
    pub tau: f64,
}

impl MarginSplit {
    pub fn new(l_n: f64, u_n: f64, n: u64, tau: f64) -> Result<Self> {
        for (name, v) in [("L_N", l_n), ("U_N", u_n)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "τ must be a finite non-negative number, got {tau}"
            )));
        }
        if n == 0 {
            return Err(Error::NoSamples);
        }
        Ok(Self { l_n, u_n, n, tau })
    }

    /// `l_n − τ − u_n`: positive iff some split exists.
    pub fn margin(&self) -> f64 {
        self.l_n - self.tau - self.u_n
    }

    /// Largest `t_u` keeping `t_l ≥ 0`.
    pub fn max_t_u(&self) -> f64 {
        let top = self.l_n - self.tau;
        top * top - self.u_n * self.u_n
    }

    pub fn t_l(&self, t_u: f64) -> f64 {
        self.l_n - self.tau - (t_u + self.u_n * self.u_n).sqrt()
    }

    pub fn score(&self, t_u: f64) -> f64 {
        let n = self.n as f64;
        let t_l = self.t_l(t_u);
        1.0 - (-2.0 * n * t_u * t_u).exp() - (-2.0 * n * t_l * t_l).exp()
    }

    /// dS/dt_u = 4n·t_u·δ_u − 4n·t_l·δ_l / (2·sqrt(t_u + u_n²)).
    pub fn gradient(&self, t_u: f64) -> f64 {
        let n = self.n as f64;
        let root = (t_u + self.u_n * self.u_n).sqrt();
        let t_l = self.l_n - self.tau - root;
        let delta_u = (-2.0 * n * t_u * t_u).exp();
        let delta_l = (-2.0 * n * t_l * t_l).exp();
        4.0 * n * t_u * delta_u - 4.0 * n * t_l * delta_l / (2.0 * root)
    }

    fn project(&self, t_u: f64) -> f64 {
        t_u.clamp(0.0, self.max_t_u())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hms,
    Oms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificationStatus {
    /// Positive margin and a positive confidence score.
    Certified,
    /// Positive margin, but the sample is too small for a useful score
    /// (S ≤ 0; printed as `<0`).
    Vacuous,
    /// Margin `L_N − τ − U_N ≤ 0`.
    NotCertified,
    /// Positive margin that the half-split cannot realise with `t_l ≥ 0`.
    Refused,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub t_u: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub method: Method,
    pub status: CertificationStatus,
    pub t_u: Option<f64>,
    pub t_l: Option<f64>,
    pub tau: f64,
    pub delta_u: Option<f64>,
    pub delta_l: Option<f64>,
    pub score: Option<f64>,
    pub n: u64,
    pub l_n: f64,
    pub u_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
}

impl CertificationResult {
    fn unscored(
        split: &MarginSplit,
        method: Method,
        status: CertificationStatus,
        detail: String,
    ) -> Self {
        Self {
            method,
            status,
            t_u: None,
            t_l: None,
            tau: split.tau,
            delta_u: None,
            delta_l: None,
            score: None,
            n: split.n,
            l_n: split.l_n,
            u_n: split.u_n,
            detail: Some(detail),
            trace: None,
        }
    }

    fn scored(split: &MarginSplit, method: Method, t_u: f64) -> Result<Self> {
        let t_l = split.t_l(t_u);
        let delta_u = hoeffding_delta(split.n, t_u)?;
        let delta_l = hoeffding_delta(split.n, t_l)?;
        let score = 1.0 - delta_u - delta_l;
        let status = if score > 0.0 {
            CertificationStatus::Certified
        } else {
            CertificationStatus::Vacuous
        };
        Ok(Self {
            method,
            status,
            t_u: Some(t_u),
            t_l: Some(t_l),
            tau: split.tau,
            delta_u: Some(delta_u),
            delta_l: Some(delta_l),
            score: Some(score),
            n: split.n,
            l_n: split.l_n,
            u_n: split.u_n,
            detail: None,
            trace: None,
        })
    }

    /// `|l_n − t_l − sqrt(t_u + u_n²) − τ|`, when a split was chosen.
    pub fn constraint_residual(&self) -> Option<f64> {
        let (t_u, t_l) = (self.t_u?, self.t_l?);
        Some((self.l_n - t_l - (t_u + self.u_n * self.u_n).sqrt() - self.tau).abs())
    }
}

fn margin_gate(split: &MarginSplit, method: Method) -> Option<CertificationResult> {
    (split.margin() <= 0.0).then(|| {
        CertificationResult::unscored(
            split,
            method,
            CertificationStatus::NotCertified,
            format!(
                "margin L_N − τ − U_N = {:.6} is not positive; no out-performance certificate",
                split.margin()
            ),
        )
    })
}

/// Half of the margin goes to `t_u`, the rest (through the constraint) to
/// `t_l`.
pub fn confidence_hms(l_n: f64, u_n: f64, n: u64, tau: f64) -> Result<CertificationResult> {
    let split = MarginSplit::new(l_n, u_n, n, tau)?;
    if let Some(refused) = margin_gate(&split, Method::Hms) {
        return Ok(refused);
    }
    let t_u = split.margin() / 2.0;
    if split.t_l(t_u) < 0.0 {
        return Ok(CertificationResult::unscored(
            &split,
            Method::Hms,
            CertificationStatus::Refused,
            "half split makes t_l negative (L_N − τ + U_N < 1/2)".into(),
        ));
    }
    CertificationResult::scored(&split, Method::Hms, t_u)
}

/// Projected fixed-step gradient ascent on `S(t_u)` from the HMS split,
/// returning the best iterate seen (so never worse than HMS when HMS is
/// feasible).
pub fn confidence_oms(
    l_n: f64,
    u_n: f64,
    n: u64,
    tau: f64,
    learning_rate: f64,
    iterations: usize,
) -> Result<CertificationResult> {
    let split = MarginSplit::new(l_n, u_n, n, tau)?;
    if !learning_rate.is_finite() || learning_rate <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive, got {learning_rate}"
        )));
    }
    if let Some(refused) = margin_gate(&split, Method::Oms) {
        return Ok(refused);
    }
    if split.max_t_u() <= 0.0 {
        return Err(Error::InvalidParameter("empty feasible set for t_u".into()));
    }

    let mut t_u = split.project(split.margin() / 2.0);
    let mut best = (t_u, split.score(t_u));
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(TraceStep {
        iteration: 0,
        t_u,
        score: best.1,
    });
    for iteration in 1..=iterations {
        t_u = split.project(t_u + learning_rate * split.gradient(t_u));
        let score = split.score(t_u);
        trace.push(TraceStep {
            iteration,
            t_u,
            score,
        });
        if score > best.1 {
            best = (t_u, score);
        }
    }

    let mut result = CertificationResult::scored(&split, Method::Oms, best.0)?;
    result.trace = Some(trace);
    Ok(result)
}

/// Certification parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub method: Method,
    pub tau: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub aggregation: AggregationRule,
    pub upper: UpperStatistic,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            method: Method::Hms,
            tau: 0.0,
            learning_rate: DEFAULT_LEARNING_RATE,
            iterations: DEFAULT_ITERATIONS,
            aggregation: AggregationRule::default(),
            upper: UpperStatistic::Empirical,
        }
    }
}

/// Which sample upper bound plays the role of `U_N` in the certificate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperStatistic {
    /// Off-diagonal average. Tighter; the usual choice in practice.
    #[default]
    Empirical,
    /// Diagonal-included average. The statistic the Hoeffding argument is
    /// stated for; stricter.
    Theoretical,
}

/// Certificate from summary values, no dataset involved.
pub fn certify_values(
    l_n: f64,
    u_n: f64,
    n: u64,
    options: &CertifyOptions,
) -> Result<CertificationResult> {
    match options.method {
        Method::Hms => confidence_hms(l_n, u_n, n, options.tau),
        Method::Oms => confidence_oms(
            l_n,
            u_n,
            n,
            options.tau,
            options.learning_rate,
            options.iterations,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub bounds: BoundsReport,
    pub upper_statistic: UpperStatistic,
    pub result: CertificationResult,
}

/// Aggregate → upper bound → lower bound → margin check → confidence score.
pub fn certify(
    m: &AnnotationMatrix,
    model: &LabelColumn,
    options: &CertifyOptions,
) -> Result<Certification> {
    let reference = aggregate(m, &options.aggregation)?;
    certify_against(
        m,
        model,
        &reference,
        Some(&options.aggregation.describe()),
        options,
    )
}

/// As [`certify`] with an explicit reference column.
pub fn certify_against(
    m: &AnnotationMatrix,
    model: &LabelColumn,
    reference: &LabelColumn,
    aggregation: Option<&str>,
    options: &CertifyOptions,
) -> Result<Certification> {
    let bounds = bounds_report(m, Some(model), reference, aggregation)?;
    let l_n = bounds
        .l_model
        .ok_or_else(|| Error::Invariant("lower bound missing with a model column".into()))?;
    let u_n = match options.upper {
        UpperStatistic::Empirical => bounds.u_empirical,
        UpperStatistic::Theoretical => bounds.u_theoretical,
    };
    let result = certify_values(l_n, u_n, m.n_samples() as u64, options)?;
    if let Some(residual) = result.constraint_residual() {
        if residual > 1e-9 {
            return Err(Error::Invariant(format!(
                "margin constraint residual {residual:e} exceeds 1e-9"
            )));
        }
    }
    Ok(Certification {
        bounds,
        upper_statistic: options.upper,
        result,
    })
}
