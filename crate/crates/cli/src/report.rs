//! Versioned report document and JSON encodings of certificates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use mpdo_core::correspondence::StateCertificate;
use mpdo_core::decomp::RankInterval;
use mpdo_core::linalg::{CMat, RMat};
use mpdo_core::nonneg::{FactorCertificate, FactorPayload};
use mpdo_core::MpoTrain;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "mpdo-kit/1";

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

/// One reported quantity: an exact value or an interval, with an optional
/// reference into the report's certificate map.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Quantity {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Quantity {
    pub fn exact(name: &str, value: impl Into<Value>, certificate: &str) -> Self {
        Self {
            name: name.into(),
            value: Some(value.into()),
            certificate: Some(certificate.into()),
            ..Self::default()
        }
    }

    pub fn interval(name: &str, interval: RankInterval) -> Self {
        Self {
            name: name.into(),
            interval: Some([interval.lower, interval.upper]),
            ..Self::default()
        }
    }

    /// A measured or derived value that is not a rank claim.
    pub fn measured(name: &str, value: impl Into<Value>) -> Self {
        Self {
            name: name.into(),
            value: Some(value.into()),
            ..Self::default()
        }
    }

    pub fn skipped(name: &str, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            note: Some(note.into()),
            ..Self::default()
        }
    }

    pub fn with_certificate(mut self, certificate: &str) -> Self {
        self.certificate = Some(certificate.into());
        self
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = Some(residual);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timestamp {
    pub unix_ms: u128,
    pub runtime_ms: f64,
}

/// The machine-readable result of one invocation. Everything except
/// `timestamp` is a deterministic function of the inputs and the seed.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: String,
    pub status: String,
    pub input: Value,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub quantities: Vec<Quantity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub certificates: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub timestamp: Timestamp,
}

impl Report {
    pub fn new(command: &str, input: Value, parameters: Value, seed: Option<u64>) -> Self {
        Self {
            schema: SCHEMA,
            tool: Tool {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command: command.into(),
            status: "ok".into(),
            input,
            parameters,
            seed,
            quantities: Vec::new(),
            checks: Vec::new(),
            verdict: None,
            table: None,
            certificates: BTreeMap::new(),
            notes: Vec::new(),
            timestamp: Timestamp {
                unix_ms: 0,
                runtime_ms: 0.0,
            },
        }
    }

    pub fn stamp(&mut self, started: Instant) {
        self.timestamp = Timestamp {
            unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis()),
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        };
    }

    pub fn check(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            holds,
            detail: detail.into(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} [{}]", self.command, self.status);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "  seed: {seed}");
        }
        for q in &self.quantities {
            let shown = match (&q.value, &q.interval) {
                (Some(v), _) => v.to_string(),
                (None, Some([lo, hi])) => format!("[{lo}, {hi}]"),
                (None, None) => "-".into(),
            };
            let _ = write!(out, "  {:<28} {shown}", q.name);
            if let Some(c) = &q.certificate {
                let _ = write!(out, "  (certificate: {c})");
            }
            if let Some(r) = q.residual {
                let _ = write!(out, "  residual {r:.2e}");
            }
            if let Some(n) = &q.note {
                let _ = write!(out, "  {n}");
            }
            out.push('\n');
        }
        for c in &self.checks {
            let mark = if c.holds { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  [{mark}] {}: {}", c.name, c.detail);
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "  verdict: {v}");
        }
        if let Some(t) = &self.table {
            let _ = writeln!(out, "  {}", t.columns.join("\t"));
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(cell_text).collect();
                let _ = writeln!(out, "  {}", cells.join("\t"));
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.3e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn complex_matrix(m: &CMat) -> Value {
    let data: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

pub fn real_matrix(m: &RMat) -> Value {
    let data: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

pub fn train(t: &MpoTrain) -> Value {
    let cores: Vec<Value> = t
        .cores()
        .iter()
        .map(|c| {
            let data: Vec<[f64; 2]> = c.data().iter().map(|z| [z.re, z.im]).collect();
            json!({
                "shape": [c.left_dim(), c.out_dim(), c.in_dim(), c.right_dim()],
                "data": data,
            })
        })
        .collect();
    json!({ "bond_dims": t.bond_dims(), "cores": cores })
}

pub fn factor_certificate(cert: &FactorCertificate) -> Value {
    let payload = match &cert.payload {
        FactorPayload::Pair { a, b } => json!({ "a": complex_matrix(a), "b": complex_matrix(b) }),
        FactorPayload::PsdTuples { e, f } => json!({
            "e": e.iter().map(complex_matrix).collect::<Vec<_>>(),
            "f": f.iter().map(complex_matrix).collect::<Vec<_>>(),
        }),
        FactorPayload::Single { a } => json!({ "a": complex_matrix(a) }),
        FactorPayload::HadamardRoot { signs, root } => {
            json!({ "signs": signs, "root": real_matrix(root) })
        }
    };
    json!({
        "kind": cert.kind.as_str(),
        "inner_dim": cert.inner_dim,
        "residual": cert.residual,
        "payload": payload,
    })
}

pub fn state_certificate(state: &StateCertificate) -> Value {
    let inner = state.inner_dim().ok();
    let body = match state {
        StateCertificate::Mpo(t) => json!({ "train": train(t) }),
        StateCertificate::Separable(s) => json!({ "train": train(s.train()) }),
        StateCertificate::Purification(p) => json!({
            "train": train(&p.l),
            "osr_l": p.osr_l,
            "residual": p.residual,
        }),
        StateCertificate::SymmetricForm { locals, .. }
        | StateCertificate::SymmetricPurification { locals } => json!({
            "locals": locals.iter().map(complex_matrix).collect::<Vec<_>>(),
        }),
        StateCertificate::HermitianRoot(tau) => json!({ "tau": complex_matrix(tau.data()) }),
    };
    json!({ "type": state.name(), "inner_dim": inner, "body": body })
}
