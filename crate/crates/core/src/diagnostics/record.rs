use std::collections::BTreeMap;
use std::fmt;

/// Absolute part of the global slack applied when judging margins.
pub const SLACK_ABS: f64 = 1e-8;
/// Relative part of the global slack.
pub const SLACK_REL: f64 = 1e-6;

/// Signed distance `rhs − lhs` of an inequality `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub value: f64,
    /// Magnitude used for the relative slack, `max(|lhs|, |rhs|)`.
    pub scale: f64,
    /// Informational margins are recorded but never fail a run.
    pub asserted: bool,
}

impl Margin {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            value: rhs - lhs,
            scale: lhs.abs().max(rhs.abs()),
            asserted: true,
        }
    }

    pub fn informational(lhs: f64, rhs: f64) -> Self {
        Self {
            asserted: false,
            ..Self::new(lhs, rhs)
        }
    }

    /// True when the inequality holds up to the global slack.
    pub fn holds(&self) -> bool {
        self.value >= -(SLACK_ABS + SLACK_REL * self.scale)
    }
}

/// Named metrics and inequality margins produced by one check.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub source: String,
    pub metrics: BTreeMap<String, f64>,
    pub margins: BTreeMap<String, Margin>,
}

impl DiagnosticsRecord {
    pub fn new(source: impl Into<String>, time: f64) -> Self {
        Self {
            time,
            source: source.into(),
            metrics: BTreeMap::new(),
            margins: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.metrics.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    /// Records `lhs ≤ rhs` under `name`, also storing the margin as a metric.
    pub fn check(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) -> &mut Self {
        self.insert_margin(name.into(), Margin::new(lhs, rhs))
    }

    pub fn inform(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) -> &mut Self {
        self.insert_margin(name.into(), Margin::informational(lhs, rhs))
    }

    fn insert_margin(&mut self, name: String, m: Margin) -> &mut Self {
        self.metrics.insert(format!("margin_{name}"), m.value);
        self.margins.insert(name, m);
        self
    }

    pub fn margin(&self, name: &str) -> Option<Margin> {
        self.margins.get(name).copied()
    }

    /// Names of asserted margins that fail under the global slack.
    pub fn failures(&self) -> Vec<String> {
        self.margins
            .iter()
            .filter(|(_, m)| m.asserted && !m.holds())
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn passes(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.metrics.values().all(|v| v.is_finite())
    }

    /// Copies every entry of `other` under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: &DiagnosticsRecord) {
        for (k, v) in &other.metrics {
            self.metrics.insert(format!("{prefix}.{k}"), *v);
        }
        for (k, m) in &other.margins {
            self.margins.insert(format!("{prefix}.{k}"), *m);
        }
    }
}

impl fmt::Display for DiagnosticsRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] t = {}", self.source, self.time)?;
        for (k, v) in &self.metrics {
            writeln!(f, "  {k} = {v:.6e}")?;
        }
        for (k, m) in &self.margins {
            let verdict = match (m.asserted, m.holds()) {
                (false, _) => "info",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            writeln!(f, "  {verdict} {k}: margin {:.6e}", m.value)?;
        }
        Ok(())
    }
}
