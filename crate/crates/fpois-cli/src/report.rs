//! Deterministic reports: identical job specs (including seeds) produce
//! byte-identical stdout. Timing goes to stderr so it never perturbs golden
//! files.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub residual: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputBlock {
    pub name: String,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub dimension: usize,
    pub truncation_order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<OutputBlock>,
    pub checks: Vec<CheckLine>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, dimension: usize, truncation_order: usize) -> Report {
        Report {
            command: command.to_string(),
            dimension,
            truncation_order,
            seed: None,
            outputs: Vec::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push_output(&mut self, name: &str, lines: Vec<String>) {
        self.outputs.push(OutputBlock {
            name: name.to_string(),
            lines,
        });
    }

    pub fn push_check(&mut self, name: &str, pass: bool, residual: String) {
        if !pass {
            self.pass = false;
        }
        self.checks.push(CheckLine {
            name: name.to_string(),
            pass,
            residual,
        });
    }

    pub fn extend_checks(&mut self, items: &[fpois::courant::CheckItem]) {
        for c in items {
            self.push_check(&c.name, c.pass, c.residual.clone());
        }
    }

    /// Keep only the named checks; `pass` is recomputed over the survivors.
    pub fn filter_checks(&mut self, names: &[String]) {
        if names.is_empty() {
            return;
        }
        self.checks.retain(|c| names.contains(&c.name));
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("dimension: {}\n", self.dimension));
        out.push_str(&format!("truncation order: {}\n", self.truncation_order));
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {seed}\n"));
        }
        for block in &self.outputs {
            out.push_str(&format!("-- {} --\n", block.name));
            for line in &block.lines {
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("-- checks --\n");
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {} residual={}\n", c.name, c.residual));
        }
        out.push_str(&format!(
            "result: {}\n",
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }

    pub fn render_structured(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Render a formal series of displayable coefficients as per-order lines.
pub fn series_lines<T: fpois::series::Coeff + std::fmt::Display>(
    series: &fpois::series::FormalSeries<T>,
    is_zero: impl Fn(&T) -> bool,
) -> Vec<String> {
    let mut lines = Vec::new();
    for (k, c) in series.coeffs().iter().enumerate() {
        if !is_zero(c) {
            lines.push(format!("order {k}: {c}"));
        }
    }
    if lines.is_empty() {
        lines.push("0".to_string());
    }
    lines
}
