//! Report structures and their pretty, JSON and CSV renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;

use wfusion::fusion::{DenseFusion, OutcomeClass, OutcomeDistribution, Pattern, Residual};
use wfusion::planner::{ComparisonRow, CostReport, Estimate};
use wfusion::pswap::{self, GateAccounting, GateVerification, BASIS};
use wfusion::rational::{self, describe, sig6, to_f64, Rational};
use wfusion::{Amplitude, Scalar};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
    Csv,
}

/// How a backend's scalars are written out.
pub trait Show {
    /// Exact text for the exact backend, six significant digits otherwise.
    fn text(&self) -> String;
    fn value(&self) -> f64;
    /// Text with any friendlier closed form appended.
    fn pretty(&self) -> String {
        self.text()
    }
}

impl Show for Amplitude {
    fn text(&self) -> String {
        self.to_string()
    }

    fn value(&self) -> f64 {
        self.to_f64()
    }

    fn pretty(&self) -> String {
        // c·√2 with c = 1/(2k) reads better as 1/(k√2)
        let c = self.coefficient(2);
        if self.terms().count() == 1 && c > Rational::from_integer(0.into()) {
            let k = (c.clone() * rational::int(2)).recip();
            if k.is_integer() {
                let k = if k == rational::int(1) { String::new() } else { k.to_string() };
                return format!("1/({k}√2)");
            }
        }
        self.text()
    }
}

impl Show for Complex64 {
    fn text(&self) -> String {
        if self.im.abs() <= wfusion::scalar::FLOAT_ZERO {
            sig6(self.re)
        } else {
            format!("{}{:+}i", sig6(self.re), sig6(self.im))
        }
    }

    fn value(&self) -> f64 {
        self.re
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

// gate-verify / gate-table3

#[derive(Serialize)]
pub struct ScalarEntry {
    pattern: String,
    proportional: bool,
    scalar: Option<String>,
    value: Option<f64>,
    #[serde(skip)]
    pretty: Option<String>,
}

#[derive(Serialize)]
pub struct TableRow {
    pattern: String,
    basis_input: String,
    coincidence_probs: [String; 4],
    coincidence_values: [f64; 4],
}

#[derive(Serialize)]
pub struct GateReport {
    schema: &'static str,
    command: &'static str,
    circuit: String,
    backend: String,
    passed: bool,
    scalars: Vec<ScalarEntry>,
    expected_scalar: String,
    nonunitary: bool,
    singlet_annihilated: bool,
    table: Vec<TableRow>,
    mismatches: Vec<String>,
}

#[derive(Serialize)]
struct TableReport<'a> {
    schema: &'static str,
    command: &'static str,
    circuit: &'a str,
    backend: &'a str,
    passed: bool,
    table: &'a [TableRow],
}

impl GateReport {
    pub fn new<S: Scalar + Show>(v: &GateVerification<S>, backend: &str, circuit: &str) -> Self {
        let r = S::sqrt_ratio(1, 2);
        let singlet = [S::zero(), r.clone(), -r, S::zero()];
        let singlet_annihilated = pswap::n_pswap::<S>()
            .apply(&singlet)
            .iter()
            .all(|a| if S::EXACT { a.is_zero() } else { a.to_complex().norm() <= 1e-12 });
        let scalars = v
            .scalars
            .iter()
            .map(|(p, k)| ScalarEntry {
                pattern: pswap::pattern_name(p),
                proportional: k.is_some(),
                scalar: k.as_ref().map(Show::text),
                value: k.as_ref().map(Show::value),
                pretty: k.as_ref().map(Show::pretty),
            })
            .collect();
        let table = v
            .table
            .iter()
            .map(|row| TableRow {
                pattern: pswap::pattern_name(&row.pattern),
                basis_input: row.basis_input.to_string(),
                coincidence_probs: std::array::from_fn(|c| row.coincidence_probs[c].text()),
                coincidence_values: std::array::from_fn(|c| row.coincidence_probs[c].value()),
            })
            .collect();
        GateReport {
            schema: SCHEMA_VERSION,
            command: "gate-verify",
            circuit: circuit.to_string(),
            backend: backend.to_string(),
            passed: v.passed() && singlet_annihilated,
            scalars,
            expected_scalar: pswap::herald_scalar::<S>().pretty(),
            nonunitary: v.nonunitary,
            singlet_annihilated,
            table,
            mismatches: v.mismatches.clone(),
        }
    }

    fn table_pretty(&self, out: &mut String) {
        let _ = writeln!(out, "coincidence probability by detected polarizations");
        let _ = writeln!(out, "{:<6} {:<8} {:>8} {:>8} {:>8} {:>8}", "input", "pattern", BASIS[0], BASIS[1], BASIS[2], BASIS[3]);
        for r in &self.table {
            let _ = writeln!(
                out,
                "{:<6} {:<8} {:>8} {:>8} {:>8} {:>8}",
                r.basis_input, r.pattern, r.coincidence_probs[0], r.coincidence_probs[1], r.coincidence_probs[2], r.coincidence_probs[3]
            );
        }
    }

    fn table_csv(&self) -> String {
        let rows = self
            .table
            .iter()
            .map(|r| {
                let mut v = vec![r.pattern.clone(), r.basis_input.clone()];
                v.extend(r.coincidence_probs.iter().cloned());
                v
            })
            .collect();
        csv_text(&["pattern", "basis_input", "HH", "HV", "VH", "VV"], rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => self.table_csv(),
            Format::Pretty => {
                let mut out = String::new();
                let _ = writeln!(out, "circuit {} ({} backend)", self.circuit, self.backend);
                for s in &self.scalars {
                    match &s.pretty {
                        Some(k) => {
                            let _ = writeln!(out, "pattern {}: heralded map = {k} · N", s.pattern);
                        }
                        None => {
                            let _ = writeln!(out, "pattern {}: heralded map is not proportional to N", s.pattern);
                        }
                    }
                }
                let _ = writeln!(out, "N·N† ≠ I: {}", yes_no(self.nonunitary));
                let _ = writeln!(out, "N maps (|HV⟩−|VH⟩)/√2 to 0: {}", yes_no(self.singlet_annihilated));
                self.table_pretty(&mut out);
                if self.passed {
                    let _ = writeln!(out, "scalar = {}; Table 3 reproduced; PASS", self.expected_scalar);
                } else {
                    for m in &self.mismatches {
                        let _ = writeln!(out, "mismatch: {m}");
                    }
                    let _ = writeln!(out, "FAIL");
                }
                out
            }
        }
    }

    pub fn render_table(&self, format: Format) -> String {
        match format {
            Format::Json => json(&TableReport {
                schema: SCHEMA_VERSION,
                command: "gate-table3",
                circuit: &self.circuit,
                backend: &self.backend,
                passed: self.passed,
                table: &self.table,
            }),
            Format::Csv => self.table_csv(),
            Format::Pretty => {
                let mut out = String::new();
                self.table_pretty(&mut out);
                out
            }
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// fuse / chain

#[derive(Serialize)]
pub struct FuseEntry {
    pattern: Pattern,
    class: OutcomeClass,
    #[serde(with = "rational::frac")]
    prob: Rational,
    prob_decimal: f64,
    residual: Residual,
    residual_sizes: Vec<usize>,
    #[serde(with = "rational::frac_opt", skip_serializing_if = "Option::is_none")]
    fidelity: Option<Rational>,
}

#[derive(Serialize)]
pub struct ClassMass {
    class: OutcomeClass,
    #[serde(with = "rational::frac")]
    prob: Rational,
}

#[derive(Serialize)]
pub struct FuseReport {
    schema: &'static str,
    command: &'static str,
    sizes: Vec<usize>,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    accounting: Option<GateAccounting>,
    /// Size of the W state produced on success.
    fused_size: usize,
    entries: Vec<FuseEntry>,
    classes: Vec<ClassMass>,
    #[serde(with = "rational::frac")]
    total: Rational,
    #[serde(with = "rational::frac_opt", skip_serializing_if = "Option::is_none")]
    herald_probability: Option<Rational>,
}

impl FuseReport {
    fn build(d: &OutcomeDistribution, fidelities: Option<&[Option<Rational>]>) -> Self {
        let entries = d
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| FuseEntry {
                pattern: e.pattern.clone(),
                class: e.class,
                prob: e.prob.clone(),
                prob_decimal: to_f64(&e.prob),
                residual: e.residual.clone(),
                residual_sizes: e.residual.sizes(),
                fidelity: fidelities.and_then(|f| f[i].clone()),
            })
            .collect();
        let mut classes: Vec<OutcomeClass> = d.entries.iter().map(|e| e.class).collect();
        classes.sort();
        classes.dedup();
        FuseReport {
            schema: SCHEMA_VERSION,
            command: "fuse",
            sizes: d.sizes.clone(),
            method: "analytic",
            accounting: None,
            fused_size: d.sizes.iter().sum::<usize>() + 1 - d.sizes.len(),
            entries,
            classes: classes
                .into_iter()
                .map(|c| ClassMass { class: c, prob: d.mass(c) })
                .collect(),
            total: d.total(),
            herald_probability: None,
        }
    }

    pub fn analytic(d: &OutcomeDistribution) -> Self {
        Self::build(d, None)
    }

    pub fn dense(f: &DenseFusion) -> Self {
        let mut r = Self::build(&f.distribution, Some(&f.fidelities));
        r.method = "dense";
        r.accounting = Some(f.accounting);
        r.herald_probability = Some(f.herald_probability.clone());
        r
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let rows = self
                    .entries
                    .iter()
                    .map(|e| {
                        vec![
                            e.pattern.to_string(),
                            e.class.to_string(),
                            e.prob.to_string(),
                            sig6(e.prob_decimal),
                            e.residual.to_string(),
                            e.fidelity.as_ref().map(ToString::to_string).unwrap_or_default(),
                        ]
                    })
                    .collect();
                csv_text(&["pattern", "class", "prob", "prob_decimal", "residual", "fidelity"], rows)
            }
            Format::Pretty => {
                let mut out = String::new();
                let sizes: Vec<String> = self.sizes.iter().map(|n| format!("W{n}")).collect();
                let gates = self.sizes.len() - 1;
                let _ = write!(
                    out,
                    "{} with {gates} partial-swap{} ({}",
                    sizes.join(" ⊗ "),
                    if gates == 1 { "" } else { "s" },
                    self.method
                );
                match self.accounting {
                    Some(a) => {
                        let _ = writeln!(out, ", {} accounting)", serde_json::to_value(a).unwrap().as_str().unwrap_or(""));
                    }
                    None => {
                        let _ = writeln!(out, ")");
                    }
                }
                let dense = self.method == "dense";
                let _ = write!(out, "{:<8} {:<15} {:<24} {:<24}", "pattern", "class", "probability", "residual");
                let _ = writeln!(out, "{}", if dense { "fidelity" } else { "" });
                for e in &self.entries {
                    let _ = write!(
                        out,
                        "{:<8} {:<15} {:<24} {:<24}",
                        e.pattern.to_string(),
                        e.class.to_string(),
                        describe(&e.prob),
                        e.residual.to_string()
                    );
                    let fid = e.fidelity.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into());
                    let _ = writeln!(out, "{}", if dense { fid } else { String::new() });
                }
                for c in &self.classes {
                    let _ = writeln!(out, "{} {}", c.class, describe(&c.prob));
                }
                let _ = writeln!(out, "total {}", self.total);
                if let Some(h) = &self.herald_probability {
                    if self.accounting == Some(GateAccounting::Physical) {
                        let _ = writeln!(out, "every gate heralds with probability {}", describe(h));
                    }
                }
                out
            }
        }
    }
}

// plan

fn estimate(e: &Estimate) -> String {
    format!("{} ± {}", sig6(e.mean), sig6(e.stderr))
}

pub fn render_plan(r: &CostReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(r).expect("reports serialize");
            v["schema"] = SCHEMA_VERSION.into();
            v["command"] = "plan".into();
            json(&v)
        }
        Format::Csv => {
            let metrics = [
                ("primitives", &r.cost.primitives, r.empirical.as_ref().map(|e| e.primitives)),
                ("rounds", &r.cost.rounds, r.empirical.as_ref().map(|e| e.rounds)),
                (
                    "gate_applications",
                    &r.cost.gate_applications,
                    r.empirical.as_ref().map(|e| e.gate_applications),
                ),
            ];
            let rows = metrics
                .iter()
                .map(|(name, exact, emp)| {
                    vec![
                        name.to_string(),
                        exact.to_string(),
                        sig6(to_f64(exact)),
                        emp.map(|e| e.mean.to_string()).unwrap_or_default(),
                        emp.map(|e| e.stderr.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(&["metric", "exact", "exact_decimal", "empirical_mean", "empirical_stderr"], rows)
        }
        Format::Pretty => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "target W{} from W{} primitives, policy {}, {} accounting",
                r.sizes.target,
                r.sizes.primitive,
                r.policy,
                if r.accounting == GateAccounting::Physical { "physical" } else { "ideal" }
            );
            let _ = writeln!(
                out,
                "one fusion of two primitives: success {}, recycle {}",
                describe(&r.probs.success),
                r.probs.recycle.as_ref().map(describe).unwrap_or_else(|| "-".into())
            );
            let _ = writeln!(out, "expected primitives        {}", describe(&r.cost.primitives));
            let _ = writeln!(out, "expected rounds            {}", describe(&r.cost.rounds));
            let _ = writeln!(out, "expected gate applications {}", describe(&r.cost.gate_applications));
            let _ = writeln!(out, "inventory states           {}", r.cost.states);
            if let Some(e) = &r.empirical {
                let _ = writeln!(out, "Monte Carlo, {} trials, seed {}", e.trials, e.seed);
                let _ = writeln!(out, "  primitives        {}", estimate(&e.primitives));
                let _ = writeln!(out, "  rounds            {}", estimate(&e.rounds));
                let _ = writeln!(out, "  gate applications {}", estimate(&e.gate_applications));
                for p in &e.pairs {
                    let _ = writeln!(
                        out,
                        "  W{} + W{}: {} attempts, {} heralded, success rate {}",
                        p.left,
                        p.right,
                        p.tally.attempts,
                        p.tally.heralded,
                        estimate(&p.success_rate)
                    );
                }
            }
            for n in &r.notes {
                let _ = writeln!(out, "note: {n}");
            }
            out
        }
    }
}

// compare

fn opt(q: &Option<Rational>) -> String {
    q.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn render_compare(rows: &[ComparisonRow], format: Format) -> String {
    match format {
        Format::Json => json(&serde_json::json!({
            "schema": SCHEMA_VERSION,
            "command": "compare",
            "sizes": rows.first().map(|r| r.probs.sizes.clone()).unwrap_or_default(),
            "rows": rows,
        })),
        Format::Csv => {
            let body = rows
                .iter()
                .map(|r| {
                    vec![
                        r.protocol.id().to_string(),
                        r.description.clone(),
                        r.ancilla.to_string(),
                        r.gate_cost.to_string(),
                        r.applicable.to_string(),
                        r.probs.success.to_string(),
                        opt(&r.probs.recycle),
                        opt(&r.probs.partial),
                        r.probs.fail.to_string(),
                        opt(&r.probs.fail_corrected),
                        r.probs.issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
                    ]
                })
                .collect();
            csv_text(
                &[
                    "protocol",
                    "description",
                    "ancilla",
                    "gate_cost",
                    "applicable",
                    "success",
                    "recycle",
                    "partial",
                    "fail",
                    "fail_corrected",
                    "issues",
                ],
                body,
            )
        }
        Format::Pretty => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<14} {:<8} {:<6} {:<12} {:<12} {:<12} {:<12}",
                "protocol", "ancilla", "gates", "success", "recycle", "partial", "fail"
            );
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:<14} {:<8} {:<6} {:<12} {:<12} {:<12} {:<12}{}",
                    r.protocol.id(),
                    yes_no(r.ancilla),
                    r.gate_cost,
                    r.probs.success.to_string(),
                    r.probs.recycle.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into()),
                    r.probs.partial.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into()),
                    r.probs.fail.to_string(),
                    if r.applicable { "" } else { "  (not applicable: fused size below 1)" }
                );
            }
            for r in rows {
                for i in &r.probs.issues {
                    let _ = writeln!(out, "warning: {}: {i}", r.protocol.id());
                }
                if let Some(c) = &r.probs.fail_corrected {
                    let _ = writeln!(
                        out,
                        "note: {}: complement of success and all-H recycle gives fail {}",
                        r.protocol.id(),
                        describe(c)
                    );
                }
            }
            out
        }
    }
}
