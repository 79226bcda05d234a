//! Plain-text tables for terminal output.

use std::fmt::Write;

use super::analysis::{AnalysisReport, EfficiencyDocument, EstimateDocument, MomentsDocument};
use super::reproduce::ReproductionReport;
use crate::moments::Provenance;

fn provenance_label(p: &Provenance) -> String {
    match p {
        Provenance::ClosedForm => "closed form".into(),
        Provenance::Quadrature(q) => format!(
            "quadrature on [{}, {}], {} panels x {} nodes",
            q.lower, q.upper, q.panels, q.nodes_per_panel
        ),
    }
}

fn join(values: &[f64], precision: usize) -> String {
    values
        .iter()
        .map(|v| format!("{v:.precision$}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn moments_table(doc: &MomentsDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} order statistics, n = {} ({})",
        doc.family,
        doc.n,
        provenance_label(&doc.provenance)
    );
    let _ = writeln!(out, "{:>4} {:>12}  covariance row", "i", "alpha");
    for (i, (a, row)) in doc.alpha.iter().zip(&doc.sigma).enumerate() {
        let _ = writeln!(out, "{:>4} {:>12.6}  {}", i + 1, a, join(row, 6));
    }
    out
}

pub fn estimate_table(doc: &EstimateDocument) -> String {
    let b = &doc.blue;
    let mut out = String::new();
    let _ = writeln!(out, "{} model, n = {}, r = {}", doc.family, doc.n, doc.r);
    let _ = writeln!(
        out,
        "mu_hat    = {:.4}   Var/sigma^2 = {:.6}",
        b.mu_hat, b.var_mu
    );
    let _ = writeln!(
        out,
        "sigma_hat = {:.4}   Var/sigma^2 = {:.6}",
        b.sigma_hat, b.var_sigma
    );
    let _ = writeln!(
        out,
        "Cov(mu_hat, sigma_hat)/sigma^2 = {:.6}",
        b.cov_mu_sigma
    );
    let _ = writeln!(out, "mu coefficients:    {}", join(&b.mu_coefficients, 4));
    let _ = writeln!(
        out,
        "sigma coefficients: {}",
        join(&b.sigma_coefficients, 4)
    );
    out
}

pub fn analysis_table(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let b = &report.blue;
    let _ = writeln!(
        out,
        "{} model, n = {}, r = {}: mu_hat = {:.4}, sigma_hat = {:.4}",
        report.family, report.n, report.r, b.mu_hat, b.sigma_hat
    );
    let _ = writeln!(out, "\nmarginal BLUPs");
    for m in &report.marginals {
        let _ = writeln!(out, "  X({}) = {:.4}", m.s, m.predicted);
    }
    if !report.pairs.is_empty() {
        let _ = writeln!(
            out,
            "\n{:>8} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8}",
            "(s,t)", "marg s", "marg t", "joint s", "joint t", "D-eff", "tr-eff", "gain"
        );
        for p in &report.pairs {
            let e = &p.efficiency;
            let _ = writeln!(
                out,
                "{:>8} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>8.4} {:>8.4} {:>8.4}",
                format!("({},{})", p.s, p.t),
                p.marginal_s,
                p.marginal_t,
                p.joint.predicted_s,
                p.joint.predicted_t,
                e.d_efficiency,
                e.trace_efficiency,
                e.overall_gain
            );
        }
    }
    out
}

pub fn efficiency_table(doc: &EfficiencyDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} model, n = {}, r = {}", doc.family, doc.n, doc.r);
    let _ = writeln!(
        out,
        "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "(s,t)", "D-eff", "tr-eff", "gain", "loss", "overall"
    );
    for p in &doc.pairs {
        let e = &p.efficiency;
        let _ = writeln!(
            out,
            "{:>8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            format!("({},{})", p.s, p.t),
            e.d_efficiency,
            e.trace_efficiency,
            e.efficiency_gain,
            e.efficiency_loss,
            e.overall_gain
        );
    }
    for p in &doc.pairs {
        let _ = writeln!(out, "\n({},{}) a: {}", p.s, p.t, join(&p.a.weights, 4));
        let _ = writeln!(out, "({},{}) b: {}", p.s, p.t, join(&p.b.weights, 4));
    }
    out
}

pub fn reproduction_table(report: &ReproductionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<34} {:>12} {:>12} {:>10} {:>8}  status",
        "cell", "computed", "published", "delta", "tol"
    );
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{:<34} {:>12.4} {:>12.4} {:>+10.4} {:>8.3}  {}",
            c.label,
            c.computed,
            c.expected,
            c.delta(),
            c.tolerance,
            if c.pass { "ok" } else { "MISMATCH" }
        );
    }
    for (label, ok) in &report.conditions {
        let _ = writeln!(
            out,
            "{label:<34} {:>46}  {}",
            "",
            if *ok { "ok" } else { "MISMATCH" }
        );
    }
    let total = report.cells.len() + report.conditions.len();
    let _ = writeln!(
        out,
        "\n{} of {} checks passed",
        total - report.failures(),
        total
    );
    out
}
