//! Deterministic CSV writers for the harness output schemas.

use super::runner::{ConvRow, RegionRow, RunReport, SweepRow};
use std::io::Write;
use std::path::Path;

fn fmt(v: f64) -> String {
    format!("{:.5e}", v)
}

pub fn write_convergence(path: &Path, rows: &[ConvRow]) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "N,h,L1,L2,Linf,order_L2")?;
    for row in rows {
        let n = &row.report.norms[0];
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.report.n,
            fmt(row.report.h),
            fmt(n.l1),
            fmt(n.l2),
            fmt(n.linf),
            row.order_l2.map(|o| format!("{:.4}", o)).unwrap_or_else(|| "-".into()),
        )?;
    }
    Ok(())
}

pub fn write_trace(path: &Path, report: &RunReport) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "t,e,energy")?;
    for (k, (t, e)) in report.conservation.iter().enumerate() {
        let energy = report.energy.get(k).map(|(_, v)| fmt(*v)).unwrap_or_else(|| "-".into());
        writeln!(out, "{},{},{}", fmt(*t), fmt(e[0]), energy)?;
    }
    Ok(())
}

/// Trace with one column per conserved component.
pub fn write_trace_components(path: &Path, report: &RunReport, labels: &[&str]) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    let cols: Vec<String> = labels.iter().map(|l| format!("e_{l}")).collect();
    writeln!(out, "t,{},energy", cols.join(","))?;
    for (k, (t, e)) in report.conservation.iter().enumerate() {
        let energy = report.energy.get(k).map(|(_, v)| fmt(*v)).unwrap_or_else(|| "-".into());
        let vals: Vec<String> = e.iter().map(|v| fmt(*v)).collect();
        writeln!(out, "{},{},{}", fmt(*t), vals.join(","), energy)?;
    }
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "alpha,L1,L2,Linf,cond")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", fmt(r.alpha), fmt(r.l1), fmt(r.l2), fmt(r.linf), fmt(r.cond))?;
    }
    Ok(())
}

pub fn write_region(path: &Path, rows: &[RegionRow]) -> std::io::Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "lambda1,lambda2,feasible,eta_lo,eta_hi")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt(r.lambda1),
            fmt(r.lambda2),
            u8::from(r.feasible),
            fmt(r.eta_lo),
            fmt(r.eta_hi),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_six_significant_digits() {
        assert_eq!(fmt(5.4e-4), "5.40000e-4");
        assert_eq!(fmt(0.0), "0.00000e0");
        assert_eq!(fmt(-1.0 / 3.0), "-3.33333e-1");
    }
}
