//! Comma-delimited output tables with fixed headers.
//!
//! | file | columns |
//! |------|---------|
//! | `criticisms.csv` | `dataset,rank,row_id,witness` |
//! | `ratios.csv` | `exemplar_id,w_a,w_b,f,flag` |
//! | `grouped_weights.csv` | `dataset,group,weight` |
//! | `moments.csv` | `dataset,mean,sd` |
//! | `curves.csv` | `algorithm,m,dataset,mmd_sq,seconds` |
//! | `sizes.csv` | `algorithm,eps2,size,status` |
//!
//! In `ratios.csv`, `f` is empty and `flag` is `over-b-zero-a` when `w_a` is
//! zero; otherwise `flag` is `over-b`, `over-a` or `balanced`. In `sizes.csv`,
//! `status` is `ok` or `dnf:<stop reason>` or `error:<message>`, and `size` is
//! the support size reached.

use std::path::Path;

use dmmd_core::analysis::{CriticismSet, GroupedWeights, Moments, RatioReport};
use dmmd_core::EmbeddingTable;

use crate::bench::{BenchRecord, SizeCell, SizeOutcome};
use crate::error::{Error, Result};
use crate::manifest::fmt_f64;

pub const CRITICISMS: &str = "criticisms.csv";
pub const RATIOS: &str = "ratios.csv";
pub const GROUPED: &str = "grouped_weights.csv";
pub const MOMENTS: &str = "moments.csv";
pub const CURVES: &str = "curves.csv";
pub const SIZES: &str = "sizes.csv";

fn write(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_criticisms(path: &Path, table: &EmbeddingTable, sets: &[CriticismSet]) -> Result<()> {
    let rows = sets.iter().flat_map(|s| {
        s.entries.iter().enumerate().map(move |(rank, c)| {
            vec![
                s.label.clone(),
                (rank + 1).to_string(),
                table.id(c.row).to_string(),
                fmt_f64(c.witness),
            ]
        })
    });
    write(path, &["dataset", "rank", "row_id", "witness"], rows)
}

pub fn write_ratios(path: &Path, table: &EmbeddingTable, report: &RatioReport) -> Result<()> {
    let rows = report.entries.iter().map(|e| {
        let (f, flag) = match e.ratio {
            Some(f) => (fmt_f64(f), e.class.name().to_string()),
            None => (String::new(), "over-b-zero-a".to_string()),
        };
        vec![table.id(e.row).to_string(), fmt_f64(e.w_a), fmt_f64(e.w_b), f, flag]
    });
    write(path, &["exemplar_id", "w_a", "w_b", "f", "flag"], rows)
}

pub fn write_grouped(path: &Path, g: &GroupedWeights) -> Result<()> {
    let rows = g.labels.iter().zip(&g.mass).flat_map(|(label, mass)| {
        g.groups
            .iter()
            .zip(mass)
            .map(move |(group, m)| vec![label.clone(), group.clone(), fmt_f64(*m)])
    });
    write(path, &["dataset", "group", "weight"], rows)
}

pub fn write_moments(path: &Path, labels: &[String], moments: &[Moments]) -> Result<()> {
    let rows = labels
        .iter()
        .zip(moments)
        .map(|(l, m)| vec![l.clone(), fmt_f64(m.mean), fmt_f64(m.sd)]);
    write(path, &["dataset", "mean", "sd"], rows)
}

pub fn write_curves(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.algorithm.name().to_string(),
            r.m.to_string(),
            r.label.clone(),
            fmt_f64(r.mmd_sq),
            format!("{:.9}", r.seconds),
        ]
    });
    write(path, &["algorithm", "m", "dataset", "mmd_sq", "seconds"], rows)
}

pub fn write_sizes(path: &Path, cells: &[SizeCell]) -> Result<()> {
    let rows = cells.iter().map(|c| {
        let status = match &c.outcome {
            SizeOutcome::Finished => "ok".to_string(),
            SizeOutcome::DidNotFinish(stop) => format!("dnf:{}", stop.name()),
            SizeOutcome::Failed(msg) => format!("error:{msg}"),
        };
        vec![c.algorithm.name().to_string(), fmt_f64(c.epsilon_sq), c.size.to_string(), status]
    });
    write(path, &["algorithm", "eps2", "size", "status"], rows)
}
