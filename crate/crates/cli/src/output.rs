//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use swbench_core::{PhysConstants, RunReport};

/// 17 significant digits: enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn snapshot_csv(report: &RunReport, c: &PhysConstants) -> String {
    let snap = report.final_snapshot();
    let mut out = String::from("x,H,h,q,eta,u,fr2\n");
    for ((x, depth), w) in report.x.iter().zip(&report.depth).zip(&snap.cells) {
        let (u, fr2) = if w.is_wet(c) {
            let u = w.q / w.h;
            (u, u * u / (c.g * w.h))
        } else {
            (0.0, 0.0)
        };
        let row = [*x, *depth, w.h, w.q, w.h - depth, u, fr2].map(num).join(",");
        let _ = writeln!(out, "{row}");
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

pub fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// At most `keep` evenly spaced entries, always including the last one.
pub fn thin<T: Clone>(items: &[T], keep: usize) -> Vec<T> {
    if items.len() <= keep || keep < 2 {
        return items.to_vec();
    }
    let stride = items.len().div_ceil(keep - 1);
    let mut out: Vec<T> = items.iter().step_by(stride).cloned().collect();
    if (items.len() - 1) % stride != 0 {
        out.push(items[items.len() - 1].clone());
    }
    out
}
