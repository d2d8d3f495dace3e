//! Report files: results CSV, markdown summary, SSIM curve data, loss history.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use speckle_core::dae::EpochRecord;
use speckle_core::metrics::MetricsRow;

use crate::error::{BenchError, Result};
use crate::method::Method;

pub const RESULTS_HEADER: &str = "method,variance,psnr_db,ssim,mse,n_images,seed";
pub const HISTORY_HEADER: &str = "epoch,train_loss,val_loss";

/// Floats use Rust's shortest round-trip representation so the files parse
/// back to the exact values; infinite PSNR is written as `inf`.
fn float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn results_csv(rows: &[MetricsRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.method,
            float(r.variance),
            float(r.psnr_db),
            float(r.ssim),
            float(r.mse),
            r.n_images,
            r.seed
        );
    }
    s
}

/// One parsed results line, keeping the original SSIM text.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub row: MetricsRow,
    pub variance_text: String,
    pub ssim_text: String,
}

pub fn parse_results(text: &str) -> Result<Vec<ResultRecord>> {
    let mut lines = text.lines();
    let malformed =
        |line: usize, reason: &str| BenchError::Data(format!("results CSV line {line}: {reason}"));
    match lines.next() {
        Some(h) if h.trim_end() == RESULTS_HEADER => {}
        _ => return Err(malformed(1, "missing or unexpected header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(malformed(n, "expected 7 columns"));
        }
        let f = |c: &str| {
            c.parse::<f64>()
                .map_err(|_| malformed(n, &format!("bad number {c:?}")))
        };
        out.push(ResultRecord {
            row: MetricsRow {
                method: cols[0].to_string(),
                variance: f(cols[1])?,
                psnr_db: f(cols[2])?,
                ssim: f(cols[3])?,
                mse: f(cols[4])?,
                n_images: cols[5].parse().map_err(|_| malformed(n, "bad n_images"))?,
                seed: cols[6].parse().map_err(|_| malformed(n, "bad seed"))?,
            },
            variance_text: cols[1].to_string(),
            ssim_text: cols[3].to_string(),
        });
    }
    Ok(out)
}

/// Markdown tables, one per variance in order of first appearance.
pub fn results_markdown(rows: &[MetricsRow]) -> String {
    let mut variances: Vec<f64> = Vec::new();
    for r in rows {
        if !variances.contains(&r.variance) {
            variances.push(r.variance);
        }
    }
    let mut s = String::from("# Denoising results\n");
    for v in variances {
        let _ = write!(
            s,
            "\n## Noise variance {v}\n\n| Method | PSNR (dB) | SSIM | MSE | Images |\n|---|---:|---:|---:|---:|\n"
        );
        for r in rows.iter().filter(|r| r.variance == v) {
            let label = r
                .method
                .parse::<Method>()
                .map(Method::label)
                .unwrap_or(&r.method);
            let _ = writeln!(
                s,
                "| {label} | {:.3} | {:.3} | {:.4} | {} |",
                r.psnr_db, r.ssim, r.mse, r.n_images
            );
        }
    }
    s
}

/// SSIM-versus-variance series, one `# method=<name>` block per method.
/// Known methods follow the curve order; anything else keeps its order of
/// appearance after them.
pub fn curves(records: &[ResultRecord]) -> String {
    let mut groups: BTreeMap<usize, (String, Vec<&ResultRecord>)> = BTreeMap::new();
    let mut extra = Method::CURVE_ORDER.len();
    let mut slot_of: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        let name = r.row.method.as_str();
        let slot = *slot_of.entry(name).or_insert_with(|| {
            match name
                .parse::<Method>()
                .ok()
                .and_then(|m| Method::CURVE_ORDER.iter().position(|&c| c == m))
            {
                Some(p) => p,
                None => {
                    extra += 1;
                    extra
                }
            }
        });
        groups
            .entry(slot)
            .or_insert_with(|| (name.to_string(), Vec::new()))
            .1
            .push(r);
    }
    let mut s = String::new();
    for (_, (name, mut series)) in groups {
        series.sort_by(|a, b| a.row.variance.total_cmp(&b.row.variance));
        let _ = writeln!(s, "# method={name}");
        for r in series {
            let _ = writeln!(s, "{}\t{}", r.variance_text, r.ssim_text);
        }
    }
    s
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for h in history {
        let _ = writeln!(
            s,
            "{},{},{}",
            h.epoch,
            float(h.train_loss),
            float(h.val_loss)
        );
    }
    s
}
