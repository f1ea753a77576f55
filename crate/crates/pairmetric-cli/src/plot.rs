//! Plot-ready aggregation of sweep CSVs: `(x, y, stderr)` TSV tables.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::formats::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `(ln n, mean ln rad_mc)` — complexity decay.
    Decay,
    /// `(n, mean (t3_rhs - t3_lhs))` — slack of the risk-difference bound.
    BoundGap,
    /// `(|M|, mean pop_risk_M)` — risk against modality count.
    RiskVsModalities,
}

impl PlotKind {
    pub fn parse(raw: &str) -> CliResult<Self> {
        match raw {
            "decay" => Ok(PlotKind::Decay),
            "bound-gap" => Ok(PlotKind::BoundGap),
            "risk-vs-modalities" => Ok(PlotKind::RiskVsModalities),
            other => Err(CliError::invalid(format!(
                "unknown plot kind '{other}'; available: decay, bound-gap, risk-vs-modalities"
            ))),
        }
    }
}

struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> CliResult<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::invalid("empty CSV: no header"))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if cells.len() != columns.len() {
                return Err(CliError::invalid(format!(
                    "row {} has {} cells, header has {}",
                    idx + 1,
                    cells.len(),
                    columns.len()
                )));
            }
            rows.push(cells);
        }
        if rows.is_empty() {
            return Err(CliError::invalid("no rows"));
        }
        Ok(Csv { columns, rows })
    }

    fn column(&self, name: &str) -> CliResult<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::invalid(format!("missing column '{name}'")))
    }

    fn f64_cell(&self, row: &[String], col: usize) -> CliResult<f64> {
        let raw = &row[col];
        match raw.as_str() {
            "nan" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => raw
                .parse()
                .map_err(|_| CliError::invalid(format!("cannot parse '{raw}' as a number"))),
        }
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregate a sweep CSV into `(x, y, stderr)` groups for the given kind.
pub fn aggregate(csv_text: &str, kind: PlotKind) -> CliResult<Vec<(f64, f64, f64)>> {
    let csv = Csv::parse(csv_text)?;
    let mut groups: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    match kind {
        PlotKind::Decay => {
            let n_col = csv.column("n")?;
            let rad_col = csv.column("rad_mc")?;
            for row in &csv.rows {
                let n: u64 = row[n_col]
                    .parse()
                    .map_err(|_| CliError::invalid("bad n cell"))?;
                let rad = csv.f64_cell(row, rad_col)?;
                if rad.is_finite() && rad > 0.0 {
                    groups
                        .entry(n)
                        .or_insert(((n as f64).ln(), Vec::new()))
                        .1
                        .push(rad.ln());
                }
            }
        }
        PlotKind::BoundGap => {
            let n_col = csv.column("n")?;
            let lhs_col = csv.column("t3_lhs")?;
            let rhs_col = csv.column("t3_rhs")?;
            for row in &csv.rows {
                let n: u64 = row[n_col]
                    .parse()
                    .map_err(|_| CliError::invalid("bad n cell"))?;
                let lhs = csv.f64_cell(row, lhs_col)?;
                let rhs = csv.f64_cell(row, rhs_col)?;
                if lhs.is_finite() && rhs.is_finite() {
                    groups
                        .entry(n)
                        .or_insert((n as f64, Vec::new()))
                        .1
                        .push(rhs - lhs);
                }
            }
        }
        PlotKind::RiskVsModalities => {
            let m_col = csv.column("M_set")?;
            let risk_col = csv.column("pop_risk_M")?;
            for row in &csv.rows {
                let m_set = &row[m_col];
                let card = if m_set == "-" {
                    0
                } else {
                    m_set.split(';').count() as u64
                };
                let risk = csv.f64_cell(row, risk_col)?;
                if risk.is_finite() {
                    groups
                        .entry(card)
                        .or_insert((card as f64, Vec::new()))
                        .1
                        .push(risk);
                }
            }
        }
    }
    if groups.values().all(|(_, ys)| ys.is_empty()) {
        return Err(CliError::invalid("no usable rows for this plot kind"));
    }
    Ok(groups
        .into_values()
        .filter(|(_, ys)| !ys.is_empty())
        .map(|(x, ys)| {
            let (mean, se) = mean_and_stderr(&ys);
            (x, mean, se)
        })
        .collect())
}

/// Write the aggregation as a TSV with an `x<TAB>y<TAB>stderr` header.
pub fn emit_plot_data(input: &Path, kind: PlotKind, out: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(input)?;
    let points = aggregate(&text, kind)?;
    let mut doc = String::from("x\ty\tstderr\n");
    for (x, y, se) in points {
        doc.push_str(&format!(
            "{}\t{}\t{}\n",
            fmt_f64(x),
            fmt_f64(y),
            fmt_f64(se)
        ));
    }
    std::fs::write(out, doc)?;
    Ok(())
}
