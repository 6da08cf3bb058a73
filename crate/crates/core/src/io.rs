//! CSV/JSON ingestion and report emission.
//!
//! Scores are written with 12 significant digits so that re-parsed reports
//! reproduce agreement metrics to well below 1e-9.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agreement::AgreementReport;
use crate::attribution::ScoreReport;
use crate::centering::CenteringSpec;
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::groups::{GroupFamily, WeightVector};
use crate::transfer::{Knee, TransferCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Rounds to 12 significant decimal digits.
pub fn round_sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads a headered numeric CSV. Columns named in `outputs` become output
/// vectors; every other column is a feature.
pub fn load_table(path: impl AsRef<Path>, outputs: &[String]) -> Result<DataTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(e, None))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut seen = HashSet::new();
    for name in &header {
        if name.is_empty() {
            return Err(Error::Schema("empty column name in header".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Schema(format!(
                "duplicate column `{name}` in header"
            )));
        }
    }
    if outputs.is_empty() {
        return Err(Error::InvalidInput("no output column selected".into()));
    }
    for o in outputs {
        if !seen.contains(o.as_str()) {
            return Err(Error::UnknownColumn(o.clone()));
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, None))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                column: None,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for ((field, name), col) in record.iter().zip(&header).zip(columns.iter_mut()) {
            let cell_err = |message: String| Error::Parse {
                line,
                column: Some(name.clone()),
                message,
            };
            if field.is_empty() {
                return Err(cell_err("blank cell".into()));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| cell_err(format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(cell_err(format!("non-finite value `{field}`")));
            }
            col.push(v);
        }
    }

    let mut feature_names = Vec::new();
    let mut feature_cols = Vec::new();
    let mut output_cols = Vec::new();
    for (name, col) in header.into_iter().zip(columns) {
        if outputs.contains(&name) {
            output_cols.push((name, col));
        } else {
            feature_names.push(name);
            feature_cols.push(col);
        }
    }
    // keep outputs in the order requested
    output_cols.sort_by_key(|(name, _)| outputs.iter().position(|o| o == name));
    DataTable::new(feature_names, feature_cols, output_cols)
}

fn csv_error(e: csv::Error, column: Option<String>) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: "<csv>".into(),
            source,
        },
        other => Error::Parse {
            line,
            column,
            message: format!("{other:?}"),
        },
    }
}

#[derive(Deserialize)]
struct GroupsFile {
    groups: serde_json::Map<String, serde_json::Value>,
}

/// Reads `{"groups": {name: [feature, ...]}}` and resolves names to indices.
pub fn load_groups(path: impl AsRef<Path>, feature_names: &[String]) -> Result<GroupFamily> {
    let file: GroupsFile = serde_json::from_reader(BufReader::new(open(path.as_ref())?))?;
    parse_groups(file, feature_names)
}

pub fn parse_groups_str(json: &str, feature_names: &[String]) -> Result<GroupFamily> {
    parse_groups(serde_json::from_str(json)?, feature_names)
}

fn parse_groups(file: GroupsFile, feature_names: &[String]) -> Result<GroupFamily> {
    let mut groups = Vec::new();
    for (name, members) in file.groups {
        let members: Vec<String> = serde_json::from_value(members)?;
        if members.is_empty() {
            return Err(Error::InvalidGroup(format!("group `{name}` is empty")));
        }
        let idx = members
            .iter()
            .map(|m| {
                feature_names
                    .iter()
                    .position(|f| f == m)
                    .ok_or_else(|| Error::UnknownFeature(m.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        groups.push((name, idx));
    }
    GroupFamily::new(groups, feature_names.len())
}

/// Single-column weights CSV; a non-numeric first line is taken as a header.
pub fn load_weights(path: impl AsRef<Path>, n: usize) -> Result<WeightVector> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut w = Vec::with_capacity(n);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => w.push(v),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    column: None,
                    message: format!("bad weight `{cell}`"),
                })
            }
        }
    }
    if w.len() != n {
        return Err(Error::Schema(format!(
            "weights file has {} values, table has {n} rows",
            w.len()
        )));
    }
    WeightVector::new(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub output: String,
    pub centering: CenteringSpec,
    pub rows_used: usize,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default)]
    pub weighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub name: String,
    pub cir: f64,
    pub ratio_nd: f64,
    pub neutral: bool,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub name: String,
    pub cir: f64,
    pub ratio_nd: f64,
    pub neutral: bool,
    #[serde(default)]
    pub members: Vec<String>,
}

/// Serialized form of a [`ScoreReport`]; features in rank order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub meta: ReportMeta,
    pub features: Vec<FeatureRow>,
    pub groups: Vec<GroupRow>,
}

impl ReportDoc {
    pub fn from_report(report: &ScoreReport, seed: Option<u64>) -> Self {
        Self {
            meta: ReportMeta {
                output: report.output.clone(),
                centering: report.centering,
                rows_used: report.rows_used,
                seed,
                class: report.class.clone(),
                weighted: report.weighted,
            },
            features: report
                .ranked_features()
                .into_iter()
                .map(|f| FeatureRow {
                    name: f.name.clone(),
                    cir: round_sig12(f.cir),
                    ratio_nd: round_sig12(f.ratio_nd),
                    neutral: f.neutral,
                    rank: f.rank,
                })
                .collect(),
            groups: report
                .groups
                .iter()
                .map(|g| GroupRow {
                    name: g.name.clone(),
                    cir: round_sig12(g.cir),
                    ratio_nd: round_sig12(g.ratio_nd),
                    neutral: g.neutral,
                    members: g.members.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct CsvScoreRow<'a> {
    kind: &'a str,
    name: &'a str,
    cir: f64,
    ratio_nd: f64,
    neutral: bool,
    rank: Option<usize>,
    class: Option<&'a str>,
}

fn write_report_rows<W: Write>(csv: &mut csv::Writer<W>, doc: &ReportDoc) -> Result<()> {
    let class = doc.meta.class.as_deref();
    for f in &doc.features {
        csv.serialize(CsvScoreRow {
            kind: "feature",
            name: &f.name,
            cir: f.cir,
            ratio_nd: f.ratio_nd,
            neutral: f.neutral,
            rank: Some(f.rank),
            class,
        })
        .map_err(|e| csv_error(e, None))?;
    }
    for g in &doc.groups {
        csv.serialize(CsvScoreRow {
            kind: "group",
            name: &g.name,
            cir: g.cir,
            ratio_nd: g.ratio_nd,
            neutral: g.neutral,
            rank: None,
            class,
        })
        .map_err(|e| csv_error(e, None))?;
    }
    Ok(())
}

/// Writes one or more score reports. JSON emits a single object for one
/// report and an array otherwise.
pub fn write_reports<W: Write>(
    out: W,
    reports: &[ScoreReport],
    seed: Option<u64>,
    format: Format,
) -> Result<()> {
    let docs: Vec<ReportDoc> = reports
        .iter()
        .map(|r| ReportDoc::from_report(r, seed))
        .collect();
    match format {
        Format::Json => {
            let mut out = out;
            if let [doc] = docs.as_slice() {
                serde_json::to_writer_pretty(&mut out, doc)?;
            } else {
                serde_json::to_writer_pretty(&mut out, &docs)?;
            }
            writeln!(out).map_err(|e| Error::io("<output>", e))?;
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(out);
            for doc in &docs {
                write_report_rows(&mut csv, doc)?;
            }
            csv.flush().map_err(|e| Error::io("<output>", e))?;
        }
    }
    Ok(())
}

/// Emits a report to `path`.
pub fn emit_report(
    path: impl AsRef<Path>,
    report: &ScoreReport,
    seed: Option<u64>,
    format: Format,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_reports(file, std::slice::from_ref(report), seed, format)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedScore {
    pub name: String,
    pub cir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub fraction: f64,
    pub repeat: usize,
    pub rows: usize,
    pub seconds: f64,
    pub jaccard_at_k: f64,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub procrustes_residual: Option<f64>,
    pub sym_kl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecordDoc {
    #[serde(flatten)]
    pub row: CurveRow,
    /// Per-feature scores in table order.
    pub scores: Vec<NamedScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub output: String,
    pub centering: CenteringSpec,
    pub seed: u64,
    pub k: usize,
    pub repeats: usize,
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDoc {
    pub meta: CurveMeta,
    pub records: Vec<CurveRecordDoc>,
    pub knee: Option<Knee>,
}

impl CurveDoc {
    pub fn from_curve(curve: &TransferCurve, knee: Option<Knee>) -> Self {
        let reference = curve.reference();
        Self {
            meta: CurveMeta {
                output: reference
                    .map(|r| r.report.output.clone())
                    .unwrap_or_default(),
                centering: reference.map(|r| r.report.centering).unwrap_or_default(),
                seed: curve.config.seed,
                k: curve.config.k,
                repeats: curve.config.repeats,
                fractions: curve.config.fractions.clone(),
            },
            records: curve
                .records
                .iter()
                .map(|r| CurveRecordDoc {
                    row: curve_row(r.fraction, r.repeat, r.rows, r.seconds, &r.agreement),
                    scores: r
                        .report
                        .features
                        .iter()
                        .map(|f| NamedScore {
                            name: f.name.clone(),
                            cir: round_sig12(f.cir),
                        })
                        .collect(),
                })
                .collect(),
            knee,
        }
    }
}

fn curve_row(
    fraction: f64,
    repeat: usize,
    rows: usize,
    seconds: f64,
    a: &AgreementReport,
) -> CurveRow {
    let r = |v: Option<f64>| v.map(round_sig12);
    CurveRow {
        fraction,
        repeat,
        rows,
        seconds,
        jaccard_at_k: round_sig12(a.jaccard_at_k),
        spearman: r(a.spearman),
        kendall: r(a.kendall),
        procrustes_residual: r(a.procrustes_residual),
        sym_kl: r(a.sym_kl),
    }
}

/// Writes a transfer curve. CSV carries one row per (fraction, repeat).
pub fn write_curve<W: Write>(
    out: W,
    curve: &TransferCurve,
    knee: Option<Knee>,
    format: Format,
) -> Result<()> {
    let doc = CurveDoc::from_curve(curve, knee);
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out).map_err(|e| Error::io("<output>", e))?;
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(out);
            for rec in &doc.records {
                csv.serialize(&rec.row).map_err(|e| csv_error(e, None))?;
            }
            csv.flush().map_err(|e| Error::io("<output>", e))?;
        }
    }
    Ok(())
}

pub fn emit_curve(
    path: impl AsRef<Path>,
    curve: &TransferCurve,
    knee: Option<Knee>,
    format: Format,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_curve(file, curve, knee, format)
}

pub fn write_agreement<W: Write>(out: W, report: &AgreementReport, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out).map_err(|e| Error::io("<output>", e))?;
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(out);
            csv.serialize(report).map_err(|e| csv_error(e, None))?;
            csv.flush().map_err(|e| Error::io("<output>", e))?;
        }
    }
    Ok(())
}

/// Reads per-feature scores from a report written by [`write_reports`]
/// (JSON object or CSV). Returned in the file's rank order.
pub fn load_feature_scores(path: impl AsRef<Path>) -> Result<Vec<NamedScore>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: ReportDoc = serde_json::from_str(trimmed)?;
        return Ok(doc
            .features
            .into_iter()
            .map(|f| NamedScore {
                name: f.name,
                cir: f.cir,
            })
            .collect());
    }
    if trimmed.starts_with('[') {
        return Err(Error::InvalidInput(format!(
            "{}: file holds several reports; pass a single-report file",
            path.display()
        )));
    }

    #[derive(Deserialize)]
    struct Row {
        kind: String,
        name: String,
        cir: f64,
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(e, None))?;
        if row.kind == "feature" {
            out.push(NamedScore {
                name: row.name,
                cir: row.cir,
            });
        }
    }
    Ok(out)
}

/// Aligns two score lists by feature name, returning vectors in the order
/// of `a`.
pub fn align_scores(a: &[NamedScore], b: &[NamedScore]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "score files list {} and {} features",
            a.len(),
            b.len()
        )));
    }
    let mut va = Vec::with_capacity(a.len());
    let mut vb = Vec::with_capacity(a.len());
    for s in a {
        let other = b
            .iter()
            .find(|t| t.name == s.name)
            .ok_or_else(|| Error::UnknownFeature(s.name.clone()))?;
        va.push(s.cir);
        vb.push(other.cir);
    }
    Ok((va, vb))
}
