//! CSV reading and writing for every tabular artifact.
//!
//! Written files start with `#` metadata lines (tool version, config hash and
//! the config itself) followed by a header row. Readers skip `#` lines.
//! Floats are written in shortest round-trip form, so bodies are byte-stable.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::campaign::{Answer, Selection, TaskVotes};
use crate::error::{Error, Result};
use crate::features::{feature_columns, FeatureVector, N_DIRECTIONS, N_HARALICK};
use crate::metrics::{CsSummary, SegmentRecord, SpxMetricReport};
use crate::ranking::{Metric, N_METRICS};
use crate::raster::GtClass;

pub const TOOL_VERSION: &str = concat!("forestseg ", env!("CARGO_PKG_VERSION"));

/// Metadata lines for `command` run with `config`.
pub fn preamble<T: Serialize>(command: &str, config: &T) -> String {
    let json = serde_json::to_string(config).unwrap_or_else(|_| "null".into());
    let hash = hex::encode(Sha256::digest(json.as_bytes()));
    format!("# tool: {TOOL_VERSION}\n# command: {command}\n# config_sha256: {hash}\n# config: {json}\n")
}

/// Text after the leading `#` lines.
pub fn body(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn render<I, R>(header: &[String], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn class_name(c: GtClass) -> String {
    c.name().to_string()
}

fn parse_class(s: &str) -> Result<GtClass> {
    match s {
        "forest" => Ok(GtClass::Forest),
        "deforest" => Ok(GtClass::Deforest),
        _ => Err(Error::Csv(format!("unknown class '{s}'"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpxRow {
    pub method: String,
    pub image: String,
    pub report: SpxMetricReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsRow {
    pub method: String,
    pub image: String,
    pub summary: CsSummary,
}

pub fn spx_csv(rows: &[SpxRow]) -> String {
    render(
        &strings(&["method", "image", "br", "ue", "sirs", "co", "reg", "k_final"]),
        rows.iter().map(|r| {
            let m = &r.report;
            vec![
                r.method.clone(),
                r.image.clone(),
                m.br.to_string(),
                m.ue.to_string(),
                m.sirs.to_string(),
                m.co.to_string(),
                m.reg.to_string(),
                m.k_final.to_string(),
            ]
        }),
    )
}

pub fn cs_csv(rows: &[CsRow]) -> String {
    render(
        &strings(&["method", "image", "us", "ds", "phor", "ep", "n_segments", "n_useful"]),
        rows.iter().map(|r| {
            let s = &r.summary;
            vec![
                r.method.clone(),
                r.image.clone(),
                s.us.to_string(),
                s.ds.to_string(),
                s.phor.to_string(),
                s.ep.to_string(),
                s.n_segments.to_string(),
                s.n_useful.to_string(),
            ]
        }),
    )
}

pub fn records_csv(records: &[SegmentRecord]) -> String {
    render(
        &strings(&["segment_id", "size", "n_forest", "n_deforest", "hor", "majority", "useful"]),
        records.iter().map(|r| {
            vec![
                r.segment_id.to_string(),
                r.size.to_string(),
                r.n_forest.to_string(),
                r.n_deforest.to_string(),
                r.hor.to_string(),
                class_name(r.majority),
                u8::from(r.useful).to_string(),
            ]
        }),
    )
}

/// Feature table with a trailing `label` column (empty when unknown).
pub fn features_csv(features: &[FeatureVector]) -> String {
    let channels = features.first().map_or(0, |f| f.values.len() / (N_HARALICK * N_DIRECTIONS));
    let mut header = vec!["segment_id".to_string()];
    header.extend(feature_columns(channels));
    header.push("label".into());
    render(
        &header,
        features.iter().map(|f| {
            let mut row = vec![f.segment_id.to_string()];
            row.extend(f.values.iter().map(|v| v.to_string()));
            row.push(f.class_label.map(class_name).unwrap_or_default());
            row
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub segment_id: u32,
    pub predicted: GtClass,
    pub actual: Option<GtClass>,
}

pub fn predictions_csv(predictions: &[Prediction]) -> String {
    render(
        &strings(&["segment_id", "predicted", "actual"]),
        predictions.iter().map(|p| {
            vec![
                p.segment_id.to_string(),
                class_name(p.predicted),
                p.actual.map(class_name).unwrap_or_default(),
            ]
        }),
    )
}

pub fn votes_csv(tasks: &[TaskVotes]) -> String {
    render(
        &strings(&["task_id", "segment_id", "n_forest", "n_deforest", "n_undefined"]),
        tasks.iter().map(|t| {
            vec![
                t.task_id.clone(),
                t.segment_id.to_string(),
                t.n_forest.to_string(),
                t.n_deforest.to_string(),
                t.n_undefined.to_string(),
            ]
        }),
    )
}

pub fn tasks_csv(tasks: &[TaskVotes], majorities: &[Answer], entropies: &[f64]) -> String {
    render(
        &strings(&["task_id", "segment_id", "majority", "entropy"]),
        tasks.iter().zip(majorities).zip(entropies).map(|((t, a), h)| {
            vec![t.task_id.clone(), t.segment_id.to_string(), a.name().to_string(), h.to_string()]
        }),
    )
}

pub fn selection_csv(selection: &Selection) -> String {
    let rows = selection
        .forest
        .iter()
        .map(|&(s, h)| (s, GtClass::Forest, h))
        .chain(selection.deforest.iter().map(|&(s, h)| (s, GtClass::Deforest, h)));
    render(
        &strings(&["segment_id", "class", "entropy"]),
        rows.map(|(s, c, h)| vec![s.to_string(), class_name(c), h.to_string()]),
    )
}

/// A parsed CSV: header and rows, with `#` lines skipped.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    columns: HashMap<String, usize>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        let columns = header.iter().enumerate().map(|(i, h)| (h.clone(), i)).collect();
        Ok(Self { header, rows, columns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Csv(msg) => Error::Csv(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Rows of several tables with identical headers, in argument order.
    pub fn concat(tables: Vec<Table>) -> Result<Table> {
        let mut iter = tables.into_iter();
        let mut first = iter.next().ok_or_else(|| Error::EmptyInput("no tables".into()))?;
        for t in iter {
            if t.header != first.header {
                return Err(Error::Csv(format!(
                    "header mismatch: [{}] vs [{}]",
                    first.header.join(","),
                    t.header.join(",")
                )));
            }
            first.rows.extend(t.rows);
        }
        Ok(first)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .get(name)
            .copied()
            .ok_or_else(|| Error::Csv(format!("missing column '{name}'")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn get<'a>(&self, row: &'a [String], name: &str) -> Result<&'a str> {
        let i = self.column(name)?;
        row.get(i)
            .map(String::as_str)
            .ok_or_else(|| Error::Csv(format!("short row for column '{name}'")))
    }

    pub fn parse_at<T: std::str::FromStr>(&self, row: &[String], name: &str) -> Result<T> {
        let raw = self.get(row, name)?;
        raw.parse()
            .map_err(|_| Error::Csv(format!("cannot parse '{raw}' in column '{name}'")))
    }
}

pub fn read_records(table: &Table) -> Result<Vec<SegmentRecord>> {
    table
        .rows
        .iter()
        .map(|r| {
            Ok(SegmentRecord::from_counts(
                table.parse_at(r, "segment_id")?,
                table.parse_at(r, "n_forest")?,
                table.parse_at(r, "n_deforest")?,
            ))
        })
        .collect()
}

pub fn read_votes(table: &Table) -> Result<Vec<TaskVotes>> {
    table
        .rows
        .iter()
        .map(|r| {
            Ok(TaskVotes {
                task_id: table.get(r, "task_id")?.to_string(),
                segment_id: table.parse_at(r, "segment_id")?,
                n_forest: table.parse_at(r, "n_forest")?,
                n_deforest: table.parse_at(r, "n_deforest")?,
                n_undefined: table.parse_at(r, "n_undefined")?,
            })
        })
        .collect()
}

/// Reads a feature table; the `label` column is optional and may be empty.
pub fn read_features(table: &Table) -> Result<Vec<FeatureVector>> {
    let id = table.column("segment_id")?;
    let label = table.column("label").ok();
    let value_cols: Vec<usize> = (0..table.header.len()).filter(|&i| i != id && Some(i) != label).collect();
    table
        .rows
        .iter()
        .map(|r| {
            let values = value_cols
                .iter()
                .map(|&i| {
                    let raw = r.get(i).map(String::as_str).unwrap_or("");
                    raw.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Csv(format!("bad feature value '{raw}' in column '{}'", table.header[i])))
                })
                .collect::<Result<Vec<f64>>>()?;
            let class_label = match label.and_then(|i| r.get(i)).map(String::as_str) {
                None | Some("") => None,
                Some(s) => Some(parse_class(s)?),
            };
            Ok(FeatureVector {
                segment_id: table.parse_at(r, "segment_id")?,
                values,
                class_label,
                empty_directions: Vec::new(),
            })
        })
        .collect()
}

/// Per-(method, image) metric rows joined from superpixel and campaign
/// tables. The superpixel DS column comes from a `ds` column in the
/// superpixel table when present, otherwise from the campaign table's DS.
pub fn join_metric_rows(spx: &Table, cs: &Table) -> Result<Vec<(String, [f64; N_METRICS])>> {
    let mut cs_rows: HashMap<(String, String), &Vec<String>> = HashMap::new();
    for r in &cs.rows {
        let key = (cs.get(r, "method")?.to_string(), cs.get(r, "image")?.to_string());
        if cs_rows.insert(key.clone(), r).is_some() {
            return Err(Error::Csv(format!("duplicate campaign row for {} / {}", key.0, key.1)));
        }
    }
    let mut out = Vec::with_capacity(spx.rows.len());
    for r in &spx.rows {
        let key = (spx.get(r, "method")?.to_string(), spx.get(r, "image")?.to_string());
        let c = cs_rows
            .remove(&key)
            .ok_or_else(|| Error::Csv(format!("no campaign row for {} / {}", key.0, key.1)))?;
        let cs_ds: f64 = cs.parse_at(c, "ds")?;
        let mut v = [0.0; N_METRICS];
        v[Metric::SpDs.index()] = if spx.has_column("ds") { spx.parse_at(r, "ds")? } else { cs_ds };
        for m in [Metric::Br, Metric::Ue, Metric::Sirs, Metric::Co, Metric::Reg] {
            v[m.index()] = spx.parse_at(r, m.key())?;
        }
        v[Metric::CsDs.index()] = cs_ds;
        for m in [Metric::Us, Metric::Phor, Metric::Ep] {
            v[m.index()] = cs.parse_at(c, m.key())?;
        }
        out.push((key.0, v));
    }
    if let Some((m, i)) = cs_rows.keys().min() {
        return Err(Error::Csv(format!("no superpixel row for {m} / {i}")));
    }
    Ok(out)
}

/// A rank matrix with a `method` column and one column per metric key.
pub fn read_rank_matrix(table: &Table) -> Result<(Vec<String>, Vec<[u32; N_METRICS]>)> {
    let mut methods = Vec::new();
    let mut ranks = Vec::new();
    for r in &table.rows {
        methods.push(table.get(r, "method")?.to_string());
        let mut row = [0u32; N_METRICS];
        for m in Metric::ALL {
            row[m.index()] = table.parse_at(r, m.key())?;
            if row[m.index()] == 0 {
                return Err(Error::Csv(format!("rank 0 in column '{}'", m.key())));
            }
        }
        ranks.push(row);
    }
    Ok((methods, ranks))
}
