//! Two-tier rank aggregation of per-method metric tables.
//!
//! Each metric column is turned into competition ranks (ties share the best
//! rank, the next value skips). The superpixel score is the mean rank over
//! DS, BR, UE, SIRS, CO and Reg, the citizen-science score the mean rank over
//! DS, US, PHoR and EP, and the final score the mean of both. Methods are
//! ordered by final score, then by citizen-science DS rank, then by name.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Superpixel,
    CitizenScience,
}

/// The ten ranked columns, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    SpDs,
    Br,
    Ue,
    Sirs,
    Co,
    Reg,
    CsDs,
    Us,
    Phor,
    Ep,
}

pub const N_METRICS: usize = 10;

impl Metric {
    pub const ALL: [Metric; N_METRICS] = [
        Metric::SpDs,
        Metric::Br,
        Metric::Ue,
        Metric::Sirs,
        Metric::Co,
        Metric::Reg,
        Metric::CsDs,
        Metric::Us,
        Metric::Phor,
        Metric::Ep,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// CSV column name.
    pub fn key(self) -> &'static str {
        match self {
            Metric::SpDs => "sp_ds",
            Metric::Br => "br",
            Metric::Ue => "ue",
            Metric::Sirs => "sirs",
            Metric::Co => "co",
            Metric::Reg => "reg",
            Metric::CsDs => "cs_ds",
            Metric::Us => "us",
            Metric::Phor => "phor",
            Metric::Ep => "ep",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::SpDs | Metric::CsDs => "DS",
            Metric::Br => "BR",
            Metric::Ue => "UE",
            Metric::Sirs => "SIRS",
            Metric::Co => "CO",
            Metric::Reg => "Reg",
            Metric::Us => "US",
            Metric::Phor => "PHoR",
            Metric::Ep => "EP",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Ue | Metric::Reg | Metric::Ep => Direction::LowerBetter,
            _ => Direction::HigherBetter,
        }
    }

    pub fn block(self) -> Block {
        match self {
            Metric::SpDs | Metric::Br | Metric::Ue | Metric::Sirs | Metric::Co | Metric::Reg => {
                Block::Superpixel
            }
            _ => Block::CitizenScience,
        }
    }
}

/// Competition ("min") ranks: 1 + number of strictly better values.
pub fn rank_metric(values: &[f64], direction: Direction) -> Result<Vec<u32>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no methods to rank".into()));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    let better = |a: f64, b: f64| match direction {
        Direction::HigherBetter => a > b,
        Direction::LowerBetter => a < b,
    };
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| match direction {
        Direction::HigherBetter => b.total_cmp(a),
        Direction::LowerBetter => a.total_cmp(b),
    });
    Ok(values
        .iter()
        .map(|&v| 1 + sorted.partition_point(|&s| better(s, v)) as u32)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    /// Averaged metric values, when the table was built from values.
    pub values: Option<Vec<[f64; N_METRICS]>>,
    pub ranks: Vec<[u32; N_METRICS]>,
    pub score_sp: Vec<f64>,
    pub score_cs: Vec<f64>,
    pub final_score: Vec<f64>,
    /// Method indices, best first. Empty until [`aggregate_scores`] runs.
    pub order: Vec<usize>,
    /// Adjacent pairs in `order` that tie on final score and DS rank and were
    /// separated by name only.
    pub residual_ties: Vec<(usize, usize)>,
}

impl RankTable {
    pub fn from_ranks(methods: Vec<String>, ranks: Vec<[u32; N_METRICS]>) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::EmptyInput("no methods".into()));
        }
        if methods.len() != ranks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} methods but {} rank rows",
                methods.len(),
                ranks.len()
            )));
        }
        Ok(Self {
            methods,
            values: None,
            ranks,
            score_sp: Vec::new(),
            score_cs: Vec::new(),
            final_score: Vec::new(),
            order: Vec::new(),
            residual_ties: Vec::new(),
        })
    }

    pub fn from_values(methods: Vec<String>, values: Vec<[f64; N_METRICS]>) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::EmptyInput("no methods".into()));
        }
        if methods.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} methods but {} value rows",
                methods.len(),
                values.len()
            )));
        }
        let mut ranks = vec![[0u32; N_METRICS]; methods.len()];
        for m in Metric::ALL {
            let column: Vec<f64> = values.iter().map(|v| v[m.index()]).collect();
            for (row, r) in ranks.iter_mut().zip(rank_metric(&column, m.direction())?) {
                row[m.index()] = r;
            }
        }
        let mut table = Self::from_ranks(methods, ranks)?;
        table.values = Some(values);
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn index_of(&self, method: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == method)
    }

    /// Method names, best first.
    pub fn ordered_methods(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.methods[i].as_str()).collect()
    }
}

fn block_sum(ranks: &[u32; N_METRICS], block: Block) -> u32 {
    Metric::ALL
        .iter()
        .filter(|m| m.block() == block)
        .map(|m| ranks[m.index()])
        .sum()
}

/// Fills in the scores and the final ordering.
pub fn aggregate_scores(table: &RankTable) -> RankTable {
    let mut out = table.clone();
    let n_sp = Metric::ALL.iter().filter(|m| m.block() == Block::Superpixel).count() as u32;
    let n_cs = N_METRICS as u32 - n_sp;
    let sums: Vec<(u32, u32)> = table
        .ranks
        .iter()
        .map(|r| (block_sum(r, Block::Superpixel), block_sum(r, Block::CitizenScience)))
        .collect();
    out.score_sp = sums.iter().map(|&(sp, _)| sp as f64 / n_sp as f64).collect();
    out.score_cs = sums.iter().map(|&(_, cs)| cs as f64 / n_cs as f64).collect();
    out.final_score = out
        .score_sp
        .iter()
        .zip(&out.score_cs)
        .map(|(a, b)| (a + b) / 2.0)
        .collect();

    // final = (sp / n_sp + cs / n_cs) / 2, compared exactly on the common denominator
    let key = |i: usize| sums[i].0 as u64 * n_cs as u64 + sums[i].1 as u64 * n_sp as u64;
    let ds = |i: usize| table.ranks[i][Metric::CsDs.index()];
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        key(a)
            .cmp(&key(b))
            .then(ds(a).cmp(&ds(b)))
            .then(table.methods[a].cmp(&table.methods[b]))
    });
    out.residual_ties = order
        .windows(2)
        .filter(|w| key(w[0]) == key(w[1]) && ds(w[0]) == ds(w[1]))
        .map(|w| (w[0], w[1]))
        .collect();
    out.order = order;
    out
}

/// Averages per-image metric rows by method, keeping first-appearance order.
pub fn average_by_method(rows: &[(String, [f64; N_METRICS])]) -> (Vec<String>, Vec<[f64; N_METRICS]>) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut methods = Vec::new();
    let mut sums: Vec<([f64; N_METRICS], usize)> = Vec::new();
    for (m, v) in rows {
        let i = *index.entry(m.as_str()).or_insert_with(|| {
            methods.push(m.clone());
            sums.push(([0.0; N_METRICS], 0));
            methods.len() - 1
        });
        for (s, x) in sums[i].0.iter_mut().zip(v) {
            *s += x;
        }
        sums[i].1 += 1;
    }
    let means = sums
        .into_iter()
        .map(|(s, n)| s.map(|x| x / n as f64))
        .collect();
    (methods, means)
}

fn tie_note(table: &RankTable, i: usize) -> Option<String> {
    table
        .residual_ties
        .iter()
        .find(|(a, b)| *a == i || *b == i)
        .map(|&(a, b)| {
            let other = if a == i { b } else { a };
            format!("tied with {} (name order)", table.methods[other])
        })
}

pub fn render_csv(table: &RankTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptyInput("no methods".into()));
    }
    let mut out = String::from("position,method");
    for m in Metric::ALL {
        let _ = write!(out, ",rank_{}", m.key());
    }
    out.push_str(",score_sp,score_cs,final_score,tie_flag\n");
    for (pos, &i) in table.order.iter().enumerate() {
        let _ = write!(out, "{},{}", pos + 1, table.methods[i]);
        for r in table.ranks[i] {
            let _ = write!(out, ",{r}");
        }
        let _ = writeln!(
            out,
            ",{:.6},{:.6},{:.6},{}",
            table.score_sp[i],
            table.score_cs[i],
            table.final_score[i],
            u8::from(tie_note(table, i).is_some())
        );
    }
    Ok(out)
}

pub fn render_markdown(table: &RankTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptyInput("no methods".into()));
    }
    let mut out = String::new();
    out.push_str("| Method | DS | BR | UE | SIRS | CO | Reg | Score_SP | DS | US | PHoR | EP | Score_CS | Final Score |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
    let mut notes = Vec::new();
    for &i in &table.order {
        let r = &table.ranks[i];
        let mut name = table.methods[i].clone();
        if let Some(note) = tie_note(table, i) {
            notes.push(format!("{}: {note}", table.methods[i]));
            name.push_str(" *");
        }
        let _ = write!(out, "| {name} |");
        for m in &Metric::ALL[..6] {
            let _ = write!(out, " {} |", r[m.index()]);
        }
        let _ = write!(out, " {:.3} |", table.score_sp[i]);
        for m in &Metric::ALL[6..] {
            let _ = write!(out, " {} |", r[m.index()]);
        }
        let _ = writeln!(out, " {:.3} | {:.3} |", table.score_cs[i], table.final_score[i]);
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            let _ = writeln!(out, "\\* {n}");
        }
    }
    Ok(out)
}

/// Writes `rank_table.csv` and `rank_table.md` into `dir`.
pub fn render_rank_report(table: &RankTable, dir: &Path, csv_preamble: &str) -> Result<()> {
    let csv = render_csv(table)?;
    let md = render_markdown(table)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("rank_table.csv");
    std::fs::write(&csv_path, format!("{csv_preamble}{csv}")).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = dir.join("rank_table.md");
    std::fs::write(&md_path, md).map_err(|e| Error::io(&md_path, e))?;
    Ok(())
}
