//! Panel CSV (`id,t,y,x1[,x2,...]`) and exact-cell JSON files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use panelbounds_core::panel::{CellProbabilities, PanelDataset, SupportIndex};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header must be `id,t,y,x1[,x2,...]`, got `{0}`")]
    Header(String),
    #[error("line {line}: {msg}")]
    Row { line: u64, msg: String },
    #[error("empty panel")]
    Empty,
    #[error("unbalanced panel:\n{0}")]
    Unbalanced(String),
    #[error(transparent)]
    Panel(#[from] panelbounds_core::Error),
}

/// Unit ids sort numerically when every id is an integer, lexically otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum UnitId {
    Num(i64),
    Text(String),
}

struct Row {
    line: u64,
    t: i64,
    y: i64,
    x: Vec<i64>,
}

const MAX_DIAGNOSTICS: usize = 10;

fn parse_int(field: &str, line: u64, name: &str) -> Result<i64, CsvError> {
    field.trim().parse().map_err(|_| CsvError::Row { line, msg: format!("{name} `{field}` is not an integer") })
}

pub fn read_panel<R: Read>(reader: R) -> Result<PanelDataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let ok = header.len() >= 4
        && header[0] == "id"
        && header[1] == "t"
        && header[2] == "y"
        && header[3..].iter().enumerate().all(|(i, h)| *h == format!("x{}", i + 1));
    if !ok {
        return Err(CsvError::Header(header.join(",")));
    }
    let dim = header.len() - 3;
    let mut units: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(CsvError::Row { line, msg: format!("expected {} fields, found {}", header.len(), rec.len()) });
        }
        let t = parse_int(&rec[1], line, "t")?;
        let y = parse_int(&rec[2], line, "y")?;
        let x = (0..dim).map(|d| parse_int(&rec[3 + d], line, &header[3 + d])).collect::<Result<_, _>>()?;
        units.entry(rec[0].to_string()).or_default().push(Row { line, t, y, x });
    }
    if units.is_empty() {
        return Err(CsvError::Empty);
    }
    let numeric = units.keys().all(|k| k.parse::<i64>().is_ok());
    let mut ordered: Vec<(UnitId, Vec<Row>)> = units
        .into_iter()
        .map(|(k, v)| (if numeric { UnitId::Num(k.parse().unwrap()) } else { UnitId::Text(k) }, v))
        .collect();
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    // every unit must carry the same periods exactly once
    let mut periods: Vec<i64> = ordered.iter().flat_map(|(_, rows)| rows.iter().map(|r| r.t)).collect();
    periods.sort_unstable();
    periods.dedup();
    let mut problems = Vec::new();
    for (id, rows) in &mut ordered {
        rows.sort_by_key(|r| r.t);
        let name = match id {
            UnitId::Num(v) => v.to_string(),
            UnitId::Text(s) => s.clone(),
        };
        for w in rows.windows(2) {
            if w[0].t == w[1].t {
                problems.push(format!("  id {name}: period {} repeated (lines {}, {})", w[0].t, w[0].line, w[1].line));
            }
        }
        let have: Vec<i64> = rows.iter().map(|r| r.t).collect();
        let missing: Vec<String> = periods.iter().filter(|t| !have.contains(t)).map(|t| t.to_string()).collect();
        if !missing.is_empty() {
            let lines: Vec<String> = rows.iter().map(|r| r.line.to_string()).collect();
            problems.push(format!(
                "  id {name} (lines {}): missing period(s) {}",
                lines.join(", "),
                missing.join(", ")
            ));
        }
    }
    if !problems.is_empty() {
        let extra = problems.len().saturating_sub(MAX_DIAGNOSTICS);
        problems.truncate(MAX_DIAGNOSTICS);
        if extra > 0 {
            problems.push(format!("  ... and {extra} more"));
        }
        return Err(CsvError::Unbalanced(problems.join("\n")));
    }
    let n = ordered.len();
    let t = periods.len();
    let mut y = Vec::with_capacity(n * t);
    let mut x = Vec::with_capacity(n * t * dim);
    for (_, rows) in &ordered {
        for r in rows {
            y.push(r.y);
            x.extend_from_slice(&r.x);
        }
    }
    Ok(PanelDataset::new(n, t, dim, y, x)?)
}

/// Units are numbered from 1 and periods from 1.
pub fn write_panel<W: Write>(writer: W, data: &PanelDataset) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "t".to_string(), "y".to_string()];
    header.extend((1..=data.dim()).map(|d| format!("x{d}")));
    w.write_record(&header)?;
    for i in 0..data.n() {
        for t in 0..data.periods() {
            let mut rec = vec![(i + 1).to_string(), (t + 1).to_string(), data.outcomes(i)[t].to_string()];
            rec.extend(data.regressor(i, t).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Cell table with its support, as stored in `--cells` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellsFile {
    pub periods: usize,
    pub dim: usize,
    pub histories: Vec<Vec<i64>>,
    pub outcomes: Vec<Vec<i64>>,
    pub p_x: Vec<f64>,
    pub p_y: Vec<Vec<f64>>,
    /// Sample size behind the table; absent for population cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

impl CellsFile {
    pub fn new(index: &SupportIndex, cells: &CellProbabilities) -> Self {
        Self {
            periods: index.periods(),
            dim: index.dim(),
            histories: index.histories().to_vec(),
            outcomes: index.outcomes().to_vec(),
            p_x: cells.p_x.clone(),
            p_y: cells.p_y.clone(),
            n: (!cells.is_population()).then_some(cells.n_eff),
        }
    }

    /// Support and cells; histories and outcomes are re-sorted with their rows.
    pub fn into_parts(self) -> Result<(SupportIndex, CellProbabilities), panelbounds_core::Error> {
        let index = SupportIndex::new(self.periods, self.dim, self.histories.clone(), self.outcomes.clone())?;
        let j_of: Vec<usize> = self.outcomes.iter().map(|o| index.find_outcome(o).unwrap()).collect();
        let mut p_x = vec![0.0; index.k()];
        let mut p_y = vec![vec![0.0; index.j()]; index.k()];
        if self.p_x.len() != self.histories.len() || self.p_y.len() != self.histories.len() {
            return Err(panelbounds_core::Error::DimensionMismatch {
                expected: self.histories.len(),
                got: self.p_x.len(),
            });
        }
        for (h, (px, row)) in self.histories.iter().zip(self.p_x.iter().zip(&self.p_y)) {
            let k = index.find_history(h).unwrap();
            p_x[k] = *px;
            if row.len() != j_of.len() {
                return Err(panelbounds_core::Error::DimensionMismatch { expected: j_of.len(), got: row.len() });
            }
            for (j, v) in j_of.iter().zip(row) {
                p_y[k][*j] = *v;
            }
        }
        let mut cells = CellProbabilities::population(p_x, p_y)?;
        cells.n_eff = self.n.unwrap_or(0);
        Ok((index, cells))
    }
}
