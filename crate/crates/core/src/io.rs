//! CSV and TOML formats for datasets, subordinator samples, traces and
//! posterior summaries. Floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Interval, Jump, JumpSet, SubordinatorPath};
use crate::sampler::ProposalRecord;

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().has_headers(false).from_writer(f))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

fn parse_f64(path: &Path, row: usize, col: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::format(path, format!("row {row}, column {col}: cannot parse {s:?}")))
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::format(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

/// Tabular dataset: inputs, targets and the observed flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub observed: Vec<bool>,
}

impl DataTable {
    fn select(&self, keep: bool) -> (DMatrix<f64>, DVector<f64>) {
        let rows: Vec<usize> = (0..self.observed.len()).filter(|&i| self.observed[i] == keep).collect();
        (self.x.select_rows(&rows), self.y.select_rows(&rows))
    }

    pub fn observed(&self) -> (DMatrix<f64>, DVector<f64>) {
        self.select(true)
    }

    pub fn held_out(&self) -> (DMatrix<f64>, DVector<f64>) {
        self.select(false)
    }
}

fn x_header(d: usize) -> Vec<String> {
    (0..d).map(|k| format!("x_{k}")).collect()
}

/// Columns `x_0..x_{d-1},y,observed`.
pub fn write_dataset(path: &Path, table: &DataTable) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = x_header(table.x.ncols());
    header.extend(["y".to_string(), "observed".to_string()]);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..table.x.nrows() {
        let mut rec: Vec<String> = table.x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(table.y[i].to_string());
        rec.push(u8::from(table.observed[i]).to_string());
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Column indices of `x_0, x_1, ...` in order.
fn x_columns(path: &Path, headers: &csv::StringRecord) -> Result<Vec<usize>> {
    let mut cols = Vec::new();
    while let Some(i) = headers.iter().position(|h| h == format!("x_{}", cols.len())) {
        cols.push(i);
    }
    if headers.iter().any(|h| h.starts_with("x_")) && cols.len() != headers.iter().filter(|h| h.starts_with("x_")).count() {
        return Err(Error::format(path, "input columns must be named x_0, x_1, ... without gaps"));
    }
    Ok(cols)
}

/// Reads a dataset CSV. A missing `observed` column marks every row observed.
pub fn read_dataset(path: &Path) -> Result<DataTable> {
    let mut r = reader(path)?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let xc = x_columns(path, &headers)?;
    if xc.is_empty() {
        return Err(Error::format(path, "no input columns (expected x_0, x_1, ...)"));
    }
    let yc = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::format(path, "missing column y"))?;
    let oc = headers.iter().position(|h| h == "observed");
    let (mut xs, mut ys, mut obs) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for &c in &xc {
            xs.push(parse_f64(path, row, &headers[c], &rec[c])?);
        }
        ys.push(parse_f64(path, row, "y", &rec[yc])?);
        obs.push(match oc.map(|c| &rec[c]) {
            None | Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            Some(other) => {
                return Err(Error::format(path, format!("row {row}: observed must be 0 or 1, got {other:?}")))
            }
        });
    }
    let n = ys.len();
    Ok(DataTable {
        x: DMatrix::from_row_slice(n, xc.len(), &xs),
        y: DVector::from_vec(ys),
        observed: obs,
    })
}

/// Input points from the `x_` columns of any CSV; other columns are ignored.
/// An empty file yields zero rows of `dims` columns.
pub fn read_points(path: &Path, dims: usize) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(DMatrix::zeros(0, dims));
    }
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let xc = x_columns(path, &headers)?;
    if xc.len() != dims {
        return Err(Error::format(path, format!("expected {dims} input columns, found {}", xc.len())));
    }
    let mut xs = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for &c in &xc {
            xs.push(parse_f64(path, row, &headers[c], &rec[c])?);
        }
    }
    Ok(DMatrix::from_row_slice(xs.len() / dims.max(1), dims, &xs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct JumpRow {
    chain: usize,
    sweep: usize,
    dim: usize,
    position: f64,
    magnitude: f64,
}

/// One subordinator path tagged with the chain and sweep it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub chain: usize,
    pub sweep: usize,
    pub path: SubordinatorPath,
}

/// Columns `chain,sweep,dim,position,magnitude`, jumps sorted by position.
pub fn write_path_samples<'a>(
    path: &Path,
    samples: impl IntoIterator<Item = (usize, usize, &'a SubordinatorPath)>,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["chain", "sweep", "dim", "position", "magnitude"])
        .map_err(|e| csv_err(path, e))?;
    for (chain, sweep, p) in samples {
        for (dim, set) in p.jump_sets().iter().enumerate() {
            for j in set.sorted_jumps() {
                w.serialize(JumpRow {
                    chain,
                    sweep,
                    dim,
                    position: j.position,
                    magnitude: j.magnitude,
                })
                .map_err(|e| csv_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads paths back. `keys` lists every (chain, sweep) to rebuild so that
/// samples without jumps survive the round trip; `None` takes the keys
/// present in the file.
pub fn read_path_samples(
    path: &Path,
    domains: &[Interval],
    keys: Option<&[(usize, usize)]>,
) -> Result<Vec<PathSample>> {
    let mut r = reader(path)?;
    let mut grouped: BTreeMap<(usize, usize), Vec<Vec<Jump>>> = BTreeMap::new();
    if let Some(keys) = keys {
        for &k in keys {
            grouped.insert(k, vec![Vec::new(); domains.len()]);
        }
    }
    for (row, rec) in r.deserialize::<JumpRow>().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.dim >= domains.len() {
            return Err(Error::format(path, format!("row {row}: dimension {} out of range", rec.dim)));
        }
        let key = (rec.chain, rec.sweep);
        if keys.is_some() && !grouped.contains_key(&key) {
            return Err(Error::format(path, format!("row {row}: unexpected sample {key:?}")));
        }
        grouped.entry(key).or_insert_with(|| vec![Vec::new(); domains.len()])[rec.dim].push(Jump {
            position: rec.position,
            magnitude: rec.magnitude,
        });
    }
    let order: Vec<(usize, usize)> = match keys {
        Some(k) => k.to_vec(),
        None => grouped.keys().copied().collect(),
    };
    order
        .into_iter()
        .map(|key| {
            let dims = grouped.remove(&key).unwrap_or_default();
            let sets = dims
                .into_iter()
                .zip(domains)
                .map(|(jumps, d)| JumpSet::new(*d, jumps))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::format(path, format!("sample {key:?}: {e}")))?;
            Ok(PathSample {
                chain: key.0,
                sweep: key.1,
                path: SubordinatorPath::new(sets)?,
            })
        })
        .collect()
}

/// One row per proposal: `chain,sweep,dim,interval,proposed_log_lik,log_lik,accepted`.
pub fn write_trace(path: &Path, traces: &[Vec<ProposalRecord>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["chain", "sweep", "dim", "interval", "proposed_log_lik", "log_lik", "accepted"])
        .map_err(|e| csv_err(path, e))?;
    for (chain, trace) in traces.iter().enumerate() {
        for r in trace {
            w.write_record(&[
                chain.to_string(),
                r.sweep.to_string(),
                r.dim.to_string(),
                r.interval.to_string(),
                r.proposed_log_lik.to_string(),
                r.log_lik.to_string(),
                u8::from(r.accepted).to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Predictive summary at a set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub x: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub posterior_std: DVector<f64>,
    pub predictive_std: DVector<f64>,
}

/// Half-width of the exported confidence band, in standard deviations.
pub const BAND_WIDTH: f64 = 3.0;

const POSTERIOR_COLUMNS: [&str; 5] = [
    "posterior_mean",
    "posterior_std",
    "predictive_std",
    "predictive_lower",
    "predictive_upper",
];

pub fn write_posterior(path: &Path, t: &PosteriorTable) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = x_header(t.x.ncols());
    header.extend(POSTERIOR_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..t.x.nrows() {
        let mut rec: Vec<String> = t.x.row(i).iter().map(|v| v.to_string()).collect();
        let (m, s) = (t.mean[i], t.predictive_std[i]);
        for v in [m, t.posterior_std[i], s, m - BAND_WIDTH * s, m + BAND_WIDTH * s] {
            rec.push(v.to_string());
        }
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_posterior(path: &Path) -> Result<PosteriorTable> {
    let mut r = reader(path)?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let xc = x_columns(path, &headers)?;
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, format!("missing column {name}")))
    };
    let (mc, pc, sc) = (col("posterior_mean")?, col("posterior_std")?, col("predictive_std")?);
    let (mut xs, mut m, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for &c in &xc {
            xs.push(parse_f64(path, row, &headers[c], &rec[c])?);
        }
        m.push(parse_f64(path, row, "posterior_mean", &rec[mc])?);
        p.push(parse_f64(path, row, "posterior_std", &rec[pc])?);
        s.push(parse_f64(path, row, "predictive_std", &rec[sc])?);
    }
    Ok(PosteriorTable {
        x: DMatrix::from_row_slice(m.len(), xc.len(), &xs),
        mean: DVector::from_vec(m),
        posterior_std: DVector::from_vec(p),
        predictive_std: DVector::from_vec(s),
    })
}

/// Identifies a stored sample by chain and sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleKey {
    pub chain: usize,
    pub sweep: usize,
}
