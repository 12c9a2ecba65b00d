//! Multimodal feature tables: schema, CSV ingestion, normalization to the
//! 0-100 scale, target transformation, and seeded train/test splitting.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Visual,
    Audio,
    Meta,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Text => "text",
            Modality::Visual => "visual",
            Modality::Audio => "audio",
            Modality::Meta => "meta",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// Zero-shot probability on the 0-100 percent scale.
    Probabilistic,
    /// Arbitrary numeric range, min-max rescaled to 0-100 by [`normalize`].
    Continuous,
    /// Takes exactly the values {0, 100} once normalized.
    Binary,
}

/// Declared shape of one feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub modality: Modality,
    pub kind: ColumnKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

impl ColumnSpec {
    pub fn new(name: &str, modality: Modality, kind: ColumnKind) -> Self {
        let range = match kind {
            ColumnKind::Probabilistic | ColumnKind::Binary => Some([0.0, 100.0]),
            ColumnKind::Continuous => None,
        };
        ColumnSpec {
            name: name.to_string(),
            modality,
            kind,
            range,
        }
    }

    /// Effective declared range: probabilistic and binary columns default to [0, 100].
    pub fn declared_range(&self) -> Option<[f64; 2]> {
        match self.kind {
            ColumnKind::Probabilistic | ColumnKind::Binary => {
                Some(self.range.unwrap_or([0.0, 100.0]))
            }
            ColumnKind::Continuous => self.range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    Log1p,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub name: String,
    pub transform: TargetTransform,
}

/// The schema JSON contract: target description plus ordered column specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub target: TargetSpec,
    pub columns: Vec<ColumnSpec>,
}

impl TableSchema {
    pub fn from_json(text: &str) -> Result<Self> {
        let schema: TableSchema =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("schema json: {e}")))?;
        schema.check_unique_names()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Schema(format!("cannot read schema file {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("schema serialize: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    fn check_unique_names(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name `{}`", c.name)));
            }
            if c.name == self.target.name {
                return Err(Error::Schema(format!(
                    "column `{}` collides with the target name",
                    c.name
                )));
            }
        }
        Ok(())
    }

    /// Stable content hash of the column layout and target, used to tie
    /// models to the tables they were trained on.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.target.name.as_bytes());
        hasher.update(match self.target.transform {
            TargetTransform::Log1p => b"log1p".as_slice(),
            TargetTransform::None => b"none".as_slice(),
        });
        for c in &self.columns {
            hasher.update(c.name.as_bytes());
            hasher.update([b'|']);
            hasher.update(c.modality.to_string().as_bytes());
            hasher.update([b'|']);
            hasher.update(format!("{:?}", c.kind).as_bytes());
            hasher.update([b';']);
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

/// Per-column affine map recorded by [`normalize`] so raw units can be recovered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum NormMap {
    /// normalized = (raw - offset) * scale
    Affine { offset: f64, scale: f64 },
    /// Degenerate column: every raw value equals `raw`, normalized to 50.
    Constant { raw: f64 },
}

impl NormMap {
    pub fn apply(&self, raw: f64) -> f64 {
        match *self {
            NormMap::Affine { offset, scale } => (raw - offset) * scale,
            NormMap::Constant { .. } => 50.0,
        }
    }

    pub fn invert(&self, normalized: f64) -> f64 {
        match *self {
            NormMap::Affine { offset, scale } => normalized / scale + offset,
            NormMap::Constant { raw } => raw,
        }
    }
}

/// Counts of rows and cells touched while ingesting a CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_dropped: usize,
    pub cells_filled: usize,
    pub cells_clamped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    DropRow,
    FillZero,
}

/// Options for [`FeatureTable::ingest_with_options`].
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub missing_policy: MissingPolicy,
    /// When true, out-of-range values in range-declared columns are clamped
    /// instead of rejected.
    pub clamp: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            missing_policy: MissingPolicy::DropRow,
            clamp: false,
        }
    }
}

/// A rectangular table of modality-tagged numeric features plus a target
/// vector. Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub schema: TableSchema,
    /// n_rows x p feature matrix.
    pub values: Matrix,
    /// Transformed target (e.g. log1p of the raw column).
    pub target: Vec<f64>,
    /// Raw target column as read from the file, kept so writes round-trip.
    pub raw_target: Vec<f64>,
    pub row_ids: Vec<String>,
    /// Populated by [`normalize`]; one entry per column.
    pub norm_maps: Option<Vec<NormMap>>,
}

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.n_cols()
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.schema.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.values[(i, j)]).collect()
    }

    /// Extract the given rows as a dense matrix (order preserved).
    pub fn rows_matrix(&self, rows: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), self.n_cols());
        for (out_i, &r) in rows.iter().enumerate() {
            m.row_mut(out_i).copy_from_slice(self.values.row(r));
        }
        m
    }

    pub fn target_for(&self, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| self.target[r]).collect()
    }

    /// Parse a feature CSV against a schema file. See the README for the
    /// CSV contract: `row_id` column, one column per schema entry, and the
    /// target column named by the schema.
    pub fn ingest(path: &Path, schema_path: &Path, policy: MissingPolicy) -> Result<(Self, IngestReport)> {
        let schema = TableSchema::load(schema_path)?;
        Self::ingest_with_options(
            path,
            &schema,
            IngestOptions {
                missing_policy: policy,
                ..IngestOptions::default()
            },
        )
    }

    pub fn ingest_with_options(
        path: &Path,
        schema: &TableSchema,
        opts: IngestOptions,
    ) -> Result<(Self, IngestReport)> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;

        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(format!("csv header: {e}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();

        let id_pos = headers
            .iter()
            .position(|h| h == "row_id")
            .ok_or_else(|| Error::Schema("missing required `row_id` column".into()))?;
        let target_pos = headers
            .iter()
            .position(|h| *h == schema.target.name)
            .ok_or_else(|| Error::Schema(format!("missing target column `{}`", schema.target.name)))?;

        let mut col_pos = Vec::with_capacity(schema.columns.len());
        for c in &schema.columns {
            let pos = headers
                .iter()
                .position(|h| *h == c.name)
                .ok_or_else(|| Error::Schema(format!("missing column `{}`", c.name)))?;
            col_pos.push(pos);
        }
        for (i, h) in headers.iter().enumerate() {
            if i != id_pos && i != target_pos && !col_pos.contains(&i) {
                return Err(Error::Schema(format!("unexpected column `{h}`")));
            }
        }

        let p = schema.columns.len();
        let mut report = IngestReport::default();
        let mut values: Vec<f64> = Vec::new();
        let mut raw_target: Vec<f64> = Vec::new();
        let mut row_ids: Vec<String> = Vec::new();
        let mut seen_ids: HashSet<String> = HashSet::new();
        let mut row_buf: Vec<f64> = vec![0.0; p];

        for (rec_idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("csv row {}: {e}", rec_idx + 1)))?;
            report.rows_read += 1;
            let row_no = rec_idx + 1;

            let id = record
                .get(id_pos)
                .ok_or_else(|| Error::Parse(format!("row {row_no}: missing row_id cell")))?
                .to_string();
            if id.is_empty() {
                return Err(Error::Parse(format!("row {row_no}: empty row_id")));
            }

            let mut drop = false;
            let mut filled = 0usize;
            let mut clamped = 0usize;

            let raw_t = match parse_cell(record.get(target_pos), row_no, &schema.target.name)? {
                Some(v) => v,
                None => match opts.missing_policy {
                    MissingPolicy::DropRow => {
                        report.rows_dropped += 1;
                        continue;
                    }
                    MissingPolicy::FillZero => {
                        filled += 1;
                        0.0
                    }
                },
            };

            for (j, c) in schema.columns.iter().enumerate() {
                let cell = parse_cell(record.get(col_pos[j]), row_no, &c.name)?;
                let mut v = match cell {
                    Some(v) => v,
                    None => match opts.missing_policy {
                        MissingPolicy::DropRow => {
                            drop = true;
                            break;
                        }
                        MissingPolicy::FillZero => {
                            filled += 1;
                            0.0
                        }
                    },
                };
                if let Some([lo, hi]) = c.declared_range() {
                    if v < lo || v > hi {
                        if opts.clamp {
                            v = v.clamp(lo, hi);
                            clamped += 1;
                        } else {
                            return Err(Error::Schema(format!(
                                "row {row_no}: column `{}` value {v} outside declared range [{lo}, {hi}]",
                                c.name
                            )));
                        }
                    }
                }
                row_buf[j] = v;
            }
            if drop {
                report.rows_dropped += 1;
                continue;
            }

            if !seen_ids.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            report.cells_filled += filled;
            report.cells_clamped += clamped;
            values.extend_from_slice(&row_buf);
            raw_target.push(raw_t);
            row_ids.push(id);
        }
        report.rows_kept = row_ids.len();

        let target = transform_target(&raw_target, schema.target.transform)?;
        let table = FeatureTable {
            schema: schema.clone(),
            values: Matrix::from_vec(row_ids.len(), p, values),
            target,
            raw_target,
            row_ids,
            norm_maps: None,
        };
        Ok((table, report))
    }

    /// Assemble a table directly from columns. Used by the synthetic
    /// generator and by annotation flattening.
    pub fn from_columns(
        schema: TableSchema,
        row_ids: Vec<String>,
        columns: &[Vec<f64>],
        raw_target: Vec<f64>,
    ) -> Result<Self> {
        let n = row_ids.len();
        let p = schema.columns.len();
        if columns.len() != p {
            return Err(Error::Schema(format!(
                "expected {p} columns, got {}",
                columns.len()
            )));
        }
        for col in columns {
            if col.len() != n {
                return Err(Error::Schema("ragged column lengths".into()));
            }
        }
        let mut seen = HashSet::new();
        for id in &row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let mut values = Matrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                values[(i, j)] = columns[j][i];
            }
        }
        let target = transform_target(&raw_target, schema.target.transform)?;
        Ok(FeatureTable {
            schema,
            values,
            target,
            raw_target,
            row_ids,
            norm_maps: None,
        })
    }

    /// Write the table back out as a feature CSV; the raw (untransformed)
    /// target column is emitted so that re-ingesting round-trips exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
        let mut header = vec!["row_id".to_string()];
        header.extend(self.schema.columns.iter().map(|c| c.name.clone()));
        header.push(self.schema.target.name.clone());
        w.write_record(&header)
            .map_err(|e| Error::Parse(format!("csv write: {e}")))?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            record.push(self.row_ids[i].clone());
            for j in 0..self.n_cols() {
                record.push(format_float(self.values[(i, j)]));
            }
            record.push(format_float(self.raw_target[i]));
            w.write_record(&record)
                .map_err(|e| Error::Parse(format!("csv write: {e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Check every invariant the table claims: finite values within declared
    /// ranges, binary columns in {0, 100}, unique row ids, finite target.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for id in &self.row_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for (j, c) in self.schema.columns.iter().enumerate() {
            let range = c.declared_range();
            for i in 0..self.n_rows() {
                let v = self.values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Parse(format!(
                        "non-finite value in column `{}` row {i}",
                        c.name
                    )));
                }
                if let Some([lo, hi]) = range {
                    if v < lo || v > hi {
                        return Err(Error::Schema(format!(
                            "column `{}` value {v} outside [{lo}, {hi}]",
                            c.name
                        )));
                    }
                }
                if c.kind == ColumnKind::Binary && self.norm_maps.is_some() && v != 0.0 && v != 100.0
                {
                    return Err(Error::Schema(format!(
                        "binary column `{}` holds {v}, expected 0 or 100",
                        c.name
                    )));
                }
            }
        }
        for t in &self.target {
            if !t.is_finite() {
                return Err(Error::Parse("non-finite target entry".into()));
            }
        }
        Ok(())
    }
}

fn parse_cell(cell: Option<&str>, row_no: usize, col: &str) -> Result<Option<f64>> {
    let Some(text) = cell else {
        return Ok(None);
    };
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("row {row_no}, column `{col}`: cannot parse `{text}`")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "row {row_no}, column `{col}`: non-finite value"
        )));
    }
    Ok(Some(v))
}

fn transform_target(raw: &[f64], transform: TargetTransform) -> Result<Vec<f64>> {
    raw.iter()
        .map(|&v| {
            let t = match transform {
                TargetTransform::Log1p => {
                    if v <= -1.0 {
                        return Err(Error::Parse(format!(
                            "target value {v} invalid for log1p transform"
                        )));
                    }
                    v.ln_1p()
                }
                TargetTransform::None => v,
            };
            if !t.is_finite() {
                return Err(Error::Parse("non-finite transformed target".into()));
            }
            Ok(t)
        })
        .collect()
}

/// Shortest round-trip decimal representation.
fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    // ryu emits "1.0" for integers; keep that, it parses back identically.
    if buf.is_empty() {
        buf.push('0');
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips.
    format!("{v}")
}

/// Min-max rescale continuous columns to [0, 100], pass probabilistic
/// columns through, map binary {0,1} data to {0,100}, and send constant
/// continuous columns to the midpoint 50. Idempotent on normalized tables.
pub fn normalize(raw: &FeatureTable) -> Result<FeatureTable> {
    let n = raw.n_rows();
    let p = raw.n_cols();
    let mut maps = Vec::with_capacity(p);
    let mut schema = raw.schema.clone();

    for (j, c) in raw.schema.columns.iter().enumerate() {
        for i in 0..n {
            if !raw.values[(i, j)].is_finite() {
                return Err(Error::Parse(format!(
                    "non-finite value in column `{}` row {i}",
                    c.name
                )));
            }
        }
        let map = match c.kind {
            ColumnKind::Probabilistic => NormMap::Affine {
                offset: 0.0,
                scale: 1.0,
            },
            ColumnKind::Binary => {
                let mut max_v = f64::NEG_INFINITY;
                for i in 0..n {
                    let v = raw.values[(i, j)];
                    if v != 0.0 && v != 1.0 && v != 100.0 {
                        return Err(Error::Schema(format!(
                            "binary column `{}` holds {v}; expected 0/1 or 0/100",
                            c.name
                        )));
                    }
                    max_v = max_v.max(v);
                }
                if max_v == 1.0 {
                    NormMap::Affine {
                        offset: 0.0,
                        scale: 100.0,
                    }
                } else {
                    NormMap::Affine {
                        offset: 0.0,
                        scale: 1.0,
                    }
                }
            }
            ColumnKind::Continuous => {
                let col = raw.column(j);
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if n == 0 {
                    NormMap::Affine {
                        offset: 0.0,
                        scale: 1.0,
                    }
                } else if lo == hi {
                    NormMap::Constant { raw: lo }
                } else {
                    NormMap::Affine {
                        offset: lo,
                        scale: 100.0 / (hi - lo),
                    }
                }
            }
        };
        maps.push(map);
        schema.columns[j].range = Some([0.0, 100.0]);
    }

    let mut values = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            values[(i, j)] = maps[j].apply(raw.values[(i, j)]);
        }
    }
    let table = FeatureTable {
        schema,
        values,
        target: raw.target.clone(),
        raw_target: raw.raw_target.clone(),
        row_ids: raw.row_ids.clone(),
        norm_maps: Some(maps),
    };
    table.validate()?;
    Ok(table)
}

/// Disjoint, exhaustive train/test row partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndex {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
}

impl SplitIndex {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("split json: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)
            .map_err(|e| Error::Parse(format!("split serialize: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Uniform random permutation followed by a prefix split. Deterministic for
/// a fixed (n, fraction, seed). The train size is `round(n * fraction)`
/// clamped so both partitions are non-empty.
pub fn split(table: &FeatureTable, train_fraction: f64, seed: u64) -> Result<SplitIndex> {
    if table.n_rows() < 5 {
        return Err(Error::Config(format!(
            "need at least 5 rows to split, got {}",
            table.n_rows()
        )));
    }
    split_n(table.n_rows(), train_fraction, seed)
}

pub fn split_n(n: usize, train_fraction: f64, seed: u64) -> Result<SplitIndex> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let k = ((n as f64) * train_fraction).round() as usize;
    let k = k.clamp(1, n.saturating_sub(1).max(1));
    let test_rows = order.split_off(k);
    Ok(SplitIndex {
        train_rows: order,
        test_rows,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tiny_schema() -> TableSchema {
        TableSchema {
            target: TargetSpec {
                name: "views".into(),
                transform: TargetTransform::Log1p,
            },
            columns: vec![
                ColumnSpec::new("humor", Modality::Text, ColumnKind::Probabilistic),
                ColumnSpec::new("meme", Modality::Visual, ColumnKind::Probabilistic),
            ],
        }
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn ingest_applies_log1p() {
        let csv = write_temp("row_id,humor,meme,views\na,95,10,0\nb,50,50,9\nc,0,100,99\n");
        let schema = tiny_schema();
        let (table, report) =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap();
        assert_eq!(report.rows_kept, 3);
        assert_eq!(table.target, vec![0.0, (10.0f64).ln(), (100.0f64).ln()]);
        assert_eq!(table.values[(0, 0)], 95.0);
        table.validate().unwrap();
    }

    #[test]
    fn out_of_range_probabilistic_is_schema_error() {
        let csv = write_temp("row_id,humor,meme,views\na,120,10,3\n");
        let schema = tiny_schema();
        let err =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap_err();
        assert_eq!(err.kind(), "SchemaError");
        assert!(err.to_string().contains("humor"), "{err}");
    }

    #[test]
    fn clamp_option_clamps_and_counts() {
        let csv = write_temp("row_id,humor,meme,views\na,120,10,3\n");
        let schema = tiny_schema();
        let opts = IngestOptions {
            clamp: true,
            ..IngestOptions::default()
        };
        let (table, report) =
            FeatureTable::ingest_with_options(csv.path(), &schema, opts).unwrap();
        assert_eq!(table.values[(0, 0)], 100.0);
        assert_eq!(report.cells_clamped, 1);
    }

    #[test]
    fn missing_cell_drop_row() {
        let csv = write_temp("row_id,humor,meme,views\na,95,10,3\nb,,10,4\nc,5,5,5\n");
        let schema = tiny_schema();
        let (table, report) =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap();
        assert_eq!(table.n_rows(), 2);
        assert_eq!(report.rows_dropped, 1);
        assert_eq!(table.row_ids, vec!["a", "c"]);
    }

    #[test]
    fn missing_cell_fill_zero() {
        let csv = write_temp("row_id,humor,meme,views\na,95,,3\n");
        let schema = tiny_schema();
        let opts = IngestOptions {
            missing_policy: MissingPolicy::FillZero,
            ..IngestOptions::default()
        };
        let (table, report) = FeatureTable::ingest_with_options(csv.path(), &schema, opts).unwrap();
        assert_eq!(table.values[(0, 1)], 0.0);
        assert_eq!(report.cells_filled, 1);
    }

    #[test]
    fn duplicate_row_id_rejected() {
        let csv = write_temp("row_id,humor,meme,views\na,1,2,3\na,4,5,6\n");
        let schema = tiny_schema();
        let err =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap_err();
        assert_eq!(err.kind(), "DuplicateIdError");
    }

    #[test]
    fn unparseable_cell_names_row_and_column() {
        let csv = write_temp("row_id,humor,meme,views\na,ninety,2,3\n");
        let schema = tiny_schema();
        let err =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap_err();
        assert_eq!(err.kind(), "ParseError");
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("humor"), "{msg}");
    }

    #[test]
    fn schema_mismatch_names_column() {
        let csv = write_temp("row_id,humor,views\na,1,3\n");
        let schema = tiny_schema();
        let err =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap_err();
        assert!(err.to_string().contains("meme"), "{err}");
    }

    fn continuous_table(values: &[f64]) -> FeatureTable {
        let schema = TableSchema {
            target: TargetSpec {
                name: "y".into(),
                transform: TargetTransform::None,
            },
            columns: vec![ColumnSpec::new("x", Modality::Audio, ColumnKind::Continuous)],
        };
        let ids = (0..values.len()).map(|i| format!("r{i}")).collect();
        FeatureTable::from_columns(schema, ids, &[values.to_vec()], vec![0.0; values.len()])
            .unwrap()
    }

    #[test]
    fn normalize_min_max() {
        let t = normalize(&continuous_table(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(t.column(0), vec![0.0, 50.0, 100.0]);
    }

    #[test]
    fn normalize_probabilistic_passthrough() {
        let schema = tiny_schema();
        let table = FeatureTable::from_columns(
            schema,
            vec!["a".into(), "b".into(), "c".into()],
            &[vec![0.0, 37.0, 100.0], vec![1.0, 2.0, 3.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let t = normalize(&table).unwrap();
        assert_eq!(t.column(0), vec![0.0, 37.0, 100.0]);
    }

    #[test]
    fn normalize_constant_to_midpoint() {
        let t = normalize(&continuous_table(&[7.0, 7.0, 7.0])).unwrap();
        assert_eq!(t.column(0), vec![50.0, 50.0, 50.0]);
        match t.norm_maps.as_ref().unwrap()[0] {
            NormMap::Constant { raw } => assert_eq!(raw, 7.0),
            _ => panic!("expected constant map"),
        }
        assert_eq!(t.norm_maps.as_ref().unwrap()[0].invert(50.0), 7.0);
    }

    #[test]
    fn normalize_is_idempotent() {
        let t1 = normalize(&continuous_table(&[2.0, 4.0, 6.0])).unwrap();
        let t2 = normalize(&t1).unwrap();
        assert_eq!(t1.column(0), t2.column(0));
    }

    #[test]
    fn normalize_records_invertible_map() {
        let raw = [3.0, 13.0, 7.5];
        let t = normalize(&continuous_table(&raw)).unwrap();
        let map = t.norm_maps.as_ref().unwrap()[0];
        for (i, &r) in raw.iter().enumerate() {
            let inv = map.invert(t.values[(i, 0)]);
            assert!((inv - r).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_zero_one_maps_to_percent() {
        let schema = TableSchema {
            target: TargetSpec {
                name: "y".into(),
                transform: TargetTransform::None,
            },
            columns: vec![ColumnSpec::new("flag", Modality::Meta, ColumnKind::Binary)],
        };
        let table = FeatureTable::from_columns(
            schema,
            vec!["a".into(), "b".into()],
            &[vec![0.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let t = normalize(&table).unwrap();
        assert_eq!(t.column(0), vec![0.0, 100.0]);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let t = continuous_table(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let s1 = split(&t, 0.8, 1).unwrap();
        let s2 = split(&t, 0.8, 1).unwrap();
        assert_eq!(s1.train_rows.len(), 8);
        assert_eq!(s1.test_rows.len(), 2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn split_at_corpus_scale() {
        let s = split_n(162_965, 0.8, 7).unwrap();
        assert_eq!(s.train_rows.len(), 130_372);
        assert_eq!(s.test_rows.len(), 32_593);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let t = continuous_table(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(split(&t, 1.5, 0).unwrap_err().kind(), "ConfigError");
        assert_eq!(split(&t, 0.0, 0).unwrap_err().kind(), "ConfigError");
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let csv = write_temp("row_id,humor,meme,views\na,95.25,10,0\nb,50,49.75,12345\n");
        let schema = tiny_schema();
        let (table, _) =
            FeatureTable::ingest_with_options(csv.path(), &schema, IngestOptions::default())
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.csv");
        table.write_csv(&out).unwrap();
        let (again, _) =
            FeatureTable::ingest_with_options(&out, &schema, IngestOptions::default()).unwrap();
        assert_eq!(table.values, again.values);
        assert_eq!(table.target, again.target);
        assert_eq!(table.row_ids, again.row_ids);
        assert_eq!(table.schema, again.schema);
    }

    #[test]
    fn fingerprint_tracks_schema() {
        let a = tiny_schema().fingerprint();
        let mut other = tiny_schema();
        other.columns[0].name = "irony".into();
        assert_ne!(a, other.fingerprint());
        assert_eq!(a, tiny_schema().fingerprint());
    }
}
