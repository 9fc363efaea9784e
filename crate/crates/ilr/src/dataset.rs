//! Datasets whose features are intervals and whose labels may be unknown.
//!
//! A [`Dataset`] is a list of rows, each carrying one [`Interval`] per
//! feature plus an [`UncertainLabel`]. Precise data is the special case
//! where every interval is degenerate and every label known, so one type
//! serves the whole pipeline.
//!
//! The module also covers the data life cycle around model fitting:
//! synthesizing ground-truth samples, censoring precise values into
//! intervals, hiding labels, collapsing uncertainty back out, and CSV/JSON
//! round-tripping with a content digest for provenance tracking.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::{parse_label_text, Interval, UncertainLabel};
use crate::logistic::{sigmoid, Coefficients};

/// One observation: interval features and a possibly-unknown label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub features: Vec<Interval>,
    pub label: UncertainLabel,
}

impl From<(Interval, bool)> for DataPoint {
    /// Single-feature point with a known label.
    fn from((x, y): (Interval, bool)) -> Self {
        DataPoint {
            features: vec![x],
            label: UncertainLabel::Known(y),
        }
    }
}

impl From<(Interval, UncertainLabel)> for DataPoint {
    fn from((x, y): (Interval, UncertainLabel)) -> Self {
        DataPoint {
            features: vec![x],
            label: y,
        }
    }
}

/// A rectangular dataset with named feature columns.
///
/// Construction checks that every row has one interval per feature name;
/// after that, code may rely on uniform dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    feature_names: Vec<String>,
    points: Vec<DataPoint>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    feature_names: Vec<String>,
    points: Vec<DataPoint>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;

    fn try_from(repr: DatasetRepr) -> Result<Self> {
        Dataset::new(repr.feature_names, repr.points)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(d: Dataset) -> DatasetRepr {
        DatasetRepr {
            feature_names: d.feature_names,
            points: d.points,
        }
    }
}

/// How to turn a precise value into an interval that covers it.
///
/// `epsilon` is the censoring half-width: every generated interval has
/// width `2 * epsilon` and contains the original value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensorMode {
    /// The interval is centered on a point drawn uniformly from
    /// `[x - eps, x + eps]`, so the true value lands uniformly inside it.
    Symmetric,
    /// The true value sits at the left end: `[x, x + 2 eps]`.
    LeftBiased,
    /// The true value sits at the right end: `[x - 2 eps, x]`.
    RightBiased,
    /// Right-biased below `split`, left-biased at or above it. This makes
    /// the censoring direction depend on the value itself, the adversarial
    /// pattern that midpoint imputation handles worst.
    SplitBiased { split: f64 },
}

/// How to reduce an uncertain dataset to a precise one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseStrategy {
    /// Replace every interval by its midpoint; rows with unknown labels
    /// are dropped, since a label has no midpoint.
    Midpoint,
    /// Keep only rows that were precise to begin with.
    DropUncertain,
}

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

/// Options for reading a dataset from CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label: LabelColumn,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label: LabelColumn::Name("label".to_string()),
        }
    }
}

/// Default column names `x1, x2, ...` for synthesized data.
pub fn default_feature_names(dimension: usize) -> Vec<String> {
    (1..=dimension).map(|j| format!("x{j}")).collect()
}

impl Dataset {
    /// Build a dataset, checking that every row matches the column count.
    pub fn new(feature_names: Vec<String>, points: Vec<DataPoint>) -> Result<Self> {
        let dim = feature_names.len();
        for p in &points {
            if p.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.features.len(),
                });
            }
        }
        Ok(Dataset {
            feature_names,
            points,
        })
    }

    /// Wrap precise numeric rows with known labels, naming columns `x1..`.
    pub fn from_precise(features: &[Vec<f64>], labels: &[bool]) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: labels.len(),
            });
        }
        let dim = features.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(features.len());
        for (x, &y) in features.iter().zip(labels) {
            let mut row = Vec::with_capacity(x.len());
            for &v in x {
                row.push(Interval::new(v, v)?);
            }
            points.push(DataPoint {
                features: row,
                label: UncertainLabel::Known(y),
            });
        }
        Dataset::new(default_feature_names(dim), points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of feature columns (not counting the label).
    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Rows whose label is unknown, in order.
    pub fn unknown_label_rows(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.label.is_known())
            .map(|(i, _)| i)
            .collect()
    }

    /// Rows with at least one non-degenerate feature interval.
    pub fn uncertain_feature_rows(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.features.iter().any(|iv| !iv.is_degenerate()))
            .map(|(i, _)| i)
            .collect()
    }

    /// True when every feature is degenerate and every label known.
    pub fn is_fully_precise(&self) -> bool {
        self.uncertain_feature_rows().is_empty() && self.unknown_label_rows().is_empty()
    }

    /// Extract features as plain numbers, failing if any cell is a real
    /// interval. The error lists the offending rows so callers can report
    /// them instead of a bare refusal.
    pub fn precise_features(&self) -> Result<Vec<Vec<f64>>> {
        let bad = self.uncertain_feature_rows();
        if !bad.is_empty() {
            return Err(Error::UncertainInput {
                rows: bad,
                context: "precise features required".to_string(),
            });
        }
        Ok(self
            .points
            .iter()
            .map(|p| p.features.iter().map(Interval::lo).collect())
            .collect())
    }

    /// Extract labels as 0.0/1.0, failing if any is unknown.
    pub fn known_labels(&self) -> Result<Vec<f64>> {
        let bad = self.unknown_label_rows();
        if !bad.is_empty() {
            return Err(Error::UncertainInput {
                rows: bad,
                context: "known labels required".to_string(),
            });
        }
        Ok(self
            .points
            .iter()
            .map(|p| p.label.as_f64().expect("checked above"))
            .collect())
    }

    /// Feature midpoints for every row, whether or not cells are precise.
    pub fn midpoint_features(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.features.iter().map(Interval::midpoint).collect())
            .collect()
    }

    /// Draw `n` rows from a known logistic model.
    ///
    /// Features are uniform on `x_range` (independently per column); the
    /// label is Bernoulli with success probability given by `truth`. The
    /// same `seed` always reproduces the same dataset, byte for byte.
    pub fn synthesize(n: usize, seed: u64, truth: &Coefficients, x_range: Interval) -> Dataset {
        let m = truth.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..m)
                .map(|_| x_range.lo() + rng.gen::<f64>() * x_range.width())
                .collect();
            let p = sigmoid(truth.score(&x));
            let y = rng.gen::<f64>() < p;
            points.push(DataPoint {
                features: x.into_iter().map(Interval::point).collect(),
                label: UncertainLabel::Known(y),
            });
        }
        Dataset {
            feature_names: default_feature_names(m),
            points,
        }
    }

    /// Censor precise features into intervals of width `2 * epsilon`.
    ///
    /// Every generated interval contains the value it replaced; the mode
    /// controls where in the interval that value sits. Only
    /// [`CensorMode::Symmetric`] consumes randomness (one draw per cell, in
    /// row-major order); the biased modes are deterministic.
    pub fn intervalize(&self, mode: CensorMode, epsilon: f64, seed: u64) -> Result<Dataset> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "censoring half-width must be finite and non-negative, got {epsilon}"
            )));
        }
        if let CensorMode::SplitBiased { split } = mode {
            if !split.is_finite() {
                return Err(Error::NonFinite {
                    what: "split point".to_string(),
                });
            }
        }
        let xs = self.precise_features()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(self.len());
        for (row, p) in xs.iter().zip(&self.points) {
            let mut features = Vec::with_capacity(row.len());
            for &x in row {
                let iv = match mode {
                    CensorMode::Symmetric => {
                        let mid = (x - epsilon) + rng.gen::<f64>() * 2.0 * epsilon;
                        Interval::new(mid - epsilon, mid + epsilon)?
                    }
                    CensorMode::LeftBiased => Interval::new(x, x + 2.0 * epsilon)?,
                    CensorMode::RightBiased => Interval::new(x - 2.0 * epsilon, x)?,
                    CensorMode::SplitBiased { split } => {
                        if x < split {
                            Interval::new(x - 2.0 * epsilon, x)?
                        } else {
                            Interval::new(x, x + 2.0 * epsilon)?
                        }
                    }
                };
                features.push(iv);
            }
            points.push(DataPoint {
                features,
                label: p.label,
            });
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            points,
        })
    }

    /// Replace the labels at the given row indices with `Unknown`.
    ///
    /// Censoring an already-unknown label is a no-op, so the operation is
    /// idempotent.
    pub fn censor_labels(&self, rows: &[usize]) -> Result<Dataset> {
        let mut out = self.clone();
        for &i in rows {
            match out.points.get_mut(i) {
                Some(p) => p.label = UncertainLabel::Unknown,
                None => {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: self.len(),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Force the dataset precise by the chosen strategy.
    ///
    /// Fails with [`Error::EmptyResult`] when nothing survives, rather than
    /// handing a later fit an empty dataset with a less useful message.
    pub fn collapse(&self, strategy: CollapseStrategy) -> Result<Dataset> {
        let (points, stage): (Vec<DataPoint>, _) = match strategy {
            CollapseStrategy::Midpoint => (
                self.points
                    .iter()
                    .filter(|p| p.label.is_known())
                    .map(|p| DataPoint {
                        features: p
                            .features
                            .iter()
                            .map(|iv| Interval::point(iv.midpoint()))
                            .collect(),
                        label: p.label,
                    })
                    .collect(),
                "midpoint collapse",
            ),
            CollapseStrategy::DropUncertain => (
                self.points
                    .iter()
                    .filter(|p| {
                        p.label.is_known() && p.features.iter().all(|iv| iv.is_degenerate())
                    })
                    .cloned()
                    .collect(),
                "drop-uncertain collapse",
            ),
        };
        if points.is_empty() {
            return Err(Error::EmptyResult {
                stage: stage.to_string(),
            });
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            points,
        })
    }

    /// Read a dataset from CSV.
    ///
    /// Lines starting with `#` are comments. Every non-label column is a
    /// feature; cells may be a bare number, `[lo,hi]`, or `lo..hi`, and the
    /// label column accepts `0`, `1`, `?`, or `[0,1]`. Parse errors name
    /// the 1-based data row and the column.
    pub fn load_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
        // `flexible` because an unquoted interval cell like [2,3] arrives
        // split across two fields; reassembly below restores it.
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let label_idx = match &schema.label {
            LabelColumn::Name(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::MissingColumn { name: name.clone() }
            })?,
            LabelColumn::Index(i) => {
                if *i >= headers.len() {
                    return Err(Error::MissingColumn {
                        name: format!("#{i}"),
                    });
                }
                *i
            }
        };
        let feature_names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(_, h)| h.clone())
            .collect();

        let mut points = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let row = idx + 1;
            let record = record?;
            let cells = reassemble_bracketed(&record);
            if cells.len() != headers.len() {
                return Err(Error::Cell {
                    row,
                    column: "(row)".to_string(),
                    message: format!("expected {} cells, found {}", headers.len(), cells.len()),
                });
            }
            let mut features = Vec::with_capacity(feature_names.len());
            let mut label = None;
            for (col, cell) in cells.iter().enumerate() {
                if col == label_idx {
                    label = Some(parse_label_text(cell).map_err(|message| Error::Cell {
                        row,
                        column: headers[col].clone(),
                        message,
                    })?);
                } else {
                    features.push(parse_feature_cell(cell).map_err(|message| Error::Cell {
                        row,
                        column: headers[col].clone(),
                        message,
                    })?);
                }
            }
            points.push(DataPoint {
                features,
                label: label.expect("label column visited"),
            });
        }
        Dataset::new(feature_names, points)
    }

    /// Write the dataset as CSV, preceded by `# key: value` comment lines.
    ///
    /// Intervals are emitted in the canonical `[lo,hi]` form (degenerate
    /// ones as a bare number) with shortest round-trip decimals, so equal
    /// datasets always serialize to identical bytes.
    pub fn save_csv<W: Write>(&self, mut writer: W, meta: &[(String, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(writer, "# {k}: {v}")?;
        }
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        wtr.write_record(&header)?;
        for p in &self.points {
            let mut rec: Vec<String> = p.features.iter().map(format_feature_cell).collect();
            rec.push(match p.label {
                UncertainLabel::Known(false) => "0".to_string(),
                UncertainLabel::Known(true) => "1".to_string(),
                UncertainLabel::Unknown => "?".to_string(),
            });
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// SHA-256 of the canonical CSV bytes (no comment lines).
    ///
    /// Depends only on the data, so re-saving a file with different
    /// metadata leaves the digest alone.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        self.save_csv(&mut buf, &[])
            .expect("writing to a Vec cannot fail");
        let hash = Sha256::digest(&buf);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("dataset serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Dataset> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Merge fields belonging to an unquoted bracketed cell.
///
/// `[2,3]` written without quotes is two CSV fields, `[2` and `3]`; a field
/// that opens a bracket without closing it absorbs subsequent fields until
/// one closes it. Properly quoted cells pass through untouched.
fn reassemble_bracketed(record: &csv::StringRecord) -> Vec<String> {
    let mut cells = Vec::with_capacity(record.len());
    let mut pending: Option<String> = None;
    for field in record.iter() {
        match pending.take() {
            Some(mut acc) => {
                acc.push(',');
                acc.push_str(field);
                if field.ends_with(']') {
                    cells.push(acc);
                } else {
                    pending = Some(acc);
                }
            }
            None => {
                if field.starts_with('[') && !field.ends_with(']') {
                    pending = Some(field.to_string());
                } else {
                    cells.push(field.to_string());
                }
            }
        }
    }
    if let Some(acc) = pending {
        // Unterminated bracket: keep it as one cell so the parse error
        // points at the right column.
        cells.push(acc);
    }
    cells
}

/// Parse one feature cell: `[lo,hi]`, `lo..hi`, or a bare number.
fn parse_feature_cell(field: &str) -> std::result::Result<Interval, String> {
    let s = field.trim();
    if s.is_empty() {
        return Err("empty cell".to_string());
    }
    let parse_num = |t: &str| -> std::result::Result<f64, String> {
        let v: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("\"{t}\" is not a number"))?;
        if !v.is_finite() {
            return Err(format!("\"{t}\" is not finite"));
        }
        Ok(v)
    };
    let make = |lo: f64, hi: f64| {
        Interval::new(lo, hi).map_err(|e| e.to_string())
    };
    if let Some(inner) = s.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| format!("\"{s}\" is missing the closing bracket"))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| format!("\"{s}\" needs two comma-separated bounds"))?;
        return make(parse_num(lo)?, parse_num(hi)?);
    }
    if let Some(pos) = s.find("..") {
        let (lo, hi) = (&s[..pos], &s[pos + 2..]);
        return make(parse_num(lo)?, parse_num(hi)?);
    }
    let v = parse_num(s)?;
    Ok(Interval::point(v))
}

/// Canonical text for one feature cell.
fn format_feature_cell(iv: &Interval) -> String {
    if iv.is_degenerate() {
        format!("{}", iv.lo())
    } else {
        format!("[{},{}]", iv.lo(), iv.hi())
    }
}
