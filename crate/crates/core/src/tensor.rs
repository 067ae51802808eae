//! Dense three-way tensor, long-form CSV ingestion and preprocessing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// A nominal value of the class variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassOutcome(pub String);

impl ClassOutcome {
    pub fn new(symbol: impl Into<String>) -> Self {
        ClassOutcome(symbol.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Observations x variables x contexts, stored row-major as `(i * m + j) * p + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    values: Vec<T>,
    dims: [usize; 3],
    observation_ids: Vec<String>,
    variable_ids: Vec<String>,
    context_ids: Vec<String>,
    labels: Option<Vec<ClassOutcome>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        values: Vec<T>,
        observation_ids: Vec<String>,
        variable_ids: Vec<String>,
        context_ids: Vec<String>,
    ) -> Result<Self> {
        let dims = [observation_ids.len(), variable_ids.len(), context_ids.len()];
        let expected = dims[0] * dims[1] * dims[2];
        if values.len() != expected {
            return Err(Error::IncompleteTensor {
                missing: expected.saturating_sub(values.len()),
                expected,
            });
        }
        Ok(Dataset {
            values,
            dims,
            observation_ids,
            variable_ids,
            context_ids,
            labels: None,
        })
    }

    /// Builds a dataset with generated ids (`o0..`, `v0..`, `t0..`).
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    values.push(f(i, j, k));
                }
            }
        }
        Dataset {
            values,
            dims,
            observation_ids: (0..dims[0]).map(|i| format!("o{i}")).collect(),
            variable_ids: (0..dims[1]).map(|j| format!("v{j}")).collect(),
            context_ids: (0..dims[2]).map(|k| format!("t{k}")).collect(),
            labels: None,
        }
    }

    /// Attaches labels in observation order.
    pub fn with_labels<S: Into<String>>(mut self, labels: Vec<S>) -> Result<Self> {
        if labels.len() != self.dims[0] {
            return Err(Error::LabelMismatch(format!(
                "{} labels for {} observations",
                labels.len(),
                self.dims[0]
            )));
        }
        self.labels = Some(labels.into_iter().map(|s| ClassOutcome(s.into())).collect());
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims[0]
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.dims[1]
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.dims[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.index(i, j, k)]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let idx = self.index(i, j, k);
        self.values[idx] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn observation_ids(&self) -> &[String] {
        &self.observation_ids
    }

    pub fn variable_ids(&self) -> &[String] {
        &self.variable_ids
    }

    pub fn context_ids(&self) -> &[String] {
        &self.context_ids
    }

    pub fn labels(&self) -> Option<&[ClassOutcome]> {
        self.labels.as_deref()
    }

    /// Sorted distinct outcome symbols, empty when unlabeled.
    pub fn outcome_alphabet(&self) -> Vec<ClassOutcome> {
        match &self.labels {
            Some(l) => l
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            None => Vec::new(),
        }
    }

    /// Ids for one axis (0 = observations, 1 = variables, 2 = contexts).
    pub fn axis_ids(&self, axis: usize) -> &[String] {
        match axis {
            0 => &self.observation_ids,
            1 => &self.variable_ids,
            _ => &self.context_ids,
        }
    }
}

/// Column names of a long-form tensor file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvLayout {
    pub obs: String,
    pub var: String,
    pub ctx: String,
    pub value: String,
}

impl Default for CsvLayout {
    fn default() -> Self {
        CsvLayout {
            obs: "obs".into(),
            var: "var".into(),
            ctx: "ctx".into(),
            value: "value".into(),
        }
    }
}

#[derive(Default)]
struct AxisIndex {
    ids: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl AxisIndex {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&ix) = self.lookup.get(id) {
            return ix;
        }
        let ix = self.ids.len();
        self.ids.push(id.to_string());
        self.lookup.insert(id.to_string(), ix);
        ix
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::ParseError {
            row: 1,
            message: format!("missing column `{name}`"),
        })
}

pub fn load_tensor_csv<T: Scalar>(path: impl AsRef<Path>, layout: &CsvLayout) -> Result<Dataset<T>> {
    let file = std::fs::File::open(path)?;
    read_tensor_csv(file, layout)
}

/// Reads a long-form tensor; axes are ordered by first appearance.
pub fn read_tensor_csv<T: Scalar, R: Read>(reader: R, layout: &CsvLayout) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = [
        column(&headers, &layout.obs)?,
        column(&headers, &layout.var)?,
        column(&headers, &layout.ctx)?,
        column(&headers, &layout.value)?,
    ];
    let mut axes: [AxisIndex; 3] = Default::default();
    let mut cells = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        // header is row 1
        let row = r + 2;
        let record = record?;
        let field = |c: usize| {
            record.get(c).ok_or_else(|| Error::ParseError {
                row,
                message: "too few fields".into(),
            })
        };
        let raw = field(cols[3])?;
        let value: f64 = raw.parse().map_err(|_| Error::ParseError {
            row,
            message: format!("cannot parse `{raw}` as a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::ParseError {
                row,
                message: format!("non-finite value `{raw}`"),
            });
        }
        let i = axes[0].intern(field(cols[0])?);
        let j = axes[1].intern(field(cols[1])?);
        let k = axes[2].intern(field(cols[2])?);
        cells.push((i, j, k, value, row));
    }
    let [o, v, c] = axes;
    let dims = [o.ids.len(), v.ids.len(), c.ids.len()];
    let total = dims[0] * dims[1] * dims[2];
    let mut values = vec![T::zero(); total];
    let mut filled = vec![false; total];
    for (i, j, k, value, row) in cells {
        let idx = (i * dims[1] + j) * dims[2] + k;
        if filled[idx] {
            return Err(Error::DuplicateCell {
                obs: o.ids[i].clone(),
                var: v.ids[j].clone(),
                ctx: c.ids[k].clone(),
                row,
            });
        }
        filled[idx] = true;
        values[idx] = T::of(value);
    }
    let missing = filled.iter().filter(|f| !**f).count();
    if missing > 0 {
        return Err(Error::IncompleteTensor {
            missing,
            expected: total,
        });
    }
    Dataset::new(values, o.ids, v.ids, c.ids)
}

/// Writes the canonical `obs,var,ctx,value` long form.
pub fn write_tensor_csv<T: Scalar, W: Write>(writer: W, d: &Dataset<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["obs", "var", "ctx", "value"])?;
    for i in 0..d.n() {
        for j in 0..d.m() {
            for k in 0..d.p() {
                w.write_record([
                    d.observation_ids[i].as_str(),
                    d.variable_ids[j].as_str(),
                    d.context_ids[k].as_str(),
                    &d.get(i, j, k).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_tensor_csv<T: Scalar>(path: impl AsRef<Path>, d: &Dataset<T>) -> Result<()> {
    write_tensor_csv(std::fs::File::create(path)?, d)
}

pub fn load_labels(path: impl AsRef<Path>, observation_ids: &[String]) -> Result<Vec<ClassOutcome>> {
    read_labels(std::fs::File::open(path)?, observation_ids)
}

/// Reads an `obs,label` file and aligns it to `observation_ids`.
pub fn read_labels<R: Read>(reader: R, observation_ids: &[String]) -> Result<Vec<ClassOutcome>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let obs_col = column(&headers, "obs")?;
    let label_col = column(&headers, "label")?;
    let position: HashMap<&str, usize> = observation_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut aligned: Vec<Option<ClassOutcome>> = vec![None; observation_ids.len()];
    for (r, record) in rdr.records().enumerate() {
        let row = r + 2;
        let record = record?;
        let (Some(obs), Some(label)) = (record.get(obs_col), record.get(label_col)) else {
            return Err(Error::ParseError {
                row,
                message: "too few fields".into(),
            });
        };
        let &i = position
            .get(obs)
            .ok_or_else(|| Error::LabelMismatch(format!("unknown observation `{obs}` at row {row}")))?;
        if aligned[i].is_some() {
            return Err(Error::LabelMismatch(format!("observation `{obs}` labeled twice")));
        }
        aligned[i] = Some(ClassOutcome::new(label));
    }
    aligned
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| {
                Error::LabelMismatch(format!("no label for observation `{}`", observation_ids[i]))
            })
        })
        .collect()
}

pub fn write_labels_csv<W: Write>(writer: W, observation_ids: &[String], labels: &[ClassOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["obs", "label"])?;
    for (id, label) in observation_ids.iter().zip(labels) {
        w.write_record([id.as_str(), label.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-variable min-max scaling over all observations and contexts.
///
/// Constant variables map to 0.
pub fn min_max_scale<T: Scalar>(d: &Dataset<T>) -> Dataset<T> {
    let mut out = d.clone();
    for j in 0..d.m() {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..d.n() {
            for k in 0..d.p() {
                let x = d.get(i, j, k);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        let range = hi - lo;
        for i in 0..d.n() {
            for k in 0..d.p() {
                let scaled = if range > T::zero() {
                    (d.get(i, j, k) - lo) / range
                } else {
                    T::zero()
                };
                out.set(i, j, k, scaled);
            }
        }
    }
    out
}

/// Piecewise aggregate approximation along the context axis.
///
/// Frame `f` averages contexts `floor(p*f/t) .. floor(p*(f+1)/t) - 1`. Frames
/// are renamed `0..t`; `t == p` returns the input unchanged.
pub fn paa<T: Scalar>(d: &Dataset<T>, target_length: usize) -> Result<Dataset<T>> {
    let p = d.p();
    if target_length == 0 || target_length > p {
        return Err(Error::InvalidTarget {
            target: target_length,
            length: p,
        });
    }
    if target_length == p {
        return Ok(d.clone());
    }
    let bounds: Vec<(usize, usize)> = (0..target_length)
        .map(|f| (p * f / target_length, p * (f + 1) / target_length))
        .collect();
    let mut values = Vec::with_capacity(d.n() * d.m() * target_length);
    for i in 0..d.n() {
        for j in 0..d.m() {
            for &(start, end) in &bounds {
                let sum: T = (start..end).map(|k| d.get(i, j, k)).sum();
                values.push(sum / T::of_usize(end - start));
            }
        }
    }
    Ok(Dataset {
        values,
        dims: [d.n(), d.m(), target_length],
        observation_ids: d.observation_ids.clone(),
        variable_ids: d.variable_ids.clone(),
        context_ids: (0..target_length).map(|f| f.to_string()).collect(),
        labels: d.labels.clone(),
    })
}
