//! Series containers and the sample moments everything else builds on.
//!
//! Moment estimators use population (divide-by-n) normalisation. Lagged
//! correlations are computed on the overlapping window only, with means and
//! variances recomputed on that window.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sequence of hits `X_t ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySeries {
    values: Vec<u8>,
    label: Option<String>,
}

impl BinarySeries {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = values.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidValue(format!("binary series contains {bad}")));
        }
        Ok(Self {
            values,
            label: None,
        })
    }

    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(values.into_iter().map(u8::from).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }

    /// True when every value is identical (all zeros or all ones).
    pub fn is_constant(&self) -> bool {
        let ones = self.count_ones();
        ones == 0 || ones == self.len()
    }

    /// Drops the first `n` observations.
    pub fn skip(&self, n: usize) -> Result<Self> {
        let mut out = Self::new(self.values[n.min(self.len())..].to_vec())?;
        out.label = self.label.clone();
        Ok(out)
    }
}

/// `N` binary series of common length with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryPanel {
    series: Vec<BinarySeries>,
}

impl BinaryPanel {
    /// Builds a panel; unlabeled members are named `X1..XN`.
    pub fn new(series: Vec<BinarySeries>) -> Result<Self> {
        let first = series.first().ok_or(Error::EmptyInput)?;
        let t = first.len();
        if let Some(s) = series.iter().find(|s| s.len() != t) {
            return Err(Error::LengthMismatch(t, s.len()));
        }
        let series: Vec<BinarySeries> = series
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                if s.label.is_some() {
                    s
                } else {
                    s.with_label(format!("X{}", i + 1))
                }
            })
            .collect();
        let mut labels: Vec<&str> = series.iter().filter_map(|s| s.label()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidValue("duplicate series labels".into()));
        }
        Ok(Self { series })
    }

    /// Builds a panel from row-major data (`rows[t][i]`).
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let n = labels.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch(n, r.len()));
        }
        let series = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| Ok(BinarySeries::new(rows.iter().map(|r| r[i]).collect())?.with_label(l)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(series)
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn series(&self) -> &[BinarySeries] {
        &self.series
    }

    pub fn get(&self, i: usize) -> &BinarySeries {
        &self.series[i]
    }

    pub fn labels(&self) -> Vec<String> {
        self.series
            .iter()
            .map(|s| s.label().unwrap_or_default().to_string())
            .collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.series.iter().position(|s| s.label() == Some(label))
    }

    /// Reorders columns: column `k` of the result is column `order[k]` here.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_series() {
            return Err(Error::LengthMismatch(self.n_series(), order.len()));
        }
        Self::new(order.iter().map(|&i| self.series[i].clone()).collect())
    }

    /// Drops the first `n` time points of every member.
    pub fn skip(&self, n: usize) -> Result<Self> {
        Self::new(
            self.series
                .iter()
                .map(|s| s.skip(n))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Value of series `i` at time `t`.
    #[inline]
    pub fn at(&self, i: usize, t: usize) -> u8 {
        self.series[i].values[t]
    }

    /// Reads the panel CSV format: a header row of labels, then one row of
    /// `N` comma-separated 0/1 values per time step.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let labels: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| match v {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::Parse(format!(
                        "row {}: expected 0 or 1, got {other:?}",
                        line + 2
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::from_rows(labels, &rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.labels())?;
        let mut row = Vec::with_capacity(self.n_series());
        for t in 0..self.len() {
            row.clear();
            row.extend(
                self.series
                    .iter()
                    .map(|s| if s.values[t] == 1 { "1" } else { "0" }),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A finite real-valued series with optional opaque timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<String>>,
    label: Option<String>,
}

impl RealSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "non-finite value {v} at index {i}"
            )));
        }
        Ok(Self {
            values,
            timestamps: None,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.values.len() {
            return Err(Error::LengthMismatch(self.values.len(), timestamps.len()));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads `timestamp,value` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut stamps = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!(
                    "expected 2 columns, got {}",
                    rec.len()
                )));
            }
            stamps.push(rec[0].to_string());
            values.push(
                rec[1]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{}: {e}", &rec[1])))?,
            );
        }
        Self::new(values)?.with_timestamps(stamps)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestamp", "value"])?;
        for (t, v) in self.values.iter().enumerate() {
            let stamp = match &self.timestamps {
                Some(ts) => ts[t].clone(),
                None => t.to_string(),
            };
            w.write_record([stamp, v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn sample_mean(s: &BinarySeries) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(s.count_ones() as f64 / s.len() as f64)
}

/// Pearson correlation between `X_t` and `Y_{t-lag}` over the overlapping
/// window. Negative lags pair `X_t` with future `Y`.
pub fn lagged_cross_correlation(x: &BinarySeries, y: &BinarySeries, lag: isize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let t = x.len();
    if lag.unsigned_abs() >= t {
        return Err(Error::LagOutOfRange);
    }
    if x.is_constant() || y.is_constant() {
        return Err(Error::ZeroVariance);
    }
    let k = lag.unsigned_abs();
    let (xs, ys) = if lag >= 0 {
        (&x.values()[k..], &y.values()[..t - k])
    } else {
        (&x.values()[..t - k], &y.values()[k..])
    };
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxy) = (0usize, 0usize, 0usize);
    for (&a, &b) in xs.iter().zip(ys) {
        sx += a as usize;
        sy += b as usize;
        sxy += (a & b) as usize;
    }
    let mx = sx as f64 / n;
    let my = sy as f64 / n;
    // binary: E[X^2] = E[X]
    let vx = mx - mx * mx;
    let vy = my - my * my;
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let cov = sxy as f64 / n - mx * my;
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}
