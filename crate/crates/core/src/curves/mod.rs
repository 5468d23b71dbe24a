//! Curve data model and discrete calculus.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod synth;

/// Strictly increasing sample points inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("point {i} is not finite")));
        }
        if points[0] < 0.0 || points[points.len() - 1] > 1.0 {
            return Err(Error::InvalidGrid("points must lie in [0, 1]".into()));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing (index {})",
                i + 1
            )));
        }
        Ok(Self { points })
    }

    /// `p` equispaced points `t_i = i / (p - 1)`.
    pub fn uniform(p: usize) -> Result<Self> {
        Self::uniform_on(0.0, 1.0, p)
    }

    /// `p` equispaced points from `start` to `end` inclusive.
    pub fn uniform_on(start: f64, end: f64, p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {p}")));
        }
        let last = (p - 1) as f64;
        let points = (0..p)
            .map(|i| {
                if i + 1 == p {
                    end
                } else {
                    start + (end - start) * (i as f64 / last)
                }
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.points
    }
}

/// Real values of one function sampled on a grid. All values are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Curve {
    values: Vec<f64>,
}

impl Curve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Samples `f` on every grid point.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.points().iter().map(|&t| f(t)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Curve {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Curve> for Vec<f64> {
    fn from(curve: Curve) -> Self {
        curve.values
    }
}

/// One observation with `d >= 1` channels sharing a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiCurve {
    channels: Vec<Curve>,
}

impl MultiCurve {
    pub fn new(channels: Vec<Curve>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::ChannelMismatch { expected: 1, found: 0 });
        }
        let len = channels[0].len();
        if let Some(c) = channels.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: c.len(),
            });
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[Curve] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &Curve {
        &self.channels[c]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        self.channels.iter().try_for_each(|c| c.check_grid(grid))
    }

    /// All channels concatenated, as a plain feature vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.channels
            .iter()
            .flat_map(|c| c.values().iter().copied())
            .collect()
    }
}

impl From<Curve> for MultiCurve {
    fn from(curve: Curve) -> Self {
        Self {
            channels: alloc::vec![curve],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Anomaly,
}

impl Label {
    pub fn is_anomaly(self) -> bool {
        self == Label::Anomaly
    }
}

/// `n` curves with `d` channels on one shared grid, optionally labelled.
///
/// `classes` keeps raw integer class ids (as read from UCR files); `labels`
/// is the binary normal/anomaly view used for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    grid: TimeGrid,
    channels: usize,
    curves: Vec<MultiCurve>,
    labels: Option<Vec<Label>>,
    classes: Option<Vec<i64>>,
}

impl FunctionalDataset {
    pub fn new(grid: TimeGrid, curves: Vec<MultiCurve>) -> Result<Self> {
        let first = curves.first().ok_or(Error::EmptyDataset)?;
        let channels = first.n_channels();
        for curve in &curves {
            if curve.n_channels() != channels {
                return Err(Error::ChannelMismatch {
                    expected: channels,
                    found: curve.n_channels(),
                });
            }
            curve.check_grid(&grid)?;
        }
        Ok(Self {
            grid,
            channels,
            curves,
            labels: None,
            classes: None,
        })
    }

    /// Univariate dataset from raw value rows.
    pub fn univariate(grid: TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let curves = rows
            .into_iter()
            .map(|r| Curve::new(r).map(MultiCurve::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, curves)
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.curves.len() {
            return Err(Error::Labels(format!(
                "{} labels for {} curves",
                labels.len(),
                self.curves.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_classes(mut self, classes: Vec<i64>) -> Result<Self> {
        if classes.len() != self.curves.len() {
            return Err(Error::Labels(format!(
                "{} class ids for {} curves",
                classes.len(),
                self.curves.len()
            )));
        }
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[MultiCurve] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &MultiCurve {
        &self.curves[i]
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn classes(&self) -> Option<&[i64]> {
        self.classes.as_deref()
    }

    /// Keeps the given rows (in the given order), carrying labels and classes.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let pick = |i: &usize| self.curves[*i].clone();
        Ok(Self {
            grid: self.grid.clone(),
            channels: self.channels,
            curves: indices.iter().map(pick).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            classes: self
                .classes
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        })
    }

    /// Binary relabelling from raw classes.
    ///
    /// Rows whose class is in neither set are dropped. When `max_anomalies`
    /// is given only the first that many anomaly rows (in file order) are
    /// kept.
    pub fn to_binary(
        &self,
        normal: &[i64],
        anomaly: &[i64],
        max_anomalies: Option<usize>,
    ) -> Result<Self> {
        let classes = self
            .classes
            .as_ref()
            .ok_or_else(|| Error::Labels("dataset carries no class ids".into()))?;
        if normal.is_empty() || anomaly.is_empty() {
            return Err(Error::Labels("normal and anomaly class sets must be nonempty".into()));
        }
        if normal.iter().any(|c| anomaly.contains(c)) {
            return Err(Error::Labels("normal and anomaly class sets overlap".into()));
        }
        let mut keep = Vec::new();
        let mut labels = Vec::new();
        let mut anomalies = 0usize;
        for (i, class) in classes.iter().enumerate() {
            if normal.contains(class) {
                keep.push(i);
                labels.push(Label::Normal);
            } else if anomaly.contains(class) && max_anomalies.is_none_or(|m| anomalies < m) {
                anomalies += 1;
                keep.push(i);
                labels.push(Label::Anomaly);
            }
        }
        if keep.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut out = self.subset(&keep)?;
        out.labels = Some(labels);
        Ok(out)
    }
}

/// Forward differences `(v[i+1] - v[i]) / (t[i+1] - t[i])`, last value repeated
/// so the output has one value per grid point.
pub fn finite_difference(curve: &Curve, grid: &TimeGrid) -> Result<Curve> {
    curve.check_grid(grid)?;
    Ok(Curve {
        values: forward_difference(curve.values(), grid.points()),
    })
}

pub(crate) fn forward_difference(values: &[f64], points: &[f64]) -> Vec<f64> {
    let p = values.len();
    let mut out = Vec::with_capacity(p);
    for i in 0..p - 1 {
        out.push((values[i + 1] - values[i]) / (points[i + 1] - points[i]));
    }
    out.push(out[p - 2]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_rejects_bad_points() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.5, 0.2]).is_err());
        assert!(TimeGrid::new(vec![-0.1, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.1]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn uniform_grid_endpoints_are_exact() {
        let g = TimeGrid::uniform(7).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[6], 1.0);
        assert_eq!(g.points()[3], 0.5);
    }

    #[test]
    fn curve_rejects_non_finite() {
        assert_eq!(
            Curve::new(vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn dataset_requires_matching_grid() {
        let grid = TimeGrid::uniform(3).unwrap();
        let err = FunctionalDataset::univariate(grid, vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn constant_has_zero_derivative() {
        let grid = TimeGrid::uniform(11).unwrap();
        let c = Curve::from_fn(&grid, |_| 4.2).unwrap();
        let d = finite_difference(&c, &grid).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_has_unit_derivative() {
        let grid = TimeGrid::new(vec![0.0, 0.1, 0.35, 0.4, 0.9, 1.0]).unwrap();
        let c = Curve::from_fn(&grid, |t| t).unwrap();
        let d = finite_difference(&c, &grid).unwrap();
        assert_eq!(d.len(), grid.len());
        for v in d.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn square_derivative_tracks_2t() {
        let grid = TimeGrid::uniform(101).unwrap();
        let c = Curve::from_fn(&grid, |t| t * t).unwrap();
        let d = finite_difference(&c, &grid).unwrap();
        for (i, &t) in grid.points().iter().enumerate().skip(1).take(99) {
            assert!((d.values()[i] - 2.0 * t).abs() < 0.02, "t={t}");
        }
    }

    #[test]
    fn binary_relabelling_keeps_first_anomalies() {
        let grid = TimeGrid::uniform(2).unwrap();
        let rows = (0..6).map(|i| vec![i as f64, 0.0]).collect();
        let ds = FunctionalDataset::univariate(grid, rows)
            .unwrap()
            .with_classes(vec![1, 2, 2, 3, 1, 2])
            .unwrap();
        let bin = ds.to_binary(&[1], &[2], Some(2)).unwrap();
        assert_eq!(bin.n(), 4);
        assert_eq!(
            bin.labels().unwrap(),
            &[Label::Normal, Label::Anomaly, Label::Anomaly, Label::Normal]
        );
        assert_eq!(bin.curve(2).channel(0).values()[0], 2.0);
        assert!(ds.to_binary(&[1], &[1], None).is_err());
    }
}
