//! Scalar products between sampled curves.
//!
//! Integrals are approximated with the trapezoidal rule on the observed grid,
//! which is exact for the piecewise-linear interpolant of the samples. The
//! rule is precomputed once as per-point weights, so `<f, g>` becomes the
//! weighted dot product `sum_i w_i f_i g_i`.

use alloc::format;
use alloc::vec::Vec;

use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::curves::{forward_difference, Curve, MultiCurve, TimeGrid};
use crate::error::{Error, Result};

/// Normalizing products below this contribute nothing to [`InnerProduct::Combined`].
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerProduct {
    /// `int f g`
    L2,
    /// `int f' g'`
    Deriv,
    /// `alpha <f,g>/(|f||g|) + (1 - alpha) <f',g'>/(|f'||g'|)`
    Combined { alpha: f64 },
}

impl InnerProduct {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnerProduct::Combined { alpha } if !(0.0..=1.0).contains(&alpha) => Err(
                Error::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")),
            ),
            _ => Ok(()),
        }
    }

    fn eval(&self, weights: &[f64], a: &PreparedChannel, b: &PreparedChannel) -> f64 {
        match *self {
            InnerProduct::L2 => weighted_dot(weights, &a.values, &b.values),
            InnerProduct::Deriv => weighted_dot(weights, &a.deriv, &b.deriv),
            InnerProduct::Combined { alpha } => {
                let mut total = 0.0;
                if alpha != 0.0 {
                    let scale = a.norm * b.norm;
                    if scale >= NORM_FLOOR {
                        total += alpha * (weighted_dot(weights, &a.values, &b.values) / scale);
                    }
                }
                if alpha != 1.0 {
                    let scale = a.deriv_norm * b.deriv_norm;
                    if scale >= NORM_FLOOR {
                        total +=
                            (1.0 - alpha) * (weighted_dot(weights, &a.deriv, &b.deriv) / scale);
                    }
                }
                total
            }
        }
    }
}

/// One product for every channel, or one product per channel.
///
/// Multivariate curves are projected with the sum of the per-channel products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InnerProductSpec {
    Single(InnerProduct),
    PerChannel(Vec<InnerProduct>),
}

impl Default for InnerProductSpec {
    fn default() -> Self {
        InnerProductSpec::Single(InnerProduct::L2)
    }
}

impl From<InnerProduct> for InnerProductSpec {
    fn from(ip: InnerProduct) -> Self {
        InnerProductSpec::Single(ip)
    }
}

impl InnerProductSpec {
    pub fn validate(&self, channels: usize) -> Result<()> {
        match self {
            InnerProductSpec::Single(ip) => ip.validate(),
            InnerProductSpec::PerChannel(list) => {
                if list.len() != channels {
                    return Err(Error::ChannelMismatch {
                        expected: channels,
                        found: list.len(),
                    });
                }
                list.iter().try_for_each(InnerProduct::validate)
            }
        }
    }

    pub fn channel(&self, c: usize) -> &InnerProduct {
        match self {
            InnerProductSpec::Single(ip) => ip,
            InnerProductSpec::PerChannel(list) => &list[c],
        }
    }
}

fn weighted_dot(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * (x * y))
        .sum()
}

/// Trapezoidal quadrature weights of a grid.
pub fn trapezoid_weights(grid: &TimeGrid) -> Vec<f64> {
    let t = grid.points();
    let p = t.len();
    let mut w = alloc::vec![0.0; p];
    for i in 0..p - 1 {
        let half = 0.5 * (t[i + 1] - t[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PreparedChannel {
    values: Vec<f64>,
    deriv: Vec<f64>,
    norm: f64,
    deriv_norm: f64,
}

/// A curve with its derivative and norms cached for repeated projection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Prepared {
    channels: Vec<PreparedChannel>,
}

impl Prepared {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn values(&self, channel: usize) -> &[f64] {
        &self.channels[channel].values
    }

    pub fn derivative(&self, channel: usize) -> &[f64] {
        &self.channels[channel].deriv
    }
}

/// Grid plus quadrature weights; evaluates products between [`Prepared`] curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    grid: TimeGrid,
    weights: Vec<f64>,
}

impl Projector {
    pub fn new(grid: TimeGrid) -> Self {
        let weights = trapezoid_weights(&grid);
        Self { grid, weights }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Caches derivatives and norms; checks the curve length against the grid.
    pub fn prepare(&self, curve: &MultiCurve) -> Result<Prepared> {
        curve.check_grid(&self.grid)?;
        Ok(self.prepare_raw(curve.channels().iter().map(Curve::values)))
    }

    pub(crate) fn prepare_raw<'a>(&self, channels: impl Iterator<Item = &'a [f64]>) -> Prepared {
        Prepared {
            channels: channels.map(|v| self.prepare_channel(v.into())).collect(),
        }
    }

    pub(crate) fn prepare_channel(&self, values: Vec<f64>) -> PreparedChannel {
        let deriv = forward_difference(&values, self.grid.points());
        let norm = sqrt(weighted_dot(&self.weights, &values, &values));
        let deriv_norm = sqrt(weighted_dot(&self.weights, &deriv, &deriv));
        PreparedChannel {
            values,
            deriv,
            norm,
            deriv_norm,
        }
    }

    /// Sum over channels of the per-channel product.
    pub fn inner(&self, a: &Prepared, b: &Prepared, spec: &InnerProductSpec) -> f64 {
        a.channels
            .iter()
            .zip(&b.channels)
            .enumerate()
            .map(|(c, (x, y))| spec.channel(c).eval(&self.weights, x, y))
            .sum()
    }
}

fn scalar(f: &Curve, g: &Curve, grid: &TimeGrid, ip: InnerProduct) -> Result<f64> {
    f.check_grid(grid).map_err(|_| Error::GridMismatch)?;
    g.check_grid(grid).map_err(|_| Error::GridMismatch)?;
    ip.validate()?;
    let projector = Projector::new(grid.clone());
    let a = projector.prepare_channel(f.values().into());
    let b = projector.prepare_channel(g.values().into());
    Ok(ip.eval(&projector.weights, &a, &b))
}

/// Trapezoidal approximation of `int f g dt` over the grid span.
pub fn l2_inner(f: &Curve, g: &Curve, grid: &TimeGrid) -> Result<f64> {
    scalar(f, g, grid, InnerProduct::L2)
}

/// [`l2_inner`] of the forward-difference derivatives.
pub fn deriv_inner(f: &Curve, g: &Curve, grid: &TimeGrid) -> Result<f64> {
    scalar(f, g, grid, InnerProduct::Deriv)
}

/// Convex combination of the normalized L2 and derivative products.
pub fn combined_inner(f: &Curve, g: &Curve, grid: &TimeGrid, alpha: f64) -> Result<f64> {
    scalar(f, g, grid, InnerProduct::Combined { alpha })
}

/// Coordinate-wise sum of the per-channel products.
pub fn mv_inner(
    f: &MultiCurve,
    g: &MultiCurve,
    grid: &TimeGrid,
    spec: &InnerProductSpec,
) -> Result<f64> {
    if f.n_channels() != g.n_channels() {
        return Err(Error::ChannelMismatch {
            expected: f.n_channels(),
            found: g.n_channels(),
        });
    }
    spec.validate(f.n_channels())?;
    let projector = Projector::new(grid.clone());
    let a = projector.prepare(f).map_err(|_| Error::GridMismatch)?;
    let b = projector.prepare(g).map_err(|_| Error::GridMismatch)?;
    Ok(projector.inner(&a, &b, spec))
}
