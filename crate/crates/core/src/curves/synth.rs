//! Synthetic functional datasets.
//!
//! Every generator is a pure function of its arguments and seed.

use alloc::vec::Vec;

use libm::{pow, sin, sqrt};
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Curve, FunctionalDataset, Label, MultiCurve, TimeGrid};
use crate::error::Result;
use crate::rng;

pub const DEFAULT_POINTS: usize = 100;

const PI: f64 = core::f64::consts::PI;

/// `30 (1 - t)^q t^q`
fn bump(t: f64, q: f64) -> f64 {
    30.0 * pow((1.0 - t) * t, q)
}

/// `count` values equispaced from `lo` to `hi` inclusive.
fn equispaced(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let last = count.saturating_sub(1).max(1) as f64;
    (0..count).map(move |i| lo + (hi - lo) * (i as f64 / last))
}

fn labelled(grid: TimeGrid, rows: Vec<Vec<f64>>, anomalies: usize) -> Result<FunctionalDataset> {
    let n = rows.len();
    let labels = (0..n)
        .map(|i| {
            if i + anomalies >= n {
                Label::Anomaly
            } else {
                Label::Normal
            }
        })
        .collect();
    FunctionalDataset::univariate(grid, rows)?.with_labels(labels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuevasOptions {
    pub points: usize,
    /// Offset added to the isolated anomaly for `t >= 0.7`.
    pub jump: f64,
}

impl Default for CuevasOptions {
    fn default() -> Self {
        Self {
            points: DEFAULT_POINTS,
            jump: 2.0,
        }
    }
}

/// 100 curves `30 (1-t)^q t^q`, `q` equispaced in `[1, 1.4]`, followed by five
/// anomalies:
///
/// * `x0`: `q = 1.2` with a jump at `t = 0.7`
/// * `x1`: `q = 1.6`
/// * `x2`: `q = 1.2` plus `sin(2 pi t)`
/// * `x3`: `q = 1.2` plus `N(0, 0.3^2)` noise on `[0.2, 0.8]`
/// * `x4`: `q = 1.2` plus `sin(10 pi t) / 2`
///
/// The seed only drives the noise of `x3`.
pub fn gen_cuevas105(seed: u64) -> FunctionalDataset {
    gen_cuevas105_with(seed, CuevasOptions::default()).expect("default options are valid")
}

pub fn gen_cuevas105_with(seed: u64, options: CuevasOptions) -> Result<FunctionalDataset> {
    let grid = TimeGrid::uniform(options.points)?;
    let ts = grid.points();
    let mut rows: Vec<Vec<f64>> = equispaced(1.0, 1.4, 100)
        .map(|q| ts.iter().map(|&t| bump(t, q)).collect())
        .collect();

    let jump = options.jump;
    rows.push(
        ts.iter()
            .map(|&t| bump(t, 1.2) + if t >= 0.7 { jump } else { 0.0 })
            .collect(),
    );
    rows.push(ts.iter().map(|&t| bump(t, 1.6)).collect());
    rows.push(ts.iter().map(|&t| bump(t, 1.2) + sin(2.0 * PI * t)).collect());
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, 0.3).expect("valid sigma");
    rows.push(
        ts.iter()
            .map(|&t| {
                let base = bump(t, 1.2);
                if (0.2..=0.8).contains(&t) {
                    base + noise.sample(&mut rng)
                } else {
                    base
                }
            })
            .collect(),
    );
    rows.push(
        ts.iter()
            .map(|&t| bump(t, 1.2) + 0.5 * sin(10.0 * PI * t))
            .collect(),
    );
    labelled(grid, rows, 5)
}

/// `n` standard Brownian paths on a uniform grid of `p` points.
pub fn gen_brownian_dataset(n: usize, p: usize, seed: u64) -> Result<FunctionalDataset> {
    let grid = TimeGrid::uniform(p)?;
    let mut rng = rng::seeded(seed);
    let rows = (0..n)
        .map(|_| brownian_path(grid.points(), &mut rng))
        .collect();
    FunctionalDataset::univariate(grid, rows)
}

/// Brownian path on `points`, starting from `W(0) = 0`.
pub(crate) fn brownian_path<R: rand::Rng + ?Sized>(points: &[f64], rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut w = 0.0;
    let mut prev = 0.0;
    for &t in points {
        let z: f64 = StandardNormal.sample(rng);
        w += sqrt(t - prev) * z;
        prev = t;
        out.push(w);
    }
    out
}

/// 90 curves `30 (1-t)^q t^q` with `q` equispaced in `[1, 1.4]` and 10
/// anomalies `30 (1-t)^1.2 t^1.2` noised by `N(0, 0.3^2)` on `[0.2, 0.8]`.
pub fn gen_noisy_contamination(seed: u64) -> Result<FunctionalDataset> {
    let grid = TimeGrid::uniform(DEFAULT_POINTS)?;
    let ts = grid.points();
    let mut rows: Vec<Vec<f64>> = equispaced(1.0, 1.4, 90)
        .map(|q| ts.iter().map(|&t| bump(t, q)).collect())
        .collect();
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, 0.3).expect("valid sigma");
    for _ in 0..10 {
        rows.push(
            ts.iter()
                .map(|&t| {
                    let base = bump(t, 1.2);
                    if (0.2..=0.8).contains(&t) {
                        base + noise.sample(&mut rng)
                    } else {
                        base
                    }
                })
                .collect(),
        );
    }
    labelled(grid, rows, 10)
}

/// Time shift of the isolated anomaly's rising front.
pub const ISOLATED_SHIFT: f64 = 0.05;

/// 30 curves rising as `30 (1-t)^q t^q` on `[0, 0.2]`, then flat at
/// `30 (0.8)^q 0.2^q` plus `N(0, 0.3^2)` noise on `(0.2, 0.7]`, with `q`
/// equispaced in `[0.5, 0.55]`; plus one anomaly whose rising front is shifted
/// earlier by [`ISOLATED_SHIFT`] and whose plateau is a typical one.
///
/// The curves live on `[0, 0.7]`, sampled with 100 equispaced points.
pub fn gen_isolated_anomaly(seed: u64) -> Result<FunctionalDataset> {
    let grid = TimeGrid::uniform_on(0.0, 0.7, DEFAULT_POINTS)?;
    let ts = grid.points();
    let mut rng = rng::seeded(seed);
    let noise = Normal::new(0.0, 0.3).expect("valid sigma");
    let curve = |q: f64, shift: f64, rng: &mut rng::ForestRng| -> Vec<f64> {
        let plateau = 30.0 * pow(0.8, q) * pow(0.2, q);
        ts.iter()
            .map(|&t| {
                if t <= 0.2 {
                    let u = (t + shift).min(0.2);
                    bump(u, q)
                } else {
                    plateau + noise.sample(rng)
                }
            })
            .collect()
    };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(31);
    for q in equispaced(0.5, 0.55, 30) {
        rows.push(curve(q, 0.0, &mut rng));
    }
    rows.push(curve(0.525, ISOLATED_SHIFT, &mut rng));
    labelled(grid, rows, 1)
}

/// Smooth-path family: `A sin(2 pi t)` with amplitude `A ~ N(1, 0.2^2)`.
///
/// Stand-in for a smooth reference process whose exact generator is not
/// pinned down; do not use for quantitative claims.
pub fn gen_smooth_family(n: usize, p: usize, seed: u64) -> Result<FunctionalDataset> {
    let grid = TimeGrid::uniform(p)?;
    let mut rng = rng::seeded(seed);
    let amplitude = Normal::new(1.0, 0.2).expect("valid sigma");
    let rows = (0..n)
        .map(|_| {
            let a = amplitude.sample(&mut rng);
            grid.points().iter().map(|&t| a * sin(2.0 * PI * t)).collect()
        })
        .collect();
    FunctionalDataset::univariate(grid, rows)
}

/// Four probe curves for Brownian data, in expected increasing score order:
/// `x0 = 0` (central), `x1 = 2t`, `x2 = 2 sqrt(t)` (two-sigma envelope) and
/// `x3 = 4 sqrt(t)`.
pub fn brownian_probes(grid: &TimeGrid) -> Vec<MultiCurve> {
    probes(grid, [
        |_| 0.0,
        |t| 2.0 * t,
        |t| 2.0 * sqrt(t),
        |t| 4.0 * sqrt(t),
    ])
}

/// Probes for [`gen_smooth_family`]: the mean curve, a 1.5x amplitude curve,
/// a curve with an added high-frequency wiggle, and a 3x amplitude curve.
pub fn smooth_probes(grid: &TimeGrid) -> Vec<MultiCurve> {
    probes(grid, [
        |t| sin(2.0 * PI * t),
        |t| 1.5 * sin(2.0 * PI * t),
        |t| sin(2.0 * PI * t) + 0.5 * sin(8.0 * PI * t),
        |t| 3.0 * sin(2.0 * PI * t),
    ])
}

fn probes(grid: &TimeGrid, fs: [fn(f64) -> f64; 4]) -> Vec<MultiCurve> {
    fs.iter()
        .map(|f| MultiCurve::from(Curve::from_fn(grid, f).expect("finite probe")))
        .collect()
}
