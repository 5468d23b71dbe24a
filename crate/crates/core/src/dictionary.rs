//! Dictionaries of projection atoms and the law used to draw them.
//!
//! A [`DictionarySpec`] names an atom family with its parameter ranges. It is
//! turned into a runtime [`Dictionary`] that is either a finite list of
//! evaluated atoms (drawn uniformly) or a sampler producing a fresh atom at
//! every split. Every atom remembers the [`AtomParams`] it was built from, so a
//! saved model can re-evaluate it on the stored grid.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, pow, sin, sqrt};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curves::{synth::brownian_path, MultiCurve, TimeGrid};
use crate::error::{Error, Result};
use crate::inner::{Prepared, Projector};
use crate::rng;

/// Attempts at drawing a uniform-indicator window that covers a grid point.
pub const WINDOW_ATTEMPTS: usize = 100;

/// Largest supported dyadic depth `J`.
pub const MAX_DYADIC_LEVEL: u32 = 20;

/// Closed parameter interval, written `[lo, hi]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::InvalidConfig(format!(
                "{name} range [{}, {}] is not a nonempty interval",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + rng.random::<f64>() * (self.hi - self.lo)
    }
}

impl From<[f64; 2]> for Range {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.lo, r.hi]
    }
}

/// Parameters that fully determine one channel of an atom on a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomParams {
    /// `a cos(2 pi omega t)`
    Cosine { a: f64, omega: f64 },
    /// `a sin(2 pi omega t)`
    Sine { a: f64, omega: f64 },
    /// Mexican hat wavelet centred at `theta` with scale `sigma`, on `t`.
    MexicanHat { theta: f64, sigma: f64 },
    /// Mexican hat with `sigma^2 = variance` centred at `shift`, evaluated on
    /// the rescaled axis `u = 10 t - 5`.
    GaussianWavelet { variance: f64, shift: f64 },
    /// `1(lo <= t <= hi)`
    Indicator { lo: f64, hi: f64 },
    /// `t 1(lo <= t <= hi)`
    IndicatorSlope { lo: f64, hi: f64 },
    /// `1(t in [k/2^level, (k+1)/2^level])`
    Dyadic { level: u32, k: u64 },
    /// `t 1(t in [k/2^level, (k+1)/2^level])`
    DyadicSlope { level: u32, k: u64 },
    /// Brownian path regenerated from its own seed.
    Brownian { seed: u64 },
    /// Brownian bridge pinned to zero at `t = 0` and `t = 1`.
    BrownianBridge { seed: u64 },
    /// Curve `index` of the training pool.
    SelfData { index: usize },
    /// Curve `index` of the training pool times `1(lo <= t <= hi)`.
    LocalSelf { index: usize, lo: f64, hi: f64 },
}

fn mexican_hat(x: f64, center: f64, sigma: f64) -> f64 {
    let z = (x - center) / sigma;
    let norm = 2.0 / (sqrt(3.0 * sigma) * pow(PI, 0.25));
    norm * (1.0 - z * z) * exp(-0.5 * z * z)
}

fn dyadic_bounds(level: u32, k: u64) -> (f64, f64) {
    let cells = (1u64 << level) as f64;
    (k as f64 / cells, (k + 1) as f64 / cells)
}

impl AtomParams {
    /// Values of channel `channel` of this atom on `grid`.
    pub fn evaluate(&self, grid: &TimeGrid, pool: &[MultiCurve], channel: usize) -> Result<Vec<f64>> {
        let ts = grid.points();
        let window = |lo: f64, hi: f64, slope: bool| -> Vec<f64> {
            ts.iter()
                .map(|&t| {
                    if (lo..=hi).contains(&t) {
                        if slope {
                            t
                        } else {
                            1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let pool_curve = |index: usize| -> Result<&[f64]> {
            let curve = pool.get(index).ok_or_else(|| {
                Error::CorruptModel(format!("self-data atom refers to missing curve {index}"))
            })?;
            if channel >= curve.n_channels() {
                return Err(Error::ChannelMismatch {
                    expected: channel + 1,
                    found: curve.n_channels(),
                });
            }
            let values = curve.channel(channel).values();
            if values.len() != ts.len() {
                return Err(Error::GridMismatch);
            }
            Ok(values)
        };
        let values = match *self {
            AtomParams::Cosine { a, omega } => {
                ts.iter().map(|&t| a * cos(2.0 * PI * omega * t)).collect()
            }
            AtomParams::Sine { a, omega } => {
                ts.iter().map(|&t| a * sin(2.0 * PI * omega * t)).collect()
            }
            AtomParams::MexicanHat { theta, sigma } => {
                ts.iter().map(|&t| mexican_hat(t, theta, sigma)).collect()
            }
            AtomParams::GaussianWavelet { variance, shift } => {
                let sigma = sqrt(variance);
                ts.iter()
                    .map(|&t| mexican_hat(10.0 * t - 5.0, shift, sigma))
                    .collect()
            }
            AtomParams::Indicator { lo, hi } => window(lo, hi, false),
            AtomParams::IndicatorSlope { lo, hi } => window(lo, hi, true),
            AtomParams::Dyadic { level, k } => {
                let (lo, hi) = dyadic_bounds(level, k);
                window(lo, hi, false)
            }
            AtomParams::DyadicSlope { level, k } => {
                let (lo, hi) = dyadic_bounds(level, k);
                window(lo, hi, true)
            }
            AtomParams::Brownian { seed } => brownian_path(ts, &mut rng::seeded(seed)),
            AtomParams::BrownianBridge { seed } => {
                let mut rng = rng::seeded(seed);
                let mut path = brownian_path(ts, &mut rng);
                let last = ts[ts.len() - 1];
                let z: f64 = StandardNormal.sample(&mut rng);
                let end = path[path.len() - 1] + sqrt(1.0 - last) * z;
                for (w, &t) in path.iter_mut().zip(ts) {
                    *w -= t * end;
                }
                path
            }
            AtomParams::SelfData { index } => pool_curve(index)?.to_vec(),
            AtomParams::LocalSelf { index, lo, hi } => {
                let base = pool_curve(index)?;
                base.iter()
                    .zip(window(lo, hi, false))
                    .map(|(v, w)| v * w)
                    .collect()
            }
        };
        if let Some(index) = values.iter().position(|v: &f64| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(values)
    }

    /// Interval on which an indicator-type atom is nonzero.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            AtomParams::Indicator { lo, hi }
            | AtomParams::IndicatorSlope { lo, hi }
            | AtomParams::LocalSelf { lo, hi, .. } => Some((lo, hi)),
            AtomParams::Dyadic { level, k } | AtomParams::DyadicSlope { level, k } => {
                Some(dyadic_bounds(level, k))
            }
            _ => None,
        }
    }
}

/// One evaluated projection atom, possibly multivariate.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    params: Vec<AtomParams>,
    prepared: Prepared,
}

impl Atom {
    /// Evaluates `params` (one entry per channel) on the projector's grid.
    pub fn evaluate(params: Vec<AtomParams>, projector: &Projector, pool: &[MultiCurve]) -> Result<Self> {
        let grid = projector.grid();
        let values = params
            .iter()
            .enumerate()
            .map(|(c, p)| p.evaluate(grid, pool, c))
            .collect::<Result<Vec<_>>>()?;
        let prepared = projector.prepare_raw(values.iter().map(Vec::as_slice));
        Ok(Self { params, prepared })
    }

    pub fn params(&self) -> &[AtomParams] {
        &self.params
    }

    pub fn prepared(&self) -> &Prepared {
        &self.prepared
    }

    pub fn n_channels(&self) -> usize {
        self.params.len()
    }

    pub fn values(&self, channel: usize) -> &[f64] {
        self.prepared.values(channel)
    }
}

/// Weighted component of a [`DictionarySpec::Mixture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub spec: DictionarySpec,
}

fn unit_range() -> Range {
    Range::new(0.0, 1.0)
}
fn frequency_range() -> Range {
    Range::new(0.0, 10.0)
}
fn hat_center_range() -> Range {
    Range::new(-0.8, 0.8)
}
fn hat_scale_range() -> Range {
    Range::new(0.04, 0.2)
}
fn wavelet_variance_range() -> Range {
    Range::new(0.2, 1.0)
}
fn wavelet_shift_range() -> Range {
    Range::new(-4.0, 4.0)
}

/// Atom family plus its sampling law.
///
/// `size: Some(k)` materializes `k` i.i.d. atoms once per forest and then
/// draws uniformly among them; `None` draws a fresh atom at every split.
/// Dyadic families and Dirac atoms are finite by construction. Self-data
/// dictionaries draw from the subsample of the tree being grown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dict", rename_all = "snake_case", deny_unknown_fields)]
pub enum DictionarySpec {
    Cosine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
        #[serde(default = "unit_range")]
        a: Range,
        #[serde(default = "frequency_range")]
        omega: Range,
    },
    MexicanHat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
        #[serde(default = "hat_center_range")]
        theta: Range,
        #[serde(default = "hat_scale_range")]
        sigma: Range,
    },
    GaussianWavelet {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
        #[serde(default = "wavelet_variance_range")]
        variance: Range,
        #[serde(default = "wavelet_shift_range")]
        shift: Range,
    },
    Brownian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    #[serde(rename = "bbridge")]
    BrownianBridge {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    /// Indicators of the dyadic cells of levels `1..=J`; `J` defaults to
    /// `ceil(log2 p)` for a grid of `p` points.
    Dyadic {
        #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
        levels: Option<u32>,
    },
    DyadicDeriv {
        #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
        levels: Option<u32>,
    },
    #[serde(rename = "uniform_ind")]
    UniformIndicator {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    #[serde(rename = "uniform_ind_deriv")]
    UniformIndicatorDeriv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    #[serde(rename = "self")]
    SelfData,
    LocalSelf,
    /// Each channel independently `a sin(2 pi omega t)` or `a cos(2 pi omega t)`.
    #[serde(rename = "sinuscosine2d")]
    SinusCosine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
        #[serde(default = "unit_range")]
        a: Range,
        #[serde(default = "frequency_range")]
        omega: Range,
    },
    Mixture {
        components: Vec<MixtureComponent>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
    /// A single fixed atom.
    Dirac { atom: AtomParams },
}

/// Where self-data atoms come from: the training curves, restricted to the
/// members of the current subsample when `members` is set.
#[derive(Debug, Clone, Copy)]
pub struct Pool<'a> {
    pub curves: &'a [MultiCurve],
    pub members: Option<&'a [usize]>,
}

impl<'a> Pool<'a> {
    pub fn all(curves: &'a [MultiCurve]) -> Self {
        Self { curves, members: None }
    }

    pub fn empty() -> Pool<'static> {
        Pool {
            curves: &[],
            members: None,
        }
    }

    fn len(&self) -> usize {
        self.members.map_or(self.curves.len(), <[usize]>::len)
    }

    fn member(&self, i: usize) -> usize {
        self.members.map_or(i, |m| m[i])
    }
}

/// Everything needed to draw and evaluate an atom.
#[derive(Debug, Clone, Copy)]
pub struct SamplingContext<'a> {
    pub projector: &'a Projector,
    pub channels: usize,
    pub pool: Pool<'a>,
}

impl DictionarySpec {
    pub fn cosine(size: Option<usize>) -> Self {
        DictionarySpec::Cosine {
            size,
            a: unit_range(),
            omega: frequency_range(),
        }
    }

    pub fn mexican_hat(size: Option<usize>) -> Self {
        DictionarySpec::MexicanHat {
            size,
            theta: hat_center_range(),
            sigma: hat_scale_range(),
        }
    }

    pub fn gaussian_wavelet(size: Option<usize>) -> Self {
        DictionarySpec::GaussianWavelet {
            size,
            variance: wavelet_variance_range(),
            shift: wavelet_shift_range(),
        }
    }

    pub fn sinus_cosine(size: Option<usize>) -> Self {
        DictionarySpec::SinusCosine {
            size,
            a: unit_range(),
            omega: frequency_range(),
        }
    }

    pub fn dyadic(levels: u32) -> Self {
        DictionarySpec::Dyadic {
            levels: Some(levels),
        }
    }

    /// Configured materialization size, for families that take one.
    pub fn size(&self) -> Option<usize> {
        match *self {
            DictionarySpec::Cosine { size, .. }
            | DictionarySpec::MexicanHat { size, .. }
            | DictionarySpec::GaussianWavelet { size, .. }
            | DictionarySpec::Brownian { size }
            | DictionarySpec::BrownianBridge { size }
            | DictionarySpec::UniformIndicator { size }
            | DictionarySpec::UniformIndicatorDeriv { size }
            | DictionarySpec::SinusCosine { size, .. }
            | DictionarySpec::Mixture { size, .. } => size,
            _ => None,
        }
    }

    /// Replaces the materialization size of families that take one.
    pub fn set_size(&mut self, new: Option<usize>) {
        match self {
            DictionarySpec::Cosine { size, .. }
            | DictionarySpec::MexicanHat { size, .. }
            | DictionarySpec::GaussianWavelet { size, .. }
            | DictionarySpec::Brownian { size }
            | DictionarySpec::BrownianBridge { size }
            | DictionarySpec::UniformIndicator { size }
            | DictionarySpec::UniformIndicatorDeriv { size }
            | DictionarySpec::SinusCosine { size, .. }
            | DictionarySpec::Mixture { size, .. } => *size = new,
            _ => {}
        }
    }

    /// True for families with a continuum of atoms (those that accept `size`).
    pub fn is_continuous(&self) -> bool {
        !matches!(
            self,
            DictionarySpec::Dyadic { .. }
                | DictionarySpec::DyadicDeriv { .. }
                | DictionarySpec::SelfData
                | DictionarySpec::LocalSelf
                | DictionarySpec::Dirac { .. }
        )
    }

    /// True when atoms are drawn from the training curves.
    pub fn uses_pool(&self) -> bool {
        match self {
            DictionarySpec::SelfData | DictionarySpec::LocalSelf => true,
            DictionarySpec::Mixture { components, .. } => {
                components.iter().any(|c| c.spec.uses_pool())
            }
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DictionarySpec::Cosine { a, omega, .. } | DictionarySpec::SinusCosine { a, omega, .. } => {
                a.validate("a")?;
                omega.validate("omega")
            }
            DictionarySpec::MexicanHat { theta, sigma, .. } => {
                theta.validate("theta")?;
                sigma.validate("sigma")?;
                positive(sigma.lo, "sigma")
            }
            DictionarySpec::GaussianWavelet { variance, shift, .. } => {
                variance.validate("variance")?;
                shift.validate("shift")?;
                positive(variance.lo, "variance")
            }
            DictionarySpec::Dyadic {
                levels: Some(levels),
            }
            | DictionarySpec::DyadicDeriv {
                levels: Some(levels),
            } => {
                if *levels == 0 || *levels > MAX_DYADIC_LEVEL {
                    return Err(Error::InvalidConfig(format!(
                        "dyadic depth J must be in 1..={MAX_DYADIC_LEVEL}, got {levels}"
                    )));
                }
                Ok(())
            }
            DictionarySpec::Mixture { components, .. } => {
                if components.is_empty() {
                    return Err(Error::InvalidConfig("mixture has no components".into()));
                }
                if components.iter().any(|c| !(c.weight >= 0.0 && c.weight.is_finite())) {
                    return Err(Error::InvalidConfig("mixture weights must be >= 0".into()));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                components.iter().try_for_each(|c| c.spec.validate())
            }
            _ => Ok(()),
        }?;
        if self.size() == Some(0) {
            return Err(Error::InvalidConfig("dictionary size must be >= 1".into()));
        }
        Ok(())
    }

    /// Draws the per-channel parameters of one atom.
    pub fn sample_params<R: Rng + ?Sized>(
        &self,
        ctx: &SamplingContext<'_>,
        rng: &mut R,
    ) -> Result<Vec<AtomParams>> {
        let channels = ctx.channels;
        let ts = ctx.projector.grid().points();
        let per_channel = |rng: &mut R, f: &mut dyn FnMut(&mut R) -> Result<AtomParams>| {
            (0..channels).map(|_| f(rng)).collect::<Result<Vec<_>>>()
        };
        let replicated = |p: AtomParams| alloc::vec![p; channels];
        let window = |rng: &mut R| -> Result<(f64, f64)> {
            for _ in 0..WINDOW_ATTEMPTS {
                let mut a: f64 = rng.random();
                let mut b: f64 = rng.random();
                if b < a {
                    core::mem::swap(&mut a, &mut b);
                }
                if ts.iter().any(|t| (a..=b).contains(t)) {
                    return Ok((a, b));
                }
            }
            Err(Error::EmptyWindow {
                attempts: WINDOW_ATTEMPTS,
            })
        };
        let pick_member = |rng: &mut R| -> Result<usize> {
            let len = ctx.pool.len();
            if len == 0 {
                return Err(Error::EmptyPool);
            }
            Ok(ctx.pool.member(rng.random_range(0..len)))
        };

        match self {
            DictionarySpec::Cosine { a, omega, .. } => per_channel(rng, &mut |rng| {
                Ok(AtomParams::Cosine {
                    a: a.sample(rng),
                    omega: omega.sample(rng),
                })
            }),
            DictionarySpec::MexicanHat { theta, sigma, .. } => per_channel(rng, &mut |rng| {
                Ok(AtomParams::MexicanHat {
                    theta: theta.sample(rng),
                    sigma: sigma.sample(rng),
                })
            }),
            DictionarySpec::GaussianWavelet { variance, shift, .. } => {
                per_channel(rng, &mut |rng| {
                    Ok(AtomParams::GaussianWavelet {
                        variance: variance.sample(rng),
                        shift: shift.sample(rng),
                    })
                })
            }
            DictionarySpec::Brownian { .. } => per_channel(rng, &mut |rng| {
                Ok(AtomParams::Brownian { seed: rng.random() })
            }),
            DictionarySpec::BrownianBridge { .. } => per_channel(rng, &mut |rng| {
                Ok(AtomParams::BrownianBridge { seed: rng.random() })
            }),
            DictionarySpec::Dyadic { levels } | DictionarySpec::DyadicDeriv { levels } => {
                let slope = matches!(self, DictionarySpec::DyadicDeriv { .. });
                let count = dyadic_count(levels.unwrap_or_else(|| default_dyadic_levels(ts.len())));
                Ok(replicated(dyadic_atom(rng.random_range(0..count), slope)))
            }
            DictionarySpec::UniformIndicator { .. } => per_channel(rng, &mut |rng| {
                let (lo, hi) = window(rng)?;
                Ok(AtomParams::Indicator { lo, hi })
            }),
            DictionarySpec::UniformIndicatorDeriv { .. } => per_channel(rng, &mut |rng| {
                let (lo, hi) = window(rng)?;
                Ok(AtomParams::IndicatorSlope { lo, hi })
            }),
            DictionarySpec::SelfData => {
                let index = pick_member(rng)?;
                Ok(replicated(AtomParams::SelfData { index }))
            }
            DictionarySpec::LocalSelf => {
                let index = pick_member(rng)?;
                let (lo, hi) = window(rng)?;
                Ok(replicated(AtomParams::LocalSelf { index, lo, hi }))
            }
            DictionarySpec::SinusCosine { a, omega, .. } => per_channel(rng, &mut |rng| {
                let use_sine: bool = rng.random();
                let (a, omega) = (a.sample(rng), omega.sample(rng));
                Ok(if use_sine {
                    AtomParams::Sine { a, omega }
                } else {
                    AtomParams::Cosine { a, omega }
                })
            }),
            DictionarySpec::Mixture { components, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &components[components.len() - 1];
                for c in components {
                    acc += c.weight;
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                chosen.spec.sample_params(ctx, rng)
            }
            DictionarySpec::Dirac { atom } => Ok(replicated(*atom)),
        }
    }
}

fn positive(v: f64, name: &str) -> Result<()> {
    if v <= 0.0 {
        return Err(Error::InvalidConfig(format!("{name} must be > 0")));
    }
    Ok(())
}

/// `ceil(log2 p)`, clamped to `1..=MAX_DYADIC_LEVEL`.
pub fn default_dyadic_levels(p: usize) -> u32 {
    let mut levels = 1;
    while levels < MAX_DYADIC_LEVEL && (1usize << levels) < p {
        levels += 1;
    }
    levels
}

/// Number of dyadic atoms on levels `1..=levels`: `2^(levels+1) - 2`.
pub fn dyadic_count(levels: u32) -> u64 {
    (1u64 << (levels + 1)) - 2
}

/// Dyadic atom number `index` in level-major order.
fn dyadic_atom(index: u64, slope: bool) -> AtomParams {
    let mut level = 1;
    let mut offset = index;
    while offset >= 1u64 << level {
        offset -= 1u64 << level;
        level += 1;
    }
    if slope {
        AtomParams::DyadicSlope { level, k: offset }
    } else {
        AtomParams::Dyadic { level, k: offset }
    }
}

/// Draws one atom according to `spec`.
pub fn sample_atom<R: Rng + ?Sized>(
    spec: &DictionarySpec,
    ctx: &SamplingContext<'_>,
    rng: &mut R,
) -> Result<Atom> {
    let params = spec.sample_params(ctx, rng)?;
    Atom::evaluate(params, ctx.projector, ctx.pool.curves)
}

/// Finite version of a dictionary.
///
/// Dyadic families return their full enumeration and self-data returns every
/// pool curve, both ignoring `count`; other families draw `count` i.i.d.
/// atoms.
pub fn materialize<R: Rng + ?Sized>(
    spec: &DictionarySpec,
    ctx: &SamplingContext<'_>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Atom>> {
    spec.validate()?;
    let evaluate = |params| Atom::evaluate(params, ctx.projector, ctx.pool.curves);
    match spec {
        DictionarySpec::Dyadic { levels } | DictionarySpec::DyadicDeriv { levels } => {
            let slope = matches!(spec, DictionarySpec::DyadicDeriv { .. });
            let levels = levels.unwrap_or_else(|| default_dyadic_levels(ctx.projector.grid().len()));
            (0..dyadic_count(levels))
                .map(|i| evaluate(alloc::vec![dyadic_atom(i, slope); ctx.channels]))
                .collect()
        }
        DictionarySpec::SelfData => {
            if ctx.pool.len() == 0 {
                return Err(Error::EmptyPool);
            }
            (0..ctx.pool.len())
                .map(|i| {
                    let index = ctx.pool.member(i);
                    evaluate(alloc::vec![AtomParams::SelfData { index }; ctx.channels])
                })
                .collect()
        }
        DictionarySpec::Dirac { atom } => Ok(alloc::vec![evaluate(alloc::vec![*atom; ctx.channels])?]),
        _ => {
            if count == 0 {
                return Err(Error::InvalidConfig("dictionary size must be >= 1".into()));
            }
            (0..count).map(|_| sample_atom(spec, ctx, rng)).collect()
        }
    }
}

/// Draws one two-channel atom, each channel a random sine or cosine with
/// `a ~ U[0, 1]` and `omega ~ U[0, 10]`.
pub fn sinuscosine_atom_2d<R: Rng + ?Sized>(grid: &TimeGrid, rng: &mut R) -> Result<Atom> {
    let projector = Projector::new(grid.clone());
    let ctx = SamplingContext {
        projector: &projector,
        channels: 2,
        pool: Pool::empty(),
    };
    sample_atom(&DictionarySpec::sinus_cosine(None), &ctx, rng)
}

/// A dictionary ready to hand out split atoms.
#[derive(Debug, Clone)]
pub enum Dictionary {
    /// Evaluated atoms, drawn uniformly by index.
    Finite(Vec<Arc<Atom>>),
    /// Fresh atom per draw.
    Sampled(DictionarySpec),
}

impl Dictionary {
    /// Materializes `spec` when it is finite or sized, otherwise keeps it as a
    /// sampler. Self-data families stay samplers bound to each tree's subsample.
    pub fn from_spec<R: Rng + ?Sized>(
        spec: &DictionarySpec,
        ctx: &SamplingContext<'_>,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        match spec {
            DictionarySpec::Dyadic { .. }
            | DictionarySpec::DyadicDeriv { .. }
            | DictionarySpec::Dirac { .. } => Ok(Self::finite(materialize(spec, ctx, 1, rng)?)),
            DictionarySpec::SelfData | DictionarySpec::LocalSelf => Ok(Dictionary::Sampled(spec.clone())),
            _ => match spec.size() {
                Some(count) => Ok(Self::finite(materialize(spec, ctx, count, rng)?)),
                None => Ok(Dictionary::Sampled(spec.clone())),
            },
        }
    }

    pub fn finite(atoms: Vec<Atom>) -> Self {
        Dictionary::Finite(atoms.into_iter().map(Arc::new).collect())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Dictionary::Finite(_))
    }

    pub fn atoms(&self) -> Option<&[Arc<Atom>]> {
        match self {
            Dictionary::Finite(atoms) => Some(atoms),
            Dictionary::Sampled(_) => None,
        }
    }

    /// Draws a split atom; the index is set for finite dictionaries.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        ctx: &SamplingContext<'_>,
        rng: &mut R,
    ) -> Result<(Option<usize>, Arc<Atom>)> {
        match self {
            Dictionary::Finite(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidConfig("empty dictionary".into()));
                }
                let i = rng.random_range(0..atoms.len());
                Ok((Some(i), atoms[i].clone()))
            }
            Dictionary::Sampled(spec) => Ok((None, Arc::new(sample_atom(spec, ctx, rng)?))),
        }
    }
}
