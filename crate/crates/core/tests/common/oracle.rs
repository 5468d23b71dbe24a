//! Straight-line reimplementation of isolation-tree growth and scoring, kept
//! independent of the engine. It shares only the atom sampler and the RNG
//! streams, so a fit and the oracle make the same random draws.

use fif_core::dictionary::{Dictionary, Pool, SamplingContext};
use fif_core::{rng, FunctionalDataset, InnerProduct, InnerProductSpec, MultiCurve, Projector};
use rand::seq::index;
use rand::Rng;

pub fn c(m: usize) -> f64 {
    if m <= 1 {
        0.0
    } else if m == 2 {
        1.0
    } else {
        let m = m as f64;
        2.0 * ((m - 1.0).ln() + 0.5772156649) - 2.0 * (m - 1.0) / m
    }
}

/// Interval-by-interval trapezoid rule.
pub fn trapezoid(t: &[f64], f: &[f64], g: &[f64]) -> f64 {
    (0..t.len() - 1)
        .map(|i| 0.5 * (t[i + 1] - t[i]) * (f[i] * g[i] + f[i + 1] * g[i + 1]))
        .sum()
}

pub fn derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let p = f.len();
    let mut d: Vec<f64> = (0..p - 1).map(|i| (f[i + 1] - f[i]) / (t[i + 1] - t[i])).collect();
    d.push(d[p - 2]);
    d
}

pub fn scalar(ip: &InnerProduct, t: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let (df, dg) = (derivative(t, f), derivative(t, g));
    match *ip {
        InnerProduct::L2 => trapezoid(t, f, g),
        InnerProduct::Deriv => trapezoid(t, &df, &dg),
        InnerProduct::Combined { alpha } => {
            let normed = |a: &[f64], b: &[f64]| {
                let s = (trapezoid(t, a, a)).sqrt() * (trapezoid(t, b, b)).sqrt();
                if s >= 1e-12 {
                    trapezoid(t, a, b) / s
                } else {
                    0.0
                }
            };
            let mut total = 0.0;
            if alpha != 0.0 {
                total += alpha * normed(f, g);
            }
            if alpha != 1.0 {
                total += (1.0 - alpha) * normed(&df, &dg);
            }
            total
        }
    }
}

pub fn project(spec: &InnerProductSpec, t: &[f64], x: &MultiCurve, atom: &[Vec<f64>]) -> f64 {
    (0..x.n_channels())
        .map(|ch| {
            let ip = match spec {
                InnerProductSpec::Single(ip) => ip,
                InnerProductSpec::PerChannel(v) => &v[ch],
            };
            scalar(ip, t, x.channel(ch).values(), &atom[ch])
        })
        .sum()
}

pub enum OracleNode {
    Leaf { size: usize, depth: usize },
    Split { atom: Vec<Vec<f64>>, kappa: f64, left: Box<OracleNode>, right: Box<OracleNode> },
}

pub struct OracleTree {
    pub root: OracleNode,
    pub psi: usize,
}

pub struct Setup<'a> {
    pub data: &'a FunctionalDataset,
    pub dictionary: &'a Dictionary,
    pub ip: &'a InnerProductSpec,
    pub height_limit: Option<usize>,
}

/// Grows tree `index` of a forest with this seed and subsample size.
pub fn grow_tree(setup: &Setup<'_>, seed: u64, index: usize, psi: usize) -> OracleTree {
    let mut rng = rng::tree_rng(seed, index);
    let mut members = index::sample(&mut rng, setup.data.n(), psi).into_vec();
    members.sort_unstable();
    let projector = Projector::new(setup.data.grid().clone());
    let ctx = SamplingContext {
        projector: &projector,
        channels: setup.data.channels(),
        pool: Pool { curves: setup.data.curves(), members: Some(&members) },
    };
    let root = grow(setup, &ctx, &members, 0, &mut rng);
    OracleTree { root, psi }
}

fn grow(
    setup: &Setup<'_>,
    ctx: &SamplingContext<'_>,
    members: &[usize],
    depth: usize,
    rng: &mut rng::ForestRng,
) -> OracleNode {
    let leaf = OracleNode::Leaf { size: members.len(), depth };
    if members.len() <= 1 || setup.height_limit.is_some_and(|h| depth >= h) {
        return leaf;
    }
    let (_, atom) = setup.dictionary.draw(ctx, rng).unwrap();
    let atom: Vec<Vec<f64>> = (0..atom.n_channels()).map(|ch| atom.values(ch).to_vec()).collect();
    let t = setup.data.grid().points();
    let proj: Vec<f64> = members
        .iter()
        .map(|&m| project(setup.ip, t, setup.data.curve(m), &atom))
        .collect();
    let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 {
        return leaf;
    }
    for _ in 0..8 {
        let u: f64 = rng.random();
        let kappa = lo + u * (hi - lo);
        let left: Vec<usize> =
            members.iter().zip(&proj).filter(|(_, &v)| v <= kappa).map(|(&m, _)| m).collect();
        let right: Vec<usize> =
            members.iter().zip(&proj).filter(|(_, &v)| v > kappa).map(|(&m, _)| m).collect();
        if right.is_empty() {
            continue;
        }
        let l = grow(setup, ctx, &left, depth + 1, rng);
        let r = grow(setup, ctx, &right, depth + 1, rng);
        return OracleNode::Split { atom, kappa, left: Box::new(l), right: Box::new(r) };
    }
    leaf
}

impl OracleTree {
    pub fn path_length(&self, spec: &InnerProductSpec, t: &[f64], x: &MultiCurve) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                OracleNode::Leaf { size, depth } => return *depth as f64 + c(*size),
                OracleNode::Split { atom, kappa, left, right } => {
                    node = if project(spec, t, x, atom) <= *kappa { left } else { right };
                }
            }
        }
    }
}

/// Eq. 1 of the forest: `2^(-mean h / c(psi))`.
pub fn score(trees: &[OracleTree], spec: &InnerProductSpec, t: &[f64], x: &MultiCurve) -> f64 {
    let h: f64 =
        trees.iter().map(|tr| tr.path_length(spec, t, x)).sum::<f64>() / trees.len() as f64;
    let cp = c(trees[0].psi);
    if cp == 0.0 {
        1.0
    } else {
        2f64.powf(-h / cp)
    }
}

/// Dictionaries exercised by the random problems.
pub fn dictionaries() -> Vec<fif_core::DictionarySpec> {
    use fif_core::{DictionarySpec as D, MixtureComponent};
    vec![
        D::cosine(None),
        D::cosine(Some(12)),
        D::mexican_hat(None),
        D::gaussian_wavelet(Some(20)),
        D::sinus_cosine(None),
        D::Brownian { size: None },
        D::BrownianBridge { size: Some(6) },
        D::dyadic(3),
        D::DyadicDeriv { levels: Some(2) },
        D::Dyadic { levels: None },
        D::UniformIndicator { size: None },
        D::UniformIndicatorDeriv { size: Some(10) },
        D::SelfData,
        D::LocalSelf,
        D::Mixture {
            components: vec![
                MixtureComponent { weight: 0.3, spec: D::cosine(None) },
                MixtureComponent { weight: 0.7, spec: D::UniformIndicator { size: None } },
            ],
            size: None,
        },
    ]
}

/// Fits a one-tree forest on a random problem with `n = psi <= 8` and
/// returns the largest score difference against the oracle over the
/// training curves and a few fresh ones.
pub fn random_problem_gap(case: u64) -> f64 {
    use fif_core::{Curve, FIForest, ForestConfig, HeightLimit};
    let mut r = rng::seeded(rng::derive_seed(0xF1F, case));
    let n = r.random_range(1..=8usize);
    let p = r.random_range(4..=16usize);
    let channels = if r.random_bool(0.25) { 2 } else { 1 };
    let grid = if r.random_bool(0.5) {
        fif_core::TimeGrid::uniform(p).unwrap()
    } else {
        let mut pts: Vec<f64> = (0..p).map(|_| r.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        fif_core::TimeGrid::new(pts).unwrap_or_else(|_| fif_core::TimeGrid::uniform(p).unwrap())
    };
    let p = grid.len();
    let random_curve = |r: &mut rng::ForestRng| {
        MultiCurve::new(
            (0..channels)
                .map(|_| Curve::new((0..p).map(|_| r.random_range(-2.0..2.0)).collect()).unwrap())
                .collect(),
        )
        .unwrap()
    };
    let curves: Vec<MultiCurve> = (0..n).map(|_| random_curve(&mut r)).collect();
    let fresh: Vec<MultiCurve> = (0..3).map(|_| random_curve(&mut r)).collect();
    let data = FunctionalDataset::new(grid.clone(), curves).unwrap();
    let dicts = dictionaries();
    let dictionary = dicts[r.random_range(0..dicts.len())].clone();
    let ips = [
        InnerProduct::L2,
        InnerProduct::Deriv,
        InnerProduct::Combined { alpha: r.random() },
        InnerProduct::Combined { alpha: 0.0 },
        InnerProduct::Combined { alpha: 1.0 },
    ];
    let ip = if channels == 2 && r.random_bool(0.5) {
        InnerProductSpec::PerChannel(vec![ips[r.random_range(0..5)], ips[r.random_range(0..5)]])
    } else {
        InnerProductSpec::Single(ips[r.random_range(0..5)])
    };
    let height_limit = match r.random_range(0..3) {
        0 => HeightLimit::Auto,
        1 => HeightLimit::Unlimited,
        _ => HeightLimit::Depth(r.random_range(1..4)),
    };
    let config = ForestConfig {
        n_trees: 1,
        psi: Some(n),
        height_limit,
        min_leaf_size: 1,
        dictionary: dictionary.clone(),
        inner_product: ip.clone(),
        seed: r.random(),
    };
    let forest = FIForest::fit(&data, &config).unwrap();

    let projector = Projector::new(grid.clone());
    let ctx = SamplingContext {
        projector: &projector,
        channels,
        pool: Pool::all(data.curves()),
    };
    let dict = Dictionary::from_spec(&dictionary, &ctx, &mut rng::dictionary_rng(config.seed)).unwrap();
    let limit = match height_limit {
        HeightLimit::Auto => Some(((n as f64).log2().ceil() as usize).max(1)),
        HeightLimit::Unlimited => None,
        HeightLimit::Depth(d) => Some(d),
    };
    let setup = Setup { data: &data, dictionary: &dict, ip: &ip, height_limit: limit };
    let trees = vec![grow_tree(&setup, config.seed, 0, n)];
    data.curves()
        .iter()
        .chain(&fresh)
        .map(|x| (forest.score(x).unwrap() - score(&trees, &ip, grid.points(), x)).abs())
        .fold(0.0, f64::max)
}
