//! Attribute planting: regions, privacy settings and user ids with a
//! recorded ground truth.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{GraphError, NodeAttributes, NodeId, PrivacySettings, SocialGraph};
use crate::rng::{family, StreamFamily};

/// How nodes are assigned to regional networks. Region ids start at 1; the
/// mass not claimed by any region goes to region 0 ("no regional network").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionModel {
    None,
    /// Region `i + 1` receives `fractions[i]` of the nodes, chosen at random.
    Explicit { fractions: Vec<f64> },
    /// Like `Explicit`, but regions are contiguous runs of node indices.
    /// Useful when index order follows community structure.
    Blocks { fractions: Vec<f64> },
    /// Region `i` gets mass proportional to `i^-exponent`; `unaffiliated` stays in region 0.
    Zipf { regions: u16, exponent: f64, unaffiliated: f64 },
}

impl RegionModel {
    fn fractions(&self) -> Result<Vec<f64>, GraphError> {
        let f = match self {
            Self::None => Vec::new(),
            Self::Explicit { fractions } | Self::Blocks { fractions } => fractions.clone(),
            Self::Zipf { regions, exponent, unaffiliated } => {
                if !(0.0..=1.0).contains(unaffiliated) {
                    return Err(GraphError::InvalidParameter(format!(
                        "unaffiliated mass {unaffiliated} outside [0, 1]"
                    )));
                }
                let w: Vec<f64> = (1..=*regions).map(|i| (i as f64).powf(-exponent)).collect();
                let total: f64 = w.iter().sum();
                w.iter().map(|x| (1.0 - unaffiliated) * x / total).collect()
            }
        };
        if f.iter().any(|x| !(0.0..=1.0).contains(x)) || f.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(GraphError::InvalidParameter(
                "region fractions must be in [0, 1] and sum to at most 1".into(),
            ));
        }
        if f.len() >= u16::MAX as usize {
            return Err(GraphError::InvalidParameter("too many regions".into()));
        }
        Ok(f)
    }
}

/// Privacy awareness as a function of degree: probability that `Q != 1111`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PaFunction {
    Constant { p: f64 },
    /// `clamp(intercept + slope * log10(k), 0, max)`
    LogLinear { intercept: f64, slope: f64, max: f64 },
}

impl PaFunction {
    pub fn eval(&self, degree: usize) -> f64 {
        match *self {
            Self::Constant { p } => p.clamp(0.0, 1.0),
            Self::LogLinear { intercept, slope, max } => {
                let k = degree.max(1) as f64;
                (intercept + slope * k.log10()).clamp(0.0, max.min(1.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserIdMode {
    /// Distinct ids drawn uniformly from `[0, space)`.
    UniformSparse { space: u64 },
    /// Distinct uniform ids, handed out in ascending order to nodes sorted by
    /// descending `ln(k) + noise * N(0, 1)`: high-degree nodes get low ids.
    DegreeAnticorrelated { space: u64, noise: f64 },
}

impl UserIdMode {
    pub fn space(&self) -> u64 {
        match *self {
            Self::UniformSparse { space } | Self::DegreeAnticorrelated { space, .. } => space,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributePlantSpec {
    pub regions: RegionModel,
    pub pa: PaFunction,
    /// Fraction of nodes whose friend list is hidden (`Q = 1101`).
    pub hidden_friends: f64,
    pub user_ids: UserIdMode,
}

impl Default for AttributePlantSpec {
    fn default() -> Self {
        Self {
            regions: RegionModel::Zipf { regions: 10, exponent: 1.0, unaffiliated: 0.62 },
            pa: PaFunction::LogLinear { intercept: 0.3, slope: -0.05, max: 0.3 },
            hidden_friends: 0.0,
            user_ids: UserIdMode::UniformSparse { space: 1 << 32 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMass {
    pub region: u16,
    pub nodes: usize,
    pub fraction: f64,
}

/// Privacy awareness realized among nodes of one degree whose friend list is visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaRow {
    pub degree: usize,
    pub nodes: usize,
    pub planned: f64,
    pub realized: f64,
}

/// Sidecar describing exactly what was planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub nodes: usize,
    pub spec: AttributePlantSpec,
    pub hidden_friends_realized: f64,
    /// `P(Q != 1111)` among nodes with a visible friend list.
    pub pa_visible: f64,
    pub regions: Vec<RegionMass>,
    pub pa_table: Vec<PaRow>,
}

impl GroundTruth {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ground truth serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }
}

/// Visible-friend-list settings other than the default, used for privacy-aware nodes.
const AWARE_VISIBLE: [u8; 7] = [0b0010, 0b0011, 0b0110, 0b0111, 0b1010, 0b1011, 0b1110];
const HIDDEN: u8 = 0b1101;

/// Largest-remainder apportionment of `n` items to `fractions` (region 0 first).
fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let rest = (1.0 - fractions.iter().sum::<f64>()).max(0.0);
    let all: Vec<f64> = std::iter::once(rest).chain(fractions.iter().copied()).collect();
    let total: f64 = all.iter().sum();
    let quotas: Vec<f64> = all.iter().map(|f| f / total * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n - assigned) {
        counts[i] += 1;
    }
    counts
}

pub fn plant_attributes(
    g: &SocialGraph,
    spec: &AttributePlantSpec,
    seed: u64,
) -> Result<(SocialGraph, GroundTruth), GraphError> {
    let n = g.node_count();
    if !(0.0..=1.0).contains(&spec.hidden_friends) {
        return Err(GraphError::InvalidParameter("hidden_friends must be in [0, 1]".into()));
    }
    let space = spec.user_ids.space();
    if space < n as u64 || space > 1 << 32 {
        return Err(GraphError::InvalidParameter(format!(
            "user id space {space} must hold {n} ids and fit in 32 bits"
        )));
    }
    let streams = StreamFamily::new(seed, family::PLANT);

    // regions
    let fractions = spec.regions.fractions()?;
    let counts = apportion(n, &fractions);
    let mut order: Vec<usize> = (0..n).collect();
    if !matches!(spec.regions, RegionModel::Blocks { .. }) {
        order.shuffle(&mut streams.split(0));
    }
    let mut region = vec![0u16; n];
    // regions 1.. take the front of the order, region 0 the tail
    let mut pos = 0;
    for (r, &c) in counts.iter().enumerate().skip(1) {
        for &v in &order[pos..pos + c] {
            region[v] = r as u16;
        }
        pos += c;
    }

    // privacy
    let mut rng = streams.split(1);
    let privacy: Vec<PrivacySettings> = g
        .nodes()
        .map(|v| {
            let bits = if rng.random::<f64>() < spec.hidden_friends {
                HIDDEN
            } else if rng.random::<f64>() < spec.pa.eval(g.degree(v)) {
                AWARE_VISIBLE[rng.random_range(0..AWARE_VISIBLE.len())]
            } else {
                0b1111
            };
            PrivacySettings::new(bits).unwrap()
        })
        .collect();

    // user ids
    let mut rng = streams.split(2);
    let mut ids: Vec<u32> = index::sample(&mut rng, space as usize, n)
        .into_iter()
        .map(|x| x as u32)
        .collect();
    let mut user_id = vec![0u32; n];
    match spec.user_ids {
        UserIdMode::UniformSparse { .. } => {
            ids.shuffle(&mut rng);
            user_id.copy_from_slice(&ids);
        }
        UserIdMode::DegreeAnticorrelated { noise, .. } => {
            ids.sort_unstable();
            let mut keyed: Vec<(f64, usize)> = g
                .nodes()
                .map(|v| {
                    let z: f64 = rng.sample(StandardNormal);
                    ((g.degree(v).max(1) as f64).ln() + noise * z, v.index())
                })
                .collect();
            keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            for (id, (_, v)) in ids.into_iter().zip(keyed) {
                user_id[v] = id;
            }
        }
    }

    let attrs: Vec<NodeAttributes> = (0..n)
        .map(|v| NodeAttributes { user_id: user_id[v], region: region[v], privacy: privacy[v] })
        .collect();
    let mut out = g.clone();
    out.set_attributes(attrs, fractions.len() as u16);

    let truth = ground_truth(&out, spec, seed, &counts);
    Ok((out, truth))
}

fn ground_truth(g: &SocialGraph, spec: &AttributePlantSpec, seed: u64, counts: &[usize]) -> GroundTruth {
    let n = g.node_count();
    let hidden = g.attributes().iter().filter(|a| !a.privacy.can_view_friends()).count();
    let mut per_degree: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for v in g.nodes() {
        let q = g.attrs(v).privacy;
        if q.can_view_friends() {
            let cell = per_degree.entry(g.degree(v)).or_default();
            cell.0 += 1;
            cell.1 += q.is_privacy_aware() as usize;
        }
    }
    let visible: usize = per_degree.values().map(|c| c.0).sum();
    let aware: usize = per_degree.values().map(|c| c.1).sum();
    GroundTruth {
        seed,
        nodes: n,
        spec: spec.clone(),
        hidden_friends_realized: ratio(hidden, n),
        pa_visible: ratio(aware, visible),
        regions: counts
            .iter()
            .enumerate()
            .map(|(r, &c)| RegionMass { region: r as u16, nodes: c, fraction: ratio(c, n) })
            .collect(),
        pa_table: per_degree
            .into_iter()
            .map(|(degree, (nodes, aware))| PaRow {
                degree,
                nodes,
                planned: spec.pa.eval(degree),
                realized: ratio(aware, nodes),
            })
            .collect(),
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Pearson correlation between user id and degree, for checking the anticorrelated mode.
pub fn user_id_degree_correlation(g: &SocialGraph) -> f64 {
    let xs: Vec<f64> = g.nodes().map(|v| g.attrs(v).user_id as f64).collect();
    let ys: Vec<f64> = g.nodes().map(|v: NodeId| g.degree(v) as f64).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}
