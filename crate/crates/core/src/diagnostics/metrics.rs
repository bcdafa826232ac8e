use std::fmt;
use std::str::FromStr;

use crate::crawl::NodeObservation;
use crate::samplers::{Catalog, WalkTrace};

/// A scalar function of a sampled node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Degree,
    UserId,
    Region,
    /// 1 if the node belongs to the given region, else 0.
    Membership(u16),
}

impl MetricKind {
    pub fn eval(self, obs: &NodeObservation) -> f64 {
        match self {
            MetricKind::Degree => obs.degree as f64,
            MetricKind::UserId => obs.user_id as f64,
            MetricKind::Region => obs.region as f64,
            MetricKind::Membership(r) => f64::from(u8::from(obs.region == r)),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Degree => f.write_str("degree"),
            MetricKind::UserId => f.write_str("user_id"),
            MetricKind::Region => f.write_str("region_id"),
            MetricKind::Membership(r) => write!(f, "membership:{r}"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "degree" => Ok(MetricKind::Degree),
            "user_id" => Ok(MetricKind::UserId),
            "region_id" | "region" => Ok(MetricKind::Region),
            _ => s
                .strip_prefix("membership:")
                .and_then(|r| r.parse().ok())
                .map(MetricKind::Membership)
                .ok_or_else(|| format!("unknown metric `{s}`")),
        }
    }
}

/// One metric evaluated along one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub chain_id: u32,
    pub metric: MetricKind,
    pub values: Vec<f64>,
}

pub fn metric_series(trace: &WalkTrace, catalog: &Catalog, metric: MetricKind) -> MetricSeries {
    MetricSeries {
        chain_id: trace.chain_id,
        metric,
        values: catalog.lookup(&trace.nodes).map(|o| metric.eval(&o)).collect(),
    }
}
