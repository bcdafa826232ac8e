//! Crawling and sampling a simulated online social network.
//!
//! The crate walks a graph only through [`crawl::Frontend`], which plays the
//! role of a social-network web front-end: privacy-gated friend lists, a
//! per-page cost ledger, a dedup cache shared by parallel crawls, and a
//! user-id existence probe. On top of it sit the four samplers (BFS, simple
//! random walk, Metropolis-Hastings random walk, uniform id rejection
//! sampling), MCMC convergence diagnostics, and estimators for degree,
//! region, user-id, clustering, assortativity and privacy statistics.

pub mod graph;
pub mod rng;

pub use graph::{NodeAttributes, NodeId, PrivacySettings, SocialGraph};
pub mod crawl;
pub mod samplers;
pub mod diagnostics;
pub mod estimators;
pub mod experiment;
