//! Seeded, parallel verification sweeps over random state pairs.
//!
//! Work item `(dim, trial)` draws its pair from the stream
//! `derive_seed(seed, dim, trial)`, so results do not depend on scheduling.
//! Statistics are merged with order-independent operations and violations are
//! sorted by `(dim, trial)` before being returned.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{chain_checks, sandwich, tsallis_bounds, BoundReport, ChainCheck};
use crate::omd::OmdFunction;
use crate::report::SweepRow;
use crate::rng::{derive_seed, rng_from_seed};
use crate::states::{random_classical_pair, random_pair, StateError, StatePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairFamily {
    /// Independent Ginibre states with independent Haar bases.
    #[default]
    Random,
    /// Diagonal states with independent spectra.
    Commuting,
}

impl PairFamily {
    pub fn draw(self, dim: usize, seed: u64) -> Result<StatePair, StateError> {
        let mut rng = rng_from_seed(seed);
        let pair = match self {
            PairFamily::Random => random_pair(dim, &mut rng)?,
            PairFamily::Commuting => random_classical_pair(dim, &mut rng)?,
        };
        Ok(pair.with_seed(seed))
    }
}

impl std::str::FromStr for PairFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PairFamily::Random),
            "commuting" => Ok(PairFamily::Commuting),
            other => Err(format!(
                "unknown pair family '{other}' (expected 'random' or 'commuting')"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub family: PairFamily,
    /// Each function gets a full sandwich (divergence plus its bounds).
    pub functions: Vec<OmdFunction>,
    /// Tsallis parameters checked only for bound-versus-bound orderings,
    /// without a divergence (e.g. `q = 2`, outside the Tsallis function range).
    pub chain_qs: Vec<f64>,
    /// Keep every row (for output); otherwise only violations are kept.
    pub collect_rows: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundStats {
    pub f_name: String,
    pub bound_name: String,
    pub checks: u64,
    pub vacuous: u64,
    pub violations: u64,
    pub worst_slack: f64,
    /// `(dim, trial, seed)` of the smallest slack.
    pub worst_at: Option<(usize, u64, u64)>,
}

impl BoundStats {
    fn new(f_name: &str, bound_name: &str) -> Self {
        Self {
            f_name: f_name.into(),
            bound_name: bound_name.into(),
            checks: 0,
            vacuous: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            worst_at: None,
        }
    }

    fn record(&mut self, row: &SweepRow) {
        let Some(slack) = row.slack else { return };
        if !row.divergence.is_finite() {
            self.vacuous += 1;
            return;
        }
        self.checks += 1;
        if row.is_violation() {
            self.violations += 1;
        }
        let key = (row.dim, row.trial, row.seed);
        let worse = slack < self.worst_slack
            || slack.is_nan()
            || (slack == self.worst_slack && self.worst_at.is_some_and(|w| key < w));
        if worse {
            self.worst_slack = slack;
            self.worst_at = Some(key);
        }
    }

    fn merge(&mut self, other: BoundStats) {
        self.checks += other.checks;
        self.vacuous += other.vacuous;
        self.violations += other.violations;
        let take = match (self.worst_at, other.worst_at) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => {
                other.worst_slack < self.worst_slack
                    || (other.worst_slack == self.worst_slack && b < a)
            }
        };
        if take {
            self.worst_slack = other.worst_slack;
            self.worst_at = other.worst_at;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepSummary {
    pub pairs: u64,
    pub stats: BTreeMap<String, BoundStats>,
    pub violations: Vec<SweepRow>,
    pub errors: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn total_violations(&self) -> u64 {
        self.stats.values().map(|s| s.violations).sum()
    }

    pub fn total_checks(&self) -> u64 {
        self.stats.values().map(|s| s.checks).sum()
    }

    /// Statistics for one bound name, summed over functions.
    pub fn for_bound(&self, bound_name: &str) -> Option<BoundStats> {
        self.stats
            .values()
            .filter(|s| s.bound_name == bound_name)
            .cloned()
            .reduce(|mut a, b| {
                a.merge(b);
                a.f_name = "*".into();
                a
            })
    }

    fn absorb(&mut self, rows: Vec<SweepRow>, keep_all: bool) {
        self.pairs += 1;
        for row in rows {
            if !row.applicable {
                if keep_all {
                    self.rows.push(row);
                }
                continue;
            }
            let key = format!("{}|{}", row.f_name, row.bound_name);
            self.stats
                .entry(key)
                .or_insert_with(|| BoundStats::new(&row.f_name, &row.bound_name))
                .record(&row);
            if row.is_violation() {
                self.violations.push(row.clone());
            }
            if keep_all {
                self.rows.push(row);
            }
        }
    }

    fn merge(mut self, other: SweepSummary) -> SweepSummary {
        self.pairs += other.pairs;
        for (k, v) in other.stats {
            match self.stats.get_mut(&k) {
                Some(s) => s.merge(v),
                None => {
                    self.stats.insert(k, v);
                }
            }
        }
        self.violations.extend(other.violations);
        self.errors.extend(other.errors);
        self.rows.extend(other.rows);
        self
    }

    fn finish(mut self) -> Self {
        let order = |r: &SweepRow| (r.dim, r.trial);
        self.violations.sort_by_key(order);
        self.rows.sort_by_key(order);
        self.errors.sort();
        self
    }
}

fn report_rows(
    dim: usize,
    trial: u64,
    pair: &StatePair,
    tag: &str,
    f: &OmdFunction,
    reports: &[BoundReport],
    chains: &[ChainCheck],
    divergence: f64,
) -> Vec<SweepRow> {
    let seed = pair.seed.unwrap_or_default();
    let q = f.tsallis_q();
    let mut rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow::from_report(dim, trial, seed, tag, divergence, r))
        .collect();
    rows.extend(
        chains
            .iter()
            .map(|c| SweepRow::from_chain(dim, trial, seed, tag, f.name(), q, c)),
    );
    rows
}

/// All rows for one work item.
pub fn evaluate_item(
    config: &SweepConfig,
    dim: usize,
    trial: u64,
) -> Result<Vec<SweepRow>, String> {
    let seed = derive_seed(config.seed, dim, trial);
    let pair = config
        .family
        .draw(dim, seed)
        .map_err(|e| format!("d={dim} trial={trial}: {e}"))?;
    let tag = pair.tags.first().cloned().unwrap_or_default();
    let mut rows = Vec::new();
    for f in &config.functions {
        let rep =
            sandwich(&pair, f).map_err(|e| format!("d={dim} trial={trial} f={}: {e}", f.name()))?;
        rows.extend(report_rows(
            dim,
            trial,
            &pair,
            &tag,
            f,
            &rep.reports,
            &rep.chains,
            rep.divergence.value,
        ));
    }
    for &q in &config.chain_qs {
        let reports = tsallis_bounds(pair.summary(), q);
        let chains = chain_checks(&reports);
        let name = format!("tsallis:q={q}");
        rows.extend(
            chains
                .iter()
                .map(|c| SweepRow::from_chain(dim, trial, seed, &tag, &name, Some(q), c)),
        );
    }
    Ok(rows)
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(config: &SweepConfig) -> SweepSummary {
    let items: Vec<(usize, u64)> = config
        .dims
        .iter()
        .flat_map(|&d| (0..config.trials).map(move |t| (d, t)))
        .collect();
    items
        .par_iter()
        .fold(SweepSummary::default, |mut acc, &(dim, trial)| {
            match evaluate_item(config, dim, trial) {
                Ok(rows) => acc.absorb(rows, config.collect_rows),
                Err(e) => acc.errors.push(e),
            }
            acc
        })
        .reduce(SweepSummary::default, SweepSummary::merge)
        .finish()
}
