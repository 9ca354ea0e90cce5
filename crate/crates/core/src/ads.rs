//! Automatic domain splitting.
//!
//! A generator produces a Taylor map over a sub-box of the normalized domain
//! `[-1, 1]^v`, expressed in variables renormalized to that sub-box. When the
//! estimated truncation error of some output exceeds its tolerance, the box
//! is halved along one variable and both halves are re-expanded. The process
//! stops per box when all tolerances are met or the split budget runs out.

use std::fmt::Display;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::da::{DaError, RealInterval, SerialMap, TaylorMap, TaylorPoly};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AdsError {
    #[error("no variable can be split further")]
    NoSplittableVariable,
    #[error("invalid ADS configuration: {0}")]
    InvalidConfig(String),
    #[error("point {0:?} lies outside the unit box")]
    OutsideDomain(Vec<f64>),
    #[error("no usable manifold entry covers the point")]
    NoEntry,
    #[error(transparent)]
    Da(#[from] DaError),
}

/// Axis-aligned sub-box of `[-1, 1]^v` obtained by repeated halving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubDomain {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    pub split_counts: Vec<u32>,
    /// Split history, e.g. `"0L1R"`: halved along variable 0 (lower half),
    /// then along variable 1 (upper half).
    pub path: String,
}

impl SubDomain {
    pub fn root(num_vars: usize) -> SubDomain {
        SubDomain {
            center: vec![0.0; num_vars],
            half_width: vec![1.0; num_vars],
            split_counts: vec![0; num_vars],
            path: String::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.center.len()
    }

    pub fn split(&self, var: usize) -> (SubDomain, SubDomain) {
        let hw = self.half_width[var] * 0.5;
        let mut lo = self.clone();
        let mut hi = self.clone();
        lo.half_width[var] = hw;
        hi.half_width[var] = hw;
        lo.center[var] -= hw;
        hi.center[var] += hw;
        lo.split_counts[var] += 1;
        hi.split_counts[var] += 1;
        lo.path.push_str(&format!("{var}L"));
        hi.path.push_str(&format!("{var}R"));
        (lo, hi)
    }

    /// Maps local coordinates in `[-1, 1]^v` to the global box.
    pub fn to_global(&self, local: &[f64]) -> Vec<f64> {
        local
            .iter()
            .zip(self.center.iter().zip(&self.half_width))
            .map(|(u, (c, h))| c + h * u)
            .collect()
    }

    pub fn to_local(&self, global: &[f64]) -> Vec<f64> {
        global
            .iter()
            .zip(self.center.iter().zip(&self.half_width))
            .map(|(x, (c, h))| (x - c) / h)
            .collect()
    }

    pub fn contains(&self, global: &[f64]) -> bool {
        global
            .iter()
            .zip(self.center.iter().zip(&self.half_width))
            .all(|(x, (c, h))| *x >= c - h && *x <= c + h)
    }

    pub fn volume(&self) -> f64 {
        self.half_width.iter().map(|h| 2.0 * h).product()
    }

    pub fn intervals(&self) -> Vec<RealInterval> {
        self.center
            .iter()
            .zip(&self.half_width)
            .map(|(c, h)| RealInterval { lo: c - h, hi: c + h })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdsConfig {
    /// One tolerance per map output, in that output's units.
    pub tolerances: Vec<f64>,
    pub max_splits_per_direction: u32,
    pub order: usize,
    /// Optional cap on the total number of entries.
    #[serde(default)]
    pub max_entries: Option<usize>,
}

impl AdsConfig {
    /// Order 4, 5 splits per direction, tolerances for (a km, e, i, Ω, u deg).
    pub fn orbit_set_default() -> AdsConfig {
        AdsConfig {
            tolerances: vec![0.01, 0.01, 1e-5, 1e-5, 1e-5],
            max_splits_per_direction: 5,
            order: 4,
            max_entries: None,
        }
    }

    pub fn validate(&self) -> Result<(), AdsError> {
        if self.tolerances.is_empty() || self.tolerances.iter().any(|t| !(*t > 0.0)) {
            return Err(AdsError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.order == 0 {
            return Err(AdsError::InvalidConfig("order must be at least 1".into()));
        }
        if self.max_entries == Some(0) {
            return Err(AdsError::InvalidConfig("max_entries must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum EntryStatus {
    /// Every output meets its tolerance.
    Converged,
    /// Tolerance not met but no further split allowed.
    BudgetExhausted,
    /// The generator failed on this sub-domain.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldEntry {
    pub domain: SubDomain,
    pub map: Option<TaylorMap>,
    pub status: EntryStatus,
    /// Estimated truncation error per output (empty on failure).
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    pub num_vars: usize,
    pub config: AdsConfig,
    pub entries: Vec<ManifoldEntry>,
}

/// Sum of absolute top-degree coefficients: proxy for the truncation error.
pub fn estimate_truncation_error(p: &TaylorPoly) -> f64 {
    p.top_order_mass()
}

/// Share of the top-degree coefficient mass attributable to each variable.
///
/// Each top-degree monomial contributes `|c| * α_i / k` to variable `i`, so a
/// pure power `x_i^k` is charged entirely to `x_i`.
pub fn variable_masses(p: &TaylorPoly) -> Vec<f64> {
    let k = p.order();
    let basis = p.basis();
    let mut out = vec![0.0; p.num_vars()];
    for idx in basis.degree_range(k) {
        let c = p.coeffs()[idx].abs();
        if c == 0.0 {
            continue;
        }
        for (var, &e) in basis.exponents(idx).iter().enumerate() {
            out[var] += c * e as f64 / k as f64;
        }
    }
    out
}

/// Variable with the largest top-order mass summed over outputs; ties go to
/// the lowest index. `splittable[i] == false` excludes variable `i`.
pub fn choose_split_direction(m: &TaylorMap, splittable: &[bool]) -> Result<usize, AdsError> {
    choose_weighted(m, &vec![1.0; m.len()], splittable)
}

fn choose_weighted(m: &TaylorMap, weights: &[f64], splittable: &[bool]) -> Result<usize, AdsError> {
    let mut total = vec![0.0; m.num_vars()];
    for (p, w) in m.outputs().iter().zip(weights) {
        if *w == 0.0 {
            continue;
        }
        for (t, c) in total.iter_mut().zip(variable_masses(p)) {
            *t += w * c;
        }
    }
    let mut best: Option<usize> = None;
    for (i, mass) in total.iter().enumerate() {
        if !splittable.get(i).copied().unwrap_or(false) {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) if *mass > total[b] => best = Some(i),
            _ => {}
        }
    }
    best.ok_or(AdsError::NoSplittableVariable)
}

enum Outcome {
    Done(ManifoldEntry),
    Split(SubDomain, SubDomain),
}

fn process<G, E>(domain: SubDomain, generator: &G, cfg: &AdsConfig, may_split: bool) -> Outcome
where
    G: Fn(&SubDomain) -> Result<TaylorMap, E>,
    E: Display,
{
    let map = match generator(&domain) {
        Ok(m) => m,
        Err(e) => {
            return Outcome::Done(ManifoldEntry {
                domain,
                map: None,
                status: EntryStatus::Failed(e.to_string()),
                errors: Vec::new(),
            })
        }
    };
    if !map.outputs().iter().all(|p| p.is_finite()) {
        return Outcome::Done(ManifoldEntry {
            domain,
            map: None,
            status: EntryStatus::Failed("non-finite expansion".into()),
            errors: Vec::new(),
        });
    }
    let errors: Vec<f64> = map.outputs().iter().map(estimate_truncation_error).collect();
    // ratio > 1 means the output misses its tolerance
    let weights: Vec<f64> = errors
        .iter()
        .zip(&cfg.tolerances)
        .map(|(e, t)| if e > t { 1.0 / t } else { 0.0 })
        .collect();
    if weights.iter().all(|w| *w == 0.0) {
        return Outcome::Done(ManifoldEntry {
            domain,
            map: Some(map),
            status: EntryStatus::Converged,
            errors,
        });
    }
    let splittable: Vec<bool> = domain
        .split_counts
        .iter()
        .map(|&s| s < cfg.max_splits_per_direction)
        .collect();
    let dir = if may_split {
        choose_weighted(&map, &weights, &splittable).ok()
    } else {
        None
    };
    match dir {
        Some(var) => {
            let (lo, hi) = domain.split(var);
            Outcome::Split(lo, hi)
        }
        None => Outcome::Done(ManifoldEntry {
            domain,
            map: Some(map),
            status: EntryStatus::BudgetExhausted,
            errors,
        }),
    }
}

/// Runs the splitting loop from the full box.
///
/// Sub-domains are processed level by level; within a level they are
/// independent and run in parallel when the `parallel` feature is on. The
/// returned entries are sorted by split path, so the result does not depend
/// on scheduling.
pub fn run_ads<G, E>(num_vars: usize, generator: G, cfg: &AdsConfig) -> Result<Manifold, AdsError>
where
    G: Fn(&SubDomain) -> Result<TaylorMap, E> + Sync,
    E: Display,
{
    cfg.validate()?;
    let mut done: Vec<ManifoldEntry> = Vec::new();
    let mut frontier = vec![SubDomain::root(num_vars)];
    while !frontier.is_empty() {
        // each split adds one entry; stop splitting once the cap would be exceeded
        let room = cfg
            .max_entries
            .map(|cap| cap.saturating_sub(done.len() + frontier.len()));
        let outcomes = map_frontier(frontier, &generator, cfg, room);
        let mut next = Vec::new();
        for o in outcomes {
            match o {
                Outcome::Done(e) => done.push(e),
                Outcome::Split(a, b) => {
                    next.push(a);
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    done.sort_by(|a, b| a.domain.path.cmp(&b.domain.path));
    Ok(Manifold {
        num_vars,
        config: cfg.clone(),
        entries: done,
    })
}

fn map_frontier<G, E>(
    frontier: Vec<SubDomain>,
    generator: &G,
    cfg: &AdsConfig,
    room: Option<usize>,
) -> Vec<Outcome>
where
    G: Fn(&SubDomain) -> Result<TaylorMap, E> + Sync,
    E: Display,
{
    // the first `room` domains (in path order) may split
    let allow: Vec<bool> = (0..frontier.len())
        .map(|i| room.is_none_or(|r| i < r))
        .collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        frontier
            .into_par_iter()
            .zip(allow)
            .map(|(d, a)| process(d, generator, cfg, a))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        frontier
            .into_iter()
            .zip(allow)
            .map(|(d, a)| process(d, generator, cfg, a))
            .collect()
    }
}

impl Manifold {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries with a usable map (converged or budget-exhausted).
    pub fn usable(&self) -> impl Iterator<Item = &ManifoldEntry> {
        self.entries.iter().filter(|e| e.map.is_some())
    }

    pub fn converged_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == EntryStatus::Converged)
            .count()
    }

    pub fn failed_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, EntryStatus::Failed(_)))
            .count()
    }

    /// Total volume of all sub-domains; equals `2^v` for a partition.
    pub fn total_volume(&self) -> f64 {
        self.entries.iter().map(|e| e.domain.volume()).sum()
    }

    /// First entry (in path order) whose closed box contains `point`.
    pub fn locate(&self, point: &[f64]) -> Result<&ManifoldEntry, AdsError> {
        if point.len() != self.num_vars || point.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err(AdsError::OutsideDomain(point.to_vec()));
        }
        self.entries
            .iter()
            .find(|e| e.domain.contains(point))
            .ok_or(AdsError::NoEntry)
    }

    /// Evaluates the covering entry at a global point of `[-1, 1]^v`.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, AdsError> {
        let entry = self.locate(point)?;
        let map = entry.map.as_ref().ok_or(AdsError::NoEntry)?;
        Ok(map.eval(&entry.domain.to_local(point))?)
    }

    /// Per-output hull of the entry bounds over their local unit boxes.
    pub fn bounds(&self) -> Option<Vec<RealInterval>> {
        let mut acc: Option<Vec<RealInterval>> = None;
        for e in self.usable() {
            let map = e.map.as_ref().unwrap();
            let b: Vec<RealInterval> = map.outputs().iter().map(|p| p.bound_unit()).collect();
            acc = Some(match acc {
                None => b,
                Some(a) => a.iter().zip(&b).map(|(x, y)| x.hull(y)).collect(),
            });
        }
        acc
    }

    pub fn to_serial(&self) -> SerialManifold {
        SerialManifold {
            num_vars: self.num_vars,
            order: self.config.order,
            tolerances: self.config.tolerances.clone(),
            max_splits_per_direction: self.config.max_splits_per_direction,
            max_entries: self.config.max_entries,
            entries: self
                .entries
                .iter()
                .map(|e| SerialEntry {
                    path: e.domain.path.clone(),
                    center: e.domain.center.clone(),
                    half_width: e.domain.half_width.clone(),
                    split_counts: e.domain.split_counts.clone(),
                    status: e.status.clone(),
                    errors: e.errors.clone(),
                    map: e.map.as_ref().map(|m| m.to_serial()),
                })
                .collect(),
        }
    }

    pub fn from_serial(s: &SerialManifold) -> Result<Manifold, AdsError> {
        let entries = s
            .entries
            .iter()
            .map(|e| {
                Ok(ManifoldEntry {
                    domain: SubDomain {
                        center: e.center.clone(),
                        half_width: e.half_width.clone(),
                        split_counts: e.split_counts.clone(),
                        path: e.path.clone(),
                    },
                    map: e.map.as_ref().map(TaylorMap::from_serial).transpose()?,
                    status: e.status.clone(),
                    errors: e.errors.clone(),
                })
            })
            .collect::<Result<Vec<_>, AdsError>>()?;
        Ok(Manifold {
            num_vars: s.num_vars,
            config: AdsConfig {
                tolerances: s.tolerances.clone(),
                max_splits_per_direction: s.max_splits_per_direction,
                order: s.order,
                max_entries: s.max_entries,
            },
            entries,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialEntry {
    pub path: String,
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    pub split_counts: Vec<u32>,
    pub status: EntryStatus,
    pub errors: Vec<f64>,
    pub map: Option<SerialMap>,
}

/// Serialized [`Manifold`]: header plus entries keyed by split path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialManifold {
    pub num_vars: usize,
    pub order: usize,
    pub tolerances: Vec<f64>,
    pub max_splits_per_direction: u32,
    #[serde(default)]
    pub max_entries: Option<usize>,
    pub entries: Vec<SerialEntry>,
}

/// Expands a univariate-per-output function given pointwise in the global
/// variables, by building DA variables for the sub-domain and calling `f`.
///
/// Handy for tests and demos: `f` receives the global coordinates as DA
/// values `center_i + half_width_i * dx_i`.
pub fn expand_on<F>(domain: &SubDomain, order: usize, f: F) -> Result<TaylorMap, DaError>
where
    F: Fn(&[TaylorPoly]) -> Result<Vec<TaylorPoly>, DaError>,
{
    let v = domain.num_vars();
    let vars = (0..v)
        .map(|i| TaylorPoly::variable(domain.center[i], i, domain.half_width[i], v, order))
        .collect::<Result<Vec<_>, _>>()?;
    TaylorMap::new(f(&vars)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::da::Intrinsic;

    fn poly(terms: &[(Vec<u8>, f64)], v: usize, k: usize) -> TaylorPoly {
        TaylorPoly::from_terms(v, k, terms).unwrap()
    }

    #[test]
    fn truncation_error_examples() {
        let p = TaylorPoly::variable(1.0, 0, 1.0, 1, 4).unwrap();
        assert_eq!(estimate_truncation_error(&p), 0.0);
        assert_eq!(estimate_truncation_error(&poly(&[(vec![4], 1.0)], 1, 4)), 1.0);
        let q = poly(&[(vec![4, 0], 2.0), (vec![2, 2], 3.0)], 2, 4);
        assert_eq!(estimate_truncation_error(&q), 5.0);
    }

    #[test]
    fn split_direction_examples() {
        let m = TaylorMap::new(vec![poly(&[(vec![4, 0], 1.0)], 2, 4)]).unwrap();
        assert_eq!(choose_split_direction(&m, &[true, true]).unwrap(), 0);
        let m = TaylorMap::new(vec![poly(&[(vec![4, 0], 1.0), (vec![0, 4], 3.0)], 2, 4)]).unwrap();
        assert_eq!(choose_split_direction(&m, &[true, true]).unwrap(), 1);
        let m = TaylorMap::new(vec![poly(&[(vec![4, 0], 2.0), (vec![0, 4], 2.0)], 2, 4)]).unwrap();
        assert_eq!(choose_split_direction(&m, &[true, true]).unwrap(), 0);
        assert_eq!(choose_split_direction(&m, &[false, true]).unwrap(), 1);
        assert_eq!(
            choose_split_direction(&m, &[false, false]),
            Err(AdsError::NoSplittableVariable)
        );
    }

    fn cfg(tol: f64, splits: u32, order: usize) -> AdsConfig {
        AdsConfig {
            tolerances: vec![tol],
            max_splits_per_direction: splits,
            order,
            max_entries: None,
        }
    }

    #[test]
    fn linear_generator_never_splits() {
        let gen = |d: &SubDomain| {
            expand_on(d, 4, |x| Ok(vec![&x[0] * 3.0 + &x[1] * -2.0 + 1.0]))
        };
        let m = run_ads(2, gen, &cfg(1e-12, 5, 4)).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.entries[0].status, EntryStatus::Converged);
    }

    #[test]
    fn exponential_generator_splits_and_partitions() {
        let gen = |d: &SubDomain| {
            expand_on(d, 4, |x| Ok(vec![(&x[0] * 5.0).intrinsic(Intrinsic::Exp)?]))
        };
        let m = run_ads(1, gen, &cfg(1e-3, 8, 4)).unwrap();
        assert!(m.len() > 1);
        assert_eq!(m.total_volume(), 2.0);
        // sorted sub-intervals tile [-1, 1] without gaps
        let mut iv: Vec<RealInterval> = m.entries.iter().map(|e| e.domain.intervals()[0]).collect();
        iv.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        assert_eq!(iv[0].lo, -1.0);
        assert_eq!(iv.last().unwrap().hi, 1.0);
        for w in iv.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
        // manifold evaluation tracks the true function
        for i in 0..=40 {
            let x = -1.0 + i as f64 * 0.05;
            let got = m.eval(&[x]).unwrap()[0];
            let truth = (5.0 * x).exp();
            assert!((got - truth).abs() < 10.0 * 1e-3 * truth.max(1.0), "{x}: {got} vs {truth}");
        }
    }

    #[test]
    fn zero_budget_flags_entry() {
        let gen = |d: &SubDomain| {
            expand_on(d, 4, |x| Ok(vec![(&x[0] * 5.0).intrinsic(Intrinsic::Exp)?]))
        };
        let m = run_ads(1, gen, &cfg(1e-6, 0, 4)).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.entries[0].status, EntryStatus::BudgetExhausted);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let gen = |d: &SubDomain| -> Result<TaylorMap, String> {
            if d.center[0] > 0.0 {
                Err("boom".into())
            } else {
                expand_on(d, 3, |x| Ok(vec![x[0].intrinsic(Intrinsic::Exp)?.powi(3)]))
                    .map_err(|e| e.to_string())
            }
        };
        let m = run_ads(1, gen, &cfg(1e-9, 2, 3)).unwrap();
        assert!(m.failed_count() >= 1);
        assert_eq!(m.total_volume(), 2.0);
    }

    #[test]
    fn entry_cap_is_respected() {
        let gen = |d: &SubDomain| {
            expand_on(d, 4, |x| {
                Ok(vec![(&(&x[0] * 4.0) + &(&x[1] * 3.0)).intrinsic(Intrinsic::Exp)?])
            })
        };
        let mut c = cfg(1e-8, 5, 4);
        c.max_entries = Some(10);
        let m = run_ads(2, gen, &c).unwrap();
        assert!(m.len() <= 10);
        assert_eq!(m.total_volume(), 4.0);
    }

    #[test]
    fn serial_roundtrip() {
        let gen = |d: &SubDomain| {
            expand_on(d, 3, |x| Ok(vec![(&x[0] * 3.0).intrinsic(Intrinsic::Sin)?]))
        };
        let m = run_ads(1, gen, &cfg(1e-3, 3, 3)).unwrap();
        let s = serde_json::to_string(&m.to_serial()).unwrap();
        let back = Manifold::from_serial(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
