//! Post-processing of campaign results: Pareto fronts, points of interest,
//! histograms, cross-pile action matching, trend statistics and figures.

mod histogram;
mod plot;
mod trend;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

pub use histogram::{histogram2d, BinSpec, Field, Histogram2d};
pub use plot::{export_trajectory, histogram_svg, scatter_svg, tip_path_csv, trajectory_svg, TrajectoryFiles};
pub use trend::{median, spearman, trend_tests, SlopeMedian, SpeedCorrelation, TrendReport};

use crate::config::ActionParams;
use crate::sim::LoadingRecord;

/// One loading in the (productivity, efficiency) plane.
#[derive(Clone, Debug, PartialEq)]
pub struct PerformancePoint {
    pub run_id: String,
    /// kg/s
    pub p_p: f64,
    /// kg/kJ
    pub p_e: f64,
    /// kg
    pub m_load: f64,
    pub pile: String,
}

impl From<&LoadingRecord> for PerformancePoint {
    fn from(r: &LoadingRecord) -> Self {
        Self {
            run_id: r.run_id.clone(),
            p_p: r.p_p,
            p_e: r.p_e,
            m_load: r.m_load,
            pile: r.pile.clone(),
        }
    }
}

/// `a` is at least as good as `b` in both measures and better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Indices of the non-dominated pairs (both coordinates maximized), ordered by
/// the first coordinate, then index. Duplicates of a front point are all kept.
pub fn pareto_indices(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // descending x, then descending y
    order.sort_by(|&a, &b| {
        points[b]
            .0
            .total_cmp(&points[a].0)
            .then(points[b].1.total_cmp(&points[a].1))
    });
    let mut keep = Vec::new();
    let mut best_y = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let x = points[order[i]].0;
        let top_y = points[order[i]].1;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == x {
            if points[order[j]].1 == top_y && top_y > best_y {
                keep.push(order[j]);
            }
            j += 1;
        }
        best_y = best_y.max(top_y);
        i = j;
    }
    keep.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0).then(a.cmp(&b)));
    keep
}

/// Non-dominated subset in (P_p, P_e), ordered by P_p.
pub fn pareto_front(points: &[PerformancePoint]) -> Vec<PerformancePoint> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.p_p, p.p_e)).collect();
    pareto_indices(&xy).into_iter().map(|i| points[i].clone()).collect()
}

/// The four marked loadings of one pile.
#[derive(Clone, Debug, PartialEq)]
pub struct PoiSet {
    /// ○
    pub best_efficiency: PerformancePoint,
    /// △
    pub best_productivity: PerformancePoint,
    /// ◇
    pub pareto_choice: PerformancePoint,
    /// □
    pub best_mass: PerformancePoint,
}

/// Highest `key`, lowest run id among ties.
fn argmax<'a>(points: &'a [PerformancePoint], key: impl Fn(&PerformancePoint) -> f64) -> &'a PerformancePoint {
    points
        .iter()
        .max_by(|a, b| key(a).total_cmp(&key(b)).then_with(|| b.run_id.cmp(&a.run_id)))
        .expect("non-empty point set")
}

/// Points of interest over the finished runs of one pile.
///
/// ◇ is the front point with the largest `(P_p / max P_p)·(P_e / max P_e)`.
/// Returns `None` when no run finished.
pub fn select_poi(records: &[LoadingRecord]) -> Option<PoiSet> {
    select_poi_with(records, None)
}

/// As [`select_poi`], with ◇ forced to `pareto_override` when that run exists.
pub fn select_poi_with(records: &[LoadingRecord], pareto_override: Option<&str>) -> Option<PoiSet> {
    let points: Vec<PerformancePoint> = records
        .iter()
        .filter(|r| r.flag.is_finished())
        .map(PerformancePoint::from)
        .collect();
    if points.is_empty() {
        return None;
    }
    let best_efficiency = argmax(&points, |p| p.p_e).clone();
    let best_productivity = argmax(&points, |p| p.p_p).clone();
    let best_mass = argmax(&points, |p| p.m_load).clone();
    let forced = pareto_override.and_then(|id| points.iter().find(|p| p.run_id == id));
    let pareto_choice = match forced {
        Some(p) => p.clone(),
        None => {
            let front = pareto_front(&points);
            let (max_p, max_e) = (best_productivity.p_p, best_efficiency.p_e);
            let scale = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };
            argmax(&front, |p| scale(p.p_p, max_p) * scale(p.p_e, max_e)).clone()
        }
    };
    Some(PoiSet {
        best_efficiency,
        best_productivity,
        pareto_choice,
        best_mass,
    })
}

/// Runs near a target performance and the same actions on other piles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionMatch {
    /// Source runs within the radius, by run id.
    pub source: Vec<LoadingRecord>,
    /// Pile name → runs with one of the source actions.
    pub matches: BTreeMap<String, Vec<LoadingRecord>>,
}

impl ActionMatch {
    pub fn actions(&self) -> BTreeSet<ActionParams> {
        self.source.iter().map(|r| r.action).collect()
    }
}

/// Select source runs with `‖(P_p, P_e) − target‖ ≤ radius`, each axis divided
/// by its maximum over the source records, then look up their α-tuples in
/// every other campaign.
pub fn match_actions(
    source: &[LoadingRecord],
    target: (f64, f64),
    radius: f64,
    others: &[&[LoadingRecord]],
) -> ActionMatch {
    let max_p = source.iter().map(|r| r.p_p).fold(0.0, f64::max);
    let max_e = source.iter().map(|r| r.p_e).fold(0.0, f64::max);
    let norm = |v: f64, max: f64| if max > 0.0 { v / max } else { v };
    let mut selected: Vec<LoadingRecord> = source
        .iter()
        .filter(|r| {
            let dp = norm(r.p_p, max_p) - norm(target.0, max_p);
            let de = norm(r.p_e, max_e) - norm(target.1, max_e);
            dp.hypot(de) <= radius
        })
        .cloned()
        .collect();
    selected.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let actions: BTreeSet<ActionParams> = selected.iter().map(|r| r.action).collect();

    let mut matches: BTreeMap<String, Vec<LoadingRecord>> = BTreeMap::new();
    for campaign in others {
        for r in campaign.iter().filter(|r| actions.contains(&r.action)) {
            matches.entry(r.pile.clone()).or_default().push(r.clone());
        }
    }
    for rows in matches.values_mut() {
        rows.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    }
    ActionMatch {
        source: selected,
        matches,
    }
}

/// Records of one pile, in input order.
pub fn records_for_pile<'a>(records: &'a [LoadingRecord], pile: &str) -> Vec<&'a LoadingRecord> {
    records.iter().filter(|r| r.pile == pile).collect()
}

/// Pile names present in `records`, sorted by soil then slope.
pub fn pile_names(records: &[LoadingRecord]) -> Vec<String> {
    let mut keys: Vec<(&str, f64, &str)> = records
        .iter()
        .map(|r| (r.soil.as_str(), r.slope_deg, r.pile.as_str()))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(b.0).then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)));
    keys.dedup_by(|a, b| a.2 == b.2);
    keys.into_iter().map(|k| k.2.to_string()).collect()
}
