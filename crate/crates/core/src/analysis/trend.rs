use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::sim::LoadingRecord;

/// Median, averaging the two middle values of an even-length sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// 1-based ranks, ties sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with tie correction (Pearson on average ranks).
/// Zero when either sample is constant or shorter than two.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples");
    if a.len() < 2 {
        return 0.0;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeMedian {
    pub soil: String,
    pub slope_deg: f64,
    pub runs: usize,
    pub median_m_load: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedCorrelation {
    pub pile: String,
    /// Finished runs used.
    pub runs: usize,
    /// Spearman ρ(α2, P_e).
    pub rho_pe: f64,
    /// Spearman ρ(α2, P_p).
    pub rho_pp: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrendReport {
    /// Sorted by soil, then slope.
    pub slope_medians: Vec<SlopeMedian>,
    /// Sorted by pile name.
    pub speed: Vec<SpeedCorrelation>,
}

impl TrendReport {
    /// Whether the median load strictly increases with slope for `soil`;
    /// `None` with fewer than two slopes.
    pub fn mass_increases_with_slope(&self, soil: &str) -> Option<bool> {
        let medians: Vec<f64> = self
            .slope_medians
            .iter()
            .filter(|m| m.soil == soil)
            .map(|m| m.median_m_load)
            .collect();
        (medians.len() >= 2).then(|| medians.windows(2).all(|w| w[1] > w[0]))
    }

    pub fn speed_for(&self, pile: &str) -> Option<&SpeedCorrelation> {
        self.speed.iter().find(|s| s.pile == pile)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("median load by slope\n");
        let mut soils: Vec<&str> = self.slope_medians.iter().map(|m| m.soil.as_str()).collect();
        soils.dedup();
        for soil in soils {
            for m in self.slope_medians.iter().filter(|m| m.soil == soil) {
                let _ = writeln!(out, "  {soil} {:>4}°  n={:<6} median m_load {:.1} kg", m.slope_deg, m.runs, m.median_m_load);
            }
            let verdict = match self.mass_increases_with_slope(soil) {
                Some(true) => "strictly increasing",
                Some(false) => "not strictly increasing",
                None => "single slope",
            };
            let _ = writeln!(out, "  {soil}: {verdict}");
        }
        out.push_str("dig speed (alpha2) rank correlation, finished runs\n");
        for s in &self.speed {
            let _ = writeln!(
                out,
                "  {:<12} n={:<6} rho(alpha2, P_e) {:+.3}  rho(alpha2, P_p) {:+.3}",
                s.pile, s.runs, s.rho_pe, s.rho_pp
            );
        }
        out
    }
}

/// Median load per (soil, slope) over all runs and α2 rank correlations per pile over finished runs.
pub fn trend_tests(records: &[LoadingRecord]) -> TrendReport {
    let mut by_slope: BTreeMap<(String, u64), (f64, Vec<f64>)> = BTreeMap::new();
    let mut by_pile: BTreeMap<String, Vec<&LoadingRecord>> = BTreeMap::new();
    for r in records {
        // slopes are non-negative, so the bit pattern orders them
        by_slope
            .entry((r.soil.clone(), r.slope_deg.to_bits()))
            .or_insert_with(|| (r.slope_deg, Vec::new()))
            .1
            .push(r.m_load);
        if r.flag.is_finished() {
            by_pile.entry(r.pile.clone()).or_default().push(r);
        }
    }
    let slope_medians = by_slope
        .into_iter()
        .map(|((soil, _), (slope_deg, masses))| SlopeMedian {
            soil,
            slope_deg,
            runs: masses.len(),
            median_m_load: median(&masses).unwrap_or(0.0),
        })
        .collect();
    let speed = by_pile
        .into_iter()
        .map(|(pile, rows)| {
            let a2: Vec<f64> = rows.iter().map(|r| r.action.penetration_speed()).collect();
            let pe: Vec<f64> = rows.iter().map(|r| r.p_e).collect();
            let pp: Vec<f64> = rows.iter().map(|r| r.p_p).collect();
            SpeedCorrelation {
                pile,
                runs: rows.len(),
                rho_pe: spearman(&a2, &pe),
                rho_pp: spearman(&a2, &pp),
            }
        })
        .collect();
    TrendReport { slope_medians, speed }
}
