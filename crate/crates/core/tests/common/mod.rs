//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use loadsim_core::config::ActionParams;
use loadsim_core::sim::{Flag, LoadingRecord};

/// A printed row of the published best-loadings table.
pub struct PublishedRow {
    pub soil: &'static str,
    /// One of "efficiency", "productivity", "pareto", "mass".
    pub mark: &'static str,
    pub alpha: [f64; 8],
    /// t
    pub m_load: f64,
    /// s
    pub t_load: f64,
    /// %
    pub s_load: f64,
    /// kg/s
    pub p_p: f64,
    /// kg/kJ
    pub p_e: f64,
}

const fn row(
    soil: &'static str,
    mark: &'static str,
    alpha: [f64; 8],
    m_load: f64,
    t_load: f64,
    s_load: f64,
    p_p: f64,
    p_e: f64,
) -> PublishedRow {
    PublishedRow { soil, mark, alpha, m_load, t_load, s_load, p_p, p_e }
}

pub const PUBLISHED: [PublishedRow; 12] = [
    row("gravel", "efficiency", [0.6, 0.2, 0.0, 1.2, 0.4, 0.2, -30.0, 45.0], 3.40, 24.5, 1.5, 139.0, 11.27),
    row("gravel", "productivity", [0.8, 0.4, 0.0, 0.9, 0.6, 1.0, -30.0, 30.0], 2.15, 10.3, 2.0, 207.0, 9.82),
    row("gravel", "pareto", [0.6, 0.4, 0.0, 1.2, 0.4, 0.6, -30.0, 30.0], 2.51, 12.3, 0.3, 203.0, 10.68),
    row("gravel", "mass", [0.6, 0.4, 0.3, 1.2, 0.8, 0.2, -30.0, 45.0], 3.41, 25.1, 2.4, 136.0, 10.53),
    row("dirt", "efficiency", [0.6, 0.2, 0.0, 0.9, 0.8, 1.0, -30.0, 30.0], 2.81, 11.7, 0.8, 240.0, 11.80),
    row("dirt", "productivity", [0.8, 0.6, 0.9, 1.2, 0.2, 1.0, -40.0, 30.0], 2.92, 11.3, 0.0, 257.0, 11.13),
    row("dirt", "pareto", [0.8, 0.4, 0.3, 0.9, 0.2, 0.8, -30.0, 30.0], 2.76, 11.2, 1.3, 245.0, 11.14),
    row("dirt", "mass", [0.6, 0.4, 0.3, 1.2, 0.6, 0.2, -30.0, 45.0], 4.12, 32.7, 1.5, 126.0, 9.09),
    row("sand", "efficiency", [0.8, 0.2, 0.0, 0.9, 1.0, 1.0, -40.0, 30.0], 2.43, 10.5, 1.8, 232.0, 12.16),
    row("sand", "productivity", [0.8, 0.6, 0.6, 0.3, 0.2, 0.8, -40.0, 45.0], 2.98, 11.6, 3.6, 257.0, 11.48),
    row("sand", "pareto", [0.8, 0.4, 0.0, 0.6, 1.0, 1.0, -30.0, 45.0], 2.80, 11.2, 4.9, 248.0, 11.83),
    row("sand", "mass", [0.8, 0.4, 0.0, 1.2, 0.6, 0.2, -30.0, 45.0], 3.65, 25.5, 5.5, 143.0, 10.12),
];

/// The published row as a synthetic record; its run id is the mark.
pub fn published_record(r: &PublishedRow) -> LoadingRecord {
    let m = r.m_load * 1000.0;
    LoadingRecord {
        run_id: r.mark.to_string(),
        pile: format!("{}-30", r.soil),
        soil: r.soil.to_string(),
        slope_deg: 30.0,
        action: ActionParams::from_f64(r.alpha).unwrap(),
        m_load: m,
        t_load: r.t_load,
        work: m / r.p_e,
        s_load: r.s_load,
        p_e: r.p_e,
        p_p: r.p_p,
        p_b: m / 4200.0,
        flag: Flag::Completed,
    }
}

/// Pairwise-dominance oracle: indices of points no other point dominates.
pub fn brute_force_front(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().any(|q| {
                let p = points[i];
                q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 || q.1 > p.1)
            })
        })
        .collect()
}
