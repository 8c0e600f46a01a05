use std::fmt;
use std::str::FromStr;

use crate::error::AnalysisError;
use crate::sim::LoadingRecord;

/// A numeric column of the results table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    MLoad,
    TLoad,
    Work,
    SLoad,
    Pe,
    Pp,
    Pb,
    Slope,
    /// 1-based α index.
    Alpha(usize),
}

impl Field {
    pub fn value(self, r: &LoadingRecord) -> f64 {
        match self {
            Field::MLoad => r.m_load,
            Field::TLoad => r.t_load,
            Field::Work => r.work,
            Field::SLoad => r.s_load,
            Field::Pe => r.p_e,
            Field::Pp => r.p_p,
            Field::Pb => r.p_b,
            Field::Slope => r.slope_deg,
            Field::Alpha(i) => r.action.alpha[i - 1].to_f64(),
        }
    }

    /// Column name in the results CSV.
    pub fn column(self) -> String {
        match self {
            Field::MLoad => "m_load_kg".into(),
            Field::TLoad => "t_load_s".into(),
            Field::Work => "W_kJ".into(),
            Field::SLoad => "s_load_pct".into(),
            Field::Pe => "P_e_kg_per_kJ".into(),
            Field::Pp => "P_p_kg_per_s".into(),
            Field::Pb => "P_b".into(),
            Field::Slope => "slope_deg".into(),
            Field::Alpha(7) => "alpha7_deg".into(),
            Field::Alpha(8) => "alpha8_deg".into(),
            Field::Alpha(i) => format!("alpha{i}"),
        }
    }

    /// Default plotting range.
    pub fn default_bins(self) -> BinSpec {
        let (lo, hi, count) = match self {
            Field::MLoad => (0.0, 5000.0, 50),
            Field::TLoad => (0.0, 40.0, 40),
            Field::Work => (0.0, 1500.0, 50),
            Field::SLoad => (0.0, 10.0, 50),
            Field::Pe => (0.0, 20.0, 40),
            Field::Pp => (0.0, 800.0, 40),
            Field::Pb => (0.0, 1.2, 24),
            Field::Slope => (0.0, 50.0, 5),
            Field::Alpha(7) => (-40.0, -10.0, 30),
            Field::Alpha(8) => (10.0, 50.0, 40),
            Field::Alpha(_) => (0.0, 1.2, 24),
        };
        BinSpec { lo, hi, count }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.column())
    }
}

impl FromStr for Field {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "mass" | "m_load" | "m_load_kg" => Field::MLoad,
            "time" | "t_load" | "t_load_s" => Field::TLoad,
            "work" | "W" | "W_kJ" => Field::Work,
            "spill" | "spillage" | "s_load" | "s_load_pct" => Field::SLoad,
            "efficiency" | "P_e" | "P_e_kg_per_kJ" => Field::Pe,
            "productivity" | "P_p" | "P_p_kg_per_s" => Field::Pp,
            "fill" | "P_b" => Field::Pb,
            "slope" | "slope_deg" => Field::Slope,
            other => {
                let index = other
                    .strip_prefix("alpha")
                    .map(|rest| rest.trim_end_matches("_deg"))
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|n| (1..=8).contains(n));
                match index {
                    Some(i) => Field::Alpha(i),
                    None => return Err(AnalysisError::UnknownField(other.to_string())),
                }
            }
        })
    }
}

/// `count` equal-width bins over `[lo, hi]`; values outside land in the end bins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl BinSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.count == 0 {
            return Err(AnalysisError::InvalidBins("bin count must be at least 1".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo) {
            return Err(AnalysisError::InvalidBins(format!("range [{}, {}] is empty", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.count as f64;
        (0..=self.count).map(|i| self.lo + i as f64 * w).collect()
    }

    pub fn index(&self, value: f64) -> usize {
        let u = (value - self.lo) / (self.hi - self.lo) * self.count as f64;
        if u.is_nan() || u < 0.0 {
            0
        } else {
            (u.floor() as usize).min(self.count - 1)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram2d {
    pub x_field: Field,
    pub y_field: Field,
    pub x_bins: BinSpec,
    pub y_bins: BinSpec,
    /// `counts[ix][iy]`
    pub counts: Vec<Vec<u64>>,
}

impl Histogram2d {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Long format: `x_lo,x_hi,y_lo,y_hi,count`.
    pub fn to_csv(&self) -> String {
        let (xe, ye) = (self.x_bins.edges(), self.y_bins.edges());
        let mut out = format!(
            "{x}_lo,{x}_hi,{y}_lo,{y}_hi,count\n",
            x = self.x_field.column(),
            y = self.y_field.column()
        );
        for (ix, col) in self.counts.iter().enumerate() {
            for (iy, c) in col.iter().enumerate() {
                out.push_str(&format!("{},{},{},{},{c}\n", xe[ix], xe[ix + 1], ye[iy], ye[iy + 1]));
            }
        }
        out
    }
}

/// Joint counts of two fields over fixed bins. Every record is counted once.
pub fn histogram2d<'a>(
    records: impl IntoIterator<Item = &'a LoadingRecord>,
    x_field: Field,
    y_field: Field,
    x_bins: BinSpec,
    y_bins: BinSpec,
) -> Result<Histogram2d, AnalysisError> {
    x_bins.validate()?;
    y_bins.validate()?;
    let mut counts = vec![vec![0u64; y_bins.count]; x_bins.count];
    for r in records {
        counts[x_bins.index(x_field.value(r))][y_bins.index(y_field.value(r))] += 1;
    }
    Ok(Histogram2d {
        x_field,
        y_field,
        x_bins,
        y_bins,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::tests::rec;

    #[test]
    fn field_names_parse() {
        assert_eq!("mass".parse::<Field>().unwrap(), Field::MLoad);
        assert_eq!("P_p_kg_per_s".parse::<Field>().unwrap(), Field::Pp);
        assert_eq!("alpha7_deg".parse::<Field>().unwrap(), Field::Alpha(7));
        assert_eq!("alpha2".parse::<Field>().unwrap(), Field::Alpha(2));
        assert!("alpha9".parse::<Field>().is_err());
        assert!("speed".parse::<Field>().is_err());
        for f in [Field::MLoad, Field::TLoad, Field::Pe, Field::Alpha(3), Field::Alpha(8)] {
            assert_eq!(f.column().parse::<Field>().unwrap(), f);
        }
    }

    #[test]
    fn single_record_fills_one_bin() {
        let r = rec("1", "gravel-30", 2500.0, 100.0, 5.0);
        let h = histogram2d([&r], Field::MLoad, Field::TLoad, Field::MLoad.default_bins(), Field::TLoad.default_bins())
            .unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts.iter().flatten().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.counts[25][25], 1);
    }

    #[test]
    fn out_of_range_values_clamp_to_end_bins() {
        let b = BinSpec { lo: 0.0, hi: 10.0, count: 5 };
        assert_eq!(b.index(-3.0), 0);
        assert_eq!(b.index(10.0), 4);
        assert_eq!(b.index(1e9), 4);
        assert_eq!(b.index(f64::NAN), 0);
        assert_eq!(b.index(3.999), 1);
    }

    #[test]
    fn invalid_bins_rejected() {
        assert!(BinSpec { lo: 0.0, hi: 1.0, count: 0 }.validate().is_err());
        assert!(BinSpec { lo: 1.0, hi: 1.0, count: 3 }.validate().is_err());
        assert!(BinSpec { lo: 0.0, hi: f64::INFINITY, count: 3 }.validate().is_err());
    }

    #[test]
    fn uniform_grid_is_flat() {
        // one record at each bin centre of a 10×4 grid
        let mut recs = Vec::new();
        for i in 0..10 {
            for j in 0..4 {
                recs.push(rec("x", "gravel-30", 250.0 + 500.0 * i as f64, 0.0, 0.0));
                recs.last_mut().unwrap().t_load = 5.0 + 10.0 * j as f64;
            }
        }
        let xb = BinSpec { lo: 0.0, hi: 5000.0, count: 10 };
        let yb = BinSpec { lo: 0.0, hi: 40.0, count: 4 };
        let h = histogram2d(&recs, Field::MLoad, Field::TLoad, xb, yb).unwrap();
        assert!(h.counts.iter().flatten().all(|&c| c == 1));
        assert_eq!(h.to_csv().lines().count(), 41);
    }
}
