//! Distinct-value growth series over word balls, and their classification.
//!
//! For a ball `B(0) ⊆ B(1) ⊆ …` the series counts, per radius, the distinct
//! elements, distinct traces, or distinct characteristic polynomials. Rates
//! are least-squares slopes of `log count` against the radius; the classifier
//! separates bounded, polynomial, and exponential series by comparing a
//! log-linear against a log-log fit on the tail half of the series, with a
//! tail-ratio fallback when neither model is a clearly better fit.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::BallLevels;
use crate::charpoly::charpoly;
use crate::{CharPoly, Rational};

/// Last levels that must agree for a series to count as bounded.
pub const BOUNDED_TAIL_LEN: usize = 4;
/// A model must beat the other's residual by this factor to win outright.
pub const MODEL_RESIDUAL_ADVANTAGE: f64 = 0.7;
/// Fallback: exponential iff `c(hi) / c(hi - EXP_TAIL_GAP)` reaches this.
pub const EXP_TAIL_RATIO: f64 = 1.5;
const EXP_TAIL_GAP: usize = 3;
/// Minimum number of levels the classifier needs.
pub const MIN_CLASSIFY_LEVELS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("classification needs at least {MIN_CLASSIFY_LEVELS} levels, got {got}")]
    TooFewLevels { got: usize },
    #[error("window [{lo}, {hi}] is outside the series radii [{first}, {last}]")]
    WindowOutOfRange { lo: usize, hi: usize, first: usize, last: usize },
    #[error("window [{lo}, {hi}] has fewer than 3 points")]
    WindowTooShort { lo: usize, hi: usize },
}

/// What a series counts per radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Element,
    Trace,
    CharPoly,
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CountKind::Element => "element",
            CountKind::Trace => "trace",
            CountKind::CharPoly => "charpoly",
        };
        write!(f, "{s}")
    }
}

/// Nondecreasing distinct-value counts, one per radius starting at
/// `first_radius` (zero for a freshly counted ball).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub kind: CountKind,
    pub first_radius: usize,
    pub counts: Vec<u64>,
    pub gens_digest: String,
}

impl GrowthSeries {
    pub fn last_radius(&self) -> usize {
        self.first_radius + self.counts.len() - 1
    }

    pub fn count_at(&self, radius: usize) -> Option<u64> {
        radius.checked_sub(self.first_radius).and_then(|i| self.counts.get(i)).copied()
    }

    /// The same series with the first `k` levels removed; radii keep their
    /// absolute meaning, so classification stays comparable.
    pub fn drop_first_levels(&self, k: usize) -> GrowthSeries {
        assert!(k < self.counts.len(), "cannot drop every level");
        GrowthSeries {
            kind: self.kind,
            first_radius: self.first_radius + k,
            counts: self.counts[k..].to_vec(),
            gens_digest: self.gens_digest.clone(),
        }
    }

    /// CSV rendering: `radius,count,kind,gens_digest`, one row per radius.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,count,kind,gens_digest\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.first_radius + i,
                c,
                self.kind,
                self.gens_digest
            ));
        }
        out
    }
}

/// Least-squares rate over a radius window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Slope of `ln count` per unit radius.
    pub slope: f64,
    /// Inclusive radius window the fit used.
    pub window: (usize, usize),
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Classifier verdict; exactly the payload matching the label is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "lowercase")]
pub enum GrowthClass {
    Bounded,
    Polynomial { degree_estimate: f64 },
    Exponential { rate: RateEstimate },
}

impl GrowthClass {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthClass::Bounded => "bounded",
            GrowthClass::Polynomial { .. } => "polynomial",
            GrowthClass::Exponential { .. } => "exponential",
        }
    }
}

/// Counts distinct values per radius over an enumerated ball.
///
/// Counts are cumulative and therefore nondecreasing; for
/// [`CountKind::Element`] this is exactly the ball's own size series.
pub fn count_series(ball: &BallLevels, kind: CountKind) -> GrowthSeries {
    let counts = match kind {
        CountKind::Element => ball.counts().to_vec(),
        CountKind::Trace => {
            let mut seen: HashSet<Rational> = HashSet::new();
            cumulative_counts(ball, |m, out: &mut Vec<u64>| {
                seen.insert(m.trace());
                out.push(seen.len() as u64);
            })
        }
        CountKind::CharPoly => {
            let mut seen: HashSet<CharPoly<Rational>> = HashSet::new();
            cumulative_counts(ball, |m, out: &mut Vec<u64>| {
                seen.insert(charpoly(&m));
                out.push(seen.len() as u64);
            })
        }
    };
    GrowthSeries { kind, first_radius: 0, counts, gens_digest: ball.gens_digest().to_string() }
}

fn cumulative_counts(
    ball: &BallLevels,
    mut absorb: impl FnMut(crate::RationalMatrix, &mut Vec<u64>),
) -> Vec<u64> {
    let mut counts = Vec::with_capacity(ball.last_radius() + 1);
    for n in 0..=ball.last_radius() {
        let mut latest = Vec::new();
        for key in ball.sphere_keys(n) {
            let m = crate::codec::decode_key(key).expect("ball keys decode by construction");
            absorb(m, &mut latest);
        }
        // `absorb` pushes a running total per element; the level's value is
        // the last one, or the previous level's count if the sphere is empty.
        let value = latest.last().copied().or_else(|| counts.last().copied()).unwrap_or(0);
        counts.push(value);
    }
    counts
}

/// Least-squares slope of `ln count` over the inclusive radius window.
pub fn estimate_rate(
    series: &GrowthSeries,
    window: (usize, usize),
) -> Result<RateEstimate, GrowthError> {
    let (lo, hi) = window;
    let first = series.first_radius;
    let last = series.last_radius();
    if lo < first || hi > last || lo > hi {
        return Err(GrowthError::WindowOutOfRange { lo, hi, first, last });
    }
    if hi - lo < 2 {
        return Err(GrowthError::WindowTooShort { lo, hi });
    }
    let xs: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let ys: Vec<f64> =
        (lo..=hi).map(|n| (series.count_at(n).expect("window checked") as f64).ln()).collect();
    let (slope, _, residual) = least_squares(&xs, &ys);
    Ok(RateEstimate { slope, window, residual })
}

/// Classifies a series as bounded, polynomial, or exponential.
///
/// Bounded means the last [`BOUNDED_TAIL_LEN`] counts agree. Otherwise both a
/// log-linear and a log-log model are fitted to the tail half of the series;
/// a model wins outright when its residual is below
/// [`MODEL_RESIDUAL_ADVANTAGE`] times the other's, and ties fall back to the
/// tail ratio test against [`EXP_TAIL_RATIO`].
pub fn classify_growth(series: &GrowthSeries) -> Result<GrowthClass, GrowthError> {
    let c = &series.counts;
    if c.len() < MIN_CLASSIFY_LEVELS {
        return Err(GrowthError::TooFewLevels { got: c.len() });
    }
    if c[c.len() - BOUNDED_TAIL_LEN..].windows(2).all(|w| w[0] == w[1]) {
        return Ok(GrowthClass::Bounded);
    }

    let start = c.len() / 2;
    let radii: Vec<f64> = (start..c.len()).map(|i| (series.first_radius + i) as f64).collect();
    let logs: Vec<f64> = (start..c.len()).map(|i| (c[i] as f64).ln()).collect();
    let (exp_slope, _, exp_res) = least_squares(&radii, &logs);

    // The log-log fit needs positive radii; radius zero can only appear in
    // the tail when the series is unrealistically short, but skip it anyway.
    let loglog: Vec<(f64, f64)> =
        radii.iter().zip(&logs).filter(|(r, _)| **r >= 1.0).map(|(r, l)| (r.ln(), *l)).collect();
    let lx: Vec<f64> = loglog.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = loglog.iter().map(|p| p.1).collect();
    let (poly_slope, _, poly_res) = least_squares(&lx, &ly);

    let window = (series.first_radius + start, series.last_radius());
    let exponential = || GrowthClass::Exponential {
        rate: RateEstimate { slope: exp_slope, window, residual: exp_res },
    };
    let polynomial = || GrowthClass::Polynomial { degree_estimate: poly_slope };

    if poly_res < MODEL_RESIDUAL_ADVANTAGE * exp_res {
        Ok(polynomial())
    } else if exp_res < MODEL_RESIDUAL_ADVANTAGE * poly_res {
        Ok(exponential())
    } else {
        let hi = c.len() - 1;
        let ratio = c[hi] as f64 / c[hi - EXP_TAIL_GAP] as f64;
        if ratio >= EXP_TAIL_RATIO {
            Ok(exponential())
        } else {
            Ok(polynomial())
        }
    }
}

/// Ordinary least squares for `y ≈ slope·x + intercept`; returns the RMS
/// residual alongside the line.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    assert!(xs.len() >= 2, "least squares needs at least two points");
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = mean_y - slope * mean_x;
    let mse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n;
    (slope, intercept, mse.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::enumerate_ball;
    use crate::cayley::fixtures::{shear_only, sl2_st, solvable_pair};

    fn synthetic(counts: Vec<u64>) -> GrowthSeries {
        GrowthSeries {
            kind: CountKind::Element,
            first_radius: 0,
            counts,
            gens_digest: "test".into(),
        }
    }

    #[test]
    fn shear_series_element_trace_charpoly() {
        let ball = enumerate_ball(&shear_only(), 8, 1000).unwrap();
        let elements = count_series(&ball, CountKind::Element);
        assert_eq!(elements.counts, vec![1, 3, 5, 7, 9, 11, 13, 15, 17]);
        // Every power of the shear has trace 2 and charpoly (X-1)².
        let traces = count_series(&ball, CountKind::Trace);
        assert_eq!(traces.counts, vec![1; 9]);
        let charpolys = count_series(&ball, CountKind::CharPoly);
        assert_eq!(charpolys.counts, vec![1; 9]);
    }

    #[test]
    fn solvable_pair_trace_count_is_linear() {
        let ball = enumerate_ball(&solvable_pair(), 6, 100_000).unwrap();
        let traces = count_series(&ball, CountKind::Trace);
        // Traces at radius n are 2^k + 2^{-k} for 0 ≤ k ≤ n.
        assert_eq!(traces.counts, vec![1, 2, 3, 4, 5, 6, 7]);
        // Determinants are all 1, so the charpoly is determined by the trace.
        let charpolys = count_series(&ball, CountKind::CharPoly);
        assert_eq!(charpolys.counts, traces.counts);
    }

    #[test]
    fn classify_synthetic_series() {
        let geometric = synthetic((0..=10).map(|n| 1u64 << n).collect());
        match classify_growth(&geometric).unwrap() {
            GrowthClass::Exponential { rate } => {
                assert!((rate.slope - std::f64::consts::LN_2).abs() < 1e-9);
                assert!(rate.residual < 1e-12);
            }
            other => panic!("expected exponential, got {other:?}"),
        }

        let quadratic = synthetic((0..=10).map(|n| (n + 1) * (n + 1)).collect());
        match classify_growth(&quadratic).unwrap() {
            GrowthClass::Polynomial { degree_estimate } => {
                assert!((1.5..=2.5).contains(&degree_estimate), "degree {degree_estimate}");
            }
            other => panic!("expected polynomial, got {other:?}"),
        }

        let bounded = synthetic(vec![1, 3, 4, 4, 4, 4, 4, 4]);
        assert_eq!(classify_growth(&bounded).unwrap(), GrowthClass::Bounded);
    }

    #[test]
    fn classify_needs_eight_levels() {
        let short = synthetic(vec![1, 2, 4, 8, 16, 32, 64]);
        assert_eq!(classify_growth(&short).unwrap_err(), GrowthError::TooFewLevels { got: 7 });
    }

    #[test]
    fn classify_fixture_series() {
        let shear = enumerate_ball(&shear_only(), 14, 10_000).unwrap();
        let elements = count_series(&shear, CountKind::Element);
        match classify_growth(&elements).unwrap() {
            GrowthClass::Polynomial { degree_estimate } => {
                assert!((0.7..=1.3).contains(&degree_estimate), "degree {degree_estimate}");
            }
            other => panic!("shear element series should be polynomial, got {other:?}"),
        }
        let charpolys = count_series(&shear, CountKind::CharPoly);
        assert_eq!(classify_growth(&charpolys).unwrap(), GrowthClass::Bounded);

        let sl2 = enumerate_ball(&sl2_st(), 10, 100_000).unwrap();
        let elements = count_series(&sl2, CountKind::Element);
        match classify_growth(&elements).unwrap() {
            GrowthClass::Exponential { rate } => assert!(rate.slope > 0.3, "slope {}", rate.slope),
            other => panic!("free-ish element series should be exponential, got {other:?}"),
        }
    }

    #[test]
    fn classification_ignores_the_first_levels() {
        let shear = enumerate_ball(&shear_only(), 14, 10_000).unwrap();
        let sl2 = enumerate_ball(&sl2_st(), 10, 100_000).unwrap();
        for series in [
            count_series(&shear, CountKind::Element),
            count_series(&shear, CountKind::CharPoly),
            count_series(&sl2, CountKind::Element),
        ] {
            let full = classify_growth(&series).unwrap();
            let dropped = classify_growth(&series.drop_first_levels(2)).unwrap();
            assert_eq!(full.label(), dropped.label());
        }
    }

    #[test]
    fn estimate_rate_windows_are_validated() {
        let series = synthetic((0..=10).map(|n| 1u64 << n).collect());
        assert!(matches!(
            estimate_rate(&series, (4, 20)),
            Err(GrowthError::WindowOutOfRange { .. })
        ));
        assert!(matches!(estimate_rate(&series, (4, 5)), Err(GrowthError::WindowTooShort { .. })));
        let rate = estimate_rate(&series, (2, 8)).unwrap();
        assert!((rate.slope - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn charpoly_rate_stays_below_element_rate() {
        let ball = enumerate_ball(&sl2_st(), 10, 100_000).unwrap();
        let element = estimate_rate(&count_series(&ball, CountKind::Element), (5, 10)).unwrap();
        let charpoly = estimate_rate(&count_series(&ball, CountKind::CharPoly), (5, 10)).unwrap();
        assert!(
            charpoly.slope <= element.slope + 0.05,
            "charpoly rate {} should not exceed element rate {} by more than 0.05",
            charpoly.slope,
            element.slope
        );
    }

    #[test]
    fn series_csv_has_one_row_per_radius() {
        let ball = enumerate_ball(&shear_only(), 3, 100).unwrap();
        let csv = count_series(&ball, CountKind::Element).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "radius,count,kind,gens_digest");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,1,element,"));
        assert!(lines[4].starts_with("3,7,element,"));
    }
}
