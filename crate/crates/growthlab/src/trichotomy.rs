//! The growth dichotomy table: element growth against characteristic
//! polynomial growth, with an empirical row label.
//!
//! Labels are suffixed "-like" deliberately: a finite enumeration measures
//! growth behavior, it does not decide nilpotency or solvability.

use growthlab_core::{
    classify_growth, count_series, enumerate_ball, CountKind, GrowthClass, GrowthSeries,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genset_file::{load_genset, GensetError};

#[derive(Debug, Error)]
pub enum TrichotomyError {
    #[error(transparent)]
    Genset(#[from] GensetError),
    #[error("enumeration failed: {0}")]
    Cayley(#[from] growthlab_core::cayley::CayleyError),
    #[error("classification failed: {0}")]
    Growth(#[from] growthlab_core::growth::GrowthError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrichotomyRow {
    pub gens_file: String,
    pub gens_digest: String,
    pub requested_radius: usize,
    pub complete_radius: usize,
    /// True when the element budget stopped enumeration short of the
    /// requested radius; the classes then describe the enumerated prefix.
    pub partial: bool,
    pub element_class: GrowthClass,
    pub charpoly_class: GrowthClass,
    /// "v. nilpotent-like", "v. solvable-like", or "not v. solvable-like".
    pub label: String,
    pub element_series: GrowthSeries,
    pub charpoly_series: GrowthSeries,
}

/// Row label from the two growth classes: subexponential element growth
/// reads as nilpotent-like; exponential element growth splits on whether
/// the characteristic-polynomial count also grows exponentially.
pub fn empirical_label(element: &GrowthClass, charpoly: &GrowthClass) -> &'static str {
    let exponential = |class: &GrowthClass| matches!(class, GrowthClass::Exponential { .. });
    match (exponential(element), exponential(charpoly)) {
        (false, _) => "v. nilpotent-like",
        (true, false) => "v. solvable-like",
        (true, true) => "not v. solvable-like",
    }
}

/// Enumerates the ball to `n_max` (or as far as `budget` allows), classifies
/// both series, and labels the row.
pub fn trichotomy_report(
    gens_file: &str,
    n_max: usize,
    budget: u64,
) -> Result<TrichotomyRow, TrichotomyError> {
    let gens = load_genset(gens_file)?;
    let ball = enumerate_ball(&gens, n_max, budget)?;
    let element_series = count_series(&ball, CountKind::Element);
    let charpoly_series = count_series(&ball, CountKind::CharPoly);
    let element_class = classify_growth(&element_series)?;
    let charpoly_class = classify_growth(&charpoly_series)?;
    let label = empirical_label(&element_class, &charpoly_class).to_string();
    Ok(TrichotomyRow {
        gens_file: gens_file.to_string(),
        gens_digest: gens.short_digest(),
        requested_radius: n_max,
        complete_radius: ball.last_radius(),
        partial: !ball.is_complete(),
        element_class,
        charpoly_class,
        label,
        element_series,
        charpoly_series,
    })
}
