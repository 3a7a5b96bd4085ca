//! Grid specification strings of the form `A..B x 10^C..D`, expanding to
//! the values { a * 10^b : a in A..=B, b in C..=D } in ascending order.
//!
//! The experiment defaults are `1..9 x 10^0..5` for the stability axes and
//! `1..5 x 10^0..4` for the timing concentrations.

use crate::error::{Error, Result};

/// Parse a grid spec into its numeric values, ascending.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::GridSpec(spec.to_string());
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let (mantissa_part, rest) = compact.split_once('x').ok_or_else(bad)?;
    let exponent_part = rest.strip_prefix("10^").ok_or_else(bad)?;
    let (a_min, a_max) = parse_range(mantissa_part).ok_or_else(bad)?;
    let (b_min, b_max) = parse_range(exponent_part).ok_or_else(bad)?;
    if !(1..=9).contains(&a_min) || !(1..=9).contains(&a_max) || a_min > a_max {
        return Err(bad());
    }
    if !(0..=15).contains(&b_min) || !(0..=15).contains(&b_max) || b_min > b_max {
        return Err(bad());
    }
    let mut values = Vec::new();
    for b in b_min..=b_max {
        for a in a_min..=a_max {
            values.push(a as f64 * 10f64.powi(b));
        }
    }
    Ok(values)
}

/// Parse a grid spec whose values are ambient dimensions.
pub fn parse_dimension_grid(spec: &str) -> Result<Vec<usize>> {
    Ok(parse_grid_spec(spec)?
        .into_iter()
        .map(|v| v as usize)
        .collect())
}

fn parse_range(s: &str) -> Option<(i32, i32)> {
    let (lo, hi) = s.split_once("..")?;
    Some((lo.parse().ok()?, hi.parse().ok()?))
}

/// Default stability grid axis: a in 1..9, b in 0..5 (54 values).
pub const STABILITY_GRID: &str = "1..9 x 10^0..5";
/// Default timing concentration grid: a in 1..5, b in 0..4 (25 values).
pub const TIMING_KAPPA_GRID: &str = "1..5 x 10^0..4";
