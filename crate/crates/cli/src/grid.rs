use crate::error::{CliError, Result};

/// Endpoint tolerance of `start:stop:step` grids.
pub const GRID_TOL: f64 = 1e-12;
pub const MAX_GRID_POINTS: usize = 1_000_000;

fn number(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::validation(key, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::validation(key, format!("`{s}` is not finite")));
    }
    Ok(v)
}

/// Parses `start:stop:step` (both endpoints included when the last step
/// lands within [`GRID_TOL`] of `stop`), or a comma-separated list.
pub fn parse_grid(key: &str, spec: &str) -> Result<Vec<f64>> {
    if !spec.contains(':') {
        let values = spec
            .split(',')
            .map(|s| number(key, s))
            .collect::<Result<Vec<_>>>()?;
        return Ok(values);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(CliError::validation(key, format!("`{spec}` is not start:stop:step")));
    };
    let (start, stop, step) = (number(key, start)?, number(key, stop)?, number(key, step)?);
    if step <= 0.0 {
        return Err(CliError::validation(key, "grid step must be positive"));
    }
    if stop < start - GRID_TOL {
        return Err(CliError::validation(key, "grid stop is below its start"));
    }
    let span = ((stop - start) / step).max(0.0);
    if span >= MAX_GRID_POINTS as f64 {
        return Err(CliError::validation(
            key,
            format!("grid has more than {MAX_GRID_POINTS} points"),
        ));
    }
    let rounded = span.round();
    let (last, exact_end) = if (start + rounded * step - stop).abs() <= GRID_TOL {
        (rounded as usize, true)
    } else {
        (span.floor() as usize, false)
    };
    let mut values: Vec<f64> = (0..=last).map(|i| start + i as f64 * step).collect();
    if exact_end {
        values[last] = stop;
    }
    Ok(values)
}
