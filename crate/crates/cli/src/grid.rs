use std::str::FromStr;

use qmem_core::experiments::{lin_grid, log_grid};

const DEFAULT_POINTS: usize = 20;

/// A single value, a named default sweep, or an explicit range.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Values(Vec<f64>),
    /// The keyword `sweep`: the subcommand's default range.
    Default,
}

impl GridSpec {
    pub fn resolve(&self, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Default => default(),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    /// `value`, `sweep`, or `start:stop[:points][:lin|log]`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "sweep" {
            return Ok(GridSpec::Default);
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 1 {
            return Ok(GridSpec::Values(vec![num(parts[0])?]));
        }
        if parts.len() > 4 {
            return Err(format!("expected start:stop[:points][:lin|log], got `{s}`"));
        }
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let mut points = DEFAULT_POINTS;
        let mut log = false;
        for p in &parts[2..] {
            match *p {
                "lin" => log = false,
                "log" => log = true,
                n => {
                    points = n
                        .parse()
                        .map_err(|_| format!("`{n}` is neither a point count nor lin/log"))?;
                }
            }
        }
        if points < 1 {
            return Err("a sweep needs at least one point".into());
        }
        let grid = if log {
            log_grid(start, stop, points).map_err(|e| e.to_string())?
        } else {
            lin_grid(start, stop, points)
        };
        Ok(GridSpec::Values(grid))
    }
}
