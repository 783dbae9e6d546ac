//! Experiment runner for the largest-part limit laws of multiplicative
//! partition measures.

pub mod experiments;
pub mod report;

use std::str::FromStr;

use gibbs_partitions::asymptotics::{rescaling_for, rescaling_gas, rescaling_power, rescaling_plane};
use gibbs_partitions::{Error, Rescaling, Weights};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 2 for bad input, 3 for exhausted caps and budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_resource() => 3,
            HarnessError::Core(Error::Io(_)) => 1,
            HarnessError::Core(_) | HarnessError::Invalid(_) => 2,
            HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::Invalid(msg.into())
}

/// Which shift `A(x)` to compare against.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RescalingChoice {
    /// The rescaling matching the weight family.
    Auto,
    Power { c: f64, beta: f64 },
    Gas { d: u32 },
    Plane,
}

impl FromStr for RescalingChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "auto" => return Ok(Self::Auto),
            "plane" => return Ok(Self::Plane),
            _ => {}
        }
        let (head, args) = s.split_once(':').ok_or_else(|| invalid(format!("unknown rescaling {s:?}")))?;
        let mut c = None;
        let mut beta = None;
        let mut d = None;
        for kv in args.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| invalid(format!("expected key=value in {kv:?}")))?;
            let bad = || invalid(format!("bad value {v:?} for {k}"));
            match k.trim() {
                "c" => c = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                "beta" => beta = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                "d" => d = Some(v.trim().parse::<u32>().map_err(|_| bad())?),
                other => return Err(invalid(format!("unknown rescaling parameter {other}"))),
            }
        }
        match head {
            "power" => Ok(Self::Power {
                c: c.ok_or_else(|| invalid("power rescaling needs c"))?,
                beta: beta.ok_or_else(|| invalid("power rescaling needs beta"))?,
            }),
            "gas" => Ok(Self::Gas { d: d.ok_or_else(|| invalid("gas rescaling needs d"))? }),
            _ => Err(invalid(format!("unknown rescaling {head:?}"))),
        }
    }
}

impl RescalingChoice {
    pub fn at(&self, weights: &Weights, x: f64) -> Result<Rescaling> {
        Ok(match self {
            Self::Auto => rescaling_for(weights, x)?,
            Self::Power { c, beta } => rescaling_power(*c, *beta, x)?,
            Self::Gas { d } => rescaling_gas(*d, x)?,
            Self::Plane => rescaling_plane(x)?,
        })
    }
}

/// `"j1..j2"` → `x_j = 1 - 10^{-j}` for `j = j1..=j2`.
pub fn parse_x_grid(s: &str) -> Result<Vec<f64>> {
    let (a, b) = s.split_once("..").ok_or_else(|| invalid(format!("x grid must look like 1..5, got {s:?}")))?;
    let a: u32 = a.trim().parse().map_err(|_| invalid(format!("bad grid start {a:?}")))?;
    let b: u32 = b.trim().parse().map_err(|_| invalid(format!("bad grid end {b:?}")))?;
    if a == 0 || b < a || b > 15 {
        return Err(invalid(format!("x grid exponents must satisfy 1 ≤ j1 ≤ j2 ≤ 15, got {a}..{b}")));
    }
    Ok((a..=b).map(|j| 1.0 - 10f64.powi(-(j as i32))).collect())
}

/// `"lo:hi:n"` → `n` equally spaced points on `[lo, hi]`.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(invalid(format!("t grid must look like -4:8:241, got {s:?}")));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| invalid(format!("bad t grid start {lo:?}")))?;
    let hi: f64 = hi.trim().parse().map_err(|_| invalid(format!("bad t grid end {hi:?}")))?;
    let n: usize = n.trim().parse().map_err(|_| invalid(format!("bad t grid size {n:?}")))?;
    if n < 2 || !(lo < hi) {
        return Err(invalid("t grid needs lo < hi and at least two points"));
    }
    Ok(uniform_grid(lo, hi, n))
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Default thresholds: 241 points on `[-4, 8]`.
pub fn default_t_grid() -> Vec<f64> {
    uniform_grid(-4.0, 8.0, 241)
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|_| invalid(format!("bad list entry {p:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let x = parse_x_grid("1..3").unwrap();
        assert_eq!(x.len(), 3);
        assert!((x[2] - 0.999).abs() < 1e-15);
        assert!(parse_x_grid("0..3").is_err());
        let t = default_t_grid();
        assert_eq!(t.len(), 241);
        assert_eq!((t[0], t[240]), (-4.0, 8.0));
        assert!((t[1] - t[0] - 0.05).abs() < 1e-12);
        assert_eq!(parse_t_grid("-4:8:241").unwrap(), t);
        assert!(parse_t_grid("1:0:5").is_err());
        assert_eq!(parse_list::<u64>("10, 15,20").unwrap(), vec![10, 15, 20]);
    }

    #[test]
    fn rescaling_choices() {
        assert_eq!("auto".parse::<RescalingChoice>().unwrap(), RescalingChoice::Auto);
        assert_eq!("gas:d=3".parse::<RescalingChoice>().unwrap(), RescalingChoice::Gas { d: 3 });
        assert_eq!(
            "power:c=1,beta=1".parse::<RescalingChoice>().unwrap(),
            RescalingChoice::Power { c: 1.0, beta: 1.0 }
        );
        assert!("gas:c=1".parse::<RescalingChoice>().is_err());
        let w = Weights::lattice(3).unwrap();
        assert_eq!(RescalingChoice::Auto.at(&w, 0.9).unwrap(), rescaling_gas(3, 0.9).unwrap());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Core(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(HarnessError::Core(Error::Budget("x".into())).exit_code(), 3);
        assert_eq!(HarnessError::Core(Error::Resource("x".into())).exit_code(), 3);
        assert_eq!(invalid("x").exit_code(), 2);
    }
}
