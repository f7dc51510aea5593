use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Dynamical regime of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    /// Quasi-periodic response (closed invariant curve).
    Dqtc,
    /// Single attracting fixed point.
    Stationary,
    /// Period-k subharmonic response.
    Dtc(u32),
    Chaotic,
    Unresolved,
}

impl PhaseLabel {
    /// Coarse family, ignoring the DTC period.
    pub fn family(self) -> &'static str {
        match self {
            PhaseLabel::Dqtc => "DQTC",
            PhaseLabel::Stationary => "stationary",
            PhaseLabel::Dtc(_) => "DTC",
            PhaseLabel::Chaotic => "chaotic",
            PhaseLabel::Unresolved => "unresolved",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseLabel::Dtc(k) => write!(f, "DTC({k})"),
            other => f.write_str(other.family()),
        }
    }
}

impl FromStr for PhaseLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "DQTC" => Ok(PhaseLabel::Dqtc),
            "stationary" => Ok(PhaseLabel::Stationary),
            "chaotic" => Ok(PhaseLabel::Chaotic),
            "unresolved" => Ok(PhaseLabel::Unresolved),
            _ => s
                .strip_prefix("DTC(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(PhaseLabel::Dtc)
                .ok_or_else(|| format!("unknown phase label `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for l in [
            PhaseLabel::Dqtc,
            PhaseLabel::Stationary,
            PhaseLabel::Dtc(2),
            PhaseLabel::Dtc(4),
            PhaseLabel::Chaotic,
            PhaseLabel::Unresolved,
        ] {
            assert_eq!(l.to_string().parse::<PhaseLabel>().unwrap(), l);
        }
        assert!("DTC(x)".parse::<PhaseLabel>().is_err());
    }
}
