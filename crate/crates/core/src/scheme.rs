use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Multiple-access scheme of a distributed TDR campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Subchirp allocation over the modified DFnT.
    Ocdm,
    /// HS-OFDM, one modem per symbol, round robin.
    Tdma,
    /// HS-OFDM, interleaved subcarrier combs with cyclic hopping.
    Fdma,
    /// HS-OFDM, Walsh-Hadamard symbol spreading.
    Cdma,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ocdm, Scheme::Tdma, Scheme::Fdma, Scheme::Cdma];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ocdm => "ocdm",
            Scheme::Tdma => "tdma",
            Scheme::Fdma => "fdma",
            Scheme::Cdma => "cdma",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown scheme `{s}`"))
    }
}
