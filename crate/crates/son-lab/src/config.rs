use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    Transfer,
    Rdm,
    Parent,
    Spt,
    Cpt,
    CliffordSelftest,
    ReprDims,
    All,
}

impl Campaign {
    pub const EACH: [Campaign; 7] = [
        Campaign::Transfer,
        Campaign::Rdm,
        Campaign::Parent,
        Campaign::Spt,
        Campaign::Cpt,
        Campaign::CliffordSelftest,
        Campaign::ReprDims,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::Transfer => "transfer",
            Campaign::Rdm => "rdm",
            Campaign::Parent => "parent",
            Campaign::Spt => "spt",
            Campaign::Cpt => "cpt",
            Campaign::CliffordSelftest => "clifford-selftest",
            Campaign::ReprDims => "repr-dims",
            Campaign::All => "all",
        }
    }

    /// The concrete campaigns this one expands to.
    pub fn expand(self) -> Vec<Campaign> {
        match self {
            Campaign::All => Self::EACH.to_vec(),
            c => vec![c],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[value(alias = "csv-tables")]
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative threshold below which a Hamiltonian eigenvalue counts as zero.
    pub kernel: f64,
    /// Agreement required between computed and predicted values.
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { kernel: son_core::hamiltonian::DEFAULT_KERNEL_TOL, matching: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest dimension handled with dense linear algebra.
    pub dense: usize,
    /// Largest chain dimension `n^ℓ` for sparse Hamiltonians and state vectors.
    pub sparse: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            dense: son_core::hamiltonian::DEFAULT_DENSE_CROSSOVER,
            sparse: son_core::hamiltonian::DEFAULT_SPARSE_CAP,
        }
    }
}

impl Caps {
    /// Entry budget for factored density matrices `n^ℓ × columns`.
    pub fn factor(&self) -> usize {
        self.sparse.saturating_mul(4)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign: Campaign,
    pub n_list: Vec<usize>,
    /// `None` selects each campaign's default lengths.
    pub l_list: Option<Vec<usize>>,
    pub tolerances: Tolerances,
    pub caps: Caps,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl CampaignConfig {
    pub fn new(campaign: Campaign, n_list: Vec<usize>) -> Self {
        Self {
            campaign,
            n_list,
            l_list: None,
            tolerances: Tolerances::default(),
            caps: Caps::default(),
            seed: 0,
            output: None,
            format: Format::Json,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if let Some(&n) = self.n_list.iter().find(|&&n| !(2..=son_core::clifford::MAX_RANK).contains(&n)) {
            return Err(LabError::Config(format!("rank {n} outside 2..={}", son_core::clifford::MAX_RANK)));
        }
        if let Some(ls) = &self.l_list {
            if ls.contains(&0) {
                return Err(LabError::Config("chain lengths must be positive".into()));
            }
        }
        for (name, t) in [("tol-kernel", self.tolerances.kernel), ("tol-match", self.tolerances.matching)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(LabError::Config(format!("--{name} must be a positive number, got {t}")));
            }
        }
        if self.caps.dense == 0 || self.caps.sparse == 0 {
            return Err(LabError::Config("caps must be positive".into()));
        }
        Ok(())
    }
}

/// Parses `3,4,6` and inclusive ranges such as `3-6`; the empty string is
/// the empty list.
pub fn parse_list(s: &str) -> Result<Vec<usize>, LabError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| LabError::Config(format!("cannot parse `{t}` in list `{s}`")))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(LabError::Config(format!("empty range `{part}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}
