//! Measurement outcome labels and acceptance sets for post-selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GtpError, Result};

/// Most channels an engine run will handle; joint outcomes fit in a u64 mask.
pub const MAX_CHANNELS: usize = 3;

/// The four generalized Bell outcomes of one two-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    #[serde(rename = "Phi+")]
    PhiPlus,
    #[serde(rename = "Phi-")]
    PhiMinus,
    #[serde(rename = "Psi+")]
    PsiPlus,
    #[serde(rename = "Psi-")]
    PsiMinus,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::PhiPlus,
        OutcomeKind::PhiMinus,
        OutcomeKind::PsiPlus,
        OutcomeKind::PsiMinus,
    ];

    pub fn index(self) -> usize {
        match self {
            OutcomeKind::PhiPlus => 0,
            OutcomeKind::PhiMinus => 1,
            OutcomeKind::PsiPlus => 2,
            OutcomeKind::PsiMinus => 3,
        }
    }

    pub fn from_index(index: usize) -> Option<OutcomeKind> {
        OutcomeKind::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::PhiPlus => "Phi+",
            OutcomeKind::PhiMinus => "Phi-",
            OutcomeKind::PsiPlus => "Psi+",
            OutcomeKind::PsiMinus => "Psi-",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for OutcomeKind {
    type Err = GtpError;

    fn from_str(s: &str) -> Result<Self> {
        OutcomeKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| GtpError::UnknownOutcomeLabel(s.to_string()))
    }
}

/// One outcome per channel, e.g. "Phi+,Psi-" for two channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointOutcome {
    kinds: Vec<OutcomeKind>,
}

impl JointOutcome {
    pub fn new(kinds: Vec<OutcomeKind>) -> Result<Self> {
        if kinds.is_empty() || kinds.len() > MAX_CHANNELS {
            return Err(GtpError::UnsupportedChannelCount(kinds.len()));
        }
        Ok(Self { kinds })
    }

    pub fn single(kind: OutcomeKind) -> Self {
        Self { kinds: vec![kind] }
    }

    /// Inverse of [`JointOutcome::index`]: base-4 digits, channel 1 first.
    pub fn from_index(num_channels: usize, index: usize) -> Result<Self> {
        if num_channels == 0 || num_channels > MAX_CHANNELS {
            return Err(GtpError::UnsupportedChannelCount(num_channels));
        }
        let mut kinds = vec![OutcomeKind::PhiPlus; num_channels];
        let mut rest = index;
        for slot in kinds.iter_mut().rev() {
            *slot = OutcomeKind::from_index(rest & 3).expect("two bits");
            rest >>= 2;
        }
        if rest != 0 {
            return Err(GtpError::InvalidConfig(format!(
                "joint outcome index {index} out of range for {num_channels} channels"
            )));
        }
        Ok(Self { kinds })
    }

    /// Position in the canonical enumeration of all 4^N joint outcomes.
    pub fn index(&self) -> usize {
        self.kinds.iter().fold(0, |acc, k| (acc << 2) | k.index())
    }

    pub fn num_channels(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[OutcomeKind] {
        &self.kinds
    }
}

impl fmt::Display for JointOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in &self.kinds {
            if !first {
                f.write_str(",")?;
            }
            f.write_str(k.label())?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for JointOutcome {
    type Err = GtpError;

    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split(',')
            .map(|part| part.trim().parse::<OutcomeKind>())
            .collect::<Result<Vec<_>>>()?;
        JointOutcome::new(kinds)
    }
}

impl Serialize for JointOutcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for JointOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Non-empty set of joint outcomes kept after post-selection, stored as a
/// bitmask over the 4^N canonical indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptanceSet {
    num_channels: usize,
    mask: u64,
}

impl AcceptanceSet {
    /// Keep every joint outcome.
    pub fn all(num_channels: usize) -> Result<Self> {
        let count = Self::outcome_count(num_channels)?;
        let mask = if count == 64 { u64::MAX } else { (1u64 << count) - 1 };
        Ok(Self { num_channels, mask })
    }

    /// Keep only outcomes built entirely from Phi- and Psi+ components, the
    /// branches whose transfer blocks stay proportional to a unitary when the
    /// measurement basis matches the channel. There are 2^N of them.
    pub fn pqt(num_channels: usize) -> Result<Self> {
        Self::outcome_count(num_channels)?;
        let mut mask = 0u64;
        for combo in 0..1usize << num_channels {
            let mut index = 0usize;
            for ch in 0..num_channels {
                let kind = if combo >> (num_channels - 1 - ch) & 1 == 0 {
                    OutcomeKind::PhiMinus
                } else {
                    OutcomeKind::PsiPlus
                };
                index = (index << 2) | kind.index();
            }
            mask |= 1 << index;
        }
        Ok(Self { num_channels, mask })
    }

    /// Explicit set of joint outcomes; must be non-empty and single-width.
    pub fn from_outcomes(num_channels: usize, outcomes: &[JointOutcome]) -> Result<Self> {
        Self::outcome_count(num_channels)?;
        if outcomes.is_empty() {
            return Err(GtpError::EmptyAcceptance);
        }
        let mut mask = 0u64;
        for outcome in outcomes {
            if outcome.num_channels() != num_channels {
                return Err(GtpError::ChannelCountMismatch {
                    left: outcome.num_channels(),
                    right: num_channels,
                });
            }
            mask |= 1 << outcome.index();
        }
        Ok(Self { num_channels, mask })
    }

    /// Single-channel convenience constructor.
    pub fn from_kinds(kinds: &[OutcomeKind]) -> Result<Self> {
        let outcomes: Vec<JointOutcome> = kinds.iter().map(|&k| JointOutcome::single(k)).collect();
        Self::from_outcomes(1, &outcomes)
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, outcome: &JointOutcome) -> bool {
        outcome.num_channels() == self.num_channels && self.mask >> outcome.index() & 1 == 1
    }

    pub fn contains_index(&self, index: usize) -> bool {
        index < Self::outcome_count(self.num_channels).expect("validated at construction")
            && self.mask >> index & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = JointOutcome> + '_ {
        let n = self.num_channels;
        (0..Self::outcome_count(n).expect("validated at construction"))
            .filter(|&i| self.mask >> i & 1 == 1)
            .map(move |i| JointOutcome::from_index(n, i).expect("index in range"))
    }

    fn outcome_count(num_channels: usize) -> Result<usize> {
        if num_channels == 0 || num_channels > MAX_CHANNELS {
            return Err(GtpError::UnsupportedChannelCount(num_channels));
        }
        Ok(1 << (2 * num_channels))
    }
}
