/// Stress level inferred from heart rate, in increasing severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StressLabel {
    /// Heart rate missing or invalid.
    Unknown,
    Relaxed,
    Normal,
    Low,
    Medium,
    High,
    VeryHigh,
    Extreme,
}

impl StressLabel {
    pub const ALL: [StressLabel; 8] = [
        StressLabel::Unknown,
        StressLabel::Relaxed,
        StressLabel::Normal,
        StressLabel::Low,
        StressLabel::Medium,
        StressLabel::High,
        StressLabel::VeryHigh,
        StressLabel::Extreme,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StressLabel::Unknown => "unknown",
            StressLabel::Relaxed => "relaxed",
            StressLabel::Normal => "normal",
            StressLabel::Low => "low",
            StressLabel::Medium => "medium",
            StressLabel::High => "high",
            StressLabel::VeryHigh => "very_high",
            StressLabel::Extreme => "extreme",
        }
    }
}

impl core::str::FromStr for StressLabel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|l| l.as_str() == s).ok_or(crate::Error::InvalidInput("unknown stress label"))
    }
}

impl core::fmt::Display for StressLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Half-open heart-rate bands in bpm. The published ranges overlap at 75 and
/// leave 83-84 open; the lower bound of each band wins.
const BANDS: [(f64, StressLabel); 6] = [
    (67.0, StressLabel::Relaxed),
    (76.0, StressLabel::Normal),
    (84.0, StressLabel::Low),
    (92.0, StressLabel::Medium),
    (101.0, StressLabel::High),
    (110.0, StressLabel::VeryHigh),
];

pub fn classify_stress(hr_bpm: f64) -> StressLabel {
    if !(hr_bpm.is_finite() && hr_bpm >= 0.0) {
        return StressLabel::Unknown;
    }
    BANDS.iter().find(|(upper, _)| hr_bpm < *upper).map_or(StressLabel::Extreme, |&(_, label)| label)
}
