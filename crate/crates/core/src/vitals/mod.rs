//! Vital-sign estimators operating on a [`FrameTrace`](crate::roi::FrameTrace).

mod bp;
mod bvp;
mod hr;
mod hrv;
mod report;
mod rr;
mod spo2;
mod stress;

pub use bp::{
    estimate_bp, extract_bp_features, AffineBpModel, BpCalibration, BpEstimate, BpEstimator, BpFeatures, DBP_RANGE,
    DEFAULT_COEFFICIENTS, FEATURE_NAMES, MIN_BP_IBIS, SBP_RANGE,
};
pub use bvp::{extract_bvp, BvpSignal, ChannelMode, HR_BAND, MIN_BVP_SECONDS};
pub use hr::{estimate_hr, HrEstimate, MIN_PEAK_TO_MEDIAN};
pub use hrv::{
    compute_ibis, estimate_hrv, intervals_from_peak_times, IbiSequence, EDGE_GUARD_S, IBI_RANGE_MS, MAX_IBI_DEVIATION,
};
pub use report::{estimate_all, estimate_all_with, Reading, Validity, VitalsConfig, VitalsReport};
pub use rr::{estimate_rr, RrEstimate, MIN_RESPIRATORY_TO_CARDIAC, MIN_RR_SECONDS, RR_BAND};
pub use spo2::{
    compute_channel_components, estimate_spo2, ChannelComponents, SpO2Calibration, Spo2Estimate, SPO2_REPORT_RANGE,
};
pub use stress::{classify_stress, StressLabel};
