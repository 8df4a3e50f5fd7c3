//! Seven-sensor array: layout, per-channel pipeline, fusion and tilt
//! classification.

mod fusion;
mod layout;
mod pipeline;

pub use fusion::{
    fuse, inspection_box_check, ArrayMeasurement, FusionMode, FusionReport, InspectionVerdict, SensorGate,
    SensorOutcome,
};
pub use layout::{
    classify_tilt, ArrayLayout, SensorChannel, TiltHypothesis, TiltSignature, Zone, ZoneMap, DEFAULT_SPAN_MM,
    SENSOR_COUNT,
};
pub use pipeline::{
    fit_sensor, measure_and_fuse, measure_array, sensor_reflectance, PipelineConfig, ReferenceMode, SensorInput,
    DEFAULT_FIT_BAND_NM,
};
