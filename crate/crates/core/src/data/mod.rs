//! Recording ingestion, segmentation, synthetic data, batch extraction and splits.

pub mod dataset;
pub mod io;
pub mod manifest;
pub mod segment;
pub mod split;
pub mod synth;

pub use dataset::{
    build_dataset, BuildOptions, Diagnostics, DroppedSegment, LabeledDataset, LabeledRecording,
    Method, Row,
};
pub use io::{load_recording, write_raw_f64le, Format};
pub use manifest::{Label, ManifestEntry, RecordingManifest};
pub use segment::{segment, segment_count, DEFAULT_SEGMENT_LEN};
pub use split::split;
pub use synth::{synth_generate, FaultClass, SynthConfig};
