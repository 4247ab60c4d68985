//! Double scales `U ▷ F`, strong-bundle retractions and section classes.
//!
//! A point of an extracted scale `(U ▷ F)^{[i]}` is the concatenation of a
//! base vector and a fiber vector.

mod index;
mod section;
mod strong;
mod trivial;

pub use index::{validate_double_index, DoubleScaleIndex};
pub use section::{classify_section, GainRow, SectionClass, SectionConfig, SectionReport};
pub use strong::{
    check_strong_retraction, splicing_strong_retraction, ExtractedRetraction, FiberFamily,
    StrongBundleRetraction, StrongRetractionReport, StrongSampleRow,
};
pub use trivial::{extract_shifted_bundle, ExtractedBundle, TrivialStrongBundle};
