//! Machine-operable GDPR transparency: transparency-information documents,
//! human-in-the-loop policy annotation, privacy labels, access-request
//! automation and local analysis of data-export archives.

pub mod annotation;
pub mod archive;
pub mod dsar;
pub mod score;
#[cfg(feature = "testing")]
pub mod testing;
pub mod tilt;
