//! Signature container, line-oriented records and the batch command line.

pub mod cli;
pub mod records;
pub mod signature;

pub use records::{read_lexicon, write_lexicon, ProfileRecord, SignSpecRecord};
pub use signature::{read_signature, write_signature, FormatError, SignatureFile, SignatureHeader};
