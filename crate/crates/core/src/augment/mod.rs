//! Corpus augmentation strategies.

pub mod mlm;
pub mod w2v;

use thiserror::Error;

use crate::corpus::Side;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} side augmentation is not supported")]
    UnsupportedSide(Side),
}
