//! Granularity change for categorical attributes of hierarchical (1:n)
//! relational data in binary decision problems.
//!
//! Child-table attributes are summarized into decision-grain features by one
//! of three transforms:
//!
//! - [`transforms::FittedTransform::Mode`]: the most frequent category, one-hot encoded.
//! - [`transforms::FittedTransform::Wgt`]: expert weights applied to the category
//!   relative frequencies.
//! - [`transforms::FittedTransform::Rgt`]: a logistic regression on the category
//!   histogram, fitted on an exclusive stratified sample that is discarded afterwards.
//!
//! The [`evaluation`] module runs the stratified k-fold comparison of the three
//! transforms with a logistic classifier, scoring each fold by
//! [`metrics::roc_auc`] and [`metrics::max_ks2`] and comparing approaches with
//! [`evaluation::paired_t_test`].
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the command-line
//! tool and fold-level parallelism live in the `grainflow` crate.
#![no_std]

extern crate alloc;

mod error;

pub mod evaluation;
pub mod histogram;
pub mod logistic;
pub mod metrics;
pub mod relational;
pub mod stats;
pub mod synthgen;
pub mod transforms;

pub use error::{Error, Result};
