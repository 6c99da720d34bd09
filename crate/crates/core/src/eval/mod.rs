//! Turning a fitted projection into predictions, plus the generalization
//! bound and a least-squares reference classifier.

mod baseline;
mod bound;
mod classifier;

pub use baseline::least_squares_projection;
pub use bound::{rademacher_bound, BoundInputs, BoundReport};
pub use classifier::{accuracy, Classifier, Standardizer};
