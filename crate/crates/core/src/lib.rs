//! Forecasting and audit toolkit for project cost estimates.
//!
//! * [`reference_class`]: empirical overrun distributions (the outside view),
//!   P-level uplifts, S-curves and the upper-fence outlier rule.
//! * [`optimism_bias`]: published uplift schedules and mitigation adjustment.
//! * [`qra`]: risk registers, correlated Monte Carlo and an exact oracle.
//! * [`appraisal`] and [`audit`]: estimate composition and named audit rules.
//! * [`cli`]: the `riskcast` command-line surface and its report format.

pub mod appraisal;
pub mod audit;
pub mod cli;
pub mod error;
pub mod optimism_bias;
pub mod project;
pub mod qra;
pub mod quantile;
pub mod reference_class;

pub use error::{Error, Result};
pub use project::ProjectType;
