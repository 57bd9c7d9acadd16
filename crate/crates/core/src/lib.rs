//! Color (categorical) range reporting in one dimension.
//!
//! Every stored element is an integer coordinate with a color; a query
//! `[a, b]` returns the distinct colors of the elements inside the range,
//! each once. The crate provides:
//!
//! - [`StaticIndex`]: linear space, reporting cost proportional to the
//!   answer size once an element of the range has been located.
//! - [`DynIndex`]: the same query bound with insertions and deletions, built
//!   on a weight-balanced B-tree ([`wb`]) and narrow-stripe three-sided
//!   structures ([`stripe`]).
//! - [`SlowIndex`]: a doubly-exponential range tree with cheap updates and
//!   `k`-leftmost / `k`-rightmost color selection.
//! - [`em::EmIndex`]: a static index laid out over a simulated block store,
//!   reporting with `O(1 + k/B)` block reads and no post-hoc dedup.
//!
//! All indexes meter their work in a [`CostMeter`] so output-sensitivity can
//! be checked empirically. The [`oracle`] module holds brute-force answers.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! ```
//! use colorrange::{normalize_input, ColorIndex, StaticIndex};
//!
//! let (points, colors) = normalize_input([(1, "red"), (3, "blue"), (5, "red"), (7, "green")])?;
//! let index = StaticIndex::build(&points)?;
//! let mut found: Vec<&str> = index
//!     .query(2, 7)?
//!     .into_iter()
//!     .map(|c| *colors.label(c).unwrap())
//!     .collect();
//! found.sort();
//! assert_eq!(found, ["blue", "green", "red"]);
//! # Ok::<(), colorrange::Error>(())
//! ```

#![no_std]

extern crate alloc;

pub mod dyn_index;
pub mod em;
pub mod error;
pub mod input;
pub mod oracle;
pub mod pst;
pub mod slow;
pub mod static_index;
pub mod stripe;
pub mod types;
pub mod wb;

mod index;

pub use dyn_index::{DynConfig, DynIndex, DynPath};
pub use em::{EmIndex, EmPath};
pub use error::{Error, Result};
pub use index::{ColorIndex, DynamicColorIndex};
pub use input::{compute_prev, normalize_input};
pub use oracle::{oracle_k_leftmost, oracle_k_rightmost, oracle_report};
pub use pst::{Pst, PstPoint};
pub use slow::SlowIndex;
pub use static_index::{QueryPath, StaticIndex};
pub use stripe::Stripe;
pub use types::{
    ColArray, Color, ColorRemap, ColoredPoint, CostMeter, PredLink, QueryScratch, Range, NO_PREV,
};
