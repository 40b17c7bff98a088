//! Non-degenerate solutions of the genus-zero universal Whitham hierarchy.
//!
//! Series arithmetic lives in [`laurent`], quadrature on circles in
//! [`contour`], the period map, vector fields, potentials and inversion in
//! [`hierarchy`], and the named identity checks in [`verify`].

pub mod config;
pub mod contour;
pub mod hierarchy;
pub mod laurent;
pub mod verify;

pub use laurent::{Chart, Laurent, LaurentError, C64};
