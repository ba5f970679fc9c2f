//! Model builders producing [`CommutingSystem`](crate::model::CommutingSystem)s.

pub mod beam;
pub mod field;
pub mod nlw;
pub mod table;

pub use beam::{build_beam, torus_frequencies_beam, BeamConfig};
pub use nlw::{build_nlw, nlw_averaged_form, torus_frequencies_nlw, NlwConfig};
pub use table::{build_table, TableConfig};
