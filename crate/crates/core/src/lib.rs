pub mod algebra;
pub mod corpus;
pub mod error;
pub mod fp_linalg;
pub mod kisin;
pub mod mixedchar;
pub mod ramification;
pub mod solver;

pub use error::{Error, Result};
pub use kisin::{KisinModule, SmithData};
