//! Coefficient arithmetic: finite fields, power series in `u` and Puiseux
//! series in fractional powers of `u`.

pub mod field;
pub mod fqpoly;
pub mod puiseux;
pub mod rational;
pub mod series;

pub use field::{Embedding, FFElem, Field};
pub use puiseux::PuiseuxSeries;
pub use rational::{q, qi, Prec, Q};
pub use series::{Mat, USeries};
