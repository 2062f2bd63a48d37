//! Exact computations with finite algebra groups `G = 1 + A`.
//!
//! The crate enumerates irreducible characters of algebra groups over finite
//! fields through the reduction to strongly Heisenberg representations,
//! realizes the norm maps `N_{k'/k}: (1+A')^ab → (1+A)^ab` as Dieudonné
//! determinants over the unital hull `k ⊕ A`, builds the base change maps on
//! irreducible characters, and checks the expected properties of all of
//! these exhaustively on a catalog of small nilpotent algebras.

pub mod error;
pub mod gf;
pub mod linalg;
pub mod nilalg;
pub mod algrp;
pub mod cyclo;
pub mod k1norm;
pub mod heis;
pub mod irred;
pub mod report;
pub mod catalog;
pub mod cli;

pub use error::{Error, Result};
