//! Exact-arithmetic toolkit for parameter arrays of Leonard systems.
//!
//! Everything is computed over an exact field ([`field::Field`]): the
//! rationals, a prime field or a small extension of one. There are no
//! tolerances anywhere; every identity check is an equality test.

#![allow(clippy::needless_range_loop)]

pub mod check;
pub mod classify;
pub mod exec;
pub mod families;
pub mod field;
pub mod hypergeom;
pub mod matrix;
pub mod ortho;
pub mod parray;
pub mod polys;
pub mod recur;
pub mod scoreboard;
pub mod splitmat;

pub use field::{Elem, Field, FieldError, FieldSpec};
pub use matrix::SquareMatrix;
pub use parray::{validate, ParameterArray, ValidationReport};
