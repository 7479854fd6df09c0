//! The chapters of the user guide in `book/src`, compiled as documentation so
//! that every Rust sample in them runs under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lattices.md")]
pub mod lattices {}

#[doc = include_str!("../../../book/src/calculus.md")]
pub mod calculus {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/bulk.md")]
pub mod bulk {}

#[doc = include_str!("../../../book/src/interfaces.md")]
pub mod interfaces {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}
