//! Doc-tests for the book.
//!
//! Each chapter of `book/src` is included verbatim as the documentation
//! of an empty module, so `cargo test --doc -p guide-tests` compiles and
//! runs every fenced Rust block in the guide against the current
//! `parcop` API. A chapter edit that breaks an example breaks the build.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/transform.md")]
pub mod transform {}

#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}

#[doc = include_str!("../../../book/src/permutation.md")]
pub mod permutation {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
