//! Runs every listing of the guide in `book/` as a doc-test. Each chapter is
//! its own module so a failure names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}
#[doc = include_str!("../../../book/src/inference.md")]
pub mod inference {}
#[doc = include_str!("../../../book/src/consistency.md")]
pub mod consistency {}
#[doc = include_str!("../../../book/src/tracing.md")]
pub mod tracing {}
#[doc = include_str!("../../../book/src/exports.md")]
pub mod exports {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}
