//! Guide chapters, compiled as documentation so their snippets run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}

#[doc = include_str!("../../../book/src/stepping.md")]
pub mod stepping {}

#[doc = include_str!("../../../book/src/monitors.md")]
pub mod monitors {}

#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("../../../book/src/besov.md")]
pub mod besov {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
