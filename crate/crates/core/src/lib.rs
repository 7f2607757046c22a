pub mod audit;
pub mod connector;
pub mod dense_core;
pub mod expander;
pub mod forest;
pub mod graph;
pub mod greedy;
pub mod group;
pub mod io;
pub mod mop;
pub mod oracle;
pub mod params;
pub mod rearrange;
pub mod rng;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/mops.md")]
    mod mops {}
    #[doc = include_str!("../../../book/src/rearrangements.md")]
    mod rearrangements {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
