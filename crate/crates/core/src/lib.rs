pub mod algebroid;
pub mod bisection;
pub mod error;
pub mod expr;
pub mod flow;
pub mod gauge_extension;
pub mod groupoid;
pub mod io;
pub mod local_addition;
pub mod manifolds;
pub mod numerics;

pub use error::{Error, Result};

// The book's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groupoids.md")]
    mod groupoids {}
    #[doc = include_str!("../../../book/src/bisections.md")]
    mod bisections {}
    #[doc = include_str!("../../../book/src/local-additions.md")]
    mod local_additions {}
    #[doc = include_str!("../../../book/src/brackets.md")]
    mod brackets {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/gauge-extension.md")]
    mod gauge_extension {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
