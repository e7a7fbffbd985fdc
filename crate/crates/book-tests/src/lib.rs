//! Keeps the guide honest: every Rust code fence in `book/src/*.md` is
//! compiled and run by `cargo test --doc` through the `#[doc = include_str!]`
//! modules below. mdbook renders the same files, so the book and the tests
//! cannot drift apart. One module per chapter makes a failing fence easy to
//! locate.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/thermal-noise.md")]
pub mod thermal_noise {}

#[doc = include_str!("../../../book/src/wired-loop.md")]
pub mod wired_loop {}

#[doc = include_str!("../../../book/src/listening.md")]
pub mod listening {}

#[doc = include_str!("../../../book/src/wireless.md")]
pub mod wireless {}

#[doc = include_str!("../../../book/src/distilling.md")]
pub mod distilling {}

#[doc = include_str!("../../../book/src/errors-and-sampling.md")]
pub mod errors_and_sampling {}

#[doc = include_str!("../../../book/src/power-bill.md")]
pub mod power_bill {}

#[doc = include_str!("../../../book/src/lab-bench.md")]
pub mod lab_bench {}
