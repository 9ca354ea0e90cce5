//! Monotonic clock that also works in the browser, where the standard
//! library's `Instant` panics.

#[cfg(not(target_arch = "wasm32"))]
pub(crate) use std::time::Instant;
#[cfg(target_arch = "wasm32")]
pub(crate) use web_time::Instant;
