//! Channel borrowing between the cells of a seven-cell reuse cluster.
//!
//! The reference cell (cell 1) borrows idle channels from its six
//! neighbours, which keep a protected floor of channels for their own
//! users. The crate covers the channel bookkeeping, Erlang-B style
//! analysis, a discrete-event simulator, and the co-channel interference
//! picture that borrowing creates.

pub mod borrow;
pub mod cluster;
pub mod interference;
pub mod queuing;
pub mod rf;
pub mod sim;
pub mod scenario;
