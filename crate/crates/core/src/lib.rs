//! Max-min fair resource faucets for block-by-block chains.
//!
//! Three allocation schemes share one vocabulary:
//!
//! * [`cmf`]: the conventional, authority-driven distribution over two
//!   alternating min-heaps, run once per epoch in a single transaction.
//! * [`faucet`]: the autonomous scheme where users demand in one epoch and
//!   claim their share in the claim rounds of the next. The unweighted (AMF)
//!   and weighted (WAMF) variants differ only in their [`faucet::WeightPolicy`].
//! * [`oracle`]: an independent integer water-filling reference used to check
//!   both of the above.
//!
//! [`sim`] drives any of the schemes through a deterministic instant-seal block
//! schedule and prices every transaction with an abstract [`meter::CostModel`].
//!
//! The algorithm modules are generic over the unsigned integer type used for
//! resource amounts (see [`num::Amount`]); the aliases below fix it to `u64`,
//! which is what the simulator and the file formats use.

pub mod clock;
pub mod cmf;
pub mod faucet;
pub mod heap;
pub mod meter;
pub mod num;
pub mod oracle;
pub mod sim;
pub mod verify;

mod user;

pub use clock::{ClockError, ClockParams, ClockPosition};
pub use meter::{CostModel, OpCounts};
pub use num::Amount;
pub use user::UserId;

/// Resource amounts as used by the simulator, scenario files and CSV outputs.
pub type Units = u64;

/// Array-backed min-heap over `u64` demands.
pub type Heap = heap::MinHeap<Units>;
/// Conventional max-min distributor over `u64` amounts.
pub type Cmf = cmf::CmfState<Units>;
/// Autonomous (weighted or unweighted) faucet over `u64` amounts.
pub type Faucet = faucet::FaucetState<Units>;
/// Water-filling problem over `u64` amounts.
pub type Problem = oracle::AllocationProblem<Units>;
