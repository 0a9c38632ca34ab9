//! Query-driven fair division protocols.
//!
//! Every protocol talks to valuations only through a [`Probe`], so the same
//! code runs against in-memory oracles, adversaries, or a replay of
//! recorded answers (see [`machine`]).

pub mod baseline;
pub mod bounds;
pub mod contiguous;
pub mod envy_cycle;
pub mod identical_monotonic;
pub mod machine;
pub mod probe;
pub mod search;
pub mod size_dominant;
pub mod three_additive;
pub mod two_agent;

pub use baseline::full_elicitation;
pub use contiguous::{balanced_contiguous_split, separate_designated_goods, three_identical_contiguous_ef1, SplitResult};
pub use envy_cycle::{envy_cycle_batched, envy_cycle_elimination};
pub use identical_monotonic::{contiguous_identical_monotonic, LevelPartition};
pub use machine::{run_protocol, MachineStatus, ProtocolError, ProtocolId, ProtocolMachine, ProtocolOptions, ProtocolRun};
pub use probe::Probe;
pub use size_dominant::size_dominant_n2;
pub use three_additive::{three_additive_ef1, three_additive_traced, LargeGoodLedger};
pub use two_agent::two_agent_ef1;
