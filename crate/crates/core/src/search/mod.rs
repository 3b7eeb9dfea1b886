//! Best-first searches over a [`LatticeGraph`](crate::lattice::LatticeGraph).

mod arastar;
mod common;
mod dijkstra;
mod mhastar;
mod wastar;
mod wpase;

pub use arastar::{ara_star, AraOutcome, AraSchedule};
pub use common::{Key, PlanResult, SearchStats, TIME_CHECK_INTERVAL};
pub use dijkstra::{dijkstra, dijkstra_oracle, DEFAULT_ORACLE_CAP};
pub use mhastar::mha_star;
pub use wastar::weighted_astar;
pub use wpase::wpase;
