//! Builders that turn automata and group descriptions into transformer nets.

pub mod assemble;
pub mod cascade;
pub mod counter;
pub mod dispatch;
pub mod gridworld;
pub mod groupsim;
pub mod log_depth;
pub mod memory;
pub mod perm_reset;
pub mod products;
pub mod report;
pub mod solvable;

pub use counter::{compile_mod_counter, counter_report};
pub use groupsim::{group_automaton_net, GroupSim};
pub use report::{BoundCheck, CompileReport};
pub use products::{combine_direct_product, combine_semidirect, combine_wreath, combine_wreath_embedded, product_report, SimSize};
pub use solvable::{compile_group_automaton, compile_solvable_group, solvable_report};
pub use log_depth::compile_log_depth;
pub use memory::compile_memory;
pub use perm_reset::compile_permutation_reset;
pub use cascade::compile_cascade;
pub use gridworld::{compile_gridworld, gridworld_final_state, gridworld_moves, gridworld_trajectory, GridworldTrace};
pub use dispatch::{compile, Construction};
