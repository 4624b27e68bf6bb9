pub mod automaton;
pub mod cli;
pub mod decomposition;
pub mod executive;
pub mod ltl;
pub mod planner;
pub mod sim;
pub mod trace;
pub mod world;
