pub mod graphcheck;
pub mod io;
pub mod lp;
pub mod network;
pub mod oracles;
pub mod rational;
pub mod reductions;
pub mod solvers;
