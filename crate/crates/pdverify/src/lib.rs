pub mod lagrangian;
pub mod lra;
pub mod sexp;
pub mod ts;
pub mod cegar;
pub mod ice;
pub mod houdini;
pub mod termination;
pub mod qlra;
pub mod fixpoint;
pub mod cli;
