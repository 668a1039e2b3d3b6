pub mod geometry;
pub mod medium;
pub mod stencil;
pub mod forward;
pub mod optical;
pub mod resolvent;
pub mod indicator;
pub mod cli;
