pub mod benchmark;
pub mod gen;
pub mod optimize;
pub mod train;
