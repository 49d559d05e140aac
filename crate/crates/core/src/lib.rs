pub mod assembly;
pub mod bench;
pub mod boundary;
pub mod cli;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
