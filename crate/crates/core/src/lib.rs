pub mod adapt;
pub mod app;
pub mod assembly;
pub mod bem;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod mesh;
pub mod parallel;
pub mod poly;
pub mod quadrature;
pub mod solve;
pub mod space;
