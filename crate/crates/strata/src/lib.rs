pub mod compress;
pub mod edge;
pub mod field;
pub mod lab;
pub mod linalg;
pub mod quiver;
pub mod real;
pub mod report;
pub mod support;
pub mod tensor;
