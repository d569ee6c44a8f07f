pub mod driver;
pub mod filter;
pub mod linalg;
pub mod model;
pub mod mps;
pub mod oracle;
pub mod par;
pub mod variants;
pub use num_complex::Complex64 as C64;
