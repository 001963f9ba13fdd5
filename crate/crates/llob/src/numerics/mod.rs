//! Shared numerical building blocks.

pub mod linalg;
pub mod quad;
pub mod roots;
pub mod special;
