pub mod fit;
pub mod pushtest;
pub mod replay;
pub mod selftest;
pub mod simulate;
