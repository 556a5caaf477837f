pub mod cli;
pub mod delaunay;
pub mod domain;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod nonlin;
pub mod parabolic;
pub mod radial;
pub mod report;
pub mod special;
pub mod spikes;

pub use error::{Error, Result};
