//! File formats, session storage, the HTTP service and the command-line
//! front end around [`vitalcam_core`].

pub mod config;
pub mod corpus;
mod error;
pub mod evaluate;
pub mod formats;
pub mod pipeline;
pub mod service;
pub mod storage;
pub mod video;

pub use error::{Error, Result};
