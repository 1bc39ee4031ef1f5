#![allow(dead_code)]

pub mod hermite;
pub mod oracle;
pub mod orders;
pub mod spectral;
pub mod step_check;
