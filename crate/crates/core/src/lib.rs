#![allow(clippy::needless_range_loop)]

pub mod facial;
pub mod fixtures;
pub mod hinf;
pub mod ipm;
pub mod mpla;
pub mod sdpmodel;
pub mod sensitivity;
