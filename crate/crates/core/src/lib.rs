//! Statistical traffic model for cloud-rendered XR video, with trace
//! analysis and calibration, a fragment-burst wire format and a shared-link
//! simulator.

pub mod analysis;
pub mod burst;
pub mod logistic;
pub mod model;
pub mod netsim;
pub mod profile;
pub mod rng;
pub mod trace;
pub mod units;
