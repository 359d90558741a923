//! Quadratic nonconvex reformulation (QNR) toolkit.
//!
//! The crate builds McCormick relaxations of nonconvex quadratic programs,
//! selects reformulation parameters by solving SDP+RLT-type conic programs,
//! and compares plain and reformulated models inside a spatial
//! branch-and-bound solver. Everything here is `no_std` with `alloc`; file
//! formats, the CLI and wall-clock timing live in the companion kit crate.
#![no_std]

extern crate alloc;

pub mod bnb;
pub mod error;
pub mod generators;
pub mod instance;
pub mod linalg;
pub mod lp;
pub mod mccormick;
pub mod reformulate;
pub mod sdp;

pub use error::{Error, Result};
pub use instance::{
    classify_convexity, ConvexityTag, LinearEquality, ProblemKind, QcqpInstance, QuadFunc, Sense,
};
pub use linalg::Matrix;
