//! Object recognition from sequences of n-finger grasps.
//!
//! A grasp (contact points, optionally with contact normals) is mapped to a
//! frame-invariant parameter vector through the convex hull of its contacts.
//! Classifiers trained on vectors sampled from object meshes then identify a
//! held object by accumulating evidence over several grasps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod grasp;
pub mod hull;
pub mod mesh;
pub mod param;
pub mod recognition;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
