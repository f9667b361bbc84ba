//! Kinematic arm environment: profiles, forward kinematics, the reach MDP
//! and a two-style software renderer.

pub mod env;
pub mod math;
pub mod model;
pub mod profile;
pub mod render;
pub mod style;

pub use env::{action_multiplier, ArmEnv, EpisodeState, StepOutcome, N_ACTIONS, NOOP_ACTION};
pub use math::Vec3;
pub use model::ArmModel;
pub use profile::{CameraSpec, DhRow, MdpConfig, Profile, RenderAppearance, WorkspaceSpec};
pub use render::{render_scene, render_target_mask, target_colored_pixels};
pub use style::{StyleKind, StyleSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid profile: {0}")]
    BadProfile(String),
    #[error("joint {joint} value {value} outside limits")]
    JointOutOfRange { joint: usize, value: f64 },
    #[error("expected {expected} joints, got {got}")]
    JointCount { expected: usize, got: usize },
    #[error("action {action} for joint {joint} outside 0..7")]
    BadAction { joint: usize, action: usize },
    #[error("episode already done; reset before stepping")]
    EpisodeDone,
}
