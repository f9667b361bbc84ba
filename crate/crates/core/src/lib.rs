//! Sim-to-real visual domain adaptation pipeline.
//!
//! The library is organized around six subsystems:
//!
//! - [`nn`] — a small f64 tensor/layer toolkit with hand-written backward
//!   passes, shared by the GAN and the agent.
//! - [`world`] — a kinematic arm environment with a software renderer that
//!   produces two visual styles (clean virtual and perturbed pseudo-real).
//! - [`sicgan`] — the style-identified cycle-consistent GAN: generators,
//!   patch discriminators, losses, training loop and model selection.
//! - [`a3c`] — an asynchronous advantage actor-critic agent over image
//!   observations with discrete per-joint action heads.
//! - [`bridge`] — the observation pipeline gluing the GAN to the agent
//!   (translate-then-composite for training, raw pseudo-real for zero-shot).
//! - [`evalkit`] — accuracy, histogram/Wasserstein comparisons, workspace
//!   sweeps, heatmaps and trajectory export.

pub mod a3c;
pub mod bridge;
pub mod evalkit;
pub mod img;
pub mod nn;
pub mod sicgan;
pub mod world;
