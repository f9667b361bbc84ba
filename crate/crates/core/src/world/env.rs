use super::math::Vec3;
use super::model::ArmModel;
use super::profile::Profile;
use super::render::{render_scene, render_target_mask};
use super::style::StyleSpec;
use super::WorldError;
use crate::img::ImageTensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Actions per joint: {-MPI, -MPI/10, -MPI/100, 0, +MPI/100, +MPI/10, +MPI}.
pub const N_ACTIONS: usize = 7;
/// Index of the no-op action in the per-joint action set.
pub const NOOP_ACTION: usize = 3;

/// Signed integer multiple of the joint's MPI/100 quantum for each action
/// index. Keeping the multipliers integral makes the 100:10:1 magnitude
/// ratio exact by construction.
pub fn action_multiplier(action: usize) -> i64 {
    const MULTIPLIERS: [i64; N_ACTIONS] = [-100, -10, -1, 0, 1, 10, 100];
    MULTIPLIERS[action]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    pub joints: Vec<f64>,
    pub target_xy: (f64, f64),
    pub step_count: u32,
    pub done: bool,
    pub last_dist: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    pub success: bool,
    pub dist: f64,
}

/// Single-owner arm environment: one logical thread drives reset/step on an
/// instance; concurrent training uses one instance per worker.
#[derive(Debug, Clone)]
pub struct ArmEnv {
    model: ArmModel,
    state: EpisodeState,
    episode_seed: u64,
    /// Success threshold used by `step`; training and evaluation differ.
    success_dist: f64,
}

impl ArmEnv {
    pub fn new(profile: Profile) -> Result<Self, WorldError> {
        let model = ArmModel::new(profile)?;
        let n = model.n_joints();
        let success_dist = model.profile().mdp.success_dist_train;
        Ok(ArmEnv {
            model,
            state: EpisodeState {
                joints: vec![0.0; n],
                target_xy: (0.0, 0.0),
                step_count: 0,
                done: true,
                last_dist: f64::INFINITY,
            },
            episode_seed: 0,
            success_dist,
        })
    }

    pub fn from_name(name: &str) -> Result<Self, WorldError> {
        ArmEnv::new(Profile::load(name)?)
    }

    pub fn model(&self) -> &ArmModel {
        &self.model
    }

    pub fn profile(&self) -> &Profile {
        self.model.profile()
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn episode_seed(&self) -> u64 {
        self.episode_seed
    }

    /// Switch between the training (5 cm) and evaluation (10 cm) success
    /// thresholds.
    pub fn set_eval_threshold(&mut self, eval: bool) {
        let mdp = &self.model.profile().mdp;
        self.success_dist = if eval { mdp.success_dist_eval } else { mdp.success_dist_train };
    }

    pub fn success_dist(&self) -> f64 {
        self.success_dist
    }

    fn gripper(&self) -> Vec3 {
        self.model
            .forward_kinematics(&self.state.joints)
            .expect("episode joints stay in limits")
    }

    /// Center of the target cube (resting on the tabletop).
    pub fn target_center(&self) -> Vec3 {
        let prof = self.model.profile();
        Vec3::new(
            self.state.target_xy.0,
            self.state.target_xy.1,
            prof.workspace.target_z + prof.render.cube_side * 0.5,
        )
    }

    pub fn gripper_target_dist(&self) -> f64 {
        (self.gripper() - self.target_center()).norm()
    }

    /// Sample a target uniformly over the profile's rectangle, rejecting
    /// points outside the reach annulus.
    fn sample_target(model: &ArmModel, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let ws = &model.profile().workspace;
        loop {
            let x = rng.gen_range(ws.target_x_range[0]..=ws.target_x_range[1]);
            let y = rng.gen_range(ws.target_y_range[0]..=ws.target_y_range[1]);
            if ws.contains_target(x, y) {
                return (x, y);
            }
        }
    }

    /// Joints drawn uniformly within the central +/-15% band of each range.
    fn sample_initial_joints(model: &ArmModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        model
            .joint_limits()
            .iter()
            .map(|lim| {
                let mid = (lim[0] + lim[1]) * 0.5;
                let half_band = (lim[1] - lim[0]) * 0.15;
                rng.gen_range(mid - half_band..=mid + half_band)
            })
            .collect()
    }

    /// Reset episode state without rendering. Deterministic in `seed`.
    pub fn reset_state(&mut self, seed: u64) -> &EpisodeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.state.joints = Self::sample_initial_joints(&self.model, &mut rng);
        self.state.target_xy = Self::sample_target(&self.model, &mut rng);
        self.state.step_count = 0;
        self.state.done = false;
        self.episode_seed = seed;
        self.state.last_dist = self.gripper_target_dist();
        &self.state
    }

    /// Reset and return the default observation (virtual style, target
    /// included, profile observation resolution).
    pub fn reset(&mut self, seed: u64) -> ImageTensor {
        self.reset_state(seed);
        self.render(
            &StyleSpec::virtual_style(),
            self.model.profile().render.observation_resolution,
            true,
        )
    }

    /// Advance one step without rendering. Each joint moves by the selected
    /// member of its action set, clamped to limits; reward follows the
    /// squared-distance law with a fixed bonus on success.
    pub fn step_state(&mut self, actions: &[usize]) -> Result<StepOutcome, WorldError> {
        if self.state.done {
            return Err(WorldError::EpisodeDone);
        }
        if actions.len() != self.model.n_joints() {
            return Err(WorldError::JointCount {
                expected: self.model.n_joints(),
                got: actions.len(),
            });
        }
        for (j, (&a, q)) in actions.iter().zip(self.state.joints.iter_mut()).enumerate() {
            if a >= N_ACTIONS {
                return Err(WorldError::BadAction { joint: j, action: a });
            }
            *q += action_multiplier(a) as f64 * (self.model.mpi(j) / 100.0);
        }
        self.model.clamp_to_limits(&mut self.state.joints);
        self.state.step_count += 1;

        let dist = self.gripper_target_dist();
        self.state.last_dist = dist;
        let success = dist <= self.success_dist;
        let reward = if success {
            self.model.profile().mdp.success_reward
        } else {
            -(2.0 * dist) * (2.0 * dist)
        };
        let done = success || self.state.step_count >= self.model.profile().mdp.max_steps;
        self.state.done = done;
        Ok(StepOutcome { reward, done, success, dist })
    }

    /// Step and render the default observation.
    pub fn step(&mut self, actions: &[usize]) -> Result<(ImageTensor, StepOutcome), WorldError> {
        let outcome = self.step_state(actions)?;
        let obs = self.render(
            &StyleSpec::virtual_style(),
            self.model.profile().render.observation_resolution,
            true,
        );
        Ok((obs, outcome))
    }

    /// Render the current state. Noise (pseudo-real style) is seeded from
    /// the episode seed and step count, so replays are bit-identical.
    pub fn render(&self, style: &StyleSpec, resolution: usize, include_target: bool) -> ImageTensor {
        let target = include_target.then_some(self.state.target_xy);
        render_scene(
            &self.model,
            &self.state.joints,
            target,
            style,
            resolution,
            self.render_seed(),
        )
    }

    pub fn render_seed(&self) -> u64 {
        splitmix(self.episode_seed ^ 0x9e37_79b9_7f4a_7c15, self.state.step_count as u64)
    }

    /// Pixel mask of the target cube at the current state.
    pub fn target_mask(&self, resolution: usize) -> Vec<bool> {
        render_target_mask(&self.model, &self.state.joints, self.state.target_xy, resolution)
    }

    /// Draw `n` target-free renders at random in-limit poses in a fixed
    /// style, the corpus protocol for GAN training.
    pub fn sample_corpus(
        &mut self,
        n: usize,
        style: &StyleSpec,
        resolution: usize,
        seed: u64,
    ) -> Vec<ImageTensor> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let joints: Vec<f64> = self
                .model
                .joint_limits()
                .iter()
                .map(|lim| rng.gen_range(lim[0]..=lim[1]))
                .collect();
            out.push(render_scene(
                &self.model,
                &joints,
                None,
                style,
                resolution,
                splitmix(seed, i as u64),
            ));
        }
        out
    }
}

fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
