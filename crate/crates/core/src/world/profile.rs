//! Robot profiles: kinematic tables, workspace geometry, camera pose and
//! render appearance, loaded from JSON so new profiles need no code changes.

use super::WorldError;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One Denavit-Hartenberg row (meters / radians).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DhRow {
    /// Link length along x.
    pub a: f64,
    /// Link twist about x.
    pub alpha: f64,
    /// Link offset along z.
    pub d: f64,
    /// Constant joint-angle offset added to the commanded angle.
    pub theta_offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkspaceSpec {
    pub target_x_range: [f64; 2],
    pub target_y_range: [f64; 2],
    /// (inner, outer) radii of the reachable annulus around the base.
    pub reach_annulus: [f64; 2],
    /// Tabletop height targets rest on.
    pub target_z: f64,
}

impl WorkspaceSpec {
    pub fn validate(&self) -> Result<(), WorldError> {
        if self.target_x_range[0] >= self.target_x_range[1]
            || self.target_y_range[0] >= self.target_y_range[1]
        {
            return Err(WorldError::BadProfile("degenerate target range".into()));
        }
        if self.reach_annulus[0] >= self.reach_annulus[1] {
            return Err(WorldError::BadProfile("annulus inner must be < outer".into()));
        }
        Ok(())
    }

    /// Target region: the configured rectangle clipped to the reach annulus.
    pub fn contains_target(&self, x: f64, y: f64) -> bool {
        let r = (x * x + y * y).sqrt();
        x >= self.target_x_range[0]
            && x <= self.target_x_range[1]
            && y >= self.target_y_range[0]
            && y <= self.target_y_range[1]
            && r >= self.reach_annulus[0]
            && r <= self.reach_annulus[1]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: [f64; 3],
    /// Rotation of the viewing direction about the world z axis.
    pub yaw: f64,
    /// Downward tilt from the horizontal about the camera's lateral axis.
    pub tilt: f64,
    pub fov_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpConfig {
    pub success_dist_train: f64,
    pub success_dist_eval: f64,
    pub success_reward: f64,
    /// MPI = joint range * mpi_fraction.
    pub mpi_fraction: f64,
    pub max_steps: u32,
}

impl Default for MdpConfig {
    fn default() -> Self {
        MdpConfig {
            success_dist_train: 0.05,
            success_dist_eval: 0.10,
            success_reward: 70.0,
            mpi_fraction: 0.015,
            max_steps: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderAppearance {
    pub link_radius: f64,
    pub cube_side: f64,
    pub base_radius: f64,
    pub base_height: f64,
    pub arm_color: [f64; 3],
    pub gripper_color: [f64; 3],
    pub target_color: [f64; 3],
    pub ground_color: [f64; 3],
    pub sky_color: [f64; 3],
    /// Default agent-facing observation resolution.
    pub observation_resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub dh: Vec<DhRow>,
    pub joint_limits: Vec<[f64; 2]>,
    pub workspace: WorkspaceSpec,
    pub camera: CameraSpec,
    #[serde(default)]
    pub mdp: MdpConfig,
    pub render: RenderAppearance,
}

impl Profile {
    pub fn n_joints(&self) -> usize {
        self.dh.len()
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.dh.is_empty() {
            return Err(WorldError::BadProfile("empty DH table".into()));
        }
        if self.dh.len() != self.joint_limits.len() {
            return Err(WorldError::BadProfile(format!(
                "{} DH rows but {} joint limits",
                self.dh.len(),
                self.joint_limits.len()
            )));
        }
        for (i, lim) in self.joint_limits.iter().enumerate() {
            if !(lim[0] < lim[1]) {
                return Err(WorldError::BadProfile(format!(
                    "joint {i}: min {} must be < max {}",
                    lim[0], lim[1]
                )));
            }
        }
        if self.mdp.success_dist_train >= self.mdp.success_dist_eval {
            return Err(WorldError::BadProfile(
                "training success distance must be stricter than evaluation".into(),
            ));
        }
        self.workspace.validate()
    }

    pub fn from_json(json: &str) -> Result<Profile, WorldError> {
        let p: Profile =
            serde_json::from_str(json).map_err(|e| WorldError::BadProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Profile, WorldError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| WorldError::BadProfile(format!("{}: {e}", path.display())))?;
        Profile::from_json(&text)
    }

    /// Look up one of the built-in profiles by name, otherwise treat the
    /// name as a path to a profile JSON file.
    pub fn load(name: &str) -> Result<Profile, WorldError> {
        match name {
            "irb120_like" => Profile::from_json(IRB120_LIKE_JSON),
            "ur3e_like" => Profile::from_json(UR3E_LIKE_JSON),
            "planar2dof_desk" => Profile::from_json(PLANAR2DOF_DESK_JSON),
            other => Profile::from_file(Path::new(other)),
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["irb120_like", "ur3e_like", "planar2dof_desk"]
    }
}

pub const IRB120_LIKE_JSON: &str = include_str!("../../profiles/irb120_like.json");
pub const UR3E_LIKE_JSON: &str = include_str!("../../profiles/ur3e_like.json");
pub const PLANAR2DOF_DESK_JSON: &str = include_str!("../../profiles/planar2dof_desk.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles_validate() {
        for name in Profile::builtin_names() {
            let p = Profile::load(name).unwrap();
            assert_eq!(&p.name, name);
        }
    }

    #[test]
    fn degenerate_joint_range_rejected() {
        let mut p = Profile::load("planar2dof_desk").unwrap();
        p.joint_limits[0] = [1.0, 1.0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn irb120_target_rect_matches_workspace() {
        let p = Profile::load("irb120_like").unwrap();
        assert_eq!(p.workspace.target_x_range, [0.2, 0.4]);
        assert_eq!(p.workspace.target_y_range, [-0.3, 0.3]);
    }

    #[test]
    fn ur3e_target_rect_matches_workspace() {
        let p = Profile::load("ur3e_like").unwrap();
        assert_eq!(p.workspace.target_x_range, [-0.5, 0.5]);
        assert_eq!(p.workspace.target_y_range, [-0.5, 0.0]);
    }
}
