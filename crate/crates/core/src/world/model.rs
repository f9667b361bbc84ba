use super::math::{Mat4, Vec3};
use super::profile::Profile;
use super::WorldError;

/// Kinematic chain built from a profile's DH table.
#[derive(Debug, Clone)]
pub struct ArmModel {
    profile: Profile,
}

impl ArmModel {
    pub fn new(profile: Profile) -> Result<Self, WorldError> {
        profile.validate()?;
        Ok(ArmModel { profile })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn n_joints(&self) -> usize {
        self.profile.n_joints()
    }

    pub fn joint_limits(&self) -> &[[f64; 2]] {
        &self.profile.joint_limits
    }

    pub fn check_limits(&self, joints: &[f64]) -> Result<(), WorldError> {
        if joints.len() != self.n_joints() {
            return Err(WorldError::JointCount {
                expected: self.n_joints(),
                got: joints.len(),
            });
        }
        for (i, (&q, lim)) in joints.iter().zip(self.joint_limits()).enumerate() {
            if !q.is_finite() || q < lim[0] || q > lim[1] {
                return Err(WorldError::JointOutOfRange { joint: i, value: q });
            }
        }
        Ok(())
    }

    pub fn clamp_to_limits(&self, joints: &mut [f64]) {
        for (q, lim) in joints.iter_mut().zip(self.joint_limits()) {
            *q = q.clamp(lim[0], lim[1]);
        }
    }

    /// Maximum Position Increment for one joint: range * mpi_fraction.
    pub fn mpi(&self, joint: usize) -> f64 {
        let lim = self.profile.joint_limits[joint];
        (lim[1] - lim[0]) * self.profile.mdp.mpi_fraction
    }

    /// Origins of every joint frame plus the gripper, starting at the base.
    /// Consecutive pairs are the link segments the renderer draws.
    pub fn joint_positions(&self, joints: &[f64]) -> Result<Vec<Vec3>, WorldError> {
        self.check_limits(joints)?;
        let mut t = Mat4::identity();
        let mut out = Vec::with_capacity(self.n_joints() + 1);
        out.push(t.origin());
        for (row, &q) in self.profile.dh.iter().zip(joints) {
            t = t.mul(&Mat4::dh(q + row.theta_offset, row.d, row.a, row.alpha));
            out.push(t.origin());
        }
        Ok(out)
    }

    /// Gripper (end-effector frame origin) position.
    pub fn forward_kinematics(&self, joints: &[f64]) -> Result<Vec3, WorldError> {
        Ok(*self.joint_positions(joints)?.last().unwrap())
    }

    /// Upper bound on the gripper's horizontal distance from the base axis:
    /// the sum of all translational offsets after the base column.
    pub fn max_planar_reach(&self) -> f64 {
        let mut total = 0.0;
        for (i, row) in self.profile.dh.iter().enumerate() {
            total += row.a.abs();
            if i > 0 {
                total += row.d.abs();
            }
        }
        total
    }
}
