//! Deterministic ray-cast renderer over a handful of analytic primitives:
//! ground plane, capsule links, joint spheres, the base pedestal and the
//! cube target. Nearest hit wins, Lambert shading, optional pseudo-real
//! perturbations applied as a post-process.

use super::math::Vec3;
use super::model::ArmModel;
use super::style::{hue_rotate, StyleSpec};
use crate::img::ImageTensor;
use crate::nn::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy)]
enum Primitive {
    Capsule { a: Vec3, b: Vec3, radius: f64 },
    Sphere { center: Vec3, radius: f64 },
    /// Axis-aligned box given by min/max corners.
    Box { min: Vec3, max: Vec3 },
}

#[derive(Debug, Clone, Copy)]
struct SceneObject {
    prim: Primitive,
    color: [f64; 3],
    /// Marks the target cube so a mask render can isolate it.
    is_target: bool,
}

struct Hit {
    t: f64,
    normal: Vec3,
    color: [f64; 3],
    is_target: bool,
}

fn ray_sphere(origin: Vec3, dir: Vec3, center: Vec3, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    if t > 1e-9 {
        Some(t)
    } else {
        None
    }
}

fn ray_capsule(origin: Vec3, dir: Vec3, a: Vec3, b: Vec3, radius: f64) -> Option<(f64, Vec3)> {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 < 1e-18 {
        return ray_sphere(origin, dir, a, radius).map(|t| {
            let p = origin + dir * t;
            (t, (p - a).normalized())
        });
    }
    // Infinite-cylinder intersection, then clamp to the segment with
    // spherical caps.
    let d = ab * (1.0 / len2.sqrt());
    let oa = origin - a;
    let dd = dir - d * dir.dot(d);
    let oo = oa - d * oa.dot(d);
    let qa = dd.dot(dd);
    let qb = 2.0 * dd.dot(oo);
    let qc = oo.dot(oo) - radius * radius;
    let mut best: Option<(f64, Vec3)> = None;
    if qa > 1e-15 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let t = (-qb - disc.sqrt()) / (2.0 * qa);
            if t > 1e-9 {
                let p = origin + dir * t;
                let s = (p - a).dot(d);
                if s >= 0.0 && s * s <= len2 {
                    let axis_point = a + d * s;
                    best = Some((t, (p - axis_point).normalized()));
                }
            }
        }
    }
    for cap in [a, b] {
        if let Some(t) = ray_sphere(origin, dir, cap, radius) {
            if best.map_or(true, |(bt, _)| t < bt) {
                let p = origin + dir * t;
                best = Some((t, (p - cap).normalized()));
            }
        }
    }
    best
}

fn ray_box(origin: Vec3, dir: Vec3, min: Vec3, max: Vec3) -> Option<(f64, Vec3)> {
    let inv = |d: f64| if d.abs() < 1e-15 { 1e15_f64.copysign(d) } else { 1.0 / d };
    let (ix, iy, iz) = (inv(dir.x), inv(dir.y), inv(dir.z));
    let (mut tmin, mut tmax) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut axis = 0usize;
    for (i, (o, inv_d, lo, hi)) in [
        (origin.x, ix, min.x, max.x),
        (origin.y, iy, min.y, max.y),
        (origin.z, iz, min.z, max.z),
    ]
    .iter()
    .enumerate()
    .map(|(i, v)| (i, *v))
    {
        let t0 = (lo - o) * inv_d;
        let t1 = (hi - o) * inv_d;
        let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        if t0 > tmin {
            tmin = t0;
            axis = i;
        }
        tmax = tmax.min(t1);
        if tmax < tmin {
            return None;
        }
    }
    if tmin <= 1e-9 {
        return None;
    }
    let mut n = Vec3::ZERO;
    let p = origin + dir * tmin;
    match axis {
        0 => n.x = if p.x < (min.x + max.x) * 0.5 { -1.0 } else { 1.0 },
        1 => n.y = if p.y < (min.y + max.y) * 0.5 { -1.0 } else { 1.0 },
        _ => n.z = if p.z < (min.z + max.z) * 0.5 { -1.0 } else { 1.0 },
    }
    Some((tmin, n))
}

fn build_scene(
    model: &ArmModel,
    joints: &[f64],
    target_xy: Option<(f64, f64)>,
) -> Vec<SceneObject> {
    let prof = model.profile();
    let app = &prof.render;
    let mut objs = Vec::new();
    // Base pedestal.
    objs.push(SceneObject {
        prim: Primitive::Capsule {
            a: Vec3::new(0.0, 0.0, 0.0),
            b: Vec3::new(0.0, 0.0, app.base_height),
            radius: app.base_radius,
        },
        color: [0.25, 0.25, 0.28],
        is_target: false,
    });
    let positions = model
        .joint_positions(joints)
        .expect("render only sees in-limit configurations");
    let n = positions.len();
    for i in 0..n - 1 {
        let (a, b) = (positions[i], positions[i + 1]);
        if (b - a).norm() < 1e-6 {
            continue;
        }
        let color = if i == n - 2 { app.gripper_color } else { app.arm_color };
        objs.push(SceneObject {
            prim: Primitive::Capsule { a, b, radius: app.link_radius },
            color,
            is_target: false,
        });
    }
    // Joint spheres give the arm silhouette some structure; the gripper tip
    // gets the gripper color so it stays localizable.
    for (i, p) in positions.iter().enumerate() {
        let last = i == n - 1;
        objs.push(SceneObject {
            prim: Primitive::Sphere {
                center: *p,
                radius: if last { app.link_radius * 1.25 } else { app.link_radius * 1.1 },
            },
            color: if last { app.gripper_color } else { app.arm_color },
            is_target: false,
        });
    }
    if let Some((tx, ty)) = target_xy {
        let half = app.cube_side * 0.5;
        let z0 = prof.workspace.target_z;
        objs.push(SceneObject {
            prim: Primitive::Box {
                min: Vec3::new(tx - half, ty - half, z0),
                max: Vec3::new(tx + half, ty + half, z0 + app.cube_side),
            },
            color: app.target_color,
            is_target: true,
        });
    }
    objs
}

struct CameraFrame {
    origin: Vec3,
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    half_tan: f64,
}

fn camera_frame(model: &ArmModel) -> CameraFrame {
    let cam = &model.profile().camera;
    let (sy, cy) = cam.yaw.sin_cos();
    let (st, ct) = cam.tilt.sin_cos();
    let forward = Vec3::new(cy * ct, sy * ct, -st);
    let world_up = Vec3::new(0.0, 0.0, 1.0);
    let right = forward.cross(world_up).normalized();
    let up = right.cross(forward).normalized();
    CameraFrame {
        origin: Vec3::new(cam.position[0], cam.position[1], cam.position[2]),
        forward,
        right,
        up,
        half_tan: (cam.fov_deg.to_radians() * 0.5).tan(),
    }
}

fn trace(objs: &[SceneObject], origin: Vec3, dir: Vec3) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for obj in objs {
        let hit = match obj.prim {
            Primitive::Sphere { center, radius } => {
                ray_sphere(origin, dir, center, radius).map(|t| {
                    let p = origin + dir * t;
                    (t, (p - center).normalized())
                })
            }
            Primitive::Capsule { a, b, radius } => ray_capsule(origin, dir, a, b, radius),
            Primitive::Box { min, max } => ray_box(origin, dir, min, max),
        };
        if let Some((t, normal)) = hit {
            if best.as_ref().map_or(true, |h| t < h.t) {
                best = Some(Hit { t, normal, color: obj.color, is_target: obj.is_target });
            }
        }
    }
    best
}

const AMBIENT: f64 = 0.4;

/// Render the scene to an RGB image in [-1, 1].
///
/// Identical `(model, joints, target, style, resolution, seed)` inputs give
/// bit-identical images; the seed only feeds the pseudo-real pixel noise.
pub fn render_scene(
    model: &ArmModel,
    joints: &[f64],
    target_xy: Option<(f64, f64)>,
    style: &StyleSpec,
    resolution: usize,
    noise_seed: u64,
) -> ImageTensor {
    let objs = build_scene(model, joints, target_xy);
    let cam = camera_frame(model);
    let app = &model.profile().render;
    let light = Vec3::new(style.light_dir[0], style.light_dir[1], style.light_dir[2]).normalized();
    let mut out = Tensor::zeros(vec![3, resolution, resolution]);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let center = (resolution as f64 - 1.0) * 0.5;
    let max_r2 = 2.0 * center * center;

    for py in 0..resolution {
        for px in 0..resolution {
            let ndc_x = ((px as f64 + 0.5) / resolution as f64) * 2.0 - 1.0;
            let ndc_y = 1.0 - ((py as f64 + 0.5) / resolution as f64) * 2.0;
            let dir = (cam.forward
                + cam.right * (ndc_x * cam.half_tan)
                + cam.up * (ndc_y * cam.half_tan))
                .normalized();

            let mut rgb = if let Some(hit) = trace(&objs, cam.origin, dir) {
                let diffuse = hit.normal.dot(light).max(0.0);
                let shade = AMBIENT + (1.0 - AMBIENT) * diffuse;
                [hit.color[0] * shade, hit.color[1] * shade, hit.color[2] * shade]
            } else if dir.z < -1e-9 {
                // Ground plane z = 0.
                let t = -cam.origin.z / dir.z;
                let p = cam.origin + dir * t;
                let diffuse = light.z.max(0.0);
                let shade = AMBIENT + (1.0 - AMBIENT) * diffuse;
                // Gentle distance falloff keeps the horizon readable.
                let fade = (1.0 - (p.planar_radius() / 14.0)).clamp(0.55, 1.0);
                [
                    app.ground_color[0] * shade * fade,
                    app.ground_color[1] * shade * fade,
                    app.ground_color[2] * shade * fade,
                ]
            } else {
                app.sky_color
            };

            if style.hue_shift != 0.0 {
                rgb = hue_rotate(rgb, style.hue_shift);
            }
            if style.vignette_strength != 0.0 {
                let dx = px as f64 - center;
                let dy = py as f64 - center;
                let falloff = 1.0 - style.vignette_strength * ((dx * dx + dy * dy) / max_r2);
                for c in rgb.iter_mut() {
                    *c *= falloff;
                }
            }
            if style.noise_sigma != 0.0 {
                for c in rgb.iter_mut() {
                    let z: f64 = noise_rng.sample(StandardNormal);
                    // Sigma is specified in [-1, 1] units; we are still in
                    // [0, 1] here, so halve it.
                    *c += z * style.noise_sigma * 0.5;
                }
            }
            for (c, v) in [0, 1, 2].into_iter().zip(rgb) {
                out.set3(c, py, px, (v.clamp(0.0, 1.0)) * 2.0 - 1.0);
            }
        }
    }
    ImageTensor::new(out).expect("renderer output is clamped into range")
}

/// Render only the target cube's pixel mask (true where the cube is the
/// nearest hit), used for compositing targets into translated images.
pub fn render_target_mask(
    model: &ArmModel,
    joints: &[f64],
    target_xy: (f64, f64),
    resolution: usize,
) -> Vec<bool> {
    let objs = build_scene(model, joints, Some(target_xy));
    let cam = camera_frame(model);
    let mut mask = vec![false; resolution * resolution];
    for py in 0..resolution {
        for px in 0..resolution {
            let ndc_x = ((px as f64 + 0.5) / resolution as f64) * 2.0 - 1.0;
            let ndc_y = 1.0 - ((py as f64 + 0.5) / resolution as f64) * 2.0;
            let dir = (cam.forward
                + cam.right * (ndc_x * cam.half_tan)
                + cam.up * (ndc_y * cam.half_tan))
                .normalized();
            if let Some(hit) = trace(&objs, cam.origin, dir) {
                mask[py * resolution + px] = hit.is_target;
            }
        }
    }
    mask
}

/// Classify pixels that read as "target colored": strongly red with little
/// green/blue relative to red. Shading-invariant because it thresholds on
/// channel ratios.
pub fn target_colored_pixels(img: &ImageTensor) -> usize {
    let r = img.resolution();
    let t = img.tensor();
    let mut count = 0;
    for y in 0..r {
        for x in 0..r {
            let red = (t.at3(0, y, x) + 1.0) * 0.5;
            let green = (t.at3(1, y, x) + 1.0) * 0.5;
            let blue = (t.at3(2, y, x) + 1.0) * 0.5;
            if red > 0.15 && green < 0.35 * red && blue < 0.35 * red {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::profile::Profile;

    fn model(name: &str) -> ArmModel {
        ArmModel::new(Profile::load(name).unwrap()).unwrap()
    }

    #[test]
    fn render_is_deterministic() {
        let m = model("planar2dof_desk");
        let joints = [0.3, -0.5];
        let style = StyleSpec::pseudo_real();
        let a = render_scene(&m, &joints, Some((0.25, 0.1)), &style, 32, 99);
        let b = render_scene(&m, &joints, Some((0.25, 0.1)), &style, 32, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn no_target_pixels_without_target() {
        for name in Profile::builtin_names() {
            let m = model(name);
            let joints = vec![0.1; m.n_joints()];
            let img =
                render_scene(&m, &joints, None, &StyleSpec::virtual_style(), 64, 0);
            assert_eq!(target_colored_pixels(&img), 0, "{name}");
        }
    }

    #[test]
    fn target_visible_when_included() {
        for name in Profile::builtin_names() {
            let m = model(name);
            let joints = vec![0.0; m.n_joints()];
            let ws = &m.profile().workspace;
            let tx = (ws.target_x_range[0] + ws.target_x_range[1]) * 0.5;
            let ty = (ws.target_y_range[0] + ws.target_y_range[1]) * 0.5;
            let img = render_scene(&m, &joints, Some((tx, ty)), &StyleSpec::virtual_style(), 64, 0);
            assert!(target_colored_pixels(&img) > 0, "{name}: target not visible");
            let mask = render_target_mask(&m, &joints, (tx, ty), 64);
            assert!(mask.iter().any(|&m| m), "{name}: empty target mask");
        }
    }

    #[test]
    fn styles_differ() {
        let m = model("planar2dof_desk");
        let joints = [0.0, 0.0];
        let v = render_scene(&m, &joints, Some((0.2, 0.0)), &StyleSpec::virtual_style(), 32, 5);
        let p = render_scene(&m, &joints, Some((0.2, 0.0)), &StyleSpec::pseudo_real(), 32, 5);
        assert!(v.tensor().l1_distance(p.tensor()) > 0.01);
    }

    #[test]
    fn resolution_contract() {
        let m = model("irb120_like");
        let img = render_scene(&m, &[0.0; 6], None, &StyleSpec::virtual_style(), 64, 0);
        assert_eq!(img.tensor().shape(), &[3, 64, 64]);
    }
}
