use sim2real_core::world::{ArmEnv, StyleSpec};

fn main() {
    for name in ["irb120_like", "ur3e_like", "planar2dof_desk"] {
        let mut env = ArmEnv::from_name(name).unwrap();
        env.reset_state(42);
        let v = env.render(&StyleSpec::virtual_style(), 224, true);
        v.save_png(std::path::Path::new(&format!("/tmp/render_{name}_virtual.png"))).unwrap();
        let p = env.render(&StyleSpec::pseudo_real(), 224, true);
        p.save_png(std::path::Path::new(&format!("/tmp/render_{name}_pseudo.png"))).unwrap();
        let small = env.render(&StyleSpec::virtual_style(), 64, true);
        small.save_png(std::path::Path::new(&format!("/tmp/render_{name}_64.png"))).unwrap();
        println!("{name}: target at {:?}, gripper dist {:.3}", env.state().target_xy, env.gripper_target_dist());
    }
}
