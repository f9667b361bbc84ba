use serde::{Deserialize, Serialize};

/// Which visual domain an observation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StyleKind {
    Virtual,
    PseudoReal,
}

/// Rendering style. The virtual style is the clean simulator look; the
/// pseudo-real style applies a fixed set of perturbations (hue rotation,
/// pixel noise, vignette, shifted light) that stand in for a physical
/// camera domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StyleSpec {
    pub kind: StyleKind,
    pub hue_shift: f64,
    pub noise_sigma: f64,
    pub vignette_strength: f64,
    pub light_dir: [f64; 3],
}

impl StyleSpec {
    pub fn virtual_style() -> Self {
        StyleSpec {
            kind: StyleKind::Virtual,
            hue_shift: 0.0,
            noise_sigma: 0.0,
            vignette_strength: 0.0,
            light_dir: [0.35, -0.25, 0.9],
        }
    }

    pub fn pseudo_real() -> Self {
        StyleSpec {
            kind: StyleKind::PseudoReal,
            hue_shift: 0.45,
            noise_sigma: 0.02,
            vignette_strength: 0.3,
            light_dir: [0.62, 0.38, 0.68],
        }
    }

    pub fn of_kind(kind: StyleKind) -> Self {
        match kind {
            StyleKind::Virtual => StyleSpec::virtual_style(),
            StyleKind::PseudoReal => StyleSpec::pseudo_real(),
        }
    }

    pub fn is_perturbed(&self) -> bool {
        self.hue_shift != 0.0 || self.noise_sigma != 0.0 || self.vignette_strength != 0.0
    }
}

/// Rotate an RGB color about the grey axis by `angle` radians, the standard
/// hue-rotation matrix.
pub fn hue_rotate(rgb: [f64; 3], angle: f64) -> [f64; 3] {
    if angle == 0.0 {
        return rgb;
    }
    let (s, c) = angle.sin_cos();
    let m = [
        [
            0.213 + c * 0.787 - s * 0.213,
            0.715 - c * 0.715 - s * 0.715,
            0.072 - c * 0.072 + s * 0.928,
        ],
        [
            0.213 - c * 0.213 + s * 0.143,
            0.715 + c * 0.285 + s * 0.140,
            0.072 - c * 0.072 - s * 0.283,
        ],
        [
            0.213 - c * 0.213 - s * 0.787,
            0.715 - c * 0.715 + s * 0.715,
            0.072 + c * 0.928 + s * 0.072,
        ],
    ];
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(&m) {
        *o = row[0] * rgb[0] + row[1] * rgb[1] + row[2] * rgb[2];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_style_has_no_perturbations() {
        let s = StyleSpec::virtual_style();
        assert!(!s.is_perturbed());
        assert_eq!(s.hue_shift, 0.0);
        assert_eq!(s.noise_sigma, 0.0);
        assert_eq!(s.vignette_strength, 0.0);
    }

    #[test]
    fn hue_rotate_zero_is_identity() {
        let c = [0.3, 0.6, 0.9];
        assert_eq!(hue_rotate(c, 0.0), c);
    }

    #[test]
    fn hue_rotate_preserves_grey() {
        let g = [0.5, 0.5, 0.5];
        let out = hue_rotate(g, 1.1);
        for (a, b) in out.iter().zip(&g) {
            assert!((a - b).abs() < 1e-3, "{out:?}");
        }
    }
}
