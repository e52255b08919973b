use super::{Load, Scenario, VolumeFraction};
use crate::error::{Error, Result};
use crate::fem::DesignDomain;
use crate::image::DesignImage;

/// Condition channels in storage order; `Design` only exists in the
/// seven-channel variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Design,
    BcX,
    BcY,
    Fx,
    Fy,
    VolumeFraction,
    Complexity,
}

impl Channel {
    pub const CONDITIONS: [Channel; 6] = [
        Channel::BcX,
        Channel::BcY,
        Channel::Fx,
        Channel::Fy,
        Channel::VolumeFraction,
        Channel::Complexity,
    ];
}

/// Node-grid planes (`(ny + 1)` rows of `(nx + 1)` values, row `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTensor {
    pub width: usize,
    pub height: usize,
    pub bc_x: Vec<f64>,
    pub bc_y: Vec<f64>,
    pub f_x: Vec<f64>,
    pub f_y: Vec<f64>,
    pub vf: Vec<f64>,
    pub cx: Vec<f64>,
    pub design: Option<Vec<f64>>,
}

impl ConditionTensor {
    pub fn channel_count(&self) -> usize {
        if self.design.is_some() {
            7
        } else {
            6
        }
    }

    pub fn channel(&self, ch: Channel) -> Option<&[f64]> {
        Some(match ch {
            Channel::Design => self.design.as_deref()?,
            Channel::BcX => &self.bc_x,
            Channel::BcY => &self.bc_y,
            Channel::Fx => &self.f_x,
            Channel::Fy => &self.f_y,
            Channel::VolumeFraction => &self.vf,
            Channel::Complexity => &self.cx,
        })
    }

    /// Planes in storage order: design first when present, then the six
    /// condition channels.
    pub fn planes(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(7);
        if let Some(d) = &self.design {
            out.push(d);
        }
        out.extend(Channel::CONDITIONS.iter().map(|c| self.channel(*c).expect("condition channel")));
        out
    }

    /// Inverse of [`ConditionTensor::planes`].
    pub fn from_planes(width: usize, height: usize, mut planes: Vec<Vec<f64>>) -> Result<Self> {
        if !(planes.len() == 6 || planes.len() == 7) || planes.iter().any(|p| p.len() != width * height) {
            return Err(Error::param(format!(
                "expected 6 or 7 planes of {}x{}",
                width, height
            )));
        }
        let design = (planes.len() == 7).then(|| planes.remove(0));
        let mut it = planes.into_iter();
        let mut next = || it.next().expect("six planes");
        Ok(Self {
            width,
            height,
            bc_x: next(),
            bc_y: next(),
            f_x: next(),
            f_y: next(),
            vf: next(),
            cx: next(),
            design,
        })
    }
}

/// Encodes a scenario as node-grid channels; a design, when given, is
/// resampled bilinearly onto the node grid as the seventh channel.
///
/// The design must be either element-sized (`nx x ny`) or node-sized.
pub fn encode_condition_tensor(
    scenario: &Scenario,
    domain: &DesignDomain,
    design: Option<&DesignImage>,
) -> Result<ConditionTensor> {
    scenario.validate()?;
    if scenario.domain() != *domain {
        return Err(Error::param("scenario does not match the domain"));
    }
    let (w, h) = (domain.nx + 1, domain.ny + 1);
    let idx = |i: usize, j: usize| j * w + i;
    let mut bc = vec![0.0; w * h];
    for &(i, j) in &scenario.fixed_nodes {
        bc[idx(i, j)] = 1.0;
    }
    let mut f_x = vec![0.0; w * h];
    let mut f_y = vec![0.0; w * h];
    for l in &scenario.loads {
        let t = l.theta_deg.to_radians();
        f_x[idx(l.i, l.j)] += t.cos();
        f_y[idx(l.i, l.j)] += t.sin();
    }
    let mut vf = vec![0.0; w * h];
    for j in 0..h {
        for i in 0..w {
            vf[idx(i, j)] = scenario.volfrac.at_node(i, j);
        }
    }
    let design = match design {
        None => None,
        Some(img) => {
            let ok = (img.width() == domain.nx && img.height() == domain.ny) || (img.width() == w && img.height() == h);
            if !ok {
                return Err(Error::param(format!(
                    "design is {}x{}, expected {}x{} or {}x{}",
                    img.width(),
                    img.height(),
                    domain.nx,
                    domain.ny,
                    w,
                    h
                )));
            }
            Some(img.resize_bilinear(w, h)?.values().to_vec())
        }
    };
    Ok(ConditionTensor {
        width: w,
        height: h,
        bc_y: bc.clone(),
        bc_x: bc,
        f_x,
        f_y,
        vf,
        cx: vec![scenario.complexity as f64; w * h],
        design,
    })
}

/// Fields recoverable from a condition tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedScenario {
    pub fixed_nodes: Vec<(usize, usize)>,
    /// Unit loads; angles in `[0, 360)` from `atan2(F_y, F_x)`.
    pub loads: Vec<Load>,
    pub volfrac: VolumeFraction,
    pub complexity: u32,
}

pub fn decode_condition_tensor(t: &ConditionTensor) -> DecodedScenario {
    let (w, h) = (t.width, t.height);
    let mut fixed_nodes = Vec::new();
    let mut loads = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            if t.bc_x[k] != 0.0 || t.bc_y[k] != 0.0 {
                fixed_nodes.push((i, j));
            }
            let (fx, fy) = (t.f_x[k], t.f_y[k]);
            if fx * fx + fy * fy > 1e-18 {
                let theta = fy.atan2(fx).to_degrees().rem_euclid(360.0);
                loads.push(Load {
                    i,
                    j,
                    theta_deg: if theta >= 360.0 { 0.0 } else { theta },
                    mag: (fx * fx + fy * fy).sqrt(),
                });
            }
        }
    }
    let first = t.vf[0];
    let volfrac = if t.vf.iter().all(|v| *v == first) {
        VolumeFraction::Uniform(first)
    } else {
        VolumeFraction::Field(t.vf.chunks(w).map(|r| r.to_vec()).collect())
    };
    DecodedScenario {
        fixed_nodes,
        loads,
        volfrac,
        complexity: t.cx[0].round() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Split;

    fn one_load(theta: f64) -> Scenario {
        Scenario {
            nx: 4,
            ny: 3,
            fixed_nodes: vec![(0, 0), (0, 1)],
            loads: vec![Load::new(4, 2, theta)],
            volfrac: VolumeFraction::Uniform(0.3),
            complexity: 13,
            split: Split::Train,
            seed: 0,
        }
    }

    #[test]
    fn angle_components() {
        let s = one_load(0.0);
        let t = encode_condition_tensor(&s, &s.domain(), None).unwrap();
        let k = 2 * 5 + 4;
        assert_eq!(t.f_x[k], 1.0);
        assert_eq!(t.f_y[k], 0.0);
        let s = one_load(90.0);
        let t = encode_condition_tensor(&s, &s.domain(), None).unwrap();
        assert!(t.f_x[k].abs() < 1e-12);
        assert_eq!(t.f_y[k], 1.0);
    }

    #[test]
    fn constant_channels() {
        let s = one_load(38.0);
        let t = encode_condition_tensor(&s, &s.domain(), None).unwrap();
        assert!(t.vf.iter().all(|v| *v == 0.3));
        assert!(t.cx.iter().all(|v| *v == 13.0));
        assert_eq!(t.bc_x, t.bc_y);
        assert_eq!(t.bc_x.iter().filter(|v| **v != 0.0).count(), 2);
        assert_eq!(t.channel_count(), 6);
    }

    #[test]
    fn design_channel_resampled_or_rejected() {
        let s = one_load(0.0);
        let img = DesignImage::filled(4, 3, 0.7);
        let t = encode_condition_tensor(&s, &s.domain(), Some(&img)).unwrap();
        assert_eq!(t.channel_count(), 7);
        assert_eq!(t.design.as_ref().unwrap().len(), 20);
        assert_eq!(t.planes().len(), 7);
        let bad = DesignImage::filled(7, 7, 0.7);
        assert!(encode_condition_tensor(&s, &s.domain(), Some(&bad)).is_err());
    }
}
