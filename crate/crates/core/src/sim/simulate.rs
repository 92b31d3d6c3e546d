use rayon::prelude::*;

use super::{
    apply_noise, storage_precision, ImpulseResponse, Patch, SceneDescription, SPEED_OF_LIGHT,
};
use crate::error::Result;
use crate::geometry::Vec3;

/// Bookkeeping returned alongside a simulated response.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimReport {
    /// Paths with nonzero throughput that landed on the time axis.
    pub deposited: u64,
    /// Paths with nonzero throughput whose arrival fell outside the axis.
    pub truncated: u64,
}

/// One straight segment between a wall sample and a patch, or two patches.
#[derive(Debug, Clone, Copy)]
struct Leg {
    length: f64,
    /// Unit direction from the first endpoint to the second.
    dir: Vec3,
    /// Geometric factor `cos_a * cos_b / r^2`, zero when either end faces
    /// away or the segment is blocked.
    geometry: f64,
}

const HIT_EPS: f64 = 1e-12;

/// Does any patch other than those in `skip` block the open segment `a -> b`?
fn occluded(patches: &[Patch], a: Vec3, b: Vec3, skip: &[usize]) -> bool {
    let d = b - a;
    patches.iter().enumerate().any(|(i, p)| {
        if skip.contains(&i) {
            return false;
        }
        let denom = p.normal.dot(d);
        if denom.abs() < 1e-15 {
            return false;
        }
        let t = p.normal.dot(p.center - a) / denom;
        if t <= HIT_EPS || t >= 1.0 - HIT_EPS {
            return false;
        }
        let hit = a + d * t;
        let r = p.disk_radius();
        (hit - p.center).dot(hit - p.center) <= r * r
    })
}

fn wall_leg(patches: &[Patch], wall_pt: Vec3, wall_normal: Vec3, k: usize) -> Leg {
    let p = &patches[k];
    let v = p.center - wall_pt;
    let length = v.norm();
    let dir = v / length;
    let cos_wall = wall_normal.dot(dir);
    let cos_patch = -p.normal.dot(dir);
    let geometry = if cos_wall > 0.0 && cos_patch > 0.0 && !occluded(patches, wall_pt, p.center, &[k])
    {
        cos_wall * cos_patch / (length * length)
    } else {
        0.0
    };
    Leg {
        length,
        dir,
        geometry,
    }
}

fn patch_leg(patches: &[Patch], from: usize, to: usize) -> Leg {
    let (a, b) = (&patches[from], &patches[to]);
    let v = b.center - a.center;
    let length = v.norm();
    if length == 0.0 {
        return Leg {
            length,
            dir: Vec3::ZERO,
            geometry: 0.0,
        };
    }
    let dir = v / length;
    let cos_a = a.normal.dot(dir);
    let cos_b = -b.normal.dot(dir);
    let geometry = if cos_a > 0.0
        && cos_b > 0.0
        && !occluded(patches, a.center, b.center, &[from, to])
    {
        cos_a * cos_b / (length * length)
    } else {
        0.0
    };
    Leg {
        length,
        dir,
        geometry,
    }
}

struct PathWalker<'a> {
    patches: &'a [Patch],
    /// `between[p * n + q]` is the leg from patch `p` to patch `q`.
    between: &'a [Leg],
    /// Legs from the current SPAD point to each patch.
    to_spad: &'a [Leg],
    max_bounces: usize,
    origin: f64,
    bin_width: f64,
}

impl PathWalker<'_> {
    /// Extend a path that has just arrived at patch `at` from direction
    /// `incoming` (pointing back toward the previous vertex).
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        at: usize,
        incoming: Vec3,
        throughput: f64,
        length: f64,
        depth: usize,
        hist: &mut [f64],
        report: &mut SimReport,
    ) {
        let patch = &self.patches[at];
        let n = self.patches.len();

        let exit = &self.to_spad[at];
        if exit.geometry > 0.0 {
            // exit.dir points wall -> patch; the outgoing direction is its reverse
            let f = patch.brdf(incoming, -exit.dir);
            let t = throughput * patch.area * f * exit.geometry;
            if t > 0.0 {
                let total = length + exit.length;
                let x = ((total / SPEED_OF_LIGHT - self.origin) / self.bin_width).floor();
                if x >= 0.0 && x < hist.len() as f64 {
                    hist[x as usize] += t;
                    report.deposited += 1;
                } else {
                    report.truncated += 1;
                }
            }
        }

        if depth >= self.max_bounces {
            return;
        }
        for next in 0..n {
            if next == at {
                continue;
            }
            let leg = &self.between[at * n + next];
            if leg.geometry <= 0.0 {
                continue;
            }
            let f = patch.brdf(incoming, leg.dir);
            let t = throughput * patch.area * f * leg.geometry;
            if t > 0.0 {
                self.walk(next, -leg.dir, t, length + leg.length, depth + 1, hist, report);
            }
        }
    }
}

/// Simulate `H(x_l, x_s, t)` for every laser/SPAD pair of the scene.
///
/// Each path `<x_l, v_1, ..., v_m, x_s>` with `1 <= m <= max_bounces`
/// contributes
/// `prod(cos_i cos_o / r^2 over segments) * prod(area_j * brdf_j)` to the bin
/// containing its total length over `c`. Consecutive vertices must be
/// distinct patches. If the scene carries a noise spec, Poisson noise is
/// applied afterwards.
pub fn simulate_impulse_response(scene: &SceneDescription) -> Result<(ImpulseResponse, SimReport)> {
    scene.validate()?;
    let topo = &scene.relay;
    let patches = &scene.patches;
    let np = patches.len();
    let nbins = scene.time_axis.bin_count;

    let mut h = ImpulseResponse::zeros(topo.clone(), scene.time_axis);
    if np == 0 {
        return finish(scene, h, SimReport::default());
    }

    let leg_table = |pts: &[Vec3]| -> Vec<Vec<Leg>> {
        pts.iter()
            .map(|&w| (0..np).map(|k| wall_leg(patches, w, topo.wall_normal, k)).collect())
            .collect()
    };
    let from_laser = leg_table(&topo.laser_points);
    let to_spad = leg_table(&topo.spad_points);
    let between: Vec<Leg> = (0..np * np).map(|i| patch_leg(patches, i / np, i % np)).collect();

    let ks = topo.spad_count();
    let reports: Vec<SimReport> = h
        .data
        .par_chunks_mut(nbins)
        .enumerate()
        .map(|(pair, out)| {
            let (l, s) = (pair / ks, pair % ks);
            let walker = PathWalker {
                patches,
                between: &between,
                to_spad: &to_spad[s],
                max_bounces: scene.max_bounces,
                origin: scene.time_axis.origin,
                bin_width: scene.time_axis.bin_width,
            };
            let mut hist = vec![0.0f64; nbins];
            let mut report = SimReport::default();
            for (k, leg) in from_laser[l].iter().enumerate() {
                if leg.geometry > 0.0 {
                    walker.walk(k, -leg.dir, leg.geometry, leg.length, 1, &mut hist, &mut report);
                }
            }
            for (o, v) in out.iter_mut().zip(&hist) {
                *o = storage_precision(*v);
            }
            report
        })
        .collect();

    let report = reports.iter().fold(SimReport::default(), |acc, r| SimReport {
        deposited: acc.deposited + r.deposited,
        truncated: acc.truncated + r.truncated,
    });
    finish(scene, h, report)
}

fn finish(
    scene: &SceneDescription,
    h: ImpulseResponse,
    report: SimReport,
) -> Result<(ImpulseResponse, SimReport)> {
    match &scene.noise {
        Some(noise) => Ok((apply_noise(&h, noise)?, report)),
        None => Ok((h, report)),
    }
}
