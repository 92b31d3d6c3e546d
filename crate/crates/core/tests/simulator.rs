mod common;

use std::f64::consts::PI;

use common::*;
use nlos_ltm::sim::{
    simulate_impulse_response, ImpulseResponse, Material, Patch, RelayTopology, SceneDescription,
    TimeAxis, SPEED_OF_LIGHT,
};
use nlos_ltm::Vec3;

fn single_pair(xl: Vec3, xs: Vec3, patches: Vec<Patch>, bounces: usize, bins: usize) -> ImpulseResponse {
    let scene = SceneDescription {
        patches,
        relay: RelayTopology {
            laser_points: vec![xl],
            spad_points: vec![xs],
            wall_normal: WALL_NORMAL,
        },
        time_axis: TimeAxis::new(85e-12, bins, 0.0).unwrap(),
        max_bounces: bounces,
        noise: None,
    };
    simulate_impulse_response(&scene).unwrap().0
}

/// `cos_a cos_b / r^2` between two oriented points.
fn geometry(pa: Vec3, na: Vec3, pb: Vec3, nb: Vec3) -> f64 {
    let d = pb - pa;
    let r2 = d.dot(d);
    let u = d / r2.sqrt();
    na.dot(u).max(0.0) * nb.dot(-u).max(0.0) / r2
}

fn bin_of(length: f64) -> usize {
    (length / SPEED_OF_LIGHT / 85e-12).floor() as usize
}

#[test]
fn single_bounce_closed_form() {
    let xl = Vec3::new(-0.3, 0.0, 0.1);
    let xs = Vec3::new(0.25, 0.0, -0.2);
    let p = Vec3::new(0.05, 0.8, 0.02);
    let n = Vec3::new(0.2, -1.0, 0.1).normalized();
    let (area, albedo) = (0.02, 0.7);
    let h = single_pair(xl, xs, vec![Patch::lambertian(p, n, area, albedo)], 3, 256);

    let expected = geometry(xl, WALL_NORMAL, p, n) * area * albedo / PI * geometry(p, n, xs, WALL_NORMAL);
    let bin = bin_of(xl.distance(p) + p.distance(xs));
    let trace = h.trace(0, 0);
    assert!(rel_err(trace[bin], expected) < 1e-6, "{} vs {expected}", trace[bin]);
    let others: f64 = trace.iter().enumerate().filter(|(i, _)| *i != bin).map(|(_, v)| v).sum();
    assert_eq!(others, 0.0);
}

fn facing_pair() -> (Vec3, Vec3, Patch, Patch) {
    let xl = Vec3::new(-0.2, 0.0, 0.0);
    let xs = Vec3::new(0.2, 0.0, 0.0);
    let a = Vec3::new(-0.3, 0.7, 0.0);
    let b = Vec3::new(0.3, 0.7, 0.0);
    let pa = Patch::lambertian(a, tilted(a, b, xl), 0.01, 0.9);
    let pb = Patch::lambertian(b, tilted(b, a, xs), 0.01, 0.6);
    (xl, xs, pa, pb)
}

#[test]
fn two_bounce_closed_form() {
    let (xl, xs, pa, pb) = facing_pair();
    let h = single_pair(xl, xs, vec![pa, pb], 2, 512);

    let seg = |p: &Patch, q: &Patch| geometry(p.center, p.normal, q.center, q.normal);
    let f = |p: &Patch| p.area * p.albedo / PI;
    let ab = geometry(xl, WALL_NORMAL, pa.center, pa.normal) * f(&pa) * seg(&pa, &pb) * f(&pb)
        * geometry(pb.center, pb.normal, xs, WALL_NORMAL);
    let ba = geometry(xl, WALL_NORMAL, pb.center, pb.normal) * f(&pb) * seg(&pb, &pa) * f(&pa)
        * geometry(pa.center, pa.normal, xs, WALL_NORMAL);
    let len_ab = xl.distance(pa.center) + pa.center.distance(pb.center) + pb.center.distance(xs);
    let len_ba = xl.distance(pb.center) + pb.center.distance(pa.center) + pa.center.distance(xs);
    assert!(ab > 0.0 && ba > 0.0);

    let trace = h.trace(0, 0);
    let mut expected = vec![0.0f64; 512];
    expected[bin_of(len_ab)] += ab;
    expected[bin_of(len_ba)] += ba;
    for p in [&pa, &pb] {
        let one = geometry(xl, WALL_NORMAL, p.center, p.normal) * f(p) * geometry(p.center, p.normal, xs, WALL_NORMAL);
        expected[bin_of(xl.distance(p.center) + p.center.distance(xs))] += one;
    }
    for (i, (&got, &want)) in trace.iter().zip(&expected).enumerate() {
        assert!(rel_err(got, want) < 1e-6, "bin {i}: {got} vs {want}");
    }
}

#[test]
fn occluder_removes_the_two_bounce_path() {
    let (xl, xs, pa, pb) = facing_pair();
    let open = single_pair(xl, xs, vec![pa, pb], 2, 512);
    // a black disk between the two patches, edge-on to the wall
    let mid = (pa.center + pb.center) * 0.5;
    let blocker = Patch::lambertian(mid, Vec3::new(1.0, 0.0, 0.0), 0.02, 0.0);
    let closed = single_pair(xl, xs, vec![pa, pb, blocker], 2, 512);

    let len_ab = xl.distance(pa.center) + pa.center.distance(pb.center) + pb.center.distance(xs);
    let bin = bin_of(len_ab);
    assert!(open.trace(0, 0)[bin] > 0.0);
    assert_eq!(closed.trace(0, 0)[bin], 0.0);
    let one = bin_of(xl.distance(pa.center) + pa.center.distance(xs));
    assert_eq!(closed.trace(0, 0)[one], open.trace(0, 0)[one]);
}

#[test]
fn time_of_flight_argmax() {
    let grid = desk_grid();
    let v = grid.index(9, 4, 6);
    let p = facing_wall(&grid, v, 0.01);
    let h = simulate(vec![p], 1);
    let topo = desk_topology();
    for (l, s) in [(0, 0), (10, 50), (63, 7)] {
        let trace = h.trace(l, s);
        let argmax = (0..trace.len()).max_by(|&i, &j| trace[i].total_cmp(&trace[j])).unwrap();
        let len = topo.laser_points[l].distance(p.center) + p.center.distance(topo.spad_points[s]);
        assert_eq!(argmax, bin_of(len));
    }
}

#[test]
fn albedo_scales_exactly() {
    let grid = desk_grid();
    let p = facing_wall(&grid, grid.index(3, 2, 12), 0.01);
    let h1 = simulate(vec![p], 1);
    let mut half = p;
    half.albedo = 0.5;
    let h2 = simulate(vec![half], 1);
    for (a, b) in h1.data.iter().zip(&h2.data) {
        assert_eq!(a * 0.5, *b);
    }
}

#[test]
fn non_interacting_patches_superpose() {
    let grid = desk_grid();
    // same depth, both facing the wall: they cannot see each other
    let a = facing_wall(&grid, grid.index(3, 2, 4), 0.02);
    let b = facing_wall(&grid, grid.index(12, 2, 11), 0.02);
    let ha = simulate(vec![a], 3);
    let hb = simulate(vec![b], 3);
    let hab = simulate(vec![a, b], 3);
    for ((x, y), z) in ha.data.iter().zip(&hb.data).zip(&hab.data) {
        // each pair is summed in f64 and rounded once to binary32
        let sum = x + y;
        assert!((sum - z).abs() <= sum * 2.0 * f32::EPSILON as f64, "{x} + {y} vs {z}");
    }
}

#[test]
fn reciprocity() {
    let (xl, xs, pa, pb) = facing_pair();
    let pb = pb.with_material(Material::Phong { exponent: 5.0 });
    let fwd = single_pair(xl, xs, vec![pa, pb], 3, 512);
    let rev = single_pair(xs, xl, vec![pa, pb], 3, 512);
    for (a, b) in fwd.data.iter().zip(&rev.data) {
        assert!(rel_err(*a, *b) < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn more_bounces_never_remove_light() {
    let (xl, xs, pa, pb) = facing_pair();
    let third = Patch::lambertian(Vec3::new(0.0, 1.0, 0.3), Vec3::new(0.0, -1.0, -0.5).normalized(), 0.02, 0.8);
    let totals: Vec<f64> = (1..=4)
        .map(|k| {
            single_pair(xl, xs, vec![pa, pb, third], k, 512)
                .data
                .iter()
                                .sum()
        })
        .collect();
    for w in totals.windows(2) {
        assert!(w[1] > w[0], "{totals:?}");
    }
}

#[test]
fn paths_past_the_window_are_counted() {
    let grid = desk_grid();
    let p = facing_wall(&grid, grid.index(8, 7, 8), 0.01);
    let mut s = scene(vec![p], 1);
    s.time_axis = TimeAxis::new(85e-12, 16, 0.0).unwrap();
    let (h, report) = simulate_impulse_response(&s).unwrap();
    assert_eq!(report.deposited, 0);
    assert_eq!(report.truncated, 64 * 64);
    assert!(h.data.iter().all(|&v| v == 0.0));
}

#[test]
fn empty_scene_is_zero() {
    let h = simulate(vec![], 3);
    assert_eq!(h.data.len(), 64 * 64 * 512);
    assert!(h.data.iter().all(|&v| v == 0.0));
}
