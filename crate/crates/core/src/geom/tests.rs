use super::*;
use crate::assoc::{cone_compose, ConePoint};
use crate::cofacial::{ck_compose, CkConePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn k2() -> ConePoint {
    ConePoint::Apex { arity: 2 }
}

fn tube_on(phi: Expansion, eps: f64, base: Point, offset: &[f64]) -> TubePoint {
    let v = phi
        .apply_point(&base)
        .iter()
        .zip(offset)
        .map(|(a, b)| a + b)
        .collect();
    TubePoint { phi, eps, v }
}

#[test]
fn projection_basics() {
    let plane = Expansion::plane();
    let p = pi_phi(&plane, &[2.0, 0.0]).unwrap();
    assert!(p.dist(&Point(0.0)) < 1e-12, "radial points project home");
    assert!(pi_phi(&plane, &[0.0, 0.0]).is_err());

    // Appending zero coordinates does not move the projection.
    let padded = plane.zero_pad(3);
    let mut v = vec![0.0, 0.0, 0.0];
    v.extend([0.3, 0.9]);
    let q = pi_phi(&padded, &v).unwrap();
    let q2 = pi_phi(&plane, &[0.3, 0.9]).unwrap();
    assert!(q.dist(&q2) < 1e-12);
}

#[test]
fn projection_matches_grid_search_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let k = rng.gen_range(2..=5usize);
        let phi = random_expansion(&mut rng, k, 2.0);
        assert!(phi.is_valid());
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        let mut v = phi.apply_point(&y);
        for x in v.iter_mut() {
            *x += rng.gen_range(-0.05..0.05);
        }
        let p = pi_phi(&phi, &v).unwrap();
        // Dense angular grid search.
        let mut best = (f64::INFINITY, 0.0);
        let steps = 20000;
        for s in 0..steps {
            let theta = std::f64::consts::TAU * s as f64 / steps as f64;
            let img = phi.apply_point(&Point(theta));
            let d2: f64 = img.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.0 {
                best = (d2, theta);
            }
        }
        assert!(
            p.dist(&Point(best.1)) < 1e-3,
            "grid oracle disagrees beyond grid resolution"
        );
        assert!((dist_to_image(&phi, &v) - best.0.sqrt()).abs() < 1e-6);
    }
}

#[test]
fn radius_base_case_and_invariances() {
    // Unit scales and equal radii: the stated closed form.
    let val = teps(&k2(), &[(1.0, 0.01), (1.0, 0.01)]);
    assert!((val - 1e-4).abs() < 1e-18 * 1e4 + 1e-12);
    // Zero padding leaves scales alone, so the radius is unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let n = rng.gen_range(2..=4usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let data: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(1.0..1.5), rng.gen_range(0.001..EPS_MAX)))
            .collect();
        let v = teps(&u, &data);
        assert!(v > 0.0 && v < EPS_MAX);
        // Permuting coordinates of a factor and zero-padding are invisible
        // to (scale, radius) data by construction; assert the bound family.
        let minors = data.iter().map(|(_, e)| *e).fold(f64::INFINITY, f64::min);
        let a: f64 = data.iter().map(|(c, _)| c * c).sum();
        assert!(v <= minors / 10f64.powf(a) + 1e-15, "radius bound");
    }
}

#[test]
fn radius_cone_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let n = rng.gen_range(3..=4usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        let data: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(1.0..1.5), rng.gen_range(0.001..EPS_MAX)))
            .collect();
        if let ConePoint::Cone { i, left, right, .. } = &u {
            for t in [0.0, 0.3, 0.8, 1.0] {
                let scaled = ConePoint::Cone {
                    t,
                    i: *i,
                    left: left.clone(),
                    right: right.clone(),
                };
                let full = ConePoint::Cone {
                    t: 1.0,
                    i: *i,
                    left: left.clone(),
                    right: right.clone(),
                };
                assert!(
                    teps(&scaled, &data) <= teps(&full, &data) + 1e-15,
                    "cone parameter shrinks the radius"
                );
            }
        }
    }
}

#[test]
fn radius_boundary_min_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..20 {
        let n = rng.gen_range(3..=4usize);
        let data: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(1.0..1.5), rng.gen_range(0.001..EPS_MAX)))
            .collect();
        let vertex_min = boundary_min(n, &data);
        let mut sampled = f64::INFINITY;
        for _ in 0..2000 {
            let u = crate::assoc::random_cone_point(&mut rng, n);
            if let ConePoint::Cone { i, left, right, .. } = u {
                let b = ConePoint::Cone {
                    t: 1.0,
                    i,
                    left,
                    right,
                };
                sampled = sampled.min(teps(&b, &data));
            }
        }
        assert!(vertex_min <= sampled + 1e-12);
    }
}

#[test]
fn psi_basepoint_identity_and_zero_offset() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..400 {
        let n = rng.gen_range(2..=4usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
        let tubes = random_gated_tubes(&mut rng, &u, &dims);
        let phi = Expansion::product(&tubes.iter().map(|t| &t.phi).collect::<Vec<_>>());
        let joint = pi_phi(&phi, &vec_all_test(&tubes)).unwrap();
        for i in 1..=n {
            let bp = tubes[i - 1].basepoint().unwrap();
            let out = psi(&u, &tubes, i, &bp).unwrap();
            assert!(
                out.dist(&joint) < 1e-9,
                "basepoint identity fails at arity {n}"
            );
        }
    }
    // Exactly on the image with y at the basepoint: the output is y itself.
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let phi1 = random_expansion(&mut rng, 3, 1.5);
    let phi2 = random_expansion(&mut rng, 2, 1.5);
    let y = Point(1.2);
    let t1 = tube_on(phi1, 0.01, y, &[0.0, 0.0, 0.0]);
    let t2 = tube_on(phi2, 0.02, y, &[0.0, 0.0]);
    let out = psi(&k2(), &[t1, t2], 1, &y).unwrap();
    assert!(out.dist(&y) < 1e-12);
}

fn vec_all_test(tubes: &[TubePoint]) -> Vec<f64> {
    let mut v = Vec::new();
    for t in tubes {
        v.extend_from_slice(&t.v);
    }
    v
}

#[test]
fn psi_displacement_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..500 {
        let n = rng.gen_range(2..=4usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let tubes = random_gated_tubes(&mut rng, &u, &dims);
        let phi = Expansion::product(&tubes.iter().map(|t| &t.phi).collect::<Vec<_>>());
        let d = dist_to_image(&phi, &vec_all_test(&tubes));
        let bound = 6.0 * (n * n) as f64 * d;
        for _ in 0..4 {
            let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
            let i = rng.gen_range(1..=n);
            let out = psi(&u, &tubes, i, &y).unwrap();
            assert!(
                out.dist(&y) <= bound + 1e-12,
                "displacement {} over bound {} (n={n})",
                out.dist(&y),
                bound
            );
        }
    }
}

#[test]
fn psi_zero_padding_and_permutation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for _ in 0..100 {
        let n = rng.gen_range(2..=3usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let tubes = random_gated_tubes(&mut rng, &u, &dims);
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        let i = rng.gen_range(1..=n);
        let base = psi(&u, &tubes, i, &y).unwrap();
        // Zero-pad one factor.
        let j = rng.gen_range(0..n);
        let mut padded = tubes.clone();
        padded[j] = TubePoint {
            phi: tubes[j].phi.zero_pad(1),
            eps: tubes[j].eps,
            v: {
                let mut v = vec![rng.gen_range(-0.3..0.3)];
                v.extend_from_slice(&tubes[j].v);
                v
            },
        };
        // The padded configuration might leave the gated region; the
        // condition only applies when it does not.
        if let Ok(out) = psi(&u, &padded, i, &y) {
            assert!(out.dist(&base) < 1e-9, "zero padding moved the map");
        }
        // Permute the coordinates of one factor.
        let mut permuted = tubes.clone();
        let k = permuted[j].phi.dim();
        let swap = (rng.gen_range(0..k), rng.gen_range(0..k));
        permuted[j].phi.q.swap(swap.0, swap.1);
        permuted[j].v.swap(swap.0, swap.1);
        let out = psi(&u, &permuted, i, &y).unwrap();
        assert!(out.dist(&base) < 1e-9, "permutation moved the map");
    }
}

#[test]
fn psi_composition_compatibility_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..120 {
        let n = rng.gen_range(2..=3usize);
        let m = rng.gen_range(2..=3usize);
        let uo = crate::assoc::random_cone_point(&mut rng, n);
        let ui = crate::assoc::random_cone_point(&mut rng, m);
        let j = rng.gen_range(1..=n);
        let composed = cone_compose(&uo, j, &ui);
        let total = n + m - 1;
        let dims: Vec<usize> = (0..total).map(|_| 2).collect();
        let tubes = random_gated_tubes(&mut rng, &composed, &dims);
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        for i in 1..=total {
            let via_comp = psi(&composed, &tubes, i, &y).unwrap();
            // Right-hand side: the chart composition formula.
            let sub = &tubes[j - 1..j - 1 + m];
            let merged = merge_block(&ui, sub);
            let mut outer_tubes: Vec<TubePoint> = Vec::new();
            outer_tubes.extend_from_slice(&tubes[..j - 1]);
            outer_tubes.push(merged);
            outer_tubes.extend_from_slice(&tubes[j - 1 + m..]);
            let direct = if i < j {
                psi(&uo, &outer_tubes, i, &y).unwrap()
            } else if i >= j + m {
                psi(&uo, &outer_tubes, i - m + 1, &y).unwrap()
            } else {
                let inner = psi(&ui, sub, i - j + 1, &y).unwrap();
                psi(&uo, &outer_tubes, j, &inner).unwrap()
            };
            assert!(via_comp.dist(&direct) < 1e-9, "chart compatibility");
        }
    }
}

#[test]
fn psi_codim2_chart_overlap() {
    // The codim-2 vertices of K(4) admit two chart presentations; the map
    // must not depend on the presentation.
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let a = cone_compose(&cone_compose(&k2(), 1, &k2()), 3, &k2());
    let b = cone_compose(&cone_compose(&k2(), 2, &k2()), 1, &k2());
    assert!(crate::assoc::to_barycentric(&a).approx_eq(&crate::assoc::to_barycentric(&b)));
    for _ in 0..200 {
        let tubes = random_gated_tubes(&mut rng, &a, &[2, 2, 2, 2]);
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        for i in 1..=4 {
            let va = psi(&a, &tubes, i, &y).unwrap();
            let vb = psi(&b, &tubes, i, &y).unwrap();
            assert!(va.dist(&vb) < 1e-9, "chart overlap at slot {i}");
        }
    }
}

#[test]
fn tpsi_endpoints_and_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let n = rng.gen_range(2..=3usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let dims: Vec<usize> = (0..n).map(|_| 2).collect();
        let tubes = random_gated_tubes(&mut rng, &u, &dims);
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        let i = rng.gen_range(1..=n);
        // s = 1: the identity.
        let at1 = tpsi(&u, &tubes, i, 1.0, &y).unwrap();
        assert!(at1.dist(&y) < 1e-12);
        // s = 0: the perturbation map.
        let at0 = tpsi(&u, &tubes, i, 0.0, &y).unwrap();
        let p = psi(&u, &tubes, i, &y).unwrap();
        assert!(at0.dist(&p) < 1e-12);
        // Displacement bound at intermediate parameters.
        let phi = Expansion::product(&tubes.iter().map(|t| &t.phi).collect::<Vec<_>>());
        let d = dist_to_image(&phi, &vec_all_test(&tubes));
        for _ in 0..3 {
            let s = rng.gen_range(0.0..1.0);
            let out = tpsi(&u, &tubes, i, s, &y).unwrap();
            assert!(out.dist(&y) <= 6.0 * (n * n) as f64 * d + 1e-12);
        }
    }
    // Arity 1: the identity at every parameter.
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let phi = random_expansion(&mut rng, 2, 1.2);
    let t = tube_on(phi, 0.01, Point(0.3), &[0.0, 0.0]);
    let out = tpsi(&ConePoint::Unit, &[t], 1, 0.4, &Point(2.0)).unwrap();
    assert!(out.dist(&Point(2.0)) < 1e-15);
}

fn d1(df: u32, dl: u32) -> CkConePoint {
    CkConePoint::Point1 { df, dl }
}

fn ck_apex(n: usize, marks: &[u32]) -> CkConePoint {
    CkConePoint::Apex {
        arity: n,
        marks: marks.to_vec(),
    }
}

/// Random marked cone point of the requested arity with few marks.
pub(crate) fn random_ck_point<R: Rng>(rng: &mut R, n: usize, max_marks: u32) -> CkConePoint {
    if n == 1 {
        let df = rng.gen_range(0..=max_marks);
        return d1(df, rng.gen_range(0..=max_marks - df.min(max_marks)));
    }
    let style = rng.gen_range(0..3);
    match style {
        0 => {
            let mut marks = vec![0u32; n + 1];
            let mut budget = max_marks;
            for m in marks.iter_mut() {
                let take = rng.gen_range(0..=budget);
                *m = take;
                budget -= take;
            }
            ck_apex(n, &marks)
        }
        1 => {
            // Graft a one-point factor at a leaf.
            let inner = if rng.gen_bool(0.5) { d1(1, 0) } else { d1(0, 1) };
            let base = random_ck_point(rng, n, max_marks.saturating_sub(1));
            let i = rng.gen_range(1..=n);
            let c = ck_compose(&base, i, &inner);
            scale_last(c, rng.gen_range(0.0..=1.0))
        }
        _ => {
            if n < 3 {
                return random_ck_point(rng, n, max_marks);
            }
            let n1 = rng.gen_range(2..n);
            let n2 = n + 1 - n1;
            let left = random_ck_point(rng, n1, max_marks / 2);
            let right = random_ck_point(rng, n2, max_marks / 2);
            let i = rng.gen_range(1..=n1);
            let c = ck_compose(&left, i, &right);
            scale_last(c, rng.gen_range(0.0..=1.0))
        }
    }
}

fn scale_last(p: CkConePoint, t: f64) -> CkConePoint {
    match p {
        CkConePoint::Cone { i, left, right, .. } => CkConePoint::Cone { t, i, left, right },
        other => other,
    }
}

#[test]
fn z_base_case_and_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    // Arity 1: every slot is the projection of the vector.
    let phi = random_expansion(&mut rng, 2, 1.3);
    let tube = tube_on(phi, 0.02, Point(0.7), &[0.003, -0.001]);
    let p = d1(2, 1);
    let zs = z_values(&p, &[tube.clone()]).unwrap();
    let bp = tube.basepoint().unwrap();
    assert_eq!(zs.len(), 3);
    for z in zs {
        assert!(z.dist(&bp) < 1e-12);
    }

    for _ in 0..400 {
        let n = rng.gen_range(1..=3usize);
        let t = random_ck_point(&mut rng, n, 2);
        if t.slots().is_empty() {
            continue;
        }
        let dims: Vec<usize> = (0..n).map(|_| 2).collect();
        let tubes = if n == 1 {
            let phi = random_expansion(&mut rng, 2, 1.3);
            let eps = rng.gen_range(0.01..EPS_MAX);
            let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
            let r = rng.gen_range(0.0..eps / 2.0);
            vec![tube_on(phi, eps, y, &[r, 0.0])]
        } else {
            random_gated_tubes(&mut rng, &t.forget(), &dims)
        };
        let phi = Expansion::product(&tubes.iter().map(|t| &t.phi).collect::<Vec<_>>());
        let v = vec_all_test(&tubes);
        let d = dist_to_image(&phi, &v);
        let zs = z_values(&t, &tubes).unwrap();
        for z in zs {
            let img = phi.apply_point(&z);
            let gap: f64 = img
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(
                gap <= 4.0 * n as f64 * phi.c * d + 1e-12,
                "correction point bound: {gap} vs {}",
                4.0 * n as f64 * phi.c * d
            );
        }
    }
}

#[test]
fn omega_endpoints_and_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..300 {
        let n = rng.gen_range(1..=3usize);
        let t = random_ck_point(&mut rng, n, 2);
        let slots = t.slots();
        if slots.is_empty() {
            continue;
        }
        let tubes = if n == 1 {
            let phi = random_expansion(&mut rng, 2, 1.3);
            let eps = rng.gen_range(0.01..EPS_MAX);
            let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
            let r = rng.gen_range(0.0..eps / 2.0);
            vec![tube_on(phi, eps, y, &[0.0, r])]
        } else {
            let dims: Vec<usize> = (0..n).map(|_| 2).collect();
            random_gated_tubes(&mut rng, &t.forget(), &dims)
        };
        let phi = Expansion::product(&tubes.iter().map(|t| &t.phi).collect::<Vec<_>>());
        let v = vec_all_test(&tubes);
        let d = dist_to_image(&phi, &v);
        let joint = pi_phi(&phi, &v).unwrap();
        let slot = rng.gen_range(0..slots.len());
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        // s = 1: the identity.
        let at1 = omega(&t, &tubes, slot, 1.0, &y).unwrap();
        assert!(at1.dist(&y) < 1e-9, "identity endpoint");
        // s = 0 at the correction point: the joint basepoint.
        let z = z_point(&t, &tubes, slot).unwrap();
        let at0 = omega(&t, &tubes, slot, 0.0, &z).unwrap();
        assert!(at0.dist(&joint) < 1e-9, "correction endpoint");
        // The lift stays near the embedding.
        let s = rng.gen_range(0.0..1.0);
        let hat = omega_hat(&t, &tubes, slot, s, &y).unwrap();
        let img = phi.apply_point(&y);
        let gap: f64 = hat
            .iter()
            .zip(&img)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(
            gap <= 10f64.powi(n as i32) * phi.c * d + 1e-12,
            "lift bound {gap} vs {}",
            10f64.powi(n as i32) * phi.c * d
        );
    }
}

#[test]
fn loop_concat_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let f = MonotoneSurj::identity();
    let u = k2();
    let y1 = Point(0.4);
    let y2 = Point(0.41);
    let phi1 = random_expansion(&mut rng, 2, 1.2);
    let phi2 = random_expansion(&mut rng, 3, 1.2);
    let t1 = tube_on(phi1, 0.03, y1, &[0.0, 0.0]);
    let t2 = tube_on(phi2, 0.03, y2, &[0.0, 0.0, 0.0]);
    let l1 = LoopSample::arc(t1.basepoint().unwrap(), 0.5, 32);
    let l2 = LoopSample::arc(t2.basepoint().unwrap(), 0.3, 32);
    match loop_concat(&f, &u, &[(t1.clone(), l1), (t2.clone(), l2)]).unwrap() {
        Concat::Loop(tube, sample) => {
            sample.validate().unwrap();
            // The output basepoint is the joint projection.
            let bp = tube.basepoint().unwrap();
            assert!(sample.eval(0.0).dist(&bp) < 1e-9);
            assert!((tube.eps - teps(&u, &scales(&[t1, t2]))).abs() < 1e-15);
        }
        Concat::Collapsed => panic!("nearby basepoints must not collapse"),
    }

    // Far-apart basepoints collapse.
    let t1 = tube_on(random_expansion(&mut rng, 2, 1.2), 0.03, Point(0.0), &[0.0, 0.0]);
    let t2 = tube_on(
        random_expansion(&mut rng, 2, 1.2),
        0.03,
        Point(2.0),
        &[0.0, 0.0],
    );
    let l1 = LoopSample::arc(t1.basepoint().unwrap(), 0.5, 8);
    let l2 = LoopSample::arc(t2.basepoint().unwrap(), 0.5, 8);
    let out = loop_concat(&f, &u, &[(t1, l1), (t2, l2)]).unwrap();
    assert!(out.is_collapsed());
}

#[test]
fn loop_concat_block_boundary_continuity() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..30 {
        let n = rng.gen_range(2..=3usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let f = crate::surj::random_surj(&mut rng, 3);
        let tubes = random_gated_tubes(&mut rng, &u, &vec![2; n]);
        let loops: Vec<(TubePoint, LoopSample)> = tubes
            .iter()
            .map(|t| {
                (
                    t.clone(),
                    LoopSample::arc(t.basepoint().unwrap(), rng.gen_range(0.1..1.0), 16),
                )
            })
            .collect();
        let fns: Vec<Box<dyn Fn(f64) -> Point>> = loops
            .iter()
            .map(|(_, s)| {
                let s = s.clone();
                Box::new(move |t: f64| s.eval(t)) as Box<dyn Fn(f64) -> Point>
            })
            .collect();
        let inputs: Vec<(TubePoint, &dyn Fn(f64) -> Point)> = loops
            .iter()
            .zip(fns.iter())
            .map(|((tp, _), f)| (tp.clone(), f.as_ref() as &dyn Fn(f64) -> Point))
            .collect();
        // At block boundaries the two block formulas agree.
        for i in 1..n {
            let target = crate::rat(i as i64, n as i64);
            let (lo, hi) = f.preimage(&target);
            for t in [lo, hi] {
                let tf: f64 = {
                    let num: f64 = t.numer().to_string().parse().unwrap();
                    let den: f64 = t.denom().to_string().parse().unwrap();
                    num / den
                };
                let left_val = {
                    let idx = i;
                    let local = 1.0;
                    let p = (inputs[idx - 1].1)(local);
                    psi(&u, &tubes, idx, &p).unwrap()
                };
                let right_val = {
                    let idx = i + 1;
                    let local = 0.0;
                    let p = (inputs[idx - 1].1)(local);
                    psi(&u, &tubes, idx, &p).unwrap()
                };
                assert!(left_val.dist(&right_val) < 1e-9, "boundary mismatch");
                let through = concat_eval(&f, &u, &inputs, tf).unwrap();
                assert!(through.dist(&left_val) < 1e-9);
            }
        }
    }
}

#[test]
fn counterexample_gap_behaviour() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..100 {
        let k = rng.gen_range(2..=4usize);
        let phi = random_expansion(&mut rng, k, 1.6);
        let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
        let mut x = phi.apply_point(&y);
        for c in x.iter_mut() {
            *c += rng.gen_range(-0.02..0.02);
        }
        let w = phi.coords(&x);
        let x1 = [w[0] / phi.c, w[1] / phi.c];
        // At the closest point the gap vanishes.
        let (_, _, gap) = cohen_counterexample(&phi, &x, x1).unwrap();
        assert!(gap < 1e-12);
        // Off the closest point it is strictly positive.
        let t = [x1[0] + 0.05, x1[1] - 0.03];
        let (a, b, gap) = cohen_counterexample(&phi, &x, t).unwrap();
        assert!(gap > 1e-6);
        assert!((a[0] - x1[0]).abs() < 1e-12 && (b[0] - a[0]).abs() > 0.0);
        // Zero padding never moves the slice.
        let (_, _, gap0) = cohen_zero_padded(&phi, &x, rng.gen_range(-1.0..1.0));
        assert!(gap0 < 1e-15);
    }
    assert!(cohen_counterexample(&Expansion::plane(), &[0.0, 0.0], [0.1, 0.0]).is_err());
}

#[test]
fn product_projection_failure_demo() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    // Distinct projections give a positive gap.
    let e1 = tube_on(random_expansion(&mut rng, 2, 1.2), 0.02, Point(0.3), &[0.0, 0.0]);
    let e2 = tube_on(random_expansion(&mut rng, 3, 1.2), 0.02, Point(0.5), &[0.0; 3]);
    let (_, _, gap) = ms_failure_demo(&e1, &e2).unwrap();
    assert!(gap > 1e-6);
    // Equal projections: no gap.
    let e2 = tube_on(random_expansion(&mut rng, 3, 1.2), 0.02, Point(0.3), &[0.0; 3]);
    let (_, _, gap) = ms_failure_demo(&e1, &e2).unwrap();
    assert!(gap < 1e-9);
    // The gated concatenation hides the failure through its basepoint.
    let f = MonotoneSurj::identity();
    let y1 = Point(0.30);
    let y2 = Point(0.31);
    let t1 = tube_on(random_expansion(&mut rng, 2, 1.1), 0.05, y1, &[0.0, 0.0]);
    let t2 = tube_on(random_expansion(&mut rng, 2, 1.1), 0.05, y2, &[0.0, 0.0]);
    let l1 = LoopSample::arc(t1.basepoint().unwrap(), 0.4, 16);
    let l2 = LoopSample::arc(t2.basepoint().unwrap(), 0.2, 16);
    if let Concat::Loop(tube, sample) = loop_concat(&f, &k2(), &[(t1, l1), (t2, l2)]).unwrap() {
        let bp = tube.basepoint().unwrap();
        assert!(sample.eval(0.0).dist(&bp) < 1e-9, "perturbed product gap vanishes");
    } else {
        panic!("close basepoints concatenate");
    }
}

#[test]
fn psi_action_compatibilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    for _ in 0..100 {
        let n = rng.gen_range(2..=3usize);
        let u = crate::assoc::random_cone_point(&mut rng, n);
        if u.arity() < 2 {
            continue;
        }
        let tubes = random_gated_tubes(&mut rng, &u, &vec![2; n]);
        let factors: Vec<LElement> = tubes
            .iter()
            .map(|t| LElement {
                points: (0..rng.gen_range(0..3))
                    .map(|_| Point(rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect(),
                tube: t.clone(),
            })
            .collect();
        let image = psi_action(&u, &factors).unwrap();
        // First-coface square.
        let lhs = image.coface(0).unwrap();
        let mut with_d0 = factors.clone();
        with_d0[0] = with_d0[0].coface(0).unwrap();
        let rhs = psi_action(&u, &with_d0).unwrap();
        assert_eq!(lhs.points.len(), rhs.points.len());
        for (a, b) in lhs.points.iter().zip(&rhs.points) {
            assert!(a.dist(b) < 1e-9, "first coface compatibility");
        }
        // Last-coface square.
        let top = image.points.len() + 1;
        let lhs = image.coface(top).unwrap();
        let mut with_dtop = factors.clone();
        let ptop = with_dtop[n - 1].points.len() + 1;
        with_dtop[n - 1] = with_dtop[n - 1].coface(ptop).unwrap();
        let rhs = psi_action(&u, &with_dtop).unwrap();
        for (a, b) in lhs.points.iter().zip(&rhs.points) {
            assert!(a.dist(b) < 1e-9, "last coface compatibility");
        }
        // Codegeneracies are pure bookkeeping.
        if !factors[0].points.is_empty() {
            let lhs = image.codegeneracy(0).unwrap();
            let mut with_s = factors.clone();
            with_s[0] = with_s[0].codegeneracy(0).unwrap();
            let rhs = psi_action(&u, &with_s).unwrap();
            assert_eq!(lhs.points.len(), rhs.points.len());
            for (a, b) in lhs.points.iter().zip(&rhs.points) {
                assert!(a.dist(b) < 1e-12);
            }
        }
    }
}
