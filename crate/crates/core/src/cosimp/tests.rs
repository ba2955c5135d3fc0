use super::discrete::*;
use super::*;
use crate::cofacial::{enumerate_component, CofacialTree};
use crate::rat;
use crate::trees::PlanarTree;

#[test]
fn hochschild_of_rationals_is_trivial() {
    let a = Algebra::rationals();
    let b = Bimodule::regular(&a);
    let (x, mu) = hochschild(&a, &b, 4).unwrap();
    x.validate().unwrap();
    assert!(x.dims.iter().all(|&d| d == 1));
    for p in 0..4 {
        for i in 0..=p + 1 {
            assert_eq!(x.d[p][i], Matrix::identity(1));
        }
    }
    assert!(ms_check(&x, &mu).passed());
}

#[test]
fn hochschild_first_coface_is_left_action() {
    // On CH^0 = B, d^0 sends b to the functional a -> a . b.
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &b, 2).unwrap();
    let d0 = &x.d[0][0];
    // Column b, row (alpha = [j], k): coefficient of e_k in a_j . e_b.
    for bb in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(*d0.get(j * 2 + k, bb), b.left[j][bb][k]);
            }
        }
    }
}

#[test]
fn hochschild_identities_hold_exactly() {
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &b, 3).unwrap();
    x.validate().unwrap();
    let a = Algebra::m2q();
    let b = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &b, 2).unwrap();
    x.validate().unwrap();
}

#[test]
fn ms_check_passes_on_hochschild_and_zero() {
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (x, mu) = hochschild(&a, &b, 4).unwrap();
    let report = ms_check(&x, &mu);
    assert!(report.passed(), "violations: {:?}", report.violations);
    assert!(report.checks > 50);

    // The zero product passes trivially.
    let zero = MsProduct {
        n: x.n,
        mats: (0..=x.n)
            .map(|p| {
                (0..=x.n - p)
                    .map(|q| Matrix::zero(x.dims[p + q], x.dims[p] * x.dims[q]))
                    .collect()
            })
            .collect(),
    };
    assert!(ms_check(&x, &zero).passed());
}

#[test]
fn ms_check_detects_perturbed_coface() {
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (mut x, mu) = hochschild(&a, &b, 3).unwrap();
    // Perturb d^0 out of degree 1.
    let v = x.d[1][0].get(0, 0) + rat(1, 1);
    x.d[1][0].set(0, 0, v);
    let report = ms_check(&x, &mu);
    assert!(!report.passed());
    assert!(report
        .violations
        .iter()
        .any(|v| v.family == "coface" || v.family == "hinge"));
}

#[test]
fn box_with_constant_factors() {
    // c(V) box c(W) has degree-0 part V (x) W.
    let v = TruncatedCosimplicial::constant(2, 3);
    let w = TruncatedCosimplicial::constant(3, 3);
    let b = box_product(&v, &w).unwrap();
    b.validate().unwrap();
    assert_eq!(b.dims[0], 6);
    // X box c(Q) has the dimensions of X in every degree.
    let a = Algebra::dual_numbers();
    let bm = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &bm, 3).unwrap();
    let unit = TruncatedCosimplicial::constant(1, 3);
    let xb = box_product(&x, &unit).unwrap();
    xb.validate().unwrap();
    assert_eq!(xb.dims, x.dims);
    let bx = box_product(&unit, &x).unwrap();
    bx.validate().unwrap();
    assert_eq!(bx.dims, x.dims);
}

#[test]
fn box_dimension_matches_rank_oracle() {
    let a = Algebra::dual_numbers();
    let bm = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &bm, 3).unwrap();
    let b = box_product(&x, &x).unwrap();
    b.validate().unwrap();
    for r in 0..=3 {
        assert_eq!(b.dims[r], box_dim_oracle(&x, &x, r), "degree {r}");
    }
    // Degree 2 by hand: blocks 2*8 + 4*4 + 8*2 = 48 minus the glue rank.
    assert_eq!(box_ambient_dim(&x, &x, 2), 48);
}

#[test]
fn hochschild_cohomology_ranks() {
    // Dual numbers: HH^0 has rank 2 (the algebra is commutative), HH^1 has
    // rank 1 (x-derivations modulo inner).
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &b, 3).unwrap();
    let normalized = total_cohomology(&x, true);
    let plain = total_cohomology(&x, false);
    assert_eq!(normalized[0], 2);
    assert_eq!(normalized[1], 1);
    assert_eq!(plain[0], 2, "unnormalized oracle degree 0");
    assert_eq!(plain[1], 1, "unnormalized oracle degree 1");

    // 2x2 matrices: HH^0 = Q, HH^1 = 0.
    let a = Algebra::m2q();
    let b = Bimodule::regular(&a);
    let (x, _) = hochschild(&a, &b, 2).unwrap();
    let normalized = total_cohomology(&x, true);
    let plain = total_cohomology(&x, false);
    assert_eq!(normalized[0], 1);
    assert_eq!(normalized[1], 0);
    assert_eq!(plain[0], 1);
    assert_eq!(plain[1], 0);
}

#[test]
fn cup_with_unit_class_is_identity_in_degree_zero() {
    let a = Algebra::dual_numbers();
    let b = Bimodule::regular(&a);
    let (x, mu) = hochschild(&a, &b, 3).unwrap();
    // Degree-0 classes are the kernel of the alternating coface sum; the
    // unit of the algebra is one of them.
    let unit = a.unit.clone();
    let delta0 = x.d[0][0].sub(&x.d[0][1]);
    assert!(delta0.apply(&unit).iter().all(|c| c.is_zero()));
    for basis in 0..x.dims[0] {
        let mut z = vec![rat(0, 1); x.dims[0]];
        z[basis] = rat(1, 1);
        if !delta0.apply(&z).iter().all(|c| c.is_zero()) {
            continue;
        }
        assert_eq!(cup(&mu, 0, 0, &unit, &z).unwrap(), z);
        assert_eq!(cup(&mu, 0, 0, &z, &unit).unwrap(), z);
    }
    assert!(cup(&mu, 2, 2, &vec![], &vec![]).is_err());
}

#[test]
fn algebra_json_roundtrip_and_validation() {
    let a = Algebra::m2q();
    let j = a.to_json();
    let back = Algebra::from_json(&j).unwrap();
    assert_eq!(back.mul, a.mul);
    // A broken algebra is rejected.
    let bad = serde_json::json!({
        "dim": 1,
        "unit": ["1"],
        "mul": ["0 0 0 2"],
    });
    assert!(Algebra::from_json(&bad).is_err());
}

// -- discrete models ----------------------------------------------------------

fn ctx2() -> Vec<CosimplicialSet> {
    vec![
        CosimplicialSet::hom_delta(1, 6),
        CosimplicialSet::hom_delta(0, 6),
    ]
}

#[test]
fn hom_delta_satisfies_cosimplicial_identities() {
    let x = CosimplicialSet::hom_delta(1, 4);
    for p in 0..3usize {
        for idx in 0..x.levels[p].len() {
            for j in 0..=p + 2 {
                for i in 0..j {
                    assert_eq!(
                        x.d(p + 1, j, x.d(p, i, idx)),
                        x.d(p + 1, i, x.d(p, j - 1, idx))
                    );
                }
            }
            for i in 0..=p + 1 {
                let y = x.d(p, i, idx);
                for j in 0..=p {
                    let z = x.s(p + 1, j, y);
                    if i == j || i == j + 1 {
                        assert_eq!(z, idx);
                    }
                }
            }
        }
    }
}

#[test]
fn mck_relation_trades_leaf_marks_for_cofaces() {
    let ctx = ctx2();
    let base = CofacialTree::unmarked(PlanarTree::corolla(2));
    let x1 = (1usize, 2usize);
    let x2 = (0usize, 0usize);
    // u composed with a first-coface symbol at leaf 1.
    let marked = base.compose(1, &CofacialTree::one_tree(1, 0)).unwrap();
    let e1 = MckElement::new(marked, vec![x1, x2], &ctx);
    let d0x = (2, ctx[0].d(1, 0, 2));
    let e2 = MckElement::new(base.clone(), vec![d0x, x2], &ctx);
    assert_eq!(e1, e2);
    // Last-coface symbol trades for the top coface.
    let marked = base.compose(2, &CofacialTree::one_tree(0, 1)).unwrap();
    let e1 = MckElement::new(marked, vec![x1, x2], &ctx);
    let dtop = (1, ctx[1].d(0, 1, 0));
    let e2 = MckElement::new(base.clone(), vec![x1, dtop], &ctx);
    assert_eq!(e1, e2);
    // Arity-1 symbols collapse onto the entry entirely.
    let ctx1 = vec![CosimplicialSet::hom_delta(1, 6)];
    let e = MckElement::new(CofacialTree::one_tree(2, 1), vec![(0, 0)], &ctx1);
    assert!(e.tree.total_marks() == 0);
    assert_eq!(e.xs[0].0, 3);
    assert_eq!(e.degree(), 3);
}

/// Exhaustive small range: arity <= 2, total marks <= 2, entries of degree
/// <= 1 from the standard truncated sets.
fn small_elements() -> (Vec<CosimplicialSet>, Vec<MckElement>) {
    let ctx = ctx2();
    let mut out = Vec::new();
    let mut marksets = Vec::new();
    for m0 in 0..=2u32 {
        for m1 in 0..=2u32 - m0 {
            for m2 in 0..=2u32 - m0 - m1 {
                marksets.push(vec![m0, m1, m2]);
            }
        }
    }
    for marks in marksets {
        for t in enumerate_component(2, &marks) {
            for p1 in 0..=1usize {
                for i1 in 0..ctx[0].levels[p1].len() {
                    for p2 in 0..=1usize {
                        for i2 in 0..ctx[1].levels[p2].len() {
                            out.push(MckElement::new(
                                t.clone(),
                                vec![(p1, i1), (p2, i2)],
                                &ctx,
                            ));
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|e| format!("{e:?}"));
    out.dedup();
    (ctx, out)
}

#[test]
fn mck_operators_satisfy_cosimplicial_identities() {
    let (ctx, elements) = small_elements();
    assert!(elements.len() > 100);
    for e in &elements {
        let l = e.degree();
        // dd.
        for i in 0..=l + 1 {
            let di = e.coface(i, &ctx).unwrap();
            for j in (i + 1)..=l + 2 {
                let lhs = di.coface(j, &ctx).unwrap();
                let rhs = e.coface(j - 1, &ctx).unwrap().coface(i, &ctx).unwrap();
                assert_eq!(lhs, rhs, "dd at {e:?} i={i} j={j}");
            }
            // sd cases.
            for j in 0..=l {
                let lhs = di.codegeneracy(j, &ctx).unwrap();
                let rhs = if i == j || i == j + 1 {
                    e.clone()
                } else if i < j {
                    e.codegeneracy(j - 1, &ctx).unwrap().coface(i, &ctx).unwrap()
                } else {
                    e.codegeneracy(j, &ctx).unwrap().coface(i - 1, &ctx).unwrap()
                };
                assert_eq!(lhs, rhs, "sd at {e:?} i={i} j={j}");
            }
        }
        // ss.
        if l >= 2 {
            for a in 0..=l - 1 {
                let sa = e.codegeneracy(a, &ctx).unwrap();
                for b in 0..a {
                    let lhs = sa.codegeneracy(b, &ctx).unwrap();
                    let rhs = e
                        .codegeneracy(b, &ctx)
                        .unwrap()
                        .codegeneracy(a - 1, &ctx)
                        .unwrap();
                    assert_eq!(lhs, rhs, "ss at {e:?} a={a} b={b}");
                }
            }
        }
    }
}

#[test]
fn unmarked_elements_reduce_to_box_operators() {
    let (ctx, elements) = small_elements();
    for e in elements
        .iter()
        .filter(|e| e.tree.total_marks() == 0)
    {
        let f = e.forget(&ctx);
        let l = e.degree();
        for j in 0..=l + 1 {
            let viae = e.coface(j, &ctx).unwrap().forget(&ctx);
            let viaf = f.coface(j, &ctx).unwrap();
            assert_eq!(viae, viaf, "coface {j} on unmarked {e:?}");
        }
        for j in 0..l {
            let viae = e.codegeneracy(j, &ctx).unwrap().forget(&ctx);
            let viaf = f.codegeneracy(j, &ctx).unwrap();
            assert_eq!(viae, viaf, "codegeneracy {j} on unmarked {e:?}");
        }
    }
}

#[test]
fn forget_commutes_with_operators() {
    let (ctx, elements) = small_elements();
    for e in &elements {
        let l = e.degree();
        let f = e.forget(&ctx);
        assert_eq!(f.degree(), l, "forget preserves degree of {e:?}");
        for j in 0..=l + 1 {
            let lhs = e.coface(j, &ctx).unwrap().forget(&ctx);
            let rhs = f.coface(j, &ctx).unwrap();
            assert_eq!(lhs, rhs, "forget/d^{j} at {e:?}");
        }
        for j in 0..l {
            let lhs = e.codegeneracy(j, &ctx).unwrap().forget(&ctx);
            let rhs = f.codegeneracy(j, &ctx).unwrap();
            assert_eq!(lhs, rhs, "forget/s^{j} at {e:?}");
        }
    }
}

#[test]
fn forget_respects_monad_composition() {
    // The composite's counted marks merge, so the forgetful image of a
    // composition equals the splice of the forgetful images with the slot
    // boundary prefixes reapplied: the inner block's head absorbs
    // df^{m_{i-1}} of the outer tree and, when the block is last, its tail
    // absorbs dl^{m_n} first. Both routes must agree after the box-product
    // normal form.
    let outer_ctx = ctx2();
    let inner_ctx = vec![
        CosimplicialSet::hom_delta(0, 6),
        CosimplicialSet::hom_delta(1, 6),
    ];
    let inner = MckElement::new(
        CofacialTree::maximum(2, &[1, 0, 1]),
        vec![(1, 1), (0, 0)],
        &inner_ctx,
    );
    for marks in [vec![0u32, 0, 0], vec![1, 0, 0], vec![0, 1, 1], vec![1, 1, 1]] {
        for t in enumerate_component(2, &marks) {
            let e = MckElement::new(t.clone(), vec![(1, 2), (0, 0)], &outer_ctx);
            let m = e.tree.m_counts();
            for i in 1..=2usize {
                let spliced: Vec<CosimplicialSet> = if i == 1 {
                    vec![
                        inner_ctx[0].clone(),
                        inner_ctx[1].clone(),
                        outer_ctx[1].clone(),
                    ]
                } else {
                    vec![
                        outer_ctx[0].clone(),
                        inner_ctx[0].clone(),
                        inner_ctx[1].clone(),
                    ]
                };
                let lhs = e.compose(i, &inner, &spliced).forget(&spliced);

                let outer_word = e.forget_word_raw(&outer_ctx);
                let mut inner_word = inner.forget_word_raw(&inner_ctx);
                // Reapply the boundary prefixes lost with the consumed slot.
                if i == e.xs.len() {
                    let last = inner_word.len() - 1;
                    let (mut p, mut idx) = inner_word[last];
                    for _ in 0..m[e.xs.len()] {
                        idx = spliced[i - 1 + last].d(p, p + 1, idx);
                        p += 1;
                    }
                    inner_word[last] = (p, idx);
                }
                let (mut p, mut idx) = inner_word[0];
                for _ in 0..m[i - 1] {
                    idx = spliced[i - 1].d(p, 0, idx);
                    p += 1;
                }
                inner_word[0] = (p, idx);
                let mut word = Vec::new();
                word.extend_from_slice(&outer_word[..i - 1]);
                word.extend_from_slice(&inner_word);
                word.extend_from_slice(&outer_word[i..]);
                let rhs = MkElement::new(
                    e.tree.forget().compose(i, &inner.tree.forget()).unwrap(),
                    word,
                    &spliced,
                );
                assert_eq!(lhs, rhs, "monad square at i={i} marks={marks:?}");
            }
        }
    }
}

#[test]
fn mck_degreewise_count_matches_normal_form_oracle() {
    let ctx = ctx2();
    for l in 0..=2usize {
        let brute = mck_count_by_degree(2, &ctx, 2, l);
        // Independent count: leaf-mark-free trees with given counts times
        // entry tuples of complementary degree.
        let mut direct = 0usize;
        for m0 in 0..=l as u32 {
            for m1 in 0..=l as u32 - m0 {
                for m2 in 0..=l as u32 - m0 - m1 {
                    let marks = vec![m0, m1, m2];
                    let total = (m0 + m1 + m2) as usize;
                    let leaf_free = enumerate_component(2, &marks)
                        .into_iter()
                        .filter(|t| {
                            use crate::cofacial::MarkPos;
                            let l1 = t.mark_multiplicity(&MarkPos::VDf(vec![0]))
                                + t.mark_multiplicity(&MarkPos::VDl(vec![0]));
                            let l2 = t.mark_multiplicity(&MarkPos::VDf(vec![1]))
                                + t.mark_multiplicity(&MarkPos::VDl(vec![1]));
                            l1 == 0 && l2 == 0
                        })
                        .count();
                    let rem = l - total;
                    let tuples: usize = (0..=rem)
                        .map(|p1| {
                            let p2 = rem - p1;
                            ctx[0].levels[p1].len() * ctx[1].levels[p2].len()
                        })
                        .sum();
                    direct += leaf_free * tuples;
                }
            }
        }
        assert_eq!(brute, direct, "degree {l}");
    }
}

