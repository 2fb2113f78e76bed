use approx::assert_relative_eq;
use lgt_core::group::{builtin_group, class_index, conjugacy_classes, delta_g, phi_beta, ClassFunction};
use lgt_core::{Element, GaugeGroup, GroupError, GroupFamily, GroupTable, UnitaryRep};
use num_complex::Complex;
use proptest::prelude::*;

fn families() -> Vec<GroupFamily> {
    vec![
        GroupFamily::Cyclic(2),
        GroupFamily::Cyclic(3),
        GroupFamily::Cyclic(5),
        GroupFamily::Dihedral(4),
        GroupFamily::Symmetric3,
        GroupFamily::Quaternion8,
    ]
}

fn build(f: &GroupFamily) -> (GroupTable, UnitaryRep<f64>) {
    builtin_group(f).unwrap()
}

#[test]
fn parse_families() {
    assert_eq!(GroupFamily::parse("cyclic", &[3]).unwrap(), GroupFamily::Cyclic(3));
    assert_eq!(GroupFamily::parse("S", &[3]).unwrap(), GroupFamily::Symmetric3);
    assert!(matches!(GroupFamily::parse("lie", &[]), Err(GroupError::UnknownFamily(_))));
    assert!(matches!(GroupFamily::parse("symmetric", &[4]), Err(GroupError::InvalidParameter { .. })));
    assert!(matches!(builtin_group::<f64>(&GroupFamily::Cyclic(0)), Err(GroupError::InvalidParameter { .. })));
}

#[test]
fn z2_is_self_inverse() {
    let (t, _) = build(&GroupFamily::Cyclic(2));
    assert_eq!(t.order(), 2);
    assert!(t.elements().all(|g| t.inv(g) == g));
}

#[test]
fn class_structure_matches_brute_force() {
    let (s3, _) = build(&GroupFamily::Symmetric3);
    let mut sizes: Vec<usize> = conjugacy_classes(&s3).iter().map(|c| c.len()).collect();
    assert_eq!(s3.order(), 6);
    assert_eq!(sizes.len(), 3);
    sizes.sort();
    assert_eq!(sizes, vec![1, 2, 3]);
    let (q8, _) = build(&GroupFamily::Quaternion8);
    assert_eq!(q8.center().len(), 2);
    assert_eq!(conjugacy_classes(&q8).len(), 5);
    let (z2, _) = build(&GroupFamily::Cyclic(2));
    assert_eq!(conjugacy_classes(&z2), vec![vec![Element(0)], vec![Element(1)]]);
}

#[test]
fn classes_partition_and_agree_with_conjugation() {
    for f in families() {
        let (t, _) = build(&f);
        let classes = conjugacy_classes(&t);
        assert_eq!(classes[0], vec![Element::IDENTITY]);
        let idx = class_index(&t);
        let total: usize = classes.iter().map(|c| c.len()).sum();
        assert_eq!(total, t.order());
        for g in t.elements() {
            for h in t.elements() {
                assert_eq!(idx[t.conjugate(g, h).index()], idx[g.index()]);
            }
        }
    }
}

#[test]
fn representations_are_unitary_homomorphisms_and_characters_are_class_functions() {
    for f in families() {
        let (t, rep) = build(&f);
        rep.validate(&t, 1e-12).unwrap();
        assert_relative_eq!(rep.chi(Element::IDENTITY).re, rep.dim() as f64, epsilon = 1e-12);
        for g in t.elements() {
            for h in t.elements() {
                assert!((rep.chi(t.conjugate(g, h)) - rep.chi(g)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn gaps() {
    let gap = |f| {
        let (t, r) = build(&f);
        delta_g(&t, &r).unwrap()
    };
    assert_relative_eq!(gap(GroupFamily::Cyclic(2)), 2.0, epsilon = 1e-12);
    assert_relative_eq!(gap(GroupFamily::Cyclic(3)), 1.0 - (2.0 * std::f64::consts::PI / 3.0).cos(), epsilon = 1e-12);
    assert_relative_eq!(gap(GroupFamily::Cyclic(3)), 1.5, epsilon = 1e-12);
    assert_relative_eq!(gap(GroupFamily::Symmetric3), 2.0, epsilon = 1e-12);
}

#[test]
fn gapless_representation_is_rejected() {
    let (t, _) = build(&GroupFamily::Cyclic(2));
    let trivial = UnitaryRep::new(1, vec![vec![Complex::new(1.0, 0.0)]; 2]);
    assert!(matches!(delta_g(&t, &trivial), Err(GroupError::NoGap(_))));
    assert!(GaugeGroup::new(t, trivial).is_err());
}

#[test]
fn phi_values() {
    let (z2, r2) = build(&GroupFamily::Cyclic(2));
    let (_, r3) = build(&GroupFamily::Cyclic(3));
    assert_eq!(phi_beta(&r2, 3.7, Element::IDENTITY), 1.0);
    assert_relative_eq!(phi_beta(&r2, 1.0, Element(1)), 0.135335283236613, epsilon = 1e-12);
    assert_relative_eq!(phi_beta(&r3, 2.0, Element(1)), (-3.0f64).exp(), epsilon = 1e-12);
    let _ = z2;
}

#[test]
fn thresholds() {
    let z2 = GaugeGroup::<f64>::builtin(&GroupFamily::Cyclic(2)).unwrap();
    assert!((z2.beta_threshold().unwrap() - 58.386).abs() < 1e-3);
    let s3 = GaugeGroup::<f64>::builtin(&GroupFamily::Symmetric3).unwrap();
    assert!((s3.beta_threshold().unwrap() - 60.584).abs() < 1e-3);
    // Doubling the representation doubles the gap and halves the threshold.
    let doubled = GaugeGroup::new(z2.table.clone(), z2.rep.direct_sum(&z2.rep)).unwrap();
    assert_relative_eq!(doubled.delta(), 4.0, epsilon = 1e-12);
    let expected = (114.0 + 4.0 * 2f64.ln()) / 4.0;
    assert_relative_eq!(doubled.beta_threshold().unwrap(), expected, epsilon = 1e-12);
    let (trivial, rep) = builtin_group::<f64>(&GroupFamily::Cyclic(1)).unwrap();
    assert!(matches!(delta_g(&trivial, &rep), Err(GroupError::TrivialGroup)));
}

#[test]
fn non_group_tables_are_rejected() {
    assert!(GroupTable::from_mult("bad", 2, vec![0, 1, 1, 1]).is_err());
    assert!(GroupTable::from_mult("bad", 2, vec![0, 1, 1]).is_err());
    assert!(GroupTable::from_mult("z2", 2, vec![0, 1, 1, 0]).is_ok());
}

#[test]
fn class_function_validation() {
    let (s3, rep) = build(&GroupFamily::Symmetric3);
    let chi = ClassFunction::new(rep.character().to_vec());
    chi.validate(&s3, 1e-12).unwrap();
    let mut v = vec![0.0; 6];
    v[1] = 1.0;
    assert!(matches!(ClassFunction::from_real(&v).validate(&s3, 1e-12), Err(GroupError::NotClassFunction(..))));
}

proptest! {
    #[test]
    fn phi_nonincreasing_in_beta(f in 0usize..6, b1 in 0.0f64..5.0, db in 0.0f64..5.0, gi in 0usize..8) {
        let fam = &families()[f];
        let (t, rep) = build(fam);
        let g = t.element(gi % t.order());
        let a = phi_beta(&rep, b1, g);
        let b = phi_beta(&rep, b1 + db, g);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn weight_products_depend_only_on_classes(f in 0usize..6, items in proptest::collection::vec((0usize..8, 0usize..8), 1..8), beta in 0.0f64..3.0) {
        let fam = &families()[f];
        let (t, rep) = build(fam);
        let direct: f64 = items.iter().map(|&(g, _)| phi_beta(&rep, beta, t.element(g % t.order()))).product();
        let conj: f64 = items
            .iter()
            .map(|&(g, h)| phi_beta(&rep, beta, t.conjugate(t.element(g % t.order()), t.element(h % t.order()))))
            .product();
        prop_assert!((direct - conj).abs() <= 1e-12 * direct);
    }

    #[test]
    fn associativity(f in 0usize..6, a in 0usize..8, b in 0usize..8, c in 0usize..8) {
        let (t, rep) = build(&families()[f]);
        let (a, b, c) = (t.element(a % t.order()), t.element(b % t.order()), t.element(c % t.order()));
        prop_assert_eq!(t.mul(t.mul(a, b), c), t.mul(a, t.mul(b, c)));
        prop_assert_eq!(t.mul(a, t.inv(a)), Element::IDENTITY);
        prop_assert!((rep.chi(t.mul(a, t.inv(a))).re - rep.dim() as f64).abs() < 1e-12);
    }
}
