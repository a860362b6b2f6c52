use std::collections::BTreeSet;

use cogrowth::geometry::{elementary_closure_root, primitive_root, Axis, Projection};
use cogrowth::{Element, Group, GroupSpec, Letter, Word};
use proptest::prelude::*;

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..4, 0..max_len).prop_map(|codes| Word::reduce(codes.into_iter().map(Letter::from_code)))
}

fn cyclically_reduced() -> impl Strategy<Value = Word> {
    word(6).prop_filter("nontrivial and cyclically reduced", |w| !w.is_identity() && w.is_cyclically_reduced())
}

fn points(g: &Group, axis: &Axis, p: Projection) -> BTreeSet<Element> {
    (p.lo..=p.hi).map(|k| axis.point(g, k)).collect()
}

/// Nearest points by scanning the orbit around the identity directly.
fn brute_projection(g: &Group, root: &Word, x: &Element, reach: i64) -> (u32, BTreeSet<Element>) {
    let pts: Vec<Element> = (-reach..=reach).map(|k| Element::Free(root.pow(k))).collect();
    let d = pts.iter().map(|p| g.distance(p, x).unwrap()).min().unwrap();
    let near = pts.into_iter().filter(|p| g.distance(p, x).unwrap() == d).collect();
    (d, near)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_the_nearest_point_set(c in cyclically_reduced(), x in word(12)) {
        let g = Group::free(2);
        let axis = Axis::new(&g, &Element::Free(c.clone())).unwrap();
        let x = Element::Free(x);
        let p = axis.project(&g, &x).unwrap();
        let (d, near) = brute_projection(&g, &primitive_root(&c), &x, 20);
        prop_assert_eq!(p.dist, d);
        prop_assert_eq!(points(&g, &axis, p), near);
    }

    #[test]
    fn projection_is_equivariant(c in cyclically_reduced(), h in word(8), x in word(10)) {
        let g = Group::free(2);
        let axis = Axis::new(&g, &Element::Free(c)).unwrap();
        let (h, x) = (Element::Free(h), Element::Free(x));
        let p = axis.project(&g, &x).unwrap();
        let moved = axis.translate(&g, &h).unwrap();
        let q = moved.project(&g, &g.multiply(&h, &x).unwrap()).unwrap();
        prop_assert_eq!(p.dist, q.dist);
        let translated: BTreeSet<Element> =
            points(&g, &axis, p).iter().map(|y| g.multiply(&h, y).unwrap()).collect();
        prop_assert_eq!(points(&g, &moved, q), translated);
    }

    #[test]
    fn translating_by_the_stabilizer_fixes_the_axis(c in cyclically_reduced(), k in -3i64..=3) {
        let g = Group::free(2);
        let axis = Axis::new(&g, &Element::Free(c.clone())).unwrap();
        let moved = axis.translate(&g, &Element::Free(primitive_root(&c).pow(k))).unwrap();
        prop_assert_eq!(moved, axis);
    }

    #[test]
    fn powers_share_the_elementary_closure(c in cyclically_reduced(), n in 1i64..5, h in word(6)) {
        let g = Group::free(2);
        let root = primitive_root(&c);
        prop_assert_eq!(primitive_root(&c.pow(n)), root.clone());
        prop_assert_eq!(primitive_root(&c.pow(-n)), root.inverse());
        prop_assert_eq!(root.len() * (c.len() / root.len()), c.len());
        prop_assert_eq!(root.pow((c.len() / root.len()) as i64), c.clone());
        let e = elementary_closure_root(&g, &Element::Free(c.pow(n))).unwrap();
        prop_assert_eq!(e, Element::Free(root.clone()));
        // h·E(c)·h⁻¹ stabilizes the translated axis
        let axis = Axis::new(&g, &Element::Free(c)).unwrap();
        let moved = axis.translate(&g, &Element::Free(h.clone())).unwrap();
        let stab = Element::Free(root.pow(n).conjugate_by(&h.inverse()));
        prop_assert_eq!(moved.translate(&g, &stab).unwrap(), moved);
    }

    #[test]
    fn projection_diameter_is_bounded_for_axis_pairs(c in cyclically_reduced(), h in word(8)) {
        let g = Group::free(2);
        let axis = Axis::new(&g, &Element::Free(c)).unwrap();
        let other = axis.translate(&g, &Element::Free(h)).unwrap();
        prop_assume!(other != axis);
        let p = axis.project_axis(&g, &other).unwrap();
        let q = other.project_axis(&g, &axis).unwrap();
        // distinct translates of a primitive axis overlap in less than two periods
        prop_assert!(axis.diam(p) < 2 * axis.step(), "{:?}", p);
        prop_assert_eq!(p.dist, q.dist);
    }
}

#[test]
fn product_axes_exist_for_cyclically_reduced_components() {
    let h = Group::new(GroupSpec::direct_product(vec![2, 2])).unwrap();
    let axis = Axis::new(&h, &h.parse_element("(a,1)").unwrap()).unwrap();
    let p = axis.project(&h, &h.parse_element("(aab,b)").unwrap()).unwrap();
    assert_eq!(p.dist, 1);
    assert!(Axis::new(&h, &h.parse_element("(1,1)").unwrap()).is_err());
    assert!(Axis::new(&h, &h.parse_element("(abA,1)").unwrap()).is_err());
}
