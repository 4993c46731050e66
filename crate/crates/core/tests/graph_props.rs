use std::collections::BTreeMap;

use fractaug_core::graph::{deserialize, sample_params, serialize};
use fractaug_core::ops::{catalog, OpKind};
use fractaug_core::{AugNode, DistSpec};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = AugNode> {
    let names: Vec<&'static str> = catalog().iter().map(|d| d.name).collect();
    (prop::sample::select(names), any::<u64>()).prop_map(|(op, seed)| {
        let desc = fractaug_core::ops::descriptor(op).unwrap();
        let params: BTreeMap<String, DistSpec> = desc
            .params
            .iter()
            .map(|p| (p.name.to_string(), DistSpec::uniform(p.min, p.max)))
            .collect();
        AugNode::leaf(op, params, seed)
    })
}

fn node() -> impl Strategy<Value = AugNode> {
    prop_oneof![leaf(), any::<u64>().prop_map(AugNode::identity)].prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            (prop::collection::vec(inner.clone(), 1..4), any::<u64>())
                .prop_map(|(c, s)| AugNode::cascade(c, s)),
            (prop::collection::vec((inner, 0.1f64..5.0), 1..4), any::<u64>()).prop_map(|(c, s)| {
                let (children, weights) = c.into_iter().unzip();
                AugNode::weighted_choice(children, weights, s)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn serialize_round_trip(g in node()) {
        let text = serialize(&g);
        let back = deserialize(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize(&back), text);
        prop_assert_eq!(sample_params(&back, 33, 17).unwrap(), sample_params(&g, 33, 17).unwrap());
    }

    #[test]
    fn sampled_values_respect_bounds(g in node(), w in 1usize..300, h in 1usize..300) {
        let p = sample_params(&g, w, h).unwrap();
        for (op, values, _) in p.leaves() {
            let desc = fractaug_core::ops::descriptor(op).unwrap();
            for s in &desc.params {
                let v = values[s.name];
                prop_assert!(v >= s.min && v <= s.max, "{op}.{} = {v}", s.name);
            }
        }
    }
}

#[test]
fn catalog_has_both_kinds() {
    assert!(catalog().iter().any(|d| d.kind == OpKind::Dorsal));
    assert!(catalog().iter().any(|d| d.name == "plasma_warp" && d.kind == OpKind::Ventral));
}
