use eptas_core::instance::{parse_instance, serialize_instance, Instance, MachineId, Schedule};
use eptas_core::rational::{ratio, Rational};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (0i64..50, 1i64..12).prop_map(|(n, d)| ratio(n, d))
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..4, 0usize..7)
        .prop_flat_map(|(k, n)| {
            (
                prop::collection::vec(prop::collection::vec(rational(), n), k),
                prop::collection::vec(1usize..4, k),
            )
        })
        .prop_map(|(p, m)| Instance::new(p, m).unwrap())
}

proptest! {
    #[test]
    fn instance_roundtrip(inst in instance()) {
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst.clone());
        prop_assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
    }

    #[test]
    fn schedule_roundtrip(pairs in prop::collection::vec((0usize..3, 0usize..4), 0..10)) {
        let s = Schedule::new(pairs.into_iter().map(|(t, i)| MachineId::new(t, i)).collect());
        prop_assert_eq!(Schedule::from_json(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn schedule_document_shape() {
    let s = Schedule::new(vec![MachineId::new(1, 0), MachineId::new(0, 2)]);
    assert_eq!(s.to_json(), r#"[{"type":1,"index":0},{"type":0,"index":2}]"#);
}
