#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use uniprofile_core::schema::{AttributeKind, AttributeSchema, EMPHASIS_START};
use uniprofile_core::{Dataset, UniversityProfile, Value};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn arb_value(index: usize) -> BoxedStrategy<Value> {
    let def = AttributeSchema::canonical().attributes()[index];
    match def.kind {
        AttributeKind::String => prop_oneof![
            1 => Just(Value::Missing),
            4 => "[A-Z][A-Z0-9-]{0,10}".prop_map(Value::Text),
        ]
        .boxed(),
        AttributeKind::Numeric => prop_oneof![
            1 => Just(Value::Missing),
            2 => (0u32..=100).prop_map(|x| Value::Number(x as f64)),
            2 => (0.0f64..=100.0).prop_map(Value::Number),
        ]
        .boxed(),
        AttributeKind::Nominal if index >= EMPHASIS_START => {
            prop::sample::select(def.domain).prop_map(|s| Value::Text(s.to_string())).boxed()
        }
        AttributeKind::Nominal => prop_oneof![
            1 => Just(Value::Missing),
            4 => prop::sample::select(def.domain).prop_map(|s| Value::Text(s.to_string())),
        ]
        .boxed(),
    }
}

/// Valid record with the given name.
pub fn arb_record(name: String) -> impl Strategy<Value = UniversityProfile> {
    let rest: Vec<_> = (1..20).map(arb_value).collect();
    rest.prop_map(move |mut values| {
        values.insert(0, Value::Text(name.clone()));
        UniversityProfile::from_values(values).unwrap()
    })
}

/// Valid dataset of up to `max` records with distinct names.
pub fn arb_dataset(max: usize) -> impl Strategy<Value = Dataset> {
    (0..=max).prop_flat_map(|n| {
        let records: Vec<_> = (0..n).map(|i| arb_record(format!("U{i}"))).collect();
        records.prop_map(|r| Dataset::new(r).unwrap())
    })
}
