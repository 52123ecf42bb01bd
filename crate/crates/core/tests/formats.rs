use coincide_core::io::{parse_group, GroupSpec, ImageSpec};
use coincide_core::rules::CurveRecord;
use coincide_core::{Error, MatGroup};

#[test]
fn group_file_round_trip() {
    let g = MatGroup::sl2(6).unwrap();
    for with_elements in [false, true] {
        let spec = GroupSpec::from_group(&g, with_elements).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: GroupSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_group().unwrap(), g);
    }
    let spec = GroupSpec::from_group(&g, true).unwrap();
    assert_eq!(spec.order, Some(144));
    assert_eq!(spec.elements.as_ref().unwrap().len(), 144);
}

#[test]
fn swap_matrix_file() {
    let g = parse_group(r#"{"modulus": 4, "generators": [[0, 1, 1, 0]]}"#).unwrap();
    assert_eq!(g.order().unwrap(), 2);
    assert!(matches!(
        parse_group(r#"{"modulus": 4, "generators": [[2, 0, 0, 2]]}"#),
        Err(Error::NotInvertible(_))
    ));
    assert!(matches!(
        parse_group(r#"{"modulus": 1, "generators": []}"#),
        Err(Error::BadModulus(_))
    ));
}

#[test]
fn image_file_round_trip() {
    let text = r#"{"p": 2, "depth": 2, "group": {"modulus": 4, "generators": [[0, 1, 1, 0]]}}"#;
    let spec: ImageSpec = serde_json::from_str(text).unwrap();
    let again: ImageSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(again, spec);
    let img = spec.to_image().unwrap();
    assert_eq!(img.depth(), 2);
    let bad: ImageSpec =
        serde_json::from_str(r#"{"p": 2, "depth": 3, "group": {"modulus": 4, "generators": []}}"#).unwrap();
    assert!(bad.to_image().is_err());
}

#[test]
fn record_round_trip() {
    let text = r#"{
        "label": "40.a4",
        "field_disc_primes": [],
        "conductor_norm_primes": [2, 5],
        "local": [
            {"residue_characteristic": 2, "ideals": [{"e": 1, "reduction": "additive_potentially_good"}]},
            {"residue_characteristic": 5, "ideals": [{"e": 1, "reduction": "nonsplit_multiplicative", "v_ideal_of_j": -1}]},
            {"residue_characteristic": 3, "ideals": [{"e": 1, "reduction": "good_supersingular"}]}
        ],
        "cm": {"field_is_K_of_j": false},
        "cyclotomic_trivial": {"intersections": [{"p": 2, "k": 3, "trivial": true}], "r": [{"p": 3, "r": 0}]},
        "zeta_in_F": [2],
        "images": {"4": {"modulus": 4, "generators": [[0, 1, 1, 0]]}},
        "entanglement_set": [2, 5],
        "j_cube_root_in_F": false
    }"#;
    let rec = CurveRecord::from_json(text).unwrap();
    let again = CurveRecord::from_json(&serde_json::to_string(&rec).unwrap()).unwrap();
    assert_eq!(again, rec);
    assert_eq!(rec.image_at(4).unwrap().unwrap().order().unwrap(), 2);
}

#[test]
fn malformed_records_are_rejected() {
    for text in [
        r#"{"local": [{"residue_characteristic": 5, "ideals": [{"e": 1, "reduction": "bad"}]}]}"#,
        r#"{"field_disc_primes": [4]}"#,
        r#"{"conductor_norm_primes": [5], "local": [{"residue_characteristic": 7, "ideals": [{"e": 1, "reduction": "split_multiplicative"}]}]}"#,
        r#"{"images": {"4": {"modulus": 8, "generators": []}}}"#,
        r#"{"field_disc_primes": [], "zeta_in_F": [3]}"#,
        r#"{"unexpected": 1}"#,
    ] {
        assert!(
            matches!(CurveRecord::from_json(text), Err(Error::MalformedRecord(_))),
            "{text}"
        );
    }
}
