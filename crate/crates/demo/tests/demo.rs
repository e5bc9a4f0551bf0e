use serde_json::Value;

use leadsheet_demo::{example_json, harmonize_json, nucleus_json, variation_json};

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn variation_keeps_degrees() {
    let clip = example_json(1, false);
    let v = parse(&variation_json(&clip, "Cminor", 0).unwrap());
    assert_eq!(v["key"], "Cminor");
    let strip = |tokens: &Value| -> Vec<String> {
        tokens
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_str().unwrap().to_string())
            .filter(|t| t.starts_with("Octave_") || t.starts_with("Degree_"))
            .collect()
    };
    assert_eq!(strip(&v["tokens"]), strip(&v["original_tokens"]));
    assert_eq!(v["lead_sheet"]["key"]["mode"], "minor");
    assert!(variation_json(&clip, "Hmajor", 0).is_err());
    assert!(variation_json("{}", "Cminor", 0).is_err());
}

#[test]
fn nucleus_preview() {
    let v = parse(&nucleus_json("0.1, 0.4, 0.2, 0.3", 1.0, 0.5).unwrap());
    let kept: Vec<u64> = v["kept"].as_array().unwrap().iter().map(|k| k["index"].as_u64().unwrap()).collect();
    assert_eq!(kept, [1, 3]);
    // Unnormalised weights are rescaled first.
    let w = parse(&nucleus_json("1, 4, 2, 3", 1.0, 0.5).unwrap());
    assert_eq!(w["kept"], v["kept"]);
    assert!(nucleus_json("0.5, x", 1.0, 0.9).is_err());
    assert!(nucleus_json("0.5, 0.5", 0.0, 0.9).is_err());
}

#[test]
fn harmonize_with_builtin_model() {
    let clip = example_json(4, false);
    let a = harmonize_json(&clip, "negative", "rule", 7).unwrap();
    assert_eq!(a, harmonize_json(&clip, "negative", "rule", 7).unwrap());
    let v = parse(&a);
    assert!(v["key"].as_str().unwrap().ends_with("minor"));
    let bars = v["lead_sheet"]["num_bars"].as_u64().unwrap() as usize;
    assert_eq!(v["chords"].as_array().unwrap().len(), 4 * bars);
    assert_eq!(v["tokens"].as_array().unwrap().last().unwrap(), "EOS");
    assert!(harmonize_json(&clip, "happy", "rule", 0).is_err());
    assert!(harmonize_json(&clip, "positive", "sideways", 0).is_err());
}
