use serde_json::{json, Value};

use thinns_web::{envelope_json, simulate_json, thresholds_json};

#[test]
fn planar_run_stays_planar() {
    let cfg = "preset = planar\nn1 = 4\nn2 = 4\nn3 = 1\nforcing = random\nforcing_amplitude = 0.3\nt_end = 0.1\ndiag_stride = 10\n";
    let v: Value = serde_json::from_str(&simulate_json(cfg).unwrap()).unwrap();
    let t = v["t"].as_array().unwrap();
    assert_eq!(t.len(), 11);
    for (c, h) in v["chi"].as_array().unwrap().iter().zip(v["h1"].as_array().unwrap()) {
        assert!(c.as_f64().unwrap() <= 1e-10 * h.as_f64().unwrap());
    }
}

#[test]
fn oversized_and_bad_runs_are_refused() {
    assert!(simulate_json("n1 = 40\nn2 = 40\nn3 = 8\n").unwrap_err().contains("too many"));
    assert!(simulate_json("dt = 1e-6\nt_end = 1\n").unwrap_err().contains("too many"));
    assert!(simulate_json("nu = -1\n").is_err());
}

#[test]
fn unforced_envelope_decays() {
    let p = json!({
        "system": { "c": vec![1.0; 10], "c18": 1.0, "c19": 1.0, "u": 0.5, "f": 0.0, "eps": 0.25, "regime": "lemma3" },
        "horizon": 2.0,
        "samples": 20,
    });
    let v: Value = serde_json::from_str(&envelope_json(&p.to_string()).unwrap()).unwrap();
    let theta2: Vec<f64> = v["theta2"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(theta2.len(), 21);
    // Theta' = -Theta with c1 = c9 = 1
    assert!((theta2[20] - 0.25 * (-2.0f64).exp()).abs() < 1e-10);
    assert!(envelope_json("{\"system\": {}}").is_err());
}

#[test]
fn threshold_rows_follow_the_list() {
    let v: Value = serde_json::from_str(&thresholds_json("0.25, 0.125,", 0.0, 1.0).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(thresholds_json("0.25, x", 0.0, 1.0).unwrap_err().contains("bad eps"));
    assert!(thresholds_json("2", 0.0, 1.0).is_err());
}
