use serde_json::Value;
use twistprod_web::{bundled_scenes, christoffel, jet, verify, BUNDLED};

#[test]
fn jet_of_a_product() {
    let out: Value = serde_json::from_str(&jet("x^2 * sin(y)", r#"["x","y"]"#, "[2, 0.5]").unwrap()).unwrap();
    let s = 0.5_f64.sin();
    assert!((out["value"].as_f64().unwrap() - 4.0 * s).abs() < 1e-15);
    assert!((out["gradient"][0].as_f64().unwrap() - 4.0 * s).abs() < 1e-15);
    assert!((out["hessian"][0][1].as_f64().unwrap() - 4.0 * 0.5_f64.cos()).abs() < 1e-15);
    assert!(jet("x + q", r#"["x"]"#, "[1]").unwrap_err().contains("`q`"));
    assert!(jet("x", r#"["x"]"#, "[1, 2]").is_err());
}

#[test]
fn half_plane_symbols() {
    let out: Value =
        serde_json::from_str(&christoffel(r#"["x","y"]"#, r#"[["1/y^2","0"],["0","1/y^2"]]"#, "[0.3, 2]").unwrap()).unwrap();
    assert_eq!(out["metric"][0][0].as_f64().unwrap(), 0.25);
    assert_eq!(out["christoffel"][1][0][0].as_f64().unwrap(), 0.5);
    assert_eq!(out["christoffel"][0][0][1].as_f64().unwrap(), -0.5);
    assert!(christoffel(r#"["x"]"#, r#"[["-1"]]"#, "[0]").unwrap_err().contains("positive definite"));
}

#[test]
fn bundled_scene_verifies() {
    let scenes: Value = serde_json::from_str(&bundled_scenes()).unwrap();
    assert_eq!(scenes.as_object().unwrap().len(), BUNDLED.len());
    let text = scenes["sphere_warped"].as_str().unwrap();
    let reports: Value = serde_json::from_str(&verify(text, "chen", 10, 1, 1e-8).unwrap()).unwrap();
    assert_eq!(reports[0]["verdict"], "PASS");
    let all: Value = serde_json::from_str(&verify(text, "all", 5, 1, 1e-8).unwrap()).unwrap();
    assert!(all.as_array().unwrap().len() > 5);
    assert!(verify(text, "nope", 5, 1, 1e-8).is_err());
    assert!(verify("[scene", "all", 5, 1, 1e-8).is_err());
}
