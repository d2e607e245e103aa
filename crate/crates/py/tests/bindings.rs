use pyo3::prelude::*;
use pyo3::types::PyModule;

const ADDITIVE: &str = r#"{"prime": 3, "precision": 6, "param_vars": 0, "degree_cutoff": 6, "dim": 1, "level": 1,
  "components": [[{"xexp": [1, 0], "texp": [], "coeff": 1}, {"xexp": [0, 1], "texp": [], "coeff": 1}]]}"#;

const TWISTED: &str = r#"{"prime": 3, "precision": 6, "param_vars": 1, "degree_cutoff": 6, "dim": 1, "level": 1,
  "components": [[{"xexp": [1, 0], "texp": [0], "coeff": 1}, {"xexp": [0, 1], "texp": [0], "coeff": 1},
                  {"xexp": [1, 1], "texp": [1], "coeff": 1}]]}"#;

fn with_module(f: impl FnOnce(&Bound<'_, PyModule>)) {
    Python::attach(|py| {
        let m = PyModule::new(py, "padic_linear_py").unwrap();
        padic_linear_py::padic_linear_py(&m).unwrap();
        f(&m);
    });
}

fn json(text: String) -> serde_json::Value {
    serde_json::from_str(&text).unwrap()
}

#[test]
fn validate_and_multiply() {
    with_module(|m| {
        let report: String = m.getattr("validate").unwrap().call1((ADDITIVE,)).unwrap().extract().unwrap();
        assert_eq!(json(report)["passed"], true);
        let pts = r#"{"points": [[[{"texp": [], "coeff": 3}]], [[{"texp": [], "coeff": 6}]]]}"#;
        let prod: String = m.getattr("multiply").unwrap().call1((ADDITIVE, pts)).unwrap().extract().unwrap();
        assert_eq!(json(prod)["text"], "(9)");
    });
}

#[test]
fn discriminate_and_errors() {
    with_module(|m| {
        let pts = r#"{"points": [[[{"texp": [0], "coeff": 3}]], [[{"texp": [1], "coeff": 1}]]]}"#;
        let cert: String = m.getattr("discriminate").unwrap().call1((TWISTED, pts)).unwrap().extract().unwrap();
        assert_eq!(json(cert)["valid"], true);
        let bad = m.getattr("validate").unwrap().call1(("{",));
        assert!(bad.is_err());
        let dup = r#"{"points": [[[{"texp": [1], "coeff": 1}]], [[{"texp": [1], "coeff": 1}]]]}"#;
        assert!(m.getattr("discriminate").unwrap().call1((TWISTED, dup)).is_err());
    });
}

#[test]
fn run_maps_exit_codes() {
    with_module(|m| {
        let (code, _, err): (i32, String, String) =
            m.getattr("run").unwrap().call1((vec!["frobnicate"],)).unwrap().extract().unwrap();
        assert_eq!(code, 2);
        assert!(!err.is_empty());
    });
}
