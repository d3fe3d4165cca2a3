use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn module_functions_round_trip() {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "sphdg_py").unwrap();
        sphdg_py::register(&m).unwrap();

        let kw = PyDict::new(py);
        let ov = PyDict::new(py);
        ov.set_item("n", "12").unwrap();
        ov.set_item("t_end", "0.05").unwrap();
        kw.set_item("overrides", ov).unwrap();
        let r = m
            .getattr("run")
            .unwrap()
            .call(("wb_gamma2",), Some(&kw))
            .unwrap();
        let cells: usize = r.get_item("cells").unwrap().extract().unwrap();
        assert_eq!(cells, 12);
        let errs: Vec<f64> = r.get_item("l1_errors").unwrap().extract().unwrap();
        assert!(errs.iter().all(|e| *e < 1e-12));

        let err = m
            .getattr("run")
            .unwrap()
            .call1(("wb_gamma2", "bogus"))
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));

        let err = m
            .getattr("run_config")
            .unwrap()
            .call1(("scenario = explosion\nfoo = 1\n",))
            .unwrap_err();
        assert!(err.to_string().contains("foo"));
    });
}
