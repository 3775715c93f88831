use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyqrd::pyqrd as module;

fn run(code: &str) {
    pyo3::append_to_inittab!(module);
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let globals = PyDict::new_bound(py);
        py.run_bound(code, Some(&globals), None).map_err(|e| e.to_string()).unwrap();
    });
}

#[test]
fn module_round_trip() {
    run(r#"
import math, json, pyqrd
rho = pyqrd.Operator([[0.75, 0.0], [0.0, 0.25]])
sigma = pyqrd.Operator.diagonal([0.5, 0.5])
assert abs(pyqrd.d_alpha_z(rho, sigma, 2.0, 7.0) - math.log(1.25)) < 1e-12
assert pyqrd.d_alpha_z(sigma, pyqrd.Operator.diagonal([1.0, 0.0]), 2.0, 1.0) == math.inf
assert abs(pyqrd.umegaki(rho, rho)) < 1e-15
p, s = pyqrd.family(json.dumps({"family": "pure_family", "c": 1.0, "eps": 0.25}))
assert abs(pyqrd.d_max(p, s) - math.log(2)) < 1e-12
dep = pyqrd.Channel.depolarizing(2, 0.2)
assert abs(pyqrd.channel_dmax(pyqrd.Channel.identity(2), dep) - math.log(1 / 0.85)) < 1e-8
try:
    pyqrd.d_alpha_z(rho, sigma, -1.0, 1.0)
    raise AssertionError("negative alpha accepted")
except ValueError:
    pass
"#);
}
