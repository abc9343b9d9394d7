use std::ffi::CString;

use pyo3::prelude::*;

use permeas_py::permeas_py;

fn run(code: &str) -> PyResult<()> {
    pyo3::append_to_inittab!(permeas_py);
    Python::initialize();
    Python::attach(|py| py.run(&CString::new(code).unwrap(), None, None))
}

#[test]
fn module_round_trip() {
    run(r#"
import permeas_py as pm
tent = pm.Map.zoo("tent")
assert tent.critical_points == [0.0, 0.5, 1.0]
orbits = tent.periodic_points("3/10", 3)
assert [o.exact for o in orbits] == ["2/5", "2/7"]
assert [o.minimal_period for o in orbits] == [2, 3]
assert abs(pm.w1_distance([(0.0, 0.5), (0.5, 0.5)], [(0.25, 0.5), (0.75, 0.5)]) - 0.25) < 1e-15
assert pm.REPORT_HEADER == "l,p,minimal_period,w1,discrepancy_m,residual"
rows = tent.approximate(seed=2, length=20000, burn_in=100, l_max=3, base_point=0.3)
assert [r.l for r in rows] == [2, 3]
try:
    pm.Map.zoo("nope")
except ValueError as e:
    assert "nope" in str(e)
else:
    raise AssertionError
"#)
    .unwrap();
}
