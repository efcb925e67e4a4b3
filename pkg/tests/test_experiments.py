import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavestab.errors import BranchSafetyError, ConfigurationError
from wavestab.experiments import (
    FOOTER,
    ExperimentConfig,
    chain_constants,
    loglog_fit,
    order_fit,
    report_json,
    run_verify,
    stability_fits,
    write_report,
)

CHEAP = ["green_formula", "mollifier_rates"]


def test_config_json_roundtrip():
    c = ExperimentConfig()
    c2 = ExperimentConfig.from_dict(json.loads(c.to_json()))
    assert c2.to_json() == c.to_json()
    assert c2.hash() == c.hash()


def test_config_hash_ignores_output_and_workers():
    a, b = ExperimentConfig(), ExperimentConfig(out="elsewhere", workers=4)
    assert a.hash() == b.hash()
    assert ExperimentConfig(seed=1).hash() != a.hash()


def test_config_load_and_nested_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 5, "geometry": {"h": 0.025}, "family": {"epsilons": [0.4, 0.3, 0.2, 0.1]}}))
    c = ExperimentConfig.load(p)
    assert c.seed == 5 and c.geometry.h == 0.025 and c.geometry.T == 5.46
    assert c.family.epsilons == [0.4, 0.3, 0.2, 0.1]


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_config_load_rejects_bad_files(tmp_path, text):
    p = tmp_path / "c.json"
    p.write_text(text)
    with pytest.raises(ConfigurationError):
        ExperimentConfig.load(p)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"sed": 1})
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"geometry": {"hh": 1}})


def test_default_config_validates():
    ExperimentConfig().validate()


def _with(**kw):
    c = ExperimentConfig()
    for k, v in kw.items():
        obj = c
        *path, last = k.split("__")
        for p in path:
            obj = getattr(obj, p)
        setattr(obj, last, v)
    return c


@pytest.mark.parametrize("change", [
    {"geometry__cfl": 1.2},
    {"carleman_geometry__cfl": 0.0},
    {"geometry__T": 2.0, "M": 0.5},
    {"alpha": 0.7},
    {"lambdas": [5.0]},
    {"oracle_offset_count": 8},
    {"family__epsilons": [0.4, 0.2, 0.1]},
    {"family__epsilons": [0.4, 0.2, 0.1, 0.1]},
    {"workers": 0},
    {"M": 0.1},
    {"ray_lambda": 100.0},
])
def test_config_validation_errors(change):
    with pytest.raises(ConfigurationError):
        _with(**change).validate()


def test_branch_safety_rejection():
    with pytest.raises(BranchSafetyError):
        _with(M=1.0).validate()


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-5, 5))
def test_loglog_fit_recovers_power_laws(p, c):
    x = np.array([1.0, 2.0, 4.0, 8.0])
    f = loglog_fit(x, math.exp(c) * x**p)
    assert f.slope == pytest.approx(p, abs=1e-9)
    assert f.intercept == pytest.approx(c, abs=1e-9)
    assert f.r2 == pytest.approx(1.0, abs=1e-9)
    assert f.n == 4


def test_loglog_fit_drops_nonpositive_points():
    f = loglog_fit([1, 2, 0, 4], [1, 4, 5, -1])
    assert f.n == 2 and f.slope == pytest.approx(2.0)
    assert math.isnan(loglog_fit([1], [1]).slope)


def test_order_fit():
    assert order_fit([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4]) == pytest.approx(2.0)


def _synthetic_rows():
    rows = []
    for e in (0.4, 0.2, 0.1, 0.05):
        dn = 0.3 * e
        rows.append({"epsilon": e, "dn_norm": dn, "dV_l2": dn**0.8, "dalpha_hm1": 2 * dn**0.6,
                     "q_hm1": dn**0.6, "recovered_sum": 3 * dn**0.6,
                     "chain": {"norms": {"q_l2": dn, "V_prime_l2": dn**0.7, "dn_phi_gamma0_l2": dn**0.9},
                               "links": [{"name": "a", "ratio": e}, {"name": "b", "ratio": 1 - e}]}})
    return rows


def test_stability_fits_on_synthetic_rows():
    fits = stability_fits(_synthetic_rows() + [{"epsilon": 0.0, "dn_norm": 0.0}])
    assert fits["kappa"]["slope"] == pytest.approx(0.8)
    assert fits["mu"]["slope"] == pytest.approx(0.6)
    assert fits["kappa_2"]["slope"] == pytest.approx(0.7)
    assert fits["kappa_3"]["slope"] == pytest.approx(0.9)


def test_chain_constants_take_the_largest_ratio():
    assert chain_constants(_synthetic_rows()) == {"a": 0.4, "b": 0.95}


def test_run_verify_rejects_unknown_suite():
    with pytest.raises(ConfigurationError):
        run_verify(ExperimentConfig(), ["nope"])


def test_run_verify_report_shape_and_determinism(tmp_path):
    c = ExperimentConfig()
    r1 = run_verify(c, CHEAP)
    r2 = run_verify(c, CHEAP)
    assert report_json(r1) == report_json(r2)
    assert r1["kind"] == "verify" and r1["footer"] == FOOTER
    assert set(r1["suites"]) == set(CHEAP)
    assert r1["passed"] and r1["failed"] == []
    p = write_report(r1, tmp_path)
    assert json.loads(p.read_text())["config_hash"] == c.hash()
