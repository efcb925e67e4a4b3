import re
import xml.etree.ElementTree as ET

import pytest

from wavestab.experiments import loglog_fit
from wavestab.plots import emit_plots, loglog_svg

NS = "{http://www.w3.org/2000/svg}"


def _fit(x, y):
    f = loglog_fit(x, y)
    return f.slope, f.intercept


def test_svg_is_well_formed_and_has_all_points():
    x, y = [1, 2, 4, 8], [1, 0.5, 0.25, 0.125]
    svg = loglog_svg(x, y, *_fit(x, y), "t", "x", "y", reference_slope=0.5)
    root = ET.fromstring(svg)
    assert len(root.findall(f"{NS}circle")) == 4
    assert "fitted slope -1.0000" in svg
    assert 'stroke-dasharray="6,4"' in svg


def test_two_point_fit_line_passes_through_both_points():
    x, y = [0.1, 10.0], [3.0, 0.03]
    svg = loglog_svg(x, y, *_fit(x, y))
    root = ET.fromstring(svg)
    (line,) = [e for e in root.findall(f"{NS}line") if e.get("stroke") == "#1f5fbf"]
    centers = [(float(c.get("cx")), float(c.get("cy"))) for c in root.findall(f"{NS}circle")]
    ends = [(float(line.get("x1")), float(line.get("y1"))), (float(line.get("x2")), float(line.get("y2")))]
    for (ax, ay), (bx, by) in zip(sorted(ends), sorted(centers)):
        assert abs(ax - bx) <= 0.01 and abs(ay - by) <= 0.01


def test_svg_is_deterministic():
    x, y = [1, 2, 4], [3, 2, 1]
    assert loglog_svg(x, y, *_fit(x, y), "a") == loglog_svg(x, y, *_fit(x, y), "a")


def test_narrow_range_gets_end_ticks():
    svg = loglog_svg([1.0, 1.5], [2.0, 2.2])
    assert len(re.findall(r'text-anchor="middle">[0-9.]+</text>', svg)) >= 2


def test_svg_rejects_empty_data():
    with pytest.raises(ValueError):
        loglog_svg([0, -1], [1, 2])


def test_svg_escapes_labels():
    ET.fromstring(loglog_svg([1, 2], [1, 2], title="a < b & c"))


def _stability_report():
    rows = []
    for e in (0.4, 0.2, 0.1, 0.05):
        dn = 0.3 * e
        rows.append({"epsilon": e, "dn_norm": dn, "dV_l2": dn**0.8, "dalpha_hm1": dn**0.6, "q_hm1": dn**0.6,
                     "recovered_sum": 2 * dn**0.6,
                     "chain": {"norms": {"q_l2": dn, "V_prime_l2": dn**0.7, "dn_phi_gamma0_l2": dn**0.9}}})
    from wavestab.experiments import stability_fits
    return {"kind": "stability", "rows": rows, "fits": stability_fits(rows)}


def test_emit_stability_plots_one_per_exponent(tmp_path):
    paths = emit_plots(_stability_report(), tmp_path)
    names = sorted(p.name for p in paths)
    assert names == sorted(f"stability_{k}.svg" for k in
                           ("kappa", "mu", "mu_dalpha", "mu_q", "kappa_1", "kappa_2", "kappa_3"))
    assert "reference slope 0.5" in (tmp_path / "stability_mu.svg").read_text()


def test_emit_plots_byte_identical(tmp_path):
    a = emit_plots(_stability_report(), tmp_path / "a")
    b = emit_plots(_stability_report(), tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]


def test_emit_rate_plots(tmp_path):
    lam = [5.0, 10.0, 20.0, 40.0]
    fit = loglog_fit(lam, [1 / x for x in lam]).to_dict()
    report = {"kind": "rates",
              "mollifier": {"lambdas": lam, "sup_error": [1 / x for x in lam], "second_difference": lam,
                            "sup_error_fit": fit, "second_difference_fit": fit},
              "go_rows": [{"sign": s, "lambda": x, "r_l2": 1 / x, "grad_r_l2": x**0.5}
                          for s in ("forward", "backward") for x in lam],
              "go_fits": {s: {"r_fit": fit, "grad_r_fit": fit} for s in ("forward", "backward")}}
    names = {p.name for p in emit_plots(report, tmp_path)}
    assert names == {"rates_mollifier_sup_error.svg", "rates_mollifier_second_difference.svg",
                     "rates_go_forward_r_l2.svg", "rates_go_forward_grad_r_l2.svg",
                     "rates_go_backward_r_l2.svg", "rates_go_backward_grad_r_l2.svg"}


@pytest.mark.parametrize("report", [{}, {"kind": "stability", "rows": []}, {"kind": "verify", "suites": {}}])
def test_empty_report_warns_and_writes_nothing(tmp_path, report):
    with pytest.warns(RuntimeWarning):
        assert emit_plots(report, tmp_path / "x") == []
    assert not (tmp_path / "x").exists()
