"""The headline stability study with the default configuration.

Runs the contrast sweep, prints the fitted exponents and the chain
constants, and writes report.json plus the SVG plots to demo_out/.  This is
the same computation as ``wavestab stability --out demo_out`` and takes a
few minutes.

    python3 demos/04_stability_study.py
"""
from wavestab.experiments import ExperimentConfig, run_stability, write_report
from wavestab.plots import emit_plots

report = run_stability(ExperimentConfig())
for name, fit in report["fits"].items():
    print(f"{name:10s} slope {fit['slope']:.4f}  R2 {fit['r2']:.4f}")
for name, c in sorted(report["chain_constants"].items()):
    print(f"link {name:28s} constant {c:.3g}")
print("flags:", report["flags"])
write_report(report, "demo_out")
print("wrote", [p.name for p in emit_plots(report, "demo_out")])
print(report["footer"])
