"""Fixed geometric radius schedules against the adaptive strongly convex rule.

A schedule t_k = c q^k with q too small freezes before reaching x*, while q close
to one converges slowly. The adaptive rule needs no tuning.
"""
from locallmo import harness

report = harness.run_experiment(harness.paperL_qsweep(), write=False)
print(f"{'run':>10} {'||x_100 - x*||':>16}")
for row in report.rows:
    print(f"{row['label']:>10} {row['dist']:16.3e}")

best = min((r for r in report.rows if r["label"] != "adaptive"), key=lambda r: r["dist"])
print(f"\nbest fixed schedule: {best['label']} ({best['dist']:.2e})")
print(f"adaptive:            {report.row('adaptive')['dist']:.2e}")
