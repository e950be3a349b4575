"""Run the statistical inequality verifiers on a small ensemble.

Each verifier draws random fields, measures the ratio of the two sides
of one functional inequality (Bernstein, low-pass sup bound, Sobolev
embedding, product rule, commutator bound, tail bounds), and reports
the worst and median ratio per family.  The verdict is True when every
ratio stays below the family's cap and the trial-to-trial spread stays
uniform.  Two exact identities (divergence cancellation and transport
antisymmetry) are checked as near-zero residuals instead.

Run:  python3 demos/04_lemma_verification.py
"""

from nematicflow import EnsembleSpec, run_all

spec = EnsembleSpec(grid_n=32, n_trials=30, seed=99)
reports = run_all(spec)

print(f"N = {spec.grid_n}, {spec.n_trials} trials per check\n")
print(f"{'check':<16} {'max ratio':>12} {'uniformity':>11} {'verdict':>8}")
for name, report in reports.items():
    print(f"{name:<16} {report.max_ratio:12.4e} "
          f"{report.worst_uniformity:11.2f} {str(report.verdict):>8}")

print("\nworst families per check:")
for name, report in reports.items():
    label, worst, _ = max(report.rows, key=lambda row: row[1])
    print(f"  {name:<16} {label:<24} max = {worst:.4e}")
