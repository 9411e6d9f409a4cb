#!/usr/bin/env python3
"""Round-trip workflow: generate an instance, write MPS, parse it back,
solve it three ways, and solve its symmetric-form dual."""

import tempfile
from pathlib import Path

import lpipm as L

inst = L.generate_instance(12, 30, seed=42)
workdir = Path(tempfile.mkdtemp())
mps_path = workdir / "plant.mps"
mps_path.write_text(inst.mps_text)
(workdir / "plant.cert").write_text(inst.certificate_text)
print(f"wrote {mps_path} (certificate objective {inst.certificate.objective:.8f})")

problem = L.to_standard_form(L.parse_mps(mps_path.read_bytes()))
print(f"parsed back: {problem.nrows} rows, {problem.ncols} columns\n")

pd = L.pd_solve(problem, L.PdConfig())
print(f"primal-dual objective: {pd.objective:.10f} ({pd.status})")

sym = L.to_symmetric_form(problem)
dual = L.symmetric_to_standard(L.dualize(sym))
res_dual = L.pd_solve(dual, L.PdConfig())
dual_value = dual.recovery.original_objective(res_dual.objective)
print(f"dual-route objective:  {dual_value:.10f} ({res_dual.status})")

print("\nthe same file through the command line:")
print(f"  lpipm solve {mps_path} --algorithm hybrid --trace trace.csv")
print(f"  lpipm probe {mps_path} --tau 0.28 --window 5")
