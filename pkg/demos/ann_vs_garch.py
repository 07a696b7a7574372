"""Train feed-forward and NARX grids on a synthetic FX regime and compare with GARCH.

Run with ``python3 demos/ann_vs_garch.py``; takes about half a minute.
"""
from fxforecast.config import PipelineConfig
from fxforecast.experiments import run_pipeline

cfg = PipelineConfig.from_dict({"grid": {"neurons": [4, 6, 8], "algorithms": ["LM", "SCG"]}})
rep = run_pipeline(cfg)

for fam in ("MLFFNN", "NARX"):
    avg = rep["grids"][fam]["summary"]["test"][2]
    print(f"{fam:>7} average test  R {avg['r']:.4f}  MSE {avg['mse']:.2e}")
    for row in rep["grids"][fam]["ancova"]["rows"]:
        p = "" if row["p"] is None else f"p {row['p']:.3f}"
        print(f"         {row['source']:<16} df {row['df']:>3}  {p}")
for g in rep["garch"]:
    print(f"{g['model']:>12} test MSE {g['test']['mse']:.2e}  Theil {g['test']['theil']:.4f}")
cmp = rep["comparison"]
print(f"\nWelch t = {cmp['t_test']['statistic']:.3f}, p = {cmp['t_test']['p_value']:.4f}: {cmp['verdict']}")
