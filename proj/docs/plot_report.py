#!/usr/bin/env python3
"""Plot the report outputs: revenue decomposition bars and the bid heatmap.

    python3 docs/plot_report.py out/report

Needs matplotlib and pandas; writes comparison.png and heatmap.png next to
the input files.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

report_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "out/report")

comparison = pd.read_csv(report_dir / "comparison.csv")
fig, ax = plt.subplots(figsize=(9, 4.5))
x = range(len(comparison))
ax.bar(x, comparison.fcr_eur, label="FCR capacity", color="#4a7fb5")
ax.bar(x, comparison.imbalance_eur, bottom=comparison.fcr_eur, label="imbalance",
       color="#e08f4f")
ax.set_xticks(list(x))
ax.set_xticklabels(comparison.strategy, rotation=45, ha="right")
ax.set_ylabel("revenue [EUR]")
ax2 = ax.twinx()
ax2.plot(list(x), comparison.cycles, "k.-", label="cycles")
ax2.set_ylabel("equivalent full cycles")
ax.legend(loc="upper left")
fig.tight_layout()
fig.savefig(report_dir / "comparison.png", dpi=150)
print(f"wrote {report_dir / 'comparison.png'}")

heatmap_path = report_dir / "heatmap.csv"
if heatmap_path.exists():
    hm = pd.read_csv(heatmap_path)
    fig, ax = plt.subplots(figsize=(6, 5))
    sc = ax.scatter((hm.sigma_lo + hm.sigma_hi) / 2, (hm.fcr_price_lo + hm.fcr_price_hi) / 2,
                    c=hm.mean_bid_mw, s=40 + 20 * hm.blocks, cmap="viridis", vmin=0, vmax=9)
    fig.colorbar(sc, label="mean bid [MW]")
    ax.set_xlabel("within-block imbalance price sigma [EUR/MWh]")
    ax.set_ylabel("FCR block price [EUR/MW]")
    fig.tight_layout()
    fig.savefig(report_dir / "heatmap.png", dpi=150)
    print(f"wrote {report_dir / 'heatmap.png'}")
