#!/usr/bin/env python3
"""Write a uniform bid schedule CSV for a date range.

Example: a constant 5 MW commitment over January 2022:

    python3 docs/make_uniform_schedule.py 2022-01-01 31 5 uniform5.csv
"""
import sys
from datetime import datetime, timedelta, timezone

if len(sys.argv) != 5:
    sys.exit(__doc__)

start = datetime.strptime(sys.argv[1], "%Y-%m-%d").replace(tzinfo=timezone.utc)
days, bid_mw, out_path = int(sys.argv[2]), int(sys.argv[3]), sys.argv[4]

with open(out_path, "w") as out:
    out.write("block_start,bid_mw,mean_j_adj,std_j_adj\n")
    for block in range(days * 6):
        t = start + timedelta(hours=4 * block)
        out.write(f"{t.strftime('%Y-%m-%dT%H:%M:%SZ')},{bid_mw},0,0\n")

print(f"wrote {days * 6} blocks at {bid_mw} MW to {out_path}")
