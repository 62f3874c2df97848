"""
Exporting a trace
=================

Traces serialize to a flat CSV that plotting tools can read directly.
"""

import csv
import io

from hydrasim import preset, product_page, run_policy, scenario, trace_to_csv

trace, _ = run_policy(product_page(), preset("mobile-slow3g"), scenario("idle"), "baseline")
text = trace_to_csv(trace)
print(text)

# %%
# Long main-thread tasks stand out when filtered.
rows = list(csv.DictReader(io.StringIO(text)))
long = [r for r in rows if r["kind"] == "task" and float(r["t_end_ms"]) - float(r["t_start_ms"]) > 50]
print(long)
