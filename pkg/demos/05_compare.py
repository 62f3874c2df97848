"""
Baseline against adaptive hydration
===================================

Run both policies on identical inputs and tabulate the metric deltas.
"""

from hydrasim import format_delta_table, preset, product_page, run_comparison, scenario

for env_name in ("mobile-slow3g", "desktop-fast"):
    base, mrah, delta = run_comparison(product_page(), preset(env_name), scenario("walkthrough"))
    print(env_name)
    print(format_delta_table(delta))
