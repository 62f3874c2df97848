"""
Streaming HTML and a shared downlink
====================================

HTML arrives in one in-order stream; suspense modules send a small
placeholder first and their content once the server has rendered it.
Scripts share the link fairly after one round trip.
"""

from hydrasim import FetchRequest, fetch_schedule, html_arrival_times, preset, product_page
from hydrasim.engine import head_arrival_ms

net = preset("mobile-slow3g").network
m = product_page()
print("head", head_arrival_ms(m, net))
for t in html_arrival_times(m, net):
    print(f"{t.module_id:16s} placeholder={t.placeholder_ms}  content={t.content_ms:.1f}")

# %%
for t in fetch_schedule([FetchRequest("a", 100_000, 0), FetchRequest("b", 100_000, 0)], net):
    print(t)
