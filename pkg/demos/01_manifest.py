"""
Page manifests and the monolithic baseline
==========================================

A manifest lists the page's modules in document order: how much HTML and
script each one carries, where it sits on the page and when it should hydrate.
"""

from hydrasim import baseline_transform, product_page, validate_manifest

m = product_page()
for mod in m.modules:
    print(f"{mod.id:16s} {mod.priority:6s} chunk={mod.chunk_bytes:>7,d}  "
          f"trigger={mod.trigger_high_end.kind}/{mod.trigger_low_end.kind}")
print("runtime", f"{m.shared_runtime_bytes:,}", "total", f"{m.total_script_bytes:,}")

# %%
# The baseline folds every chunk into one eagerly loaded bundle.
b = baseline_transform(m)
print("bundle", f"{b.shared_runtime_bytes:,}", "bytes; valid:", validate_manifest(b) == [])

# %%
# Validation reports every broken invariant with the module it belongs to.
from dataclasses import replace

broken = replace(m, modules=(replace(m.modules[0], offset_px=5), *m.modules[1:]))
for v in validate_manifest(broken):
    print(v)
