"""The three head wirings and what they cost in parameters.

The progressive head grows each layer's input by exactly the hidden width:
layer k sees the raw input plus every earlier hidden output, and the
classifier sees all of it. That direct classifier connection is the
gradient highway. Run:  python demos/02_head_architectures.py
"""

import numpy as np

from spinalfc import HeadConfig, VARIANTS, build_head, classifier_in_dim, hidden_in_dims, param_count
from spinalfc.rng import check_rng, init_rng

D, H, L, C = 784, 128, 6, 10

print(f"input_dim={D}, hidden={H}, depth={L}, classes={C}\n")
for variant in VARIANTS:
    cfg = HeadConfig(variant, D, H, L, C)
    dims = hidden_in_dims(cfg)
    print(f"{variant:>12}: hidden in-dims {dims}")
    print(f"{'':>12}  classifier in-dim {classifier_in_dim(cfg)}, "
          f"total params {param_count(cfg):,}")

# The progressive growth step is exactly H per layer:
cfg = HeadConfig("progressive", D, H, L, C)
steps = np.diff(hidden_in_dims(cfg))
print("\nprogressive per-layer input growth:", steps.tolist(), "(all equal hidden width)")

# Build a small head of each variant and push one batch through.
x = check_rng(0).standard_normal((4, 20)).astype(np.float32)
for variant in VARIANTS:
    head = build_head(HeadConfig(variant, 20, 8, 3, 5), init_rng(1))
    head.set_mode("eval")
    logits = head.forward(x)
    print(f"\n{variant} logits for a 4-row batch:\n{np.round(logits, 3)}")
    print("predicted labels:", head.predict(x))
