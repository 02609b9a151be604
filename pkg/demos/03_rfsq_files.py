"""Tour of the .rfsq container: exact sizes, round-trips, corruption checks.

The byte layout (docs/format.md) is designed for exact accounting: the size
of any model is a closed-form function of its leaf counts, so storage
comparisons are measurements, not estimates.

Run:  python demos/03_rfsq_files.py
"""

import numpy as np

from rfsquash import (
    ChecksumMismatchError,
    ForestConfig,
    MlrFitConfig,
    TruncatedPayloadError,
    decode,
    encode,
    fit_forest,
    forest_predict_batch,
    gen_friedman1,
    measure_size,
    squash_forest,
)
from rfsquash.codec import (
    ENVELOPE_BYTES,
    FOREST_HEADER_BYTES,
    SURROGATE_HEADER_BYTES,
    forest_tree_bytes,
    surrogate_tree_bytes,
)

data = gen_friedman1(n=800, noise_sd=1.0, seed=3)
config = ForestConfig(
    subsample_size=400, features_per_split=10, max_depth=3, n_trees=5,
    min_leaf=4, seed=3,
)
forest = fit_forest(data, config)
squashed = squash_forest(forest, data, MlrFitConfig(l2_penalty=1e-4))

# ---------------------------------------------------------------------------
# 1. Sizes are closed-form
# ---------------------------------------------------------------------------

blob = encode(forest, "f64")
formula = (
    ENVELOPE_BYTES
    + FOREST_HEADER_BYTES
    + sum(forest_tree_bytes(t.n_leaves, 8) for t in forest.trees)
)
print(f"forest:    encoded {len(blob)} bytes, formula {formula}, "
      f"measure_size {measure_size(forest, 'f64')}")

sblob = encode(squashed, "f64")
sformula = (
    ENVELOPE_BYTES
    + SURROGATE_HEADER_BYTES
    + sum(
        surrogate_tree_bytes(s.n_leaves, squashed.n_features, 8)
        for s in squashed.surrogates
    )
)
print(f"surrogate: encoded {len(sblob)} bytes, formula {sformula}, "
      f"measure_size {measure_size(squashed, 'f64')}")

# A surrogate's size depends only on (K, p), never on how many rows trained it.

# ---------------------------------------------------------------------------
# 2. Round-trips are exact
# ---------------------------------------------------------------------------

restored = decode(blob)
probes = gen_friedman1(200, 0.0, seed=11).features
same = np.array_equal(
    forest_predict_batch(forest, probes), forest_predict_batch(restored, probes)
)
print(f"\ndecode(encode(forest)) predictions bit-identical: {same}")
print(f"re-encode bit-identical: {encode(restored, 'f64') == blob}")

# ---------------------------------------------------------------------------
# 3. f32 narrowing as a size lever
# ---------------------------------------------------------------------------

print(f"\nf64 vs f32 forest bytes:    {measure_size(forest, 'f64')} vs "
      f"{measure_size(forest, 'f32')}")
print(f"f64 vs f32 surrogate bytes: {measure_size(squashed, 'f64')} vs "
      f"{measure_size(squashed, 'f32')}")
narrowed = decode(encode(forest, "f32"))
drift = np.max(np.abs(
    forest_predict_batch(forest, probes) - forest_predict_batch(narrowed, probes)
))
print(f"max prediction drift after f32 narrowing: {drift:.2e}")

# ---------------------------------------------------------------------------
# 4. Damage is detected, and reported distinctly
# ---------------------------------------------------------------------------

corrupt = bytearray(blob)
corrupt[40] ^= 0x01
try:
    decode(bytes(corrupt))
except ChecksumMismatchError as exc:
    print(f"\nflipped one payload bit  -> {type(exc).__name__}: {exc}")

try:
    decode(blob[:-10])
except TruncatedPayloadError as exc:
    print(f"dropped trailing bytes   -> {type(exc).__name__}: {exc}")
