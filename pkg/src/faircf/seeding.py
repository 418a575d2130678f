"""Deterministic seed derivation: one root seed, labeled substreams.

Every random decision in the package flows from a single root seed.  A
subsystem asks for its own seed with a label path, e.g.
``derive_seed(root, "train", "value", "3")``, and always gets the same
63-bit integer back, regardless of platform or call order.
"""

import hashlib


def derive_seed(base: int, *labels: str) -> int:
    """Stable 63-bit seed for the given root seed and label path."""
    text = ":".join([str(int(base)), *map(str, labels)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & ((1 << 63) - 1)
