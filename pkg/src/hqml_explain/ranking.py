import numpy as np


def importance_order(scores) -> list[int]:
    """Feature indices by descending score; equal scores keep ascending index."""
    s = np.asarray(scores, dtype=float)
    return sorted(range(s.shape[0]), key=lambda j: (-s[j], j))


def top_k(scores, k: int) -> list[int]:
    return importance_order(scores)[:k]
