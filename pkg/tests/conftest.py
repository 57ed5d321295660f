import numpy as np


def smooth_profile(t, seed=7, offset=2.0):
    """A fixed random trigonometric polynomial, smooth on [0, 1]."""
    rng = np.random.RandomState(seed)
    c = rng.uniform(-1.0, 1.0, 4)
    t = np.asarray(t, dtype=float)
    return offset + c[0] * t + c[1] * np.cos(2 * t) + c[2] * np.sin(3 * t) + c[3] * t ** 2
