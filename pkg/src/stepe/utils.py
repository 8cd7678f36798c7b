import math
import zlib

import numpy as np


def derive_seed(master, purpose, *extra):
    """Independent 32-bit seed for one concern (``purpose``) of a run seeded with ``master``."""
    key = [int(master) & 0xFFFFFFFF, zlib.crc32(purpose.encode("utf-8"))]
    key.extend(int(e) & 0xFFFFFFFF for e in extra)
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def round_half_away(x):
    """Round to the nearest integer, halves away from zero (Python's round() is banker's)."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))
