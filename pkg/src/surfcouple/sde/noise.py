import zlib

import numpy as np


class NoiseSource:
    """Standard normal draws from a counter-based Philox stream keyed by (seed, stream_id).

    The draws are a pure function of the key, so a trajectory produces the same path whichever worker
    runs it.
    """

    def __init__(self, seed: int, stream_id: int):
        assert 0 <= seed < 2**64 and 0 <= stream_id < 2**64, "seed and stream_id must be unsigned 64-bit"
        self.seed = seed
        self.stream_id = stream_id
        self.rng = np.random.Generator(np.random.Philox(key=(seed << 64) | stream_id))

    def normal(self, size: int) -> np.ndarray:
        return self.rng.standard_normal(size)

    def uniform(self) -> float:
        return float(self.rng.random())


def scenario_seed(seed: int, name: str) -> int:
    """Mixes a scenario name into a base seed (crc32, so the result does not depend on PYTHONHASHSEED)."""
    state = np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1, np.uint64)
    return int(state[0])
