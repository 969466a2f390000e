# app/drivers/rng.py
"""
Flujos aleatorios por réplica.

Cada réplica recibe un generador Philox (basado en contador) derivado de
(master_seed, réplica, flujo) con SeedSequence.spawn_key, así que los
resultados no dependen del orden ni del número de workers.
"""
import numpy as np

COUPLED_STREAM = 0
INDEPENDENT_STREAM = 1
PROBE_STREAM = 2


def replicate_rng(master_seed: int, replicate: int, stream: int = COUPLED_STREAM) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate), int(stream)))
    return np.random.Generator(np.random.Philox(seq))
