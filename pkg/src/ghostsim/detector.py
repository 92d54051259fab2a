"""Triggered-camera coincidence acquisition as a stochastic process.

Each trigger opens the camera gate once; within a gate at most one photon-2
detection lands on a pixel, chosen with probability
pair_detection_prob * map(i, j) / sum(map). The gate total is Poisson in
(trigger_rate * exposure). Gates are split into a fixed number of blocks with
seeds spawned from the configured seed, so any worker count reproduces the
same frame bit for bit; the per-pixel marginals remain exactly Poisson.
Dark counts are an additive per-pixel Poisson field drawn in row-major order
from a dedicated child seed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import GridMismatchError, ParameterError
from .experiments import CoincidenceMap

# fixed shard count; workers consume shards, they never repartition them
GATE_BLOCKS = 32


@dataclass(frozen=True)
class DetectorConfig:
    """Acquisition parameters of the triggered single-photon camera.

    trigger_rate: herald detections per second opening the gate.
    gate_width: electronic shutter open time per trigger, seconds.
    gate_delay: trigger-to-shutter delay, seconds (bookkeeping only).
    exposure: total frame-accumulation time, seconds.
    pair_detection_prob: probability per gate that the partner photon is
      detected anywhere on the camera.
    dark_rate: spurious counts per pixel per second.
    seed: integer seed for the reproducible stream.
    """

    trigger_rate: float = 2e4
    gate_width: float = 10e-9
    gate_delay: float = 20e-9
    exposure: float = 1800.0
    pair_detection_prob: float = 0.1
    dark_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("trigger_rate", "gate_width", "gate_delay", "exposure", "dark_rate"):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {val!r}")
        if not (0.0 <= self.pair_detection_prob <= 1.0):
            raise ParameterError("pair_detection_prob must lie in [0, 1]")
        if not isinstance(self.seed, (int, np.integer)):
            raise ParameterError("seed must be an integer")


@dataclass(frozen=True)
class CountFrame:
    """Accumulated nonnegative integer counts on the camera grid."""

    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.size == 0:
            raise ParameterError("count frame must be a non-empty 2D array")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ParameterError("counts must be integers")
        if np.any(counts < 0):
            raise ParameterError("counts cannot be negative")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class SignedCountFrame:
    """Difference of two count frames; negative values are expected."""

    counts: np.ndarray
    meta: dict = field(default_factory=dict)


def expected_gate_count(cfg: DetectorConfig) -> int:
    """Number of gate openings expected in one exposure."""
    return int(round(cfg.trigger_rate * cfg.exposure))


def _simulate(
    cmap: CoincidenceMap, cfg: DetectorConfig, seedseq: np.random.SeedSequence,
    workers: int,
) -> CountFrame:
    if cmap.signed:
        raise ParameterError("cannot simulate counts from a signed map")
    values = cmap.values
    total = float(values.sum())
    shape = values.shape
    npix = values.size

    children = seedseq.spawn(GATE_BLOCKS + 1)
    lam_block = cfg.trigger_rate * cfg.exposure / GATE_BLOCKS

    if total > 0:
        pvals = np.empty(npix + 1)
        pvals[:npix] = cfg.pair_detection_prob * values.ravel() / total
        pvals[npix] = 1.0 - cfg.pair_detection_prob
    else:
        pvals = None

    def one_block(b: int) -> Tuple[int, np.ndarray]:
        rng = np.random.Generator(np.random.PCG64(children[b]))
        n_gates = int(rng.poisson(lam_block))
        if pvals is None or n_gates == 0:
            return n_gates, np.zeros(npix, dtype=np.int64)
        draw = rng.multinomial(n_gates, pvals)
        return n_gates, draw[:npix].astype(np.int64)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_block, range(GATE_BLOCKS)))
    else:
        results = [one_block(b) for b in range(GATE_BLOCKS)]

    gates = 0
    counts = np.zeros(npix, dtype=np.int64)
    for n_gates, block_counts in results:
        gates += n_gates
        counts += block_counts
    counts = counts.reshape(shape)

    if cfg.dark_rate > 0:
        dark_rng = np.random.Generator(np.random.PCG64(children[GATE_BLOCKS]))
        counts = counts + dark_rng.poisson(cfg.dark_rate * cfg.exposure, size=shape)

    meta = {
        "gates_opened": int(gates),
        "exposure_s": cfg.exposure,
        "seed": cfg.seed,
        "pair_detection_prob": cfg.pair_detection_prob,
        "dark_rate_per_pixel_s": cfg.dark_rate,
    }
    return CountFrame(counts=counts, meta=meta)


def simulate_exposure(
    cmap: CoincidenceMap, cfg: DetectorConfig, workers: int = 1
) -> CountFrame:
    """One accumulated frame drawn from a coincidence map."""
    return _simulate(cmap, cfg, np.random.SeedSequence(cfg.seed), workers)


def build_ghost_image(
    signal_map: CoincidenceMap,
    background_map: CoincidenceMap,
    cfg: DetectorConfig,
    workers: int = 1,
) -> SignedCountFrame:
    """Background-corrected count image: signal frame minus background frame.

    The two exposures use independent child seeds spawned from cfg.seed, so
    the pair is reproducible as a unit.
    """
    if signal_map.shape != background_map.shape:
        raise GridMismatchError(
            f"shape mismatch: {signal_map.shape} vs {background_map.shape}"
        )
    sig_seed, bg_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    sig = _simulate(signal_map, cfg, sig_seed, workers)
    bg = _simulate(background_map, cfg, bg_seed, workers)
    meta = {
        "signal_gates": sig.meta["gates_opened"],
        "background_gates": bg.meta["gates_opened"],
        "exposure_s": cfg.exposure,
        "seed": cfg.seed,
    }
    return SignedCountFrame(counts=sig.counts - bg.counts, meta=meta)
