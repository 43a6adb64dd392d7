"""Physical witnesses along dynamical maps.

Trace-distance (information backflow) curves, the Horodecki teleportation
criterion for one-sided evolved singlets, and a CP-indivisibility measure
that integrates the channel-robustness curve over its rising segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channels import Channel, DynamicalMap, apply, identity_map
from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, kron, trace_distance, trace_norm
from .robustness import NoiseClass, parse_noise, sweep

DEAD_BAND = 2e-3
MIN_POINTS_PER_PERIOD = 10

_KET01 = np.array([0.0, 1.0, 0.0, 0.0])
_KET10 = np.array([0.0, 0.0, 1.0, 0.0])
SINGLET = np.outer(_KET01 - _KET10, _KET01 - _KET10) / 2


class CurvePoint(NamedTuple):
    t: float
    value: float


@dataclass(frozen=True)
class IndivisibilityReport:
    n_raw: float
    n_normalized: float
    rising_segments: tuple[tuple[float, float], ...]
    reference: DynamicalMap
    curve: tuple[CurvePoint, ...]


def blp_curve(
    map_: DynamicalMap,
    rho1: np.ndarray,
    rho2: np.ndarray,
    t_grid: Sequence[float],
) -> list[CurvePoint]:
    """Trace distance between the two evolved states along the grid."""
    points = []
    for t in t_grid:
        ch = map_.evaluate(t)
        points.append(CurvePoint(t, trace_distance(apply(ch, rho1), apply(ch, rho2))))
    return points


def one_sided_apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """(1 (x) L)(rho) for a two-qubit state rho, acting on the second factor."""
    if ch.din != 2 or ch.dout != 2 or rho.shape != (4, 4):
        raise ValueError("one_sided_apply expects a qubit channel and a two-qubit state")
    r = rho.reshape(2, 2, 2, 2)
    c = ch.choi.reshape(2, 2, 2, 2)
    return np.einsum("ikjl,kalb->iajb", r, c).reshape(4, 4)


def teleport_fidelity(map_: DynamicalMap, t: float) -> tuple[float, float]:
    """Horodecki criterion for the singlet evolved one-sidedly to time t.

    Returns (n_value, f_max): n_value is the trace norm of the 3x3 Pauli
    correlation matrix of the output state; the optimal teleportation
    fidelity is (1 + n/3)/2 when n > 1 and the classical 2/3 otherwise.
    """
    ch = map_.evaluate(t)
    if ch.din != 2 or ch.dout != 2:
        raise ValueError("teleportation witness requires a qubit map")
    rho = one_sided_apply(ch, SINGLET)
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    s = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            s[i, j] = np.trace(rho @ kron(si, sj)).real
    n_value = trace_norm(s)
    f_max = 0.5 * (1 + n_value / 3) if n_value > 1 else 2 / 3
    return n_value, f_max


def rising_segments(
    ts: Sequence[float], values: Sequence[float], dead_band: float = DEAD_BAND
) -> list[tuple[float, float]]:
    """Maximal rising stretches of a sampled curve.

    A segment opens on a grid interval climbing by more than dead_band and
    closes on one falling by more than dead_band; smaller moves in between
    (the grid-search curve is a step function, so genuine rises contain flat
    treads) neither close the segment nor extend its reported end, which is
    the last climbing interval.
    """
    if len(ts) != len(values):
        raise ValueError("ts and values must have equal length")
    segments = []
    start = None
    end = None
    for k in range(len(ts) - 1):
        step = values[k + 1] - values[k]
        if step > dead_band:
            if start is None:
                start = ts[k]
            end = ts[k + 1]
        elif step < -dead_band and start is not None:
            segments.append((start, end))
            start = end = None
    if start is not None:
        segments.append((start, end))
    return segments


def indivisibility_from_curve(
    ts: Sequence[float],
    rs: Sequence[float],
    reference: DynamicalMap,
    dead_band: float = DEAD_BAND,
    integrand: str = "robustness",
) -> IndivisibilityReport:
    """Measure a precomputed robustness curve: integrate it over the grid
    intervals where the forward difference exceeds dead_band."""
    if integrand not in ("robustness", "derivative"):
        raise ValueError(f"integrand must be 'robustness' or 'derivative', got {integrand!r}")
    total = 0.0
    for k in range(len(ts) - 1):
        if rs[k + 1] - rs[k] > dead_band:
            if integrand == "robustness":
                total += 0.5 * (rs[k] + rs[k + 1]) * (ts[k + 1] - ts[k])
            else:
                total += rs[k + 1] - rs[k]
    return IndivisibilityReport(
        n_raw=total,
        n_normalized=total / (1 + total),
        rising_segments=tuple(rising_segments(ts, rs, dead_band)),
        reference=reference,
        curve=tuple(CurvePoint(t, r) for t, r in zip(ts, rs)),
    )


def cp_indivisibility_measure(
    map_: DynamicalMap,
    t_grid: Sequence[float],
    reference: DynamicalMap | None = None,
    noise: NoiseClass = NoiseClass.GENERIC,
    dr: float = 0.005,
    dead_band: float = DEAD_BAND,
    integrand: str = "robustness",
    **sweep_kwargs,
) -> IndivisibilityReport:
    """Integrate the robustness curve against a fixed CP-divisible reference.

    The robustness r(t) of (reference_t, map_t) is computed on the grid, the
    sign of the forward difference (with a dead band absorbing grid-search
    quantization) selects the rising segments, and r is integrated over them
    by the trapezoid rule. integrand="derivative" instead accumulates the
    total rise, the information-backflow analogue. The reference defaults to
    the identity map and is a fixed choice, not optimized over.
    """
    if len(t_grid) < 3:
        raise ValueError("t_grid too coarse: need at least 3 points")
    if integrand not in ("robustness", "derivative"):
        raise ValueError(f"integrand must be 'robustness' or 'derivative', got {integrand!r}")
    omega = map_.params.get("omega")
    if omega:
        period = math.pi / omega
        max_step = max(b - a for a, b in zip(t_grid, t_grid[1:]))
        if max_step > period / MIN_POINTS_PER_PERIOD + 1e-12:
            raise ValueError(
                f"t_grid step {max_step:g} undersamples the oscillation"
                f" (need <= {period / MIN_POINTS_PER_PERIOD:g})"
            )
    reference = identity_map() if reference is None else reference
    noise = parse_noise(noise)
    records = sweep(reference, map_, t_grid, noise=noise, dr=dr, **sweep_kwargs)
    rs = [
        rec.r_generic if noise is NoiseClass.GENERIC else rec.r_cd for rec in records
    ]
    ts = [rec.t for rec in records]
    return indivisibility_from_curve(ts, rs, reference, dead_band, integrand)
