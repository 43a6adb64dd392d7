"""Quantum channels as Choi matrices, plus the built-in dynamical-map families.

Choi convention: C = sum_ij |i><j| (x) L(|i><j|), unnormalized (Tr C = din),
with subsystem order input (x) output. Complete positivity is C >= 0 and trace
preservation is Tr_out C = identity on the input factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .linalg import dagger, is_hermitian, partial_trace

CP_EIG_FLOOR = -1e-9
TP_TOL = 1e-9
POVM_EIG_FLOOR = -1e-10
POVM_SUM_TOL = 1e-10

FAMILIES = ("depolarizing", "amplitude_damping", "eternal", "identity")


@dataclass(frozen=True)
class Channel:
    """CPTP map stored as an unnormalized Choi matrix."""

    din: int
    dout: int
    choi: np.ndarray

    def __post_init__(self):
        d = self.din * self.dout
        if self.choi.shape != (d, d):
            raise ValueError(f"choi must be {d}x{d} for din={self.din}, dout={self.dout}")
        if not is_hermitian(self.choi):
            raise ValueError("choi matrix must be Hermitian")
        w = np.linalg.eigvalsh(self.choi)
        if w[0] < CP_EIG_FLOOR:
            raise ValueError(f"choi matrix is not PSD (min eigenvalue {w[0]:.3e}): map is not CP")
        marg = partial_trace(self.choi, [self.din, self.dout], keep={0})
        if np.max(np.abs(marg - np.eye(self.din))) > TP_TOL:
            raise ValueError("Tr_out(choi) != identity: map is not trace preserving")

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def choi_from_map(fn: Callable[[np.ndarray], np.ndarray], din: int) -> np.ndarray:
    """Choi matrix of a linear map given by its action on matrices."""
    blocks = [
        [fn(_basis_unit(din, i, j)) for j in range(din)] for i in range(din)
    ]
    return np.block(blocks)


def _basis_unit(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """Act with the channel on a matrix: L(rho) = Tr_in[(rho^T (x) 1) C]."""
    if rho.shape != (ch.din, ch.din):
        raise ValueError(f"state must be {ch.din}x{ch.din}, got {rho.shape}")
    t = ch.choi.reshape(ch.din, ch.dout, ch.din, ch.dout)
    return np.einsum("ij,iajb->ab", rho, t)


def dual_apply(ch: Channel, effect: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action L*(E), defined by Tr[rho L*(E)] = Tr[L(rho) E]."""
    if effect.shape != (ch.dout, ch.dout):
        raise ValueError(f"effect must be {ch.dout}x{ch.dout}, got {effect.shape}")
    t = ch.choi.reshape(ch.din, ch.dout, ch.din, ch.dout)
    return np.einsum("jaib,ba->ij", t, effect)


def compose(after: Channel, before: Channel) -> Channel:
    """Choi matrix of after o before."""
    if after.din != before.dout:
        raise ValueError(
            f"cannot compose: after.din={after.din} != before.dout={before.dout}"
        )
    choi = choi_from_map(lambda e: apply(after, apply(before, e)), before.din)
    return Channel(before.din, after.dout, choi)


def identity_channel(d: int = 2) -> Channel:
    choi = choi_from_map(lambda e: e, d)
    return Channel(d, d, choi)


def completely_depolarizing(eta: np.ndarray, din: int | None = None) -> Channel:
    """Channel sending every input to the fixed state eta; Choi is 1_in (x) eta."""
    dout = eta.shape[0]
    din = dout if din is None else din
    return Channel(din, dout, np.kron(np.eye(din), eta).astype(complex))


def depolarizing_choi(w: float) -> Channel:
    """Qubit map rho -> w rho + (1-w) 1/2.

    CP requires -1/3 <= w <= 1; the time-parametrized families only use
    [0, 1], but the negative-shrink region is a legitimate noise channel.
    """
    if not -1 / 3 - 1e-12 <= w <= 1 + 1e-12:
        raise ValueError(f"depolarizing shrink factor w={w} outside CP range [-1/3, 1]")
    c = np.diag([(1 + w) / 2, (1 - w) / 2, (1 - w) / 2, (1 + w) / 2]).astype(complex)
    c[0, 3] = c[3, 0] = w
    return Channel(2, 2, c)


def amplitude_damping_choi(w: float) -> Channel:
    """Qubit amplitude damping with decay probability w (|1> -> |0>)."""
    if not 0 <= w <= 1 + 1e-12:
        raise ValueError(f"amplitude damping parameter w={w} outside [0, 1]")
    w = min(w, 1.0)
    c = np.diag([1.0, 0.0, w, 1 - w]).astype(complex)
    c[0, 3] = c[3, 0] = math.sqrt(1 - w)
    return Channel(2, 2, c)


def eternal_choi(t: float) -> Channel:
    """Qubit Pauli map that is CP-indivisible for all t > 0 yet shows no
    trace-distance backflow; a(t) = (1+exp(-2t))/2 and the corner weight
    b(t) = exp(-t) cosh(t) (the closed form of exp(-int_0^t (1-tanh x) dx)).
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    a = (1 + math.exp(-2 * t)) / 2
    b = math.exp(-t) * math.cosh(t)
    c = np.diag([a, 1 - a, 1 - a, a]).astype(complex)
    c[0, 3] = c[3, 0] = b
    return Channel(2, 2, c)


@dataclass(frozen=True)
class DynamicalMap:
    """Named time-parametrized channel family t -> Channel.

    families and parameters:
      depolarizing      w(t) = exp(-lam t), or exp(-lam t) cos^2(omega t)
                        when omega is given
      amplitude_damping w(t) = 1 - exp(-alpha t) cos^2(omega t)
      eternal           fixed rates, no parameters
      identity          identity channel for all t
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "params", dict(self.params))

    def evaluate(self, t: float) -> Channel:
        """Channel at time t >= 0; t = 0 is the identity for every family."""
        if t < 0:
            raise ValueError(f"time must be nonnegative, got {t}")
        p = self.params
        if self.family == "identity":
            return identity_channel(2)
        if self.family == "depolarizing":
            w = math.exp(-p["lam"] * t)
            if "omega" in p:
                w *= math.cos(p["omega"] * t) ** 2
            return depolarizing_choi(w)
        if self.family == "amplitude_damping":
            w = 1 - math.exp(-p["alpha"] * t) * math.cos(p["omega"] * t) ** 2
            return amplitude_damping_choi(min(max(w, 0.0), 1.0))
        return eternal_choi(t)

    def label(self) -> str:
        if not self.params:
            return self.family
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.family}({args})"


def depolarizing_map(lam: float, omega: float | None = None) -> DynamicalMap:
    params = {"lam": lam} if omega is None else {"lam": lam, "omega": omega}
    return DynamicalMap("depolarizing", params)


def amplitude_damping_map(alpha: float, omega: float) -> DynamicalMap:
    return DynamicalMap("amplitude_damping", {"alpha": alpha, "omega": omega})


def eternal_map() -> DynamicalMap:
    return DynamicalMap("eternal")


def identity_map() -> DynamicalMap:
    return DynamicalMap("identity")


@dataclass(frozen=True)
class ConstantMap:
    """Time-independent map around a fixed channel, e.g. user-supplied Choi
    input. Note t = 0 is the channel itself, not the identity."""

    channel: Channel
    params: Mapping[str, float] = field(default_factory=dict)

    def evaluate(self, t: float) -> Channel:
        if t < 0:
            raise ValueError(f"time must be nonnegative, got {t}")
        return self.channel

    def label(self) -> str:
        return "constant"


@dataclass(frozen=True)
class Povm:
    """Finite-outcome measurement: PSD effects summing to the identity."""

    effects: tuple[np.ndarray, ...]
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(np.asarray(e, dtype=complex) for e in self.effects))
        total = np.zeros((self.dimension, self.dimension), dtype=complex)
        for e in self.effects:
            if e.shape != (self.dimension, self.dimension):
                raise ValueError(f"effect shape {e.shape} != dimension {self.dimension}")
            if not is_hermitian(e, 1e-10):
                raise ValueError("POVM effects must be Hermitian")
            if np.linalg.eigvalsh(e)[0] < POVM_EIG_FLOOR:
                raise ValueError("POVM effects must be PSD")
            total += e
        if np.max(np.abs(total - np.eye(self.dimension))) > POVM_SUM_TOL:
            raise ValueError("POVM effects must sum to the identity")

    def __len__(self) -> int:
        return len(self.effects)


def projective_povm(basis: np.ndarray) -> Povm:
    """Rank-1 projective measurement onto the columns of a unitary."""
    d = basis.shape[0]
    if np.max(np.abs(dagger(basis) @ basis - np.eye(d))) > 1e-10:
        raise ValueError("basis columns must be orthonormal")
    effects = tuple(np.outer(basis[:, k], basis[:, k].conj()) for k in range(d))
    return Povm(effects, d)


def pushforward_povm(ch: Channel, m: Povm) -> Povm:
    """Heisenberg-picture image {L*(M(x))} of a measurement on the output space."""
    if m.dimension != ch.dout:
        raise ValueError("measurement dimension must match channel output dimension")
    return Povm(tuple(dual_apply(ch, e) for e in m.effects), ch.din)


def channel_to_json(ch: Channel) -> str:
    return json.dumps(
        {
            "din": ch.din,
            "dout": ch.dout,
            "choi_re": ch.choi.real.tolist(),
            "choi_im": ch.choi.imag.tolist(),
        }
    )


def channel_from_json(text: str) -> Channel:
    data = json.loads(text)
    try:
        din, dout = int(data["din"]), int(data["dout"])
        choi = np.array(data["choi_re"], dtype=float) + 1j * np.array(data["choi_im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed channel JSON: {exc}") from exc
    return Channel(din, dout, choi)
