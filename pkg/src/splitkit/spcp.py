"""Stable principal component pursuit instances.

    minimize    1/2 ||Z||_F^2 + beta1 ||L||_* + beta2 ||S||_1
    subject to  Z + L + S = b

with blocks ``x1 = Z``, ``x2 = L``, ``x3 = S`` and identity maps.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ParameterError
from .functions import l1_norm, nuclear_norm, squared_frobenius
from .model import LinearBlockMap, SeparableProblem, fro
from .prox import singular_values

MAGIC = b"SPCP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIqd")  # magic, version, m, r, seed, beta1
RANK_RTOL = 1e-6
VALUE_RANGE = 500.0


@dataclass(frozen=True, eq=False)
class SpcpInstance:
    """Synthetic ``b = L_true + S_true + Z_true`` with its weights."""

    m: int
    r: int
    L_true: np.ndarray
    S_true: np.ndarray
    Z_true: np.ndarray
    b: np.ndarray
    beta1: float
    beta2: float
    seed: int

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.S_true))


@dataclass(frozen=True)
class RecoveryMetrics:
    rel_L_star: float
    rel_S_star: float
    rank_Lk: int
    rel_L_step: float
    rel_S_step: float


def _streams(seed: int):
    """Independent generators for L1, L2, support, values and noise."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(5)]


def sample_support(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """``k`` distinct indices of ``range(n)`` by a partial Fisher-Yates shuffle."""
    if not 0 <= k <= n:
        raise ParameterError(f"cannot draw {k} distinct positions out of {n}")
    perm = np.arange(n)
    draws = rng.integers(np.arange(k), n) if k else np.empty(0, dtype=np.int64)
    for i, j in enumerate(draws.tolist()):
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:k]


def gen_spcp_instance(
    m: int,
    rank_frac: float = 0.05,
    sparsity_frac: float = 0.05,
    noise_std: float = 1e-5,
    beta1: float = 0.05,
    seed: int = 0,
) -> SpcpInstance:
    """Draw a seeded instance.

    ``L_true = L1 L2^T`` with standard normal ``m x r`` factors,
    ``r = round(rank_frac m)``; ``S_true`` has ``round(sparsity_frac m^2)``
    nonzeros uniform on ``[-500, 500]``; ``Z_true`` is Gaussian noise. Each
    ingredient has its own random stream.
    """
    m = int(m)
    if m < 2:
        raise ParameterError("m must be at least 2")
    if not 0 < rank_frac * m < m:
        raise ParameterError(f"rank fraction {rank_frac} infeasible for m={m}")
    r = int(round(rank_frac * m))
    if not 1 <= r < m:
        raise ParameterError(f"rank fraction {rank_frac} rounds to rank {r} for m={m}")
    if not 0 <= sparsity_frac <= 1:
        raise ParameterError(f"sparsity fraction must lie in [0, 1], got {sparsity_frac}")
    if not noise_std >= 0:
        raise ParameterError("noise_std must be nonnegative")
    if not beta1 > 0:
        raise ParameterError("beta1 must be positive")
    g_l1, g_l2, g_sup, g_val, g_noise = _streams(seed)
    L_true = g_l1.standard_normal((m, r)) @ g_l2.standard_normal((m, r)).T
    k = int(round(sparsity_frac * m * m))
    idx = sample_support(g_sup, m * m, k)
    S_flat = np.zeros(m * m)
    vals = g_val.uniform(-VALUE_RANGE, VALUE_RANGE, k)
    vals[vals == 0.0] = VALUE_RANGE  # keep the support exact
    S_flat[idx] = vals
    S_true = S_flat.reshape(m, m)
    Z_true = noise_std * g_noise.standard_normal((m, m))
    return _build(m, r, L_true, S_true, Z_true, beta1, seed)


def _build(m, r, L_true, S_true, Z_true, beta1, seed):
    return SpcpInstance(
        m=m, r=r, L_true=L_true, S_true=S_true, Z_true=Z_true,
        b=L_true + S_true + Z_true, beta1=float(beta1), beta2=float(beta1) / math.sqrt(m), seed=int(seed),
    )


def assemble_spcp_problem(inst: SpcpInstance) -> SeparableProblem:
    """Blocks ``(1/2 ||.||^2, beta1 ||.||_*, beta2 ||.||_1)`` with identity maps."""
    eye = LinearBlockMap.identity()
    return SeparableProblem(
        blocks=(squared_frobenius(1.0), nuclear_norm(inst.beta1), l1_norm(inst.beta2)),
        maps=(eye, eye, eye),
        rhs=inst.b,
    )


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Number of singular values above ``rtol * sigma_max``."""
    s = singular_values(M)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def _rel(a, ref):
    d = fro(ref)
    return fro(a - ref) / d if d > 0 else fro(a - ref)


def recovery_metrics(inst: SpcpInstance, L_k, S_k, L_prev, S_prev) -> RecoveryMetrics:
    """Errors against the ground truth and against the previous iterate.

    Ratios fall back to absolute errors when the reference is zero.
    """
    for M in (L_k, S_k, L_prev, S_prev):
        if np.shape(M) != (inst.m, inst.m):
            raise DomainError(f"expected {inst.m}x{inst.m} iterates, got {np.shape(M)}")
    return RecoveryMetrics(
        rel_L_star=_rel(L_k, inst.L_true),
        rel_S_star=_rel(S_k, inst.S_true),
        rank_Lk=numerical_rank(L_k),
        rel_L_step=_rel(L_k, L_prev),
        rel_S_step=_rel(S_k, S_prev),
    )


def save_instance(inst: SpcpInstance, path) -> None:
    """Write the little-endian binary container; ``b`` is not stored."""
    with open(Path(path), "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, inst.m, inst.r, inst.seed, inst.beta1))
        for M in (inst.L_true, inst.S_true, inst.Z_true):
            fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def load_instance(path) -> SpcpInstance:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DomainError("truncated instance file")
    magic, version, m, r, seed, beta1 = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DomainError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DomainError(f"unsupported instance format version {version}")
    n = m * m
    expected = _HEADER.size + 3 * 8 * n
    if len(data) != expected:
        raise DomainError(f"instance file has {len(data)} bytes, expected {expected}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
    L_true, S_true, Z_true = (body[i * n:(i + 1) * n].reshape(m, m) for i in range(3))
    return _build(m, r, L_true, S_true, Z_true, beta1, seed)
