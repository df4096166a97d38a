"""Counter-based random variates: uniform, gamma and Dirichlet.

Streams are Philox4x32-10 generators. The 64-bit master seed is the key and
the 64-bit stream index occupies the upper half of the 128-bit counter, the
lower half counting blocks. Deriving stream ``j`` costs O(1) and does not
depend on any other stream, so the rows of a sample can be produced in any
order or on any number of threads.

The low-level kernels operate on a ``uint64[8]`` state vector so they can be
inlined into the jitted sampler:

    [0] master seed (key)     [1] stream index (counter words 2-3)
    [2] block counter         [3] position in output buffer
    [4:6] output buffer, two 64-bit words per block
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "DirichletParams",
    "RngStream",
    "philox4x32",
    "sample_dirichlet",
    "sample_dirichlet_batch",
    "sample_gamma",
    "sample_log_gamma",
    "sample_uniform_indices",
]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)
_U32 = np.uint64(32)
_U11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_ZERO = np.uint64(0)
_TWO_M53 = 1.0 / 9007199254740992.0

# Below this shape the direct small-shape rejection sampler beats boosting,
# and equal Dirichlet concentrations are drawn as one aggregate.
SMALL_SHAPE = 0.25

_jit = nb.njit(cache=True, nogil=True)
# Hot helpers are inlined at the numba IR level; plain calls between jitted
# functions are not inlined by LLVM and cost about 2x on the RNG path.
_inline = nb.njit(cache=True, nogil=True, inline="always")


@_inline
def _philox_rounds(c0, c1, c2, c3, k0, k1):
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> _U32) ^ c1 ^ k0, p1 & _MASK32, (p0 >> _U32) ^ c3 ^ k1, p0 & _MASK32
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


@_jit
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 on one block; every argument is a 32-bit word in a uint64."""
    return _philox_rounds(c0, c1, c2, c3, k0, k1)


@_inline
def stream_init(state, master_seed, stream_index):
    state[0] = master_seed
    state[1] = stream_index
    state[2] = _ZERO
    state[3] = _TWO


@_inline
def next_u64(state):
    if state[3] >= _TWO:
        state[2] = state[2] + _ONE
        ctr = state[2]
        idx = state[1]
        key = state[0]
        a, b, c, d = _philox_rounds(
            ctr & _MASK32, ctr >> _U32, idx & _MASK32, idx >> _U32, key & _MASK32, key >> _U32
        )
        state[4] = (a << _U32) | b
        state[5] = (c << _U32) | d
        state[3] = _ZERO
    out = state[4 + np.int64(state[3])]
    state[3] = state[3] + _ONE
    return out


@_inline
def next_uniform(state):
    """Double in [0, 1) with 53 random bits."""
    return np.float64(next_u64(state) >> _U11) * _TWO_M53


@_inline
def next_uniform_open(state):
    """Double in (0, 1); safe to pass to log."""
    return (np.float64(next_u64(state) >> _U11) + 0.5) * _TWO_M53


@_inline
def next_below(state, bound):
    """Unbiased integer in [0, bound); bound >= 1."""
    b = np.uint64(bound)
    if b <= _MASK32:
        # Lemire's multiply-shift with rejection on the low word.
        prod = (next_u64(state) >> _U32) * b
        low = prod & _MASK32
        if low < b:
            t = (_TWO32 - b) % b
            while low < t:
                prod = (next_u64(state) >> _U32) * b
                low = prod & _MASK32
        return np.int64(prod >> _U32)
    floor = (_ZERO - b) % b
    while True:
        x = next_u64(state)
        if x >= floor:
            return np.int64(x % b)


@_jit
def next_normal(state):
    # Box-Muller, one output per call so draws never straddle calls.
    u1 = next_uniform_open(state)
    u2 = next_uniform(state)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@_jit
def _log_gamma_ge1(state, shape):
    # Marsaglia-Tsang squeeze; returns log of the variate.
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    while True:
        x = next_normal(state)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = next_uniform_open(state)
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return np.log(d) + np.log(v)
        lv = np.log(v)
        if np.log(u) < 0.5 * x2 + d * (1.0 - v + lv):
            return np.log(d) + lv


@_jit
def _log_gamma_small(state, shape):
    # Exact rejection sampler for small shapes (Liu, Martin & Syring 2017).
    # Works on z = -shape * log(X), whose density is proportional to
    # exp(-z - exp(-z / shape)); the envelope is Exp(1) on z >= 0 and a
    # scaled exponential with rate 1/shape - 1 on z < 0.
    lam = 1.0 / shape - 1.0
    w = shape / (np.e * (1.0 - shape))
    r = 1.0 / (1.0 + w)
    log_wlam = np.log(w * lam)
    while True:
        u = next_uniform_open(state)
        if u <= r:
            z = -np.log(u / r)
            ratio = np.exp(-np.exp(-z / shape))
        else:
            z = np.log(next_uniform_open(state)) / lam
            ratio = np.exp(-z - np.exp(-z / shape) - log_wlam - lam * z)
        # The acceptance uniform lies in [0, 1), so ratio 1 always accepts.
        if ratio >= 1.0 or next_uniform(state) < ratio:
            return -z / shape


@_jit
def log_gamma_variate(state, shape):
    """log of a Gamma(shape, 1) draw, finite for any shape > 0."""
    if shape == 1.0:
        return np.log(-np.log(next_uniform_open(state)))
    if shape > 1.0:
        return _log_gamma_ge1(state, shape)
    if shape < SMALL_SHAPE:
        return _log_gamma_small(state, shape)
    # Gamma(a) = Gamma(a + 1) * U**(1/a), kept in log space.
    lg = _log_gamma_ge1(state, shape + 1.0)
    return lg + np.log(next_uniform_open(state)) / shape


@_jit
def dirichlet_into(state, alpha, out):
    """Fill ``out`` with a Dirichlet(alpha) draw.

    Gamma variates are combined in log space: each weight is
    exp(l_i - max l) / sum_j exp(l_j - max l), which equals g_i / sum g_j
    but cannot underflow to an all-zero vector.

    When several components share the smallest concentration ``a`` (< 0.25),
    their gammas are drawn as S * D with S ~ Gamma(f*a) and
    D ~ Dirichlet(a, ..., a), which has the same joint law. If S is
    negligible next to the other components every one of their weights is
    exactly 0.0 in double precision and D is never drawn.
    """
    k = alpha.shape[0]
    if k == 1:
        out[0] = 1.0
        return
    amin = alpha[0]
    for i in range(1, k):
        if alpha[i] < amin:
            amin = alpha[i]
    f = 0
    for i in range(k):
        if alpha[i] == amin:
            f += 1
    lmax = -np.inf
    if amin < SMALL_SHAPE and 2 <= f < k:
        for i in range(k):
            if alpha[i] != amin:
                out[i] = log_gamma_variate(state, alpha[i])
                if out[i] > lmax:
                    lmax = out[i]
        ls = log_gamma_variate(state, f * amin)
        if np.exp(ls - lmax) == 0.0:
            for i in range(k):
                if alpha[i] == amin:
                    out[i] = -np.inf
        else:
            gmax = -np.inf
            for i in range(k):
                if alpha[i] == amin:
                    out[i] = log_gamma_variate(state, amin)
                    if out[i] > gmax:
                        gmax = out[i]
            s = 0.0
            for i in range(k):
                if alpha[i] == amin:
                    s += np.exp(out[i] - gmax)
            shift = ls - gmax - np.log(s)
            for i in range(k):
                if alpha[i] == amin:
                    out[i] += shift
                    if out[i] > lmax:
                        lmax = out[i]
    else:
        for i in range(k):
            out[i] = log_gamma_variate(state, alpha[i])
            if out[i] > lmax:
                lmax = out[i]
    total = 0.0
    for i in range(k):
        out[i] = np.exp(out[i] - lmax)
        total += out[i]
    if not (total > 0.0 and np.isfinite(total)):
        best = 0
        for i in range(1, k):
            if alpha[i] > alpha[best]:
                best = i
        for i in range(k):
            out[i] = 0.0
        out[best] = 1.0
        return
    for i in range(k):
        out[i] = out[i] / total


@_jit
def uniform_indices_into(state, pool_size, k, perm, out):
    """Partial Fisher-Yates over ``perm`` (identity on entry and on exit).

    Every touched slot is reset afterwards (a position >= k is first touched
    when its own value is drawn, so ``out`` names all of them), which lets
    the next sample reuse the scratch array at O(k) instead of O(pool_size).
    """
    for i in range(k):
        j = i + next_below(state, pool_size - i)
        out[i] = perm[j]
        perm[j] = perm[i]
        perm[i] = out[i]
    for i in range(k):
        perm[i] = i
        perm[out[i]] = out[i]


@_jit
def _raw_block(master_seed, stream_index, count):
    state = np.empty(8, dtype=np.uint64)
    stream_init(state, master_seed, stream_index)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = next_u64(state)
    return out


@_jit
def _dirichlet_batch(alpha, count, master_seed, first_index):
    k = alpha.shape[0]
    state = np.empty(8, dtype=np.uint64)
    out = np.empty((count, k))
    for r in range(count):
        stream_init(state, master_seed, np.uint64(first_index + r))
        dirichlet_into(state, alpha, out[r])
    return out


@_jit
def _gamma_batch(shape, count, state):
    out = np.empty(count)
    for i in range(count):
        out[i] = log_gamma_variate(state, shape)
    return out


def _as_u64(value, name):
    value = int(value)
    if not 0 <= value < 2**64:
        raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return np.uint64(value)


@dataclass
class RngStream:
    """A deterministic substream identified by ``(master_seed, stream_index)``.

    Streams are cheap values: create one per task and hand it to a thread.
    Two streams built from the same pair replay the same sequence.
    """

    master_seed: int
    stream_index: int = 0
    _state: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seed = _as_u64(self.master_seed, "master_seed")
        index = _as_u64(self.stream_index, "stream_index")
        self._state = np.empty(8, dtype=np.uint64)
        stream_init(self._state, seed, index)

    @property
    def state(self) -> np.ndarray:
        """The mutable kernel state; jitted consumers advance it in place."""
        return self._state

    def raw(self, count: int) -> np.ndarray:
        return np.array([next_u64(self._state) for _ in range(count)], dtype=np.uint64)

    def uniform(self) -> float:
        return float(next_uniform(self._state))

    def normal(self) -> float:
        return float(next_normal(self._state))

    def below(self, bound: int) -> int:
        if bound < 1:
            raise InvalidArgumentError(f"bound must be >= 1, got {bound}")
        return int(next_below(self._state, bound))

    def log_gamma_many(self, shape: float, count: int) -> np.ndarray:
        _check_shape(shape)
        return _gamma_batch(float(shape), int(count), self._state)

    def gamma_many(self, shape: float, count: int) -> np.ndarray:
        return np.exp(self.log_gamma_many(shape, count))


def _check_shape(shape):
    if not (shape > 0 and np.isfinite(shape)):
        raise InvalidArgumentError(f"gamma shape must be a positive finite number, got {shape}")


@dataclass(frozen=True)
class DirichletParams:
    """Concentration vector of a Dirichlet distribution (all entries > 0)."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.alpha, dtype=np.float64).reshape(-1)
        if a.size < 1:
            raise InvalidArgumentError("Dirichlet parameters need at least one component")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise InvalidArgumentError(f"Dirichlet parameters must be positive and finite, got {a}")
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.alpha.size

    @property
    def mean(self) -> np.ndarray:
        return self.alpha / self.alpha.sum()

    @property
    def variance(self) -> np.ndarray:
        a0 = self.alpha.sum()
        return self.alpha * (a0 - self.alpha) / (a0 * a0 * (a0 + 1.0))


def sample_uniform_indices(pool_size: int, k: int, rng: RngStream) -> np.ndarray:
    """Draw ``k`` distinct indices from ``range(pool_size)`` in selection order."""
    if not 1 <= k <= pool_size:
        raise InvalidArgumentError(f"need 1 <= k <= pool_size, got k={k}, pool_size={pool_size}")
    perm = np.arange(pool_size, dtype=np.int64)
    out = np.empty(k, dtype=np.int64)
    uniform_indices_into(rng.state, int(pool_size), int(k), perm, out)
    return out


def sample_log_gamma(shape: float, rng: RngStream) -> float:
    _check_shape(shape)
    return float(log_gamma_variate(rng.state, float(shape)))


def sample_gamma(shape: float, rng: RngStream) -> float:
    """One Gamma(shape, scale=1) draw.

    Tiny shapes produce values that underflow double precision most of the
    time; use :func:`sample_log_gamma` when the magnitude matters.
    """
    return float(np.exp(sample_log_gamma(shape, rng)))


def sample_dirichlet(params: DirichletParams | np.ndarray, rng: RngStream) -> np.ndarray:
    if not isinstance(params, DirichletParams):
        params = DirichletParams(params)
    out = np.empty(len(params))
    dirichlet_into(rng.state, params.alpha, out)
    return out


def sample_dirichlet_batch(
    params: DirichletParams | np.ndarray, count: int, seed: int, first_index: int = 0
) -> np.ndarray:
    """``count`` draws, row ``r`` taken from stream ``(seed, first_index + r)``."""
    if not isinstance(params, DirichletParams):
        params = DirichletParams(params)
    if count < 0:
        raise InvalidArgumentError(f"count must be nonnegative, got {count}")
    _as_u64(first_index + max(count - 1, 0), "stream index")
    return _dirichlet_batch(params.alpha, int(count), _as_u64(seed, "seed"), int(first_index))
