"""The marking game: how dense can a marked set be on some sphere about every point?

Given marked vertices ``F`` (or marked edges ``F'``), the value of the game
is ``min_x max_k`` of the marked fraction of the radius-``k`` sphere about
``x``.  The maximal inequality says the value is ``O(sqrt(eps))`` where
``eps`` is the marked fraction.  Values are exact rationals.
"""

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._validation import check_dimension, check_random_state
from .cube import CubeFunction, binomial_row, popcounts, sphere_sums
from .exceptions import CapacityError, DomainError

__all__ = [
    "MarkingSet",
    "GameResult",
    "edge_index",
    "edge_endpoints",
    "density_profile",
    "best_center",
    "edge_reduce",
    "edge_sphere_counts",
    "edge_sphere_counts_direct",
    "edge_domination_check",
    "exhaustive_adversary",
    "anneal_adversary",
    "read_marking",
    "write_marking",
    "write_results_csv",
]

EXHAUSTIVE_MAX_DIM = 4
ANNEAL_MAX_DIM = 16


def edge_index(n, x, i):
    """Index of the edge ``{x, x ^ 2**i}``; ``x`` may have bit ``i`` set or not."""
    x &= ~(1 << i)
    low = x & ((1 << i) - 1)
    high = x >> (i + 1)
    return i * (1 << (n - 1)) + (low | (high << i))


def edge_endpoints(n, e):
    """Inverse of :func:`edge_index`: ``(x, i)`` with bit ``i`` of ``x`` clear."""
    half = 1 << (n - 1)
    i, c = divmod(int(e), half)
    low = c & ((1 << i) - 1)
    high = c >> i
    return low | (high << (i + 1)), i


@dataclass(frozen=True)
class MarkingSet:
    """A set of marked vertices or edges of the ``n``-cube.

    ``bits`` is a boolean array of length ``2**n`` (vertices) or
    ``n * 2**(n-1)`` (edges, indexed by :func:`edge_index`).  ``epsilon`` is
    the exact marked fraction.
    """

    n: int
    kind: str
    bits: np.ndarray
    epsilon: Fraction = field(init=False)

    def __post_init__(self):
        check_dimension(self.n)
        if self.kind not in ("vertex", "edge"):
            raise ValueError(f"kind must be 'vertex' or 'edge', got {self.kind!r}")
        bits = np.asarray(self.bits, dtype=bool).copy()
        if bits.shape != (self.size_for(self.n, self.kind),):
            raise ValueError(
                f"{self.kind} marking of n={self.n} needs "
                f"{self.size_for(self.n, self.kind)} bits, got {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        total = bits.shape[0]
        eps = Fraction(int(bits.sum()), total) if total else Fraction(0)
        object.__setattr__(self, "epsilon", eps)

    @staticmethod
    def size_for(n, kind):
        if kind == "vertex":
            return 1 << n
        return n * (1 << (n - 1)) if n > 0 else 0

    @classmethod
    def from_indices(cls, n, marked, kind="vertex"):
        bits = np.zeros(cls.size_for(n, kind), dtype=bool)
        idx = np.asarray(list(marked), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= bits.shape[0]):
            raise ValueError(f"marked index out of range for a {kind} marking of n={n}")
        bits[idx] = True
        return cls(n, kind, bits)

    @property
    def marked(self):
        return np.flatnonzero(self.bits)

    def to_json(self):
        return {"n": self.n, "kind": self.kind, "marked": [int(i) for i in self.marked]}


@dataclass
class GameResult:
    """Outcome of the best-center search for one marking."""

    best_center: int
    value: Fraction
    profile: list
    epsilon: Fraction
    kind: str = "vertex"

    @property
    def ratio(self):
        """``value / sqrt(epsilon)``; ``nan`` for the empty marking."""
        if self.epsilon == 0:
            return math.nan
        return float(self.value) / math.sqrt(self.epsilon)

    def to_dict(self):
        from .reports import to_jsonable

        return to_jsonable({"kind": self.kind, "best_center": self.best_center,
                            "value": self.value, "epsilon": self.epsilon,
                            "ratio": self.ratio, "profile": self.profile})


def _require(marking, kind):
    if marking.kind != kind:
        raise DomainError(f"expected a {kind} marking, got {marking.kind}")


def density_profile(marking, x):
    """Marked fraction of every sphere about ``x``: ``|F & sphere_k(x)| / C(n, k)``."""
    _require(marking, "vertex")
    n = marking.n
    d = popcounts(n)[marking.marked ^ int(x)] if marking.marked.size else np.array([], int)
    counts = np.bincount(d, minlength=n + 1)
    binom = binomial_row(n, exact=True)
    return [Fraction(int(c), b) for c, b in zip(counts, binom)]


def _minimax(counts, sizes):
    """Exact ``min_x max_k counts[x, k] / sizes[k]`` and the argmin."""
    lcm = 1
    for c in sizes:
        lcm = lcm * c // math.gcd(lcm, c)
    scale = np.array([lcm // c for c in sizes], dtype=object if lcm > 2**40 else np.int64)
    scaled = counts * scale
    per_center = scaled.max(axis=1)
    x = int(np.argmin(per_center))
    return x, Fraction(int(per_center[x]), lcm)


def best_center(marking):
    """Exact ``min_x max_k`` marked sphere fraction, the best ``x`` and its profile.

    Ties in ``x`` are broken towards the smallest index.  Edge markings use
    edge spheres (edges whose nearer endpoint is at distance ``k``).
    """
    n = marking.n
    if marking.kind == "vertex":
        counts = sphere_sums(marking.bits.astype(np.int64), exact=True)
        sizes = binomial_row(n, exact=True)
    else:
        counts = edge_sphere_counts(marking)
        sizes = [math.comb(n, k) * (n - k) for k in range(n)]
    if not sizes:
        return GameResult(0, Fraction(0), [], marking.epsilon, marking.kind)
    x, value = _minimax(np.asarray(counts), sizes)
    profile = [Fraction(int(c), s) for c, s in zip(counts[x], sizes)]
    return GameResult(x, value, profile, marking.epsilon, marking.kind)


def _edge_degree(marking):
    n = marking.n
    deg = np.zeros(1 << n, dtype=np.int64)
    for e in marking.marked:
        x, i = edge_endpoints(n, e)
        deg[x] += 1
        deg[x | (1 << i)] += 1
    return deg


def edge_reduce(marking):
    """Vertex function ``f(y) = (marked edges at y) / n``."""
    _require(marking, "edge")
    n = marking.n
    if n == 0:
        return CubeFunction(0, np.zeros(1))
    return CubeFunction(n, _edge_degree(marking) / n)


def edge_sphere_counts(marking):
    """Marked edges on each edge sphere, shape ``(2**n, n)``.

    With ``A[x, j]`` the sphere sums of the marked degree, the marked edges
    between spheres ``k`` and ``k + 1`` are ``sum_{j<=k} (-1)**(k-j) A[x, j]``.
    """
    _require(marking, "edge")
    n = marking.n
    A = sphere_sums(_edge_degree(marking), exact=True)
    out = np.zeros((1 << n, n), dtype=np.int64)
    run = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        run = A[:, k] - run
        out[:, k] = run
    return out


def edge_sphere_counts_direct(marking):
    """Brute-force oracle for :func:`edge_sphere_counts`."""
    _require(marking, "edge")
    n = marking.n
    pc = popcounts(n)
    out = np.zeros((1 << n, n), dtype=np.int64)
    for e in marking.marked:
        u, i = edge_endpoints(n, e)
        v = u | (1 << i)
        xs = np.arange(1 << n)
        d = np.minimum(pc[xs ^ u], pc[xs ^ v])
        out[xs, d] += 1
    return out


def edge_domination_check(marking):
    """Check the edge-sphere fraction against ``2 S_k f`` (``k <= n/2``) or
    ``2 S_{k+1} f`` (``k > n/2``), and ``||f||_2**2 <= 2 |F'| / n``.

    Returns ``(passed, worst_slack)`` where slack is bound minus fraction.
    """
    n = marking.n
    counts = edge_sphere_counts(marking)
    if not np.array_equal(counts, edge_sphere_counts_direct(marking)):
        return False, -math.inf
    deg = _edge_degree(marking)
    A = sphere_sums(deg, exact=True)
    worst = math.inf
    for k in range(n):
        size = math.comb(n, k) * (n - k)
        j = k if 2 * k <= n else k + 1
        # bound 2 A_j / (n C(n, j)) >= counts / size, compared exactly
        lhs = 2 * A[:, j].astype(object) * size
        rhs = counts[:, k].astype(object) * n * math.comb(n, j)
        slack = min(Fraction(int(a - b), n * math.comb(n, j) * size) for a, b in zip(lhs, rhs))
        worst = min(worst, slack)
    norm_ok = float(np.sum((deg / n) ** 2)) <= 2 * len(marking.marked) / n + 1e-12
    return bool(worst >= 0 and norm_ok), float(worst)


def exhaustive_adversary(n, m, reduce=True):
    """Exact maximum of the game value over all vertex markings of size ``m``.

    Markings are enumerated up to translation (``F -> F ^ t``), which
    preserves the value.  Returns ``(marking, value)`` for the
    lexicographically first extremal canonical marking.
    """
    n = check_dimension(n)
    if n > EXHAUSTIVE_MAX_DIM:
        raise CapacityError(f"exhaustive search limited to n <= {EXHAUSTIVE_MAX_DIM}, got {n}")
    size = 1 << n
    if not 0 <= m <= size:
        raise DomainError(f"need 0 <= m <= {size}, got {m}")
    pc = popcounts(n)
    xs = np.arange(size)
    # onehot[v, x, k] = [d(x, v) = k]
    onehot = np.zeros((size, size, n + 1), dtype=np.int64)
    for v in range(size):
        onehot[v, xs, pc[xs ^ v]] = 1
    sizes = binomial_row(n, exact=True)
    best_val, best_set = Fraction(-1), None
    for combo in itertools.combinations(range(size), m):
        if reduce and m:
            translates = [tuple(sorted(v ^ t for v in combo)) for t in range(size)]
            if min(translates) != combo:
                continue
        counts = onehot[list(combo)].sum(axis=0) if m else np.zeros((size, n + 1), np.int64)
        _, value = _minimax(counts, sizes)
        if value > best_val:
            best_val, best_set = value, combo
    return MarkingSet.from_indices(n, best_set), best_val


@dataclass
class AnnealResult:
    marking: MarkingSet
    value: Fraction
    trace: list
    params: dict


def _objective(counts, inv_binom):
    return float((counts * inv_binom).max(axis=1).min())


def anneal_adversary(n, m, seed=0, budget=2000, t_start=0.05, t_end=1e-4, chains=1):
    """Simulated annealing for a size-``m`` vertex marking with large game value.

    Moves swap one marked and one unmarked vertex; sphere counts are updated
    incrementally.  Temperature cools geometrically from ``t_start`` to
    ``t_end`` over ``budget`` moves; independent chains use seeds spawned
    from ``seed``.  The best-so-far trace is nondecreasing.
    """
    n = check_dimension(n)
    if n > ANNEAL_MAX_DIM:
        raise CapacityError(f"annealing limited to n <= {ANNEAL_MAX_DIM}, got {n}")
    size = 1 << n
    if not 0 <= m <= size:
        raise DomainError(f"need 0 <= m <= {size}, got {m}")
    params = {"n": n, "m": m, "seed": seed, "budget": budget, "t_start": t_start,
              "t_end": t_end, "chains": chains, "cooling": "geometric",
              "move": "swap"}
    pc = popcounts(n)
    xs = np.arange(size)
    inv_binom = 1.0 / binomial_row(n)
    best_marked, best_obj, trace = None, -1.0, []
    for child in np.random.SeedSequence(seed).spawn(chains):
        rng = check_random_state(np.random.default_rng(child))
        marked = np.zeros(size, dtype=bool)
        marked[rng.choice(size, size=m, replace=False)] = True
        counts = sphere_sums(marked.astype(np.int64), exact=True)
        obj = _objective(counts, inv_binom)
        chain_best, chain_marked = obj, marked.copy()
        trace.append(max(best_obj, chain_best))
        if 0 < m < size and budget > 0:
            ratio = (t_end / t_start) ** (1.0 / max(budget - 1, 1))
            temp = t_start
            for _ in range(budget):
                u = int(rng.choice(np.flatnonzero(marked)))
                v = int(rng.choice(np.flatnonzero(~marked)))
                du, dv = pc[xs ^ u], pc[xs ^ v]
                counts[xs, du] -= 1
                counts[xs, dv] += 1
                new = _objective(counts, inv_binom)
                if new >= obj or rng.random() < math.exp((new - obj) / temp):
                    marked[u], marked[v] = False, True
                    obj = new
                    if obj > chain_best:
                        chain_best, chain_marked = obj, marked.copy()
                else:
                    counts[xs, dv] -= 1
                    counts[xs, du] += 1
                temp *= ratio
                trace.append(max(best_obj, chain_best))
        if chain_best > best_obj:
            best_obj, best_marked = chain_best, chain_marked
    marking = MarkingSet(n, "vertex", best_marked)
    return AnnealResult(marking, best_center(marking).value, trace, params)


def read_marking(path):
    """Read ``{"n": int, "kind": "vertex"|"edge", "marked": [indices]}``."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed marking JSON") from exc
    if not isinstance(doc, dict) or not {"n", "kind", "marked"} <= set(doc):
        raise ValueError(f"{path}: marking needs keys 'n', 'kind', 'marked'")
    return MarkingSet.from_indices(int(doc["n"]), doc["marked"], doc["kind"])


def write_marking(path, marking):
    Path(path).write_text(json.dumps(marking.to_json()))


def write_results_csv(path, rows):
    """Rows of ``(n, m, epsilon, value, ratio, method, seed)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "m", "epsilon", "value", "ratio", "method", "seed"])
        for row in rows:
            w.writerow([str(v) if isinstance(v, Fraction) else v for v in row])
