"""Gram-matrix primitives, cone geometry, and certified-value containers.

Conventions used across the package:

* Index sets are 0-based, strictly ascending tuples of ints.
* Coefficient vectors are plain float arrays of length p; block extraction
  keeps ascending index order in both dimensions.
* A Gram matrix is symmetric positive semidefinite; rank-deficient inputs
  are first-class, so positive-definiteness is never assumed.
* Submatrices are declared singular iff lambda_min <= 1e-10 * lambda_max.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, InvalidParameter, SingularBlock

DEFAULT_SUBSET_CAP = 10 ** 6
SINGULAR_RTOL = 1e-10

_PSD_PROBES = 1000
_PSD_TOL = -1e-9


def derived_rng(seed, *stream) -> np.random.Generator:
    """Counter-based generator keyed by a root seed and a stream label path.

    Distinct labels give statistically independent streams; identical
    (seed, labels) give bit-identical streams on every platform.
    """
    label = "/".join(str(part) for part in stream)
    digest = hashlib.sha256(f"{seed}#{label}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


class Certificate(enum.Enum):
    EXACT = "Exact"
    CERTIFIED_LOWER = "CertifiedLower"
    CERTIFIED_UPPER = "CertifiedUpper"
    INTERVAL = "Interval"
    ESTIMATE = "Estimate"


@dataclass(frozen=True)
class BoundedValue:
    """A scalar with certified enclosure [lower, upper] and a provenance note."""

    estimate: float
    lower: float
    upper: float
    certificate: Certificate
    provenance: str = ""

    def __post_init__(self):
        est, lo, hi = float(self.estimate), float(self.lower), float(self.upper)
        slack = 1e-9 * max(1.0, abs(est))
        if not (lo <= est + slack and est <= hi + slack and lo <= hi + slack):
            raise InvalidParameter(
                f"inconsistent BoundedValue: lower={lo!r} estimate={est!r} upper={hi!r}"
            )

    @classmethod
    def exact(cls, value, provenance=""):
        v = float(value)
        return cls(v, v, v, Certificate.EXACT, provenance)

    @classmethod
    def certified_lower(cls, value, provenance=""):
        v = float(value)
        return cls(v, v, math.inf, Certificate.CERTIFIED_LOWER, provenance)

    @classmethod
    def certified_upper(cls, value, provenance="", lower=0.0):
        v = float(value)
        return cls(v, min(float(lower), v), v, Certificate.CERTIFIED_UPPER, provenance)

    @classmethod
    def interval(cls, estimate, lower, upper, provenance=""):
        return cls(float(estimate), float(lower), float(upper), Certificate.INTERVAL, provenance)

    @classmethod
    def estimate_only(cls, value, provenance=""):
        return cls(float(value), -math.inf, math.inf, Certificate.ESTIMATE, provenance)

    def scaled(self, factor: float) -> "BoundedValue":
        """Multiply all endpoints by a nonnegative factor (exact scaling laws)."""
        if factor < 0:
            raise InvalidParameter("scaling factor must be nonnegative")
        return BoundedValue(
            self.estimate * factor,
            self.lower * factor,
            self.upper * factor,
            self.certificate,
            self.provenance,
        )

    def to_json_dict(self) -> dict:
        def num(x):
            return None if math.isinf(x) or math.isnan(x) else float(x)

        return {
            "estimate": num(self.estimate),
            "lower": num(self.lower),
            "upper": num(self.upper),
            "certificate": self.certificate.value,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric PSD matrix wrapper.

    Symmetry is enforced at construction (asymmetry beyond 1e-12 of the entry
    scale is rejected, below that the matrix is symmetrized).  Positive
    semidefiniteness is spot-checked on 1000 seeded random unit vectors, not
    proven; rank-deficient matrices pass by design.
    """

    entries: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.entries, dtype=float)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise InvalidParameter(f"Gram matrix must be square, got shape {raw.shape}")
        if raw.shape[0] == 0:
            raise InvalidParameter("Gram matrix must be nonempty")
        if not np.all(np.isfinite(raw)):
            raise InvalidParameter("Gram matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(raw))))
        if float(np.max(np.abs(raw - raw.T))) > 1e-12 * scale:
            raise InvalidParameter("Gram matrix is not symmetric within 1e-12")
        sym = (raw + raw.T) / 2.0
        if float(np.min(np.diag(sym))) < -1e-12 * scale:
            raise InvalidParameter("Gram matrix has a negative diagonal entry")
        probes = derived_rng(0, "gram-psd-probe", sym.shape[0]).standard_normal(
            (_PSD_PROBES, sym.shape[0])
        )
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        quad = np.einsum("ij,ij->i", probes @ sym, probes)
        if float(np.min(quad)) < _PSD_TOL * scale:
            raise InvalidParameter("Gram matrix failed the PSD spot check")
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.entries.shape).encode())
        h.update(np.ascontiguousarray(self.entries).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class ConeSpec:
    """Active set S, budget multiplier L, and enlargement size N."""

    S: tuple
    L: float
    N: int

    def __post_init__(self):
        S = tuple(int(j) for j in self.S)
        if len(S) == 0:
            raise InvalidParameter("S must be nonempty")
        if any(j < 0 for j in S):
            raise InvalidParameter("S indices must be nonnegative")
        if list(S) != sorted(set(S)):
            raise InvalidParameter("S must be strictly ascending without duplicates")
        object.__setattr__(self, "S", S)
        L = float(self.L)
        if not (L >= 0.0) or math.isnan(L):
            raise InvalidParameter("L must be nonnegative")
        object.__setattr__(self, "L", L)
        N = int(self.N)
        if N < len(S):
            raise InvalidParameter(f"N={N} must be at least s={len(S)}")
        object.__setattr__(self, "N", N)

    @property
    def s(self) -> int:
        return len(self.S)

    def validate_p(self, p: int):
        if self.S[-1] >= p:
            raise InvalidParameter(f"S index {self.S[-1]} out of range for p={p}")
        if self.N > p:
            raise InvalidParameter(f"N={self.N} exceeds p={p}")

    def with_(self, L=None, N=None) -> "ConeSpec":
        return ConeSpec(self.S, self.L if L is None else L, self.N if N is None else N)


@dataclass(frozen=True)
class SubsetN:
    """An index set written as a strictly ascending tuple."""

    members: tuple

    def __post_init__(self):
        members = tuple(int(j) for j in self.members)
        if any(j < 0 for j in members):
            raise InvalidParameter("subset indices must be nonnegative")
        if list(members) != sorted(set(members)):
            raise InvalidParameter("subset must be strictly ascending without duplicates")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def complement(self, p: int) -> tuple:
        inside = set(self.members)
        return tuple(j for j in range(p) if j not in inside)

    def contains(self, other) -> bool:
        return set(other).issubset(self.members)


@dataclass(frozen=True)
class PerturbationPair:
    """Two Gram matrices of equal size and their entrywise sup distance."""

    sigma0: GramMatrix
    sigma1: GramMatrix
    d_inf: float = field(init=False)

    def __post_init__(self):
        if self.sigma0.p != self.sigma1.p:
            raise InvalidParameter(
                f"dimension mismatch: {self.sigma0.p} vs {self.sigma1.p}"
            )
        object.__setattr__(self, "d_inf", d_infinity(self.sigma0, self.sigma1))


@dataclass(frozen=True)
class ChunkPartition:
    """S-complement split into blocks of size s by descending magnitude.

    chunks[0] holds the s largest magnitudes off S, chunks[1] the next s, and
    so on; the final chunk may be short.  Ties break by ascending index.
    """

    cone: ConeSpec
    chunks: tuple

    @property
    def nset(self) -> SubsetN:
        return SubsetN(tuple(sorted(set(self.cone.S) | set(self.chunks[0]))) if self.chunks else self.cone.S)


def _as_vector(beta, p=None) -> np.ndarray:
    arr = np.asarray(beta, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameter(f"expected a 1-d coefficient vector, got shape {arr.shape}")
    if p is not None and arr.shape[0] != p:
        raise InvalidParameter(f"dimension mismatch: vector length {arr.shape[0]}, p={p}")
    return arr


def block(gram: GramMatrix, nset: SubsetN, which: str) -> np.ndarray:
    """Extract Sigma_11, Sigma_21, Sigma_12 or Sigma_22 for the given index set.

    "11" is the (nset x nset) block, "21" the (complement x nset) block,
    "12" its transpose and "22" the (complement x complement) block.
    """
    p = gram.p
    idx = np.array(nset.members, dtype=int)
    if idx.size and idx[-1] >= p:
        raise InvalidParameter(f"subset index {idx[-1]} out of range for p={p}")
    comp = np.array(nset.complement(p), dtype=int)
    if which == "11":
        return gram.entries[np.ix_(idx, idx)].copy()
    if which == "21":
        return gram.entries[np.ix_(comp, idx)].copy()
    if which == "12":
        return gram.entries[np.ix_(idx, comp)].copy()
    if which == "22":
        return gram.entries[np.ix_(comp, comp)].copy()
    raise InvalidParameter(f"unknown block selector {which!r}")


def min_eigen_11(gram: GramMatrix, nset: SubsetN) -> float:
    """Smallest eigenvalue of Sigma_11(nset)."""
    sub = block(gram, nset, "11")
    if sub.shape[0] == 0:
        raise InvalidParameter("empty subset has no eigenvalues")
    return float(np.linalg.eigvalsh(sub)[0])


def inverse_11(gram: GramMatrix, nset: SubsetN) -> np.ndarray:
    """Inverse of Sigma_11(nset) via symmetric eigendecomposition.

    Raises SingularBlock when lambda_min <= 1e-10 * lambda_max.
    """
    sub = block(gram, nset, "11")
    vals, vecs = np.linalg.eigh(sub)
    lo, hi = float(vals[0]), float(vals[-1])
    if lo <= SINGULAR_RTOL * max(hi, 0.0) or lo <= 0.0:
        raise SingularBlock(
            f"Sigma_11 block on {nset.members} is singular (lambda_min={lo!r}, lambda_max={hi!r})"
        )
    return (vecs / vals) @ vecs.T


def cone_membership(beta, cone: ConeSpec, nset: SubsetN = None, variant: str = "plain", *, atol: float = 0.0) -> bool:
    """Exact test of the l1 cone constraints, optionally with the nset sup-norm cap.

    plain:    ||beta_{S^c}||_1 <= L * ||beta_S||_1 and ||beta_S||_1 != 0
    adaptive: ||beta_{S^c}||_1 <= sqrt(s) * L * ||beta_S||_2
    With nset strictly larger than S, additionally
    ||beta_{nset^c}||_inf <= min_{j in nset \\ S} |beta_j|; for nset == S that
    constraint is dropped.  atol adds slack for the strict inequalities only.
    """
    beta = _as_vector(beta)
    p = beta.shape[0]
    cone.validate_p(p)
    S = np.array(cone.S, dtype=int)
    mask = np.zeros(p, dtype=bool)
    mask[S] = True
    head = beta[mask]
    tail_l1 = float(np.sum(np.abs(beta[~mask])))
    if variant == "plain":
        head_norm = float(np.sum(np.abs(head)))
        if head_norm == 0.0:
            return False
        budget = cone.L * head_norm
    elif variant == "adaptive":
        budget = math.sqrt(cone.s) * cone.L * float(np.linalg.norm(head))
    else:
        raise InvalidParameter(f"unknown cone variant {variant!r}")
    if tail_l1 > budget + atol:
        return False
    if nset is not None and tuple(nset.members) != cone.S:
        if not nset.contains(cone.S):
            raise InvalidParameter("nset must contain S")
        extra = sorted(set(nset.members) - set(cone.S))
        cap = float(np.min(np.abs(beta[extra])))
        outside = nset.complement(p)
        out_inf = float(np.max(np.abs(beta[list(outside)]))) if outside else 0.0
        if out_inf > cap + atol:
            return False
    return True


def tail_order(beta, cone: ConeSpec) -> list:
    """Indices of S^c sorted by descending |beta_j|, ties by ascending index."""
    beta = _as_vector(beta)
    comp = [j for j in range(beta.shape[0]) if j not in set(cone.S)]
    return sorted(comp, key=lambda j: (-abs(beta[j]), j))


def chunk_tail(beta, cone: ConeSpec) -> ChunkPartition:
    """Partition S^c into size-s blocks by descending magnitude of beta."""
    beta = _as_vector(beta)
    cone.validate_p(beta.shape[0])
    order = tail_order(beta, cone)
    s = cone.s
    chunks = tuple(tuple(sorted(order[i : i + s])) for i in range(0, len(order), s))
    return ChunkPartition(cone=cone, chunks=chunks)


def top_nset(beta, cone: ConeSpec) -> SubsetN:
    """S joined with the N-s largest-magnitude coordinates of beta off S.

    This is the ratio-minimizing admissible enlargement for the restricted
    eigenvalue: the sup-norm cap holds by construction and the denominator
    ||beta_nset||_2 is maximal.  Ties break by ascending index.
    """
    order = tail_order(beta, cone)
    extra = order[: cone.N - cone.s]
    return SubsetN(tuple(sorted(set(cone.S) | set(extra))))


def d_infinity(a, b) -> float:
    """Entrywise sup distance between two matrices of equal shape."""
    ma = a.entries if isinstance(a, GramMatrix) else np.asarray(a, dtype=float)
    mb = b.entries if isinstance(b, GramMatrix) else np.asarray(b, dtype=float)
    if ma.shape != mb.shape:
        raise InvalidParameter(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return float(np.max(np.abs(ma - mb)))


def superset_count(cone: ConeSpec, p: int) -> int:
    return math.comb(p - cone.s, cone.N - cone.s)


def enumerate_supersets(cone: ConeSpec, p: int, cap: int = DEFAULT_SUBSET_CAP):
    """All size-N supersets of S in deterministic lexicographic order.

    Raises CapExceeded up front when C(p-s, N-s) exceeds the cap.
    """
    cone.validate_p(p)
    count = superset_count(cone, p)
    if count > cap:
        raise CapExceeded(count, cap, what=f"superset enumeration (p={p}, s={cone.s}, N={cone.N})")
    others = [j for j in range(p) if j not in set(cone.S)]

    def _gen():
        for extra in itertools.combinations(others, cone.N - cone.s):
            yield SubsetN(tuple(sorted(cone.S + extra)))

    return _gen()
