"""Primitive cone blocks and the product set K they compose.

K is an ordered product of blocks. Every block is a nonempty closed convex
set, so the Euclidean projection onto K is single valued and can be taken
block by block.

Block kinds
-----------
zero
    {0}^d. Equality rows.
nonpos
    R^d_-. Inequality rows ``g_i(x) <= 0``.
box
    {y : l <= y <= u}, bounds may be infinite.
soc
    Second-order cone {(t, z) : ||z||_2 <= t} of total dimension d.

With the convention g(x) = Hx - h, the system ``Ex = d, Ax <= b`` is written
as ``g(x) = (Ex - d, Ax - b)`` with ``K = {0}^q x R^p_-``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, ValidationError

ZERO, NONPOS, BOX, SOC = 0, 1, 2, 3
KIND_NAMES = {ZERO: "zero", NONPOS: "nonpos", BOX: "box", SOC: "soc"}
_CTOR_NAMES = {ZERO: "Zero", NONPOS: "NonPos", BOX: "Box", SOC: "SecondOrder"}
POLYHEDRAL = frozenset({ZERO, NONPOS, BOX})


class ConeError(ValidationError):
    """Malformed cone block or cone record."""


@dataclass(frozen=True, eq=False)
class ConeBlock:
    kind: int
    dim: int
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KIND_NAMES:
            raise ConeError(f"unknown cone kind {self.kind!r}")
        if int(self.dim) < 1:
            raise ConeError(f"{self.name} block needs dim >= 1, got {self.dim}")
        if self.kind == BOX:
            lo = np.asarray(self.lower, dtype=float).reshape(-1)
            up = np.asarray(self.upper, dtype=float).reshape(-1)
            if lo.shape != (self.dim,) or up.shape != (self.dim,):
                raise ConeError("box bounds must both have length dim")
            if np.isnan(lo).any() or np.isnan(up).any() or (lo > up).any():
                raise ConeError("box bounds need lower <= upper componentwise")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", up)

    @property
    def name(self) -> str:
        return KIND_NAMES[self.kind]

    def __eq__(self, other):
        if not isinstance(other, ConeBlock):
            return NotImplemented
        if (self.kind, self.dim) != (other.kind, other.dim):
            return False
        if self.kind == BOX:
            return (np.array_equal(self.lower, other.lower)
                    and np.array_equal(self.upper, other.upper))
        return True

    def __repr__(self):
        if self.kind == BOX:
            return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"
        return f"{_CTOR_NAMES[self.kind]}({self.dim})"


def Zero(dim: int) -> ConeBlock:
    return ConeBlock(ZERO, int(dim))


def NonPos(dim: int) -> ConeBlock:
    return ConeBlock(NONPOS, int(dim))


def Box(lower, upper) -> ConeBlock:
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    return ConeBlock(BOX, lower.size, lower, upper)


def SecondOrder(dim: int) -> ConeBlock:
    return ConeBlock(SOC, int(dim))


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Ordered product of cone blocks.

    The flat descriptor arrays (``kinds``, ``offsets``, ``dims``, ``lower``,
    ``upper``) are what the compiled kernels consume.
    """

    blocks: tuple[ConeBlock, ...]
    kinds: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)
    dims: np.ndarray = field(init=False, repr=False)
    lower: np.ndarray = field(init=False, repr=False)
    upper: np.ndarray = field(init=False, repr=False)

    def __init__(self, blocks):
        blocks = tuple(blocks)
        for b in blocks:
            if not isinstance(b, ConeBlock):
                raise ConeError(f"not a cone block: {b!r}")
        object.__setattr__(self, "blocks", blocks)
        dims = np.array([b.dim for b in blocks], dtype=np.intp)
        offsets = np.zeros(len(blocks), dtype=np.intp)
        if len(blocks):
            offsets[1:] = np.cumsum(dims)[:-1]
        m = int(dims.sum())
        lower = np.full(m, -np.inf)
        upper = np.full(m, np.inf)
        for b, off in zip(blocks, offsets):
            if b.kind == BOX:
                lower[off:off + b.dim] = b.lower
                upper[off:off + b.dim] = b.upper
        object.__setattr__(self, "kinds", np.array([b.kind for b in blocks], dtype=np.intp))
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        for arr in (self.kinds, self.offsets, self.dims, self.lower, self.upper):
            arr.setflags(write=False)

    @property
    def total_dim(self) -> int:
        return int(self.dims.sum())

    @property
    def is_polyhedral(self) -> bool:
        return all(b.kind in POLYHEDRAL for b in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other):
        if not isinstance(other, ConeSpec):
            return NotImplemented
        return self.blocks == other.blocks

    def __repr__(self):
        return f"ConeSpec({list(self.blocks)!r})"

    def slices(self):
        """Yield ``(block, slice)`` pairs in order."""
        for b, off in zip(self.blocks, self.offsets):
            yield b, slice(int(off), int(off) + b.dim)

    def _check(self, v, what="y"):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.total_dim:
            last = self.blocks[-1] if self.blocks else None
            raise DimensionMismatch(
                f"{what} has shape {v.shape} but the cone has total dimension "
                f"{self.total_dim} (last block {last!r})")
        return v


def project(spec: ConeSpec, y) -> np.ndarray:
    """Euclidean projection of ``y`` onto K."""
    y = spec._check(y)
    out = np.empty_like(y)
    _kernels.project(y, spec.kinds, spec.offsets, spec.dims, spec.lower, spec.upper, out)
    return out


def support_function(spec: ConeSpec, lam) -> float:
    """sup over y in K of <y, lam>; ``inf`` when unbounded."""
    lam = spec._check(lam, "lambda")
    total = 0.0
    for b, sl in spec.slices():
        v = lam[sl]
        if b.kind == ZERO:
            continue
        if b.kind == NONPOS:
            if (v < 0).any():
                return np.inf
        elif b.kind == BOX:
            pos, neg = v > 0, v < 0
            if np.isinf(b.upper[pos]).any() or np.isinf(b.lower[neg]).any():
                return np.inf
            total += float(b.upper[pos] @ v[pos] + b.lower[neg] @ v[neg])
        else:
            # polar of the second-order cone is its negative
            if np.linalg.norm(v[1:]) > -v[0]:
                return np.inf
    return total


def in_cone(spec: ConeSpec, y, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    y = spec._check(y)
    return bool(np.max(np.abs(y - project(spec, y)), initial=0.0) <= tol)


def recession_kinds(spec: ConeSpec):
    """Per-row sign constraints of the recession cone of a polyhedral K.

    Returns two boolean masks ``(upper_bounded, lower_bounded)``: a direction
    d is a recession direction iff ``d_i <= 0`` on upper-bounded rows and
    ``d_i >= 0`` on lower-bounded rows (both means ``d_i = 0``).
    """
    if not spec.is_polyhedral:
        raise ConeError("recession rows are only defined for polyhedral blocks")
    m = spec.total_dim
    up = np.zeros(m, dtype=bool)
    lo = np.zeros(m, dtype=bool)
    for b, sl in spec.slices():
        if b.kind == ZERO:
            up[sl] = lo[sl] = True
        elif b.kind == NONPOS:
            up[sl] = True
        else:
            up[sl] = np.isfinite(b.upper)
            lo[sl] = np.isfinite(b.lower)
    return up, lo


def block_to_record(b: ConeBlock) -> dict:
    if b.kind == BOX:
        return {"box": {"l": [_enc(v) for v in b.lower], "u": [_enc(v) for v in b.upper]}}
    return {b.name: b.dim}


def block_from_record(rec) -> ConeBlock:
    if not isinstance(rec, dict) or len(rec) != 1:
        raise ConeError(f"cone record must be a single-key object, got {rec!r}")
    (tag, val), = rec.items()
    if tag == "zero":
        return Zero(_as_dim(val, tag))
    if tag == "nonpos":
        return NonPos(_as_dim(val, tag))
    if tag == "soc":
        return SecondOrder(_as_dim(val, tag))
    if tag == "box":
        if not isinstance(val, dict) or set(val) != {"l", "u"}:
            raise ConeError("box record needs exactly the keys 'l' and 'u'")
        return Box([_dec(v) for v in val["l"]], [_dec(v) for v in val["u"]])
    raise ConeError(f"unknown cone tag {tag!r}")


def _as_dim(val, tag):
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConeError(f"{tag} dimension must be an integer, got {val!r}")
    return val


# JSON has no infinities; open box bounds travel as strings
def _enc(v: float):
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return float(v)


def _dec(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf", "Infinity"):
            return np.inf
        if v in ("-inf", "-Infinity"):
            return -np.inf
        raise ConeError(f"bad bound {v!r}")
    return float(v)
