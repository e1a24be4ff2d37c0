"""Relay mapping of superposed PAM/QAM signals to coded symbols.

The relay sees ``x1 + x2``. Each superposed grid point ``j`` (PAM) or
``(l, l')`` (QAM) is mapped to the coded symbol with axis index ``j mod M`` or
``(l mod L, l' mod L)``. A destination that knows one of the two source
symbols recovers the other by subtracting its index modulo the same base.

Cross constellations are handled on their bounding ``L' x L'`` square: the
coded alphabet grows to ``L'**2`` and the coded stream is re-chunked onto the
original constellation for broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .constellation import PAM, QAM_CROSS, Constellation, slice_axis

__all__ = [
    "DecodeError",
    "SuperposedConstellation",
    "ExtendedConstellation",
    "MappingTable",
    "ExclusiveLawVerdict",
    "superpose",
    "coded_symbol_pam",
    "coded_symbol_qam",
    "extend_to_square",
    "build_mapping_table",
    "xor_mapping_table",
    "decode_expected",
    "verify_exclusive_law",
    "decide_superposed",
    "pack_coded",
    "unpack_coded",
]


class DecodeError(ValueError):
    """The coded symbol and known symbol do not identify a transmittable symbol."""


@dataclass(frozen=True, eq=False)
class SuperposedConstellation:
    """Distinct sums ``x1 + x2`` over all ordered index pairs of ``base``."""

    base: Constellation
    points: np.ndarray
    grid_index: np.ndarray  # (n, 2) integer superposed coordinates (j, 0) or (l, l')
    origin_pairs: tuple  # per point, tuple of (i1, i2)

    def __len__(self):
        return len(self.points)

    @property
    def pair_point(self) -> np.ndarray:
        """``(M, M)`` array: superposed point number reached by each ordered pair."""
        M = self.base.M
        out = np.empty((M, M), dtype=np.int64)
        for p, pairs in enumerate(self.origin_pairs):
            for i1, i2 in pairs:
                out[i1, i2] = p
        return out


def superpose(c: Constellation) -> SuperposedConstellation:
    """Superposed constellation of two equal-power, phase-aligned copies of ``c``.

    >>> from pncqam.constellation import from_name
    >>> s = superpose(from_name("pam4"))
    >>> len(s), (s.points.real / s.base.scale).round(9).tolist()
    (7, [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0])
    """
    M = c.M
    i1, i2 = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    i1, i2 = i1.ravel(), i2.ravel()
    g = c.coords[i1] + c.coords[i2]
    keys, inverse = np.unique(g, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    pairs = [[] for _ in range(len(keys))]
    for p, a, b in zip(inverse, i1, i2):
        pairs[p].append((int(a), int(b)))
    n_axis = 2 * c.L - 1
    re = (2 * keys[:, 0] - (n_axis - 1)) * c.scale
    im = np.zeros(len(keys)) if c.kind == PAM else (2 * keys[:, 1] - (n_axis - 1)) * c.scale
    points = re + 1j * im
    points.flags.writeable = False
    keys.flags.writeable = False
    return SuperposedConstellation(
        base=c,
        points=points,
        grid_index=keys,
        origin_pairs=tuple(tuple(p) for p in pairs),
    )


def coded_symbol_pam(j, M):
    """Coded symbol index for superposed PAM grid index ``j``: ``j mod M``."""
    if not 0 <= j <= 2 * (M - 1):
        raise ValueError(f"superposed index j={j} outside [0, {2 * (M - 1)}]")
    return j % M


def coded_symbol_qam(l, l2, L):
    """Coded axis-index pair for superposed QAM grid point ``(l, l2)``."""
    hi = 2 * (L - 1)
    if not (0 <= l <= hi and 0 <= l2 <= hi):
        raise ValueError(f"superposed index ({l}, {l2}) outside [0, {hi}]^2")
    return l % L, l2 % L


@dataclass(frozen=True, eq=False)
class ExtendedConstellation:
    """Full ``L' x L'`` grid around a QAM constellation.

    ``original_index`` is the symbol index in the source constellation, or -1
    for points that exist only for computing coded symbols.
    """

    source: Constellation
    L: int
    points: np.ndarray
    coords: np.ndarray
    original_index: np.ndarray

    @property
    def transmittable(self) -> np.ndarray:
        return self.original_index >= 0


def extend_to_square(c: Constellation):
    """Return ``(L', extended)`` for a square or cross QAM constellation."""
    if not c.is_qam:
        raise ValueError("extend_to_square needs a QAM constellation")
    L = c.L
    k, kq = np.divmod(np.arange(L * L), L)
    ax = 2 * np.arange(L) - (L - 1)
    points = (ax[k] + 1j * ax[kq]) * c.scale
    coords = np.stack([k, kq], axis=1)
    original = c.grid_lookup()[k, kq]
    for a in (points, coords, original):
        a.flags.writeable = False
    return L, ExtendedConstellation(c, L, points, coords, original)


@dataclass(frozen=True, eq=False)
class MappingTable:
    """Superposed-point to coded-symbol table.

    Attributes
    ----------
    superposed : SuperposedConstellation
        Reachable superposed points of the original constellation.
    coded_index : np.ndarray
        Coded symbol per reachable superposed point.
    grid_codes : np.ndarray
        Coded symbol for every point of the (extended) superposed grid,
        shape ``(2L'-1, 2L'-1)`` for QAM and ``(2M-1, 1)`` for PAM.
    coded_alphabet_size : int
    Lprime : int
        Axis modulus (``M`` for PAM, ``L`` for square QAM, ``L'`` for cross).
    rule : str
        ``"modular"`` for the construction above, anything else for
        externally supplied tables (decoded by exhaustive search).
    ops_count : int
        Superposed grid points evaluated while building the table.
    """

    superposed: SuperposedConstellation
    coded_index: np.ndarray
    grid_codes: np.ndarray
    coded_alphabet_size: int
    Lprime: int
    rule: str = "modular"
    ops_count: int = 0
    _pair_codes: np.ndarray = field(default=None, repr=False)

    @property
    def base(self) -> Constellation:
        return self.superposed.base

    @property
    def reachable(self) -> np.ndarray:
        """Boolean mask over ``grid_codes`` of sums that some pair produces."""
        mask = np.zeros(self.grid_codes.shape, dtype=bool)
        g = self.superposed.grid_index
        mask[g[:, 0], g[:, 1]] = True
        return mask

    @property
    def coded_bits_per_symbol(self) -> int:
        if self.base.kind == QAM_CROSS:
            return 2 * math.ceil(math.log2(self.Lprime))
        return self.base.bits_per_symbol

    @property
    def overhead(self) -> float:
        """Coded bits per original symbol bit carried in phase two."""
        return self.coded_bits_per_symbol / self.base.bits_per_symbol

    @property
    def pair_codes(self) -> np.ndarray:
        """``(M, M)`` array of ``C(s1, s2)``."""
        if self._pair_codes is None:
            codes = self.coded_index[self.superposed.pair_point]
            codes.flags.writeable = False
            object.__setattr__(self, "_pair_codes", codes)
        return self._pair_codes

    def coded(self, s1, s2):
        """``C(s1, s2)`` for scalar or array symbol indices."""
        out = self.pair_codes[np.asarray(s1), np.asarray(s2)]
        return int(out) if np.ndim(out) == 0 else out

    def coded_bits(self, coded) -> str:
        """Bit word transmitted for one coded symbol."""
        coded = int(coded)
        if not 0 <= coded < self.coded_alphabet_size:
            raise IndexError(f"coded index {coded} outside [0, {self.coded_alphabet_size})")
        if self.base.kind == QAM_CROSS:
            w = self.coded_bits_per_symbol // 2
            a, b = divmod(coded, self.Lprime)
            return format(a, f"0{w}b") + format(b, f"0{w}b")
        return self.base.labels[coded]


def build_mapping_table(c: Constellation) -> MappingTable:
    """Apply the modular coded-symbol rule over the whole superposed grid.

    For cross QAM the grid is the one of the extended ``L' x L'`` square; the
    coded alphabet is then ``L'**2``.
    """
    if not isinstance(c, Constellation):
        raise TypeError("build_mapping_table needs a Constellation")
    sup = superpose(c)
    Lq = c.L
    n = 2 * Lq - 1
    ops = 0
    if c.kind == PAM:
        grid = np.empty((n, 1), dtype=np.int64)
        for j in range(n):
            grid[j, 0] = coded_symbol_pam(j, Lq)
            ops += 1
        alphabet = c.M
    else:
        grid = np.empty((n, n), dtype=np.int64)
        for l in range(n):
            for l2 in range(n):
                a, b = coded_symbol_qam(l, l2, Lq)
                grid[l, l2] = a * Lq + b
                ops += 1
        alphabet = Lq * Lq
    grid.flags.writeable = False
    coded = grid[sup.grid_index[:, 0], sup.grid_index[:, 1]]
    coded.flags.writeable = False
    return MappingTable(sup, coded, grid, alphabet, Lq, "modular", ops)


def xor_mapping_table(c: Constellation) -> MappingTable:
    """Table that XORs the two source labels.

    A superposed point reached by pairs with different XOR values is
    ambiguous; it is assigned the XOR of its first (lowest) origin pair,
    which is what a relay seeing only the sum could do at best.
    """
    sup = superpose(c)
    codes = np.empty(len(sup), dtype=np.int64)
    for p, pairs in enumerate(sup.origin_pairs):
        i1, i2 = pairs[0]
        codes[p] = int(c.labels[i1], 2) ^ int(c.labels[i2], 2)
    label_to_index = {int(lab, 2): i for i, lab in enumerate(c.labels)}
    codes = np.array([label_to_index[v] for v in codes], dtype=np.int64)
    n = 2 * c.L - 1
    grid = np.full((n, 1 if c.kind == PAM else n), -1, dtype=np.int64)
    grid[sup.grid_index[:, 0], sup.grid_index[:, 1]] = codes
    return MappingTable(sup, codes, grid, c.M, c.L, "xor", len(sup))


def _raise_or_flag(failed, out, on_failure):
    if failed.any():
        if on_failure == "raise":
            raise DecodeError("coded symbol does not decode to a transmittable symbol")
        out[failed] = -1
    return out


def decode_expected(table: MappingTable, coded, known, on_failure="raise"):
    """Recover the other source's symbol from a coded symbol and a known symbol.

    Parameters
    ----------
    coded : int or array
        Received coded symbol index.
    known : int or array
        Index of the symbol the destination already has.
    on_failure : {"raise", "flag"}
        With ``"flag"`` undecodable entries come back as -1 instead of raising
        :class:`DecodeError`.
    """
    c = table.base
    coded_a = np.asarray(coded, dtype=np.int64)
    known_a = np.asarray(known, dtype=np.int64)
    if coded_a.size and (coded_a.min() < 0 or coded_a.max() >= table.coded_alphabet_size):
        raise IndexError("coded index outside the coded alphabet")
    if known_a.size and (known_a.min() < 0 or known_a.max() >= c.M):
        raise IndexError("known symbol index out of range")
    coded_a, known_a = np.broadcast_arrays(coded_a, known_a)

    if table.rule != "modular":
        hits = table.pair_codes[known_a] == coded_a[..., None]
        unique = hits.sum(axis=-1) == 1
        out = np.argmax(hits, axis=-1)
        out = _raise_or_flag(~unique, out, on_failure)
    elif c.kind == PAM:
        out = (coded_a - known_a) % c.M
    else:
        Lq = table.Lprime
        a, b = np.divmod(coded_a, Lq)
        k = c.coords[known_a]
        r = (a - k[..., 0]) % Lq
        rq = (b - k[..., 1]) % Lq
        out = c.grid_lookup()[r, rq]
        out = _raise_or_flag(out < 0, out, on_failure)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ExclusiveLawVerdict:
    """Outcome of :func:`verify_exclusive_law`.

    ``counterexample`` is ``((s1, s2), (s1', s2'))``: two pairs differing in
    exactly one source symbol that share a coded symbol.
    """

    ok: bool
    law_ok: bool
    geometric_ok: bool
    counterexample: tuple = None
    window: tuple = None

    def __bool__(self):
        return self.ok


def _law_counterexample(pc):
    M = pc.shape[0]
    for s2 in range(M):
        col = pc[:, s2]
        seen = {}
        for s1 in range(M):
            if col[s1] in seen:
                return (seen[col[s1]], s2), (s1, s2)
            seen[col[s1]] = s1
    for s1 in range(M):
        row = pc[s1]
        seen = {}
        for s2 in range(M):
            if row[s2] in seen:
                return (s1, seen[row[s2]]), (s1, s2)
            seen[row[s2]] = s2
    return None


def _window_violation(table):
    grid = table.grid_codes
    Lq = table.Lprime
    shape = (Lq, 1) if table.base.kind == PAM else (Lq, Lq)
    wins = sliding_window_view(grid, shape).reshape(-1, shape[0] * shape[1])
    starts = np.argwhere(np.ones((grid.shape[0] - shape[0] + 1, grid.shape[1] - shape[1] + 1), dtype=bool))
    for start, w in zip(starts, wins):
        if len(np.unique(w)) != w.size:
            return tuple(int(v) for v in start)
    return None


def verify_exclusive_law(table: MappingTable) -> ExclusiveLawVerdict:
    """Brute-force Exclusive Law check plus the sliding-window geometric check.

    The window has ``M`` points for PAM and ``L x L`` (``L' x L'`` for cross
    QAM) for QAM; every window of the superposed grid must carry distinct
    coded symbols.
    """
    cex = _law_counterexample(table.pair_codes)
    win = _window_violation(table)
    return ExclusiveLawVerdict(
        ok=cex is None and win is None,
        law_ok=cex is None,
        geometric_ok=win is None,
        counterexample=cex,
        window=win,
    )


def decide_superposed(table: MappingTable, y):
    """Relay hard decision on the (extended) superposed grid, returned as coded symbols."""
    c = table.base
    u = np.asarray(y, dtype=complex) / c.scale
    n = 2 * table.Lprime - 1
    l = slice_axis(u.real, n)
    l2 = np.zeros_like(l) if c.kind == PAM else slice_axis(u.imag, n)
    return table.grid_codes[l, l2]


def _bits_matrix(values, width):
    shifts = np.arange(width - 1, -1, -1)
    return ((np.asarray(values)[:, None] >> shifts) & 1).astype(np.uint8)


def _bits_to_int(bits):
    width = bits.shape[1]
    return bits.astype(np.int64) @ (1 << np.arange(width - 1, -1, -1))


def pack_coded(table: MappingTable, coded):
    """Serialize coded symbols and re-chunk them into original-constellation symbols.

    For PAM and square QAM the coded symbol already is an original symbol and
    is returned unchanged. For cross QAM each coded symbol becomes a
    ``2*ceil(log2 L')``-bit word; the concatenated stream is zero-padded to a
    multiple of ``log2 M`` bits and mapped through the base labels.
    """
    coded = np.asarray(coded, dtype=np.int64)
    c = table.base
    if c.kind != QAM_CROSS:
        return coded.copy()
    w = table.coded_bits_per_symbol // 2
    a, b = np.divmod(coded, table.Lprime)
    stream = np.concatenate([_bits_matrix(a, w), _bits_matrix(b, w)], axis=1).ravel()
    k = c.bits_per_symbol
    pad = (-stream.size) % k
    stream = np.concatenate([stream, np.zeros(pad, dtype=np.uint8)])
    words = _bits_to_int(stream.reshape(-1, k))
    lut = np.empty(1 << k, dtype=np.int64)
    lut[[int(lab, 2) for lab in c.labels]] = np.arange(c.M)
    return lut[words]


def unpack_coded(table: MappingTable, symbols, n_coded):
    """Inverse of :func:`pack_coded`; returns ``n_coded`` coded symbols.

    Bit errors can produce axis values ``>= L'``; those are wrapped modulo
    ``L'`` so the output always lies in the coded alphabet.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    c = table.base
    if c.kind != QAM_CROSS:
        return symbols[:n_coded].copy()
    labels = np.array([int(lab, 2) for lab in c.labels], dtype=np.int64)
    stream = _bits_matrix(labels[symbols], c.bits_per_symbol).ravel()
    w = table.coded_bits_per_symbol // 2
    words = stream[: n_coded * 2 * w].reshape(n_coded, 2 * w)
    a = _bits_to_int(words[:, :w]) % table.Lprime
    b = _bits_to_int(words[:, w:]) % table.Lprime
    return a * table.Lprime + b
