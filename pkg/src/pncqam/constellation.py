"""M-PAM and M-QAM constellations (square and cross) with binary or Gray labels.

Points live on the centered integer grid ``2k - (L - 1)`` per axis, scaled by a
single real factor so that the mean symbol energy equals ``avg_energy``. The
scale factor is also the half-distance ``d`` between neighboring points.

Symbol index ``i`` is tied to geometry, never to the bit label: for PAM the
``i``-th point from the left, for QAM the points are enumerated with the
in-phase axis index ``k`` outer and the quadrature index ``k'`` inner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAM",
    "QAM_SQUARE",
    "QAM_CROSS",
    "SUPPORTED",
    "Constellation",
    "build_constellation",
    "from_name",
    "modulate",
    "demodulate",
    "bits_of",
    "gray_code",
    "slice_axis",
]

PAM = "pam"
QAM_SQUARE = "qam-square"
QAM_CROSS = "qam-cross"

SUPPORTED = {
    PAM: (2, 4, 8, 16),
    QAM_SQUARE: (4, 16, 64, 256),
    QAM_CROSS: (8, 32, 128),
}

# bounding grid side and the predicate for grid cells that are removed
_CROSS_SHAPES = {
    8: (3, lambda x, y: (x == 0) & (y == 0)),
    32: (6, lambda x, y: (np.abs(x) == 5) & (np.abs(y) == 5)),
    128: (12, lambda x, y: (np.abs(x) >= 9) & (np.abs(y) >= 9)),
}

_TIE_TOL = 1e-9


def gray_code(n):
    """Reflected binary Gray code of ``n`` (works on ints and integer arrays)."""
    return n ^ (n >> 1)


def _to_bits(values, width):
    return tuple(format(int(v), f"0{width}b") for v in values)


def slice_axis(u, L):
    """Nearest index in ``range(L)`` for coordinates ``u`` on the grid ``2k - (L-1)``.

    Exact midpoints (within a relative 1e-9) resolve to the lower index.
    """
    t = (np.asarray(u, dtype=float) + (L - 1)) / 2.0
    k = np.ceil(t - 0.5 - _TIE_TOL)
    return np.clip(k, 0, L - 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Immutable labeled constellation.

    Attributes
    ----------
    kind : str
        One of ``"pam"``, ``"qam-square"``, ``"qam-cross"``.
    M : int
        Alphabet size.
    points : np.ndarray
        Complex coordinates, shape ``(M,)``.
    labels : tuple of str
        Bit label per index, each of length ``ceil(log2 M)``.
    L : int
        Points per axis (``M`` for PAM, ``sqrt(M)`` for square QAM, the
        bounding side ``L'`` for cross QAM).
    scale : float
        Half-distance between neighboring points.
    coords : np.ndarray
        Integer axis indices ``(k, k')`` per point, shape ``(M, 2)``; ``k'``
        is always 0 for PAM.
    labeling : str
        ``"binary"`` or ``"gray"``.
    """

    kind: str
    M: int
    points: np.ndarray
    labels: tuple
    L: int
    scale: float
    coords: np.ndarray
    labeling: str

    @property
    def name(self) -> str:
        if self.kind == PAM:
            return "bpsk" if self.M == 2 else f"pam{self.M}"
        return f"qam{self.M}"

    @property
    def bits_per_symbol(self) -> int:
        return math.ceil(math.log2(self.M))

    @property
    def spacing(self) -> float:
        """Half-distance ``d`` between neighbors (neighbors sit ``2d`` apart)."""
        return self.scale

    @property
    def avg_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def is_qam(self) -> bool:
        return self.kind != PAM

    @property
    def is_full_grid(self) -> bool:
        return self.kind != QAM_CROSS

    @property
    def energy_per_d2(self) -> float:
        """Mean symbol energy in units of ``d**2``."""
        return self.avg_energy / self.scale**2

    def grid_lookup(self) -> np.ndarray:
        """``(L, L)`` array mapping axis indices to symbol index, -1 where absent."""
        lut = np.full((self.L, self.L), -1, dtype=np.int64)
        lut[self.coords[:, 0], self.coords[:, 1]] = np.arange(self.M)
        return lut

    def bit_matrix(self) -> np.ndarray:
        """Labels as a ``(M, bits_per_symbol)`` uint8 array."""
        return np.array([[int(b) for b in lab] for lab in self.labels], dtype=np.uint8)

    def modulate(self, index):
        return modulate(self, index)

    def demodulate(self, y):
        return demodulate(self, y)

    def bits_of(self, index) -> str:
        return bits_of(self, index)

    def __repr__(self) -> str:
        return f"Constellation({self.name}, labeling={self.labeling!r}, L={self.L})"


def _axis_grid(L):
    return 2 * np.arange(L) - (L - 1)


def build_constellation(kind, M, labeling="binary", avg_energy=1.0):
    """Build a constellation of the given kind and size.

    Parameters
    ----------
    kind : str
        ``"pam"``, ``"qam-square"`` or ``"qam-cross"``.
    M : int
        Alphabet size; see ``SUPPORTED`` for the admissible values per kind.
    labeling : {"binary", "gray"}
        Gray labeling is per-axis reflected Gray; cross shapes are always
        labeled binary in enumeration order.
    avg_energy : float
        Target mean of ``|point|**2``.

    Examples
    --------
    >>> c = build_constellation("pam", 4)
    >>> np.round(c.points.real * np.sqrt(5), 12).tolist()
    [-3.0, -1.0, 1.0, 3.0]
    >>> build_constellation("pam", 4, "gray").labels
    ('00', '01', '11', '10')
    """
    if kind not in SUPPORTED or M not in SUPPORTED[kind]:
        supported = "; ".join(f"{k}: {v}" for k, v in SUPPORTED.items())
        raise ValueError(f"unsupported constellation ({kind!r}, M={M}); supported sets are {supported}")
    if labeling not in ("binary", "gray"):
        raise ValueError(f"labeling must be 'binary' or 'gray', got {labeling!r}")
    if not avg_energy > 0:
        raise ValueError("avg_energy must be positive")

    nbits = math.ceil(math.log2(M))
    if kind == PAM:
        L = M
        k = np.arange(M)
        coords = np.stack([k, np.zeros_like(k)], axis=1)
        raw = _axis_grid(L)[k].astype(complex)
        codes = gray_code(k) if labeling == "gray" else k
    elif kind == QAM_SQUARE:
        L = math.isqrt(M)
        k, kq = np.divmod(np.arange(M), L)
        coords = np.stack([k, kq], axis=1)
        ax = _axis_grid(L)
        raw = ax[k] + 1j * ax[kq]
        half = nbits // 2
        if labeling == "gray":
            codes = (gray_code(k) << half) | gray_code(kq)
        else:
            codes = (k << half) | kq
    else:
        L, removed = _CROSS_SHAPES[M]
        ax = _axis_grid(L)
        kk, kkq = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
        keep = ~removed(ax[kk], ax[kkq])
        coords = np.stack([kk[keep], kkq[keep]], axis=1)
        raw = ax[coords[:, 0]] + 1j * ax[coords[:, 1]]
        codes = np.arange(M)
        labeling = "binary"

    scale = math.sqrt(avg_energy / np.mean(np.abs(raw) ** 2))
    points = raw * scale
    points.flags.writeable = False
    coords = coords.astype(np.int64)
    coords.flags.writeable = False
    return Constellation(
        kind=kind,
        M=M,
        points=points,
        labels=_to_bits(codes, nbits),
        L=L,
        scale=scale,
        coords=coords,
        labeling=labeling,
    )


_ALIASES = {"bpsk": (PAM, 2), "qpsk": (QAM_SQUARE, 4)}


def from_name(name, labeling="binary", avg_energy=1.0):
    """Build from a short id such as ``"bpsk"``, ``"pam4"``, ``"qpsk"``, ``"qam32"``."""
    key = name.strip().lower()
    if key in _ALIASES:
        kind, M = _ALIASES[key]
    elif key.startswith("pam") and key[3:].isdigit():
        kind, M = PAM, int(key[3:])
    elif key.startswith("qam") and key[3:].isdigit():
        M = int(key[3:])
        kind = QAM_CROSS if M in SUPPORTED[QAM_CROSS] else QAM_SQUARE
    else:
        raise ValueError(f"unknown modulation id {name!r}")
    return build_constellation(kind, M, labeling=labeling, avg_energy=avg_energy)


def _check_index(c, index):
    idx = np.asarray(index)
    if not np.issubdtype(idx.dtype, np.integer):
        raise TypeError("symbol indices must be integers")
    if idx.size and (idx.min() < 0 or idx.max() >= c.M):
        raise IndexError(f"symbol index out of range [0, {c.M})")
    return idx


def modulate(c, index):
    """Return ``c.points[index]`` for a scalar or array of indices."""
    idx = _check_index(c, index)
    out = c.points[idx]
    return complex(out) if idx.ndim == 0 else out


def _brute_force(c, y, chunk=1 << 14):
    out = np.empty(y.shape, dtype=np.int64)
    for start in range(0, y.size, chunk):
        blk = y[start : start + chunk]
        d2 = np.abs(blk[:, None] - c.points[None, :]) ** 2
        best = d2.min(axis=1, keepdims=True)
        tied = d2 <= best * (1 + _TIE_TOL) + 1e-300
        out[start : start + chunk] = np.argmax(tied, axis=1)
    return out


def demodulate(c, y):
    """Minimum-distance decision; ties go to the lowest symbol index.

    Accepts a scalar or an array of received samples and returns symbol
    indices of matching shape.
    """
    arr = np.asarray(y, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("received samples must be finite")
    flat = arr.ravel()
    u = flat / c.scale
    k = slice_axis(u.real, c.L)
    if c.kind == PAM:
        idx = k
    else:
        kq = slice_axis(u.imag, c.L)
        if c.is_full_grid:
            idx = k * c.L + kq
        else:
            idx = c.grid_lookup()[k, kq]
            missing = idx < 0
            if missing.any():
                idx[missing] = _brute_force(c, flat[missing])
    idx = idx.reshape(arr.shape)
    return int(idx) if arr.ndim == 0 else idx


def bits_of(c, index) -> str:
    """Bit label of one symbol index."""
    idx = _check_index(c, index)
    if idx.ndim != 0:
        raise TypeError("bits_of takes a single index")
    return c.labels[int(idx)]
