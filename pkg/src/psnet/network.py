"""Transmission matrices: file I/O, Haar sampling, beam-splitter chains."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ROLE_MATRIX, Ensemble, SeededStream, ValidationError

UNITARY_TOL = 1e-10


class MatrixFormatError(ValueError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


@dataclass(frozen=True, eq=False)
class TransmissionMatrix:
    entries: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.entries, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError(f"transmission matrix must be square, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("transmission matrix has non-finite entries")
        t.flags.writeable = False
        object.__setattr__(self, "entries", t)
        dev = np.abs(t.conj().T @ t - np.eye(t.shape[0])).max()
        object.__setattr__(self, "unitarity_deviation", float(dev))
        object.__setattr__(self, "max_singular_value", float(np.linalg.norm(t, 2)))

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_deviation <= tol

    @property
    def physical(self) -> bool:
        """False when the largest singular value exceeds one (gain)."""
        return self.max_singular_value <= 1 + UNITARY_TOL

    def __matmul__(self, other: "TransmissionMatrix") -> "TransmissionMatrix":
        return TransmissionMatrix(self.entries @ other.entries)


def identity(M: int) -> TransmissionMatrix:
    return TransmissionMatrix(np.eye(M))


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            yield lineno, s


def load_matrix(path) -> TransmissionMatrix:
    """Read the interleaved ``re im`` text format (see :func:`save_matrix`)."""
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MatrixFormatError(path, 0, "missing 'M N' header") from None
    parts = header.split()
    try:
        if len(parts) != 2:
            raise ValueError
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFormatError(path, lineno, f"malformed header {header!r}, expected 'M N'") from None
    if m < 1 or n < 1:
        raise MatrixFormatError(path, lineno, "matrix dimensions must be positive")
    if m != n:
        raise MatrixFormatError(path, lineno, f"matrix must be square, got {m} x {n}")
    rows = []
    last = lineno
    for lineno, s in lines:
        last = lineno
        if len(rows) == m:
            raise MatrixFormatError(path, lineno, f"unexpected extra row (header declares {m})")
        fields = s.split()
        if len(fields) != 2 * n:
            raise MatrixFormatError(path, lineno, f"row has {len(fields)} values, expected {2 * n}")
        try:
            vals = np.array([float(f) for f in fields])
        except ValueError as exc:
            raise MatrixFormatError(path, lineno, f"bad number: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise MatrixFormatError(path, lineno, "non-finite entry")
        rows.append(vals[0::2] + 1j * vals[1::2])
    if len(rows) != m:
        raise MatrixFormatError(path, last, f"expected {m} rows, found {len(rows)}")
    return TransmissionMatrix(np.array(rows), meta={"source": str(path)})


def save_matrix(T: TransmissionMatrix, path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{T.M} {T.M}")
    for row in T.entries:
        lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def apply_arrays(T: TransmissionMatrix, alpha: np.ndarray, beta: np.ndarray,
                 wigner: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """``alpha' = T alpha`` and ``beta' = conj(T) beta`` on row-sample arrays."""
    a = alpha @ T.entries.T
    if wigner:
        return a, a.conj()
    return a, beta @ T.entries.conj().T


def apply(T: TransmissionMatrix, ens: Ensemble) -> Ensemble:
    if T.M != ens.modes:
        raise ValueError(f"matrix is {T.M} x {T.M} but ensemble has {ens.modes} modes")
    wigner = ens.ordering.is_wigner
    if wigner and not T.is_unitary():
        raise ValidationError(
            "Wigner ensembles require a unitary transmission matrix "
            f"(deviation {T.unitarity_deviation:.3g}); use positive-P for lossy networks"
        )
    a, b = apply_arrays(T, ens.alpha, ens.beta, wigner)
    return Ensemble(a, b, ens.ordering, ens.layout, dict(ens.meta))


def haar_unitary(M: int, seed: SeededStream) -> TransmissionMatrix:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix.

    The phases of R's diagonal are divided out so the result is Haar
    distributed rather than biased by the QR sign convention.
    """
    if M < 1:
        raise ValueError("mode count must be >= 1")
    stream = SeededStream(seed.seed, seed.stream_index, ROLE_MATRIX)
    z = stream.normals((2, M, M))
    g = (z[0] + 1j * z[1]) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return TransmissionMatrix(q, meta={"kind": "haar", "seed": seed.seed, "stream": seed.stream_index})


@dataclass(frozen=True)
class BeamSplitterChainSpec:
    """Amplitude reflectivities ``R_1 .. R_{M-1}`` of a beam-splitter chain."""

    M: int
    reflectivities: tuple[float, ...] = None

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("a beam-splitter chain needs M >= 2")
        refl = self.reflectivities
        if refl is None:
            refl = default_reflectivities(self.M)
        refl = tuple(float(x) for x in refl)
        if len(refl) != self.M - 1:
            raise ValueError(f"need {self.M - 1} reflectivities, got {len(refl)}")
        if not all(0.0 < x < 1.0 for x in refl):
            raise ValueError("reflectivities must lie strictly between 0 and 1")
        object.__setattr__(self, "reflectivities", refl)


def default_reflectivities(M: int) -> tuple[float, ...]:
    # R_1^2 = 1/2; R_{M-j}^2 = 1/(j+1) for j = 1..M-2 (equal split of mode 2)
    r2 = [0.5] + [1.0 / (M - k + 1) for k in range(2, M)]
    return tuple(math.sqrt(x) for x in r2)


def bs_chain_matrix(spec: BeamSplitterChainSpec) -> TransmissionMatrix:
    """Real orthogonal matrix of the chain BS1 .. BS(M-1).

    BS_k acts on the running output of mode k and the fresh input k+1::

        a_k   <- R_k a_k + T_k a_{k+1}
        a_k+1 <- T_k a_k - R_k a_{k+1}

    Rows index outputs ``a_1^(1), a_2^(2), ..., a_M^(M-1)``.
    """
    M = spec.M
    U = np.eye(M)
    for k, R in enumerate(spec.reflectivities):
        T = math.sqrt(1.0 - R * R)
        B = np.eye(M)
        B[k, k], B[k, k + 1] = R, T
        B[k + 1, k], B[k + 1, k + 1] = T, -R
        U = B @ U
    return TransmissionMatrix(U, meta={"kind": "bschain", "reflectivities": list(spec.reflectivities)})
