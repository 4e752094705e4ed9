"""Finite-difference reference spectrum of the full Schroedinger equation.

The operator ``-d^2/dx^2 + V(r)`` with ``r = x - i*eps`` is discretized with
the three-point stencil on a uniform grid and Dirichlet ends, giving a
complex symmetric tridiagonal matrix.  Its spectrum does not depend on the
line as long as the pole at ``r = 0`` stays on the same side, so for ``b > 0``
the default line is moved down to ``Im r = -b`` where the factor
``exp(-i b r)`` of the bound states stops oscillating and the stencil error
is smallest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .core import ModelParams, SpectralResult
from .errors import DomainError, NumericalError, ResolutionError

MIN_POINTS = 200
RESOLUTION_LIMIT = 0.1
PHYSICAL_TOL = 1e-3
DENSE_MAX = 1200
COARSE_POINTS = 801
RICHARDSON_LIMIT = 0.1


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``points`` nodes on ``[-X, X]`` along ``Im r = -eps``.

    ``half_width=None`` means ``|b| + 10``; ``eps=None`` means the model's
    ``eps``, raised to ``b`` when ``b`` is positive.
    """

    half_width: float | None = None
    points: int = 2000
    eps: float | None = None

    def __post_init__(self):
        if int(self.points) != self.points or self.points < MIN_POINTS:
            raise DomainError(f"points must be an integer >= {MIN_POINTS}, got {self.points!r}")
        if self.half_width is not None and not self.half_width > 0:
            raise DomainError("half_width must be positive")
        if self.eps is not None and not self.eps > 0:
            raise DomainError("eps must be positive")

    def width(self, b: float) -> float:
        return abs(b) + 10.0 if self.half_width is None else float(self.half_width)

    def offset(self, params: ModelParams) -> float:
        if self.eps is not None:
            return float(self.eps)
        return max(params.eps, params.b) if params.b > 0 else params.eps

    def spacing(self, b: float) -> float:
        return 2 * self.width(b) / (self.points - 1)

    def halved(self) -> "GridSpec":
        return GridSpec(self.half_width, 2 * self.points - 1, self.eps)


def potential(params: ModelParams, F: float, r):
    """``ell(ell+1)/r^2 + iF/r + 2ibr + r^2``."""
    ell = float(params.ell)
    r = np.asarray(r, dtype=complex)
    return ell * (ell + 1) / r**2 + 1j * F / r + 2j * params.b * r + r**2


def _operator(params, F, grid):
    X, n = grid.width(params.b), int(grid.points)
    x = np.linspace(-X, X, n)[1:-1]
    h = 2 * X / (n - 1)
    V = potential(params, F, x - 1j * grid.offset(params))
    diag = 2.0 / h**2 + V
    off = np.full(len(x) - 1, -1.0 / h**2, dtype=complex)
    return x, h, diag, off, V


def _physical(E):
    return abs(E.imag) <= PHYSICAL_TOL * (1 + abs(E.real))


def _select(values, count):
    """Physical eigenvalues by real part, then the rest by ``|Im|``."""
    idx = list(range(len(values)))
    phys = sorted((i for i in idx if _physical(values[i])), key=lambda i: values[i].real)
    rest = sorted((i for i in idx if not _physical(values[i])), key=lambda i: abs(values[i].imag))
    return (phys + rest)[:count]


def _dense(diag, off):
    H = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    values, vectors = scipy.linalg.eig(H)
    return values, vectors


def _shift_invert(diag, off, targets):
    H = scipy.sparse.diags([off, diag, off], [-1, 0, 1], format="csc")
    values, vectors = [], []
    for t in targets:
        try:
            v, w = scipy.sparse.linalg.eigs(H, k=1, sigma=t, which="LM")
        except (scipy.sparse.linalg.ArpackNoConvergence, RuntimeError) as exc:
            raise NumericalError(f"shift-invert eigensolve failed near {t}: {exc}") from exc
        values.append(v[0])
        vectors.append(w[:, 0])
    return np.array(values), np.array(vectors).T


def _residuals(diag, off, values, vectors):
    scale = np.max(np.abs(diag)) + 2 * np.max(np.abs(off))
    out = []
    for E, v in zip(values, vectors.T):
        Hv = diag * v
        Hv[:-1] += off * v[1:]
        Hv[1:] += off * v[:-1]
        out.append(float(np.linalg.norm(Hv - E * v) / (scale * np.linalg.norm(v))))
    return np.array(out)


def fd_spectrum(params: ModelParams, F: float, grid: GridSpec | None = None, count: int = 5) -> SpectralResult:
    """Lowest ``count`` physical eigenvalues of the discretized operator.

    Physical means ``|Im E| <= 1e-3 (1 + |Re E|)``; if fewer exist the list is
    completed by the eigenvalues closest to the real axis.  Grids with more
    than 1200 points are solved by shift-invert around targets taken from a
    coarse dense solve.
    """
    grid = grid or GridSpec()
    if count < 1:
        raise DomainError("count must be positive")
    x, h, diag, off, V = _operator(params, F, grid)
    resolution = h * h * float(np.max(np.abs(V)))
    if resolution > RESOLUTION_LIMIT:
        raise ResolutionError(f"grid does not resolve the potential: h^2 max|V| = {resolution:.3g} > {RESOLUTION_LIMIT}")
    if grid.points <= DENSE_MAX:
        values, vectors = _dense(diag, off)
        method = "dense"
    else:
        coarse = GridSpec(grid.half_width, COARSE_POINTS, grid.eps)
        _, _, cdiag, coff, _ = _operator(params, F, coarse)
        cvalues = scipy.linalg.eigvals(np.diag(cdiag) + np.diag(coff, 1) + np.diag(coff, -1))
        targets = cvalues[_select(cvalues, count)]
        values, vectors = _shift_invert(diag, off, targets)
        method = "shift_invert"
    if not np.all(np.isfinite(values)):
        raise NumericalError("eigensolver returned non-finite values")
    order = _select(values, count)
    values, vectors = values[order], vectors[:, order]
    return SpectralResult(
        values,
        right_vectors=vectors,
        residuals=_residuals(diag, off, values, vectors),
        diagnostics={
            "method": method,
            "h": h,
            "half_width": grid.width(params.b),
            "eps": grid.offset(params),
            "points": grid.points,
            "resolution": resolution,
            "physical": [bool(_physical(v)) for v in values],
        },
    )


def richardson_refine(params: ModelParams, F: float, grid: GridSpec | None = None, count: int = 5) -> SpectralResult:
    """Eliminate the ``h^2`` error: ``(4 E_{h/2} - E_h) / 3``.

    Raises :class:`ResolutionError` when the two grids disagree by more than
    10 % on any eigenvalue.
    """
    grid = grid or GridSpec()
    coarse = fd_spectrum(params, F, grid, count)
    fine = fd_spectrum(params, F, grid.halved(), count)
    Ec = coarse.eigenvalues
    Ef = np.array([Ec[np.argmin(np.abs(Ec - e))] for e in fine.eigenvalues])
    gap = np.abs(fine.eigenvalues - Ef) / np.maximum(np.abs(fine.eigenvalues), 1.0)
    if np.any(gap > RICHARDSON_LIMIT):
        raise ResolutionError(f"h and h/2 spectra disagree by {np.max(gap):.1%}")
    values = (4 * fine.eigenvalues - Ef) / 3
    return SpectralResult(
        values,
        residuals=np.abs(values - fine.eigenvalues),
        diagnostics={
            "method": "richardson",
            "coarse": coarse.eigenvalues,
            "fine": fine.eigenvalues,
            "h": coarse.diagnostics["h"],
            "eps": coarse.diagnostics["eps"],
            "physical": fine.diagnostics["physical"],
        },
    )
