"""Variational solution for a generic charge in a truncated SES basis.

Every bra ``<<A|`` is an exact left eigenstate of ``H(F_A)``, so for any
charge ``F``

    <<A| H(F) |b> = E_A Q[A, b] + (F - F_A) W[A, b]

and the Schroedinger equation projected on the bras becomes the pencil
``Z(E, F) h = 0`` with ``Z = (F - F_A) W - (E - E_A) Q``.  The same reasoning
on the kets gives the column form ``E_b Q + (F - F_b) W``, which is what the
left eigenvectors solve.  The two forms agree entry by entry because of the
bi-orthogonality identity ``(F_b - F_A) W = (E_b - E_A) Q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .charges import multiplet_charges
from .contour import OverlapData, QuadratureSpec, overlap_matrices
from .core import EVEN, ModelParams, SpectralResult, _check_parity
from .errors import DomainError, NumericalError, SingularBasisError
from .states import make_state

COND_LIMIT = 1e12
CHARGE_GAP = 1e-8
PHYSICAL_TOL = 1e-6
COULOMB_MODES = ("direct", "reduced")


@dataclass
class BasisData:
    """Truncated basis: kets, the pairings with their partners and the
    equilibrated condition number of ``Q``."""

    states: list
    overlaps: OverlapData
    N_max: int
    conditioning: float
    parity: str = EVEN
    diagnostics: dict = field(default_factory=dict)

    @property
    def params(self) -> ModelParams:
        return self.states[0].params

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.F for s in self.states])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.E for s in self.states])

    @property
    def size(self) -> int:
        return len(self.states)


# --------------------------------------------------------------------------
# basis


def _branch_count(N: int, L: int, b: float, parity: str) -> int:
    return len(multiplet_charges(N, L, b, parity).charges)


def basis_labels(L: int, b: float, N_max: int, parity: str = EVEN, branches="cyclic") -> list:
    """``(N, k)`` labels of the basis.

    ``branches="cyclic"`` takes one state per degree, cycling through the
    branches; ``"all"`` takes every branch (the states of one degree then span
    the same polynomials, so ``Q`` is singular for ``L > 1``); an integer picks
    that branch at every degree, falling back to the last available one.
    """
    _check_parity(parity)
    N_min = 0 if parity == EVEN else L
    if N_max < N_min:
        raise DomainError(f"{parity} basis needs N_max >= {N_min}, got {N_max}")
    labels = []
    for N in range(N_min, N_max + 1):
        count = _branch_count(N, L, b, parity)
        if branches == "all":
            labels += [(N, k) for k in range(1, count + 1)]
        elif branches == "cyclic":
            labels.append((N, (N - N_min) % count + 1))
        elif isinstance(branches, (int, np.integer)) and branches >= 1:
            labels.append((N, min(int(branches), count)))
        else:
            raise DomainError(f"branches must be 'cyclic', 'all' or a positive integer, got {branches!r}")
    return labels


def equilibrated_condition(Q: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """2-norm condition of ``D1 Q D2`` with ``D1, D2`` balancing row and
    column maxima; returns it with the two scale vectors."""
    a = np.abs(Q)
    r = a.max(axis=1)
    if np.any(r == 0):
        return np.inf, np.ones(len(r)), np.ones(len(r))
    d1 = 1.0 / r
    c = (a * d1[:, None]).max(axis=0)
    if np.any(c == 0):
        return np.inf, d1, np.ones(len(c))
    d2 = 1.0 / c
    return float(np.linalg.cond(d1[:, None] * Q * d2[None, :])), d1, d2


def assemble_basis(states, quad: QuadratureSpec | None = None, strict: bool = True, N_max=None) -> BasisData:
    """Pair the kets with their partners and check that ``Q`` is invertible.

    With ``strict`` a condition number above ``1e12`` (after equilibration)
    raises :class:`SingularBasisError`; otherwise it is only recorded.
    """
    states = list(states)
    if not states:
        raise DomainError("empty basis")
    parities = {s.parity for s in states}
    if len(parities) != 1:
        raise DomainError("mixed-parity bases are not supported")
    data = overlap_matrices(states, quad)
    cond, _, _ = equilibrated_condition(data.Q)
    N_max = max(s.N for s in states) if N_max is None else N_max
    labels = [(s.N, s.k) for s in states]
    if strict and not cond <= COND_LIMIT:
        raise SingularBasisError(
            f"overlap matrix singular (condition {cond:.3g}) for {len(states)} states up to N={N_max}: {labels}"
        )
    return BasisData(states, data, N_max, cond, parities.pop())


def build_basis(
    L: int,
    b: float,
    eps: float,
    N_max: int,
    parity: str = EVEN,
    quad: QuadratureSpec | None = None,
    branches="cyclic",
    strict: bool = True,
) -> BasisData:
    """Basis of ``parity`` states with degrees up to ``N_max``; see
    :func:`basis_labels` for ``branches``."""
    params = ModelParams(L, b, eps)
    labels = basis_labels(L, b, N_max, parity, branches)
    states = [make_state(params, N, k, parity) for N, k in labels]
    return assemble_basis(states, quad, strict, N_max)


# --------------------------------------------------------------------------
# pencils


def coulomb_from_overlaps(basis: BasisData) -> np.ndarray:
    """``W`` rebuilt from ``Q`` through ``W = (E_b - E_A) / (F_b - F_A) Q``,
    keeping the quadrature diagonal ``w`` and zero inside a multiplet.

    Requires pairwise distinct charges between different degrees.
    """
    E, F = basis.energies, basis.charges
    n = basis.size
    W = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for c in range(n):
            if a == c:
                W[a, c] = basis.overlaps.w[a]
            elif E[a] == E[c]:
                W[a, c] = 0.0
            else:
                gap = abs(F[c] - F[a])
                if gap < CHARGE_GAP * (1 + abs(F[a])):
                    raise NumericalError(f"charges {F[a]} and {F[c]} coincide; reduced Coulomb matrix undefined")
                W[a, c] = (E[c] - E[a]) / (F[c] - F[a]) * basis.overlaps.Q[a, c]
    return W


def _coulomb(basis: BasisData, coulomb: str, F: float) -> np.ndarray:
    if coulomb not in COULOMB_MODES:
        raise DomainError(f"coulomb must be one of {COULOMB_MODES}, got {coulomb!r}")
    if coulomb == "direct":
        return basis.overlaps.W
    gaps = np.abs(basis.charges - F)
    if np.min(gaps) < CHARGE_GAP * (1 + abs(F)):
        raise NumericalError(f"F={F} collides with a basis charge; the reduced pencil is degenerate")
    return coulomb_from_overlaps(basis)


def assemble_Z(E: complex, F: float, basis: BasisData, coulomb: str = "direct") -> np.ndarray:
    """``Z[A, b] = (F - F_A) W[A, b] - (E - E_A) Q[A, b]``."""
    if coulomb not in COULOMB_MODES:
        raise DomainError(f"coulomb must be one of {COULOMB_MODES}, got {coulomb!r}")
    W = basis.overlaps.W if coulomb == "direct" else coulomb_from_overlaps(basis)
    dF = (F - basis.charges)[:, None]
    dE = (E - basis.energies)[:, None]
    return dF * W - dE * basis.overlaps.Q


def _row_pencil(F, basis, W):
    return (F - basis.charges)[:, None] * W + basis.energies[:, None] * basis.overlaps.Q


def _column_pencil(F, basis, W):
    return W * (F - basis.charges)[None, :] + basis.overlaps.Q * basis.energies[None, :]


def is_physical(E: complex) -> bool:
    return abs(E.imag) <= PHYSICAL_TOL * (1 + abs(E.real))


def select_order(values) -> np.ndarray:
    """Physical (real within ``1e-6 (1 + |Re|)``) eigenvalues first by real
    part, the rest by distance from the real axis."""
    values = np.asarray(values)
    phys = [i for i, v in enumerate(values) if np.isfinite(v) and is_physical(complex(v))]
    rest = [i for i, v in enumerate(values) if np.isfinite(v) and i not in set(phys)]
    phys.sort(key=lambda i: (values[i].real, abs(values[i].imag)))
    rest.sort(key=lambda i: (abs(values[i].imag), values[i].real))
    return np.array(phys + rest, dtype=int)


def _check_solvable(basis: BasisData, count: int):
    if not basis.conditioning <= COND_LIMIT:
        raise SingularBasisError(f"basis overlap matrix is singular (condition {basis.conditioning:.3g})")
    if count < 1:
        raise DomainError("count must be positive")


def _relative_residuals(M, Q, values, vectors, transpose=False):
    out = []
    for i, E in enumerate(values):
        Z = M - E * Q
        if transpose:
            Z = Z.T
        v = vectors[:, i]
        scale = np.linalg.norm(Z, 2) * np.linalg.norm(v)
        out.append(float(np.linalg.norm(Z @ v) / scale) if scale else 0.0)
    return np.array(out)


def _solve(F, basis, count, coulomb, column):
    _check_solvable(basis, count)
    F = float(F)
    W = _coulomb(basis, coulomb, F)
    Q = basis.overlaps.Q
    M = _column_pencil(F, basis, W) if column else _row_pencil(F, basis, W)
    _, d1, d2 = equilibrated_condition(Q)
    Ms, Qs = d1[:, None] * M * d2[None, :], d1[:, None] * Q * d2[None, :]
    if column:
        values, raw = scipy.linalg.eig(Ms.T, Qs.T)
        scale = d1
    else:
        values, raw = scipy.linalg.eig(Ms, Qs)
        scale = d2
    order = select_order(values)[:count]
    values, raw = values[order], raw[:, order]
    # backward error of the equilibrated pencil, which is what eig solved
    res = _relative_residuals(Ms, Qs, values, raw, transpose=column)
    vecs = raw * scale[:, None]
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    diag = {
        "F": F,
        "coulomb": coulomb,
        "pencil": "column" if column else "row",
        "physical": [bool(is_physical(complex(v))) for v in values],
        "conditioning": basis.conditioning,
        "basis": [(s.N, s.k) for s in basis.states],
    }
    return values, vecs, res, diag


def solve_nonqes_right(F: float, basis: BasisData, count: int = 5, coulomb: str = "direct") -> SpectralResult:
    """Eigenvalues ``E`` and coefficients ``h`` of
    ``[(F - F_A) W + E_A Q] h = E Q h``.

    ``coulomb="reduced"`` rebuilds ``W`` from ``Q`` and then refuses charges
    within ``1e-8`` of a basis charge; the default uses the quadrature ``W``
    and stays valid at ``F = F_A``, where ``E_A`` is returned exactly.
    """
    values, vecs, res, diag = _solve(F, basis, count, coulomb, column=False)
    return SpectralResult(values, right_vectors=vecs, residuals=res, diagnostics=diag)


def solve_nonqes_left(F: float, basis: BasisData, count: int = 5, coulomb: str = "direct") -> SpectralResult:
    """Eigenvalues ``E`` and coefficients ``g`` of the column form
    ``g^T [W (F - F_b) + Q E_b] = E g^T Q``."""
    values, vecs, res, diag = _solve(F, basis, count, coulomb, column=True)
    return SpectralResult(values, left_vectors=vecs, residuals=res, diagnostics=diag)


def solve_nonqes(F: float, basis: BasisData, count: int = 5, coulomb: str = "direct") -> SpectralResult:
    """Right and left solves paired eigenvalue by eigenvalue.

    ``diagnostics["left_right_mismatch"]`` is the largest distance between an
    eigenvalue of one form and the nearest of the other.
    """
    right = solve_nonqes_right(F, basis, basis.size, coulomb)
    left = solve_nonqes_left(F, basis, basis.size, coulomb)
    used, perm = set(), []
    for E in right.eigenvalues:
        j = min((j for j in range(len(left.eigenvalues)) if j not in used),
                key=lambda j: abs(left.eigenvalues[j] - E))
        used.add(j)
        perm.append(j)
    perm = np.array(perm)
    mismatch = float(np.max(np.abs(left.eigenvalues[perm] - right.eigenvalues)))
    n = min(count, basis.size)
    diag = dict(right.diagnostics, left_right_mismatch=mismatch, pencil="row+column")
    return SpectralResult(
        right.eigenvalues[:n],
        right_vectors=right.right_vectors[:, :n],
        left_vectors=left.left_vectors[:, perm[:n]],
        residuals=np.maximum(right.residuals[:n], left.residuals[perm[:n]]),
        diagnostics=diag,
    )


def biorthogonality_matrix(result: SpectralResult, basis: BasisData) -> np.ndarray:
    """``g_i^T Q h_j`` normalized so that the diagonal is one."""
    G = result.left_vectors.T @ basis.overlaps.Q @ result.right_vectors
    d = np.diag(G)
    return G / np.sqrt(d)[:, None] / np.sqrt(d)[None, :]


def projector_residual(basis: BasisData) -> float:
    """Largest entry of ``Q Q^{-1} - I`` for the equilibrated ``Q``."""
    _, d1, d2 = equilibrated_condition(basis.overlaps.Q)
    Qs = d1[:, None] * basis.overlaps.Q * d2[None, :]
    R = np.linalg.inv(Qs)
    return float(np.max(np.abs(Qs @ R - np.eye(len(Qs)))))


__all__ = [
    "BasisData",
    "COND_LIMIT",
    "assemble_Z",
    "assemble_basis",
    "basis_labels",
    "biorthogonality_matrix",
    "build_basis",
    "coulomb_from_overlaps",
    "equilibrated_condition",
    "projector_residual",
    "select_order",
    "solve_nonqes",
    "solve_nonqes_left",
    "solve_nonqes_right",
]
