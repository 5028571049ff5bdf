"""Time evolution and observables.

Dense evolution diagonalizes once and applies spectral phases; the
Krylov propagator runs short Lanczos iterations per step with residual
control and step halving.  Observables follow the quench protocol:
fidelity to the initial state, summed overlap with the other minimal
string configurations, patch-restricted matter occupation, energy and
norm drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .gauge import SectorBasis, U1_QLM, Z2, matter_excess
from .models import DenseOperator, SparseOperator
from .strings import MinimalModelBasis


class PropagatorError(RuntimeError):
    """Krylov step failed to converge; carries step diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid from 0 to t_max (units of 1/kappa)."""

    t_max: float
    n_points: int
    max_subdivisions: int = 24

    def __post_init__(self):
        if not (self.t_max > 0 and np.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be at least 2, got {self.n_points}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_points)


@dataclass(eq=False)
class Trajectory:
    operator: object
    times: np.ndarray
    states: np.ndarray       # (n_times, dim) complex, normalized rows
    norm_error: np.ndarray   # per grid point, before norm restoration


def basis_state(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[i] = 1.0
    return v


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def _as_matrix(H):
    if isinstance(H, DenseOperator):
        return H.matrix
    if isinstance(H, SparseOperator):
        return H.to_dense()
    return np.asarray(H)


def evolve_dense(H, psi0, grid: TimeGrid, max_dim: int = 4096) -> Trajectory:
    """psi(t) = exp(-iHt) psi0 by full spectral decomposition."""
    mat = _as_matrix(H)
    if mat.shape[0] > max_dim:
        raise ValueError(
            f"dense evolution capped at dimension {max_dim}, got {mat.shape[0]}; "
            "use evolve_krylov"
        )
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * scale:
        raise ValueError("evolve_dense requires a Hermitian operator")
    evals, evecs = np.linalg.eigh(mat)
    psi0 = normalize(psi0)
    c0 = evecs.conj().T @ psi0
    times = grid.times
    phases = np.exp(-1j * np.outer(times, evals))
    states = (phases * c0[None, :]) @ evecs.T
    norms = np.linalg.norm(states, axis=1)
    norm_error = np.abs(norms - 1.0)
    states = states / norms[:, None]
    return Trajectory(H, times, states, norm_error)


def _lanczos_step(matvec, psi, h, tol, m_max):
    """One Krylov substep; returns (new_state, residual_estimate)."""
    dim = psi.size
    m_max = min(m_max, dim)
    V = np.empty((m_max, dim), dtype=np.complex128)
    alpha = np.empty(m_max)
    beta = np.zeros(m_max)
    V[0] = psi
    w = matvec(psi)
    alpha[0] = np.real(np.vdot(V[0], w))
    w = w - alpha[0] * V[0]
    m = 1
    breakdown = False
    for j in range(1, m_max):
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-14:
            breakdown = True
            break
        V[j] = w / beta[j]
        # full reorthogonalization keeps the small basis clean
        V[j] -= V[:j].T @ (V[:j].conj() @ V[j])
        V[j] /= np.linalg.norm(V[j])
        w = matvec(V[j])
        alpha[j] = np.real(np.vdot(V[j], w))
        w = w - alpha[j] * V[j] - beta[j] * V[j - 1]
        m = j + 1
    evals, evecs = sla.eigh_tridiagonal(alpha[:m], beta[1:m])
    small = evecs @ (np.exp(-1j * h * evals) * evecs[0, :].conj())
    psi_new = V[:m].T @ small
    if breakdown or m == dim:
        residual = 0.0
    else:
        residual = abs(beta[m - 1] if m < m_max else np.linalg.norm(w)) * abs(small[m - 1])
    return psi_new, residual


def evolve_krylov(H, psi0, grid: TimeGrid, tol: float = 1e-10,
                  max_krylov: int = 30) -> Trajectory:
    """Adaptive short-iterate Lanczos propagation on the output grid.

    Each grid interval is subdivided by halving until the Lanczos
    residual estimate falls below tol; the norm is restored after every
    accepted substep.
    """
    if isinstance(H, SparseOperator):
        mat = H.csr
    elif isinstance(H, DenseOperator):
        mat = H.matrix
    elif sp.issparse(H):
        mat = H.tocsr()
    else:
        mat = np.asarray(H)
    if sp.issparse(mat):
        delta = mat - mat.conj().T
        herm_dev = np.abs(delta.data).max() if delta.nnz else 0.0
        scale = np.abs(mat.data).max() if mat.nnz else 1.0
    else:
        herm_dev = np.abs(mat - mat.conj().T).max()
        scale = np.abs(mat).max() if mat.size else 1.0
    if herm_dev > 1e-12 * max(1.0, scale):
        raise ValueError("evolve_krylov requires a Hermitian operator")

    def matvec(v):
        return mat @ v

    times = grid.times
    psi = normalize(psi0)
    states = np.empty((times.size, psi.size), dtype=np.complex128)
    norm_error = np.zeros(times.size)
    states[0] = psi
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        n_sub = 1
        level = 0
        worst_norm = 0.0
        while True:
            h = dt / n_sub
            candidate = psi
            ok = True
            worst = 0.0
            worst_norm = 0.0
            for _ in range(n_sub):
                candidate, residual = _lanczos_step(matvec, candidate, h, tol, max_krylov)
                worst = max(worst, residual)
                if residual > tol:
                    ok = False
                    break
                norm = np.linalg.norm(candidate)
                worst_norm = max(worst_norm, abs(norm - 1.0))
                candidate = candidate / norm
            if ok:
                break
            level += 1
            n_sub *= 2
            if level > grid.max_subdivisions:
                raise PropagatorError(
                    "Krylov propagation failed to converge",
                    diagnostics={
                        "grid_index": k,
                        "dt": dt,
                        "substeps": n_sub,
                        "last_residual": worst,
                        "tolerance": tol,
                        "krylov_dimension": max_krylov,
                    },
                )
        psi = candidate
        states[k] = psi
        norm_error[k] = worst_norm
    return Trajectory(H, times, states, norm_error)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ObservableSeries:
    times: np.ndarray
    fidelity: np.ndarray
    overlap_other_strings: np.ndarray
    matter_occupation: np.ndarray
    energy: np.ndarray
    norm_error: np.ndarray

    def validate(self, tol: float = 1e-10, energy_scale: float | None = None):
        if np.any(self.fidelity < -tol) or np.any(self.fidelity > 1 + tol):
            raise AssertionError("fidelity outside [0, 1]")
        if np.any(self.overlap_other_strings < -tol):
            raise AssertionError("string overlap negative")
        if np.any(self.fidelity + self.overlap_other_strings > 1 + 1e-10):
            raise AssertionError("fidelity + overlap exceeds 1")
        scale = energy_scale if energy_scale else max(1.0, float(np.max(np.abs(self.energy))))
        if np.max(np.abs(self.energy - self.energy[0])) > 1e-8 * scale:
            raise AssertionError("energy drift exceeds tolerance")
        return self

    def rows(self):
        for k in range(self.times.size):
            yield (
                self.times[k],
                self.fidelity[k],
                self.overlap_other_strings[k],
                self.matter_occupation[k],
                self.energy[k],
                self.norm_error[k],
            )


def matter_diagonal(basis, patch_sites) -> np.ndarray:
    """Per-basis-state matter occupation restricted to the patch.

    U(1): staggered fermion number (particles on even/A plus holes on
    odd/B), zero on the vacuum.  Z2: charged vertices minus the two
    static endpoint charges.
    """
    patch = list(patch_sites)
    if isinstance(basis, MinimalModelBasis):
        lat = basis.lattice
        return np.array(
            [matter_excess(lat, bits, patch) for bits in basis.configs], dtype=float
        )
    if isinstance(basis, SectorBasis):
        lat = basis.lattice
        if basis.model == U1_QLM:
            return np.array(
                [matter_excess(lat, int(bits), patch) for bits in basis.configs],
                dtype=float,
            )
        if basis.model == Z2:
            out = np.zeros(basis.dimension)
            for i in range(basis.dimension):
                cfg = basis.config(i)
                charged = sum(
                    1
                    for s in patch
                    if sum(cfg.link(l) for l, _ in lat.incident_links(s)) % 2
                )
                out[i] = charged - 2
            return out
    raise TypeError(f"unsupported basis type {type(basis).__name__}")


def measure(trajectory: Trajectory, initial: np.ndarray, string_states,
            patch_sites) -> ObservableSeries:
    """Observable series along a trajectory.

    `string_states` are the bare minimal-string configurations excluding
    the initial one (vectors in the same basis).
    """
    states = trajectory.states
    dim = states.shape[1]
    initial = normalize(initial)
    if initial.size != dim:
        raise ValueError("initial state dimension does not match trajectory")
    fid = np.abs(states @ initial.conj()) ** 2
    overlap = np.zeros(states.shape[0])
    for gamma in string_states:
        gamma = np.asarray(gamma, dtype=np.complex128)
        if gamma.size != dim:
            raise ValueError("string state dimension does not match trajectory")
        overlap += np.abs(states @ gamma.conj()) ** 2

    op = trajectory.operator
    basis = getattr(op, "basis", None)
    if basis is None:
        matter = np.zeros(states.shape[0])
    else:
        diag_n = matter_diagonal(basis, patch_sites)
        matter = (np.abs(states) ** 2) @ diag_n

    energy = np.array([np.real(np.vdot(s, op @ s)) for s in states])
    return ObservableSeries(
        times=trajectory.times,
        fidelity=fid,
        overlap_other_strings=overlap,
        matter_occupation=matter,
        energy=energy,
        norm_error=trajectory.norm_error.copy(),
    ).validate()
