"""Free scalar field with classical sources: modes, creation, probes.

The quadratic source J2 dresses the mode operator K = -dxx + m^2 + 2 J2;
its eigenfunctions psi_l with eigenvalues omega_l^2 define the particle
modes.  A linear source J1 populates them coherently, so vacuum
persistence and per-mode statistics follow from the overlaps
Jt(omega_l, l) = int dt dx psi_l(x) exp(+i omega_l t) J1(t, x).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import (DimensionMismatch, GridTooLarge, InfeasibleNulling,
                     UnstableVacuum, ValidationError)
from .potentials import Grid

ORTHONORMALITY_TOL = 1e-8
FEWBODY_BUDGET = 256 ** 2  # dense/sparse dimension cap: 2 particles x 256 points


@dataclass
class ModeBasis:
    omegas: np.ndarray          # ascending; bound modes first
    psis: np.ndarray            # rows, normalized so int psi^2 dx = 1
    n_bound: int
    m: float
    j2: np.ndarray
    grid: Grid

    def overlap_matrix(self):
        dx = self.grid.dx
        return self.psis @ self.psis.T * dx

    def check_orthonormality(self, tol=ORTHONORMALITY_TOL):
        g = self.overlap_matrix()
        return float(np.max(np.abs(g - np.eye(len(self.omegas))))) <= tol


def mode_decomposition(j2, m, grid: Grid, n_continuum=0):
    """Bound plus box-discretized continuum modes of -dxx + m^2 + 2 J2.

    Hard walls at the grid edges quantize the continuum; bound modes are
    those with omega < m.  n_continuum=None keeps every lattice mode.
    The vacuum must be stable: m^2 + 2 J2 > 0 everywhere and every
    omega^2 > 0.
    """
    if m <= 0:
        raise ValidationError("need m > 0")
    j2 = np.asarray(j2, dtype=float)
    if j2.shape != grid.x.shape:
        raise DimensionMismatch("J2 shape does not match the grid")
    w2 = m * m + 2.0 * j2
    if np.min(w2) <= 0.0:
        raise UnstableVacuum(f"m^2 + 2 J2 reaches {np.min(w2)}")
    dx = grid.dx
    diag = 2.0 / dx ** 2 + w2[1:-1]
    off = -np.ones(len(diag) - 1) / dx ** 2
    evals = eigvalsh_tridiagonal(diag, off)
    n_bound = int(np.sum(evals < m * m * (1.0 - 1e-12)))
    if n_continuum is None:
        n_keep = len(diag)
    else:
        n_keep = n_bound + int(n_continuum)
    if n_keep == 0:
        raise ValidationError("no modes requested: n_continuum = 0 and no bound modes")
    if n_keep > len(diag):
        raise ValidationError("more modes requested than grid supports")
    w2_modes, vecs = eigh_tridiagonal(diag, off, select="i",
                                      select_range=(0, n_keep - 1))
    if w2_modes[0] <= 0.0:
        raise UnstableVacuum(f"mode with omega^2 = {w2_modes[0]}")
    psis = np.zeros((n_keep, grid.n))
    psis[:, 1:-1] = (vecs / np.sqrt(dx)).T
    # sign convention: positive at the largest-magnitude sample
    for row in psis:
        k = np.argmax(np.abs(row))
        if row[k] < 0:
            row *= -1.0
    return ModeBasis(np.sqrt(w2_modes), psis, n_bound, float(m), j2, grid)


@dataclass
class SourceHistory:
    """J1 sampled on a spacetime grid: values[i_t, i_x]."""
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != len(self.t):
            raise DimensionMismatch("time axis mismatch")


def source_overlap(j1: SourceHistory, basis: ModeBasis):
    """Jt(omega_l, l): space quadrature first, then the e^{+i omega t} one."""
    if j1.values.shape[1] != basis.grid.n:
        raise DimensionMismatch("space axis mismatch")
    spatial = np.trapezoid(j1.values[:, None, :] * basis.psis[None, :, :],
                           x=basis.grid.x, axis=2)       # (nt, n_modes)
    phases = np.exp(1j * np.outer(j1.t, basis.omegas))   # (nt, n_modes)
    return np.trapezoid(phases * spatial, x=j1.t, axis=0)


@dataclass
class CreationReport:
    nbar: np.ndarray
    p0: float
    pk: np.ndarray
    poisson_table: np.ndarray   # (n_modes, n_max+1)
    poisson_consistent: bool

    def table_normalization(self):
        return self.poisson_table.sum(axis=1)


def creation_probabilities(overlaps, basis: ModeBasis, poisson_consistent=False,
                           n_max=30):
    """Vacuum persistence and per-mode creation statistics.

    nbar_l = |Jt_l|^2/(2 omega_l), P(0) = exp(-sum nbar).  The printed
    one-particle formula is P(k) = |Jt_k|^2 P(0), which is not the n = 1
    Poisson entry; poisson_consistent=True divides by 2 omega_k so that
    it is.  Both are kept because the source text is self-inconsistent.
    """
    overlaps = np.asarray(overlaps, dtype=complex)
    if overlaps.shape != basis.omegas.shape:
        raise DimensionMismatch("one overlap per mode required")
    nbar = np.abs(overlaps) ** 2 / (2.0 * basis.omegas)
    p0 = float(np.exp(-np.sum(nbar)))
    if poisson_consistent:
        pk = nbar * p0
    else:
        pk = np.abs(overlaps) ** 2 * p0
    ns = np.arange(n_max + 1)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, n_max + 1))]))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_nbar = np.where(nbar > 0, np.log(np.where(nbar > 0, nbar, 1.0)), -np.inf)
        # 0 * -inf rows are rewritten below, so the nan is harmless
        log_p = -nbar[:, None] + ns[None, :] * log_nbar[:, None] - log_fact[None, :]
    table = np.exp(log_p)
    table[nbar == 0] = 0.0
    table[nbar == 0, 0] = 1.0
    return CreationReport(nbar, p0, pk, table, poisson_consistent)


@dataclass
class SourceProfile:
    h: np.ndarray
    grid: Grid
    normalized: bool = False

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        if self.h.shape != self.grid.x.shape:
            raise DimensionMismatch("profile shape mismatch")
        edge = max(abs(self.h[0]), abs(self.h[-1]))
        if edge > 1e-10 * max(1.0, np.max(np.abs(self.h))):
            raise ValidationError("profile must be supported inside the grid")
        if self.normalized:
            norm = np.trapezoid(self.h ** 2, self.grid.x)
            if abs(norm - 1.0) > 1e-8:
                raise ValidationError("normalized flag set but int h^2 != 1")


def rabi_frequency(g, h: SourceProfile, basis: ModeBasis, target=0):
    """Omega = g int h psi_target dx / sqrt(2 omega_target)."""
    if not 0 <= target < basis.n_bound:
        raise ValidationError("target must be a bound mode")
    overlap = np.trapezoid(h.h * basis.psis[target], basis.grid.x)
    return g * overlap / np.sqrt(2.0 * basis.omegas[target])


def design_source_profile(basis: ModeBasis, target, nulled):
    """Profile maximizing the target matrix element with nulled modes at zero.

    h starts as psi_target and loses its components along the nulled
    modes (Gram-Schmidt on the discrete inner product), then renormalizes.
    """
    nulled = list(nulled)
    if target in nulled:
        raise InfeasibleNulling("target mode is in the nulled set")
    dx = basis.grid.dx
    h = basis.psis[target].copy()
    if nulled:
        block = basis.psis[nulled]
        q, _ = np.linalg.qr(block.T * np.sqrt(dx))
        h = h - (q @ (q.T @ (h * np.sqrt(dx)))) / np.sqrt(dx)
    norm2 = np.trapezoid(h ** 2, basis.grid.x)
    if norm2 < 1e-16:
        raise InfeasibleNulling("target lies in the span of the nulled modes")
    return SourceProfile(h / np.sqrt(norm2), basis.grid, normalized=True)


def _attractive_kernel(r, m):
    """int_0^1 dy exp(-m r/sqrt(y(1-y)))/sqrt(y(1-y)), via y = sin^2 u.

    The substitution removes the endpoint singularities: the integral
    becomes int_0^pi exp(-2 m r/sin v) dv, smooth on (0, pi).
    """
    r = float(r)
    if r == 0.0:
        return np.pi
    val, err = quad(lambda v: np.exp(-2.0 * m * r / np.sin(v)), 0.0, np.pi,
                    limit=200)
    return val


def effective_potential(r, m, lam):
    """Nonrelativistic pair potential: (contact strength, attractive V(r))."""
    if m <= 0:
        raise ValidationError("need m > 0")
    contact = (lam / (4.0 * m ** 2)) * (1.0 + lam / (4.0 * np.pi * m ** 2))
    rs = np.asarray(r, dtype=float)
    if np.any(rs < 0):
        raise ValidationError("need r >= 0")
    pref = -lam ** 2 / (32.0 * np.pi * m ** 3)
    if rs.ndim == 0:
        return contact, pref * _attractive_kernel(float(rs), m)
    return contact, pref * np.array([_attractive_kernel(ri, m) for ri in rs])


@dataclass
class FewBodyHamiltonian:
    matrix: object              # scipy sparse
    n_particles: int
    grid: Grid
    m: float
    lam: float
    include_relativistic: bool

    def lowest_eigenvalues(self, k=4):
        dim = self.matrix.shape[0]
        if dim <= 1200:
            w = np.linalg.eigvalsh(self.matrix.toarray())
            return w[:k]
        return np.sort(eigsh(self.matrix, k=k, which="SA",
                             return_eigenvectors=False))


def nr_hamiltonian_terms(grid: Grid, j2, m, lam, n_particles=1,
                         include_relativistic=False, budget=FEWBODY_BUDGET):
    """Few-body nonrelativistic Hamiltonian on the grid (Dirichlet walls).

    Per particle: p^2/2m (optionally - p^4/8m^3) + J2(x)/m.  Pairs get the
    contact term (a discrete delta of weight contact/dx) plus the
    attractive exchange tail.
    """
    if n_particles not in (1, 2, 3):
        raise ValidationError("1 to 3 particles")
    j2 = np.asarray(j2, dtype=float)
    if j2.shape != grid.x.shape:
        raise DimensionMismatch("J2 shape mismatch")
    n = grid.n - 2                      # interior points
    if n ** n_particles > budget:
        raise GridTooLarge(f"{n}^{n_particles} exceeds budget {budget}")
    dx = grid.dx
    x_in = grid.x[1:-1]
    k2 = sp.diags([np.full(n, 2.0 / dx ** 2),
                   np.full(n - 1, -1.0 / dx ** 2),
                   np.full(n - 1, -1.0 / dx ** 2)], [0, 1, -1], format="csr")
    t1 = k2 / (2.0 * m)
    if include_relativistic:
        t1 = t1 - (k2 @ k2) / (8.0 * m ** 3)
    v1 = sp.diags(j2[1:-1] / m)
    h1 = (t1 + v1).tocsr()
    if n_particles == 1:
        return FewBodyHamiltonian(h1, 1, grid, m, lam, include_relativistic)

    eye = sp.identity(n, format="csr")
    def lift(op, slot):
        mats = [eye] * n_particles
        mats[slot] = op
        out = mats[0]
        for mm in mats[1:]:
            out = sp.kron(out, mm, format="csr")
        return out

    h = sum(lift(h1, i) for i in range(n_particles))
    contact, _ = effective_potential(0.0, m, lam)
    # pair interaction sampled on the relative coordinate
    rvals = np.arange(n) * dx
    _, attr = effective_potential(rvals, m, lam)
    for i in range(n_particles):
        for j in range(i + 1, n_particles):
            idx = np.indices([n] * n_particles).reshape(n_particles, -1)
            sep = np.abs(idx[i] - idx[j])
            w = attr[sep]
            w = w + np.where(sep == 0, contact / dx, 0.0)
            h = h + sp.diags(w, format="csr")
    return FewBodyHamiltonian(h.tocsr(), n_particles, grid, m, lam,
                              include_relativistic)


@dataclass
class ProbeReport:
    mean: float
    variance: float
    shift: float
    a_matrix: np.ndarray   # normal-ordered a†a coefficients
    b_matrix: np.ndarray   # a†a† coefficients
    spacing: float


def local_energy_probe(f, basis: ModeBasis, a=None):
    """Windowed energy H_f = sum_x a f(x) H(x) in the free-mode vacuum.

    Quadratic-form bookkeeping on the lattice: with K the dressed mode
    operator and F = diag(f), the momentum form is Q = a F and the field
    form is P = a (F K + K F)/2.  In mode space,

        A_lm = (Pt_lm/sqrt(w_l w_m) + sqrt(w_l w_m) Qt_lm)/2
        B_lm = (Pt_lm/sqrt(w_l w_m) - sqrt(w_l w_m) Qt_lm)/4

    give mean = sum_l A_ll/2, variance = 2 sum |B|^2, and the one-bound-
    particle shift A_00.  f identically 1 recovers H itself: zero
    variance and shift omega_0.
    """
    grid = basis.grid
    if a is None:
        a = grid.dx
    if abs(a - grid.dx) > 1e-12 * grid.dx:
        raise ValidationError("probe spacing must match the basis lattice")
    fvals = np.asarray(f(grid.x) if callable(f) else f, dtype=float)
    if fvals.shape != grid.x.shape:
        raise DimensionMismatch("envelope shape mismatch")
    dx = grid.dx
    n = grid.n - 2
    w2 = basis.m ** 2 + 2.0 * basis.j2
    k2 = sp.diags([2.0 / dx ** 2 + w2[1:-1],
                   np.full(n - 1, -1.0 / dx ** 2),
                   np.full(n - 1, -1.0 / dx ** 2)], [0, 1, -1], format="csr")
    fd = sp.diags(fvals[1:-1])
    p_form = ((fd @ k2 + k2 @ fd) / 2.0).tocsr()
    # sum_x a f H(x) is the lattice quadrature of the continuum forms, so
    # with l2-orthonormal mode columns no spacing factors survive
    v = basis.psis[:, 1:-1].T * np.sqrt(dx)
    pt = v.T @ (p_form @ v)
    qt = v.T @ (fd @ v)
    sw = np.sqrt(basis.omegas)
    inv = 1.0 / (sw[:, None] * sw[None, :])
    out = sw[:, None] * sw[None, :]
    a_mat = 0.5 * (pt * inv + out * qt)
    b_mat = 0.25 * (pt * inv - out * qt)
    mean = float(0.5 * np.trace(a_mat))
    variance = float(2.0 * np.sum(b_mat ** 2))
    shift = float(a_mat[0, 0])
    return ProbeReport(mean, variance, shift, a_mat, b_mat, float(a))
