"""Spectrum of K per Z4 parity sector in a truncated Fock basis.

tau acts on |n> (x) v as i^n |n> (x) sigma_x v.  Within the sector of parity s
the basis is |n> (x) (1, lam_n)/sqrt(2) with lam_n = s (-i)^n, so n is even for
s = +-1 and odd for s = +-i.  In that basis sigma_x is diagonal (eigenvalue
lam_n) and sigma_z maps lam -> -lam, which is why (a^dag)^2 + a^2 couples n to
n + 2 with the spin label flipped.  Each sector is therefore a real symmetric
tridiagonal matrix

    d_k = 2 x n_k + mu lam_{n_k},   e_k = sqrt((n_k + 1)(n_k + 2)).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .model import SECTOR_ORDER, ModelParams, Parity, chi_from_energy, nearest_quarter
from .tridiag import EigensolverError, count_below, eigenvalue, ql_eigenvalues, smallest_eigenvalues

log = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 240
CONVERGENCE_STEP = 40
CONVERGENCE_TOL = 1e-9
DEFAULT_REFINE_TOL = 1e-10
CLASSIFY_TOL = 1e-4


@dataclass(frozen=True)
class SectorBasis:
    s: Parity
    indices: np.ndarray
    spins: np.ndarray

    @classmethod
    def build(cls, s: Parity, N: int) -> "SectorBasis":
        start = 0 if s.is_even else 1
        n = np.arange(start, N + 1, 2)
        lam = np.array([(complex(s.value) * (-1j) ** int(k)).real for k in n])
        return cls(s, n, np.rint(lam).astype(int))


@dataclass(frozen=True)
class SectorMatrix:
    s: Parity
    diag: np.ndarray
    offdiag: np.ndarray
    truncation: int

    @property
    def dim(self) -> int:
        return self.diag.shape[0]


def build_sector_matrix(m: ModelParams, s: Parity, N: int) -> SectorMatrix:
    if N < 2:
        raise ValueError(f"truncation must be >= 2, got {N}")
    basis = SectorBasis.build(s, N)
    n = basis.indices.astype(float)
    diag = 2 * float(m.x) * n + float(m.mu) * basis.spins
    offdiag = np.sqrt((n[:-1] + 1) * (n[:-1] + 2))
    return SectorMatrix(s, diag, offdiag, N)


def sector_eigenvalues(M: SectorMatrix, k: int, method: str = "bisection") -> np.ndarray:
    if k > M.dim:
        raise ValueError(f"asked for {k} eigenvalues of a {M.dim}x{M.dim} matrix")
    if method == "bisection":
        return smallest_eigenvalues(M.diag, M.offdiag, k)
    if method == "ql":
        return ql_eigenvalues(M.diag, M.offdiag, k)
    raise ValueError(f"unknown method {method!r}")


def sector_level(m: ModelParams, s: Parity, N: int, index: int) -> float:
    M = build_sector_matrix(m, s, N)
    return eigenvalue(M.diag, M.offdiag, index)


@dataclass
class SpectrumTable:
    """Lowest k levels of every sector over a kappa grid.

    ``energies[s]`` has shape (len(grid), k); a failed grid point is a row of
    NaN with the reason in ``status``.
    """

    mu: float
    grid: np.ndarray
    k: int
    truncation: int
    energies: dict = field(default_factory=dict)
    converged: dict = field(default_factory=dict)
    status: list = field(default_factory=list)

    def chi(self, s: Parity) -> np.ndarray:
        kap = self.grid[:, None]
        return 1 + (self.energies[s] + kap) / (2 * (1 / kap - kap))

    def all_levels(self, i: int) -> list:
        """(energy, sector) pairs at grid index i, sorted by energy."""
        out = [(float(E), s) for s in SECTOR_ORDER for E in self.energies[s][i]]
        return sorted(out, key=lambda t: t[0])


def scan_spectrum(mu, grid, k=12, N=DEFAULT_TRUNCATION, check=True) -> SpectrumTable:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if np.any(grid <= 0) or np.any(grid >= 1):
        raise ValueError("grid must lie inside (0, 1)")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    table = SpectrumTable(mu=float(mu), grid=grid, k=k, truncation=N)
    for s in SECTOR_ORDER:
        table.energies[s] = np.full((grid.size, k), np.nan)
        table.converged[s] = np.zeros((grid.size, k), dtype=bool)
    table.status = ["ok"] * grid.size
    for i, kappa in enumerate(grid):
        m = ModelParams(kappa, mu)
        try:
            for s in SECTOR_ORDER:
                E = sector_eigenvalues(build_sector_matrix(m, s, N), k)
                table.energies[s][i] = E
                if check:
                    E2 = sector_eigenvalues(build_sector_matrix(m, s, N + CONVERGENCE_STEP), k)
                    table.converged[s][i] = np.abs(E2 - E) <= CONVERGENCE_TOL * np.maximum(1.0, np.abs(E))
                else:
                    table.converged[s][i] = True
        except EigensolverError as exc:
            log.warning("kappa=%r: %s", kappa, exc)
            table.status[i] = f"failed: {exc}"
            for s in SECTOR_ORDER:
                table.energies[s][i] = np.nan
            continue
        if check and not all(table.converged[s][i].all() for s in SECTOR_ORDER):
            table.status[i] = "unconverged"
    return table


class Family(str, enum.Enum):
    JUDDIAN = "juddian"
    TRANSCENDENTAL = "transcendental"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class CrossingRecord:
    kappa_star: float
    E_star: float
    chi_star: float
    parity_pair: tuple
    family: Family
    index: int | None
    levels: tuple = ()
    touching: bool = False
    refinement_tol: float = DEFAULT_REFINE_TOL
    diagnostics: str = ""

    @property
    def is_cross(self) -> bool:
        """One even and one odd sector, the signature of the transcendental family."""
        r, s = self.parity_pair
        return r.is_even != s.is_even


def classify(chi: float, tol: float = CLASSIFY_TOL):
    m, dist = nearest_quarter(chi)
    if dist >= tol:
        return Family.UNCLASSIFIED, None
    if m % 2 == 0:
        return Family.JUDDIAN, m // 2
    return Family.TRANSCENDENTAL, (m - 3) // 2


def _pair_key(r: Parity, s: Parity):
    order = {p: i for i, p in enumerate(SECTOR_ORDER)}
    return (r, s) if order[r] < order[s] else (s, r)


class _LevelGap:
    """Gap E_i^(r)(kappa) - E_j^(s)(kappa) evaluated from scratch at each kappa."""

    def __init__(self, mu, N, r, i, s, j):
        self.mu, self.N = mu, N
        self.r, self.i, self.s, self.j = r, i, s, j

    def levels(self, kappa):
        m = ModelParams(kappa, self.mu)
        return sector_level(m, self.r, self.N, self.i), sector_level(m, self.s, self.N, self.j)

    def __call__(self, kappa):
        a, b = self.levels(kappa)
        return a - b


def _bisect_sign(f, a, b, fa, tol):
    while b - a > tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def _local_min(f, a, b, tol, h=1e-6):
    """Minimiser of a smooth f on [a, b] by bisection on a central-difference slope."""
    def slope(x):
        return f(x + h) - f(x - h)
    sa = slope(a)
    sb = slope(b)
    if (sa > 0) == (sb > 0):
        return a if f(a) < f(b) else b
    while b - a > tol:
        c = 0.5 * (a + b)
        if (slope(c) > 0) == (sa > 0):
            a = c
        else:
            b = c
    return 0.5 * (a + b)


def _record(gap, kappa, refine_tol, touching=False, diagnostics=""):
    Ea, Eb = gap.levels(kappa)
    E = 0.5 * (Ea + Eb)
    chi = float(chi_from_energy(E, ModelParams(kappa, gap.mu)))
    fam, idx = classify(chi)
    if abs(Ea - Eb) > 1e-6 * max(1.0, abs(E)):
        fam, idx = Family.UNCLASSIFIED, None
        diagnostics = (diagnostics + f" residual gap {Ea - Eb:.3g} after refinement").strip()
    return CrossingRecord(
        kappa_star=float(kappa),
        E_star=float(E),
        chi_star=chi,
        parity_pair=_pair_key(gap.r, gap.s),
        family=fam,
        index=idx,
        levels=(gap.i, gap.j) if _pair_key(gap.r, gap.s)[0] == gap.r else (gap.j, gap.i),
        touching=touching,
        refinement_tol=refine_tol,
        diagnostics=diagnostics,
    )


def find_crossings(t: SpectrumTable, refine_tol=DEFAULT_REFINE_TOL, touch_tol=1e-8, subdivide=8):
    """Level crossings between curves of different sectors.

    Sign changes of the gap between two curves are bracketed on the grid and
    refined by bisection in kappa.  Grid minima of |gap| without a sign change
    are subdivided: either a hidden pair of sign changes turns up, or the
    minimum is refined and kept as a touching point when the gap closes to
    ``touch_tol``.
    """
    if t.grid.size < 2:
        raise ValueError("crossing search needs at least two grid points")
    grid = t.grid
    records = []
    for a in range(4):
        for b in range(a + 1, 4):
            r, s = SECTOR_ORDER[a], SECTOR_ORDER[b]
            Er, Es = t.energies[r], t.energies[s]
            for i in range(t.k):
                for j in range(t.k):
                    diff = Er[:, i] - Es[:, j]
                    records.extend(_pair_crossings(t, grid, diff, r, i, s, j, refine_tol, touch_tol, subdivide))
    records.sort(key=lambda c: (c.kappa_star, c.E_star))
    return records


def _pair_crossings(t, grid, diff, r, i, s, j, refine_tol, touch_tol, subdivide):
    out = []
    gap = _LevelGap(t.mu, t.truncation, r, i, s, j)
    finite = np.isfinite(diff)
    for q in range(grid.size - 1):
        if not (finite[q] and finite[q + 1]):
            continue
        d0, d1 = diff[q], diff[q + 1]
        if d0 == 0.0:
            out.append(_record(gap, grid[q], refine_tol))
            continue
        if (d0 > 0) != (d1 > 0) and d1 != 0.0:
            kap = _bisect_sign(gap, grid[q], grid[q + 1], d0, refine_tol)
            rec = _record(gap, kap, refine_tol)
            if rec.family is Family.UNCLASSIFIED and not rec.diagnostics:
                rec = CrossingRecord(**{**rec.__dict__, "diagnostics": "chi off the m/4 lattice"})
            out.append(rec)
    # touching points and hidden close pairs around interior minima of |gap|
    ad = np.abs(diff)
    for q in range(1, grid.size - 1):
        if not (finite[q - 1] and finite[q] and finite[q + 1]):
            continue
        if not (ad[q] < ad[q - 1] and ad[q] <= ad[q + 1]):
            continue
        if (diff[q - 1] > 0) != (diff[q] > 0) or (diff[q] > 0) != (diff[q + 1] > 0):
            continue
        # parabola through the three samples: only pursue if it dips to ~0
        x0, x1, x2 = grid[q - 1], grid[q], grid[q + 1]
        y0, y1, y2 = diff[q - 1], diff[q], diff[q + 1]
        denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
        A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
        B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
        C = y1 - A * x1 * x1 - B * x1
        if A == 0:
            continue
        xv = -B / (2 * A)
        yv = C - B * B / (4 * A)
        if not (x0 < xv < x2) or abs(yv) > 0.05 * ad[q]:
            continue
        sub = np.linspace(x0, x2, 2 * subdivide + 1)
        vals = np.array([gap(x) for x in sub])
        found = False
        for p in range(sub.size - 1):
            if (vals[p] > 0) != (vals[p + 1] > 0):
                kap = _bisect_sign(gap, sub[p], sub[p + 1], vals[p], refine_tol)
                out.append(_record(gap, kap, refine_tol, diagnostics="found by subdivision"))
                found = True
        if found:
            continue
        sgn = 1.0 if diff[q] > 0 else -1.0
        kap = _local_min(lambda x: sgn * gap(x), x0, x2, refine_tol)
        Ea, Eb = gap.levels(kap)
        if abs(Ea - Eb) <= touch_tol * max(1.0, abs(Ea)):
            out.append(_record(gap, kap, refine_tol, touching=True, diagnostics="touching, no sign change"))
    return out


def degeneracy_window_count(m: ModelParams, E_star: float, N: int, tol: float) -> int:
    """Eigenvalues of all four sectors inside (E* - tol, E* + tol)."""
    total = 0
    for s in SECTOR_ORDER:
        M = build_sector_matrix(m, s, N)
        total += count_below(M.diag, M.offdiag, E_star + tol) - count_below(M.diag, M.offdiag, E_star - tol)
    return total
