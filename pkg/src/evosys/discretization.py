"""Truncated-box grids and the spatially discretized operator.

The box [-L, L]^d stands in for the balls of the exhaustion construction;
second derivatives use central differences (cross terms the 4-point
stencil), first derivatives central differences or drift-sign upwinding.
With upwinding and nonnegative off-diagonal coupling every off-diagonal
matrix entry is nonnegative, which is what discrete positivity and the
discrete comparison principle hang on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from evosys.coefficients import CoefficientModel
from evosys.util import collar_width

SYM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDomain:
    d: int
    L: float
    N: int
    bc: str  # "dirichlet" | "neumann"

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only d in {1, 2} is supported")
        if self.N < 3:
            raise ValueError("N must be at least 3")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def coords(self) -> np.ndarray:
        # centered form keeps 0 exactly on the grid for odd N
        return (np.arange(self.N) - (self.N - 1) / 2.0) * self.dx

    @property
    def npts(self) -> int:
        return self.N**self.d

    @property
    def points(self) -> np.ndarray:
        c = self.coords
        if self.d == 1:
            return c[:, None]
        X, Y = np.meshgrid(c, c, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=1)

    def n_unknowns(self, m: int) -> int:
        return m * self.npts

    def flat_index(self, k: int, multi) -> int:
        multi = np.atleast_1d(multi)
        if self.d == 1:
            p = int(multi[0])
        else:
            p = int(multi[0]) * self.N + int(multi[1])
        return k * self.npts + p

    def unflatten(self, flat: int):
        k, p = divmod(int(flat), self.npts)
        if self.d == 1:
            return k, (p,)
        return k, divmod(p, self.N)

    def boundary_mask(self) -> np.ndarray:
        """True at points on the box boundary."""
        c = np.abs(self.points)
        return np.any(c >= self.L - 1e-12 * max(self.L, 1.0), axis=1)

    def inner_mask(self, collar: float | None = None) -> np.ndarray:
        """True on the inner window, a collar away from the boundary."""
        w = collar if collar is not None else collar_width(self.L, self.dx)
        return np.all(np.abs(self.points) <= self.L - w + 1e-12, axis=1)

    def window_mask(self, half_width: float) -> np.ndarray:
        return np.all(np.abs(self.points) <= half_width + 1e-12, axis=1)

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def cell_volumes(self) -> np.ndarray:
        """Trapezoid cell volumes (half cells at the faces)."""
        w = np.full(self.N, self.dx)
        w[0] = w[-1] = self.dx / 2.0
        if self.d == 1:
            return w
        return np.outer(w, w).ravel()


def build_grid(d: int, L: float, N: int, bc: str) -> DiscreteDomain:
    return DiscreteDomain(d=d, L=float(L), N=int(N), bc=bc)


@dataclass(frozen=True)
class DiscreteGenerator:
    matrix: sp.csr_matrix
    t: float
    dom: DiscreteDomain
    m: int
    upwind: bool

    @property
    def shape(self):
        return self.matrix.shape


def default_upwind(model: CoefficientModel) -> bool:
    """Upwinding on for polynomial models with superlinear drift, off otherwise."""
    if model.poly is not None:
        return float(np.max(model.poly.ell_exp)) > 0.0
    return False


def assemble_generator(
    model: CoefficientModel,
    dom: DiscreteDomain,
    t: float,
    upwind: Optional[bool] = None,
) -> DiscreteGenerator:
    """Assemble the sparse block operator at time t.

    Dirichlet rows at boundary points are identically zero, so boundary
    values just persist through time stepping (they are zeroed in the
    initial data); Neumann uses mirror ghost points, which also kills the
    drift term at the boundary node.
    """
    if model.d != dom.d:
        raise ValueError("model dimension does not match the domain")
    if upwind is None:
        upwind = default_upwind(model)
    N, d, m = dom.N, dom.d, model.m
    npts = dom.npts
    pts = dom.points
    dx = dom.dx
    neumann = dom.bc == "neumann"

    rows, cols, vals = [], [], []

    def refl(i: int) -> int:
        if i < 0:
            return -i
        if i >= N:
            return 2 * (N - 1) - i
        return i

    def onboard(multi) -> bool:
        return any(i == 0 or i == N - 1 for i in multi)

    for k in range(m):
        Q = np.empty((npts, d, d))
        B = np.empty((npts, d))
        for p in range(npts):
            x = pts[p]
            Qp = np.asarray(model.diffusion(k, t, x), dtype=float)
            if np.max(np.abs(Qp - Qp.T)) > SYM_TOL:
                raise ValueError(f"non-symmetric diffusion sample for component {k} at x={x}")
            Q[p] = Qp
            B[p] = np.asarray(model.drift(k, t, x), dtype=float)

        base = k * npts

        def add(p, pn, v):
            rows.append(base + p)
            cols.append(base + pn)
            vals.append(v)

        for p in range(npts):
            multi = (p,) if d == 1 else divmod(p, N)
            bdry = onboard(multi)
            if bdry and not neumann:
                continue  # Dirichlet: zero row

            def nb(shift) -> int:
                idx = [refl(multi[a] + shift[a]) for a in range(d)]
                return idx[0] if d == 1 else idx[0] * N + idx[1]

            # diagonal second derivatives, axis by axis
            for a in range(d):
                q = Q[p, a, a]
                sp_ = [0] * d
                sp_[a] = 1
                sm = [0] * d
                sm[a] = -1
                add(p, nb(sp_), q / dx**2)
                add(p, nb(sm), q / dx**2)
                add(p, p, -2.0 * q / dx**2)
                # drift along axis a
                b = B[p, a]
                at_face = multi[a] in (0, N - 1)
                if at_face:
                    continue  # mirror ghost: derivative vanishes at the node
                if upwind:
                    if b >= 0:
                        add(p, nb(sp_), b / dx)
                        add(p, p, -b / dx)
                    else:
                        add(p, p, b / dx)
                        add(p, nb(sm), -b / dx)
                else:
                    add(p, nb(sp_), b / (2.0 * dx))
                    add(p, nb(sm), -b / (2.0 * dx))
            # cross term (d = 2 only): 2 q_xy D_xy via the 4-point stencil
            if d == 2 and Q[p, 0, 1] != 0.0:
                c = 2.0 * Q[p, 0, 1] / (4.0 * dx**2)
                add(p, nb((+1, +1)), c)
                add(p, nb((-1, -1)), c)
                add(p, nb((+1, -1)), -c)
                add(p, nb((-1, +1)), -c)

    # coupling blocks: diagonal in space
    for p in range(npts):
        multi = (p,) if d == 1 else divmod(p, N)
        if onboard(multi) and not neumann:
            continue
        C = np.asarray(model.coupling(t, pts[p]), dtype=float)
        for a in range(m):
            for b in range(m):
                if C[a, b] != 0.0:
                    rows.append(a * npts + p)
                    cols.append(b * npts + p)
                    vals.append(C[a, b])

    n = m * npts
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return DiscreteGenerator(matrix=mat, t=float(t), dom=dom, m=m, upwind=bool(upwind))


def apply_generator(gen: DiscreteGenerator, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (gen.shape[0],):
        raise ValueError(f"state has shape {values.shape}, generator expects ({gen.shape[0]},)")
    return gen.matrix @ values


def min_offdiagonal(gen: DiscreteGenerator) -> float:
    """Smallest off-diagonal entry; >= -1e-14 is the M-matrix sign pattern."""
    coo = gen.matrix.tocoo()
    mask = coo.row != coo.col
    if not mask.any():
        return 0.0
    return float(np.min(coo.data[mask]))
