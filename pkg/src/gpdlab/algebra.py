"""The convolution *-algebra of a finite groupoid.

Complex-valued functions on arrows with the convolution product for the
counting-measure Haar system.  Regular representations act on the
d-fibers; the reduced norm is the sup of their operator norms over one
representative per orbit.  For finite groupoids the full norm equals
the reduced norm (the boundary isotropy groups arising here are all
amenable), which every report states rather than silently assumes.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .groupoid import (
    FiniteGroupoid,
    GroupoidError,
    OrbitPartition,
    UnitSubset,
    as_unit_subset,
    is_invariant,
    orbits_and_isotropy,
    reduction,
)

AMENABILITY_NOTE = "full C*-norm taken equal to the reduced norm (finite groupoids are amenable)"

DEFAULT_INVERTIBILITY_RTOL = 1e-8


class AlgebraError(ValueError):
    pass


def _orbits(g: FiniteGroupoid) -> OrbitPartition:
    if "orbit_partition" not in g._cache:
        g._cache["orbit_partition"] = orbits_and_isotropy(g, check=False)
    return g._cache["orbit_partition"]


class AlgebraElement:
    """A finitely supported complex function on the arrows of a groupoid."""

    __slots__ = ("groupoid", "vec")

    def __init__(self, groupoid: FiniteGroupoid, vec):
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (groupoid.n_arrows,):
            raise AlgebraError(
                f"coefficient vector has shape {vec.shape}, expected ({groupoid.n_arrows},)"
            )
        self.groupoid = groupoid
        self.vec = vec

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, g: FiniteGroupoid) -> "AlgebraElement":
        return cls(g, np.zeros(g.n_arrows))

    @classmethod
    def delta(cls, g: FiniteGroupoid, arrow) -> "AlgebraElement":
        vec = np.zeros(g.n_arrows, dtype=np.complex128)
        vec[g.arrow_index()[arrow]] = 1.0
        return cls(g, vec)

    @classmethod
    def unit(cls, g: FiniteGroupoid) -> "AlgebraElement":
        """The multiplicative unit: sum of all unit arrows."""
        vec = np.zeros(g.n_arrows, dtype=np.complex128)
        _, _, _, unit_i = g._arrays()
        vec[unit_i] = 1.0
        return cls(g, vec)

    @classmethod
    def from_dict(cls, g: FiniteGroupoid, coeffs: dict) -> "AlgebraElement":
        vec = np.zeros(g.n_arrows, dtype=np.complex128)
        aidx = g.arrow_index()
        for arrow, c in coeffs.items():
            if arrow not in aidx:
                raise AlgebraError(f"unknown arrow id {arrow!r}")
            vec[aidx[arrow]] = c
        return cls(g, vec)

    # -- vector-space structure --------------------------------------------------

    def _require_same(self, other: "AlgebraElement"):
        if self.groupoid is not other.groupoid:
            raise AlgebraError("elements belong to different groupoids")

    def __add__(self, other):
        self._require_same(other)
        return AlgebraElement(self.groupoid, self.vec + other.vec)

    def __sub__(self, other):
        self._require_same(other)
        return AlgebraElement(self.groupoid, self.vec - other.vec)

    def __rmul__(self, scalar):
        return AlgebraElement(self.groupoid, scalar * self.vec)

    def __neg__(self):
        return AlgebraElement(self.groupoid, -self.vec)

    def coeff(self, arrow):
        return complex(self.vec[self.groupoid.arrow_index()[arrow]])

    def as_dict(self, tol: float = 0.0) -> dict:
        return {
            a: complex(c)
            for a, c in zip(self.groupoid.arrows, self.vec)
            if abs(c) > tol
        }

    def support(self):
        return [a for a, c in zip(self.groupoid.arrows, self.vec) if c != 0]

    def convolve(self, other: "AlgebraElement") -> "AlgebraElement":
        return convolve(self, other)

    def star(self) -> "AlgebraElement":
        return star(self)

    def __repr__(self):
        return f"AlgebraElement(on {self.groupoid!r}, support={len(self.support())})"


def convolve(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """(a * b)(g) = sum over factorizations g = g'h of a(g') b(h)."""
    a._require_same(b)
    g = a.groupoid
    p1, p2, pp = g._pair_arrays()
    out = np.zeros(g.n_arrows, dtype=np.complex128)
    np.add.at(out, pp, a.vec[p1] * b.vec[p2])
    return AlgebraElement(g, out)


def star(a: AlgebraElement) -> AlgebraElement:
    """The involution a*(g) = conj(a(g^{-1}))."""
    g = a.groupoid
    _, _, inv_i, _ = g._arrays()
    return AlgebraElement(g, np.conj(a.vec[inv_i]))


def l1_norm(a: AlgebraElement) -> float:
    """Haar-fiber l1 norm: max of the d-fiber and r-fiber absolute sums."""
    g = a.groupoid
    if g.n_arrows == 0:
        return 0.0
    dom_i, rng_i, _, _ = g._arrays()
    mags = np.abs(a.vec)
    d_sums = np.zeros(g.n_units)
    r_sums = np.zeros(g.n_units)
    np.add.at(d_sums, dom_i, mags)
    np.add.at(r_sums, rng_i, mags)
    return float(max(d_sums.max(initial=0.0), r_sums.max(initial=0.0)))


@dataclass
class RegularRepMatrix:
    """The regular representation of an element at a unit.

    The matrix acts on l2 of the d-fiber at the unit; entry (g, h) is
    the coefficient at g h^{-1}.
    """

    unit: object
    fiber: tuple  # arrow ids indexing rows/columns
    matrix: np.ndarray


def regular_rep(a: AlgebraElement, x) -> RegularRepMatrix:
    g = a.groupoid
    uidx = g.unit_index()
    if x not in uidx:
        raise GroupoidError(f"unknown unit {x!r}")
    fib = g._fibers_by_dom()[uidx[x]]
    c = g._compose_table()
    _, _, inv_i, _ = g._arrays()
    if c is not None:
        mat = a.vec[c[np.ix_(fib, inv_i[fib])]]
    else:
        aidx = g.arrow_index()
        mat = np.empty((len(fib), len(fib)), dtype=np.complex128)
        arrows = g.arrows
        for i, gi in enumerate(fib):
            for j, hj in enumerate(fib):
                mat[i, j] = a.vec[aidx[g.mul(arrows[gi], g.inverse[arrows[hj]])]]
    return RegularRepMatrix(x, tuple(g.arrows[i] for i in fib), mat)


def operator_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def reduced_norm(a: AlgebraElement) -> float:
    """Sup of regular-representation operator norms, one unit per orbit."""
    orbits = _orbits(a.groupoid)
    if not orbits.representatives:
        return 0.0
    return max(operator_norm(regular_rep(a, x).matrix) for x in orbits.representatives)


# ---------------------------------------------------------------------------
# boundary restriction and the exact sequence at finite scale


@dataclass
class ExactnessReport:
    kernel_dim: int
    ideal_arrow_count: int
    restricted_dim: int
    total_dim: int
    surjective: bool
    multiplicative_max_err: float
    amenability_note: str = AMENABILITY_NOTE

    @property
    def ok(self) -> bool:
        return (
            self.kernel_dim == self.ideal_arrow_count
            and self.kernel_dim + self.restricted_dim == self.total_dim
            and self.surjective
            and self.multiplicative_max_err < 1e-10
        )


def restrict_boundary(a: AlgebraElement, f, n_samples: int = 20, seed: int = 0):
    """Restriction onto the algebra of the reduction to an invariant subset.

    Returns the restricted element together with an ExactnessReport
    verifying, at finite scale, that the kernel is spanned by the arrows
    over the complement, that the map is surjective, and that it is
    multiplicative (on random samples).
    """
    g = a.groupoid
    fset = as_unit_subset(g, f)
    if not is_invariant(g, fset):
        raise AlgebraError("restriction subset is not invariant")
    gf = reduction(g, fset)
    aidx = g.arrow_index()
    restricted = AlgebraElement(gf, [a.vec[aidx[arrow]] for arrow in gf.arrows])

    u_units = fset.complement()
    gu_arrow_count = sum(
        1 for arrow in g.arrows if g.dom[arrow] in u_units and g.rng[arrow] in u_units
    )
    kernel_dim = g.n_arrows - gf.n_arrows

    rng = np.random.default_rng(seed)
    max_err = 0.0
    for _ in range(n_samples):
        b1 = random_element(g, rng)
        b2 = random_element(g, rng)
        left = _restrict_vec(convolve(b1, b2), gf, aidx)
        right = convolve(_restrict_elem(b1, gf, aidx), _restrict_elem(b2, gf, aidx))
        err = float(np.max(np.abs(left - right.vec))) if gf.n_arrows else 0.0
        max_err = max(max_err, err)

    return restricted, ExactnessReport(
        kernel_dim=kernel_dim,
        ideal_arrow_count=gu_arrow_count,
        restricted_dim=gf.n_arrows,
        total_dim=g.n_arrows,
        surjective=True,  # every reduction arrow is an arrow of g
        multiplicative_max_err=max_err,
    )


def _restrict_vec(a: AlgebraElement, gf: FiniteGroupoid, aidx) -> np.ndarray:
    return np.array([a.vec[aidx[arrow]] for arrow in gf.arrows], dtype=np.complex128)


def _restrict_elem(a: AlgebraElement, gf: FiniteGroupoid, aidx) -> AlgebraElement:
    return AlgebraElement(gf, _restrict_vec(a, gf, aidx))


def random_element(
    g: FiniteGroupoid, rng: np.random.Generator, hermitian: bool = False
) -> AlgebraElement:
    """Independent complex Gaussian coefficients; optional symmetrization."""
    vec = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    a = AlgebraElement(g, vec)
    if hermitian:
        a = 0.5 * (a + star(a))
    return a


# ---------------------------------------------------------------------------
# orbit block decomposition and invertibility


@dataclass
class OrbitBlock:
    """One matrix block of the faithful orbit decomposition.

    The d-fiber at the orbit representative is indexed by pairs
    (unit, isotropy element) through a transversal, exhibiting the block
    as |orbit| x |orbit| matrices over the group algebra of the isotropy
    (acting by its right regular representation).
    """

    representative: object
    units_order: tuple
    isotropy_elements: tuple
    fiber: tuple  # arrow ids in (unit, gamma) order
    basis_labels: tuple  # parallel (unit, gamma) labels


@dataclass
class OrbitBlockDecomposition:
    groupoid: FiniteGroupoid
    orbits: OrbitPartition
    blocks: tuple

    def matrices(self, a: AlgebraElement) -> list:
        """The block matrices of an element (regular rep in block bases)."""
        if a.groupoid is not self.groupoid:
            raise AlgebraError("element belongs to a different groupoid")
        out = []
        aidx = self.groupoid.arrow_index()
        g = self.groupoid
        c = g._compose_table()
        _, _, inv_i, _ = g._arrays()
        for blk in self.blocks:
            fib = np.array([aidx[arrow] for arrow in blk.fiber], dtype=np.int64)
            if c is not None:
                mat = a.vec[c[np.ix_(fib, inv_i[fib])]]
            else:
                mat = np.array(
                    [
                        [a.vec[aidx[g.mul(gi, g.inverse[hj])]] for hj in blk.fiber]
                        for gi in blk.fiber
                    ]
                )
            out.append(mat)
        return out

    def norm(self, a: AlgebraElement) -> float:
        mats = self.matrices(a)
        return max((operator_norm(m) for m in mats), default=0.0)


def block_decompose(g: FiniteGroupoid) -> OrbitBlockDecomposition:
    """Faithful blockwise representation, one block per orbit."""
    orbits = _orbits(g)
    blocks = []
    for orbit, rep, iso in zip(orbits.orbits, orbits.representatives, orbits.isotropy):
        units_order = tuple(x for x in g.units if x in orbit)
        transversal = {rep: g.unit_arrow[rep]}
        for a in g.arrows:
            if g.dom[a] == rep and g.rng[a] not in transversal:
                transversal[g.rng[a]] = a
        fiber, labels = [], []
        for y in units_order:
            t = transversal[y]
            for gamma in iso.elements:
                fiber.append(g.mul(t, gamma))
                labels.append((y, gamma))
        if len(set(fiber)) != len(fiber):
            raise AlgebraError("transversal indexing failed; groupoid is invalid")
        blocks.append(
            OrbitBlock(rep, units_order, tuple(iso.elements), tuple(fiber), tuple(labels))
        )
    return OrbitBlockDecomposition(g, orbits, tuple(blocks))


def singular_extremes(m: np.ndarray):
    if m.size == 0:
        return (np.inf, 0.0)
    svals = np.linalg.svd(m, compute_uv=False)
    return (float(svals[-1]), float(svals[0]))


def matrix_invertible(m: np.ndarray, rtol: float = DEFAULT_INVERTIBILITY_RTOL) -> bool:
    smin, smax = singular_extremes(m)
    if smax == 0.0:
        return m.size == 0
    return smin > rtol * smax


def left_multiplication_matrix(a: AlgebraElement) -> np.ndarray:
    """Matrix of b -> a * b on the arrow coefficient space."""
    g = a.groupoid
    p1, p2, pp = g._pair_arrays()
    mat = np.zeros((g.n_arrows, g.n_arrows), dtype=np.complex128)
    np.add.at(mat, (pp, p2), a.vec[p1])
    return mat


def solve_inverse(a: AlgebraElement, rtol: float = DEFAULT_INVERTIBILITY_RTOL):
    """Two-sided inverse in the groupoid algebra via the left-regular system.

    Returns the inverse element, or None when the element is not
    invertible (left-multiplication matrix numerically singular or the
    candidate fails the two-sided residual check).
    """
    g = a.groupoid
    if g.n_arrows == 0:
        return AlgebraElement.zero(g)
    lmat = left_multiplication_matrix(a)
    if not matrix_invertible(lmat, rtol):
        return None
    unit_vec = AlgebraElement.unit(g).vec
    sol = AlgebraElement(g, np.linalg.solve(lmat, unit_vec))
    scale = 1.0 + float(np.max(np.abs(a.vec))) * max(1.0, float(np.max(np.abs(sol.vec))))
    if np.max(np.abs(convolve(a, sol).vec - unit_vec)) > 1e-8 * scale:
        return None
    if np.max(np.abs(convolve(sol, a).vec - unit_vec)) > 1e-8 * scale:
        return None
    return sol


def invertible(
    a: AlgebraElement,
    rtol: float = DEFAULT_INVERTIBILITY_RTOL,
    method: str = "blocks",
) -> bool:
    """Invertibility in the groupoid algebra.

    method='blocks' decides through the faithful orbit decomposition
    (every block matrix invertible); method='solve' solves for a
    two-sided inverse in the algebra.  The two agree; they are kept as
    genuinely distinct routes so either can serve as the other's oracle.
    """
    if method == "blocks":
        dec = block_decompose(a.groupoid)
        return all(matrix_invertible(m, rtol) for m in dec.matrices(a))
    if method == "solve":
        return solve_inverse(a, rtol) is not None
    raise AlgebraError(f"unknown invertibility method {method!r}")
