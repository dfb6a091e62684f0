"""Finite groupoids as explicit structure tables.

A finite groupoid is a small category in which every morphism is
invertible.  We store one as explicit tables over opaque unit and arrow
ids: domain, range, unit arrows, inverse, and a partial composition map
defined exactly on composable pairs.  The topology is discrete, so
"open subset" means arbitrary unit subset and every topological
hypothesis of the continuum picture is checkable.

All operations are pure functions; instances are treated as immutable
after construction (internal caches are derived data only).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping

import numpy as np

UnitId = Hashable
ArrowId = Hashable

# Composition is kept as a sparse map (dict); a dense index table is
# derived for vectorised work while n_arrows stays at desk scale.
DENSE_ARROW_LIMIT = 2048

MAX_WITNESSES_PER_AXIOM = 5


class GroupoidError(ValueError):
    """Malformed groupoid tables or invalid arguments."""


class FiniteGroupoid:
    """A finite groupoid given by its five structural maps.

    Parameters
    ----------
    units, arrows : iterables of hashable ids (order is preserved and
        used for all deterministic outputs).
    dom, rng : mapping arrow id -> unit id.
    unit_arrow : mapping unit id -> arrow id of the identity at that unit.
    inverse : mapping arrow id -> arrow id.
    compose : mapping (g, h) -> gh, defined exactly on composable pairs,
        i.e. pairs with dom(g) == rng(h).

    The constructor checks only structural well-formedness (totality of
    the tables, values in range).  Semantic axioms are the business of
    :func:`validate`, which reports violations instead of raising.
    """

    def __init__(self, units, arrows, dom, rng, unit_arrow, inverse, compose):
        self.units = tuple(units)
        self.arrows = tuple(arrows)
        self.dom = dict(dom)
        self.rng = dict(rng)
        self.unit_arrow = dict(unit_arrow)
        self.inverse = dict(inverse)
        self.compose = dict(compose)
        self._cache: dict[str, Any] = {}
        self._check_tables()

    # -- construction-time structural checks ---------------------------------

    def _check_tables(self):
        if len(set(self.units)) != len(self.units):
            raise GroupoidError("duplicate unit ids")
        if len(set(self.arrows)) != len(self.arrows):
            raise GroupoidError("duplicate arrow ids")
        unit_set, arrow_set = set(self.units), set(self.arrows)
        for name, table, keys, values in [
            ("dom", self.dom, arrow_set, unit_set),
            ("rng", self.rng, arrow_set, unit_set),
            ("unit_arrow", self.unit_arrow, unit_set, arrow_set),
            ("inverse", self.inverse, arrow_set, arrow_set),
        ]:
            if set(table) != keys:
                missing = keys - set(table)
                extra = set(table) - keys
                raise GroupoidError(
                    f"{name} table keys do not match: missing={sorted(map(repr, missing))[:3]} "
                    f"extra={sorted(map(repr, extra))[:3]}"
                )
            bad = [k for k, v in table.items() if v not in values]
            if bad:
                raise GroupoidError(f"{name} has out-of-range value at {bad[0]!r}")
        for (g, h), k in self.compose.items():
            if g not in arrow_set or h not in arrow_set or k not in arrow_set:
                raise GroupoidError(f"compose entry ({g!r}, {h!r}) -> {k!r} uses unknown arrow id")

    # -- basic accessors ------------------------------------------------------

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def d(self, g):
        return self.dom[g]

    def r(self, g):
        return self.rng[g]

    def u(self, x):
        return self.unit_arrow[x]

    def inv(self, g):
        return self.inverse[g]

    def is_composable(self, g, h) -> bool:
        return self.dom[g] == self.rng[h]

    def mul(self, g, h):
        try:
            return self.compose[(g, h)]
        except KeyError:
            raise GroupoidError(f"arrows {g!r} and {h!r} are not composable") from None

    def unit_index(self) -> dict:
        if "uidx" not in self._cache:
            self._cache["uidx"] = {x: i for i, x in enumerate(self.units)}
        return self._cache["uidx"]

    def arrow_index(self) -> dict:
        if "aidx" not in self._cache:
            self._cache["aidx"] = {a: i for i, a in enumerate(self.arrows)}
        return self._cache["aidx"]

    # -- derived index arrays --------------------------------------------------

    def _arrays(self):
        """Integer-index views (dom, rng, inv, unit_of) used by hot loops."""
        if "arrays" not in self._cache:
            uidx, aidx = self.unit_index(), self.arrow_index()
            dom_i = np.fromiter((uidx[self.dom[a]] for a in self.arrows), np.int64, self.n_arrows)
            rng_i = np.fromiter((uidx[self.rng[a]] for a in self.arrows), np.int64, self.n_arrows)
            inv_i = np.fromiter((aidx[self.inverse[a]] for a in self.arrows), np.int64, self.n_arrows)
            unit_i = np.fromiter((aidx[self.unit_arrow[x]] for x in self.units), np.int64, self.n_units)
            self._cache["arrays"] = (dom_i, rng_i, inv_i, unit_i)
        return self._cache["arrays"]

    def _pair_arrays(self):
        """Composition as parallel index arrays (g, h, gh) over defined pairs."""
        if "pairs" not in self._cache:
            aidx = self.arrow_index()
            m = len(self.compose)
            p1 = np.empty(m, np.int64)
            p2 = np.empty(m, np.int64)
            pp = np.empty(m, np.int64)
            for i, ((g, h), k) in enumerate(self.compose.items()):
                p1[i] = aidx[g]
                p2[i] = aidx[h]
                pp[i] = aidx[k]
            self._cache["pairs"] = (p1, p2, pp)
        return self._cache["pairs"]

    def _compose_table(self):
        """Dense composition matrix (-1 = undefined), or None above the size cap."""
        if "ctable" not in self._cache:
            if self.n_arrows <= DENSE_ARROW_LIMIT:
                c = np.full((self.n_arrows, self.n_arrows), -1, np.int64)
                p1, p2, pp = self._pair_arrays()
                c[p1, p2] = pp
                self._cache["ctable"] = c
            else:
                self._cache["ctable"] = None
        return self._cache["ctable"]

    def _fibers_by_dom(self):
        """Per unit index, the array of arrow indices with that domain."""
        if "dfibers" not in self._cache:
            dom_i, _, _, _ = self._arrays()
            self._cache["dfibers"] = _group_by(dom_i, self.n_units, self.n_arrows)
        return self._cache["dfibers"]

    def _fibers_by_rng(self):
        if "rfibers" not in self._cache:
            _, rng_i, _, _ = self._arrays()
            self._cache["rfibers"] = _group_by(rng_i, self.n_units, self.n_arrows)
        return self._cache["rfibers"]

    def __repr__(self):
        return f"FiniteGroupoid(units={self.n_units}, arrows={self.n_arrows})"

    def same_tables(self, other: "FiniteGroupoid") -> bool:
        """Literal table equality (not isomorphism)."""
        return (
            self.units == other.units
            and self.arrows == other.arrows
            and self.dom == other.dom
            and self.rng == other.rng
            and self.unit_arrow == other.unit_arrow
            and self.inverse == other.inverse
            and self.compose == other.compose
        )


def _group_by(values: np.ndarray, n_groups: int, n: int):
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    starts = np.searchsorted(sorted_vals, np.arange(n_groups + 1))
    return [order[starts[i]:starts[i + 1]] for i in range(n_groups)]


# ---------------------------------------------------------------------------
# unit subsets


@dataclass(frozen=True)
class UnitSubset:
    """A subset of the unit set of a fixed groupoid."""

    groupoid: FiniteGroupoid
    members: frozenset

    def __post_init__(self):
        unknown = self.members - set(self.groupoid.units)
        if unknown:
            raise GroupoidError(f"unknown unit id {next(iter(unknown))!r} in subset")

    def __iter__(self):
        # deterministic order: the owning groupoid's unit order
        return (x for x in self.groupoid.units if x in self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self.members

    def complement(self) -> "UnitSubset":
        return UnitSubset(self.groupoid, frozenset(self.groupoid.units) - self.members)


def as_unit_subset(g: FiniteGroupoid, a) -> UnitSubset:
    if isinstance(a, UnitSubset):
        if a.groupoid is not g:
            return UnitSubset(g, a.members)
        return a
    return UnitSubset(g, frozenset(a))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> set:
        return {v.axiom for v in self.violations}

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"axiom": v.axiom, "witness": [repr(w) for w in v.witness]}
                for v in self.violations
            ],
        }


def validate(g: FiniteGroupoid) -> ValidationReport:
    """Check every groupoid axiom, reporting violations with witnesses.

    The report lists each violated axiom with witness tuples (capped per
    axiom); it is empty exactly when all invariants hold.  Violations are
    report entries, not exceptions.
    """
    if g._compose_table() is not None:
        return _validate_dense(g)
    return _validate_sparse(g)


def _collect(bucket, axiom, witnesses):
    for w in witnesses:
        if len(bucket[axiom]) < MAX_WITNESSES_PER_AXIOM:
            bucket[axiom].append(Violation(axiom, w))


def _report(bucket) -> ValidationReport:
    out = []
    for axiom in sorted(bucket):
        out.extend(bucket[axiom])
    return ValidationReport(out)


def _validate_dense(g: FiniteGroupoid) -> ValidationReport:
    from collections import defaultdict

    bucket = defaultdict(list)
    dom_i, rng_i, inv_i, unit_i = g._arrays()
    c = g._compose_table()
    n = g.n_arrows
    arrows = g.arrows
    units = g.units

    # unit arrows sit at their unit
    bad = np.flatnonzero((dom_i[unit_i] != np.arange(g.n_units)) | (rng_i[unit_i] != np.arange(g.n_units)))
    _collect(bucket, "unit-endpoints", [(units[i],) for i in bad])

    # compose defined exactly on composable pairs
    if n:
        composable = dom_i[:, None] == rng_i[None, :]
        defined = c >= 0
        mism = np.argwhere(composable != defined)
        _collect(bucket, "composability", [(arrows[i], arrows[j]) for i, j in mism])

        both = composable & defined
        gi, hi = np.nonzero(both)
        ki = c[gi, hi]
        bad = np.flatnonzero((dom_i[ki] != dom_i[hi]) | (rng_i[ki] != rng_i[gi]))
        _collect(bucket, "product-endpoints", [(arrows[gi[i]], arrows[hi[i]]) for i in bad])

        # unit arrows act as two-sided identities
        idx = np.arange(n)
        left = c[unit_i[rng_i], idx]
        right = c[idx, unit_i[dom_i]]
        bad = np.flatnonzero((left != idx) | (right != idx))
        _collect(bucket, "identity", [(arrows[i],) for i in bad])

        # inverses: endpoints swap and compose to units
        bad = np.flatnonzero((dom_i[inv_i] != rng_i) | (rng_i[inv_i] != dom_i))
        _collect(bucket, "inverse-endpoints", [(arrows[i],) for i in bad])
        gu = c[idx, inv_i]
        ug = c[inv_i, idx]
        bad = np.flatnonzero((gu != unit_i[rng_i]) | (ug != unit_i[dom_i]))
        _collect(bucket, "inverse", [(arrows[i],) for i in bad])

        # associativity over all composable triples, grouped by the middle
        # unit x = dom(h) = rng(k)
        p1, p2, pp = g._pair_arrays()
        dh = dom_i[p2]
        rfib = g._fibers_by_rng()
        for x in range(g.n_units):
            ks = rfib[x]
            if not len(ks):
                continue
            sel = np.flatnonzero(dh == x)
            if not len(sel):
                continue
            gg, hh, gh = p1[sel], p2[sel], pp[sel]
            lhs = c[np.ix_(gh, ks)]
            hk = c[np.ix_(hh, ks)]
            ok_hk = hk >= 0
            rhs = np.full_like(lhs, -1)
            rows = np.broadcast_to(gg[:, None], hk.shape)
            rhs[ok_hk] = c[rows[ok_hk], hk[ok_hk]]
            bad = np.argwhere(lhs != rhs)
            _collect(
                bucket,
                "associativity",
                [(arrows[gg[i]], arrows[hh[i]], arrows[ks[j]]) for i, j in bad],
            )
            if len(bucket["associativity"]) >= MAX_WITNESSES_PER_AXIOM:
                break
    return _report(bucket)


def _validate_sparse(g: FiniteGroupoid) -> ValidationReport:
    """Dict-based fallback for groupoids above the dense table cap."""
    from collections import defaultdict

    bucket = defaultdict(list)
    for x in g.units:
        ua = g.unit_arrow[x]
        if g.dom[ua] != x or g.rng[ua] != x:
            _collect(bucket, "unit-endpoints", [(x,)])

    defined = set(g.compose)
    rfib = {x: [] for x in g.units}
    dfib = {x: [] for x in g.units}
    for a in g.arrows:
        rfib[g.rng[a]].append(a)
        dfib[g.dom[a]].append(a)
    composable = set()
    for x in g.units:
        for a in dfib[x]:
            for b in rfib[x]:
                composable.add((a, b))
    _collect(bucket, "composability", sorted(composable ^ defined, key=repr))

    for (a, b), k in g.compose.items():
        if (a, b) in composable:
            if g.dom[k] != g.dom[b] or g.rng[k] != g.rng[a]:
                _collect(bucket, "product-endpoints", [(a, b)])

    for a in g.arrows:
        if g.compose.get((g.unit_arrow[g.rng[a]], a)) != a or g.compose.get((a, g.unit_arrow[g.dom[a]])) != a:
            _collect(bucket, "identity", [(a,)])
        ia = g.inverse[a]
        if g.dom[ia] != g.rng[a] or g.rng[ia] != g.dom[a]:
            _collect(bucket, "inverse-endpoints", [(a,)])
        if (
            g.compose.get((a, ia)) != g.unit_arrow[g.rng[a]]
            or g.compose.get((ia, a)) != g.unit_arrow[g.dom[a]]
        ):
            _collect(bucket, "inverse", [(a,)])

    for (a, b), ab in g.compose.items():
        for k in rfib[g.dom[b]]:
            lhs = g.compose.get((ab, k))
            bk = g.compose.get((b, k))
            rhs = g.compose.get((a, bk)) if bk is not None else None
            if lhs != rhs:
                _collect(bucket, "associativity", [(a, b, k)])
    return _report(bucket)


# ---------------------------------------------------------------------------
# reduction / saturation / orbits


def reduction(g: FiniteGroupoid, a) -> FiniteGroupoid:
    """The full subgroupoid over A: arrows with both endpoints in A."""
    sub = as_unit_subset(g, a)
    keep_units = [x for x in g.units if x in sub]
    keep = set()
    for arrow in g.arrows:
        if g.dom[arrow] in sub and g.rng[arrow] in sub:
            keep.add(arrow)
    arrows = [x for x in g.arrows if x in keep]
    return FiniteGroupoid(
        units=keep_units,
        arrows=arrows,
        dom={x: g.dom[x] for x in arrows},
        rng={x: g.rng[x] for x in arrows},
        unit_arrow={x: g.unit_arrow[x] for x in keep_units},
        inverse={x: g.inverse[x] for x in arrows},
        compose={(p, q): k for (p, q), k in g.compose.items() if p in keep and q in keep},
    )


def saturation(g: FiniteGroupoid, a) -> UnitSubset:
    """r(d^{-1}(A)): the union of all orbits meeting A."""
    sub = as_unit_subset(g, a)
    hit = set(sub.members)
    for arrow in g.arrows:
        if g.dom[arrow] in sub:
            hit.add(g.rng[arrow])
    return UnitSubset(g, frozenset(hit))


def is_invariant(g: FiniteGroupoid, a) -> bool:
    sub = as_unit_subset(g, a)
    return saturation(g, sub).members == sub.members


# ---------------------------------------------------------------------------
# groups presented by multiplication tables


@dataclass(frozen=True)
class GroupTable:
    """A finite group as an explicit multiplication table.

    ``table[i][j]`` is the index of ``elements[i] * elements[j]``.
    """

    elements: tuple
    table: tuple
    identity: int

    @classmethod
    def from_mul(cls, elements, mul: Callable[[Any, Any], Any]) -> "GroupTable":
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        table = tuple(
            tuple(index[mul(a, b)] for b in elements) for a in elements
        )
        identity = None
        n = len(elements)
        for e in range(n):
            if all(table[e][x] == x == table[x][e] for x in range(n)):
                identity = e
                break
        if identity is None:
            raise GroupoidError("multiplication table has no identity")
        g = cls(elements, table, identity)
        g._check_group()
        return g

    @classmethod
    def cyclic(cls, m: int) -> "GroupTable":
        if m < 1:
            raise GroupoidError("cyclic group order must be >= 1")
        return cls.from_mul(range(m), lambda a, b: (a + b) % m)

    @classmethod
    def trivial(cls) -> "GroupTable":
        return cls.cyclic(1)

    @classmethod
    def product(cls, a: "GroupTable", b: "GroupTable") -> "GroupTable":
        elems = tuple(itertools.product(a.elements, b.elements))
        ia = {e: i for i, e in enumerate(a.elements)}
        ib = {e: i for i, e in enumerate(b.elements)}

        def mul(p, q):
            return (
                a.elements[a.table[ia[p[0]]][ia[q[0]]]],
                b.elements[b.table[ib[p[1]]][ib[q[1]]]],
            )

        return cls.from_mul(elems, mul)

    @classmethod
    def symmetric(cls, n: int) -> "GroupTable":
        perms = tuple(itertools.permutations(range(n)))
        return cls.from_mul(perms, lambda p, q: tuple(p[q[i]] for i in range(n)))

    def _check_group(self):
        n = self.order
        for a in range(n):
            if sorted(self.table[a]) != list(range(n)) or sorted(
                self.table[x][a] for x in range(n)
            ) != list(range(n)):
                raise GroupoidError("table is not a Latin square")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        raise GroupoidError("table is not associative")

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, a, b):
        i = self.elements.index(a)
        j = self.elements.index(b)
        return self.elements[self.table[i][j]]

    def mul_index(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inverse_index(self, i: int) -> int:
        return self.table[i].index(self.identity)

    def element_order(self, i: int) -> int:
        k, cur = 1, i
        while cur != self.identity:
            cur = self.table[cur][i]
            k += 1
        return k

    def order_profile(self) -> tuple:
        return tuple(sorted(self.element_order(i) for i in range(self.order)))

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))


GROUP_ISO_SEARCH_CAP = 24


def find_group_isomorphism(a: GroupTable, b: GroupTable):
    """Explicit isomorphism search between small group tables.

    Returns an index map (tuple) or None.  Bounded to order <= 24.
    """
    if a.order != b.order:
        return None
    if a.order > GROUP_ISO_SEARCH_CAP:
        raise GroupoidError(f"group isomorphism search capped at order {GROUP_ISO_SEARCH_CAP}")
    if a.order_profile() != b.order_profile():
        return None
    n = a.order
    orders_a = [a.element_order(i) for i in range(n)]
    orders_b = [b.element_order(i) for i in range(n)]
    mapping = [-1] * n
    used = [False] * n
    mapping[a.identity] = b.identity
    used[b.identity] = True

    def extend(i):
        if i == n:
            return True
        if i == a.identity:
            return extend(i + 1)
        if mapping[i] != -1:
            return extend(i + 1)
        for j in range(n):
            if used[j] or orders_b[j] != orders_a[i]:
                continue
            mapping[i] = j
            used[j] = True
            if _consistent(a, b, mapping) and extend(i + 1):
                return True
            mapping[i] = -1
            used[j] = False
        return False

    if extend(0):
        return tuple(mapping)
    return None


def _consistent(a: GroupTable, b: GroupTable, mapping) -> bool:
    n = a.order
    for i in range(n):
        if mapping[i] == -1:
            continue
        for j in range(n):
            if mapping[j] == -1:
                continue
            k = a.table[i][j]
            if mapping[k] != -1 and b.table[mapping[i]][mapping[j]] != mapping[k]:
                return False
    return True


# ---------------------------------------------------------------------------
# orbits and isotropy


@dataclass
class OrbitPartition:
    """Orbit decomposition with one isotropy table per orbit.

    ``orbits`` partition the unit set; ``representatives[i]`` is the first
    unit of orbit i in the groupoid's unit order; ``isotropy[i]`` is the
    multiplication table of the loops at that representative.
    """

    groupoid: FiniteGroupoid
    orbits: tuple
    representatives: tuple
    isotropy: tuple

    def orbit_of(self, x) -> int:
        for i, orb in enumerate(self.orbits):
            if x in orb:
                return i
        raise GroupoidError(f"unknown unit {x!r}")


def isotropy_arrows(g: FiniteGroupoid, x) -> list:
    return [a for a in g.arrows if g.dom[a] == x and g.rng[a] == x]


def isotropy_table(g: FiniteGroupoid, x) -> GroupTable:
    loops = isotropy_arrows(g, x)
    return GroupTable.from_mul(loops, lambda a, b: g.mul(a, b))


def orbits_and_isotropy(g: FiniteGroupoid, check: bool = True) -> OrbitPartition:
    """Partition the units into orbits; attach isotropy tables.

    With ``check=True`` the isotropy tables at all units of one orbit are
    verified pairwise isomorphic via explicit conjugation maps.
    """
    parent = {x: x for x in g.units}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in g.arrows:
        rx, ry = find(g.dom[a]), find(g.rng[a])
        if rx != ry:
            parent[rx] = ry

    groups: dict = {}
    for x in g.units:
        groups.setdefault(find(x), []).append(x)
    orbits = tuple(frozenset(v) for v in sorted(groups.values(), key=lambda v: g.units.index(v[0])))
    reps = tuple(min(orb, key=g.units.index) for orb in orbits)
    tables = tuple(isotropy_table(g, rep) for rep in reps)

    if check:
        for orb, rep, table in zip(orbits, reps, tables):
            _check_isotropy_conjugation(g, orb, rep, table)

    return OrbitPartition(g, orbits, reps, tables)


def _check_isotropy_conjugation(g, orbit, rep, table):
    # an arrow t : rep -> y conjugates loops at rep onto loops at y
    transversal = {rep: g.unit_arrow[rep]}
    for a in g.arrows:
        if g.dom[a] == rep and g.rng[a] not in transversal:
            transversal[g.rng[a]] = a
    if set(transversal) != set(orbit):
        raise GroupoidError(f"orbit of {rep!r} is not spanned by arrows from it")
    for y, t in transversal.items():
        t_inv = g.inverse[t]
        image = {g.mul(g.mul(t, loop), t_inv) for loop in table.elements}
        target = set(isotropy_arrows(g, y))
        if image != target:
            raise GroupoidError(
                f"isotropy at {y!r} is not conjugate to isotropy at {rep!r}"
            )


# ---------------------------------------------------------------------------
# builders


def build_pair(units) -> FiniteGroupoid:
    """Pair groupoid: one arrow (x, y) from y to x for every unit pair."""
    units = tuple(units)
    arrows = [(x, y) for x in units for y in units]
    compose = {}
    for x in units:
        for y in units:
            for z in units:
                compose[((x, y), (y, z))] = (x, z)
    return FiniteGroupoid(
        units=units,
        arrows=arrows,
        dom={(x, y): y for (x, y) in arrows},
        rng={(x, y): x for (x, y) in arrows},
        unit_arrow={x: (x, x) for x in units},
        inverse={(x, y): (y, x) for (x, y) in arrows},
        compose=compose,
    )


def build_group_bundle(base_units, group: GroupTable) -> FiniteGroupoid:
    """Bundle of groups over a discrete base: dom = rng everywhere."""
    base_units = tuple(base_units)
    arrows = [(x, e) for x in base_units for e in group.elements]
    compose = {}
    for x in base_units:
        for a in group.elements:
            for b in group.elements:
                compose[((x, a), (x, b))] = (x, group.mul(a, b))
    ident = group.elements[group.identity]
    return FiniteGroupoid(
        units=base_units,
        arrows=arrows,
        dom={(x, e): x for (x, e) in arrows},
        rng={(x, e): x for (x, e) in arrows},
        unit_arrow={x: (x, ident) for x in base_units},
        inverse={
            (x, e): (x, group.elements[group.inverse_index(group.elements.index(e))])
            for (x, e) in arrows
        },
        compose=compose,
    )


def build_action(group: GroupTable, points, act: Callable[[Any, Any], Any]) -> FiniteGroupoid:
    """Action groupoid of a right action: arrows (x, g), r = x, d = x.g^{-1}.

    ``act(x, g)`` must be a genuine right action: x.e = x and
    (x.g).h = x.(gh); this is verified and violations raise.
    """
    points = tuple(points)
    ident = group.elements[group.identity]
    for x in points:
        if act(x, ident) != x:
            raise GroupoidError(f"not an action: {x!r} . identity != {x!r}")
        if act(x, ident) not in points:
            raise GroupoidError("action leaves the point set")
    for x in points:
        for a in group.elements:
            if act(x, a) not in points:
                raise GroupoidError("action leaves the point set")
            for b in group.elements:
                if act(act(x, a), b) != act(x, group.mul(a, b)):
                    raise GroupoidError(
                        f"not a right action at point {x!r} with {a!r}, {b!r}"
                    )

    def ginv(e):
        return group.elements[group.inverse_index(group.elements.index(e))]

    arrows = [(x, e) for x in points for e in group.elements]
    compose = {}
    for x, h in arrows:
        y = act(x, ginv(h))
        for e in group.elements:
            # (x, h)(x.h^{-1}, e) = (x, eh)
            compose[((x, h), (y, e))] = (x, group.mul(e, h))
    return FiniteGroupoid(
        units=points,
        arrows=arrows,
        dom={(x, e): act(x, ginv(e)) for (x, e) in arrows},
        rng={(x, e): x for (x, e) in arrows},
        unit_arrow={x: (x, ident) for x in points},
        inverse={(x, e): (act(x, ginv(e)), ginv(e)) for (x, e) in arrows},
        compose=compose,
    )


def build_product(g: FiniteGroupoid, h: FiniteGroupoid) -> FiniteGroupoid:
    """Product groupoid with componentwise structure."""
    units = [(x, y) for x in g.units for y in h.units]
    arrows = [(a, b) for a in g.arrows for b in h.arrows]
    compose = {}
    for (a1, b1), k1 in g.compose.items():
        for (a2, b2), k2 in h.compose.items():
            compose[((a1, a2), (b1, b2))] = (k1, k2)
    return FiniteGroupoid(
        units=units,
        arrows=arrows,
        dom={(a, b): (g.dom[a], h.dom[b]) for (a, b) in arrows},
        rng={(a, b): (g.rng[a], h.rng[b]) for (a, b) in arrows},
        unit_arrow={(x, y): (g.unit_arrow[x], h.unit_arrow[y]) for (x, y) in units},
        inverse={(a, b): (g.inverse[a], h.inverse[b]) for (a, b) in arrows},
        compose=compose,
    )


def build_fibered_pullback(f: Mapping, h: FiniteGroupoid) -> FiniteGroupoid:
    """Fibered pull-back of h along f: arrows (x, g, y) with f(x)=r(g), f(y)=d(g)."""
    points = tuple(f.keys())
    values = set(f.values())
    if not values <= set(h.units):
        raise GroupoidError("f does not map into the units of the base groupoid")
    if values != set(h.units):
        raise GroupoidError("f is not surjective onto the base units")
    arrows = [
        (x, a, y)
        for x in points
        for a in h.arrows
        for y in points
        if f[x] == h.rng[a] and f[y] == h.dom[a]
    ]
    compose = {}
    by_rng: dict = {}
    for arr in arrows:
        by_rng.setdefault(arr[0], []).append(arr)
    for x, a, y in arrows:
        # second factors are exactly the arrows with range y; their base
        # arrow is then automatically composable with a
        for (_, b, z) in by_rng.get(y, []):
            compose[((x, a, y), (y, b, z))] = (x, h.mul(a, b), z)
    return FiniteGroupoid(
        units=points,
        arrows=arrows,
        dom={(x, a, y): y for (x, a, y) in arrows},
        rng={(x, a, y): x for (x, a, y) in arrows},
        unit_arrow={x: (x, h.unit_arrow[f[x]], x) for x in points},
        inverse={(x, a, y): (y, h.inverse[a], x) for (x, a, y) in arrows},
        compose=compose,
    )


def build_disjoint_union(parts: Iterable[FiniteGroupoid]) -> FiniteGroupoid:
    """Disjoint union; ids are tagged (part_index, original_id)."""
    parts = list(parts)
    units, arrows, dom, rng, unit_arrow, inverse, compose = [], [], {}, {}, {}, {}, {}
    for i, g in enumerate(parts):
        units.extend((i, x) for x in g.units)
        arrows.extend((i, a) for a in g.arrows)
        dom.update({(i, a): (i, g.dom[a]) for a in g.arrows})
        rng.update({(i, a): (i, g.rng[a]) for a in g.arrows})
        unit_arrow.update({(i, x): (i, g.unit_arrow[x]) for x in g.units})
        inverse.update({(i, a): (i, g.inverse[a]) for a in g.arrows})
        compose.update({((i, a), (i, b)): (i, k) for (a, b), k in g.compose.items()})
    return FiniteGroupoid(units, arrows, dom, rng, unit_arrow, inverse, compose)


def relabel(g: FiniteGroupoid, unit_map: Mapping, arrow_map: Mapping) -> FiniteGroupoid:
    """Rename units and arrows through bijections (values must be fresh ids)."""
    um = dict(unit_map)
    am = dict(arrow_map)
    if len(set(um.values())) != len(um) or len(set(am.values())) != len(am):
        raise GroupoidError("relabel maps must be injective")
    return FiniteGroupoid(
        units=[um[x] for x in g.units],
        arrows=[am[a] for a in g.arrows],
        dom={am[a]: um[g.dom[a]] for a in g.arrows},
        rng={am[a]: um[g.rng[a]] for a in g.arrows},
        unit_arrow={um[x]: am[g.unit_arrow[x]] for x in g.units},
        inverse={am[a]: am[g.inverse[a]] for a in g.arrows},
        compose={(am[a], am[b]): am[k] for (a, b), k in g.compose.items()},
    )


BUILD_KINDS = ("pair", "group_bundle", "action", "product", "fibered_pullback")


def build(kind: str, **params) -> FiniteGroupoid:
    """Dispatch to the named construction."""
    if kind == "pair":
        if "n" in params:
            return build_pair(range(params["n"]))
        return build_pair(params["units"])
    if kind == "group_bundle":
        return build_group_bundle(params["base_units"], params["group"])
    if kind == "action":
        return build_action(params["group"], params["points"], params["act"])
    if kind == "product":
        return build_product(params["left"], params["right"])
    if kind == "fibered_pullback":
        return build_fibered_pullback(params["f"], params["base"])
    raise GroupoidError(f"unknown construction kind {kind!r}; expected one of {BUILD_KINDS}")
