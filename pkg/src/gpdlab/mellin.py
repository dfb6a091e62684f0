"""Mellin symbols of boundary limit operators and invertibility scans.

A cone point contributes a matrix-valued kernel k(t) acting by Mellin
convolution on the half-line; its symbol on the weight line a is

    symbol(lam) = integral_0^inf k(t) t^(a - 1 - i lam) dt,

computed by adaptive quadrature after the substitution t = e^u.  The
convention (weight in the exponent, sign of the dual variable) is fixed
here once and shared by every oracle in the package.  Scans certify the
large-|lam| tail through an integration-by-parts bound and bisect the
grid adaptively where the smallest singular value moves fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .conical import LayerDomain, RayBase, weight_line

TWO_PI = 2.0 * math.pi


class MellinError(ValueError):
    pass


class NonIntegrableError(MellinError):
    pass


class QuadratureError(RuntimeError):
    pass


class TailBoundError(RuntimeError):
    pass


class MissingKernelError(MellinError):
    pass


class UnsupportedDimensionError(MellinError):
    pass


@dataclass(frozen=True)
class KernelDecay:
    """Entrywise bounds |k(t)| <= c0 t^p0 for t <= 1, <= c_inf t^-p_inf for t >= 1."""

    p0: float
    c0: float
    p_inf: float
    c_inf: float


@dataclass
class MellinKernel:
    """Matrix-valued Mellin convolution kernel at one cone point.

    ``fn(t)`` returns the (size x size) complex matrix at t > 0; entry
    (c, c') couples base boundary components c and c'.  ``decay``
    certifies integrability against the weight line.  Entries should be
    twice differentiable in log t: the certified large-frequency tail
    bound integrates the second logarithmic derivative.
    """

    vertex: object
    size: int
    fn: Callable[[float], np.ndarray]
    decay: KernelDecay
    name: str = "kernel"

    def __call__(self, t: float) -> np.ndarray:
        out = np.asarray(self.fn(t), dtype=np.complex128)
        if out.shape != (self.size, self.size):
            raise MellinError(f"kernel {self.name!r} returned shape {out.shape}")
        return out

    def conjugated(self, weight: float) -> Callable[[float], np.ndarray]:
        """g(u) = k(e^u) e^(a u), the kernel on the logarithmic line."""

        def g(u: float) -> np.ndarray:
            return self(math.exp(u)) * math.exp(weight * u)

        return g

    def is_real(self) -> bool:
        return all(
            float(np.max(np.abs(self(t).imag))) == 0.0 for t in (0.37, 1.0, 2.63)
        )


def check_line_integrability(kernel: MellinKernel, weight: float):
    d = kernel.decay
    if weight + d.p0 <= 0 or weight - d.p_inf >= 0:
        raise NonIntegrableError(
            f"kernel {kernel.name!r} is not integrable on the weight line a={weight}: "
            f"needs -p0 < a < p_inf with p0={d.p0}, p_inf={d.p_inf}"
        )


def _log_window(kernel: MellinKernel, weight: float, tail_mass: float = 1e-13):
    """[-u_minus, u_plus] outside which the conjugated kernel mass is < tail_mass."""
    d = kernel.decay
    rate_plus = d.p_inf - weight
    rate_minus = d.p0 + weight
    c_plus = max(d.c_inf, 1e-300)
    c_minus = max(d.c0, 1e-300)
    u_plus = max(5.0, math.log(max(c_plus / (tail_mass * rate_plus), 1.0)) / rate_plus)
    u_minus = max(5.0, math.log(max(c_minus / (tail_mass * rate_minus), 1.0)) / rate_minus)
    return u_minus, u_plus


# ---------------------------------------------------------------------------
# built-in kernels


def wedge_double_layer_kernel(alpha: float, vertex="corner") -> MellinKernel:
    """Planar Laplace double-layer kernel between the two rays of a wedge.

    The rays bound a wedge of opening alpha; with inward normals, the
    kernel coupling one ray to the other reduces to

        k(t) = t sin(alpha) / (2 pi (t^2 - 2 t cos(alpha) + 1)),

    while same-ray entries vanish (collinear points).  At alpha = pi the
    kernel is identically zero.
    """
    if not 0.0 < alpha < TWO_PI:
        raise MellinError(f"opening angle must lie in (0, 2 pi), got {alpha}")
    sa, ca = math.sin(alpha), math.cos(alpha)
    if alpha == math.pi or abs(sa) == 0.0:

        def zero_fn(t):
            return np.zeros((2, 2))

        return MellinKernel(vertex, 2, zero_fn, KernelDecay(1.0, 0.0, 1.0, 0.0), "flat-wedge")

    def fn(t):
        off = t * sa / (TWO_PI * (t * t - 2.0 * t * ca + 1.0))
        return np.array([[0.0, off], [off, 0.0]])

    denom_floor = sa * sa if ca > 0 else 1.0
    c_bound = abs(sa) / (TWO_PI * denom_floor)
    return MellinKernel(
        vertex, 2, fn, KernelDecay(1.0, c_bound, 1.0, c_bound), f"wedge({alpha:.6g})"
    )


def double_layer_kernel_value(x, y, normal_at_y) -> float:
    """Pointwise planar double-layer kernel (1/2pi) <x - y, n_y> / |x - y|^2."""
    dx = (x[0] - y[0], x[1] - y[1])
    r2 = dx[0] * dx[0] + dx[1] * dx[1]
    return (dx[0] * normal_at_y[0] + dx[1] * normal_at_y[1]) / (TWO_PI * r2)


def sech_test_kernel(vertex="test") -> MellinKernel:
    """Scalar test kernel t / (1 + t^2) = sech(log t) / 2."""

    def fn(t):
        return np.array([[t / (1.0 + t * t)]])

    return MellinKernel(vertex, 1, fn, KernelDecay(1.0, 1.0, 1.0, 1.0), "sech-test")


def symmetric_dilation_kernel(vertex="test") -> MellinKernel:
    """Scalar kernel 2 sqrt(t) / (1 + t^2), symmetric under the end swap
    k(t) -> k(1/t) t^(-2a) on the line a = 1/2."""

    def fn(t):
        return np.array([[2.0 * math.sqrt(t) / (1.0 + t * t)]])

    return MellinKernel(vertex, 1, fn, KernelDecay(0.5, 2.0, 1.5, 2.0), "symmetric-dilation")


def forced_zero_kernel(c: float, vertex="adversarial") -> MellinKernel:
    """Scalar kernel whose symbol equals -c at lam = 0 (on the line a = 1/2).

    With the convention above its symbol is -c sech(pi lam / 2), so
    c I + symbol hits exactly zero at the origin of the weight line.
    """
    scale = c / math.pi

    def fn(t):
        return np.array([[-scale * 2.0 * math.sqrt(t) / (1.0 + t * t)]])

    return MellinKernel(
        vertex, 1, fn, KernelDecay(0.5, 2.0 * scale, 1.5, 2.0 * scale), "forced-zero"
    )


def reflect_kernel(kernel: MellinKernel, weight: float) -> MellinKernel:
    """Kernel seen from the opposite end of the cone axis.

    Swapping r -> 1/r on the half-line conjugates a Mellin convolution
    by the flip; on the weight line a the kernel transforms as
    k(t) -> k(1/t) t^(-2a).
    """

    def fn(t):
        return np.asarray(kernel.fn(1.0 / t)) * t ** (-2.0 * weight)

    d = kernel.decay
    decay = KernelDecay(
        p0=d.p_inf - 2.0 * weight,
        c0=d.c_inf,
        p_inf=d.p0 + 2.0 * weight,
        c_inf=d.c0,
    )
    return MellinKernel(kernel.vertex, kernel.size, fn, decay, f"reflected({kernel.name})")


def adjoint_kernel(kernel: MellinKernel, weight: float) -> MellinKernel:
    """Adjoint kernel on the weight line: conj(k(1/t))^T t^(-2a).

    Its symbol is the conjugate transpose of the original symbol.  On
    the Haar-unitary line a = 0 the weight factor drops and this is
    plain conjugate-transpose-reflect.
    """

    def fn(t):
        return np.conj(np.asarray(kernel.fn(1.0 / t))).T * t ** (-2.0 * weight)

    d = kernel.decay
    decay = KernelDecay(
        p0=d.p_inf - 2.0 * weight,
        c0=d.c_inf,
        p_inf=d.p0 + 2.0 * weight,
        c_inf=d.c0,
    )
    return MellinKernel(kernel.vertex, kernel.size, fn, decay, f"adjoint({kernel.name})")


# ---------------------------------------------------------------------------
# the transform


DEFAULT_ABS_TOL = 1e-9
DEFAULT_LAMBDA_MAX = 200.0


def default_grid(lambda_max: float = DEFAULT_LAMBDA_MAX) -> np.ndarray:
    """Symmetric grid, dense near 0 where order-(-1) symbols live."""
    lam = np.concatenate(
        [
            np.arange(0.0, 10.0 + 1e-12, 0.25),
            np.arange(11.0, 40.0 + 1e-12, 1.0),
            np.arange(45.0, lambda_max + 1e-12, 5.0),
        ]
    )
    lam = lam[lam <= lambda_max]
    if lam[-1] < lambda_max:
        lam = np.append(lam, lambda_max)
    return np.unique(np.concatenate([-lam[::-1], lam]))


def _quad_checked(fun, lo, hi, budget, **kw):
    val, err = quad(fun, lo, hi, limit=300, epsabs=budget * 0.25, epsrel=1e-12, **kw)
    if err > budget:
        raise QuadratureError(
            f"quadrature error estimate {err:.2e} exceeds the budget {budget:.2e}"
        )
    return val, err


def _fourier_entry(gf, lo, hi, lam, budget):
    """integral g(u) e^(-i lam u) du for one (complex) scalar entry."""
    gr = lambda u: gf(u).real
    gi = lambda u: gf(u).imag
    if lam == 0.0:
        re, e1 = _quad_checked(gr, lo, hi, budget)
        im, e2 = _quad_checked(gi, lo, hi, budget)
        return complex(re, im), e1 + e2
    rc, e1 = _quad_checked(gr, lo, hi, budget, weight="cos", wvar=lam)
    rs, e2 = _quad_checked(gr, lo, hi, budget, weight="sin", wvar=lam)
    ic, e3 = _quad_checked(gi, lo, hi, budget, weight="cos", wvar=lam)
    is_, e4 = _quad_checked(gi, lo, hi, budget, weight="sin", wvar=lam)
    return complex(rc + is_, ic - rs), e1 + e2 + e3 + e4


class MellinSymbolFamily:
    """Sampled symbol lam -> k x k matrix along one weight line.

    Carries an evaluator so scans can refine the grid, and a certified
    decreasing tail bound ||symbol(lam)|| <= C2 / lam^2 from two
    integrations by parts of the conjugated kernel.
    """

    def __init__(self, kernel: MellinKernel, weight: float, lambdas, evaluate, tail_c2, max_quad_error):
        self.kernel = kernel
        self.vertex = kernel.vertex
        self.size = kernel.size
        self.weight = weight
        self._evaluate = evaluate
        self.tail_c2 = float(tail_c2)
        self.max_quad_error = float(max_quad_error)
        self._values: dict = {}
        for lam in lambdas:
            self.value(float(lam))
        self._ensure_continuity()

    # -- sampling ---------------------------------------------------------------

    def value(self, lam: float) -> np.ndarray:
        lam = float(lam)
        if lam not in self._values:
            mat, err = self._evaluate(lam)
            self.max_quad_error = max(self.max_quad_error, err)
            self._values[lam] = mat
        return self._values[lam]

    def grid(self) -> np.ndarray:
        return np.array(sorted(self._values), dtype=float)

    def matrices(self) -> list:
        return [self._values[lam] for lam in sorted(self._values)]

    @property
    def lambda_max(self) -> float:
        return float(max(abs(lam) for lam in self._values))

    def tail_bound(self, lam: float) -> float:
        if lam <= 0:
            return math.inf
        return self.tail_c2 / (lam * lam)

    def _ensure_continuity(self, max_inserts: int = 200):
        """Densify until adjacent samples deviate by a bounded step."""
        inserts = 0
        while inserts < max_inserts:
            lams = self.grid()
            norms = [float(np.linalg.norm(self._values[l], 2)) for l in lams]
            scale = 1.0 + max(norms, default=0.0)
            worst = None
            for a, b in zip(lams[:-1], lams[1:]):
                if b - a <= 1e-6:
                    continue
                dev = float(np.linalg.norm(self._values[b] - self._values[a], 2))
                if dev > 0.3 * scale:
                    worst = (a, b)
                    break
            if worst is None:
                return
            self.value(0.5 * (worst[0] + worst[1]))
            inserts += 1
        raise QuadratureError("symbol family failed the adjacent-sample continuity bound")


def _tail_coefficient(kernel: MellinKernel, weight: float, lo: float, hi: float) -> float:
    """||entrywise integral |g''| du|| with g the conjugated kernel."""
    g = kernel.conjugated(weight)
    h = 1e-4
    k = kernel.size
    c2 = np.zeros((k, k))
    for i in range(k):
        for j in range(k):

            def absdd(u, i=i, j=j):
                return abs(
                    (g(u + h)[i, j] - 2.0 * g(u)[i, j] + g(u - h)[i, j]) / (h * h)
                )

            val, _ = quad(absdd, lo, hi, limit=300, epsabs=1e-6, epsrel=1e-4)
            c2[i, j] = val
    return float(np.linalg.norm(c2, 2))


def mellin_transform(
    kernel: MellinKernel,
    weight: float,
    lambdas=None,
    abs_tol: float = DEFAULT_ABS_TOL,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
) -> MellinSymbolFamily:
    """Sample the symbol of a kernel along the weight line.

    Each entry is an adaptive Gauss-Kronrod quadrature (oscillatory
    weights for lam != 0) of the conjugated kernel on a window sized
    from the declared decay; the per-entry error estimate must stay
    below abs_tol.
    """
    check_line_integrability(kernel, weight)
    if lambdas is None:
        lambdas = default_grid(lambda_max)
    u_minus, u_plus = _log_window(kernel, weight, tail_mass=abs_tol * 1e-4)
    g = kernel.conjugated(weight)
    k = kernel.size
    real_kernel = kernel.is_real()
    per_entry_budget = abs_tol

    def evaluate(lam: float):
        if real_kernel and lam < 0.0:
            mat, err = evaluate(-lam)
            return np.conj(mat), err
        mat = np.empty((k, k), dtype=np.complex128)
        worst = 0.0
        for i in range(k):
            for j in range(k):
                entry = lambda u, i=i, j=j: g(u)[i, j]
                mat[i, j], err = _fourier_entry(entry, -u_minus, u_plus, lam, per_entry_budget)
                worst = max(worst, err)
        return mat, worst

    tail_c2 = _tail_coefficient(kernel, weight, -u_minus, u_plus)
    return MellinSymbolFamily(kernel, weight, lambdas, evaluate, tail_c2, 0.0)


def mellin_transform_direct(kernel: MellinKernel, weight: float, lam: float) -> np.ndarray:
    """Second quadrature scheme: direct t-integration, no log substitution.

    Suited to moderate |lam|; serves as the independent oracle against
    the log-line scheme.
    """
    check_line_integrability(kernel, weight)
    k = kernel.size
    out = np.empty((k, k), dtype=np.complex128)

    for i in range(k):
        for j in range(k):

            def fre(t, i=i, j=j):
                w = t ** (weight - 1.0)
                ph = -lam * math.log(t)
                val = kernel(t)[i, j] * w * complex(math.cos(ph), math.sin(ph))
                return val.real

            def fim(t, i=i, j=j):
                w = t ** (weight - 1.0)
                ph = -lam * math.log(t)
                val = kernel(t)[i, j] * w * complex(math.cos(ph), math.sin(ph))
                return val.imag

            re1, _ = quad(fre, 0.0, 1.0, limit=400, epsabs=1e-11, epsrel=1e-11)
            re2, _ = quad(fre, 1.0, np.inf, limit=400, epsabs=1e-11, epsrel=1e-11)
            im1, _ = quad(fim, 0.0, 1.0, limit=400, epsabs=1e-11, epsrel=1e-11)
            im2, _ = quad(fim, 1.0, np.inf, limit=400, epsabs=1e-11, epsrel=1e-11)
            out[i, j] = complex(re1 + re2, im1 + im2)
    return out


# ---------------------------------------------------------------------------
# invertibility scan


@dataclass
class ScanResult:
    vertex: object
    min_sigma: float
    argmin_lambda: float
    lambda_max: float
    tail_floor: float
    invertible: bool
    grid_points: int
    sigma_tol: float

    def as_dict(self) -> dict:
        return {
            "vertex": repr(self.vertex),
            "min_sigma": self.min_sigma,
            "argmin_lambda": self.argmin_lambda,
            "lambda_max": self.lambda_max,
            "tail_floor": self.tail_floor,
            "invertible": self.invertible,
            "grid_points": self.grid_points,
            "sigma_tol": self.sigma_tol,
        }


def _sigma_min(mat: np.ndarray) -> float:
    svals = np.linalg.svd(mat, compute_uv=False)
    return float(svals[-1])


def invertibility_scan(
    family: MellinSymbolFamily,
    c: complex,
    sigma_tol: float = 1e-3,
    rel_change: float = 0.10,
    max_refinements: int = 2000,
    lambda_cap: float = 1e5,
) -> ScanResult:
    """Minimum singular value of c I + symbol(lam) along the line.

    The grid is extended until the certified tail bound drops below
    |c| / 2 (the tail then satisfies sigma_min >= |c| - tail bound) and
    bisected adaptively where sigma_min moves by more than rel_change
    between neighbours.
    """
    if abs(c) == 0.0:
        raise MellinError("scan requires a nonzero constant term")
    if sigma_tol <= 0.0:
        raise MellinError("sigma_tol must be positive")
    lam_max = family.lambda_max
    while family.tail_bound(lam_max) >= abs(c) / 2.0:
        lam_max *= 2.0
        if lam_max > lambda_cap:
            raise TailBoundError(
                f"tail bound {family.tail_bound(lam_max):.2e} still exceeds "
                f"|c|/2 at lambda = {lam_max:.3g}; enlarge the grid"
            )
        family.value(lam_max)
        family.value(-lam_max)

    eye = np.eye(family.size)
    sig = {lam: _sigma_min(c * eye + family.value(lam)) for lam in family.grid()}

    refinements = 0
    while refinements < max_refinements:
        lams = sorted(sig)
        split = None
        for a, b in zip(lams[:-1], lams[1:]):
            if b - a <= 1e-4:
                continue
            lo, hi = sorted((sig[a], sig[b]))
            if hi > (1.0 + rel_change) * lo:
                split = 0.5 * (a + b)
                break
        if split is None:
            break
        sig[split] = _sigma_min(c * eye + family.value(split))
        refinements += 1

    argmin = min(sig, key=lambda lam: sig[lam])
    grid_min = sig[argmin]
    tail_floor = abs(c) - family.tail_bound(lam_max)
    min_sigma = min(grid_min, tail_floor)
    return ScanResult(
        vertex=family.vertex,
        min_sigma=float(min_sigma),
        argmin_lambda=float(argmin),
        lambda_max=float(lam_max),
        tail_floor=float(tail_floor),
        invertible=bool(min_sigma > sigma_tol),
        grid_points=len(sig),
        sigma_tol=sigma_tol,
    )


# ---------------------------------------------------------------------------
# the per-domain verdict


@dataclass
class FredholmVerdict:
    domain_vertices: tuple
    elliptic: bool
    weight: float
    constant: complex
    scans: dict  # vertex id -> ScanResult or None when scans are skipped
    is_fredholm: bool
    witness: Optional[object] = None
    note: str = ""

    def per_vertex_min(self) -> dict:
        return {v: (s.min_sigma if s else None) for v, s in self.scans.items()}

    def as_dict(self) -> dict:
        return {
            "elliptic": self.elliptic,
            "weight": self.weight,
            "constant": [self.constant.real, self.constant.imag],
            "scans": {repr(v): (s.as_dict() if s else None) for v, s in self.scans.items()},
            "is_fredholm": self.is_fredholm,
            "witness": repr(self.witness) if self.witness is not None else None,
            "note": self.note,
        }


def vertex_kernel(domain: LayerDomain, vertex_id) -> MellinKernel:
    """Built-in double-layer kernel at a planar two-ray vertex."""
    v = domain.vertex(vertex_id)
    if not isinstance(v.base, RayBase) or v.base.components != 2:
        raise MissingKernelError(
            f"vertex {vertex_id!r} has no built-in kernel; supply one explicitly"
        )
    return wedge_double_layer_kernel(v.base.opening(), vertex=vertex_id)


def fredholm_verdict(
    domain: LayerDomain,
    c: complex = 0.5,
    kernels: Optional[dict] = None,
    weight="auto",
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    sigma_tol: float = 1e-3,
) -> FredholmVerdict:
    """Scan verdict for c I + (order minus-one kernel) on a planar domain.

    Ellipticity for this operator class is the symbolic condition c != 0;
    when it fails the per-vertex scans are skipped (no positive constant
    is available to certify the tail) and the verdict is negative.
    """
    if domain.dimension != 2:
        raise UnsupportedDimensionError(
            "numeric verdicts are planar only; use boundary_algebra_report for structure"
        )
    kernels = dict(kernels or {})
    if weight == "auto":
        weight_value = weight_line(domain.dimension).boundary_weight
    else:
        weight_value = float(weight)

    elliptic = abs(c) != 0.0
    scans: dict = {}
    witness = None
    if not elliptic:
        scans = {v.id: None for v in domain.vertices}
        return FredholmVerdict(
            domain_vertices=tuple(v.id for v in domain.vertices),
            elliptic=False,
            weight=weight_value,
            constant=complex(c),
            scans=scans,
            is_fredholm=False,
            note="inelliptic constant term; scans skipped",
        )

    cache: dict = {}
    for v in domain.vertices:
        kern = kernels.get(v.id)
        if kern is None:
            kern = vertex_kernel(domain, v.id)
        key = (kern.name, kern.size, weight_value, lambda_max)
        if key in cache and kernels.get(v.id) is None:
            base = cache[key]
            scans[v.id] = ScanResult(
                vertex=v.id,
                min_sigma=base.min_sigma,
                argmin_lambda=base.argmin_lambda,
                lambda_max=base.lambda_max,
                tail_floor=base.tail_floor,
                invertible=base.invertible,
                grid_points=base.grid_points,
                sigma_tol=base.sigma_tol,
            )
        else:
            fam = mellin_transform(kern, weight_value, lambda_max=lambda_max)
            result = invertibility_scan(fam, c, sigma_tol=sigma_tol)
            result.vertex = v.id
            scans[v.id] = result
            if kernels.get(v.id) is None:
                cache[key] = result
        if not scans[v.id].invertible and witness is None:
            witness = v.id

    ok = elliptic and all(s.invertible for s in scans.values())
    return FredholmVerdict(
        domain_vertices=tuple(v.id for v in domain.vertices),
        elliptic=elliptic,
        weight=weight_value,
        constant=complex(c),
        scans=scans,
        is_fredholm=ok,
        witness=witness,
        note="symbol scan on the critical weight line",
    )


# ---------------------------------------------------------------------------
# straight-cone (two limit points) symbol families


def straight_cone_families(kernel: MellinKernel, weight: float, lambdas=None, lambda_max=DEFAULT_LAMBDA_MAX):
    """Symbol families at the two limit points of a compactified cone axis.

    The far end sees the reflected kernel; for dilation-invariant kernels
    symmetric under the flip the two families coincide.
    """
    near = mellin_transform(kernel, weight, lambdas, lambda_max=lambda_max)
    far = mellin_transform(reflect_kernel(kernel, weight), weight, lambdas, lambda_max=lambda_max)
    return near, far
