"""Corner calculus on cube models, corner smoothings and admissible coordinates."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from functools import lru_cache

import mpmath
import numpy as np
import sympy
from scipy.stats import qmc

from .errors import InvalidPartition, OutOfDomain, Unsupported
from .novikov import rat
from .report import Report


# ---------------------------------------------------------------- normalized corners

@dataclass(frozen=True, order=True)
class CornerComponent:
    """Frozen coordinates ``A`` (sorted) and their endpoints ``sigma``."""
    A: tuple
    sigma: tuple

    @property
    def k(self) -> int:
        return len(self.A)

    def as_dict(self) -> dict:
        return dict(zip(self.A, self.sigma))

    @classmethod
    def from_dict(cls, d: dict) -> "CornerComponent":
        keys = tuple(sorted(d))
        return cls(keys, tuple(d[i] for i in keys))


def normalized_corner(n: int, k: int, coords=None) -> list:
    coords = tuple(range(1, n + 1)) if coords is None else tuple(coords)
    if k < 0 or k > len(coords):
        return []
    return [CornerComponent(A, sig)
            for A in combinations(coords, k) for sig in product((0, 1), repeat=k)]


def covering_map(n: int, l: int, k: int):
    """pi_{l,k}: S_l(S_k(cube)) -> S_{k+l}(cube).

    A point of S_l(S_k) is a codim-k component (A, s) together with a
    codim-l component (B, s') of the remaining cube.  Returns the map table
    and the fiber-size histogram.
    """
    table = {}
    for a in normalized_corner(n, k):
        rest = [i for i in range(1, n + 1) if i not in a.A]
        for b in normalized_corner(n, l, rest):
            d = a.as_dict()
            d.update(b.as_dict())
            table[(a, b)] = CornerComponent.from_dict(d)
    fibers = Counter(table.values())
    targets = set(normalized_corner(n, k + l))
    hist = Counter(fibers.values())
    surjective = set(fibers) == targets
    return table, {"surjective": surjective, "histogram": dict(sorted(hist.items())),
                   "sources": len(table), "targets": len(targets)}


def covering_square_check(n: int, k1: int, k2: int, k3: int) -> bool:
    """pi_{k3,k1+k2} o S(pi_{k2,k1}) == pi_{k2+k3,k1} o pi_{k3,k2} on S_{k3}S_{k2}S_{k1}."""
    if k1 + k2 + k3 > n:
        raise ValueError("k1 + k2 + k3 must not exceed n")
    for a in normalized_corner(n, k1):
        r1 = [i for i in range(1, n + 1) if i not in a.A]
        for b in normalized_corner(n, k2, r1):
            r2 = [i for i in r1 if i not in b.A]
            for c in normalized_corner(n, k3, r2):
                ab = CornerComponent.from_dict({**a.as_dict(), **b.as_dict()})
                left = CornerComponent.from_dict({**ab.as_dict(), **c.as_dict()})
                bc = CornerComponent.from_dict({**b.as_dict(), **c.as_dict()})
                right = CornerComponent.from_dict({**a.as_dict(), **bc.as_dict()})
                if left != right or left.k != k1 + k2 + k3:
                    return False
    return True


# ---------------------------------------------------------------- collars

@dataclass(frozen=True)
class CollaredCube:
    n: int
    tau: Fraction

    def __post_init__(self):
        object.__setattr__(self, "tau", rat(self.tau))
        if self.n < 0 or self.tau <= 0:
            raise ValueError("need n >= 0 and tau > 0")

    def contains(self, x) -> bool:
        return len(x) == self.n and all(-self.tau <= rat(v) <= 1 + self.tau for v in x)

    def retract(self, x) -> tuple:
        return tuple(min(max(rat(v), Fraction(0)), Fraction(1)) for v in x)


def classify_point(C: CollaredCube, x):
    if not C.contains(x):
        raise OutOfDomain(f"{x} outside the collared cube")
    d = {}
    for i, v in enumerate(x, start=1):
        v = rat(v)
        if v < 0:
            d[i] = 0
        elif v > 1:
            d[i] = 1
    comp = CornerComponent.from_dict(d)
    return comp.k, comp


def stratum_volume(C: CollaredCube, comp: CornerComponent) -> Fraction:
    return C.tau ** comp.k


def partition_volume(C: CollaredCube) -> Fraction:
    """Sum of the box volumes of all strata; equals (1 + 2 tau)^n exactly."""
    return sum((stratum_volume(C, c) for k in range(C.n + 1) for c in normalized_corner(C.n, k)),
               Fraction(0))


def _faces(faces) -> frozenset:
    return frozenset((int(i), int(s)) for i, s in faces)


def partial_collar_box(n, faces, tau, base=None):
    """Collar the box ``base`` (default [0,1]^n) along the given faces."""
    tau = rat(tau)
    box = base if base is not None else ((0, 1),) * n
    return tuple((lo - tau if (i, 0) in faces else lo, hi + tau if (i, 1) in faces else hi)
                 for i, (lo, hi) in enumerate(box, start=1))


def _clamp(v, lo, hi):
    return min(max(v, lo), hi)


@lru_cache(maxsize=None)
def _coord_commutes(lo1, hi1, lo, hi) -> bool:
    """Clamping to [0,1] after clamping to [lo1,hi1] equals clamping to [0,1] on [lo,hi]."""
    pts = sorted({p for p in (lo, hi, 0, 1, lo1, hi1) if lo <= p <= hi})
    pts += [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    return all(_clamp(_clamp(p, lo1, hi1), 0, 1) == _clamp(p, 0, 1) for p in pts)


def partial_collar_commute(n: int, c1, c2, tau) -> bool:
    """Collaring along c1 then c2 equals collaring along their union, with equal retractions."""
    c1, c2, tau = _faces(c1), _faces(c2), rat(tau)
    if c1 & c2:
        raise InvalidPartition(f"face sets overlap: {sorted(c1 & c2)}")
    bu = partial_collar_box(n, c1 | c2, tau)
    for first, second in ((c1, c2), (c2, c1)):
        b1 = partial_collar_box(n, first, tau)
        if partial_collar_box(n, second, tau, base=b1) != bu:
            return False
        # retractions are coordinatewise piecewise linear; compare on breakpoints and midpoints
        if not all(_coord_commutes(*b1[i], *bu[i]) for i in range(n)):
            return False
    return True


# ---------------------------------------------------------------- smoothing

def _sum_zero_basis(k: int) -> np.ndarray:
    """Orthonormal basis (rows) of the sum-zero hyperplane of R^k."""
    rows = []
    for j in range(1, k):
        v = np.zeros(k)
        v[:j] = 1.0
        v[j] = -float(j)
        rows.append(v / np.linalg.norm(v))
    return np.array(rows).reshape(k - 1, k)


def _phi2(t: np.ndarray) -> np.ndarray:
    r = np.hypot(t[:, 0], t[:, 1])
    theta = np.arctan2(t[:, 1], t[:, 0])
    phi = 2 * theta - np.pi / 2
    return np.stack([r * np.sin(phi), r * np.cos(phi)], axis=1)


def _phi2_inv(y: np.ndarray) -> np.ndarray:
    r = np.hypot(y[:, 0], y[:, 1])
    phi = np.arctan2(y[:, 0], y[:, 1])
    theta = (phi + np.pi / 2) / 2
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


_B3 = _sum_zero_basis(3)


def _gauge(q: np.ndarray) -> np.ndarray:
    return np.max(-3.0 * q, axis=1)


def _phi3(t: np.ndarray) -> np.ndarray:
    s = t.sum(axis=1)
    out = np.zeros((len(t), 3))
    nz = s > 0
    p = t[nz] / s[nz, None]
    q = p - 1.0 / 3.0
    nq = np.linalg.norm(q, axis=1)
    g = _gauge(q)
    y = np.zeros_like(q)
    ok = nq > 0
    y[ok] = q[ok] * (g[ok] / nq[ok])[:, None]
    yy = y @ _B3.T
    # |y| = g and 1 - g = 3 min p, so the height vanishes exactly on the boundary
    h = np.sqrt(3.0 * p.min(axis=1) * (1.0 + g))
    out[nz, :2] = yy * s[nz, None]
    out[nz, 2] = h * s[nz]
    return out


def _phi3_inv(z: np.ndarray) -> np.ndarray:
    s = np.linalg.norm(z, axis=1)
    out = np.zeros((len(z), 3))
    nz = s > 0
    y = (z[nz, :2] / s[nz, None]) @ _B3
    ny = np.linalg.norm(y, axis=1)
    q = np.zeros_like(y)
    ok = ny > 0
    u = y[ok] / ny[ok, None]
    q[ok] = u * (ny[ok] / _gauge(u))[:, None]
    out[nz] = (q + 1.0 / 3.0) * s[nz, None]
    return out


@dataclass(frozen=True)
class SmoothingMap:
    """Homogeneous Perm(k)-equivariant map [0,inf)^k -> R^{k-1} x [0,inf)."""
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.k > 3:
            raise Unsupported("corner smoothing is implemented for k <= 3")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, self.k)
        if np.any(t < 0):
            raise OutOfDomain("smoothing is defined on the closed positive orthant")
        if self.k == 1:
            return t.copy()
        return _phi2(t) if self.k == 2 else _phi3(t)

    def inverse(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float).reshape(-1, self.k)
        if self.k == 1:
            return z.copy()
        return _phi2_inv(z) if self.k == 2 else _phi3_inv(z)

    def representation(self, perm) -> np.ndarray:
        """Action of a permutation on the x-coordinates (the sum-zero hyperplane)."""
        if self.k == 1:
            return np.zeros((0, 0))
        B = _sum_zero_basis(self.k)
        P = np.eye(self.k)[list(perm)]
        return B @ P @ B.T


def smoothing_eval(S: SmoothingMap | int, t):
    S = S if isinstance(S, SmoothingMap) else SmoothingMap(int(S))
    z = S.evaluate(np.asarray(t, dtype=float))[0]
    return tuple(float(v) for v in z[:-1]), float(z[-1])


def _samples(k: int, count: int) -> np.ndarray:
    if k == 1:
        return np.linspace(0.0, 4.0, count).reshape(-1, 1)
    pts = qmc.Halton(d=k, scramble=False).random(count + 1)[1:]
    return 4.0 * pts


def smoothing_property_check(S: SmoothingMap | int, samples: int = 10_000, tol: float = 1e-12) -> Report:
    S = S if isinstance(S, SmoothingMap) else SmoothingMap(int(S))
    k = S.k
    t = _samples(k, samples)
    z = S.evaluate(t)
    scale = np.maximum(1.0, np.abs(t).max(axis=1))
    viol = {}
    for c in (0.5, 2.0, 3.0):
        d = np.abs(S.evaluate(c * t) - c * z).max(axis=1) / (c * scale)
        viol[f"homogeneity c={c}"] = float(d.max())
    eq = 0.0
    for perm in permutations(range(k)):
        zp = S.evaluate(t[:, list(perm)])
        R = S.representation(perm)
        want = np.concatenate([z[:, :-1] @ R.T, z[:, -1:]], axis=1) if k > 1 else z
        eq = max(eq, float((np.abs(zp - want).max(axis=1) / scale).max()))
    viol["equivariance"] = eq
    bd = t.copy()
    bd[np.arange(len(bd)), np.arange(len(bd)) % k] = 0.0
    viol["boundary"] = float((np.abs(S.evaluate(bd)[:, -1]) / scale).max())
    viol["origin"] = float(np.abs(S.evaluate(np.zeros((1, k)))).max())
    back = S.inverse(z)
    viol["injectivity"] = float((np.abs(back - t).max(axis=1) / scale).max())
    viol["positivity"] = float(max(0.0, -z[:, -1].min()))
    rep = Report("corner smoothing conditions")
    rep.info = {"k": k, "samples": samples, "tol": tol, "max_violation": viol}
    for name, v in viol.items():
        if not v < tol:
            rep.failures.append((name, v))
    return rep


# ---------------------------------------------------------------- admissible coordinates

_T = sympy.Symbol("T", positive=True)


def _parse_change(change):
    """``change`` is f in T' = T + f(T): a sympy expression or a string in T."""
    if isinstance(change, str):
        return sympy.sympify(change, locals={"T": _T})
    return sympy.sympify(change)


def admissible_coord_check(change="0", S_range=(5, 40), orders=4, points=36, rate=0.5,
                           h=1e-4, dps=50) -> Report:
    """Decay of t' - t in S = 1/t for T' = T + f(T), and the s = 1/T curvature.

    With T = e^S and u = f(T)/T, t' - t = -log1p(u) / (S (S + log1p(u))).
    The m-th S-derivative is required to sit under C e^{-rate S} on the sweep
    with a non-growing ratio toward the far end.
    """
    f = _parse_change(change)
    rep = Report("admissible coordinate change")
    info = {"change": str(f)}
    with mpmath.workdps(dps):
        fT = sympy.lambdify(_T, f, modules="mpmath")

        def g(S):
            T = mpmath.exp(S)
            L = mpmath.log1p(fT(T) / T)
            return -L / (S * (S + L))

        grid = [mpmath.mpf(S_range[0]) + (S_range[1] - S_range[0]) * mpmath.mpf(j) / (points - 1)
                for j in range(points)]
        envelopes = {}
        for m in range(orders):
            if f == 0:
                envelopes[m] = 0.0
                continue
            ratios = [abs(mpmath.diff(g, S, m)) * mpmath.exp(rate * S) for S in grid]
            C = max(ratios)
            envelopes[m] = float(C)
            if not mpmath.isfinite(C) or ratios[-1] > ratios[0] * (1 + mpmath.mpf("1e-9")):
                rep.failures.append(("decay", m, float(C)))
        info["envelope_C"] = envelopes

        def sprime(s):
            # boundary s = 0 (T = infinity) is fixed by the change
            if s == 0:
                return mpmath.mpf(0)
            return 1 / (1 / s + fT(1 / s))

        hh = mpmath.mpf(h)
        try:
            d2 = (sprime(hh) - 2 * sprime(0) + sprime(-hh)) / hh ** 2
            # changes not defined for negative s (e.g. through log T) have no two-sided estimate
            info["second_derivative_at_0"] = float(mpmath.re(d2)) if mpmath.im(d2) == 0 else None
        except (ZeroDivisionError, OverflowError, ValueError):
            info["second_derivative_at_0"] = None
    rep.info = info
    return rep
