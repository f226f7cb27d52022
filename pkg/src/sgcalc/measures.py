"""Compactly supported measures on (0, inf) with exact Laplace transforms.

A measure is a finite sum of point atoms and piecewise-polynomial density
pieces, all supported strictly inside the open positive ray.  Everything
downstream (ray maxima, functional calculus, sweeps) evaluates the Laplace
transform of these objects, so the transform, moments and convolution are
computed in closed form here; quadrature only ever appears as a test oracle
or for the modulus of genuinely complex densities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import quad

ATOM_MERGE_TOL = 1e-12
_COEFF_DUST = 1e-14


@dataclass(frozen=True)
class Piece:
    """Polynomial density on [a, b] subset of (0, inf), coefficients in ascending powers."""

    a: float
    b: float
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if not (0.0 < self.a < self.b):
            raise ValueError(f"piece interval [{self.a}, {self.b}] must satisfy 0 < a < b")
        if len(self.coeffs) == 0:
            raise ValueError("piece needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        return npoly.polyval(t, np.asarray(self.coeffs))

    @property
    def is_real(self) -> bool:
        return all(abs(c.imag) == 0.0 for c in self.coeffs)


@dataclass(frozen=True)
class CompactMeasure:
    """Atoms plus piecewise-polynomial density, compactly supported in (0, inf)."""

    atoms: tuple[tuple[float, complex], ...] = ()
    pieces: tuple[Piece, ...] = ()

    def __post_init__(self):
        atoms = tuple((float(t), complex(w)) for t, w in self.atoms)
        for t, _ in atoms:
            if t <= 0.0:
                raise ValueError(f"atom location {t} must be > 0")
        pieces = tuple(p if isinstance(p, Piece) else Piece(*p) for p in self.pieces)
        ordered = sorted(pieces, key=lambda p: p.a)
        for p, q in zip(ordered, ordered[1:]):
            if q.a < p.b - 1e-15:
                raise ValueError(f"pieces [{p.a},{p.b}] and [{q.a},{q.b}] overlap")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", ordered)

    @property
    def is_zero(self) -> bool:
        return not self.atoms and not self.pieces

    @property
    def support_min(self) -> float:
        locs = [t for t, _ in self.atoms] + [p.a for p in self.pieces]
        return min(locs) if locs else math.inf

    @property
    def support_max(self) -> float:
        locs = [t for t, _ in self.atoms] + [p.b for p in self.pieces]
        return max(locs) if locs else 0.0

    @property
    def is_real(self) -> bool:
        return all(w.imag == 0.0 for _, w in self.atoms) and all(p.is_real for p in self.pieces)

    def __neg__(self) -> "CompactMeasure":
        return CompactMeasure(
            tuple((t, -w) for t, w in self.atoms),
            tuple(Piece(p.a, p.b, tuple(-c for c in p.coeffs)) for p in self.pieces),
        )

    def __add__(self, other: "CompactMeasure") -> "CompactMeasure":
        atoms = _merge_atoms(list(self.atoms) + list(other.atoms))
        pieces = _normalize_pieces(list(self.pieces) + list(other.pieces))
        return CompactMeasure(tuple(atoms), tuple(pieces))

    def __rmul__(self, c) -> "CompactMeasure":
        c = complex(c)
        return CompactMeasure(
            tuple((t, c * w) for t, w in self.atoms),
            tuple(Piece(p.a, p.b, tuple(c * ck for ck in p.coeffs)) for p in self.pieces),
        )


@dataclass(frozen=True)
class CompactDistribution:
    """Order-p distribution given by measures mu_0 ... mu_p acting on derivatives."""

    order: int
    components: tuple[CompactMeasure, ...]

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if len(self.components) != self.order + 1:
            raise ValueError(
                f"need {self.order + 1} component measures, got {len(self.components)}"
            )
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def support_min(self) -> float:
        return min(m.support_min for m in self.components)

    @property
    def support_max(self) -> float:
        return max(m.support_max for m in self.components)

    @property
    def is_real(self) -> bool:
        return all(m.is_real for m in self.components)


@dataclass(frozen=True)
class LaplaceValue:
    """A single evaluation of an entire Laplace transform."""

    argument: complex
    value: complex

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise ValueError("transform value must be finite")


# ---------------------------------------------------------------------------
# constructors


def dirac(t: float, weight: complex = 1.0) -> CompactMeasure:
    return CompactMeasure(atoms=((t, weight),))


def zero_measure() -> CompactMeasure:
    return CompactMeasure()


def from_atoms(pairs) -> CompactMeasure:
    return CompactMeasure(atoms=tuple(pairs))


def indicator(a: float, b: float, weight: complex = 1.0) -> CompactMeasure:
    """The density weight * chi_[a,b](t) dt."""
    return CompactMeasure(pieces=(Piece(a, b, (weight,)),))


def scale(mu: CompactMeasure, u: float) -> CompactMeasure:
    """Pushforward under t -> u*t, so laplace(scale(mu,u), z) == laplace(mu, u*z)."""
    if u <= 0:
        raise ValueError("scale factor must be positive")
    atoms = tuple((u * t, w) for t, w in mu.atoms)
    pieces = []
    for p in mu.pieces:
        # density q(tau) = p(tau/u) / u on [u*a, u*b]
        coeffs = tuple(c / u ** (k + 1) for k, c in enumerate(p.coeffs))
        pieces.append(Piece(u * p.a, u * p.b, coeffs))
    return CompactMeasure(atoms, tuple(pieces))


# ---------------------------------------------------------------------------
# basic functionals


def mass(mu: CompactMeasure) -> complex:
    """Total integral of mu, exact for atoms and polynomial pieces."""
    total = sum(w for _, w in mu.atoms)
    for p in mu.pieces:
        anti = npoly.polyint(np.asarray(p.coeffs))
        total += npoly.polyval(p.b, anti) - npoly.polyval(p.a, anti)
    return complex(total)


def moment(mu: CompactMeasure, k: int) -> complex:
    """Signed moment: integral of t^k dmu(t)."""
    total = sum(w * t**k for t, w in mu.atoms)
    for p in mu.pieces:
        c = npoly.polymulx(np.asarray(p.coeffs)) if k else np.asarray(p.coeffs)
        for _ in range(k - 1):
            c = npoly.polymulx(c)
        anti = npoly.polyint(c)
        total += npoly.polyval(p.b, anti) - npoly.polyval(p.a, anti)
    return complex(total)


def tv_moment(mu: CompactMeasure, k: int = 0) -> float:
    """Total-variation moment: integral of t^k d|mu|(t).

    Real polynomial pieces are split at their sign changes and integrated
    exactly; complex pieces fall back to adaptive quadrature of |p(t)| t^k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    total = sum(abs(w) * t**k for t, w in mu.atoms)
    for p in mu.pieces:
        total += _piece_tv_moment(p, k)
    return float(total)


def _piece_tv_moment(p: Piece, k: int) -> float:
    c = np.asarray(p.coeffs)
    if p.is_real:
        cr = c.real
        pts = [p.a, p.b]
        if len(cr) > 1 and np.max(np.abs(cr[1:])) > 0:
            for r in npoly.polyroots(cr):
                if abs(r.imag) < 1e-12 and p.a < r.real < p.b:
                    pts.append(float(r.real))
        pts = sorted(set(pts))
        tk = cr
        for _ in range(k):
            tk = npoly.polymulx(tk)
        anti = npoly.polyint(tk)
        total = 0.0
        for lo, hi in zip(pts, pts[1:]):
            seg = npoly.polyval(hi, anti) - npoly.polyval(lo, anti)
            total += abs(seg)
        return total
    val, err = quad(
        lambda t: abs(npoly.polyval(t, c)) * t**k, p.a, p.b, epsabs=1e-10, limit=200
    )
    return val


# ---------------------------------------------------------------------------
# Laplace transform


def laplace(mu: CompactMeasure, z):
    """L mu(z) = integral of e^{-z t} dmu(t).  Accepts scalar or ndarray z."""
    z_arr = np.asarray(z, dtype=complex)
    out = np.zeros(z_arr.shape, dtype=complex)
    for t, w in mu.atoms:
        out += w * np.exp(-z_arr * t)
    for p in mu.pieces:
        out += _piece_laplace(p, z_arr)
    if z_arr.shape == ():
        return complex(out)
    return out


def _piece_laplace(p: Piece, z: np.ndarray) -> np.ndarray:
    """Closed-form integral of p(t) e^{-z t} over [a, b], vectorized in z.

    Small |z|*b uses the Taylor series of e^{-zt} against exact polynomial
    moments (this branch covers z = 0); elsewhere the one-term-up recurrence
    for int t^k e^{-zt} dt applies.
    """
    out = np.zeros(z.shape, dtype=complex)
    small = np.abs(z) * p.b <= 0.5
    if np.any(small):
        zs = z[small] if z.shape else z
        acc = np.zeros(zs.shape, dtype=complex)
        term = np.ones(zs.shape, dtype=complex)
        for j in range(60):
            mj = _poly_interval_moment(p, j)
            contrib = term * mj
            acc += contrib
            if np.all(np.abs(contrib) <= 1e-18 * (np.abs(acc) + 1e-300)) and j > 4:
                break
            term = term * (-zs) / (j + 1)
        if z.shape:
            out[small] = acc
        else:
            out = acc
    if np.any(~small):
        zl = z[~small] if z.shape else z
        acc = np.zeros(zl.shape, dtype=complex)
        ea = np.exp(-zl * p.a)
        eb = np.exp(-zl * p.b)
        ik = (ea - eb) / zl
        acc += p.coeffs[0] * ik
        ak, bk = 1.0, 1.0
        for k in range(1, len(p.coeffs)):
            ak *= p.a
            bk *= p.b
            ik = (ak * ea - bk * eb) / zl + (k / zl) * ik
            acc += p.coeffs[k] * ik
        if z.shape:
            out[~small] = acc
        else:
            out = acc
    return out


def _poly_interval_moment(p: Piece, j: int) -> complex:
    """integral over [a,b] of t^j p(t) dt, exact."""
    c = np.asarray(p.coeffs)
    total = 0.0 + 0.0j
    for k, ck in enumerate(c):
        n = j + k + 1
        total += ck * (p.b**n - p.a**n) / n
    return total


def laplace_value(mu: CompactMeasure, z: complex) -> LaplaceValue:
    return LaplaceValue(argument=complex(z), value=laplace(mu, complex(z)))


def laplace_distribution(phi: CompactDistribution, z):
    """L phi(z) = sum_j (-z)^j L mu_j(z)."""
    z_arr = np.asarray(z, dtype=complex)
    out = np.zeros(z_arr.shape, dtype=complex)
    for j, mu_j in enumerate(phi.components):
        out += (-z_arr) ** j * laplace(mu_j, z_arr)
    if z_arr.shape == ():
        return complex(out)
    return out


def conj_reflect(mu: CompactMeasure) -> CompactMeasure:
    """The measure mu-bar; its transform is z -> conj(L mu(conj z))."""
    atoms = tuple((t, w.conjugate()) for t, w in mu.atoms)
    pieces = tuple(
        Piece(p.a, p.b, tuple(c.conjugate() for c in p.coeffs)) for p in mu.pieces
    )
    return CompactMeasure(atoms, pieces)


# ---------------------------------------------------------------------------
# convolution


def convolve(mu: CompactMeasure, nu: CompactMeasure) -> CompactMeasure:
    """Multiplicative convolution: laplace(convolve(mu,nu)) = laplace(mu)*laplace(nu)."""
    atoms = []
    pieces = []
    for t1, w1 in mu.atoms:
        for t2, w2 in nu.atoms:
            atoms.append((t1 + t2, w1 * w2))
    for t1, w1 in mu.atoms:
        for q in nu.pieces:
            pieces.append(_shift_piece(q, t1, w1))
    for t2, w2 in nu.atoms:
        for p in mu.pieces:
            pieces.append(_shift_piece(p, t2, w2))
    for p in mu.pieces:
        for q in nu.pieces:
            pieces.extend(_convolve_pieces(p, q))
    return CompactMeasure(tuple(_merge_atoms(atoms)), tuple(_normalize_pieces(pieces)))


def _merge_atoms(atoms):
    merged: list[tuple[float, complex]] = []
    for t, w in sorted(atoms, key=lambda a: a[0]):
        if merged and abs(t - merged[-1][0]) <= ATOM_MERGE_TOL:
            merged[-1] = (merged[-1][0], merged[-1][1] + w)
        else:
            merged.append((t, w))
    return [(t, w) for t, w in merged if w != 0]


def _shift_piece(p: Piece, tau: float, weight: complex) -> Piece:
    """weight * p(t - tau) on [a + tau, b + tau]."""
    n = len(p.coeffs)
    out = np.zeros(n, dtype=complex)
    for j, cj in enumerate(p.coeffs):
        for i in range(j + 1):
            out[i] += cj * math.comb(j, i) * (-tau) ** (j - i)
    return Piece(p.a + tau, p.b + tau, tuple(weight * c for c in out))


def _convolve_pieces(p: Piece, q: Piece) -> list[Piece]:
    """Exact piecewise-polynomial convolution of two density pieces.

    (p*q)(t) = int p(s) q(t-s) ds with s running over the overlap of [a1,b1]
    and [t-b2, t-a2].  The antiderivative in s of p(s) q(t-s) is a bivariate
    polynomial; on each breakpoint interval the integration limits are linear
    in t, so the result is polynomial there.
    """
    a1, b1, a2, b2 = p.a, p.b, q.a, q.b
    d1, d2 = p.degree, q.degree
    # C[i, j] = coefficient of s^i t^j in p(s) * q(t - s)
    C = np.zeros((d1 + d2 + 1, d2 + 1), dtype=complex)
    for jq, qj in enumerate(q.coeffs):
        for it in range(jq + 1):
            ii = jq - it
            coeff = qj * math.comb(jq, it) * (-1.0) ** ii
            for kp, pk in enumerate(p.coeffs):
                C[ii + kp, it] += coeff * pk
    # antiderivative in s
    R = np.zeros((C.shape[0] + 1, C.shape[1]), dtype=complex)
    for i in range(C.shape[0]):
        R[i + 1, :] = C[i, :] / (i + 1)

    def eval_at(slin):
        """Substitute s = slin(t) (linear in t) into R, returning coeffs in t."""
        total = np.zeros(1, dtype=complex)
        power = np.ones(1, dtype=complex)
        for i in range(R.shape[0]):
            total = npoly.polyadd(total, npoly.polymul(power, R[i, :]))
            power = npoly.polymul(power, slin)
        return total

    breaks = sorted({a1 + a2, a1 + b2, b1 + a2, b1 + b2})
    pieces = []
    for lo, hi in zip(breaks, breaks[1:]):
        if hi - lo <= 1e-13:
            continue
        tm = 0.5 * (lo + hi)
        lower = np.array([a1, 0.0]) if a1 >= tm - b2 else np.array([-b2, 1.0])
        upper = np.array([b1, 0.0]) if b1 <= tm - a2 else np.array([-a2, 1.0])
        coeffs = npoly.polysub(eval_at(upper), eval_at(lower))
        pieces.append(Piece(lo, hi, tuple(coeffs)))
    return pieces


def _normalize_pieces(pieces) -> list[Piece]:
    """Re-split possibly overlapping pieces on a common breakpoint grid and sum."""
    if not pieces:
        return []
    breaks = sorted({x for p in pieces for x in (p.a, p.b)})
    # collapse breakpoints that coincide to rounding
    keep = [breaks[0]]
    for x in breaks[1:]:
        if x - keep[-1] > 1e-13:
            keep.append(x)
    out = []
    scale_ref = max(
        max((abs(c) for c in p.coeffs), default=0.0) for p in pieces
    )
    dust = _COEFF_DUST * max(scale_ref, 1.0)
    for lo, hi in zip(keep, keep[1:]):
        tm = 0.5 * (lo + hi)
        acc = np.zeros(1, dtype=complex)
        for p in pieces:
            if p.a - 1e-13 <= tm <= p.b + 1e-13 and p.a < tm < p.b:
                acc = npoly.polyadd(acc, np.asarray(p.coeffs))
        acc = npoly.polytrim(acc, tol=0)
        if np.max(np.abs(acc)) > dust:
            out.append(Piece(lo, hi, tuple(acc)))
    return out


# ---------------------------------------------------------------------------
# JSON schema


def measure_to_dict(mu: CompactMeasure) -> dict:
    return {
        "atoms": [{"t": t, "re": w.real, "im": w.imag} for t, w in mu.atoms],
        "pieces": [
            {"a": p.a, "b": p.b, "coeffs": [[c.real, c.imag] for c in p.coeffs]}
            for p in mu.pieces
        ],
    }


def measure_from_dict(d: dict) -> CompactMeasure:
    atoms = tuple(
        (a["t"], complex(a["re"], a.get("im", 0.0))) for a in d.get("atoms", [])
    )
    pieces = tuple(
        Piece(p["a"], p["b"], tuple(complex(c[0], c[1]) for c in p["coeffs"]))
        for p in d.get("pieces", [])
    )
    return CompactMeasure(atoms, pieces)


def distribution_to_dict(phi: CompactDistribution) -> dict:
    return {
        "order": phi.order,
        "components": [measure_to_dict(m) for m in phi.components],
    }


def distribution_from_dict(d: dict) -> CompactDistribution:
    comps = tuple(measure_from_dict(m) for m in d["components"])
    return CompactDistribution(order=d["order"], components=comps)


def measure_to_json(mu: CompactMeasure) -> str:
    return json.dumps(measure_to_dict(mu), indent=2, sort_keys=True)


def measure_from_json(s: str) -> CompactMeasure:
    return measure_from_dict(json.loads(s))
