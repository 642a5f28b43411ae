"""Boundary profiles ``f0`` on the real line and their second-derivative measures.

A :class:`BoundaryProfile` is continuous, piecewise linear between its
breakpoints except on optional cubic patches, and affine outside the
outermost breakpoints.  Profiles built from admissible sequences keep exact
:class:`~fractions.Fraction` data.

The eigenfunction generated by a profile is ``F = f / sqrt(rho)`` where
``f -> f0`` at the boundary; evaluation lives in :mod:`hjsde.joyce`.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BisectionStall,
    DegenerateSpacing,
    NoSignChange,
    NoZeroOnArc,
    NotCanonical,
    OnSupport,
    PreconditionError,
    SupportTouchesCanonicalRegion,
)
from .halfplane import INF, RHO_MIN
from .resolution import AdmissibleSequence, QuotientData, minimal_sequence, self_intersections

__all__ = [
    "CubicPatch",
    "BoundaryProfile",
    "SpectralWeights",
    "ProfileViolation",
    "ZeroSetTrace",
    "AffinePiece",
    "canonical_profile",
    "canonical_ys",
    "canonical_atoms",
    "canonical_weights",
    "boundary_zero",
    "odd_extension",
    "ch_profile",
    "boundary_value",
    "spectral_weights",
    "f1_coefficient",
    "trace_zero",
    "validate_inf1",
    "perturb_profile",
    "hat_function",
    "bump_patch",
    "affine_pieces",
    "parse_number",
    "format_number",
]


def parse_number(x):
    """Strings become exact rationals (``"3/8"``), JSON numbers stay floats."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)


def _exactify(x):
    if isinstance(x, (bool, np.bool_)):
        raise PreconditionError("boolean is not a number")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, np.floating):
        return float(x)
    return x


def format_number(x) -> str | float:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, int):
        return str(x)
    return float(x)


@dataclass(frozen=True)
class CubicPatch:
    """``f0(y) = c0 + c1 t + c2 t^2 + c3 t^3`` with ``t = y - a`` on ``[a, b]``."""

    a: object
    b: object
    coeffs: tuple

    def __post_init__(self):
        if not self.a < self.b:
            raise PreconditionError(f"patch interval [{self.a}, {self.b}] is empty")
        c = tuple(self.coeffs) + (0,) * (4 - len(self.coeffs))
        if len(c) != 4:
            raise PreconditionError("cubic patch needs at most 4 coefficients")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, y, nu: int = 0):
        t = y - self.a
        c0, c1, c2, c3 = self.coeffs
        if nu == 0:
            return c0 + t * (c1 + t * (c2 + t * c3))
        if nu == 1:
            return c1 + t * (2 * c2 + 3 * c3 * t)
        if nu == 2:
            return 2 * c2 + 6 * c3 * t
        if nu == 3:
            return 6 * c3 + 0 * t
        return 0 * t

    def shifted(self, a_new, b_new) -> "CubicPatch":
        """Same polynomial re-expanded on a subinterval."""
        s = a_new - self.a
        c0, c1, c2, c3 = self.coeffs
        return CubicPatch(a_new, b_new, (
            c0 + s * (c1 + s * (c2 + s * c3)),
            c1 + s * (2 * c2 + 3 * c3 * s),
            c2 + 3 * c3 * s,
            c3,
        ))

    @property
    def is_linear(self) -> bool:
        return self.coeffs[2] == 0 and self.coeffs[3] == 0


@dataclass(frozen=True)
class AffinePiece:
    """``f0 = mu * eta - nu`` on ``(lo, hi)``; infinite ends allowed."""

    lo: object
    hi: object
    mu: object
    nu: object


@dataclass(frozen=True)
class BoundaryProfile:
    breakpoints: tuple
    values: tuple
    left_slope: object = 0
    right_slope: object = 0
    smooth_pieces: tuple = ()
    kind: str = "custom"
    reference: AdmissibleSequence | None = None
    center: Fraction | None = None

    def __post_init__(self):
        bp = tuple(_exactify(y) for y in self.breakpoints)
        vals = tuple(_exactify(v) for v in self.values)
        object.__setattr__(self, "left_slope", _exactify(self.left_slope))
        object.__setattr__(self, "right_slope", _exactify(self.right_slope))
        if len(bp) == 0 or len(bp) != len(vals):
            raise PreconditionError("need equally many breakpoints and values (at least one)")
        if any(not bp[i] < bp[i + 1] for i in range(len(bp) - 1)):
            raise PreconditionError("breakpoints must be strictly increasing")
        patches = tuple(sorted(self.smooth_pieces, key=lambda c: c.a))
        for c in patches:
            try:
                i = bp.index(c.a)
            except ValueError:
                raise PreconditionError(f"patch start {c.a} is not a breakpoint") from None
            if i + 1 >= len(bp) or bp[i + 1] != c.b:
                raise PreconditionError(f"patch [{c.a}, {c.b}] must span adjacent breakpoints")
            scale = 1.0 + abs(float(vals[i])) + abs(float(vals[i + 1]))
            if abs(float(c(c.a) - vals[i])) > 1e-12 * scale or abs(float(c(c.b) - vals[i + 1])) > 1e-12 * scale:
                raise PreconditionError(f"patch on [{c.a}, {c.b}] is discontinuous at its ends")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "smooth_pieces", patches)

    # -- structure ----------------------------------------------------
    @property
    def is_exact(self) -> bool:
        nums = list(self.breakpoints) + list(self.values) + [self.left_slope, self.right_slope]
        return all(isinstance(x, (int, Fraction)) for x in nums) and not self.smooth_pieces

    def patch_on(self, i: int) -> CubicPatch | None:
        """Patch covering ``[y(i), y(i+1)]`` if any."""
        a = self.breakpoints[i]
        for c in self.smooth_pieces:
            if c.a == a:
                return c
        return None

    def chord_slopes(self) -> list:
        """Slopes of the unbounded ends and of the chords between breakpoints."""
        bp, v = self.breakpoints, self.values
        inner = [(v[i + 1] - v[i]) / (bp[i + 1] - bp[i]) for i in range(len(bp) - 1)]
        return [self.left_slope] + inner + [self.right_slope]

    def end_data(self):
        """``(mu, nu)`` at ``-inf`` and ``+inf`` with ``f0 = mu eta - nu``."""
        bp, v = self.breakpoints, self.values
        nu_l = self.left_slope * bp[0] - v[0]
        nu_r = self.right_slope * bp[-1] - v[-1]
        return (self.left_slope, nu_l), (self.right_slope, nu_r)

    @property
    def odd_at_infinity(self) -> bool:
        (mu_l, nu_l), (mu_r, nu_r) = self.end_data()
        if self.is_exact:
            return mu_r == -mu_l and nu_r == -nu_l
        scale = 1.0 + abs(float(mu_l)) + abs(float(nu_l))
        return abs(float(mu_r + mu_l)) <= 1e-13 * scale and abs(float(nu_r + nu_l)) <= 1e-13 * scale

    def skeleton(self):
        """Chord polygon as ``A eta + B + (1/2) sum w_j |eta - y_j|``.

        Returns ``(A, B, [(y_j, w_j)])`` where ``w_j`` are chord-slope jumps.
        """
        s = self.chord_slopes()
        atoms = [(y, s[i + 1] - s[i]) for i, y in enumerate(self.breakpoints)]
        A = (self.left_slope + self.right_slope) / 2
        _, (_, nu_r) = self.end_data()
        B = sum((w * y for y, w in atoms), 0) / 2 - nu_r
        return A, B, atoms

    @property
    def linear_coefficient(self):
        return self.skeleton()[0]

    @property
    def infinity_weight(self):
        return 2 * self.skeleton()[1]

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        d = {
            "breakpoints": [{"y": format_number(y), "value": format_number(v)}
                            for y, v in zip(self.breakpoints, self.values)],
            "left_slope": format_number(self.left_slope),
            "right_slope": format_number(self.right_slope),
            "infinity_weight": format_number(self.infinity_weight),
            "smooth_pieces": [{"interval": [format_number(c.a), format_number(c.b)],
                               "cubic": [format_number(x) for x in c.coeffs]}
                              for c in self.smooth_pieces],
            "kind": self.kind,
        }
        if self.reference is not None:
            d["reference"] = self.reference.to_json()
        if self.center is not None:
            d["center"] = format_number(self.center)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryProfile":
        try:
            bps = d["breakpoints"]
            ys = [parse_number(b["y"]) for b in bps]
            vs = [parse_number(b["value"]) for b in bps]
            patches = [CubicPatch(parse_number(s["interval"][0]), parse_number(s["interval"][1]),
                                  tuple(parse_number(x) for x in s["cubic"]))
                       for s in d.get("smooth_pieces", [])]
            ref = d.get("reference")
            prof = cls(
                breakpoints=tuple(ys),
                values=tuple(vs),
                left_slope=parse_number(d.get("left_slope", 0)),
                right_slope=parse_number(d.get("right_slope", 0)),
                smooth_pieces=tuple(patches),
                kind=d.get("kind", "custom"),
                reference=AdmissibleSequence(tuple(map(tuple, ref))) if ref is not None else None,
                center=parse_number(d["center"]) if "center" in d else None,
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, PreconditionError):
                raise
            raise PreconditionError(f"malformed profile: {exc}") from exc
        if "infinity_weight" in d:
            given = parse_number(d["infinity_weight"])
            if abs(float(given - prof.infinity_weight)) > 1e-12 * (1 + abs(float(given))):
                raise PreconditionError(
                    f"infinity_weight {given} is inconsistent with the breakpoint data "
                    f"(which imply {prof.infinity_weight})")
        return prof

    @classmethod
    def from_json(cls, text: str) -> "BoundaryProfile":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpectralWeights:
    """Second derivative of ``f0`` as a measure.

    ``atoms`` are ``(y, w)`` point masses (true one-sided slope jumps),
    ``densities`` are ``(a, b, (d0, d1))`` with ``f0'' = d0 + d1 (y - a)`` on
    patches, ``infinity_weight`` is the coefficient of the ``y = inf`` basic
    solution and ``linear_coefficient`` the leftover ``eta`` term.
    """

    atoms: tuple
    densities: tuple = ()
    infinity_weight: object = 0
    linear_coefficient: object = 0

    @property
    def finite_total(self):
        total = sum((w for _, w in self.atoms), 0)
        for a, b, (d0, d1) in self.densities:
            L = b - a
            total += d0 * L + d1 * L * L / 2
        return total

    def all_atoms(self):
        out = list(self.atoms)
        if self.infinity_weight != 0:
            out.append((INF, self.infinity_weight))
        return out


@dataclass(frozen=True)
class ProfileViolation:
    clause: str
    detail: str

    def __str__(self):
        return f"{self.clause}: {self.detail}"


@dataclass
class ZeroSetTrace:
    b: np.ndarray
    t: np.ndarray
    polyline: np.ndarray  # (n, 2) rows of (rho, eta)
    residuals: np.ndarray  # |sqrt(rho) F| at the vertices
    boundary_zero: object
    sign_changes: list = field(default_factory=list)

    @property
    def defects(self) -> np.ndarray:
        return np.abs(self.t - np.pi / 2)

    @property
    def orthogonality_defect(self) -> float:
        """Angle between the zero set and the vertical at the smallest radius."""
        return float(self.defects[np.argmin(self.b)])


# -- canonical and related profiles -------------------------------------------

def canonical_ys(seq: AdmissibleSequence) -> list[Fraction]:
    """``y_j = (n_{j+1} - n_j) / (m_{j+1} - m_j)`` for ``j = 0 .. k+1`` (decreasing)."""
    pr = seq.closed
    out = []
    for j in range(len(pr) - 1):
        dm = pr[j + 1][0] - pr[j][0]
        if dm == 0:
            raise DegenerateSpacing(f"m_{j} = m_{j + 1}; breakpoint y_{j} undefined")
        out.append(Fraction(pr[j + 1][1] - pr[j][1], dm))
    return out


def canonical_weights(seq: AdmissibleSequence) -> list[int]:
    pr = seq.closed
    return [pr[j][0] - pr[j + 1][0] for j in range(len(pr) - 1)]


def canonical_atoms(seq: AdmissibleSequence) -> list[tuple[Fraction, int]]:
    """Atoms ``(y_j, w_j)`` of the canonical potential with coincident points merged.

    Unlike :func:`canonical_profile` this never rejects a sequence: repeated
    points (from ``e_j = 2``) simply add their weights, which still gives an
    eigenfunction, just not an admissible profile.
    """
    pr = seq.closed
    acc: dict[Fraction, int] = {}
    for j in range(len(pr) - 1):
        dm = pr[j + 1][0] - pr[j][0]
        y = Fraction(pr[j + 1][1] - pr[j][1], dm)
        acc[y] = acc.get(y, 0) + pr[j][0] - pr[j + 1][0]
    return sorted((y, w) for y, w in acc.items() if w != 0)


def canonical_profile(seq: AdmissibleSequence) -> BoundaryProfile:
    """Piecewise-linear ``f0 = m_j eta - n_j`` on ``[y_j, y_{j-1}]``, ``+-1`` at the ends.

    Requires every self-intersection number ``e_j >= 3``, otherwise two
    breakpoints coincide (or fall out of order).
    """
    e = self_intersections(seq)
    bad = [j + 1 for j, x in enumerate(e) if x <= 2]
    if bad:
        raise DegenerateSpacing(
            f"self-intersection numbers {e} include e_j <= 2 at j={bad}; the canonical "
            "profile needs |S_j . S_j| >= 3 for every exceptional curve")
    ys = canonical_ys(seq)
    pr = seq.closed
    vals = [pr[j][0] * ys[j] - pr[j][1] for j in range(len(ys))]
    return BoundaryProfile(
        breakpoints=tuple(reversed(ys)),
        values=tuple(reversed(vals)),
        left_slope=Fraction(0),
        right_slope=Fraction(0),
        kind="canonical",
        reference=seq,
        center=Fraction(seq.q, seq.p),
    )


def ch_profile(data: QuotientData) -> BoundaryProfile:
    """``0`` left of ``q/p``, ``1`` right of ``(q+1)/p``, linear in between."""
    if not isinstance(data, QuotientData):
        data = QuotientData(*data)
    p, q = data.p, data.q
    return BoundaryProfile(
        breakpoints=(Fraction(q, p), Fraction(q + 1, p)),
        values=(Fraction(0), Fraction(1)),
        kind="ch",
        reference=minimal_sequence(data) if p > 1 else None,
        center=Fraction(q, p),
    )


def odd_extension(profile: BoundaryProfile, center=None) -> BoundaryProfile:
    """Keep ``f0`` right of ``c`` and set ``f0(c - s) = -f0(c + s)``."""
    if profile.kind != "canonical" or profile.reference is None:
        raise NotCanonical("odd extension is defined for canonical profiles only")
    c = boundary_zero(profile)
    if center is not None and Fraction(center) != c:
        raise NotCanonical(f"center {center} is not the boundary zero {c}")
    right = [(y, v) for y, v in zip(profile.breakpoints, profile.values) if y > c]
    left = [(2 * c - y, -v) for y, v in reversed(right)]
    pts = left + right
    return BoundaryProfile(
        breakpoints=tuple(y for y, _ in pts),
        values=tuple(v for _, v in pts),
        left_slope=-profile.right_slope,
        right_slope=profile.right_slope,
        kind="odd",
        reference=profile.reference,
        center=c,
    )


# -- evaluation --------------------------------------------------------------

def _locate(bp, x):
    """Index ``i`` with ``bp[i-1] <= x < bp[i]`` (0 left of all, len at the right)."""
    return bisect.bisect_right(bp, x)


def _value_scalar(profile: BoundaryProfile, x):
    bp, v = profile.breakpoints, profile.values
    i = _locate(bp, x)
    if i == 0:
        return v[0] + profile.left_slope * (x - bp[0])
    if i == len(bp):
        return v[-1] + profile.right_slope * (x - bp[-1])
    patch = profile.patch_on(i - 1)
    if patch is not None:
        return patch(x)
    y0, y1 = bp[i - 1], bp[i]
    return v[i - 1] + (v[i] - v[i - 1]) * (x - y0) / (y1 - y0)


def boundary_value(profile: BoundaryProfile, eta):
    """``f0(eta)``; exact for rational input on exact profiles, vectorized for arrays."""
    if isinstance(eta, np.ndarray):
        return np.array([float(_value_scalar(profile, float(x))) for x in eta.ravel()]).reshape(eta.shape)
    return _value_scalar(profile, eta)


def affine_pieces(profile: BoundaryProfile) -> list[AffinePiece]:
    """Linear pieces ``(lo, hi, mu, nu)`` in increasing order (patches omitted)."""
    bp, v = profile.breakpoints, profile.values
    s = profile.chord_slopes()
    out = [AffinePiece(-INF, bp[0], s[0], s[0] * bp[0] - v[0])]
    for i in range(len(bp) - 1):
        if profile.patch_on(i) is None:
            out.append(AffinePiece(bp[i], bp[i + 1], s[i + 1], s[i + 1] * bp[i] - v[i]))
    out.append(AffinePiece(bp[-1], INF, s[-1], s[-1] * bp[-1] - v[-1]))
    return out


def spectral_weights(profile: BoundaryProfile) -> SpectralWeights:
    bp = profile.breakpoints
    n = len(bp)
    s = profile.chord_slopes()
    atoms = []
    for i, y in enumerate(bp):
        left = s[i]
        right = s[i + 1]
        if i >= 1 and (pl := profile.patch_on(i - 1)) is not None:
            left = pl(y, 1)
        if i < n - 1 and (pr := profile.patch_on(i)) is not None:
            right = pr(y, 1)
        w = right - left
        if w != 0:
            atoms.append((y, w))
    dens = []
    for c in profile.smooth_pieces:
        _, c1, c2, c3 = c.coeffs
        if c2 != 0 or c3 != 0:
            dens.append((c.a, c.b, (2 * c2, 6 * c3)))
    A, B, _ = profile.skeleton()
    return SpectralWeights(tuple(atoms), tuple(dens), 2 * B, A)


def f1_coefficient(profile: BoundaryProfile, eta) -> float:
    """``sum_j w_j / |eta - y_j|`` over the finite part of ``f0''``."""
    sw = spectral_weights(profile)
    for y, _ in sw.atoms:
        if eta == y:
            raise OnSupport(f"eta = {eta} is an atom of f0''")
    for a, b, _ in sw.densities:
        if a <= eta <= b:
            raise OnSupport(f"eta = {eta} lies on a smooth piece [{a}, {b}]")
    exact = isinstance(eta, (int, Fraction)) and all(isinstance(w, (int, Fraction)) for _, w in sw.atoms)
    total = sum((w / abs(eta - y) for y, w in sw.atoms), Fraction(0) if exact else 0.0)
    if sw.densities:
        from scipy.integrate import quad
        total = float(total)
        for a, b, (d0, d1) in sw.densities:
            a, b = float(a), float(b)
            val, _ = quad(lambda y: (float(d0) + float(d1) * (y - a)) / abs(eta - y), a, b,
                          epsabs=1e-14, epsrel=1e-13)
            total += val
    return total


def boundary_zero(profile: BoundaryProfile):
    """Right end of ``{f0 <= 0}`` where ``f0`` turns positive.

    Exact for exact profiles.  Raises :class:`NoSignChange` if ``f0`` never
    becomes positive after being non-positive.
    """
    bp, v = profile.breakpoints, profile.values
    if profile.left_slope < 0 or (profile.left_slope == 0 and v[0] > 0):
        raise NoSignChange("f0 is positive at -infinity")
    for i in range(len(bp)):
        if v[i] > 0:
            if i == 0:
                if profile.left_slope == 0:
                    raise NoSignChange("f0 is positive everywhere")
                return bp[0] - v[0] / profile.left_slope
            lo, hi = bp[i - 1], bp[i]
            patch = profile.patch_on(i - 1)
            if patch is None:
                if v[i - 1] == 0:
                    return lo
                return lo - v[i - 1] * (hi - lo) / (v[i] - v[i - 1])
            return brentq(lambda x: float(patch(x)), float(lo), float(hi), xtol=1e-15, rtol=4e-16)
    if profile.right_slope > 0:
        return bp[-1] - v[-1] / profile.right_slope
    raise NoSignChange("f0 never becomes positive")


# -- zero set -----------------------------------------------------------------

def _arc_f(profile, eta0, b, t):
    from .joyce import eval_f

    t = np.atleast_1d(np.asarray(t, dtype=float))
    rho = np.maximum(b * np.sin(t), RHO_MIN)
    eta = float(eta0) + b * np.cos(t)
    return eval_f(profile, rho, eta)


def _trace_one(args):
    profile, eta0, b, n_check, xtol = args
    t_lo = max(1e-9, 2 * RHO_MIN / b)
    t_hi = np.pi - t_lo
    ts = np.linspace(t_lo, t_hi, n_check)
    fs = _arc_f(profile, eta0, b, ts)
    sg = np.sign(fs)
    nz = sg[sg != 0]
    changes = int(np.count_nonzero(np.diff(nz) != 0))
    exact = np.flatnonzero(fs == 0)
    if changes == 0 and exact.size == 0:
        raise NoZeroOnArc(f"no sign change of F on the arc of radius {b}")
    if changes > 1:
        raise NoZeroOnArc(f"{changes} sign changes of F on the arc of radius {b}; zero not unique")
    if exact.size:
        t0 = float(ts[exact[0]])
    else:
        i = int(np.flatnonzero(np.diff(np.sign(fs)) != 0)[0])
        g = lambda t: float(_arc_f(profile, eta0, b, t)[0])
        try:
            t0, res = brentq(g, ts[i], ts[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps,
                             maxiter=200, full_output=True, disp=False)
        except (RuntimeError, ValueError) as exc:
            raise BisectionStall(f"root search stalled on the arc of radius {b}: {exc}") from exc
        if not res.converged:
            raise BisectionStall(f"root search stalled on the arc of radius {b}")
    f0 = float(_arc_f(profile, eta0, b, t0)[0])
    return t0, abs(f0), changes


def trace_zero(profile: BoundaryProfile, b_grid: Sequence[float], n_check: int = 100,
               workers: int | None = 1, xtol: float = 1e-14) -> ZeroSetTrace:
    """Zero of ``F`` on each half circle of radius ``b`` about the boundary zero.

    The arc is ``(rho, eta) = (b sin t, eta0 + b cos t)``; ``t = 0`` is the
    right end.  Uniqueness is checked by counting sign changes at
    ``n_check`` sample points.
    """
    from .parallel import pmap

    eta0 = boundary_zero(profile)
    bs = np.asarray(sorted(float(b) for b in b_grid))
    if np.any(bs <= 0):
        raise PreconditionError("arc radii must be positive")
    results = pmap(_trace_one, [(profile, eta0, b, n_check, xtol) for b in bs], workers)
    t = np.array([r[0] for r in results])
    poly = np.column_stack([bs * np.sin(t), float(eta0) + bs * np.cos(t)])
    return ZeroSetTrace(bs, t, poly, np.array([r[1] for r in results]), eta0,
                        [r[2] for r in results])


# -- theorem hypotheses -------------------------------------------------------

def _cheb(a, b, n=8):
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))
    return [a + (b - a) * (1 + xi) / 2 for xi in x] + [a, b]


def validate_inf1(profile: BoundaryProfile) -> list[ProfileViolation]:
    """Hypotheses for the infinite-dimensional family; an empty list means ok.

    Clauses: canonical right of ``q/p - delta``; ``-1`` left of a finite ``a``;
    continuity; strictly increasing and convex on ``[a, q/p]``; odd at infinity.
    """
    out = []
    seq = profile.reference
    if seq is None:
        return [ProfileViolation("reference", "profile carries no admissible sequence to compare with")]
    try:
        can = canonical_profile(seq)
    except DegenerateSpacing as exc:
        return [ProfileViolation("reference", str(exc))]
    c = Fraction(seq.q, seq.p)
    bp, v = profile.breakpoints, profile.values

    # both sides are linear between c - delta and the first breakpoints past c,
    # so equality on [x*, inf) is decided at finitely many points
    x_star = max([y for y in bp if y < c] + [y for y in can.breakpoints if y < c])
    pts = sorted({y for y in list(bp) + list(can.breakpoints) if y >= x_star})
    patch_right = [p for p in profile.smooth_pieces if p.b > x_star]
    if patch_right:
        out.append(ProfileViolation("canonical", f"smooth piece on [{patch_right[0].a}, {patch_right[0].b}] "
                                                 f"reaches into the canonical region near {c}"))
    else:
        mismatch = [y for y in pts if abs(float(_value_scalar(profile, y) - _value_scalar(can, y))) > 1e-12]
        if mismatch or profile.right_slope != can.right_slope:
            where = mismatch[0] if mismatch else "+inf"
            out.append(ProfileViolation("canonical", f"profile differs from the canonical one at {where}"))

    # -1 left of a finite a
    if profile.left_slope != 0 or abs(float(v[0]) + 1) > 1e-12:
        out.append(ProfileViolation("left-constant", "f0 is not identically -1 left of a finite point"))
        a_idx = 0
    else:
        a_idx = 0
        while a_idx + 1 < len(bp) and bp[a_idx + 1] < c and profile.patch_on(a_idx) is None \
                and abs(float(v[a_idx + 1]) + 1) <= 1e-12:
            a_idx += 1

    # continuity: patches are checked against breakpoint values at construction
    for p in profile.smooth_pieces:
        i = bp.index(p.a)
        if abs(float(p(p.a) - v[i])) > 1e-12 or abs(float(p(p.b) - v[i + 1])) > 1e-12:
            out.append(ProfileViolation("continuity", f"jump at an end of [{p.a}, {p.b}]"))

    # strictly increasing and convex on [a, c]
    inc_bad, cvx_bad = [], []
    prev_slope = None
    for i in range(a_idx, len(bp)):
        lo = bp[i]
        if lo >= c:
            break
        hi = bp[i + 1] if i + 1 < len(bp) else INF
        patch = profile.patch_on(i) if i + 1 < len(bp) else None
        if patch is None:
            slope = (v[i + 1] - v[i]) / (hi - lo) if hi != INF else profile.right_slope
            if slope <= 0:
                inc_bad.append((lo, hi))
            if prev_slope is not None and slope < prev_slope:
                cvx_bad.append(lo)
            prev_slope = slope
        else:
            xs = _cheb(float(lo), float(min(hi, c)))
            d1 = [float(patch(x, 1)) for x in xs]
            d2 = [float(patch(x, 2)) for x in xs]
            if min(d1) <= 0:
                inc_bad.append((lo, hi))
            if min(d2) < 0:
                cvx_bad.append(lo)
            if prev_slope is not None and patch(lo, 1) < prev_slope:
                cvx_bad.append(lo)
            prev_slope = patch(hi, 1)
    if inc_bad:
        out.append(ProfileViolation("increasing", f"not strictly increasing on {inc_bad[0]}"))
    if cvx_bad:
        out.append(ProfileViolation("convex", f"convexity fails at {cvx_bad[0]}"))

    if not profile.odd_at_infinity:
        out.append(ProfileViolation("odd-at-infinity", "end data (mu, nu) are not odd"))
    return out


# -- perturbations -------------------------------------------------------------

def hat_function(a, m, b, height) -> BoundaryProfile:
    """Compactly supported tent: 0 at ``a`` and ``b``, ``height`` at ``m``."""
    return BoundaryProfile((a, m, b), (0 * height, height, 0 * height), 0, 0, kind="perturbation")


def bump_patch(a, b, height) -> BoundaryProfile:
    """Quadratic bump ``4 height t (L - t) / L^2`` on ``[a, b]`` (continuous, kinked at the ends)."""
    L = b - a
    return BoundaryProfile((a, b), (0 * height, 0 * height), 0, 0,
                           (CubicPatch(a, b, (0 * height, 4 * height / L, -4 * height / (L * L), 0 * height)),),
                           kind="perturbation")


def _piece_cubic(profile: BoundaryProfile, lo, hi) -> tuple:
    """Coefficients in ``t = y - lo`` of the profile restricted to ``[lo, hi]``."""
    bp = profile.breakpoints
    mid = (lo + hi) / 2
    i = _locate(bp, mid)
    if 0 < i < len(bp):
        patch = profile.patch_on(i - 1)
        if patch is not None:
            return patch.shifted(lo, hi).coeffs
    v0 = _value_scalar(profile, lo)
    v1 = _value_scalar(profile, hi)
    return (v0, (v1 - v0) / (hi - lo), 0 * v0, 0 * v0)


def perturb_profile(profile: BoundaryProfile, u: BoundaryProfile, t) -> BoundaryProfile:
    """``f0 + t u`` for a compactly supported ``u`` left of ``q/p``."""
    if u.left_slope != 0 or u.right_slope != 0 or u.values[0] != 0 or u.values[-1] != 0:
        raise PreconditionError("perturbation must vanish outside a compact interval")
    c = profile.center
    if c is None:
        try:
            c = boundary_zero(profile)
        except NoSignChange:
            c = None
    if c is not None and u.breakpoints[-1] >= c:
        raise SupportTouchesCanonicalRegion(
            f"perturbation support reaches {u.breakpoints[-1]} >= {c}")
    if t == 0:
        return profile
    pts = sorted(set(profile.breakpoints) | set(u.breakpoints))
    vals = [_value_scalar(profile, y) + t * _value_scalar(u, y) for y in pts]
    patches = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        a = _piece_cubic(profile, lo, hi)
        b = _piece_cubic(u, lo, hi)
        co = tuple(x + t * y for x, y in zip(a, b))
        if co[2] != 0 or co[3] != 0:
            patches.append(CubicPatch(lo, hi, co))
    return replace(profile, breakpoints=tuple(pts), values=tuple(vals), smooth_pieces=tuple(patches),
                   kind=profile.kind if profile.kind == "custom" else f"{profile.kind}+perturbed")
