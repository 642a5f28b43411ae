"""Truncated bivariate Taylor jets in (rho, eta).

A :class:`Jet` of order ``N`` stores ``c[a, b] = d_rho^a d_eta^b u / (a! b!)``
for ``a + b <= N`` at a batch of base points.  Entries with ``a + b > N`` are
kept at zero.  Arithmetic is truncated-polynomial algebra, so derivatives of
composed closed-form expressions are exact up to rounding.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Jet", "DEFAULT_ORDER"]

DEFAULT_ORDER = 3


def _mask(order):
    a = np.arange(order + 1)
    return (a[:, None] + a[None, :]) <= order


class Jet:
    __slots__ = ("c", "order", "rho", "eta")
    __array_priority__ = 100

    def __init__(self, c, order, rho, eta):
        self.c = c
        self.order = order
        self.rho = rho
        self.eta = eta

    # -- construction -------------------------------------------------
    @staticmethod
    def _base(rho, eta):
        rho = np.asarray(rho, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return np.broadcast_arrays(rho, eta)

    @classmethod
    def constant(cls, value, rho, eta, order=DEFAULT_ORDER):
        rho, eta = cls._base(rho, eta)
        c = np.zeros((order + 1, order + 1) + rho.shape)
        c[0, 0] = value
        return cls(c, order, rho, eta)

    @classmethod
    def var_rho(cls, rho, eta, order=DEFAULT_ORDER):
        j = cls.constant(0.0, rho, eta, order)
        j.c[0, 0] = j.rho
        if order >= 1:
            j.c[1, 0] = 1.0
        return j

    @classmethod
    def var_eta(cls, rho, eta, order=DEFAULT_ORDER):
        j = cls.constant(0.0, rho, eta, order)
        j.c[0, 0] = j.eta
        if order >= 1:
            j.c[0, 1] = 1.0
        return j

    @classmethod
    def variables(cls, rho, eta, order=DEFAULT_ORDER):
        return cls.var_rho(rho, eta, order), cls.var_eta(rho, eta, order)

    @classmethod
    def from_derivatives(cls, derivs, rho, eta, order):
        """Build from a mapping ``(a, b) -> d_rho^a d_eta^b u``."""
        j = cls.constant(0.0, rho, eta, order)
        for (a, b), v in derivs.items():
            if a + b <= order:
                j.c[a, b] = np.asarray(v) / (math.factorial(a) * math.factorial(b))
        return j

    # -- access -------------------------------------------------------
    @property
    def value(self):
        return self.c[0, 0]

    @property
    def shape(self):
        return self.c.shape[2:]

    def deriv(self, a, b):
        """``d_rho^a d_eta^b`` of the represented field at the base points."""
        if a + b > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative ({a},{b})")
        return self.c[a, b] * (math.factorial(a) * math.factorial(b))

    def d_rho(self):
        n = self.order
        if n == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        c = np.zeros((n, n) + self.shape)
        for a in range(n):
            for b in range(n - a):
                c[a, b] = (a + 1) * self.c[a + 1, b]
        return Jet(c, n - 1, self.rho, self.eta)

    def d_eta(self):
        n = self.order
        if n == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        c = np.zeros((n, n) + self.shape)
        for a in range(n):
            for b in range(n - a):
                c[a, b] = (b + 1) * self.c[a, b + 1]
        return Jet(c, n - 1, self.rho, self.eta)

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise jet order")
        c = self.c[: order + 1, : order + 1].copy()
        c[~_mask(order)] = 0.0
        return Jet(c, order, self.rho, self.eta)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        full = (slice(None), slice(None)) + idx
        return Jet(self.c[full], self.order, self.rho[idx], self.eta[idx])

    # -- algebra ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                n = min(self.order, other.order)
                return self.truncate(n), other.truncate(n)
            return self, other
        return self, Jet.constant(np.asarray(other, dtype=float) * np.ones(self.shape),
                                  self.rho, self.eta, self.order)

    def __add__(self, other):
        s, o = self._coerce(other)
        return Jet(s.c + o.c, s.order, s.rho, s.eta)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order, self.rho, self.eta)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float), self.order, self.rho, self.eta)
        s, o = self._coerce(other)
        n = s.order
        out = np.zeros(np.broadcast_shapes(s.c.shape, o.c.shape))
        for a in range(n + 1):
            for b in range(n + 1 - a):
                acc = 0.0
                for i in range(a + 1):
                    for j in range(b + 1):
                        acc = acc + s.c[i, j] * o.c[a - i, b - j]
                out[a, b] = acc
        return Jet(out, n, s.rho, s.eta)

    __rmul__ = __mul__

    def compose(self, derivs):
        """Apply a scalar function given its Taylor data at the value.

        ``derivs[k]`` must hold ``g^{(k)}(value) / k!`` for ``k = 0 .. order``.
        """
        n = self.order
        h = Jet(self.c.copy(), n, self.rho, self.eta)
        h.c[0, 0] = 0.0
        out = Jet.constant(derivs[0], self.rho, self.eta, n)
        power = None
        for k in range(1, n + 1):
            power = h if power is None else power * h
            out = out + power * derivs[k]
        return out

    def __pow__(self, s):
        x0 = self.value
        n = self.order
        coeffs = []
        binom = 1.0
        for k in range(n + 1):
            coeffs.append(binom * x0 ** (s - k))
            binom *= (s - k) / (k + 1)
        return self.compose(coeffs)

    def reciprocal(self):
        x0 = self.value
        return self.compose([(-1.0) ** k / x0 ** (k + 1) for k in range(self.order + 1)])

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def sqrt(self):
        return self ** 0.5

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape})"
