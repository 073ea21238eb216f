"""Truncated power series in one variable.

Only what the Morse expansion needs: ring operations, ``exp`` by the usual
recurrence, and ``cos``/``sin`` about a shifted center.  A series of degree
``d`` carries coefficients ``c_0..c_d``; products are truncated to the lower
degree of the operands.
"""

from __future__ import annotations

import math

import numpy as np


class TruncatedSeries:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.array(coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, value: float, degree: int) -> "TruncatedSeries":
        c = np.zeros(degree + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, degree: int) -> "TruncatedSeries":
        c = np.zeros(degree + 1)
        if degree >= 1:
            c[1] = 1.0
        return cls(c)

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(float(other), self.degree)

    def __add__(self, other):
        other = self._coerce(other)
        d = min(self.degree, other.degree)
        return TruncatedSeries(self.coeffs[: d + 1] + other.coeffs[: d + 1])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs * float(other))
        d = min(self.degree, other.degree)
        return TruncatedSeries(np.convolve(self.coeffs[: d + 1], other.coeffs[: d + 1])[: d + 1])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers")
        out = TruncatedSeries.constant(1.0, self.degree)
        for _ in range(int(k)):
            out = out * self
        return out

    def exp(self) -> "TruncatedSeries":
        s = self.coeffs
        b = np.zeros_like(s)
        b[0] = math.exp(s[0])
        j = np.arange(s.size)
        for k in range(1, s.size):
            b[k] = np.dot(j[1 : k + 1] * s[1 : k + 1], b[k - 1 :: -1][:k]) / k
        return TruncatedSeries(b)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def __repr__(self):
        return f"TruncatedSeries(degree={self.degree}, coeffs={self.coeffs!r})"


def cos_about(center: float, degree: int) -> TruncatedSeries:
    """Series of ``cos(center + t)`` in ``t``."""
    j = np.arange(degree + 1)
    fact = np.array([math.factorial(int(i)) for i in j], dtype=float)
    cos_t = np.where(j % 2 == 0, (-1.0) ** (j // 2), 0.0) / fact
    sin_t = np.where(j % 2 == 1, (-1.0) ** ((j - 1) // 2), 0.0) / fact
    return TruncatedSeries(math.cos(center) * cos_t - math.sin(center) * sin_t)
