"""Quantities of interest with analytic value and directional derivatives.

A closed family: linear weight functionals, the energy B(u,u) of a
bilinear form (optionally restricted to a tagged subdomain), and smooth
compositions G(B(u,u)).  Every member exposes the first and second
directional derivatives in closed form, a finite-difference oracle for
both, the second-order Taylor remainder integral, and - where one exists -
the coarse-space field that represents the first derivative through the
bilinear form.
"""

import math
from dataclasses import dataclass

import numpy as np

from .assembly import assemble_load, bilinear_value, form_matrix
from .errors import DomainError
from .space import CoeffVec

__all__ = [
    "GFunction",
    "G_SQRT",
    "G_IDENTITY",
    "g_power",
    "EnergyQoi",
    "GEnergyQoi",
    "LinearQoi",
    "sqrt_energy",
    "fd_oracle_d1",
    "fd_oracle_d2",
    "taylor_remainder",
]

_SQRT_GUARD = 1e-14


@dataclass(frozen=True)
class GFunction:
    """Scalar composition function with closed-form first/second derivative."""

    kind: str  # "sqrt" | "power" | "identity"
    exponent: float = 1.0

    def _check(self, t):
        if self.kind == "sqrt" and t <= _SQRT_GUARD:
            raise DomainError("sqrt composition evaluated at %.3g <= %.3g" % (t, _SQRT_GUARD))
        if self.kind == "power" and self.exponent != int(self.exponent) and t <= 0.0:
            raise DomainError("fractional power evaluated at nonpositive argument")

    def value(self, t):
        self._check(t)
        if self.kind == "sqrt":
            return math.sqrt(t)
        if self.kind == "power":
            return t ** self.exponent
        return t

    def d1(self, t):
        self._check(t)
        if self.kind == "sqrt":
            return 0.5 / math.sqrt(t)
        if self.kind == "power":
            return self.exponent * t ** (self.exponent - 1.0)
        return 1.0

    def d2(self, t):
        self._check(t)
        if self.kind == "sqrt":
            return -0.25 / t ** 1.5
        if self.kind == "power":
            r = self.exponent
            return r * (r - 1.0) * t ** (r - 2.0)
        return 0.0


G_SQRT = GFunction("sqrt")
G_IDENTITY = GFunction("identity")


def g_power(exponent):
    return GFunction("power", exponent=exponent)


class EnergyQoi:
    """J(u) = B(u, u), optionally restricted to a tagged subdomain.

    Unrestricted: the first derivative is represented in the coarse space
    by 2*u_h.  Restricted: no such representer exists in general.
    """

    def __init__(self, form, subdomain=None):
        self.form = form
        self.subdomain = subdomain
        self.kind = "energy" if subdomain is None else "local-energy"

    def _matrix(self, space):
        return form_matrix(space, self.form, self.subdomain)

    @property
    def has_witness(self):
        return self.subdomain is None

    def value(self, u):
        return bilinear_value(self._matrix(u.space), u.values, u.values)

    def d1(self, u, v):
        return 2.0 * bilinear_value(self._matrix(u.space), u.values, v.values)

    def d2(self, u, v, w):
        return 2.0 * bilinear_value(self._matrix(u.space), v.values, w.values)

    def d1_vector(self, u):
        return 2.0 * (self._matrix(u.space) @ u.values)

    def witness(self, u_h):
        if not self.has_witness:
            return None
        return CoeffVec(u_h.space, 2.0 * u_h.values)


class GEnergyQoi:
    """J(u) = G(B(u, u)) for a once (twice) differentiable G."""

    def __init__(self, form, g, kind="g-energy"):
        self.form = form
        self.g = g
        self.kind = kind
        self.has_witness = True

    def _matrix(self, space):
        return form_matrix(space, self.form)

    def _a(self, u):
        return bilinear_value(self._matrix(u.space), u.values, u.values)

    def value(self, u):
        return self.g.value(self._a(u))

    def d1(self, u, v):
        a = self._matrix(u.space)
        return 2.0 * self.g.d1(self._a(u)) * bilinear_value(a, u.values, v.values)

    def d2(self, u, v, w):
        a = self._matrix(u.space)
        au = self._a(u)
        buv = bilinear_value(a, u.values, v.values)
        buw = bilinear_value(a, u.values, w.values)
        bvw = bilinear_value(a, v.values, w.values)
        return 4.0 * self.g.d2(au) * buv * buw + 2.0 * self.g.d1(au) * bvw

    def d1_vector(self, u):
        a = self._matrix(u.space)
        return 2.0 * self.g.d1(self._a(u)) * (a @ u.values)

    def witness(self, u_h):
        scale = 2.0 * self.g.d1(self._a(u_h))
        return CoeffVec(u_h.space, scale * u_h.values)


def sqrt_energy(form):
    """The energy induced by the bilinear form, J(u) = sqrt(B(u, u))."""
    return GEnergyQoi(form, G_SQRT, kind="sqrt-energy")


class LinearQoi:
    """J(u) = integral of q * u for a fixed weight q; J'' vanishes."""

    def __init__(self, weight, subdivide=0):
        self.weight = weight
        self.subdivide = subdivide
        self.kind = "linear"
        self.has_witness = False
        self._vectors = {}

    def _vector(self, space):
        key = id(space)
        if key not in self._vectors:
            self._vectors[key] = (space, assemble_load(space, self.weight, self.subdivide))
        return self._vectors[key][1]

    def value(self, u):
        return float(np.dot(self._vector(u.space), u.values))

    def d1(self, u, v):
        return float(np.dot(self._vector(u.space), v.values))

    def d2(self, u, v, w):
        return 0.0

    def d1_vector(self, u):
        return self._vector(u.space).copy()

    def witness(self, u_h):
        return None


def fd_oracle_d1(qoi, u, v, epsilon=None):
    """Central-difference check of the first directional derivative."""
    if epsilon is None:
        epsilon = 1e-5 * max(1.0, float(np.max(np.abs(u.values), initial=0.0)))
    up = CoeffVec(u.space, u.values + epsilon * v.values)
    um = CoeffVec(u.space, u.values - epsilon * v.values)
    return (qoi.value(up) - qoi.value(um)) / (2.0 * epsilon)


def fd_oracle_d2(qoi, u, v, w, epsilon=None):
    """Central-difference check of the second directional derivative."""
    if epsilon is None:
        epsilon = 1e-5 * max(1.0, float(np.max(np.abs(u.values), initial=0.0)))
    up = CoeffVec(u.space, u.values + epsilon * w.values)
    um = CoeffVec(u.space, u.values - epsilon * w.values)
    return (qoi.d1(up, v) - qoi.d1(um, v)) / (2.0 * epsilon)


def taylor_remainder(qoi, u_h, e, rule):
    """Second-order remainder of the expansion of J(u_h + e) about u_h.

    Quadrature of s -> J''(u_h + s*e; e, e) * (1 - s) over [0, 1] with the
    given segment rule.  Fields must live in one common space.
    """
    if e.space is not u_h.space:
        raise DomainError("remainder arguments must share one space")
    total = 0.0
    for s, w in zip(rule.points[:, 0], rule.weights):
        us = CoeffVec(u_h.space, u_h.values + s * e.values)
        total += w * (1.0 - s) * qoi.d2(us, e, e)
    return total
