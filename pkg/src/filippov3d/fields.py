"""Piecewise-smooth systems Z=(X,Y,f), Lie derivatives, and the system catalog.

A system bundles two globally smooth vector fields X (active on f>=0) and Y
(active on f<=0) with the switching function f, plus the mandatory domain
box.  All repeatedly-needed derived expressions (Lie derivatives to order 3,
their gradients, the normalized sliding field and its Jacobian) are built
symbolically once and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArityError, PreconditionError
from .expressions import FieldExpression, add, mul, sub

SIDE_X = "X"
SIDE_Y = "Y"


def lie_derivative(X: FieldExpression, g: FieldExpression, order: int = 1) -> FieldExpression:
    """Closed-form iterated Lie derivative of the scalar g along the vector X.

    Order 1 is X . grad g; order n applies X . grad to the previous result.
    """
    if order not in (1, 2, 3):
        raise PreconditionError(f"order must be 1, 2 or 3, got {order}")
    if X.arity != "vector":
        raise ArityError("lie_derivative needs a vector field as first argument")
    if g.arity != "scalar":
        raise ArityError("lie_derivative needs a scalar field as second argument")
    result = g
    for _ in range(order):
        terms = None
        for i in range(3):
            term = mul(X.nodes[i], result.derivative(i).node)
            terms = term if terms is None else add(terms, term)
        result = FieldExpression(terms, "scalar")
    return result


@dataclass(frozen=True)
class Box:
    """Axis-aligned domain box; all sampling and integration stay inside it."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != 3 or len(hi) != 3:
            raise PreconditionError("box needs 3 lower and 3 upper bounds")
        if any(h <= l for l, h in zip(lo, hi)):
            raise PreconditionError(f"degenerate box {lo} .. {hi}")

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def contains(self, points, margin: float = 0.0):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lo) - margin
        hi = np.asarray(self.hi) + margin
        ok = np.all((pts >= lo) & (pts <= hi), axis=1)
        return ok if np.asarray(points).ndim > 1 else bool(ok[0])

    def clamp(self, point):
        return np.clip(np.asarray(point, dtype=float), self.lo, self.hi)

    def grid(self, n: int):
        """Deterministic n^3 grid of interior points, shape (n^3, 3)."""
        axes = [np.linspace(l, h, n) for l, h in zip(self.lo, self.hi)]
        g = np.meshgrid(*axes, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=-1)

    def sample(self, rng, n: int):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return lo + rng.random((n, 3)) * (hi - lo)


@dataclass(frozen=True)
class JetBundle:
    """Point data sufficient for every tangency classification at p.

    Holds the side's field value, f and its gradient, the Lie derivatives
    Wf, W2f, W3f and the gradients of Wf and W2f (W = X or Y).
    """

    point: tuple
    side: str
    field_value: tuple
    f: float
    grad_f: tuple
    wf: float
    w2f: float
    w3f: float
    grad_wf: tuple
    grad_w2f: tuple


class FilippovSystem:
    """Z = (X, Y) switching across f = 0, with cached symbolic jets."""

    def __init__(self, X: FieldExpression, Y: FieldExpression, f: FieldExpression,
                 box: Box, name: str = "unnamed"):
        if X.arity != "vector" or Y.arity != "vector":
            raise ArityError("X and Y must be vector fields")
        if f.arity != "scalar":
            raise ArityError("f must be a scalar field")
        self.X = X
        self.Y = Y
        self.f = f
        self.box = box
        self.name = name

    def __repr__(self):
        return f"FilippovSystem({self.name!r})"

    # -- symbolic jets -------------------------------------------------

    @cached_property
    def grad_f(self) -> FieldExpression:
        return self.f.gradient()

    def field(self, side: str) -> FieldExpression:
        if side == SIDE_X:
            return self.X
        if side == SIDE_Y:
            return self.Y
        raise PreconditionError(f"side must be 'X' or 'Y', got {side!r}")

    @cached_property
    def Xf(self):
        return lie_derivative(self.X, self.f, 1)

    @cached_property
    def X2f(self):
        return lie_derivative(self.X, self.f, 2)

    @cached_property
    def X3f(self):
        return lie_derivative(self.X, self.f, 3)

    @cached_property
    def Yf(self):
        return lie_derivative(self.Y, self.f, 1)

    @cached_property
    def Y2f(self):
        return lie_derivative(self.Y, self.f, 2)

    @cached_property
    def Y3f(self):
        return lie_derivative(self.Y, self.f, 3)

    def lie(self, side: str, order: int) -> FieldExpression:
        table = {(SIDE_X, 1): "Xf", (SIDE_X, 2): "X2f", (SIDE_X, 3): "X3f",
                 (SIDE_Y, 1): "Yf", (SIDE_Y, 2): "Y2f", (SIDE_Y, 3): "Y3f"}
        return getattr(self, table[(side, order)])

    @cached_property
    def grad_Xf(self):
        return self.Xf.gradient()

    @cached_property
    def grad_X2f(self):
        return self.X2f.gradient()

    @cached_property
    def grad_Yf(self):
        return self.Yf.gradient()

    @cached_property
    def grad_Y2f(self):
        return self.Y2f.gradient()

    @cached_property
    def sliding_field(self) -> FieldExpression:
        """Normalized sliding field Yf*X - Xf*Y, tangent to every level set of f."""
        comps = tuple(sub(mul(self.Yf.node, self.X.nodes[i]),
                          mul(self.Xf.node, self.Y.nodes[i])) for i in range(3))
        return FieldExpression(comps, "vector")

    @cached_property
    def sliding_jacobian(self):
        """3x3 matrix of scalar FieldExpressions d(sliding_field)_i / d x_j."""
        return tuple(tuple(self.sliding_field.component(i).derivative(j)
                           for j in range(3)) for i in range(3))

    def sliding_jacobian_at(self, p) -> np.ndarray:
        J = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                J[i, j] = self.sliding_jacobian[i][j](p)
        return J

    # -- numeric helpers -------------------------------------------------

    @cached_property
    def scales(self) -> dict:
        """Per-system magnitude scales from a deterministic 9^3 grid."""
        pts = self.box.grid(9)
        def mx(expr):
            vals = np.abs(np.asarray(expr(pts), dtype=float))
            v = float(vals.max()) if vals.size else 0.0
            return v if v > 0 else 1.0
        return {
            "f": mx(self.f),
            "lie": max(mx(self.Xf), mx(self.Yf)),
            "lie2": max(mx(self.X2f), mx(self.Y2f)),
            "field": max(mx(self.X), mx(self.Y)),
            "grad": mx(self.grad_f),
            "fn": mx(self.sliding_field),
        }

    def jet(self, side: str, p) -> JetBundle:
        p = np.asarray(p, dtype=float)
        W = self.field(side)
        return JetBundle(
            point=tuple(p), side=side,
            field_value=tuple(W(p)),
            f=self.f(p), grad_f=tuple(self.grad_f(p)),
            wf=self.lie(side, 1)(p),
            w2f=self.lie(side, 2)(p),
            w3f=self.lie(side, 3)(p),
            grad_wf=tuple(self.lie(side, 1).gradient()(p)),
            grad_w2f=tuple(self.lie(side, 2).gradient()(p)),
        )

    def unit_normal(self, p) -> np.ndarray:
        g = np.asarray(self.grad_f(p), dtype=float)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            raise PreconditionError(f"grad f vanishes at {tuple(p)}")
        return g / norm


def system_from_strings(name, X, Y, f, lo, hi) -> FilippovSystem:
    return FilippovSystem(
        FieldExpression.parse(X, "vector"),
        FieldExpression.parse(Y, "vector"),
        FieldExpression.parse(f, "scalar"),
        Box(tuple(lo), tuple(hi)),
        name=name,
    )


@dataclass(frozen=True)
class SystemCatalogEntry:
    name: str
    system: FilippovSystem
    facts: dict = field(default_factory=dict)
    description: str = ""


def _entry(name, X, Y, f, lo, hi, facts, description=""):
    return SystemCatalogEntry(
        name=name,
        system=system_from_strings(name, X, Y, f, lo, hi),
        facts=dict(facts),
        description=description,
    )


def catalog() -> dict:
    """Canonical systems with hand-verified expected facts.

    Every entry evaluates without error on its declared box.  The
    "sphere-twocusp" coefficients were found by a numeric search for a
    closed fold circle carrying exactly two cubic-contact points; the cusp
    count is re-derived independently in the test suite by root-finding on
    the second Lie derivative along the traced curve.
    """
    cube1 = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))
    cube2 = ((-2.0, -2.0, -2.0), (2.0, 2.0, 2.0))
    sbox = ((-1.5, -1.5, -1.5), (1.5, 1.5, 1.5))
    entries = [
        _entry("vishik-fold-visible", "(0,1,y)", "(0,0,1)", "z", *cube1,
               facts={"origin_kind": "VisibleFold", "side": "X", "x2f_at_origin": 1.0},
               description="quadratic contact, orbit arc on the f>=0 side"),
        _entry("vishik-fold-invisible", "(0,1,-y)", "(0,0,1)", "z", *cube1,
               facts={"origin_kind": "InvisibleFold", "side": "X",
                      "involution": "(x,y) -> (x,-y)"},
               description="quadratic contact, orbit arc dips below f=0"),
        _entry("vishik-cusp-pos", "(y,1,x)", "(0,0,1)", "z", *cube1,
               facts={"origin_kind": "Cusp", "cusp_sign": 1, "det": 1.0},
               description="cubic contact, coordinate-covector jet"),
        _entry("vishik-cusp-neg", "(y,1,-x)", "(0,0,1)", "z", *cube1,
               facts={"origin_kind": "Cusp", "cusp_sign": -1, "det": 1.0}),
        _entry("vishik-cusp-flow", "(1,0,x^2+y)", "(0,0,1)", "z", *cube1,
               facts={"origin_kind": "Cusp", "cusp_sign": 1},
               description="cubic contact with the hand-integrable orbit form"),
        _entry("degenerate-sphere", "(-y,x,0)", "(x,y,z)", "x^2+y^2+z^2-1", *sbox,
               facts={"sz_equals_sigma": True, "elementary": False,
                      "aggregate": "Unstable"},
               description="tangency set fills the whole surface; X is tangent "
                           "to every sphere about the origin"),
        _entry("sphere-two-foldfold", "(0,0,1)", "(1,0,0)", "x^2+y^2+z^2-1", *sbox,
               facts={"fold_fold_points": ((0.0, 1.0, 0.0), (0.0, -1.0, 0.0)),
                      "fold_fold_type": "P", "curve_count": 2,
                      "block_count": 1, "subregion_count": 2,
                      "cusp_count": 0, "elementary": True},
               description="equator and meridian fold circles crossing at two "
                           "parabolic points"),
        _entry("planar-elliptic-foldfold", "(0,1,-y)", "(1,0,x)", "z", *cube1,
               facts={"fold_fold_type": "E", "return_map": "-identity",
                      "return_eigenvalues": (-1.0, -1.0), "xi_e": "Violated"},
               description="both folds invisible; half-returns compose to -id"),
        _entry("planar-node", "(x,y,-1)", "(0,0,1)", "z", *cube1,
               facts={"pseudo_equilibrium": (0.0, 0.0, 0.0),
                      "fn_eigenvalues": (1.0, 1.0), "kind": "Node",
                      "interior": True},
               description="whole patch is stable sliding with one unstable node"),
        _entry("planar-sliding-crossing", "(1,0,-1)", "(1,0,1)", "z", *cube2,
               facts={"hit_point": (1.0, 0.0, 0.0), "hit_time": 1.0,
                      "slide_velocity": (1.0, 0.0, 0.0)},
               description="descending then sliding with unit speed along +x"),
        _entry("sliding-center", "(y,-x,-1)", "(0,0,1)", "z", *cube1,
               facts={"i2": "Violated", "recurrent": True},
               description="normalized sliding field is a linear center"),
        _entry("planar-parabolic-saddle", "(0,1,2*x-y)", "(1,0,-x+y)", "z", *cube1,
               facts={"fold_fold_type": "P", "sliding_linearization": "saddle"},
               description="parabolic crossing point whose sliding "
                           "linearization is hyperbolic"),
        _entry("planar-saddle-connection", "(1-x^2,x*y,-1)", "(0,0,1)", "z", *cube2,
               facts={"i3": "Violated",
                      "saddles": ((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0))},
               description="two pseudo-saddles joined along the symmetry axis"),
        _entry("sphere-onecircle", "(0,0,1)", "(x,y,-1)", "x^2+y^2+z^2-1", *sbox,
               facts={"curve_sides": {"X": 1, "Y": 1}, "cusp_count": 0,
                      "winding_index": 0},
               description="equator fold circle with the second tangency circle "
                           "disjoint from it"),
        _entry("sphere-twocusp", "(0,1,0.8*z+1.2*y)", "(x,y,-1)",
               "x^2+y^2+z^2-1", *sbox,
               facts={"cusp_count": 2, "winding_index": 1},
               description="deformed vertical field whose fold circle carries "
                           "two cubic-contact points"),
        _entry("plane-crossing", "(0,0,1)", "(0.1,0,1)", "z", *cube1,
               facts={"aggregate": "NoBlocksStable", "crossing_everywhere": True},
               description="both fields cross the plane upward everywhere"),
    ]
    return {e.name: e for e in entries}
