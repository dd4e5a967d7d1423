"""Three-way outcome of an ellipse-in-polytope decision."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .geometry import margin_on_grid, random_directions, separation_margin

INSIDE = "Inside"
OUTSIDE = "Outside"
QINSIDE = "QInside"


class CertificateError(RuntimeError):
    """An Outside verdict could not be backed by a separating direction."""


@dataclass
class EeVerdict:
    """``Inside``: E0 in P.  ``Outside``: E0 not in P, ``direction`` separates.
    ``QInside``: ``q * E0`` in P, containment of E0 itself undecided at q.
    """
    outcome: str
    q: float = 1.0
    direction: np.ndarray = field(default=None, repr=False)
    value: float = np.nan
    method: str = ""
    corners: list = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict, repr=False)

    @property
    def inside(self):
        return self.outcome == INSIDE

    @property
    def outside(self):
        return self.outcome == OUTSIDE

    def to_json(self):
        out = {"verdict": self.outcome, "q": float(self.q), "method": self.method}
        if np.isfinite(self.value):
            out["value"] = float(self.value)
        if self.direction is not None:
            out["direction"] = np.asarray(self.direction, dtype=float).tolist()
        return out


def _normalised_margin(e0, p, x):
    n2 = float(x @ x)
    if n2 == 0.0:
        return 0.0
    return separation_margin(e0, p, x) / n2


def find_separator(e0, p, hints=(), n_random=2000, seed=0):
    """Search for ``x`` with positive separation margin; ``None`` if none found.

    Tries the hint directions first, then a random sample, then polishes
    the best few by local maximisation of the margin on the unit sphere.
    """
    d = e0.d
    cands = [np.asarray(h, dtype=float).ravel() for h in hints if h is not None]
    cands = [c for c in cands if c.size == d and np.all(np.isfinite(c)) and c.any()]
    for c in cands:
        if separation_margin(e0, p, c) > 0:
            return c
    rng = np.random.default_rng(seed)
    X = random_directions(n_random, d, rng)
    if cands:
        C = np.array([c / np.linalg.norm(c) for c in cands])
        X = np.vstack([C, X])
    vals = margin_on_grid(e0, p, X)
    order = np.argsort(-vals)
    if vals[order[0]] > 0:
        return X[order[0]]
    for i in order[:5]:
        res = minimize(lambda x: -_normalised_margin(e0, p, x), X[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 400 * d})
        if separation_margin(e0, p, res.x) > 0:
            return res.x
    return None


def outside_verdict(e0, p, q, method, hints=(), value=np.nan, strict=True, **details):
    """Build an Outside verdict whose direction is checked before emission."""
    x = find_separator(e0, p, hints)
    if x is None:
        if strict:
            raise CertificateError(f"{method}: no separating direction found for Outside")
        return EeVerdict(OUTSIDE, q, None, value, method, details=details)
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    details["margin"] = separation_margin(e0, p, x)
    return EeVerdict(OUTSIDE, q, x, value, method, details=details)
