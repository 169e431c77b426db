# Python module: sampling.py

# Import the required libraries
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from core.errors import DomainError

logger = logging.getLogger(__name__)

KINDS = ("step", "trig", "tabulated", "perturbed")
SUP_GRID = 4096
LOCAL_CAP = 20001
DENOMINATOR_CAP = 10**9

# (center, half width, height) of one hat bump
Bump = Tuple[float, float, float]


def hat(x: Union[float, np.ndarray]) -> np.ndarray:
    """Tent bump: 1 + x on [-1, 0], 1 - x on [0, 1], zero elsewhere."""
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=float)))


def as_fraction(value: Union[str, int, float, Fraction]) -> Fraction:
    """Rational from ``"p/q"``, an int, a Fraction or a float (bounded denominator)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(DENOMINATOR_CAP)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"Cannot read '{value}' as a rational number") from exc


def _circle_offset(x: np.ndarray, center: float) -> np.ndarray:
    """Signed distance x - center on the circle, in [-1/2, 1/2)."""
    return np.mod(x - center + 0.5, 1.0) - 0.5


@dataclass(frozen=True)
class SamplingFunction:
    """A real function on the circle R/Z, used as f in v_n = f(omega + n alpha).

    ``step`` jumps only at rational breakpoints and takes ``values[j]`` on
    ``[b_j, b_{j+1})`` cyclically. ``trig`` is a0 + sum a cos 2pi k x + b sin 2pi k x.
    ``tabulated`` interpolates linearly between values on the grid j/m.
    ``perturbed`` adds hat bumps to a base function.

    Example:
        ```python
        g = SamplingFunction.step(["0", "1/2"], [0.0, 4.5])
        g(np.array([0.1, 0.7]))   # array([0. , 4.5])
        ```
    """

    kind: str
    breakpoints: Tuple[Fraction, ...] = ()
    values: Tuple[float, ...] = ()
    terms: Tuple[Tuple[int, float, float], ...] = ()
    base: Optional["SamplingFunction"] = None
    bumps: Tuple[Bump, ...] = ()
    _points: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"Unknown sampling function kind '{self.kind}'; expected one of {KINDS}")
        if self.kind == "step":
            if not self.breakpoints or len(self.breakpoints) != len(self.values):
                raise DomainError("A step function needs one value per breakpoint")
            if any(not 0 <= b < 1 for b in self.breakpoints):
                raise DomainError("Step breakpoints must lie in [0, 1)")
            if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
                raise DomainError("Step breakpoints must be sorted and distinct")
            object.__setattr__(self, "_points", np.array([float(b) for b in self.breakpoints]))
        elif self.kind == "trig":
            if not self.terms:
                raise DomainError("A trigonometric polynomial needs at least one term")
        elif self.kind == "tabulated":
            if len(self.values) < 2:
                raise DomainError("A tabulated function needs at least two grid values")
        else:
            if self.base is None:
                raise DomainError("A perturbed function needs a base function")
            if any(half <= 0 or not 0 < 2 * half <= 1 for _, half, _ in self.bumps):
                raise DomainError("Bump half widths must lie in (0, 1/2]")

    @staticmethod
    def step(breakpoints: Sequence[Any], values: Sequence[float]) -> "SamplingFunction":
        return SamplingFunction("step", tuple(as_fraction(b) for b in breakpoints), tuple(float(v) for v in values))

    @staticmethod
    def trig(terms: Sequence[Tuple[int, float, float]]) -> "SamplingFunction":
        return SamplingFunction("trig", terms=tuple((int(k), float(a), float(b)) for k, a, b in terms))

    @staticmethod
    def cosine(amplitude: float = 1.0, k: int = 1) -> "SamplingFunction":
        return SamplingFunction.trig([(k, amplitude, 0.0)])

    @staticmethod
    def constant(value: float) -> "SamplingFunction":
        return SamplingFunction.trig([(0, value, 0.0)])

    @staticmethod
    def tabulated(values: Sequence[float]) -> "SamplingFunction":
        return SamplingFunction("tabulated", values=tuple(float(v) for v in values))

    @staticmethod
    def perturbed(base: "SamplingFunction", bumps: Sequence[Bump]) -> "SamplingFunction":
        return SamplingFunction("perturbed", base=base, bumps=tuple((float(c) % 1.0, float(w), float(h)) for c, w, h in bumps))

    @staticmethod
    def from_config(block: Dict[str, Any]) -> "SamplingFunction":
        """Build from a config block such as ``{"kind": "trig", "terms": [{"k": 1, "cos": 1.0}]}``."""
        kind = block.get("kind")
        if kind == "constant":
            return SamplingFunction.constant(float(block.get("value", 0.0)))
        if kind == "step":
            return SamplingFunction.step(block.get("breakpoints", []), block.get("values", []))
        if kind == "trig":
            return SamplingFunction.trig(
                [(t.get("k", 0), t.get("cos", 0.0), t.get("sin", 0.0)) for t in block.get("terms", [])]
            )
        if kind == "tabulated":
            return SamplingFunction.tabulated(block.get("values", []))
        if kind == "perturbed":
            bumps = [(b["center"], b["half_width"], b["height"]) for b in block.get("bumps", [])]
            return SamplingFunction.perturbed(SamplingFunction.from_config(block["base"]), bumps)
        raise DomainError(f"Unknown sampling function kind '{kind}'")

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "step":
            return {"kind": "step", "breakpoints": [str(b) for b in self.breakpoints], "values": list(self.values)}
        if self.kind == "trig":
            return {"kind": "trig", "terms": [{"k": k, "cos": a, "sin": b} for k, a, b in self.terms]}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "values": list(self.values)}
        return {
            "kind": "perturbed",
            "base": self.base.to_dict(),
            "bumps": [{"center": c, "half_width": w, "height": h} for c, w, h in self.bumps],
        }

    def __call__(self, x: Union[float, np.ndarray]) -> np.ndarray:
        x = np.mod(np.asarray(x, dtype=float), 1.0)
        if self.kind == "step":
            idx = np.searchsorted(self._points, x, side="right") - 1
            return np.asarray(self.values)[idx]
        if self.kind == "trig":
            out = np.zeros_like(x)
            for k, a, b in self.terms:
                phase = 2 * math.pi * k * x
                out = out + a * np.cos(phase) + b * np.sin(phase)
            return out
        if self.kind == "tabulated":
            m = len(self.values)
            grid = np.arange(m + 1) / m
            return np.interp(x, grid, np.append(self.values, self.values[0]))
        out = self.base(x)
        for center, half, height in self.bumps:
            out = out + height * hat(_circle_offset(x, center) / half)
        return out

    @property
    def continuous(self) -> bool:
        if self.kind == "perturbed":
            return self.base.continuous
        return self.kind != "step"

    def cut_points(self) -> np.ndarray:
        """Jump locations in [0, 1)."""
        if self.kind == "step":
            return self._points.copy()
        if self.kind == "perturbed":
            return self.base.cut_points()
        return np.empty(0)

    def local_phases(self, tol: float) -> np.ndarray:
        """Phases resolving every bump to height steps of at most ``tol``."""
        if self.kind != "perturbed":
            return np.empty(0)
        parts = [self.base.local_phases(tol)]
        for center, half, height in self.bumps:
            count = min(int(math.ceil(2 * abs(height) / tol)) + 1, LOCAL_CAP)
            parts.append(np.mod(center + half * np.linspace(-1.0, 1.0, count), 1.0))
        return np.concatenate(parts)

    def bump_sup(self) -> float:
        """sup |f - base| for a perturbed function (bumps have disjoint supports)."""
        return float(max((abs(h) for _, _, h in self.bumps), default=0.0))

    def _trig_sup(self) -> float:
        grid = np.arange(SUP_GRID) / SUP_GRID
        values = np.abs(self(grid))
        best = int(np.argmax(values))
        step = 1.0 / SUP_GRID
        refined = minimize_scalar(
            lambda t: -float(np.abs(self(t))),
            bounds=(grid[best] - step, grid[best] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(max(values[best], -refined.fun))

    def sup_norm(self) -> float:
        if self.kind in ("step", "tabulated"):
            return float(max(abs(v) for v in self.values))
        if self.kind == "trig":
            return self._trig_sup()
        probes = np.concatenate(
            [
                np.arange(SUP_GRID) / SUP_GRID,
                [c for c, _, _ in self.bumps],
                self.cut_points(),
            ]
        )
        return float(max(np.max(np.abs(self(probes))), 0.0))

    def lipschitz(self) -> float:
        if self.kind == "trig":
            return float(sum((abs(a) + abs(b)) * 2 * math.pi * abs(k) for k, a, b in self.terms))
        if self.kind == "tabulated":
            vals = np.append(self.values, self.values[0])
            return float(np.max(np.abs(np.diff(vals))) * len(self.values))
        if self.kind == "perturbed" and self.base.continuous:
            return self.base.lipschitz() + max((abs(h) / w for _, w, h in self.bumps), default=0.0)
        return math.inf

    def _range(self) -> float:
        if self.kind in ("step", "tabulated"):
            return float(max(self.values) - min(self.values))
        return 2.0 * self.sup_norm()

    def smooth_modulus(self, delta: float) -> float:
        """Modulus of continuity at ``delta`` of the part of f without jumps."""
        if self.kind == "step":
            return 0.0
        if self.kind == "perturbed":
            bump = max((min(abs(h), abs(h) * delta / w) for _, w, h in self.bumps), default=0.0)
            return self.base.smooth_modulus(delta) + 2.0 * bump
        return float(min(self._range(), self.lipschitz() * delta))

    def modulus(self, delta: float) -> float:
        """Upper bound for sup over |t| <= delta of ||f(. + t) - f||_inf."""
        if delta <= 0:
            return 0.0
        if self.kind == "step":
            vals = np.asarray(self.values)
            jumps = np.abs(np.diff(np.append(vals, vals[0])))
            cells = np.diff(np.append(self._points, self._points[0] + 1.0))
            return float(jumps.max() if delta < cells.min() else vals.max() - vals.min())
        if self.kind == "perturbed":
            return self.base.modulus(delta) + self.smooth_modulus(delta) - self.base.smooth_modulus(delta)
        return self.smooth_modulus(delta)

    def shift(self, c: Union[float, Fraction, str]) -> "SamplingFunction":
        """The translate x -> f(x + c)."""
        if self.kind == "step":
            c = as_fraction(c)
            moved = sorted(((b - c) % 1, v) for b, v in zip(self.breakpoints, self.values))
            return SamplingFunction("step", tuple(b for b, _ in moved), tuple(v for _, v in moved))
        c = float(c)
        if self.kind == "trig":
            terms = []
            for k, a, b in self.terms:
                cs, sn = math.cos(2 * math.pi * k * c), math.sin(2 * math.pi * k * c)
                terms.append((k, a * cs + b * sn, b * cs - a * sn))
            return SamplingFunction("trig", terms=tuple(terms))
        if self.kind == "tabulated":
            m = len(self.values)
            steps = c * m
            if abs(steps - round(steps)) > 1e-12:
                raise DomainError("A tabulated function shifts only by multiples of its grid step")
            return SamplingFunction("tabulated", values=tuple(np.roll(self.values, -int(round(steps)))))
        return SamplingFunction.perturbed(self.base.shift(c), [((cc - c) % 1.0, w, h) for cc, w, h in self.bumps])


def sup_distance(f: SamplingFunction, g: SamplingFunction, points: int = SUP_GRID) -> float:
    """Grid estimate of ||f - g||_inf; exact when one is a bump perturbation of the other."""
    if f.kind == "perturbed" and f.base == g:
        return f.bump_sup()
    if g.kind == "perturbed" and g.base == f:
        return g.bump_sup()
    probes: List[np.ndarray] = [np.arange(points) / points, f.cut_points(), g.cut_points()]
    x = np.concatenate(probes)
    return float(np.max(np.abs(f(x) - g(x))))
