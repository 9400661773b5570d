"""Scalar price/cost components: affine, quadratic and tabulated piecewise-linear."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("affine", "quadratic", "pwl")
_KIND_ALIASES = {"tabulated-piecewise-linear": "pwl", "piecewise-linear": "pwl"}


@dataclass(frozen=True)
class FunctionSpec:
    """A real function of one real variable.

    ``affine``: c0 + c1*s; ``quadratic``: c0 + c1*s + c2*s**2;
    ``pwl``: linear interpolation through sorted ``breakpoints``/``values``,
    held constant outside the breakpoint range.
    """

    kind: str
    coefficients: tuple[float, ...] = ()
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    _bp: np.ndarray = field(init=False, repr=False, compare=False)
    _vals: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "pwl":
            bp = np.asarray(self.breakpoints, dtype=float)
            vals = np.asarray(self.values, dtype=float)
            if bp.ndim != 1 or bp.size < 1 or bp.shape != vals.shape:
                raise ValueError("pwl needs matching, non-empty breakpoints and values")
            if np.any(np.diff(bp) <= 0):
                raise ValueError("pwl breakpoints must be strictly increasing")
            if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
                raise ValueError("pwl data must be finite")
            object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
            object.__setattr__(self, "values", tuple(float(v) for v in vals))
            object.__setattr__(self, "_bp", bp)
            object.__setattr__(self, "_vals", vals)
        else:
            want = 2 if kind == "affine" else 3
            coeffs = tuple(float(c) for c in self.coefficients)
            if len(coeffs) != want:
                raise ValueError(f"{kind} needs {want} coefficients, got {len(coeffs)}")
            if not all(np.isfinite(coeffs)):
                raise ValueError("coefficients must be finite")
            object.__setattr__(self, "coefficients", coeffs)

    # construction helpers
    @classmethod
    def affine(cls, c0: float, c1: float) -> "FunctionSpec":
        return cls("affine", (c0, c1))

    @classmethod
    def quadratic(cls, c0: float, c1: float, c2: float) -> "FunctionSpec":
        return cls("quadratic", (c0, c1, c2))

    @classmethod
    def pwl(cls, breakpoints, values) -> "FunctionSpec":
        return cls("pwl", breakpoints=tuple(breakpoints), values=tuple(values))

    @classmethod
    def zero(cls) -> "FunctionSpec":
        return cls.affine(0.0, 0.0)

    @property
    def is_polynomial(self) -> bool:
        return self.kind != "pwl"

    def poly3(self) -> tuple[float, float, float]:
        """Coefficients (c0, c1, c2) of a polynomial kind."""
        c = self.coefficients
        return (c[0], c[1], c[2] if len(c) == 3 else 0.0)

    def __call__(self, s):
        if self.kind == "pwl":
            return np.interp(s, self._bp, self._vals)
        c0, c1, c2 = self.poly3()
        return c0 + (c1 + c2 * s) * s

    def scalar(self, s: float) -> float:
        """Fast path for a Python float argument."""
        if self.kind == "pwl":
            return float(np.interp(s, self._bp, self._vals))
        c0, c1, c2 = self.poly3()
        return c0 + (c1 + c2 * s) * s

    def _segments(self, lo: float, hi: float):
        """(left, right, slope, value_at_left) pieces of a pwl covering [lo, hi]."""
        bp, vals = self._bp, self._vals
        knots = [lo] + [b for b in bp if lo < b < hi] + [hi]
        out = []
        for a, b in zip(knots[:-1], knots[1:]):
            if b <= a:
                continue
            va, vb = float(np.interp(a, bp, vals)), float(np.interp(b, bp, vals))
            out.append((a, b, (vb - va) / (b - a), va))
        return out

    def lipschitz(self, lo: float, hi: float) -> float:
        """Lipschitz constant on [lo, hi]."""
        if self.kind == "affine":
            return abs(self.coefficients[1])
        if self.kind == "quadratic":
            _, c1, c2 = self.coefficients
            return max(abs(c1 + 2 * c2 * lo), abs(c1 + 2 * c2 * hi))
        if hi <= lo:
            # a single point: use the slope of the piece containing it
            segs = self._segments(lo - 1e-9, lo + 1e-9)
            return max((abs(s[2]) for s in segs), default=0.0)
        return max((abs(s[2]) for s in self._segments(lo, hi)), default=0.0)

    def sup_abs(self, lo: float, hi: float) -> float:
        """max |f| on [lo, hi]."""
        pts = [lo, hi]
        if self.kind == "quadratic":
            _, c1, c2 = self.coefficients
            if c2 != 0.0:
                v = -c1 / (2 * c2)
                if lo < v < hi:
                    pts.append(v)
        elif self.kind == "pwl":
            pts += [b for b in self._bp if lo < b < hi]
        return float(max(abs(self.scalar(p)) for p in pts))

    def is_nondecreasing(self, lo: float, hi: float) -> bool:
        """Grid check at resolution 1e-3*(hi - lo), exact for affine and pwl."""
        if hi <= lo:
            return True
        if self.kind == "affine":
            return self.coefficients[1] >= 0.0
        grid = np.linspace(lo, hi, 1001)
        if self.kind == "pwl":
            grid = np.union1d(grid, self._bp[(self._bp > lo) & (self._bp < hi)])
        v = self(grid)
        scale = max(1.0, float(np.max(np.abs(v))))
        return bool(np.all(np.diff(v) >= -1e-12 * scale))

    def antiderivative(self, s, origin: float = 0.0):
        """Primitive F with F(origin) = 0, evaluated at s (scalar or array)."""
        return self._primitive(s) - self._primitive(origin)

    def _primitive(self, s):
        if self.kind != "pwl":
            c0, c1, c2 = self.poly3()
            return ((c2 / 3.0 * s + c1 / 2.0) * s + c0) * s
        s_arr = np.asarray(s, dtype=float)
        bp, vals = self._bp, self._vals
        # cumulative integral at each breakpoint, constant extension outside
        cum = np.concatenate([[0.0], np.cumsum(np.diff(bp) * (vals[:-1] + vals[1:]) / 2)])
        j = np.clip(np.searchsorted(bp, s_arr, side="right") - 1, 0, bp.size - 1)
        left = bp[j]
        fl = vals[j]
        fs = np.interp(s_arr, bp, vals)
        out = cum[j] + (s_arr - left) * (fl + fs) / 2
        # left of the first breakpoint: constant value vals[0]
        out = np.where(s_arr < bp[0], (s_arr - bp[0]) * vals[0], out)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        if self.kind == "pwl":
            return {"kind": "pwl", "breakpoints": list(self.breakpoints), "values": list(self.values)}
        return {"kind": self.kind, "coefficients": list(self.coefficients)}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionSpec":
        kind = _KIND_ALIASES.get(d["kind"], d["kind"])
        if kind == "pwl":
            return cls.pwl(d["breakpoints"], d["values"])
        return cls(kind, tuple(d["coefficients"]))
