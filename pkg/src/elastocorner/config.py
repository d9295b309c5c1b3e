"""JSON experiment configuration.

Example document (every block is optional; defaults shown)::

    {
      "medium":   {"lambda": 1.0, "mu": 1.0, "omega": 6.283185307179586,
                   "rho": {"kind": "radial-bump", "R": 1.0, "amplitude": 0.3}},
      "geometry": {"polygon": {"vertices": [[-0.5, -0.4], [0.6, -0.3], [0.0, 0.6]]}},
      "source":   {"value": [1.0, 0.5]},
      "solver":   {"grid_M": 128, "box_B": 1.1, "lattice_N": 64, "R_prime": 2.0,
                   "R1": 1.5, "tau_sweep": [20, 40, 80, 160], "tol": 1e-10,
                   "max_iter": 100, "n_directions": 128, "rel_tol": 1e-3},
      "options":  {},
      "out": "out",
      "seed": 0
    }

``geometry`` holds either ``{"sector": {apex, theta_m, theta_M, h}}`` or
``{"polygon": {"vertices": [...]}}``. ``source`` lists the polynomial
coefficients (``value``, ``gradient``, ``hessian``, ``anchor``); its
support is the geometry.
"""
from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .domain import ConvexPolygon, ElasticMedium, Sector, SourceModel


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


DEFAULT_SOLVER = {
    "grid_M": 128,
    "box_B": 1.1,
    "lattice_N": 64,
    "R_prime": 2.0,
    "R1": 1.5,
    "tau_sweep": [20.0, 40.0, 80.0, 160.0],
    "tol": 1e-10,
    "max_iter": 100,
    "n_directions": 128,
    "rel_tol": 1e-3,
}


@dataclass
class ExperimentConfig:
    medium: ElasticMedium = field(default_factory=ElasticMedium)
    geometry: Optional[Union[Sector, ConvexPolygon]] = None
    source: dict = field(default_factory=dict)
    solver: dict = field(default_factory=lambda: dict(DEFAULT_SOLVER))
    options: dict = field(default_factory=dict)
    out: str = "out"
    seed: int = 0

    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            medium = ElasticMedium.from_dict(d["medium"]) if "medium" in d else ElasticMedium()
            geometry = None
            g = d.get("geometry")
            if g:
                if "sector" in g:
                    geometry = Sector.from_dict(g["sector"])
                elif "polygon" in g:
                    geometry = ConvexPolygon.from_dict(g["polygon"])
                else:
                    raise ConfigError("geometry needs a 'sector' or 'polygon' block")
            solver = dict(DEFAULT_SOLVER)
            solver.update(d.get("solver", {}))
            cfg = cls(medium, geometry, dict(d.get("source", {})), solver,
                      dict(d.get("options", {})), str(d.get("out", "out")),
                      int(d.get("seed", 0)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc

    def to_dict(self) -> dict:
        d = {"medium": self.medium.to_dict(), "source": self.source, "solver": self.solver,
             "options": self.options, "out": self.out, "seed": self.seed}
        if isinstance(self.geometry, Sector):
            d["geometry"] = {"sector": self.geometry.to_dict()}
        elif isinstance(self.geometry, ConvexPolygon):
            d["geometry"] = {"polygon": self.geometry.to_dict()}
        return d

    # ------------------------------------------------------------------
    @property
    def tau_sweep(self) -> list[float]:
        return [float(t) for t in self.solver["tau_sweep"]]

    def validate(self) -> None:
        s = self.solver
        R = self.medium.rho.R
        if not (R < s["R1"] < s["R_prime"]):
            raise ConfigError(f"need R < R1 < R' (got {R}, {s['R1']}, {s['R_prime']})")
        for key in ("tol", "rel_tol", "box_B"):
            if not float(s[key]) > 0:
                raise ConfigError(f"solver.{key} must be positive")
        # box_B is relative: the forward box half-width is box_B * R
        if s["box_B"] <= 1.0:
            raise ConfigError("solver.box_B must exceed 1 so the forward box contains D_R")
        if not self.tau_sweep or min(self.tau_sweep) <= 0:
            raise ConfigError("tau sweep must hold positive values")
        for key in ("grid_M", "lattice_N", "max_iter", "n_directions"):
            if int(s[key]) < 1:
                raise ConfigError(f"solver.{key} must be a positive integer")
        if self.geometry is not None and self.options.get("check_inside", True):
            if self._geometry_radius() >= R:
                raise ConfigError("geometry must lie strictly inside D_R")

    def _geometry_radius(self) -> float:
        g = self.geometry
        if isinstance(g, ConvexPolygon):
            return g.max_radius()
        th = np.linspace(g.theta_m, g.theta_M, 65)
        pts = np.vstack([g.apex[None], g.arc(th)])
        return float(np.max(np.linalg.norm(pts, axis=1)))

    def source_model(self) -> SourceModel:
        if self.geometry is None:
            raise ConfigError("a source needs a geometry block")
        src = self.source
        return SourceModel(self.geometry, value=src.get("value", [0.0, 0.0]),
                           gradient=src.get("gradient", [[0.0, 0.0], [0.0, 0.0]]),
                           hessian=src.get("hessian"), anchor=src.get("anchor"))


def parse_angle(text: str) -> float:
    """Parse ``0``, ``pi/2``, ``-pi/6``, ``2*pi/3``, ``0.5`` into radians."""
    ops = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in ("pi", "π"):
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in ops:
            return ops[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in ops:
            return ops[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse angle {text!r}")

    try:
        return ev(ast.parse(text.replace("π", "pi"), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse angle {text!r}") from exc
