"""Experiment configuration: one TOML document drives every stage.

Sections: [model] (built-in name plus parameters, or a custom Jacobian
table), [audit], [spectral], [profile], [evolve] with nested
[evolve.perturbation], [stability], [output].  A configuration is
validated for the requested stages before any computation starts, and
every diagnostic names the offending field.
"""

from __future__ import annotations

import hashlib
import sys as _sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

if _sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError
from .model import ReactionSystem, make_holling2_model, make_ricker_model

HOLLING2_FIELDS = ("a1", "a2", "d1", "d2", "alpha1", "alpha2", "beta1",
                   "beta2", "gamma1", "gamma2")
RICKER_FIELDS = ("a", "a1", "a2", "d1", "d2", "p", "q", "m")


@dataclass
class ExperimentConfig:
    raw: dict
    path: Optional[str] = None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls(raw=raw, path=str(path))

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        return cls(raw=dict(raw))

    # -- access helpers ----------------------------------------------------

    def section(self, name: str, required: bool = False) -> dict:
        sec = self.raw.get(name)
        if sec is None:
            if required:
                raise ConfigError(f"missing required section [{name}]")
            return {}
        if not isinstance(sec, dict):
            raise ConfigError(f"[{name}] must be a table")
        return sec

    def digest(self) -> str:
        blob = repr(sorted_items(self.raw)).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- stage validation ---------------------------------------------------

    STAGE_SECTIONS = {
        "audit": ("model",),
        "spectral": ("model", "spectral"),
        "wave": ("model", "spectral", "profile"),
        "evolve": ("model", "spectral", "profile", "evolve"),
        "stability": ("model", "spectral", "profile", "evolve", "stability"),
    }

    def validate(self, stages) -> None:
        needed = set()
        for st in stages:
            if st not in self.STAGE_SECTIONS:
                raise ConfigError(f"unknown stage {st!r}")
            needed.update(self.STAGE_SECTIONS[st])
        for name in needed:
            if name == "stability":
                continue  # stability has usable defaults throughout
            self.section(name, required=(name in ("model", "spectral")
                                         and name in needed))
        self._validate_model()
        if "spectral" in needed:
            spec = self.section("spectral", required=True)
            if ("c" in spec) == ("c_multiplier" in spec):
                raise ConfigError(
                    "[spectral] must set exactly one of 'c' or 'c_multiplier'")
            for key in ("c", "c_multiplier", "epsilon"):
                if key in spec and not isinstance(spec[key], (int, float)):
                    raise ConfigError(f"[spectral].{key} must be a number")
        if any(st in ("wave", "evolve", "stability") for st in stages):
            if self.model_name() == "custom":
                raise ConfigError(
                    "custom Jacobian models support only the audit and "
                    "spectral stages; wave and evolution need a built-in "
                    "model with full kinetics")
            prof = self.section("profile")
            for key in ("m", "L", "tol", "max_iter"):
                if key in prof and not isinstance(prof[key], (int, float)):
                    raise ConfigError(f"[profile].{key} must be a number")
        if any(st in ("evolve", "stability") for st in stages):
            ev = self.section("evolve")
            if "t_end" not in ev:
                raise ConfigError("[evolve].t_end is required")

    # -- model construction --------------------------------------------------

    def model_name(self) -> str:
        model = self.section("model", required=True)
        name = model.get("name")
        if name not in ("holling2", "ricker", "custom"):
            raise ConfigError(
                f"[model].name must be 'holling2', 'ricker' or 'custom', "
                f"got {name!r}")
        return name

    def _validate_model(self):
        name = self.model_name()
        model = self.section("model")
        if name == "custom":
            cust = model.get("custom")
            if not isinstance(cust, dict):
                raise ConfigError("[model.custom] table required for a "
                                  "custom model")
            for key in ("n", "d", "K", "A0", "AK"):
                if key not in cust:
                    raise ConfigError(f"[model.custom].{key} is required")
            n = cust["n"]
            for key, depth in (("d", 1), ("K", 1), ("A0", 2), ("AK", 2)):
                arr = np.asarray(cust[key], dtype=float)
                want = (n,) if depth == 1 else (n, n)
                if arr.shape != want:
                    raise ConfigError(
                        f"[model.custom].{key} must have shape {want}")
        else:
            params = model.get("params")
            if not isinstance(params, dict):
                raise ConfigError("[model.params] table required for a "
                                  "built-in model")
            wanted = HOLLING2_FIELDS if name == "holling2" else RICKER_FIELDS
            for key in wanted:
                if key not in params:
                    raise ConfigError(f"[model.params].{key} is required for "
                                      f"the {name} model")
                if not isinstance(params[key], (int, float)):
                    raise ConfigError(f"[model.params].{key} must be a number")
            extra = set(params) - set(wanted)
            if extra:
                raise ConfigError(
                    f"[model.params] has unknown fields for {name}: "
                    f"{sorted(extra)}")

    def build_system(self) -> Optional[ReactionSystem]:
        """The reaction system, or None for custom Jacobian-only models."""
        name = self.model_name()
        if name == "custom":
            return None
        params = self.section("model")["params"]
        if name == "holling2":
            return make_holling2_model(**params)
        return make_ricker_model(**params)

    def custom_char_data(self):
        """(n, d, A0, AK, K) for a custom Jacobian model."""
        cust = self.section("model")["custom"]
        return (int(cust["n"]), np.asarray(cust["d"], dtype=float),
                np.asarray(cust["A0"], dtype=float),
                np.asarray(cust["AK"], dtype=float),
                np.asarray(cust["K"], dtype=float))


def sorted_items(obj):
    """Canonical nested representation for digesting."""
    if isinstance(obj, dict):
        return tuple((k, sorted_items(obj[k])) for k in sorted(obj))
    if isinstance(obj, (list, tuple)):
        return tuple(sorted_items(v) for v in obj)
    return obj
