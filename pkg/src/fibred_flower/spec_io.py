"""Map-spec format (JSON, schema ``fibred-flower/map-spec@1``).

Grammar::

    {
      "schema": "fibred-flower/map-spec@1",
      "alpha": {"cf": [a0, a1, ...], "periodic_tail": k} | {"float": x},
      "lambda": {"p": int, "q": int >= 1},                  optional, default 0/1
      "truncation": N >= 2,
      "coefficients": [{"order": j, "modes": [{"freq": n, "re": x, "im": y}, ...]}, ...],
      "options": {...}                                      optional, see Options
    }

Unknown keys are rejected at every level. Validation reports every
violation found, not only the first.
"""

import hashlib
import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import SpecError
from .fibredjet import FibredJet
from .rotation import RootOfUnity, RotationNumber
from .trigpoly import TrigPoly

SCHEMA = "fibred-flower/map-spec@1"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Mode(_Strict):
    freq: int
    re: float = 0.0
    im: float = 0.0


class Coefficient(_Strict):
    order: int
    modes: list[Mode]


class CFAlpha(_Strict):
    cf: list[int] = Field(min_length=1)
    periodic_tail: int = 0


class FloatAlpha(_Strict):
    float_: float = Field(alias="float")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class Lambda(_Strict):
    p: int = 0
    q: int = Field(default=1, ge=1)


class Options(_Strict):
    diagnostic: bool = False
    max_order: int | None = None
    mean_tol: float = Field(default=1e-10, gt=0)
    seeds: int = Field(default=200, ge=1)
    budget: int = Field(default=100_000, ge=1)
    seed: int = 0
    radius: float = Field(default=0.02, gt=0)
    converge_tol: float = Field(default=1e-12, gt=0)
    escape_radius: float = Field(default=1.0, gt=0)
    fibres: int = Field(default=8, ge=1)
    resolution: int = Field(default=200, ge=2)
    cascade_z0: list[float] = Field(default_factory=lambda: [0.0, 0.0], min_length=2, max_length=2)
    delta: float = Field(default=0.1, gt=0)
    tau: float = Field(default=0.0, ge=0)
    nu: int | None = Field(default=None, ge=1)


class MapSpec(_Strict):
    schema_: Literal[SCHEMA] = Field(alias="schema")
    alpha: CFAlpha | FloatAlpha
    lambda_: Lambda = Field(default_factory=Lambda, alias="lambda")
    truncation: int
    coefficients: list[Coefficient] = Field(default_factory=list)
    options: Options = Field(default_factory=Options)

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    # -- conversions ----------------------------------------------------------
    def rotation(self):
        if isinstance(self.alpha, CFAlpha):
            return RotationNumber.from_cf(self.alpha.cf, self.alpha.periodic_tail)
        return RotationNumber.from_float(self.alpha.float_)

    def multiplier(self):
        return RootOfUnity(self.lambda_.p, self.lambda_.q)

    def coefficient(self, order):
        for c in self.coefficients:
            if c.order == order:
                return TrigPoly.from_records([m.model_dump() for m in c.modes])
        return TrigPoly.zero()

    def jet(self):
        coeffs = {c.order: TrigPoly.from_records([m.model_dump() for m in c.modes]) for c in self.coefficients}
        return FibredJet.from_coefficients(self.rotation(), coeffs, N=self.truncation, lam=self.multiplier())

    def to_json(self):
        """Canonical text: sorted keys, no whitespace variation."""
        return json.dumps(self.model_dump(by_alias=True, mode="json"), sort_keys=True, indent=2) + "\n"

    def sha256(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _loc(err):
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def _semantic(spec):
    out = []
    N = spec.truncation
    if N < 2:
        out.append(f"truncation: must be >= 2, got {N}")
    seen = {}
    for i, c in enumerate(spec.coefficients):
        if c.order in seen:
            out.append(f"coefficients[{i}].order: duplicate order {c.order} (first at coefficients[{seen[c.order]}])")
        else:
            seen[c.order] = i
        if not 2 <= c.order <= N:
            out.append(f"coefficients[{i}].order: {c.order} outside 2..{N}")
    try:
        alpha = spec.rotation()
    except ValueError as exc:
        out.append(f"alpha: {exc}")
    else:
        if alpha.is_rational and not spec.options.diagnostic:
            out.append(f"alpha: rational value {alpha.rational} is resonant; set options.diagnostic to accept it")
    mo = spec.options.max_order
    if mo is not None and mo < 2:
        out.append(f"options.max_order: must be >= 2, got {mo}")
    return out


def parse_spec(text):
    """Validated :class:`MapSpec` from JSON text, or :class:`SpecError` listing all violations."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError([f"<root>: invalid JSON ({exc})"]) from None
    if not isinstance(data, dict):
        raise SpecError(["<root>: expected a JSON object"])
    try:
        spec = MapSpec.model_validate(data)
    except ValidationError as exc:
        problems = [f"{_loc(e)}: {e['msg']}" for e in exc.errors()]
        # unknown keys alone should not hide the semantic checks
        extras = [e["loc"] for e in exc.errors() if e["type"] == "extra_forbidden"]
        if len(extras) == len(problems):
            stripped = json.loads(json.dumps(data))
            for loc in extras:
                node = stripped
                for p in loc[:-1]:
                    node = node[p]
                node.pop(loc[-1], None)
            try:
                problems += _semantic(MapSpec.model_validate(stripped))
            except ValidationError:
                pass
        raise SpecError(problems) from None
    problems = _semantic(spec)
    if problems:
        raise SpecError(problems)
    return spec


def emit_spec(spec):
    return spec.to_json()


def spec_from_jet(F, options=None):
    """Spec text for an existing jet (continued-fraction alphas keep their form)."""
    alpha = F.alpha.to_dict()
    data = {
        "schema": SCHEMA,
        "alpha": alpha,
        "lambda": {"p": F.lam.p, "q": F.lam.q},
        "truncation": F.N,
        "coefficients": F.coefficient_records(),
        "options": options or {},
    }
    return MapSpec.model_validate(data)


__all__ = ["MapSpec", "Options", "parse_spec", "emit_spec", "spec_from_jet", "SCHEMA"]
