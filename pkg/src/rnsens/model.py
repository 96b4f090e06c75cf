"""Reaction networks, parameterized propensities and output functions.

Mass-action propensities are separable: ``lambda_k(x, theta) = g_k(theta) * h_k(x)``
where ``g_k`` is a sparse polynomial in the parameters and ``h_k`` is a product of
falling factorials of the reactant counts. That form gives exact parameter
derivatives and is what the JSON model files describe. Arbitrary propensities can
be supplied from Python through :class:`Custom`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

from .errors import InvalidPropensity, ModelError, ModelFileError, StateUnderflow

State = Tuple[int, ...]


def falling_factorial(n: int, order: int) -> float:
    v = 1.0
    for m in range(order):
        v *= n - m
    return v


@dataclass(frozen=True)
class MassActionPoly:
    """``rate_poly(theta) * prod_s x_s (x_s - 1) ... (x_s - nu_s + 1)``.

    ``rate_poly`` is a tuple of ``(coefficient, exponents)`` terms with one
    exponent per parameter.
    """

    rate_poly: Tuple[Tuple[float, Tuple[int, ...]], ...]
    reactant_orders: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "rate_poly",
            tuple((float(c), tuple(int(e) for e in ex)) for c, ex in self.rate_poly),
        )
        object.__setattr__(self, "reactant_orders", tuple(int(v) for v in self.reactant_orders))
        if any(v < 0 for v in self.reactant_orders):
            raise ModelError("reactant orders must be non-negative")
        for _, ex in self.rate_poly:
            if any(e < 0 for e in ex):
                raise ModelError("rate polynomial exponents must be non-negative")

    def rate(self, theta: Sequence[float]) -> float:
        total = 0.0
        for coeff, ex in self.rate_poly:
            term = coeff
            for q, e in enumerate(ex):
                for _ in range(e):
                    term *= theta[q]
            total += term
        return total

    def rate_grad(self, theta: Sequence[float], q: int) -> float:
        total = 0.0
        for coeff, ex in self.rate_poly:
            if ex[q] == 0:
                continue
            term = coeff * ex[q]
            for r, e in enumerate(ex):
                if r == q:
                    e -= 1
                for _ in range(e):
                    term *= theta[r]
            total += term
        return total

    def rate_hess(self, theta: Sequence[float], i: int, j: int) -> float:
        total = 0.0
        for coeff, ex in self.rate_poly:
            ex = list(ex)
            if ex[i] == 0:
                continue
            term = coeff * ex[i]
            ex[i] -= 1
            if ex[j] == 0:
                continue
            term *= ex[j]
            ex[j] -= 1
            for r, e in enumerate(ex):
                for _ in range(e):
                    term *= theta[r]
            total += term
        return total

    def state_factor(self, x: Sequence[int]) -> float:
        h = 1.0
        for xs, nu in zip(x, self.reactant_orders):
            for m in range(nu):
                h *= xs - m
        return h

    def params_used(self):
        return {q for _, ex in self.rate_poly for q, e in enumerate(ex) if e > 0}


@dataclass(frozen=True)
class Custom:
    """User propensity given by value, gradient and Hessian callables.

    Signatures: ``value(x, theta)``, ``grad(x, theta, q)``, ``hess(x, theta, i, j)``.
    The derivatives must be exact partials in theta; nothing checks this at
    run time. Custom propensities always run on the pure-Python backend.
    """

    value: Callable
    grad: Callable
    hess: Callable
    params: Optional[Tuple[int, ...]] = None


PropensitySpec = Union[MassActionPoly, Custom]


@dataclass(frozen=True)
class ReactionNetwork:
    stoich: Tuple[Tuple[int, ...], ...]
    propensities: Tuple[PropensitySpec, ...]
    param_count: int
    species: Tuple[str, ...] = ()
    param_names: Tuple[str, ...] = ()

    def __post_init__(self):
        stoich = tuple(tuple(int(v) for v in z) for z in self.stoich)
        object.__setattr__(self, "stoich", stoich)
        object.__setattr__(self, "propensities", tuple(self.propensities))
        if len(stoich) != len(self.propensities):
            raise ModelError(
                f"{len(stoich)} stoichiometric vectors but {len(self.propensities)} propensities"
            )
        if not stoich:
            d = len(self.species)
        else:
            d = len(stoich[0])
        if d <= 0:
            raise ModelError("species count must be positive")
        if any(len(z) != d for z in stoich):
            raise ModelError("every stoichiometric vector must have length d")
        if self.param_count <= 0:
            raise ModelError("parameter count must be positive")
        if not self.species:
            object.__setattr__(self, "species", tuple(f"S{s}" for s in range(d)))
        elif len(self.species) != d:
            raise ModelError("species names do not match stoichiometry length")
        if not self.param_names:
            object.__setattr__(
                self, "param_names", tuple(f"theta{q}" for q in range(self.param_count))
            )
        elif len(self.param_names) != self.param_count:
            raise ModelError("parameter names do not match parameter count")
        for k, spec in enumerate(self.propensities):
            if isinstance(spec, MassActionPoly):
                if len(spec.reactant_orders) != d:
                    raise ModelError(f"reaction {k}: reactant orders must have length {d}")
                if any(len(ex) != self.param_count for _, ex in spec.rate_poly):
                    raise ModelError(
                        f"reaction {k}: rate exponents must have length {self.param_count}"
                    )
            elif isinstance(spec, Custom):
                if spec.params is not None and any(
                    not 0 <= q < self.param_count for q in spec.params
                ):
                    raise ModelError(f"reaction {k}: parameter index out of range")
            else:
                raise ModelError(f"reaction {k}: unsupported propensity {type(spec).__name__}")

    @property
    def d(self) -> int:
        return len(self.species)

    @property
    def K(self) -> int:
        return len(self.stoich)

    @property
    def p(self) -> int:
        return self.param_count

    @property
    def is_mass_action(self) -> bool:
        return all(isinstance(s, MassActionPoly) for s in self.propensities)


@dataclass(frozen=True)
class Parameters:
    theta: Tuple[float, ...]

    def __post_init__(self):
        theta = tuple(float(v) for v in self.theta)
        if not all(math.isfinite(v) for v in theta):
            raise ModelError("parameters must be finite")
        object.__setattr__(self, "theta", theta)

    def __len__(self):
        return len(self.theta)

    def __getitem__(self, q):
        return self.theta[q]

    def __iter__(self):
        return iter(self.theta)

    def perturbed(self, deltas: Mapping[int, float]) -> "Parameters":
        theta = list(self.theta)
        for q, dv in deltas.items():
            theta[q] += dv
        return Parameters(tuple(theta))


def as_theta(net: ReactionNetwork, theta) -> Tuple[float, ...]:
    if isinstance(theta, Parameters):
        theta = theta.theta
    theta = tuple(float(v) for v in theta)
    if len(theta) != net.param_count:
        raise ModelError(f"expected {net.param_count} parameters, got {len(theta)}")
    return theta


@dataclass(frozen=True)
class OutputFunction:
    """Polynomial output ``f(x) = sum_m coeff_m * prod_s x_s ** powers_ms``."""

    terms: Tuple[Tuple[float, Tuple[int, ...]], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "terms",
            tuple((float(c), tuple(int(e) for e in pw)) for c, pw in self.terms),
        )
        for _, pw in self.terms:
            if any(e < 0 for e in pw):
                raise ModelError("output powers must be non-negative")

    @classmethod
    def species_count(cls, d: int, s: int = 0) -> "OutputFunction":
        powers = [0] * d
        powers[s] = 1
        return cls(((1.0, tuple(powers)),))

    def __call__(self, x: Sequence[int]) -> float:
        return self.eval(x)

    def eval(self, x: Sequence[int]) -> float:
        v = 0.0
        for coeff, pw in self.terms:
            term = coeff
            for xs, e in zip(x, pw):
                for _ in range(e):
                    term *= xs
            v += term
        return v

    def delta(self, x: Sequence[int], zeta: Sequence[int]) -> float:
        y = shifted(x, zeta)
        return self.eval(y) - self.eval(x)


def shifted(x: Sequence[int], zeta: Sequence[int]) -> State:
    y = tuple(a + b for a, b in zip(x, zeta))
    if any(v < 0 for v in y):
        raise StateUnderflow(f"state {tuple(x)} + {tuple(zeta)} has a negative component")
    return y


def output_eval(f: OutputFunction, x: Sequence[int]) -> float:
    return f.eval(x)


def output_delta(f: OutputFunction, x: Sequence[int], zeta: Sequence[int]) -> float:
    return f.delta(x, zeta)


def _check_value(k, v):
    if not v >= 0 or math.isinf(v):
        raise InvalidPropensity(f"reaction {k}: propensity {v} is not a finite non-negative value")
    return v


def propensity_value(net: ReactionNetwork, k: int, x: Sequence[int], theta) -> float:
    theta = as_theta(net, theta)
    spec = net.propensities[k]
    if isinstance(spec, MassActionPoly):
        v = spec.rate(theta) * spec.state_factor(x)
    else:
        v = float(spec.value(tuple(x), theta))
    return _check_value(k, v)


def propensity_grad(net: ReactionNetwork, k: int, x: Sequence[int], theta, q: int) -> float:
    theta = as_theta(net, theta)
    if not 0 <= q < net.param_count:
        raise IndexError(f"parameter index {q} out of range")
    spec = net.propensities[k]
    if isinstance(spec, MassActionPoly):
        return spec.rate_grad(theta, q) * spec.state_factor(x)
    return float(spec.grad(tuple(x), theta, q))


def propensity_hessian(net: ReactionNetwork, k: int, x: Sequence[int], theta, i: int, j: int) -> float:
    theta = as_theta(net, theta)
    if not (0 <= i < net.param_count and 0 <= j < net.param_count):
        raise IndexError(f"parameter indices ({i}, {j}) out of range")
    spec = net.propensities[k]
    if isinstance(spec, MassActionPoly):
        # Canonical order keeps the result exactly symmetric.
        a, b = min(i, j), max(i, j)
        return spec.rate_hess(theta, a, b) * spec.state_factor(x)
    if i > j:
        i, j = j, i
    return float(spec.hess(tuple(x), theta, i, j))


def total_propensity(net: ReactionNetwork, x: Sequence[int], theta) -> float:
    total = 0.0
    for k in range(net.K):
        total += propensity_value(net, k, x, theta)
    return total


# --------------------------------------------------------------------------
# Model files


@dataclass(frozen=True)
class Model:
    """Everything a model file describes."""

    network: ReactionNetwork
    parameters: Parameters
    initial_state: State
    output: OutputFunction
    extra: Dict = field(default_factory=dict, compare=False)


_TOP_KEYS = {"species", "parameters", "reactions", "initial_state", "output"}
_REACTION_KEYS = {"stoich", "rate_poly", "reactants"}
_TERM_KEYS = {"coeff", "exponents"}
_OUTPUT_KEYS = {"coeff", "powers"}


def _require_mapping(obj, where):
    if not isinstance(obj, dict):
        raise ModelFileError(f"{where}: expected an object, got {type(obj).__name__}")
    return obj


def _check_keys(obj, allowed, required, where):
    _require_mapping(obj, where)
    for key in obj:
        if key not in allowed:
            raise ModelFileError(f"{where}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ModelFileError(f"{where}: missing key {key!r}")


def _int_value(v, where, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ModelFileError(f"{where}: expected an integer, got {v!r}")
    v = int(v)
    if nonneg and v < 0:
        raise ModelFileError(f"{where}: expected a non-negative integer, got {v}")
    return v


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ModelFileError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _name_vector(mapping, names, where, nonneg):
    _require_mapping(mapping, where)
    index = {n: i for i, n in enumerate(names)}
    vec = [0] * len(names)
    for name, v in mapping.items():
        if name not in index:
            raise ModelFileError(f"{where}: unknown name {name!r}")
        vec[index[name]] = _int_value(v, f"{where}.{name}", nonneg=nonneg)
    return tuple(vec)


def model_from_dict(doc) -> Model:
    _check_keys(doc, _TOP_KEYS, _TOP_KEYS, "model")
    species = doc["species"]
    if not isinstance(species, list) or not species or not all(isinstance(s, str) for s in species):
        raise ModelFileError("model.species: expected a non-empty array of names")
    if len(set(species)) != len(species):
        raise ModelFileError("model.species: duplicate species name")
    params = _require_mapping(doc["parameters"], "model.parameters")
    if not params:
        raise ModelFileError("model.parameters: at least one parameter is required")
    pnames = tuple(params)
    theta = tuple(_number(v, f"model.parameters.{n}") for n, v in params.items())

    reactions = doc["reactions"]
    if not isinstance(reactions, list):
        raise ModelFileError("model.reactions: expected an array")
    stoich, props = [], []
    for r, rx in enumerate(reactions):
        where = f"model.reactions[{r}]"
        _check_keys(rx, _REACTION_KEYS, {"stoich", "rate_poly"}, where)
        stoich.append(_name_vector(rx["stoich"], species, f"{where}.stoich", nonneg=False))
        orders = _name_vector(rx.get("reactants", {}), species, f"{where}.reactants", nonneg=True)
        if not isinstance(rx["rate_poly"], list):
            raise ModelFileError(f"{where}.rate_poly: expected an array")
        terms = []
        for m, term in enumerate(rx["rate_poly"]):
            tw = f"{where}.rate_poly[{m}]"
            _check_keys(term, _TERM_KEYS, {"coeff"}, tw)
            ex = _name_vector(term.get("exponents", {}), pnames, f"{tw}.exponents", nonneg=True)
            terms.append((_number(term["coeff"], f"{tw}.coeff"), ex))
        props.append(MassActionPoly(tuple(terms), orders))

    x0 = _name_vector(doc["initial_state"], species, "model.initial_state", nonneg=True)

    if not isinstance(doc["output"], list):
        raise ModelFileError("model.output: expected an array")
    out_terms = []
    for m, term in enumerate(doc["output"]):
        tw = f"model.output[{m}]"
        _check_keys(term, _OUTPUT_KEYS, {"coeff"}, tw)
        pw = _name_vector(term.get("powers", {}), species, f"{tw}.powers", nonneg=True)
        out_terms.append((_number(term["coeff"], f"{tw}.coeff"), pw))

    if not stoich:
        stoich_t = ()
    else:
        stoich_t = tuple(stoich)
    try:
        net = ReactionNetwork(
            stoich_t, tuple(props), len(pnames), species=tuple(species), param_names=pnames
        )
    except ModelFileError:
        raise
    except ModelError as exc:
        raise ModelFileError(f"model: {exc}") from exc
    return Model(net, Parameters(theta), x0, OutputFunction(tuple(out_terms)))


def model_to_dict(model: Model) -> dict:
    net = model.network
    species, pnames = net.species, net.param_names

    def named(vec, names, skip_zero=True):
        return {n: int(v) for n, v in zip(names, vec) if v or not skip_zero}

    reactions = []
    for z, spec in zip(net.stoich, net.propensities):
        if not isinstance(spec, MassActionPoly):
            raise ModelError("only mass-action propensities can be serialized")
        reactions.append(
            {
                "stoich": named(z, species),
                "rate_poly": [
                    {"coeff": c, "exponents": named(ex, pnames)} for c, ex in spec.rate_poly
                ],
                "reactants": named(spec.reactant_orders, species),
            }
        )
    return {
        "species": list(species),
        "parameters": {n: v for n, v in zip(pnames, model.parameters.theta)},
        "reactions": reactions,
        "initial_state": named(model.initial_state, species, skip_zero=False),
        "output": [{"coeff": c, "powers": named(pw, species)} for c, pw in model.output.terms],
    }


def load_model(path) -> Model:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)


def dump_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def birth_death(th1: float = 10.0, th2: float = 1.0, x0: int = 0) -> Model:
    """Immigration-death network used throughout the tests and docs."""
    net = ReactionNetwork(
        stoich=((1,), (-1,)),
        propensities=(
            MassActionPoly(((1.0, (1, 0)),), (0,)),
            MassActionPoly(((1.0, (0, 1)),), (1,)),
        ),
        param_count=2,
        species=("A",),
        param_names=("th1", "th2"),
    )
    return Model(net, Parameters((th1, th2)), (x0,), OutputFunction.species_count(1))


def product_birth_death(th=(2.0, 5.0, 1.0), x0: int = 0) -> Model:
    """Birth at rate th1*th2, death at rate th3*x."""
    net = ReactionNetwork(
        stoich=((1,), (-1,)),
        propensities=(
            MassActionPoly(((1.0, (1, 1, 0)),), (0,)),
            MassActionPoly(((1.0, (0, 0, 1)),), (1,)),
        ),
        param_count=3,
        species=("A",),
        param_names=("th1", "th2", "th3"),
    )
    return Model(net, Parameters(th), (x0,), OutputFunction.species_count(1))
