"""Exchangeable sequence laws over a finite alphabet.

Each family exposes the exact cylinder probability P_n(i): the probability
of observing any single length-n sequence whose color counts equal the
composition i (the law of an exchangeable sequence is constant on such
classes).  Families:

  IID(p)            product law, P_n(i) = prod_j p_j^(i_j)
  Polya(alpha)      Dirichlet-multinomial,
                    P_n(i) = prod_j rising(alpha_j, i_j) / rising(sum alpha, n)
  HLS(K,pi,nu,a)    first color driven by a Beta(pi,nu) weight, the other
                    colors splitting the remainder in fixed proportions
                    a_1..a_{K-2}, sum a < 1:
                    P_n(i) = prod_t a_t^(i_{t+1}) * (1-sum a)^(i_K)
                             * B(pi+i_1, nu+n-i_1) / B(pi, nu)
  MixtureIID        finite mixture of IID laws

All parameters are rational and every probability is an exact Fraction.
Colors are indexed 0..K-1 throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .exactnum import (
    Composition,
    Rational,
    RationalLike,
    beta_ratio,
    class_size,
    compositions,
    format_rational,
    multinomial,
    parse_rational,
    rising_factorial,
)

__all__ = [
    "IID",
    "Polya",
    "HLS",
    "MixtureIID",
    "ExchangeableLaw",
    "cylinder_prob",
    "class_prob",
    "predictive_prob",
    "conditional_block_prob",
    "ConsistencyReport",
    "check_consistency",
    "parse_law",
    "format_law",
    "law_to_jsonable",
    "law_from_jsonable",
    "load_law_file",
]


def _rational_vector(values: Sequence[RationalLike]) -> tuple[Rational, ...]:
    return tuple(parse_rational(v) for v in values)


@dataclass(frozen=True)
class IID:
    """Independent draws from a fixed strictly positive distribution p."""

    p: tuple[Rational, ...]

    def __post_init__(self) -> None:
        p = _rational_vector(self.p)
        object.__setattr__(self, "p", p)
        if len(p) < 2:
            raise ValueError("IID needs at least two colors")
        if any(x <= 0 for x in p):
            raise ValueError("IID probabilities must be strictly positive")
        if sum(p) != 1:
            raise ValueError("IID probabilities must sum to 1")

    @property
    def K(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class Polya:
    """Dirichlet-directed exchangeable law with positive weights alpha."""

    alpha: tuple[Rational, ...]

    def __post_init__(self) -> None:
        alpha = _rational_vector(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if len(alpha) < 2:
            raise ValueError("Polya needs at least two colors")
        if any(x <= 0 for x in alpha):
            raise ValueError("Polya weights must be strictly positive")

    @property
    def K(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class HLS:
    """K-color law whose directing measure sits on a curve in the simplex.

    The first coordinate carries a Beta(pi, nu) weight theta; colors
    2..K-1 receive fixed shares alpha_1..alpha_{K-2} of 1-theta and color
    K the remaining (1 - sum alpha) share.  Needs K >= 3 and sum alpha < 1.
    """

    K: int
    pi: Rational
    nu: Rational
    alpha: tuple[Rational, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.K, int) or self.K < 3:
            raise ValueError("HLS needs an integer K >= 3")
        object.__setattr__(self, "pi", parse_rational(self.pi))
        object.__setattr__(self, "nu", parse_rational(self.nu))
        alpha = _rational_vector(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.pi <= 0 or self.nu <= 0:
            raise ValueError("HLS needs pi > 0 and nu > 0")
        if len(alpha) != self.K - 2:
            raise ValueError(f"HLS with K={self.K} needs exactly {self.K - 2} alpha entries")
        if any(a <= 0 for a in alpha):
            raise ValueError("HLS alpha entries must be strictly positive")
        if sum(alpha) >= 1:
            raise ValueError("HLS needs sum(alpha) < 1")


@dataclass(frozen=True)
class MixtureIID:
    """Finite mixture of IID laws with positive weights summing to 1."""

    weights: tuple[Rational, ...]
    components: tuple[tuple[Rational, ...], ...]

    def __post_init__(self) -> None:
        weights = _rational_vector(self.weights)
        components = tuple(_rational_vector(c) for c in self.components)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)
        if not components:
            raise ValueError("MixtureIID needs at least one component")
        if len(weights) != len(components):
            raise ValueError("MixtureIID needs one weight per component")
        if any(w <= 0 for w in weights):
            raise ValueError("MixtureIID weights must be strictly positive")
        if sum(weights) != 1:
            raise ValueError("MixtureIID weights must sum to 1")
        k = len(components[0])
        for comp in components:
            if len(comp) != k:
                raise ValueError("MixtureIID components must share one alphabet")
            if len(comp) < 2 or any(x <= 0 for x in comp) or sum(comp) != 1:
                raise ValueError("each MixtureIID component must be a valid IID vector")

    @property
    def K(self) -> int:
        return len(self.components[0])


ExchangeableLaw = Union[IID, Polya, HLS, MixtureIID]


@lru_cache(maxsize=None)
def _cylinder(law: ExchangeableLaw, i: Composition) -> Rational:
    n = i.order
    if isinstance(law, IID):
        out = Fraction(1)
        for pj, ij in zip(law.p, i):
            out *= pj ** ij
        return out
    if isinstance(law, Polya):
        out = Fraction(1)
        for aj, ij in zip(law.alpha, i):
            out *= rising_factorial(aj, ij)
        return out / rising_factorial(sum(law.alpha), n)
    if isinstance(law, HLS):
        out = beta_ratio(law.pi, law.nu, i[0], n - i[0])
        for at, count in zip(law.alpha, i[1 : law.K - 1]):
            out *= at ** count
        out *= (1 - sum(law.alpha)) ** i[law.K - 1]
        return out
    if isinstance(law, MixtureIID):
        out = Fraction(0)
        for w, p in zip(law.weights, law.components):
            term = w
            for pj, ij in zip(p, i):
                term *= pj ** ij
            out += term
        return out
    raise TypeError(f"unknown law type {type(law).__name__}")


def _as_composition(law: ExchangeableLaw, i: Sequence[int]) -> Composition:
    comp = i if isinstance(i, Composition) else Composition(i)
    if comp.colors != law.K:
        raise ValueError(f"composition has {comp.colors} colors, law has {law.K}")
    return comp


def cylinder_prob(law: ExchangeableLaw, i: Sequence[int]) -> Rational:
    """P_n(i): probability of any single sequence with color counts i."""
    return _cylinder(law, _as_composition(law, i))


def class_prob(law: ExchangeableLaw, i: Sequence[int]) -> Rational:
    """Probability of the whole class: multinomial(n; i) * P_n(i)."""
    comp = _as_composition(law, i)
    return class_size(comp) * _cylinder(law, comp)


def predictive_prob(law: ExchangeableLaw, h: Sequence[int], j: int) -> Rational:
    """P(next draw is color j | counts so far are h) = P(h + e_j) / P(h)."""
    comp = _as_composition(law, h)
    ph = _cylinder(law, comp)
    if ph == 0:
        raise ValueError("conditioning class has zero probability")
    return _cylinder(law, comp.increment(j)) / ph


def conditional_block_prob(
    law: ExchangeableLaw, n: int, u: int, a: Sequence[int], b: Sequence[int]
) -> Rational:
    """Probability that counts reach b after u-1 more draws, given a.

    a has order n, b has order n+u-1.  The u-1 extra draws are allocated
    by color; when b-a is not a valid allocation (some b_p < a_p on the
    first K-1 colors, or more than u-1 units placed there) the result is 0.
    """
    if u < 2:
        raise ValueError(f"conditional_block_prob needs u >= 2, got {u}")
    ca = _as_composition(law, a)
    cb = _as_composition(law, b)
    if ca.order != n:
        raise ValueError(f"conditioning composition must have order {n}")
    if cb.order != n + u - 1:
        raise ValueError(f"target composition must have order {n + u - 1}")
    pa = _cylinder(law, ca)
    if pa == 0:
        raise ValueError("conditioning class has zero probability")
    head = law.K - 1
    diffs = tuple(cb[p] - ca[p] for p in range(head))
    if any(d < 0 for d in diffs) or sum(diffs) > u - 1:
        return Fraction(0)
    return multinomial(u - 1, diffs) * _cylinder(law, cb) / pa


@dataclass(frozen=True)
class ConsistencyReport:
    law_spec: str
    n_max: int
    passed: bool
    failure: Optional[dict]

    def to_jsonable(self) -> dict:
        return {
            "schema_version": 1,
            "law": self.law_spec,
            "n_max": self.n_max,
            "passed": self.passed,
            "failure": self.failure,
        }


def check_consistency(law: ExchangeableLaw, n_max: int) -> ConsistencyReport:
    """Exact sweep of positivity, Kolmogorov consistency, and normalization.

    For every n <= n_max: P_n(i) > 0 on all classes, P_n(i) equals the sum
    of P_{n+1}(i + e_j) over colors, and the class probabilities sum to 1.
    Stops at the first counterexample.
    """
    if n_max < 1:
        raise ValueError("check_consistency needs n_max >= 1")
    spec = format_law(law)

    def fail(kind: str, n: int, comp: Optional[Composition], detail: str) -> ConsistencyReport:
        failure = {
            "check": kind,
            "n": n,
            "composition": list(comp) if comp is not None else None,
            "detail": detail,
        }
        return ConsistencyReport(spec, n_max, False, failure)

    for n in range(1, n_max + 1):
        total = Fraction(0)
        for i in compositions(n, law.K):
            p = cylinder_prob(law, i)
            if p <= 0:
                return fail("positivity", n, i, format_rational(p))
            total += class_size(i) * p
            extended = sum(
                (cylinder_prob(law, i.increment(j)) for j in range(law.K)),
                Fraction(0),
            )
            if extended != p:
                return fail(
                    "kolmogorov", n, i,
                    f"{format_rational(p)} != {format_rational(extended)}",
                )
        if total != 1:
            return fail("normalization", n, None, format_rational(total))
    return ConsistencyReport(spec, n_max, True, None)


# law-spec grammar: "family:key=v1,v2,...;key=..." with rational values


def _parse_params(body: str) -> dict[str, list[str]]:
    params: dict[str, list[str]] = {}
    for segment in body.split(";"):
        segment = segment.strip()
        if not segment:
            continue
        key, eq, raw = segment.partition("=")
        if not eq:
            raise ValueError(f"malformed law parameter {segment!r}")
        if key.strip() in params:
            raise ValueError(f"duplicate law parameter {key.strip()!r}")
        params[key.strip()] = [v.strip() for v in raw.split(",") if v.strip()]
    return params


def parse_law(text: str) -> ExchangeableLaw:
    """Parse a law spec string.

    Grammar: ``iid:p=1/2,1/3,1/6`` | ``polya:alpha=1,2,3`` |
    ``hls:K=3,pi=1,nu=2,alpha=1/2`` |
    ``mixture:w=1/2,1/2;p1=1/2,1/4,1/4;p2=1/4,1/4,1/2``.
    """
    family, sep, body = text.strip().partition(":")
    family = family.strip().lower()
    if not sep:
        raise ValueError(f"law spec {text!r} is missing the family prefix")
    if family == "hls":
        # hls uses "," both to separate parameters and inside alpha, so
        # split on key boundaries instead of raw commas.
        params: dict[str, list[str]] = {}
        current: Optional[str] = None
        for piece in body.split(","):
            key, eq, raw = piece.partition("=")
            if eq:
                current = key.strip()
                if current in params:
                    raise ValueError(f"duplicate law parameter {current!r}")
                params[current] = [raw.strip()] if raw.strip() else []
            else:
                if current is None or not piece.strip():
                    raise ValueError(f"malformed hls parameter near {piece!r}")
                params[current].append(piece.strip())
        missing = {"K", "pi", "nu", "alpha"} - set(params)
        if missing:
            raise ValueError(f"hls law spec is missing {sorted(missing)}")
        try:
            k = int(params["K"][0])
        except (ValueError, IndexError) as exc:
            raise ValueError("hls K must be an integer") from exc
        if len(params["pi"]) != 1 or len(params["nu"]) != 1:
            raise ValueError("hls pi and nu take a single value")
        return HLS(k, params["pi"][0], params["nu"][0], tuple(params["alpha"]))
    params = _parse_params(body)
    if family == "iid":
        if set(params) != {"p"}:
            raise ValueError("iid law spec takes exactly the parameter p")
        return IID(tuple(params["p"]))
    if family == "polya":
        if set(params) != {"alpha"}:
            raise ValueError("polya law spec takes exactly the parameter alpha")
        return Polya(tuple(params["alpha"]))
    if family == "mixture":
        if "w" not in params:
            raise ValueError("mixture law spec needs weights w")
        names = [f"p{r + 1}" for r in range(len(params["w"]))]
        if set(params) != {"w", *names}:
            raise ValueError(
                f"mixture with {len(params['w'])} weights needs components {names}"
            )
        return MixtureIID(
            tuple(params["w"]),
            tuple(tuple(params[name]) for name in names),
        )
    raise ValueError(f"unknown law family {family!r}")


def format_law(law: ExchangeableLaw) -> str:
    """Canonical law spec string; parse_law(format_law(law)) == law."""
    if isinstance(law, IID):
        return "iid:p=" + ",".join(str(x) for x in law.p)
    if isinstance(law, Polya):
        return "polya:alpha=" + ",".join(str(x) for x in law.alpha)
    if isinstance(law, HLS):
        alpha = ",".join(str(x) for x in law.alpha)
        return f"hls:K={law.K},pi={law.pi},nu={law.nu},alpha={alpha}"
    if isinstance(law, MixtureIID):
        parts = ["w=" + ",".join(str(x) for x in law.weights)]
        for r, comp in enumerate(law.components):
            parts.append(f"p{r + 1}=" + ",".join(str(x) for x in comp))
        return "mixture:" + ";".join(parts)
    raise TypeError(f"unknown law type {type(law).__name__}")


def law_to_jsonable(law: ExchangeableLaw) -> dict:
    """JSON form mirroring the inline law-string grammar, one field per
    parameter."""
    if isinstance(law, IID):
        return {"family": "iid", "p": [format_rational(x) for x in law.p]}
    if isinstance(law, Polya):
        return {"family": "polya", "alpha": [format_rational(x) for x in law.alpha]}
    if isinstance(law, HLS):
        return {
            "family": "hls",
            "K": law.K,
            "pi": format_rational(law.pi),
            "nu": format_rational(law.nu),
            "alpha": [format_rational(x) for x in law.alpha],
        }
    if isinstance(law, MixtureIID):
        out = {"family": "mixture", "w": [format_rational(x) for x in law.weights]}
        for r, comp in enumerate(law.components):
            out[f"p{r + 1}"] = [format_rational(x) for x in comp]
        return out
    raise TypeError(f"unknown law type {type(law).__name__}")


def law_from_jsonable(obj: dict) -> ExchangeableLaw:
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValueError("law JSON must be an object with a 'family' field")
    family = obj["family"]
    if family == "iid":
        return IID(tuple(obj["p"]))
    if family == "polya":
        return Polya(tuple(obj["alpha"]))
    if family == "hls":
        return HLS(int(obj["K"]), obj["pi"], obj["nu"], tuple(obj["alpha"]))
    if family == "mixture":
        weights = tuple(obj["w"])
        names = [f"p{r + 1}" for r in range(len(weights))]
        missing = [name for name in names if name not in obj]
        if missing:
            raise ValueError(f"mixture law JSON is missing {missing}")
        return MixtureIID(weights, tuple(tuple(obj[name]) for name in names))
    raise ValueError(f"unknown law family {family!r}")


def load_law_file(path: str) -> ExchangeableLaw:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"law file {path} is not valid JSON: {exc}") from exc
    return law_from_jsonable(obj)
