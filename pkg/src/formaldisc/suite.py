"""Verification suites: suite-file parsing, the check registry and reports.

A suite names registered checks; each runs with its own generator seeded
from ``(seed, name)`` so adding or removing a test never changes another
test's draws.  ``"<name>:mutant"`` runs the documented negative control of a
check, which passes exactly when the corrupted variant is caught.
"""

from __future__ import annotations

import io
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Mapping

from . import __version__
from .config_rational import (
    InsertionFrame,
    RationalSection,
    block_expansion,
    check_insertion_composition,
    check_insertion_expansion,
    check_K_property,
    check_pole_bounds,
    check_T_derivative,
    check_translation,
    enumerate_shuffles,
    reference_family,
    shuffle_kernel,
    shuffle_sum,
)
from .coords import (
    CoordinateChange,
    Derivation,
    exp_derivation,
    group_compose,
    group_inverse,
    log_coordinate_change,
)
from .density import DensityModule, ModuleSpec, check_admissible
from .differentials import (
    KDifferential,
    MultiplicationAction,
    canonical_differential,
    check_differential_invariance,
    pullback_kdifferential,
)
from .errors import FormalDiscError, NotInvertible, ParseError, UnknownTest, ValidationError
from .polynomial import Poly
from .rational import GaussianRational, format_fraction
from .report import CheckReport
from .series import LaurentSeries
from .torsor import (
    ModuleSection,
    PointAtlas,
    check_representation_law,
    check_section_invariance,
    exact_sequence_check,
    random_atlas,
    random_coordinate_change,
)

SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class SuiteSpec:
    truncation_order: int = 8
    grade_cutoff: int = 12
    seed: int = 42
    tests: tuple = ()
    coordinate_changes: tuple = ()
    module: ModuleSpec | None = None
    sections: tuple = ()
    expansion_order: int = 6
    trials: int = 100

    @property
    def density_module(self) -> ModuleSpec:
        return self.module if self.module is not None else ModuleSpec(1, self.grade_cutoff)

    def with_seed(self, seed: int) -> "SuiteSpec":
        return SuiteSpec(self.truncation_order, self.grade_cutoff, seed, self.tests, self.coordinate_changes,
                         self.module, self.sections, self.expansion_order, self.trials)

    def to_json(self) -> dict:
        out = {
            "truncation_order": self.truncation_order,
            "grade_cutoff": self.grade_cutoff,
            "seed": self.seed,
            "tests": list(self.tests),
            "coordinate_changes": [c.to_json() for c in self.coordinate_changes],
            "sections": [s.to_json() for s in self.sections],
            "expansion_order": self.expansion_order,
            "trials": self.trials,
        }
        if self.module is not None:
            out["module"] = self.module.to_json()
        return out


def serialize_spec(spec: SuiteSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True, indent=2) + "\n"


# -- parsing ----------------------------------------------------------------

_FIELDS = {"truncation_order", "grade_cutoff", "seed", "tests", "coordinate_changes", "module",
           "sections", "expansion_order", "trials"}


def _int_field(data, key, default, lo, hi=None):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    if value < lo or (hi is not None and value >= hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi})"
        raise ValidationError(f"{key} must be {bound}, got {value}")
    return value


def spec_from_dict(data: Mapping) -> SuiteSpec:
    """Validate a decoded suite."""
    if not isinstance(data, Mapping):
        raise ValidationError("a suite must be a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ValidationError(f"unknown field(s): {', '.join(unknown)}")
    order = _int_field(data, "truncation_order", 8, 2)
    cutoff = _int_field(data, "grade_cutoff", 12, 0)
    seed = _int_field(data, "seed", 42, 0, SEED_LIMIT)
    expansion = _int_field(data, "expansion_order", 6, 0)
    trials = _int_field(data, "trials", 100, 1)

    tests = data.get("tests", [])
    if not isinstance(tests, list) or not all(isinstance(t, str) for t in tests):
        raise ValidationError("tests must be a list of test identifiers")
    for t in tests:
        if t not in REGISTRY and t not in MUTANTS:
            raise ValidationError(f"unknown test identifier {t!r}")
    if len(set(tests)) != len(tests):
        raise ValidationError("tests contains duplicates")

    changes = []
    for i, raw in enumerate(data.get("coordinate_changes", [])):
        try:
            changes.append(CoordinateChange.from_json(raw))
        except NotInvertible as exc:
            raise ValidationError(f"coordinate_changes[{i}] is not a coordinate change: {exc}") from exc
        except (FormalDiscError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"coordinate_changes[{i}] is malformed: {exc}") from exc

    module = None
    if "module" in data:
        try:
            module = ModuleSpec.from_json(data["module"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"module is malformed: {exc}") from exc
        if module.grade_cutoff != cutoff and "grade_cutoff" in data:
            raise ValidationError("module.grade_cutoff disagrees with grade_cutoff")

    sections = []
    for i, raw in enumerate(data.get("sections", [])):
        try:
            sections.append(RationalSection.from_json(raw))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"sections[{i}] is malformed: {exc}") from exc

    return SuiteSpec(order, cutoff, seed, tuple(tests), tuple(changes), module, tuple(sections), expansion,
                     trials)


def parse_spec(source) -> SuiteSpec:
    """Read a suite from a path, a text stream or a JSON string."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        try:
            with open(source, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from exc
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc.reason}") from exc
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return spec_from_dict(data)


# -- checks -----------------------------------------------------------------

def _fail(name, trial, **info) -> CheckReport:
    return CheckReport(name, False, trial + 1, {"trial": trial, **info})


def _series(s) -> str:
    return str(s)


def suite_group_law(spec: SuiteSpec, rng: random.Random) -> CheckReport:
    N = spec.truncation_order
    given = list(spec.coordinate_changes)
    for trial in range(spec.trials):
        a = given[trial] if trial < len(given) else random_coordinate_change(rng, N)
        b, c = random_coordinate_change(rng, N), random_coordinate_change(rng, N)
        lhs = group_compose(group_compose(a, b), c)
        rhs = group_compose(a, group_compose(b, c))
        if not lhs.agrees_with(rhs):
            return _fail("group_law", trial, law="associativity", rho=_series(a.series), mu=_series(b.series),
                         nu=_series(c.series))
        ident = CoordinateChange.identity(N)
        inv = group_inverse(a)
        laws = (("right inverse", group_compose(a, inv), ident), ("left inverse", group_compose(inv, a), ident),
                ("right identity", group_compose(a, ident), a), ("left identity", group_compose(ident, a), a))
        for law, got, want in laws:
            if not got.agrees_with(want):
                return _fail("group_law", trial, law=law, rho=_series(a.series))
    return CheckReport("group_law", True, spec.trials)


def _random_positive(rng, order) -> Derivation:
    return Derivation.from_coefficients({k: Fraction(rng.randint(-2, 2), rng.randint(1, 3))
                                         for k in range(2, order)}, order)


def suite_exp_log(spec: SuiteSpec, rng: random.Random) -> CheckReport:
    N = spec.truncation_order
    for trial in range(spec.trials):
        v = _random_positive(rng, N)
        if not log_coordinate_change(exp_derivation(v)).agrees_with(v):
            return _fail("exp_log", trial, law="log(exp(v)) = v", v=_series(v.coefficient_series))
        rho = random_coordinate_change(rng, N, unipotent=True)
        if not exp_derivation(log_coordinate_change(rho)).agrees_with(rho):
            return _fail("exp_log", trial, law="exp(log(rho)) = rho", rho=_series(rho.series))
    return CheckReport("exp_log", True, spec.trials)


def _canonical(spec: SuiteSpec, rng: random.Random, perturb: bool) -> CheckReport:
    per_dim = max(1, spec.trials // 5)
    count = 0
    given = [c for c in spec.coordinate_changes if c.is_unipotent()]
    for dim in (2, 3, 4):
        action = MultiplicationAction(dim)
        omega = canonical_differential(action, spec.truncation_order)
        if perturb:
            omega = omega.perturbed(0, 1, 0)
        for trial in range(per_dim):
            rho = given[trial] if trial < len(given) else random_coordinate_change(
                rng, spec.truncation_order, unipotent=True)
            report = check_differential_invariance(omega, rho, action)
            count += 1
            if not report.passed:
                return CheckReport("canonical_differential", False, count,
                                   {"dimension": dim, **report.counterexample}, report.details)
    return CheckReport("canonical_differential", True, count)


def suite_canonical_differential(spec, rng):
    return _canonical(spec, rng, False)


def _random_laurent(rng, depth, order) -> LaurentSeries:
    coeffs = {k: Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for k in range(-depth, order)}
    return LaurentSeries(coeffs, order)


def suite_residue_invariance(spec: SuiteSpec, rng: random.Random) -> CheckReport:
    N = spec.truncation_order
    given = list(spec.coordinate_changes)
    for trial in range(spec.trials):
        depth = rng.randint(0, 6)
        f = _random_laurent(rng, depth, N)
        rho = given[trial] if trial < len(given) else random_coordinate_change(rng, max(N, depth + 2))
        moved = pullback_kdifferential(KDifferential(1, f), rho)
        if moved.residue() != f.residue():
            return _fail("residue_invariance", trial, f=_series(f), rho=_series(rho.series),
                         expected=format_fraction(f.residue()), actual=format_fraction(moved.residue()))
    return CheckReport("residue_invariance", True, spec.trials)


def _poly(n, terms) -> RationalSection:
    return RationalSection(n, Poly(n, terms))


ANTISYMMETRIC_CONTROL = _poly(2, {(1, 0): 1, (0, 1): -1})


def suite_shuffle(spec: SuiteSpec, rng: random.Random) -> CheckReport:
    for m in range(2, 8):
        for p in range(1, m):
            size = len(enumerate_shuffles(m, p))
            if size != comb(m, p):
                return CheckReport("shuffle", False, 1, {"m": m, "p": p, "size": size, "expected": comb(m, p)})
    symmetric = [_poly(2, {(1, 1): 1}), _poly(2, {(1, 0): 1, (0, 1): 1}), _poly(2, {(2, 0): 1, (0, 2): 1})]
    vanishing = [(F, 1) for F in symmetric]
    for p in (1, 2):
        for d in (1, 2, 3):
            vanishing += [(F, p) for F in shuffle_kernel(3, p, d)]
    count = 0
    for F, p in vanishing:
        count += 1
        residual = shuffle_sum(F, p)
        if not residual.is_zero():
            return CheckReport("shuffle", False, count, {"section": repr(F), "p": p, "residual": repr(residual)})
    residual = shuffle_sum(ANTISYMMETRIC_CONTROL, 1)
    if not residual.same_function(ANTISYMMETRIC_CONTROL.scale(2)):
        return CheckReport("shuffle", False, count + 1, {"control": repr(residual), "expected": "2(z1 - z2)"})
    return CheckReport("shuffle", True, count + 1, details={"vanishing_cases": len(vanishing)})


def mutant_shuffle(spec, rng) -> CheckReport:
    residual = shuffle_sum(ANTISYMMETRIC_CONTROL, 1)
    return CheckReport("shuffle", residual.is_zero(), 1, None if residual.is_zero() else
                       {"section": repr(ANTISYMMETRIC_CONTROL), "residual": repr(residual)})


def _families(spec, variant):
    return [reference_family(n, 0, variant) for n in (1, 2, 3)]


def _over_families(name, check, spec, variant) -> CheckReport:
    total = 0
    for fam in _families(spec, variant):
        report = check(fam)
        total += report.trials
        if not report.passed:
            return CheckReport(name, False, total, {"n": fam.n, **report.counterexample})
    return CheckReport(name, True, total)


def suite_T_derivative(spec, rng, variant="reference"):
    return _over_families("T_derivative", check_T_derivative, spec, variant)


def suite_translation(spec, rng, variant="reference"):
    return _over_families("translation", lambda f: check_translation(f, order=spec.expansion_order), spec, variant)


def suite_insertion_expansion(spec, rng, variant="reference"):
    points = (0, 3, 7)

    def check(fam):
        merged = None
        for slot in range(1, fam.n + 1):
            shift = Fraction(rng.randint(1, 9), 10)
            r = check_insertion_expansion(fam, slot, order=spec.expansion_order, shift=shift,
                                          point=points[: fam.n])
            merged = r if merged is None else merged.merge(r)
            if not r.passed:
                return CheckReport(r.name, False, merged.trials, {"slot": slot, **r.counterexample})
        return merged

    return _over_families("insertion_expansion", check, spec, variant)


def suite_K_property(spec, rng, variant="reference"):
    return _over_families("K_property", lambda f: check_K_property(f, 0), spec, variant)


def _double_pole():
    return RationalSection.pole(2, 1, 2, 2)


def suite_pole_bounds(spec, rng) -> CheckReport:
    cases = [(_double_pole(), None, ((0, 2), (2, 0))), (_poly(2, {(3, 1): 1}), None, ((0, 0), (0, 0))),
             (RationalSection.pole(2, 1, 2, 3, Poly(2, {(1, 0): 1, (0, 1): -1})), None, ((0, 2), (2, 0)))]
    cases += [(F, None, None) for F in spec.sections]
    for i, (F, bounds, expected) in enumerate(cases):
        r = check_pole_bounds(F, bounds)
        if not r.passed:
            return CheckReport("pole_bounds", False, i + 1, {"section": repr(F), **r.counterexample})
        if expected is not None and tuple(map(tuple, r.details["orders"])) != expected:
            return CheckReport("pole_bounds", False, i + 1, {"section": repr(F), "orders": r.details["orders"]})
    return CheckReport("pole_bounds", True, len(cases))


def mutant_pole_bounds(spec, rng) -> CheckReport:
    r = check_pole_bounds(_double_pole(), [[0, 1], [1, 0]])
    return CheckReport("pole_bounds", r.passed, 1, r.counterexample)


def geometric_oracle(power: int, degree: int) -> Poly:
    """``sum_{k <= degree} C(k + power - 1, k) z2^k z1^(-k-power)``: ``1/(z1 - z2)^power`` for ``|z1| > |z2|``."""
    return Poly(2, {(-k - power, k): comb(k + power - 1, k) for k in range(degree + 1)})


def suite_insertion_composition(spec, rng) -> CheckReport:
    D = spec.truncation_order
    frame = InsertionFrame((1, 1), (None, 0), D)
    count = 0
    for power in (1, 2):
        F = RationalSection.pole(2, 1, 2, power)
        r = check_insertion_composition(F, frame)
        count += 1
        if not r.passed:
            return CheckReport("insertion_composition", False, count, {"power": power, **r.counterexample})
        if block_expansion(F, frame) != geometric_oracle(power, D):
            return CheckReport("insertion_composition", False, count,
                               {"power": power, "reason": "differs from the geometric series"})
    for F in spec.sections:
        centers = tuple(GaussianRational(10 * k, rng.randint(-3, 3)) for k in range(F.n))
        r = check_insertion_composition(F, InsertionFrame((1,) * F.n, centers, spec.expansion_order))
        count += 1
        if not r.passed:
            return CheckReport("insertion_composition", False, count, {"section": repr(F), **r.counterexample})
    return CheckReport("insertion_composition", True, count)


def _section_module(spec) -> ModuleSpec:
    m = spec.density_module
    return ModuleSpec(m.lam, max(m.grade_cutoff, spec.expansion_order))


def suite_section_invariance(spec, rng) -> CheckReport:
    module = _section_module(spec)
    order = max(spec.truncation_order, spec.expansion_order + 2)
    count = 0
    for n in (1, 2, 3):
        for trial in range(spec.trials):
            atlas = random_atlas(rng, n, order, module.lam)
            S = ModuleSection.basis(module, [rng.randint(0, min(4, module.grade_cutoff)) for _ in range(n)])
            r = check_section_invariance(S, atlas, spec.expansion_order)
            count += 1
            if not r.passed:
                return CheckReport("section_invariance", False, count,
                                   {"n": n, "trial": trial, "atlas": atlas.to_json(), **r.counterexample})
    return CheckReport("section_invariance", True, count)


def mutant_section_invariance(spec, rng) -> CheckReport:
    module = _section_module(spec)
    order = max(spec.truncation_order, spec.expansion_order + 2)
    lam_integral = module.lam.denominator == 1
    first = CoordinateChange.scaling(2, order) if lam_integral else CoordinateChange.from_coefficients(
        {1: 1, 2: 1}, order)
    atlas = PointAtlas(2, (first, CoordinateChange.identity(order)))
    return check_section_invariance(ModuleSection.basis(module, [1, 2]), atlas, spec.expansion_order,
                                    weight_offset=1)


def _rep_seed(rng):
    return rng.getrandbits(64)


def suite_representation_law(spec, rng) -> CheckReport:
    module = spec.density_module
    r = check_representation_law(module, spec.trials, _rep_seed(rng), spec.truncation_order)
    if not r.passed:
        return r
    s = check_representation_law(module, max(1, spec.trials // 10), _rep_seed(rng), spec.truncation_order,
                                 scalings_only=module.lam.denominator == 1,
                                 unipotent=module.lam.denominator != 1)
    return r.merge(s)


def mutant_representation_law(spec, rng) -> CheckReport:
    return check_representation_law(spec.density_module, spec.trials, _rep_seed(rng), spec.truncation_order,
                                    convention="left")


def suite_exact_sequence(spec, rng) -> CheckReport:
    module = spec.density_module
    count = 0
    for n in range(module.dim):
        r = exact_sequence_check(module, module.grade(n))
        count += 1
        if not r.passed:
            return CheckReport("exact_sequence", False, count, r.counterexample)
    return CheckReport("exact_sequence", True, count)


class MisSignedGrading(DensityModule):
    """Tensor densities with the grading operator's sign flipped."""

    def grading_operator(self, e):
        return super().grading_operator(e).scale(-1)


def suite_admissibility(spec, rng):
    return check_admissible(spec.density_module)


def mutant_admissibility(spec, rng):
    return check_admissible(spec.density_module, MisSignedGrading())


Check = Callable[[SuiteSpec, random.Random], CheckReport]

REGISTRY: dict[str, Check] = {
    "group_law": suite_group_law,
    "exp_log": suite_exp_log,
    "canonical_differential": suite_canonical_differential,
    "residue_invariance": suite_residue_invariance,
    "shuffle": suite_shuffle,
    "T_derivative": suite_T_derivative,
    "translation": suite_translation,
    "insertion_expansion": suite_insertion_expansion,
    "K_property": suite_K_property,
    "pole_bounds": suite_pole_bounds,
    "insertion_composition": suite_insertion_composition,
    "section_invariance": suite_section_invariance,
    "representation_law": suite_representation_law,
    "exact_sequence": suite_exact_sequence,
    "admissibility": suite_admissibility,
}

MUTANTS: dict[str, Check] = {
    "canonical_differential:mutant": lambda spec, rng: _canonical(spec, rng, True),
    "shuffle:mutant": mutant_shuffle,
    "T_derivative:mutant": lambda spec, rng: suite_T_derivative(spec, rng, "no_factorial"),
    "translation:mutant": lambda spec, rng: suite_translation(spec, rng, "no_factorial"),
    "insertion_expansion:mutant": lambda spec, rng: suite_insertion_expansion(spec, rng, "no_factorial"),
    "K_property:mutant": lambda spec, rng: suite_K_property(spec, rng, "k_sign"),
    "pole_bounds:mutant": mutant_pole_bounds,
    "section_invariance:mutant": mutant_section_invariance,
    "representation_law:mutant": mutant_representation_law,
    "admissibility:mutant": mutant_admissibility,
}

ALL_TESTS = tuple(REGISTRY) + tuple(MUTANTS)


# -- reports ----------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, GaussianRational):
        return value.to_json()
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return str(value)


@dataclass
class TestRecord:
    name: str
    status: str
    trials: int
    first_counterexample: dict | None = None
    expected_failure: bool = False
    details: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "name": self.name,
            "status": self.status,
            "trials": self.trials,
            "first_counterexample": _jsonable(self.first_counterexample),
            "expected_failure": self.expected_failure,
            "details": _jsonable(self.details),
        }
        if timings and self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 6)
        return out


@dataclass
class VerificationReport:
    records: list
    meta: dict

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.records if not r.expected_failure)

    def record(self, name: str) -> TestRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


def run_check(name: str, spec: SuiteSpec) -> TestRecord:
    if name in REGISTRY:
        fn, mutant = REGISTRY[name], False
    elif name in MUTANTS:
        fn, mutant = MUTANTS[name], True
    else:
        raise UnknownTest(name)
    rng = random.Random(f"{spec.seed}:{name}")
    start = time.perf_counter()
    try:
        report = fn(spec, rng)
    except FormalDiscError as exc:
        report = CheckReport(name, False, 0, {"error": type(exc).__name__, "message": str(exc)})
    elapsed = time.perf_counter() - start
    if mutant:
        status = "fail" if report.passed else "pass"
    else:
        status = "pass" if report.passed else "fail"
    return TestRecord(name, status, report.trials, report.counterexample, mutant, report.details, elapsed)


def run_suite(spec: SuiteSpec) -> VerificationReport:
    for name in spec.tests:
        if name not in REGISTRY and name not in MUTANTS:
            raise UnknownTest(name)
    records = sorted((run_check(name, spec) for name in spec.tests), key=lambda r: r.name)
    meta = {
        "seed": spec.seed,
        "orders": {"truncation_order": spec.truncation_order, "grade_cutoff": spec.grade_cutoff,
                   "expansion_order": spec.expansion_order},
        "trials": spec.trials,
        "module": spec.density_module.to_json(),
        "version": __version__,
    }
    return VerificationReport(records, meta)


def emit_report(report: VerificationReport, format: str = "json", timings: bool = False) -> bytes:
    if format == "json":
        data = {"meta": report.meta, "tests": [r.to_json(timings) for r in report.records]}
        return (json.dumps(data, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if format == "text":
        out = io.StringIO()
        out.write(f"{'TEST':<32} {'STATUS':<8} {'TRIALS':>7}  NOTE\n")
        for r in report.records:
            note = "negative control" if r.expected_failure else ""
            if r.status == "fail" and r.first_counterexample:
                note = (note + "; " if note else "") + "counterexample recorded"
            out.write(f"{r.name:<32} {r.status:<8} {r.trials:>7}  {note}".rstrip() + "\n")
        verdict = "OK" if report.ok else "FAILED"
        out.write(f"{verdict}: {sum(r.status == 'pass' for r in report.records)}/{len(report.records)} passed, "
                  f"seed {report.meta['seed']}\n")
        return out.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {format!r}")
