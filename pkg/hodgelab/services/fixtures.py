"""Fixture files: loading, serialization and the CM trace-form generator.

A fixture is a UTF-8 JSON document. Every rational is a "p/q" string so
that files round-trip bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from hodgelab.core import linalg
from hodgelab.core import polynomials as P
from hodgelab.core.brilliant import BrilliantFamily
from hodgelab.core.compose import TwoClassFamily, make_two_class
from hodgelab.core.errors import (
    HodgeLabError,
    NonSymmetricGram,
    NotCMField,
    ParseError,
    UnsupportedDegree,
    ValidationError,
    WrongSignature,
)
from hodgelab.core.exactmath import FieldElement, NumberField, nf_create, nf_is_totally_real
from hodgelab.core.hodge import K3HodgeStructure, validate_period
from hodgelab.core.lattice import QuadLattice, signature
from hodgelab.core.rootbox import RootBox
from hodgelab.utils.logger import get_logger
from hodgelab.utils.rationals import format_rational, parse_rational

logger = get_logger(__name__)

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

SUGGESTION_RANGE = range(-3, 4)
MAX_SUGGESTIONS = 5


@dataclass
class LoadedFixture:
    name: str
    structure: K3HodgeStructure
    families: dict[str, BrilliantFamily] = field(default_factory=dict)
    two_class: dict[str, TwoClassFamily] = field(default_factory=dict)
    source: Path | None = None

    def family(self, label: str) -> BrilliantFamily:
        if label not in self.families:
            known = ", ".join(self.families) or "none"
            raise ParseError(f"Unknown family '{label}' in fixture {self.name}. Known: {known}")
        return self.families[label]

    def two_class_family(self, label: str | None = None) -> TwoClassFamily:
        if label is None:
            if not self.two_class:
                raise ParseError(f"Fixture {self.name} has no two-class block")
            return next(iter(self.two_class.values()))
        if label not in self.two_class:
            known = ", ".join(self.two_class) or "none"
            raise ParseError(f"Unknown two-class family '{label}' in fixture {self.name}. Known: {known}")
        return self.two_class[label]


# -- parsing --------------------------------------------------------------------


def _require(doc: Any, key: str, path: str) -> Any:
    if not isinstance(doc, dict):
        raise ParseError(f"{path or 'fixture'}: expected an object")
    if key not in doc:
        raise ParseError(f"{path + '.' if path else ''}{key}: missing")
    return doc[key]


def _rational(value: Any, path: str) -> Fraction:
    try:
        return parse_rational(value)
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from None


def _rational_list(value: Any, path: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise ParseError(f"{path}: expected an array")
    return tuple(_rational(v, f"{path}[{i}]") for i, v in enumerate(value))


def _parse_field(doc: Any) -> NumberField:
    node = _require(doc, "field", "")
    minpoly = _rational_list(_require(node, "minpoly", "field"), "field.minpoly")
    if len(minpoly) == 2 and "conj_image" not in node:
        return NumberField.abstract(minpoly, name="Q")
    conj = _rational_list(_require(node, "conj_image", "field"), "field.conj_image")
    box = _require(node, "embedding", "field")
    real = _rational_list(_require(box, "real", "field.embedding"), "field.embedding.real")
    imag = _rational_list(_require(box, "imag", "field.embedding"), "field.embedding.imag")
    if len(real) != 2 or len(imag) != 2:
        raise ParseError("field.embedding: real and imag must be [lo, hi] pairs")
    try:
        return nf_create(minpoly, conj, RootBox(real, imag), name=node.get("name", "K"))
    except ParseError:
        raise
    except (HodgeLabError, ValueError) as e:
        raise ValidationError(f"field: {e}") from e


def _parse_lattice(doc: Any) -> QuadLattice:
    node = _require(doc, "lattice", "")
    rank = _require(node, "rank", "lattice")
    gram = _require(node, "gram", "lattice")
    if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
        raise ParseError(f"lattice.rank: expected a positive integer, got {rank!r}")
    if not isinstance(gram, list) or len(gram) != rank:
        raise ParseError(f"lattice.gram: expected {rank} rows")
    rows = []
    for i, row in enumerate(gram):
        values = _rational_list(row, f"lattice.gram[{i}]")
        if len(values) != rank:
            raise ParseError(f"lattice.gram[{i}]: expected {rank} entries, got {len(values)}")
        rows.append(values)
    try:
        return QuadLattice(tuple(rows))
    except NonSymmetricGram as e:
        raise ParseError(f"lattice.gram: {e}") from e


def _parse_period(doc: Any, k: NumberField, rank: int) -> tuple[FieldElement, ...]:
    node = _require(doc, "period", "")
    if not isinstance(node, list) or len(node) != rank:
        raise ParseError(f"period: expected {rank} coefficient arrays")
    out = []
    for i, coeffs in enumerate(node):
        values = _rational_list(coeffs, f"period[{i}]")
        if len(values) > k.degree:
            raise ParseError(f"period[{i}]: {len(values)} coefficients for a degree-{k.degree} field")
        out.append(k.element(values))
    return tuple(out)


def _parse_blocks(doc: Any, key: str) -> list[tuple[str, Fraction]]:
    blocks = doc.get(key, [])
    if not isinstance(blocks, list):
        raise ParseError(f"{key}: expected an array")
    out = []
    for i, block in enumerate(blocks):
        label = _require(block, "label", f"{key}[{i}]")
        if not isinstance(label, str):
            raise ParseError(f"{key}[{i}].label: expected a string")
        out.append((label, _rational(_require(block, "d", f"{key}[{i}]"), f"{key}[{i}].d")))
    return out


def build_fixture(doc: Any, source: Path | None = None) -> LoadedFixture:
    """Validate a parsed fixture document."""
    name = _require(doc, "name", "")
    lattice = _parse_lattice(doc)
    k = _parse_field(doc)
    period = _parse_period(doc, k, lattice.rank)
    brilliant = _parse_blocks(doc, "brilliant")
    two_class = _parse_blocks(doc, "two_class")
    try:
        structure = validate_period(lattice, k, period)
        loaded = LoadedFixture(str(name), structure, source=source)
        for label, d in brilliant:
            loaded.families[label] = BrilliantFamily(structure, d, label=label)
        for label, d in two_class:
            loaded.two_class[label] = make_two_class(structure, d, label=label)
    except ParseError:
        raise
    except HodgeLabError as e:
        raise ValidationError(f"{name}: {e}") from e
    logger.info("Loaded fixture %s: rank %d over %s", name, lattice.rank, k.name)
    return loaded


def resolve_fixture(name_or_path: str | Path, fixture_dir: str | Path | None = None) -> Path:
    path = Path(name_or_path)
    if path.is_file():
        return path
    candidates = []
    if fixture_dir:
        candidates.append(Path(fixture_dir) / f"{name_or_path}.json")
    candidates.append(FIXTURES_DIR / f"{name_or_path}.json")
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise ParseError(f"Fixture not found: {name_or_path}")


def load_fixture(name_or_path: str | Path, fixture_dir: str | Path | None = None) -> LoadedFixture:
    path = resolve_fixture(name_or_path, fixture_dir)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not UTF-8 text ({e})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return build_fixture(doc, source=path)


def list_fixtures(fixture_dir: str | Path | None = None) -> list[str]:
    dirs = [FIXTURES_DIR] + ([Path(fixture_dir)] if fixture_dir else [])
    names = {p.stem for d in dirs if d.is_dir() for p in d.glob("*.json")}
    return sorted(names)


# -- serialization --------------------------------------------------------------


def _strings(values: Sequence[Fraction]) -> list[str]:
    return [format_rational(v) for v in values]


def field_document(k: NumberField) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": k.name, "minpoly": _strings(k.minpoly)}
    if k.conj_image is not None:
        doc["conj_image"] = _strings(k.conj_image)
    if k.embedding is not None:
        doc["embedding"] = {
            "real": _strings(k.embedding.real),
            "imag": _strings(k.embedding.imag),
        }
    return doc


def serialize_fixture(loaded: LoadedFixture) -> dict[str, Any]:
    s = loaded.structure
    doc: dict[str, Any] = {
        "name": loaded.name,
        "lattice": {"rank": s.rank, "gram": [_strings(row) for row in s.lattice.gram]},
        "field": field_document(s.field),
        "period": [_strings(x.coeffs) for x in s.period],
    }
    if loaded.families:
        doc["brilliant"] = [{"label": k, "d": format_rational(f.d)} for k, f in loaded.families.items()]
    if loaded.two_class:
        doc["two_class"] = [{"label": k, "d": format_rational(f.d)} for k, f in loaded.two_class.items()]
    return doc


def dump_fixture(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# -- CM generator -----------------------------------------------------------------


def _trace(x: FieldElement) -> Fraction:
    m = x.multiplication_matrix()
    return sum((m[i][i] for i in range(len(m))), Fraction(0))


def _basis(k: NumberField) -> list[FieldElement]:
    return [k.gen ** j if k.degree > 1 else k.one for j in range(k.degree)]


def trace_form(k: NumberField, xi: FieldElement) -> tuple[tuple[Fraction, ...], ...]:
    """Tr(xi * x * conj(y)) on the power basis, scaled to integral entries."""
    basis = _basis(k)
    gram = [[_trace(xi * x * y.conj()) for y in basis] for x in basis]
    scale = linalg.lcm_denominator(v for row in gram for v in row)
    return tuple(tuple(v * scale for v in row) for row in gram)


def eigen_period(k: NumberField) -> tuple[FieldElement, ...]:
    """Coordinates b_j* of sum b_j (x) b_j*, b_j* the trace-dual basis."""
    basis = _basis(k)
    traces = [[_trace(x * y) for y in basis] for x in basis]
    inv = linalg.inverse(traces)
    return tuple(linalg.linear_combination(inv[j], basis) for j in range(k.degree))


def _fixed_subfield_minpoly(k: NumberField) -> tuple[Fraction, ...]:
    conj = k._conj_matrix()
    m = k.degree
    rows = [[conj[i][j] - (1 if i == j else 0) for j in range(m)] for i in range(m)]
    fixed = linalg.nullspace(rows, m)
    if 2 * len(fixed) != m:
        raise NotCMField(f"Conjugation fixes a subspace of dimension {len(fixed)}, expected {m // 2}")
    best: tuple[Fraction, ...] | None = None
    for v in fixed:
        mu = k.element(v).minpoly()
        if best is None or len(mu) > len(best):
            best = mu
    if len(fixed) > 1 and len(best) - 1 != len(fixed):
        total = k.element(linalg.combine_vectors([j + 1 for j in range(len(fixed))], fixed))
        best = total.minpoly()
    return best


def _suggest_xi(k: NumberField) -> list[tuple[Fraction, ...]]:
    conj = k._conj_matrix()
    m = k.degree
    rows = [[conj[i][j] - (1 if i == j else 0) for j in range(m)] for i in range(m)]
    fixed = linalg.nullspace(rows, m)
    suggestions: list[tuple[Fraction, ...]] = []
    seen = set()
    for a in SUGGESTION_RANGE:
        for b in (SUGGESTION_RANGE if len(fixed) > 1 else (0,)):
            coeffs = [Fraction(a), Fraction(b)] + [Fraction(0)] * (len(fixed) - 2)
            coeffs = coeffs[: len(fixed)]
            xi = k.element(linalg.combine_vectors(coeffs, fixed))
            if xi.is_zero() or xi.coeffs in seen:
                continue
            seen.add(xi.coeffs)
            if _accepts(k, xi):
                suggestions.append(xi.coeffs)
            if len(suggestions) >= MAX_SUGGESTIONS:
                return suggestions
    return suggestions


def _accepts(k: NumberField, xi: FieldElement) -> bool:
    lattice = QuadLattice(trace_form(k, xi))
    if signature(lattice).as_tuple() != (2, k.degree - 2, 0):
        return False
    try:
        validate_period(lattice, k, eigen_period(k))
    except HodgeLabError:
        return False
    return True


def generate_cm_fixture(
    k: NumberField,
    xi: FieldElement | Sequence[Fraction],
    name: str = "generated",
    brilliant: Sequence[tuple[str, Fraction]] = (),
    two_class: Sequence[tuple[str, Fraction]] = (),
) -> dict[str, Any]:
    """Fixture document for the field k with the trace form scaled by xi."""
    if k.degree not in (2, 4):
        raise UnsupportedDegree(f"CM fixtures are generated for degree 2 or 4, got {k.degree}")
    if nf_is_totally_real(k.minpoly):
        raise NotCMField(f"{P.degree(k.minpoly)}-dimensional field {k.name} is totally real")
    k0 = _fixed_subfield_minpoly(k)
    if not nf_is_totally_real(k0):
        raise NotCMField(f"Fixed field of conjugation ({k0}) is not totally real")
    if not isinstance(xi, FieldElement):
        xi = k.element(xi)
    if xi.is_zero() or not xi.is_real():
        raise ValidationError("xi must be a nonzero element fixed by conjugation")

    lattice = QuadLattice(trace_form(k, xi))
    sig = signature(lattice)
    period = eigen_period(k)
    try:
        if sig.as_tuple() != (2, k.degree - 2, 0):
            raise WrongSignature(f"Trace form has signature {sig}")
        validate_period(lattice, k, period)
    except HodgeLabError as e:
        suggestions = _suggest_xi(k)
        raise WrongSignature(f"xi = {xi} rejected: {e}", suggestions=suggestions) from e

    doc: dict[str, Any] = {
        "name": name,
        "lattice": {"rank": k.degree, "gram": [_strings(row) for row in lattice.gram]},
        "field": field_document(k),
        "period": [_strings(x.coeffs) for x in period],
    }
    if brilliant:
        doc["brilliant"] = [{"label": label, "d": format_rational(Fraction(d))} for label, d in brilliant]
    if two_class:
        doc["two_class"] = [{"label": label, "d": format_rational(Fraction(d))} for label, d in two_class]
    logger.info("Generated CM fixture %s with Gram signature %s", name, sig)
    return doc


def field_from_lists(
    minpoly: Sequence[Fraction],
    conj_image: Sequence[Fraction],
    real: Sequence[Fraction],
    imag: Sequence[Fraction],
    name: str = "K",
) -> NumberField:
    """Embedded field from the same data a fixture's field block carries."""
    block = {
        "minpoly": _strings(minpoly),
        "conj_image": _strings(conj_image),
        "embedding": {"real": _strings(real), "imag": _strings(imag)},
        "name": name,
    }
    return _parse_field({"field": block})
