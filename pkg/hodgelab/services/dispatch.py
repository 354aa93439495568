"""Command dispatch: flags in, Report out.

Each handler loads its fixture, runs one workflow and records every exact
check as a certificate so the report can be re-verified from its inputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Callable

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from hodgelab.core import exactmath, hodge, linalg
from hodgelab.core.brilliant import (
    BrilliantFamily,
    DomainClass,
    PeriodPoint,
    brauer_period_from_B,
    classify_domain,
    equator_point,
    equator_test,
    fB_embedding,
    is_brilliant,
    make_period,
    nl_test,
    nl_test_via_bfield,
    projection_to_base,
    recover_bfield,
    transcendental_of_point,
)
from hodgelab.core.cmprop import verify_cm_propagation
from hodgelab.core.compose import (
    BrauerTransport,
    TwoClassFamily,
    check_connector,
    curve_meets_brilliant,
    equator_flow,
    nl_specialization,
    transport_to_brauer,
)
from hodgelab.core.errors import MissingFlag, ParseError, UnknownCommand
from hodgelab.core.exactmath import FieldElement
from hodgelab.core.hodge import (
    classify_endo,
    compare_endo_conditions,
    eigenvalue_of,
    endo_algebra,
    is_irreducible,
    picard_number,
    signature_of,
)
from hodgelab.core.lattice import signature
from hodgelab.services.fixtures import (
    LoadedFixture,
    build_fixture,
    dump_fixture,
    list_fixtures,
    load_fixture,
    serialize_fixture,
)
from hodgelab.services.reports import Report
from hodgelab.utils.config import DEFAULTS
from hodgelab.utils.logger import get_logger
from hodgelab.utils.rationals import (
    format_poly,
    format_rational,
    format_vector,
    parse_class_expression,
    parse_field_coeffs,
    parse_rational,
    parse_rational_list,
)

logger = get_logger(__name__)

DEFAULT_S_GRID = "0,1/2,3/4,1"
EQUATOR_STEPS = 20
EQUATOR_TARGET = Fraction(1, 1000)

# Flag order used for the command echo.
FLAG_ORDER = ("fixture", "family", "two_class", "B", "point", "connector", "to", "ell", "s_grid", "tau")

Handler = Callable[[dict[str, Any], dict[str, Any], Report], None]


def apply_settings(config: dict[str, Any]) -> None:
    """Push search and refinement limits from the config into the core modules."""
    hodge.SEARCH_SEED = int(config.get("seed", DEFAULTS["seed"]))
    hodge.SEARCH_TRIALS = int(config.get("primitive_trials", DEFAULTS["primitive_trials"]))
    hodge.SEARCH_MAX_BOUND = int(config.get("primitive_max_bound", DEFAULTS["primitive_max_bound"]))
    exactmath.SIGN_MAX_STEPS = int(config.get("sign_max_steps", DEFAULTS["sign_max_steps"]))


def command_echo(command: str, flags: dict[str, Any]) -> str:
    parts = [command]
    for key in FLAG_ORDER:
        if flags.get(key) is not None:
            parts.append(f"--{key.replace('_', '-')} {flags[key]}")
    return " ".join(parts)


# -- flag parsing -----------------------------------------------------------------


def _flag(flags: dict[str, Any], name: str, command: str) -> str:
    value = flags.get(name)
    if value is None or value == "":
        raise MissingFlag(f"'{command}' needs --{name.replace('_', '-')}")
    return str(value)


def _parsed(parse: Callable[..., Any], text: str, name: str, *args: Any) -> Any:
    try:
        return parse(text, *args)
    except ValueError as e:
        raise ParseError(f"--{name.replace('_', '-')}: {e}") from None


def _fixture(flags: dict[str, Any], config: dict[str, Any], command: str) -> LoadedFixture:
    return load_fixture(_flag(flags, "fixture", command), config.get("fixture_dir"))


def _point(family: BrilliantFamily, text: str) -> PeriodPoint:
    parts = text.split(",")
    if len(parts) != 3:
        raise ParseError(f"--point needs three entries a,b,c, got {len(parts)}")
    k = family.field
    a, b, c = (k.element(_parsed(parse_field_coeffs, p, "point")) for p in parts)
    return make_period(family, a, b, c)


def _family_point(family: BrilliantFamily, flags: dict[str, Any], command: str) -> tuple[PeriodPoint, tuple[Fraction, ...] | None]:
    if flags.get("B") is not None:
        b = _parsed(parse_rational_list, flags["B"], "B")
        if len(b) != family.rank:
            raise ParseError(f"--B needs {family.rank} entries, got {len(b)}")
        return brauer_period_from_B(family, b), b
    if flags.get("point") is not None:
        return _point(family, flags["point"]), None
    if flags.get("tau") is not None:
        return equator_point(family, _parsed(parse_rational, flags["tau"], "tau")), None
    raise MissingFlag(f"'{command}' needs --B, --point or --tau")


def _ell(text: str | None) -> tuple[Fraction, Fraction]:
    shortcuts = {"l1": (1, 0), "l2": (0, 1), "f": (1, 1)}
    if text is None:
        return Fraction(1), Fraction(0)
    if text.strip() in shortcuts:
        c1, c2 = shortcuts[text.strip()]
        return Fraction(c1), Fraction(c2)
    c1, c2 = _parsed(parse_class_expression, text, "ell", 0, 2)
    if c1 == 0 and c2 == 0:
        raise ParseError("--ell must be nonzero")
    return c1, c2


# -- rendering helpers ------------------------------------------------------------


def _point_summary(point: PeriodPoint) -> dict[str, Any]:
    return {"field": point.field.name, "a": point.a, "b": point.b, "c": point.c}


def _on_line(c: FieldElement, cls: str = "f") -> str:
    """sigma0 + c*cls as text."""
    if c.is_zero():
        return "sigma0"
    if c == c.field.one:
        return f"sigma0 + {cls}"
    if c == -c.field.one:
        return f"sigma0 - {cls}"
    return f"sigma0 + ({c})*{cls}"


def _certify_nl(
    report: Report, family: BrilliantFamily, point: PeriodPoint, name: str = "NL", required: bool = False
) -> bool:
    """NL membership; a certificate only when the workflow needs an NL point."""
    inside = nl_test(family, point)
    tt = transcendental_of_point(point)
    detail = f"dim T_t = {tt.dim}, signature {tt.signature()}"
    if required:
        report.certify(f"{name}: signature of T_t is (2, {family.rank - 2}, 0)", inside, detail)
    else:
        report.results[f"{name} detail"] = detail
    if family.d == 0:
        report.certify(
            f"{name}: B-field system agrees",
            nl_test_via_bfield(family, point) == inside,
            "rational B with (sigma0.B) = c" + (" exists" if inside else " does not exist"),
        )
    return inside


def _certify_projection(report: Report, family: BrilliantFamily, point: PeriodPoint) -> None:
    cert = projection_to_base(family, point)
    report.certify("projection T_t -> T is bijective", cert.bijective, "det = " + format_rational(linalg.det(cert.matrix)))
    if family.d == 0:
        report.certify(
            "projection is an isometry carrying sigma_t to sigma0 or its conjugate",
            bool(cert.isometry),
            f"period image: {cert.period_image or 'none'}",
        )


# -- handlers ---------------------------------------------------------------------


def _validate(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "validate")
    s = fixture.structure
    report.inputs["fixture"] = fixture.name
    sig = signature_of(s)
    q = s.q()
    report.results.update(
        {
            "rank": s.rank,
            "field": str(s.field),
            "gram signature": str(sig),
            "q": q,
            "picard number": picard_number(s),
            "irreducible": is_irreducible(s),
        }
    )
    for label, family in fixture.families.items():
        report.results[f"family {label}"] = {"d": family.d, "domain": classify_domain(family)}
    for label, family in fixture.two_class.items():
        report.results[f"two-class {label}"] = {"d": family.d, "signature": str(family.signature())}

    report.certify("(sigma.sigma) = 0", s.lattice.pair(s.period, s.period).is_zero())
    report.certify("(sigma.conj sigma) > 0", q.sign() > 0, f"q = {q}")
    report.certify(f"signature is (2, {s.rank - 2}, 0)", sig.as_tuple() == (2, s.rank - 2, 0), str(sig))
    for label, family in fixture.two_class.items():
        sig2 = family.signature()
        report.certify(
            f"two-class {label}: signature (3, {s.rank - 1}, 0)",
            sig2.as_tuple() == (3, s.rank - 1, 0),
            str(sig2),
        )


_EXTENDED_SIGNATURE = {
    DomainClass.TWISTOR_SPHERE: lambda r: (3, r - 2, 0),
    DomainClass.BRAUER_TWO_LINES: lambda r: (2, r - 2, 1),
    DomainClass.DWORK_TWO_HALF_PLANES: lambda r: (2, r - 1, 0),
}


def _classify(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "classify")
    family = fixture.family(_flag(flags, "family", "classify"))
    domain = classify_domain(family)
    report.inputs.update({"fixture": fixture.name, "family": family.label, "d": family.d})
    ext_sig = signature(family.extended)
    report.results.update(
        {"domain": domain, "description": domain.description, "extended signature": str(ext_sig)}
    )
    expected = _EXTENDED_SIGNATURE[domain](family.rank)
    report.certify(f"T + Q.l has signature {expected}", ext_sig.as_tuple() == expected, str(ext_sig))

    point = None
    if flags.get("tau") is not None:
        tau = _parsed(parse_rational, flags["tau"], "tau")
        point = equator_point(family, tau)
        report.inputs["tau"] = tau
        report.certify("sample lies on the equator", equator_test(family, point))
    elif flags.get("B") is not None or flags.get("point") is not None:
        point, b = _family_point(family, flags, "classify")
        if b is not None:
            report.inputs["B"] = b
    if point is None:
        return
    report.results["point"] = _point_summary(point)
    report.results["brilliant"] = is_brilliant(family, point)
    if family.d > 0:
        report.results["on equator"] = equator_test(family, point)
    report.results["NL"] = _certify_nl(report, family, point)


def _nl(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "nl")
    family = fixture.family(_flag(flags, "family", "nl"))
    point, b = _family_point(family, flags, "nl")
    report.inputs.update({"fixture": fixture.name, "family": family.label, "d": family.d})
    if b is not None:
        report.inputs["B"] = b
    report.results["point"] = _point_summary(point)
    inside = _certify_nl(report, family, point)
    report.results["NL"] = inside
    if not inside:
        return
    _certify_projection(report, family, point)
    if family.d == 0 and not point.a.is_zero():
        recovered = recover_bfield(family, point)
        report.results["B"] = recovered.b
        report.results["order"] = recovered.order
        if b is not None:
            report.certify("recovered B equals the input", recovered.b == b, format_vector(recovered.b))


def _brauer(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "brauer")
    family = fixture.family(_flag(flags, "family", "brauer"))
    point, b = _family_point(family, flags, "brauer")
    report.inputs.update({"fixture": fixture.name, "family": family.label, "d": family.d})
    if b is not None:
        report.inputs["B"] = b
    recovered = recover_bfield(family, point)
    report.results.update(
        {
            "(sigma0.B)": point.c,
            "sigma_t": _on_line(point.c, "l"),
            "B": recovered.b,
            "order": recovered.order,
        }
    )
    if recovered.element is not None:
        report.results["B mod T"] = recovered.element.reduced
    if b is not None:
        report.certify("recover_bfield inverts the parameterization", recovered.b == b)
    embedding = fB_embedding(family, recovered.b)
    report.certify("image of f_B is T_t", embedding.image_matches)
    report.certify("f_B is an isometry onto its image", embedding.isometric)
    _certify_nl(report, family, point, required=True)
    _certify_projection(report, family, point)


def _endo(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "endo")
    s = fixture.structure
    report.inputs["fixture"] = fixture.name
    algebra = endo_algebra(s)
    cls = classify_endo(s, algebra)
    comparison = compare_endo_conditions(s)
    report.results.update(
        {
            "kind": cls.kind,
            "degree": cls.degree,
            "CM-Hodge": cls.is_cm_hodge,
            "K": format_poly(cls.primitive_minpoly),
            "K0": format_poly(cls.k0_minpoly),
            "dim (line condition only)": comparison.dim_a,
            "dim (with adjoint condition)": comparison.dim_ab,
            "condition discrepancy": comparison.discrepancy,
        }
    )
    if comparison.discrepancy:
        logger.warning("Endomorphism conditions disagree: %d vs %d", comparison.dim_a, comparison.dim_ab)

    multiplicative = all(
        eigenvalue_of(s, linalg.matmul(x, y)) == eigenvalue_of(s, x) * eigenvalue_of(s, y)
        for x in algebra.basis
        for y in algebra.basis
    )
    report.certify("eigenvalue map is multiplicative on basis pairs", multiplicative)

    if flags.get("family") is None:
        return
    family = fixture.family(flags["family"])
    point, b = _family_point(family, flags, "endo")
    report.inputs.update({"family": family.label, "d": family.d})
    if b is not None:
        report.inputs["B"] = b
    prop = verify_cm_propagation(family, point)
    fiber = prop.fiber_classification
    report.results.update(
        {
            "fiber kind": fiber.kind,
            "fiber degree": fiber.degree,
            "fiber K": format_poly(fiber.primitive_minpoly),
            "fiber K0": format_poly(fiber.k0_minpoly),
            "K0 image": format_poly(prop.k0_image, "theta") if prop.k0_image else None,
            "K0 isomorphic": prop.fields_k0_isomorphic,
            "K isomorphic": prop.fields_isomorphic,
            "m": prop.m,
            "q": prop.q,
        }
    )
    if prop.obstruction is not None:
        obstruction = prop.obstruction
        report.results.update(
            {
                "K0 degree": obstruction.k0_degree,
                "fiber algebra dimension": obstruction.fiber_degree,
                "transported K0 keeps the period line": obstruction.keeps_period_line,
                "transported K0 adjoint defect rank": obstruction.adjoint_defect_rank,
            }
        )
    report.certify("fiber is CM-Hodge", fiber.is_cm_hodge, f"{fiber.kind.value} of degree {fiber.degree}")
    report.certify("K0 embeds into the fiber field", prop.k0_embeds)
    report.certify("maximal totally real subfields agree", prop.fields_k0_isomorphic)
    if prop.transported is not None:
        report.certify("projection carries the fiber algebra onto the base algebra", prop.transported)
        report.certify("endomorphism fields are isomorphic (d = 0)", prop.fields_isomorphic)
    if prop.relative_poly is not None:
        rel = prop.relative_poly
        report.results["relative discriminant"] = format_poly(rel.discriminant_minpoly)
        report.certify("relative discriminant is totally negative", rel.totally_negative)


def _transport(report: Report, index: int, transport: BrauerTransport) -> None:
    prefix = f"point {index}"
    report.certify(f"{prefix}: transported point lies on L_f", transport.on_line)
    report.certify(f"{prefix}: transported point is in NL_f", transport.in_nl)
    report.certify(f"{prefix}: transported point is orthogonal to l'", transport.orthogonal)


def _two_class(fixture: LoadedFixture, flags: dict[str, Any]) -> TwoClassFamily:
    return fixture.two_class_family(flags.get("two_class"))


def _compose(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "compose")
    family = _two_class(fixture, flags)
    vector = _parsed(parse_class_expression, _flag(flags, "connector", "compose"), "connector", family.rank, 2)
    target = flags.get("to") or "brauer"
    if target not in ("brauer", "points"):
        raise ParseError(f"--to must be 'brauer' or 'points', got {target!r}")
    c1, c2 = _ell(flags.get("ell"))
    report.inputs.update(
        {"fixture": fixture.name, "two-class": family.label, "d": family.d, "connector": vector, "l": (c1, c2)}
    )

    connector = check_connector(family, vector)
    report.certify(
        "connector: (l'.l') > 0, (l'.f) > 0, component in T",
        True,
        f"(l'.l') = {format_rational(connector.square)}, (l'.f) = {format_rational(connector.f_pairing)}",
    )
    result = curve_meets_brilliant(family, connector, c1, c2)
    report.results.update(
        {
            "d(l)": result.family.d,
            "domain": classify_domain(result.family),
            "field": result.field_name,
            "intersections": [_point_summary(p) for p in result.points],
            "discarded": result.discarded,
            "trivial": result.trivial is not None,
        }
    )
    for i, point in enumerate(result.points, 1):
        _certify_nl(report, result.family, point, name=f"point {i}", required=True)
    if target == "points":
        return

    if result.trivial is not None:
        zero = tuple(Fraction(0) for _ in range(family.rank))
        report.results.update({"B": zero, "order": 1, "sigma": "sigma0"})
        return
    if not report.certify("curve meets D_l off the excluded chart", bool(result.points), f"{result.discarded} discarded"):
        return
    transports = [transport_to_brauer(family, p, c1, c2) for p in result.points]
    for i, transport in enumerate(transports, 1):
        _transport(report, i, transport)
    first = transports[0]
    report.results.update(
        {
            "connector from NL": first.connector.vector,
            "B": first.bfield.b,
            "order": first.bfield.order,
            "sigma": _on_line(first.point.c),
        }
    )


def _progress_callback(total: int) -> tuple[Progress, Callable[[Fraction], None]]:
    progress = Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TextColumn("s values"),
        TimeElapsedColumn(),
        console=Console(stderr=True),
    )
    task = progress.add_task("Specializing", total=total)
    return progress, lambda _s: progress.advance(task)


def _specialize(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    fixture = _fixture(flags, config, "specialize")
    family = _two_class(fixture, flags)
    vector = _parsed(parse_class_expression, _flag(flags, "connector", "specialize"), "connector", family.rank, 2)
    grid = _parsed(parse_rational_list, flags.get("s_grid") or DEFAULT_S_GRID, "s_grid")
    tau = _parsed(parse_rational, flags.get("tau") or "0", "tau")
    report.inputs.update(
        {"fixture": fixture.name, "two-class": family.label, "connector": vector, "s grid": grid, "tau": tau}
    )

    if config.get("progress"):
        progress, callback = _progress_callback(len(grid))
        with progress:
            trace = nl_specialization(family, vector, grid, progress=callback)
    else:
        trace = nl_specialization(family, vector, grid)

    for row in trace.rows:
        entry: dict[str, Any] = {
            "field": row.intersection.field_name,
            "c": [p.c for p in row.intersection.points],
            "NL": list(row.nl_flags),
            "discarded": row.intersection.discarded,
        }
        if row.intersection.trivial is not None:
            entry["trivial"] = True
        if row.bfield is not None:
            entry["B"] = row.bfield.b
            entry["order"] = row.bfield.order
        report.results[f"s = {format_rational(row.s)}"] = entry
        report.certify(f"s = {format_rational(row.s)}: every intersection is NL", all(row.nl_flags))

    terminal = trace.terminal
    if any(s == 1 for s in grid):
        report.certify(
            "terminal Brauer class is rational with finite order",
            terminal is not None and terminal.order is not None,
            format_vector(terminal.b) if terminal is not None else "no point at s = 1",
        )
    if terminal is not None:
        report.results["terminal B"] = terminal.b
        report.results["terminal order"] = terminal.order

    distances = [equator_flow(family, 1 - Fraction(1, 2 ** k), tau) for k in range(1, EQUATOR_STEPS + 1)]
    report.results["equator distance upper bounds"] = [
        f"{float(d.upper):.3e}" for d in distances
    ]
    report.certify("equator identities (e.e) = q/2, (f'.f') = -q/2, (e.f') = 0", all(d.identities_hold for d in distances))
    report.certify("equator points are valid periods on the equator", all(d.point_valid for d in distances))
    report.certify("squared distance is (1 - s)(3 + s)/4", all(d.closed_form for d in distances))
    last = distances[-1]
    report.certify(
        f"equator distance at s = 1 - 2^-{EQUATOR_STEPS} below 1/1000",
        last.upper < EQUATOR_TARGET,
        f"<= {float(last.upper):.3e}",
    )
    report.certify(
        "equator distance shrinks along the flow",
        all(later.upper < earlier.lower for earlier, later in zip(distances, distances[1:])),
        f"{float(distances[0].lower):.3e} -> {float(last.upper):.3e}",
    )


def _fixtures(flags: dict[str, Any], config: dict[str, Any], report: Report) -> None:
    if flags.get("fixture") is None:
        report.results["fixtures"] = list_fixtures(config.get("fixture_dir"))
        return
    fixture = _fixture(flags, config, "fixtures")
    report.inputs["fixture"] = fixture.name
    report.results["document"] = serialize_fixture(fixture)
    reloaded = build_fixture(json.loads(dump_fixture(report.results["document"])))
    report.certify(
        "serialization round-trips exactly",
        serialize_fixture(reloaded) == report.results["document"]
        and reloaded.structure.period == fixture.structure.period
        and reloaded.structure.lattice.gram == fixture.structure.lattice.gram,
    )


COMMANDS: dict[str, Handler] = {
    "validate": _validate,
    "classify": _classify,
    "nl": _nl,
    "brauer": _brauer,
    "endo": _endo,
    "compose": _compose,
    "specialize": _specialize,
    "fixtures": _fixtures,
}


def dispatch(command: str, flags: dict[str, Any], config: dict[str, Any] | None = None) -> Report:
    handler = COMMANDS.get(command)
    if handler is None:
        raise UnknownCommand(f"Unknown command: {command}. Available: {', '.join(COMMANDS)}")
    config = dict(DEFAULTS) if config is None else config
    apply_settings(config)
    flags = {k: v for k, v in flags.items() if v is not None}
    report = Report(command_echo(command, flags))
    logger.info("Running %s", report.command)
    handler(flags, config, report)
    logger.info("%s: %d certificate(s), passed = %s", command, len(report.certificates), report.passed)
    return report
