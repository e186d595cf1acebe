"""Geometry catalog: pair descriptions, config parsing, invariant tables.

A *pair geometry* bundles everything the pipeline needs about a log Calabi-Yau
pair (X, D): the ambient cohomology ring, the divisor's ring, the restriction
homomorphism between them, the divisor's class, the Novikov variables with
their intersection numbers against D (the m-vector), truncation policy, and
where the absolute-invariant input comes from (a closed form, a toric
hypergeometric template, or an ingested table of one-point invariants).

Geometries are described by INI-style config text (see BUILTIN_CONFIGS for the
three shipped pairs) so that external geometries can be supplied as files.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    AlgebraError,
    Element,
    GradedAlgebra,
    RestrictionMap,
    check_algebra,
    check_restriction,
    rat,
)
from .series import TruncationPolicy


class ConfigError(ValueError):
    pass


class MissingDataError(ValueError):
    """An operation needs invariant data that was not supplied."""


J_SOURCES = ("closed_form_projective", "toric_hypergeometric", "invariant_table")
TAU_D_SOURCES = ("zero", "closed_form_from_one_point_invariants", "table")
TABLE_KINDS = ("x_point", "d_point")


@dataclass(frozen=True)
class InvariantTable:
    """One-point descendant invariants ⟨[pt] ψ^a⟩ of X (kind x_point) or D (d_point).

    Keys are (kind, curve-class exponents, psi power); values exact rationals.
    """

    entries: tuple[tuple[tuple[str, tuple[int, ...], int], Fraction], ...]

    def as_dict(self) -> dict[tuple[str, tuple[int, ...], int], Fraction]:
        return dict(self.entries)

    def rows_for(self, kind: str) -> list[tuple[tuple[int, ...], int, Fraction]]:
        return [(b, a, v) for (k, b, a), v in self.entries if k == kind]

    def lookup(self, kind: str, beta: tuple[int, ...], psi: int) -> Fraction | None:
        return self.as_dict().get((kind, tuple(beta), psi))

    def is_empty_for(self, kind: str) -> bool:
        return not self.rows_for(kind)


def ingest_invariants(text: str) -> InvariantTable:
    """Parse the plain-text invariant table format.

    Columns (whitespace separated): kind, curve class as comma-joined
    exponents, psi power, insertion, value as p/q.  Lines starting with # are
    comments; a header row repeating the column names is allowed and skipped.
    """
    entries: dict[tuple[str, tuple[int, ...], int], Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split()
        if cols[0] == "kind":
            continue  # header
        if len(cols) != 5:
            raise ConfigError(f"invariant table line {lineno}: need 5 columns, got {len(cols)}")
        kind, cls, psi, insertion, value = cols
        if kind not in TABLE_KINDS:
            raise ConfigError(
                f"invariant table line {lineno}: kind {kind!r} not in {TABLE_KINDS} "
                "(only one-point descendant point insertions are accepted)"
            )
        if insertion != "pt":
            raise ConfigError(
                f"invariant table line {lineno}: insertion must be 'pt', got {insertion!r}"
            )
        try:
            beta = tuple(int(x) for x in cls.split(","))
            a = int(psi)
            val = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invariant table line {lineno}: {exc}") from exc
        if a < 0 or any(b < 0 for b in beta):
            raise ConfigError(f"invariant table line {lineno}: negative class/psi data")
        key = (kind, beta, a)
        if key in entries:
            raise ConfigError(f"invariant table line {lineno}: duplicate key {key}")
        entries[key] = val
    return InvariantTable(tuple(entries.items()))


def format_invariants(table: InvariantTable) -> str:
    lines = ["kind\tclass\tpsi\tinsertion\tvalue"]
    for (kind, beta, a), v in table.entries:
        lines.append(f"{kind}\t{','.join(map(str, beta))}\t{a}\tpt\t{v}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ToricData:
    """Denominator divisor classes and bundle (numerator) classes of the template."""

    denominators: tuple[Element, ...]
    bundles: tuple[Element, ...]


@dataclass(frozen=True)
class PairGeometry:
    name: str
    ambient: GradedAlgebra
    divisor: GradedAlgebra
    restriction: RestrictionMap
    divisor_class: Element
    picard: tuple[Element, ...]        # degree-1 classes dual to the Novikov basis
    novikov_names: tuple[str, ...]
    m_vector: tuple[int, ...]
    policy: TruncationPolicy
    j_source: str
    tau_d_source: str
    tau_d_reason: str | None
    hyperplane: Element | None
    projective_dim: int | None
    toric: ToricData | None
    table: InvariantTable | None

    @property
    def nvars(self) -> int:
        return len(self.novikov_names)

    def pairing(self, cls: Element) -> tuple[int, ...]:
        """Intersection numbers of a degree-1 class against the Novikov curve basis.

        Works by expanding the class over the picard classes (which are dual to
        the curve basis by construction); raises when the class is not in their
        span or the coordinates are not integers.
        """
        coords = _expand_in_picard(self, cls)
        return coords

    def contact_weight(self, beta: tuple[int, ...]) -> int:
        """D·β for a curve class."""
        return sum(m * b for m, b in zip(self.m_vector, beta))

    def with_policy(self, policy: TruncationPolicy) -> "PairGeometry":
        return PairGeometry(
            self.name, self.ambient, self.divisor, self.restriction,
            self.divisor_class, self.picard, self.novikov_names, self.m_vector,
            policy, self.j_source, self.tau_d_source, self.tau_d_reason,
            self.hyperplane, self.projective_dim, self.toric, self.table,
        )

    def with_table(self, table: InvariantTable | None, j_source: str | None = None) -> "PairGeometry":
        return PairGeometry(
            self.name, self.ambient, self.divisor, self.restriction,
            self.divisor_class, self.picard, self.novikov_names, self.m_vector,
            self.policy, j_source or self.j_source, self.tau_d_source,
            self.tau_d_reason, self.hyperplane, self.projective_dim, self.toric,
            table,
        )


def _expand_in_picard(geom: PairGeometry, cls: Element) -> tuple[int, ...]:
    # The picard classes are basis elements in our catalog, which keeps the
    # expansion a plain coefficient read-off; fall back to a solve otherwise.
    residual = cls
    coords = []
    for p in geom.picard:
        nz = [i for i, c in enumerate(p.coeffs) if c]
        if len(nz) != 1 or p.coeffs[nz[0]] != 1:
            raise ConfigError("picard classes must be single basis elements")
        c = cls.coeffs[nz[0]]
        if c.denominator != 1:
            raise ConfigError(f"non-integer intersection pairing for {cls!r}")
        coords.append(int(c))
        residual = residual - p.scale(c)
    if not residual.is_zero():
        raise ConfigError(f"{cls!r} is not in the span of the picard classes")
    return tuple(coords)


# ---------------------------------------------------------------------------
# config parsing


def _parse_rows(value: str) -> list[list[str]]:
    rows = []
    for raw in value.strip().splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            rows.append(line.split())
    return rows


def _parse_algebra(section: configparser.SectionProxy, fallback_name: str) -> GradedAlgebra:
    try:
        basis = section["basis"].split()
        degrees = [int(d) for d in section["degrees"].split()]
        unit = section["unit"]
    except KeyError as exc:
        raise ConfigError(f"[{section.name}] missing key: {exc}") from exc
    point = section.get("point")
    products: dict[tuple[str, str], dict[str, Fraction]] = {}
    for row in _parse_rows(section.get("products", "")):
        if len(row) != 4:
            raise ConfigError(
                f"[{section.name}] product rows are 'left right target coeff', got {row}"
            )
        a, b, k, c = row
        products.setdefault((a, b), {})[k] = rat(c)
    integration = None
    if section.get("integration"):
        integration = {}
        for row in _parse_rows(section["integration"]):
            if len(row) != 2:
                raise ConfigError(f"[{section.name}] integration rows are 'basis coeff'")
            integration[row[0]] = rat(row[1])
    try:
        alg = GradedAlgebra.from_products(
            section.get("name", fallback_name), basis, degrees, products,
            unit=unit, point=point, integration=integration,
        )
    except AlgebraError as exc:
        raise ConfigError(f"[{section.name}]: {exc}") from exc
    problems = check_algebra(alg)
    if problems:
        raise ConfigError(f"[{section.name}] invalid ring: " + "; ".join(problems[:3]))
    return alg


def _parse_class(alg: GradedAlgebra, expr: str) -> Element:
    """Parse linear combinations like '4*H + h - H2'."""
    out = alg.zero()
    expr = expr.replace("-", "+-").replace(" ", "")
    for term in expr.split("+"):
        if not term:
            continue
        sign = 1
        if term.startswith("-"):
            sign, term = -1, term[1:]
        if "*" in term:
            c, name = term.split("*", 1)
            coeff = rat(c)
        else:
            coeff, name = Fraction(1), term
        if name not in alg.basis:
            raise ConfigError(f"unknown class {name!r} in {alg.name}")
        out = out + alg.named(name).scale(coeff * sign)
    return out


def load_geometry(text: str, default_name: str = "geometry") -> PairGeometry:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep case of option values' keys
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for needed in ("algebra.ambient", "algebra.divisor", "restriction", "pair", "truncation"):
        if needed not in cp:
            raise ConfigError(f"missing [{needed}] section")

    ambient = _parse_algebra(cp["algebra.ambient"], "ambient")
    divisor = _parse_algebra(cp["algebra.divisor"], "divisor")

    images: dict[str, Element] = {}
    for row in _parse_rows(cp["restriction"].get("map", "")):
        if len(row) < 2 or len(row) % 2 != 1:
            raise ConfigError("restriction rows are 'source (target coeff)+'")
        src = row[0]
        img = divisor.zero()
        for tname, c in zip(row[1::2], row[2::2]):
            img = img + divisor.named(tname).scale(rat(c))
        if src not in ambient.basis:
            raise ConfigError(f"restriction of unknown class {src!r}")
        images[src] = img
    images.setdefault(ambient.basis[ambient.unit_index], divisor.unit())
    restriction = RestrictionMap.from_images(ambient, divisor, images)
    problems = check_restriction(restriction)
    if problems:
        raise ConfigError("restriction is not a ring map: " + "; ".join(problems[:3]))

    pair = cp["pair"]
    name = pair.get("name", default_name)
    try:
        divisor_class = _parse_class(ambient, pair["divisor_class"])
        picard_names = pair["picard"].split()
        m_vector = tuple(int(x) for x in pair["m_vector"].split())
        novikov = tuple(pair["novikov"].split())
        j_source = pair["j_source"]
        tau_d_source = pair["tau_d_source"]
    except KeyError as exc:
        raise ConfigError(f"[pair] missing key: {exc}") from exc

    picard = tuple(ambient.named(nm) for nm in picard_names)
    for p, nm in zip(picard, picard_names):
        if ambient.degrees[ambient.basis.index(nm)] != 1:
            raise ConfigError(f"picard class {nm} is not degree 1")
    if not (len(picard) == len(m_vector) == len(novikov)):
        raise ConfigError("picard / m_vector / novikov arity mismatch")
    if j_source not in J_SOURCES:
        raise ConfigError(f"j_source must be one of {J_SOURCES}")
    if tau_d_source not in TAU_D_SOURCES:
        raise ConfigError(f"tau_d_source must be one of {TAU_D_SOURCES}")
    tau_d_reason = pair.get("tau_d_reason")
    if tau_d_source == "zero":
        if tau_d_reason not in ("k3", "elliptic_curve"):
            raise ConfigError(
                "a zero divisor mirror map needs tau_d_reason = k3 | elliptic_curve"
            )
        if divisor.top_degree > 2:
            raise ConfigError("zero-justification only applies to curve/surface divisors")

    trunc = cp["truncation"]
    order = int(trunc.get("order", "8"))
    weights_text = trunc.get("weights", "").split()
    weights = tuple(int(x) for x in weights_text) if weights_text else (1,) * len(novikov)
    z_window = None
    if trunc.get("z_min") or trunc.get("z_max"):
        z_min = int(trunc.get("z_min", str(-(order + 3))))
        z_max = int(trunc.get("z_max", "1"))
        z_window = (z_min, z_max)
    try:
        policy = TruncationPolicy.make(len(novikov), order, weights, z_window)
    except ValueError as exc:
        raise ConfigError(f"[truncation]: {exc}") from exc

    hyperplane = None
    projective_dim = None
    if pair.get("hyperplane"):
        hyperplane = _parse_class(ambient, pair["hyperplane"])
    if pair.get("projective_dim"):
        projective_dim = int(pair["projective_dim"])

    toric = None
    if "toric" in cp:
        tsec = cp["toric"]
        dens = tuple(
            _parse_class(ambient, expr.strip())
            for expr in tsec.get("denominators", "").split(";")
            if expr.strip()
        )
        bundles = tuple(
            _parse_class(ambient, expr.strip())
            for expr in tsec.get("bundles", "").split(";")
            if expr.strip()
        )
        if not dens or not bundles:
            raise ConfigError("[toric] needs denominators and bundles")
        toric = ToricData(dens, bundles)

    table = None
    if pair.get("invariants"):
        table = ingest_invariants(pair["invariants"])

    geom = PairGeometry(
        name=name, ambient=ambient, divisor=divisor, restriction=restriction,
        divisor_class=divisor_class, picard=picard, novikov_names=novikov,
        m_vector=m_vector, policy=policy, j_source=j_source,
        tau_d_source=tau_d_source, tau_d_reason=tau_d_reason,
        hyperplane=hyperplane, projective_dim=projective_dim, toric=toric,
        table=table,
    )
    _validate_geometry(geom)
    return geom


def _validate_geometry(geom: PairGeometry) -> None:
    # divisor class: homogeneous of degree 1 and integrally spanned by picard
    for i, c in enumerate(geom.divisor_class.coeffs):
        if c and geom.ambient.degrees[i] != 1:
            raise ConfigError("divisor_class must be homogeneous of degree 1")
    coords = _expand_in_picard(geom, geom.divisor_class)
    if coords != geom.m_vector:
        raise ConfigError(
            f"m_vector {geom.m_vector} disagrees with the divisor class pairing {coords}"
        )
    if geom.j_source == "closed_form_projective":
        if geom.hyperplane is None or geom.projective_dim is None:
            raise ConfigError("closed_form_projective needs hyperplane and projective_dim")
        if geom.nvars != 1:
            raise ConfigError("closed_form_projective is single-variable")
        m = geom.m_vector[0]
        if geom.divisor_class != geom.hyperplane.scale(m):
            raise ConfigError("divisor_class must be m * hyperplane for the closed form")
    if geom.j_source == "toric_hypergeometric":
        if geom.toric is None:
            raise ConfigError("toric_hypergeometric needs a [toric] section")
        for cls in geom.toric.denominators + geom.toric.bundles:
            pv = geom.pairing(cls)
            if any(x < 0 for x in pv):
                raise ConfigError(
                    f"toric class {cls!r} pairs negatively with an effective curve class"
                )
        total_den = geom.ambient.zero()
        for cls in geom.toric.denominators:
            total_den = total_den + cls
        total_bun = geom.ambient.zero()
        for cls in geom.toric.bundles:
            total_bun = total_bun + cls
        if total_den != total_bun:
            # log Calabi-Yau bookkeeping: denominators + relative class must sum
            # to the anticanonical class = bundles + relative class
            raise ConfigError(
                "toric data violates the log Calabi-Yau condition: "
                "sum(denominators) != sum(bundles)"
            )
    if geom.j_source == "invariant_table":
        if geom.table is None or geom.table.is_empty_for("x_point"):
            raise MissingDataError(
                f"{geom.name}: j_source=invariant_table but no x_point rows supplied"
            )
    if geom.tau_d_source == "table":
        if geom.table is None or geom.table.is_empty_for("d_point"):
            raise MissingDataError(
                f"{geom.name}: tau_d_source=table but no d_point rows supplied"
            )


# ---------------------------------------------------------------------------
# builtin catalog


BUILTIN_CONFIGS: dict[str, str] = {
    "p2_cubic": """
[algebra.ambient]
name = proj_plane
basis = one H H2
degrees = 0 1 2
unit = one
point = H2
products =
    H H H2 1

[algebra.divisor]
name = cubic_curve
basis = one p
degrees = 0 1
unit = one
point = p

[restriction]
map =
    one one 1
    H p 3

[pair]
name = p2_cubic
divisor_class = 3*H
picard = H
m_vector = 3
novikov = y
j_source = closed_form_projective
tau_d_source = zero
tau_d_reason = elliptic_curve
hyperplane = H
projective_dim = 2

[truncation]
order = 8
weights = 1
""",
    "p3_quartic": """
[algebra.ambient]
name = proj_space
basis = one H H2 H3
degrees = 0 1 2 3
unit = one
point = H3
products =
    H H H2 1
    H H2 H3 1

[algebra.divisor]
name = quartic_k3
basis = one h p
degrees = 0 1 2
unit = one
point = p
products =
    h h p 4

[restriction]
map =
    one one 1
    H h 1
    H2 p 4

[pair]
name = p3_quartic
divisor_class = 4*H
picard = H
m_vector = 4
novikov = y
j_source = closed_form_projective
tau_d_source = zero
tau_d_reason = k3
hyperplane = H
projective_dim = 3

[truncation]
order = 8
weights = 1
""",
    "blp3_k3": """
# Hypersurface of class 4H+h in the projective bundle P(O(-1)+O) over proj 3-space,
# with the K3 divisor cut by the section of class h-H.  The bundle relation is
# h*h = H*h; the restriction identifies both degree-1 classes on the divisor.
[algebra.ambient]
name = bundle_ambient
basis = one H h H2 Hh H3 H2h H3h
degrees = 0 1 1 2 2 3 3 4
unit = one
point = H3h
products =
    H H H2 1
    H h Hh 1
    h h Hh 1
    H H2 H3 1
    H Hh H2h 1
    h H2 H2h 1
    h Hh H2h 1
    H H2h H3h 1
    h H3 H3h 1
    h H2h H3h 1
    H2 Hh H3h 1
    Hh Hh H3h 1

[algebra.divisor]
name = blp3_k3_divisor
basis = one h p
degrees = 0 1 2
unit = one
point = p
products =
    h h p 4

[restriction]
map =
    one one 1
    H h 1
    h h 1
    H2 p 4
    Hh p 4

[pair]
name = blp3_k3
divisor_class = h - H
picard = H h
m_vector = -1 1
novikov = q1 q0
j_source = toric_hypergeometric
tau_d_source = zero
tau_d_reason = k3

[toric]
denominators = H; H; H; H; h
bundles = 4*H + h

[truncation]
order = 5
weights = 1 1
""",
}


def builtin_geometry(name: str) -> PairGeometry:
    if name not in BUILTIN_CONFIGS:
        raise ConfigError(
            f"unknown builtin geometry {name!r}; have {sorted(BUILTIN_CONFIGS)}"
        )
    return load_geometry(BUILTIN_CONFIGS[name], name)


def tabulate_one_point_invariants(geom: PairGeometry, t_order: int) -> InvariantTable:
    """Materialize the ⟨[pt] ψ^{d-2}⟩ one-point invariants through t-degree t_order.

    For the closed-form projective route these are 1/(d'!)^{n+1} at curve degree
    d' (t-degree d = m d'); a table-backed geometry re-emits its rows.  Used by
    the period comparison's table round trip and the negative control.
    """
    if geom.j_source == "invariant_table":
        assert geom.table is not None
        rows = [
            (("x_point", beta, a), v)
            for (beta, a, v) in geom.table.rows_for("x_point")
        ]
        return InvariantTable(tuple(rows))
    if geom.j_source != "closed_form_projective":
        raise MissingDataError(
            f"{geom.name}: no invariant source for the quantum side "
            "(supply an x_point table)"
        )
    m = geom.m_vector[0]
    n = geom.projective_dim
    rows = []
    d1 = 1
    while m * d1 <= t_order:
        d = m * d1
        if d >= 2:
            rows.append((("x_point", (d1,), d - 2), Fraction(1, math.factorial(d1) ** (n + 1))))
        d1 += 1
    return InvariantTable(tuple(rows))
