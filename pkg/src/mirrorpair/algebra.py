"""Finite-dimensional graded-commutative algebras with exact rational coefficients.

Cohomology rings enter the pipeline as explicit multiplication tables: a basis,
integer (complex) degrees, sparse structure constants, a unit, and an integration
functional.  Everything downstream (series coefficients, intersection numbers,
pushforwards) is exact, so coefficients are `fractions.Fraction` throughout.

Degrees are complex degrees: a surface class on a threefold has degree 1, the
point class degree 3.  All our algebras are evenly graded in the topological
sense, so multiplication is plainly commutative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction


def rat(x) -> Fraction:
    """Coerce ints / 'p/q' strings / Fractions to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class GradedAlgebra:
    """A graded-commutative ring presented by structure constants.

    ``table[i][j]`` is the coefficient vector of ``e_i * e_j`` in the basis.
    ``integration`` is the linear functional used for intersection pairings;
    by default it reads off the coefficient of the point class.
    """

    name: str
    basis: tuple[str, ...]
    degrees: tuple[int, ...]
    table: tuple[tuple[tuple[Fraction, ...], ...], ...]
    unit_index: int
    point_index: int | None
    integration: tuple[Fraction, ...]

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_products(
        name: str,
        basis: Sequence[str],
        degrees: Sequence[int],
        products: Mapping[tuple[str, str], Mapping[str, Fraction | int | str]],
        unit: str,
        point: str | None = None,
        integration: Mapping[str, Fraction | int | str] | None = None,
    ) -> "GradedAlgebra":
        """Build from sparse products of non-unit basis pairs.

        Products involving the unit are implied; any pair not listed (in either
        order) multiplies to zero.
        """
        basis = tuple(basis)
        degrees = tuple(int(d) for d in degrees)
        if len(basis) != len(degrees):
            raise AlgebraError(f"{name}: basis/degrees length mismatch")
        if len(set(basis)) != len(basis):
            raise AlgebraError(f"{name}: duplicate basis names")
        index = {b: i for i, b in enumerate(basis)}
        if unit not in index:
            raise AlgebraError(f"{name}: unknown unit {unit!r}")
        ui = index[unit]
        if degrees[ui] != 0:
            raise AlgebraError(f"{name}: unit must have degree 0")
        pi = index[point] if point is not None else None
        n = len(basis)
        tab = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            tab[ui][i][i] = Fraction(1)
            tab[i][ui][i] = Fraction(1)
        for (a, b), img in products.items():
            if a not in index or b not in index:
                raise AlgebraError(f"{name}: product names unknown: {a}*{b}")
            i, j = index[a], index[b]
            if ui in (i, j):
                raise AlgebraError(f"{name}: unit products are implied, do not list {a}*{b}")
            vec = [Fraction(0)] * n
            for k_name, c in img.items():
                if k_name not in index:
                    raise AlgebraError(f"{name}: unknown target {k_name} in {a}*{b}")
                vec[index[k_name]] = rat(c)
            tab[i][j] = list(vec)
            tab[j][i] = list(vec)
        integ = [Fraction(0)] * n
        if integration is not None:
            for k_name, c in integration.items():
                integ[index[k_name]] = rat(c)
        elif pi is not None:
            integ[pi] = Fraction(1)
        else:
            raise AlgebraError(f"{name}: need a point class or an integration functional")
        frozen = tuple(tuple(tuple(v) for v in row) for row in tab)
        return GradedAlgebra(name, basis, degrees, frozen, ui, pi, tuple(integ))

    # -- elements ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def top_degree(self) -> int:
        return max(self.degrees)

    def zero(self) -> "Element":
        return Element(self, (Fraction(0),) * self.dim)

    def unit(self) -> "Element":
        return self.basis_element(self.unit_index)

    def basis_element(self, i: int) -> "Element":
        coeffs = [Fraction(0)] * self.dim
        coeffs[i] = Fraction(1)
        return Element(self, tuple(coeffs))

    def named(self, name: str) -> "Element":
        return self.basis_element(self.basis.index(name))

    def element(self, coeffs: Iterable) -> "Element":
        c = tuple(rat(x) for x in coeffs)
        if len(c) != self.dim:
            raise AlgebraError(f"{self.name}: wrong coefficient count")
        return Element(self, c)

    def span_index(self, name: str) -> int:
        return self.basis.index(name)


@dataclass(frozen=True)
class Element:
    algebra: GradedAlgebra
    coeffs: tuple[Fraction, ...]

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.algebra, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Element":
        return Element(self.algebra, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Element):
            self._check(other)
            n = self.algebra.dim
            out = [Fraction(0)] * n
            tab = self.algebra.table
            for i, a in enumerate(self.coeffs):
                if not a:
                    continue
                for j, b in enumerate(other.coeffs):
                    if not b:
                        continue
                    ab = a * b
                    row = tab[i][j]
                    for k in range(n):
                        if row[k]:
                            out[k] += ab * row[k]
            return Element(self.algebra, tuple(out))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "Element":
        c = rat(c)
        return Element(self.algebra, tuple(c * a for a in self.coeffs))

    def _check(self, other: "Element") -> None:
        if self.algebra is not other.algebra:
            raise AlgebraError(
                f"mixing elements of {self.algebra.name} and {other.algebra.name}"
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Element)
            and self.algebra is other.algebra
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((id(self.algebra), self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def coefficient(self, name: str) -> Fraction:
        return self.coeffs[self.algebra.basis.index(name)]

    def unit_component(self) -> Fraction:
        return self.coeffs[self.algebra.unit_index]

    def integrate(self) -> Fraction:
        return sum(
            (c * w for c, w in zip(self.coeffs, self.algebra.integration)),
            start=Fraction(0),
        )

    def degree_part(self, d: int) -> "Element":
        return Element(
            self.algebra,
            tuple(
                c if self.algebra.degrees[i] == d else Fraction(0)
                for i, c in enumerate(self.coeffs)
            ),
        )

    def is_homogeneous(self) -> bool:
        degs = {self.algebra.degrees[i] for i, c in enumerate(self.coeffs) if c}
        return len(degs) <= 1

    def power(self, k: int) -> "Element":
        if k < 0:
            raise AlgebraError("negative power of an algebra element")
        out = self.algebra.unit()
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self) -> str:
        parts = [
            (f"{c}*" if c != 1 else "") + self.algebra.basis[i]
            for i, c in enumerate(self.coeffs)
            if c
        ]
        return " + ".join(parts) if parts else "0"


def nilpotency_index(x: Element) -> int:
    """Least k with x^k = 0; raises if x is not nilpotent.

    Elements with no degree-0 component are nilpotent in any finite graded ring,
    with index at most top_degree + 1; that bound doubles as the loop guard.
    """
    bound = x.algebra.top_degree + 2
    p = x.algebra.unit()
    for k in range(bound + 1):
        if p.is_zero():
            return k
        p = p * x
    raise AlgebraError(f"{x!r} is not nilpotent in {x.algebra.name}")


# -- structure checks -------------------------------------------------------


def check_algebra(alg: GradedAlgebra) -> list[str]:
    """Exhaustive associativity / commutativity / degree-additivity check.

    Returns a list of human-readable violations (empty = sound).  Sizes here are
    tiny (dim <= 8 in the catalog), so the cubic loop is nothing.
    """
    problems: list[str] = []
    n = alg.dim
    els = [alg.basis_element(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if (els[i] * els[j]) != (els[j] * els[i]):
                problems.append(f"{alg.name}: e{i}*e{j} != e{j}*e{i}")
            prod = els[i] * els[j]
            target = alg.degrees[i] + alg.degrees[j]
            for k, c in enumerate(prod.coeffs):
                if c and alg.degrees[k] != target:
                    problems.append(
                        f"{alg.name}: degree of e{i}*e{j} component {alg.basis[k]} "
                        f"is {alg.degrees[k]}, expected {target}"
                    )
            if target > alg.top_degree and not prod.is_zero():
                problems.append(f"{alg.name}: e{i}*e{j} should vanish above top degree")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if (els[i] * els[j]) * els[k] != els[i] * (els[j] * els[k]):
                    problems.append(f"{alg.name}: associativity fails at ({i},{j},{k})")
    u = alg.unit()
    for i in range(n):
        if u * els[i] != els[i]:
            problems.append(f"{alg.name}: unit fails on e{i}")
    return problems


@dataclass(frozen=True)
class RestrictionMap:
    """Ring homomorphism between two graded algebras, stored as basis images."""

    source: GradedAlgebra
    target: GradedAlgebra
    images: tuple[Element, ...]

    @staticmethod
    def from_images(
        source: GradedAlgebra,
        target: GradedAlgebra,
        images: Mapping[str, Element],
    ) -> "RestrictionMap":
        rows = []
        for b in source.basis:
            rows.append(images.get(b, target.zero()))
        rm = RestrictionMap(source, target, tuple(rows))
        return rm

    def __call__(self, x: Element) -> Element:
        if x.algebra is not self.source:
            raise AlgebraError("restricting an element of the wrong algebra")
        out = self.target.zero()
        for c, img in zip(x.coeffs, self.images):
            if c:
                out = out + img.scale(c)
        return out


def check_restriction(rm: RestrictionMap) -> list[str]:
    """Verify multiplicativity on every basis pair, plus unit and degrees."""
    problems: list[str] = []
    src = rm.source
    if rm(src.unit()) != rm.target.unit():
        problems.append(f"{src.name}->{rm.target.name}: unit not preserved")
    for i in range(src.dim):
        ei = src.basis_element(i)
        img = rm(ei)
        for k, c in enumerate(img.coeffs):
            if c and rm.target.degrees[k] != src.degrees[i]:
                problems.append(
                    f"{src.name}->{rm.target.name}: image of {src.basis[i]} "
                    f"not homogeneous of degree {src.degrees[i]}"
                )
        for j in range(src.dim):
            ej = src.basis_element(j)
            if rm(ei * ej) != rm(ei) * rm(ej):
                problems.append(
                    f"{src.name}->{rm.target.name}: not multiplicative on "
                    f"{src.basis[i]}*{src.basis[j]}"
                )
    return problems


# -- exact linear algebra ----------------------------------------------------


def solve_exact(
    matrix: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
) -> list[Fraction]:
    """Solve M x = b over the rationals by Gaussian elimination.

    Underdetermined systems return the particular solution with free
    coordinates set to zero; inconsistent systems raise AlgebraError.
    """
    m = [list(row) + [b] for row, b in zip(matrix, rhs)]
    nrows = len(m)
    ncols = len(matrix[0]) if nrows else 0
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if m[i][ncols] != 0:
            raise AlgebraError("inconsistent linear system (no exact solution)")
    x = [Fraction(0)] * ncols
    for row, col in pivots:
        x[col] = m[row][ncols]
    return x


def pairing_matrix(alg: GradedAlgebra) -> list[list[Fraction]]:
    els = [alg.basis_element(i) for i in range(alg.dim)]
    return [[(els[i] * els[j]).integrate() for j in range(alg.dim)] for i in range(alg.dim)]


def pairing_pushforward(rm: RestrictionMap, v: Element) -> Element:
    """The pairing transpose of a restriction map.

    Returns the source-algebra class P(v) with  ∫_source P(v)∪e = ∫_target v∪r(e)
    for every basis class e.  For an honest divisor inclusion this is the
    cohomology pushforward; e.g. the image of the target's unit is the divisor
    class itself.
    """
    if v.algebra is not rm.target:
        raise AlgebraError("pushforward argument lives in the wrong algebra")
    src = rm.source
    gram = pairing_matrix(src)
    rhs = [(v * rm(src.basis_element(j))).integrate() for j in range(src.dim)]
    sol = solve_exact(gram, rhs)
    return src.element(sol)


def divide_by_class(factor: Element, product: Element) -> Element:
    """Find q with factor * q = product (exact cofactor division).

    Used where a series coefficient must factor through the divisor class.  The
    solution may be ambiguous modulo the annihilator of ``factor``; the returned
    representative sets the free coordinates to zero.  Raises AlgebraError when
    no exact cofactor exists.
    """
    alg = factor.algebra
    cols = [(factor * alg.basis_element(j)).coeffs for j in range(alg.dim)]
    matrix = [[cols[j][i] for j in range(alg.dim)] for i in range(alg.dim)]
    try:
        sol = solve_exact(matrix, list(product.coeffs))
    except AlgebraError as exc:
        raise AlgebraError(
            f"{product!r} does not factor through {factor!r} in {alg.name}"
        ) from exc
    return alg.element(sol)
