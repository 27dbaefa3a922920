"""
Rooted decorated maps as permutations on labelled darts.

A map is built from polygons: the k marked boundaries, empty j-gons and
loop triangles. Every dart carries a type, ``M`` for an ordinary side and
``A`` for a side crossed by a path. ``sigma`` sends a dart to the next dart
of its polygon (counter-clockwise) and ``alpha`` pairs the darts into edges;
only darts of the same type are glued. The cycles of ``sigma o alpha`` are the
vertices of the map.

Maps are generated canonically: the smallest unpaired dart is either glued
to another unpaired dart of its type, or a new polygon is attached to it with
its darts labelled from the partner dart on. Every rooted map is reached by
exactly one such sequence of choices.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass

logger = logging.getLogger(__name__)

DART_M = 'M'
DART_A = 'A'

BOUNDARY = 'boundary'
POLYGON = 'polygon'
LOOP_TRIANGLE = 'loop-triangle'

# cyclic dart types of a loop triangle, read from the attaching dart
_TRIANGLE_FROM_M = (DART_M, DART_A, DART_A)
_TRIANGLE_FROM_FIRST_A = (DART_A, DART_A, DART_M)
_TRIANGLE_FROM_SECOND_A = (DART_A, DART_M, DART_A)


@dataclass(frozen=True)
class FaceDecoration:
    """
    One polygon of the map.

    ``kind`` is 'boundary' (marked face, rooted at its first dart), 'polygon'
    (empty j-gon) or 'loop-triangle'; for loop triangles ``path`` holds the
    two darts the path crosses.
    """

    kind: str
    darts: tuple
    index: int = 0
    path: tuple = ()

    @property
    def degree(self):
        return len(self.darts)

    @property
    def root(self):
        return self.darts[0] if self.kind == BOUNDARY and self.darts else None


@dataclass(frozen=True)
class DecoratedMap:
    sigma: tuple
    alpha: tuple
    dart_types: tuple
    faces: tuple
    genus: int
    v: int
    ell: int
    loops: int

    @property
    def rotation_system(self):
        return self.sigma, self.alpha

    @property
    def k(self):
        return sum(1 for f in self.faces if f.kind == BOUNDARY)

    @property
    def boundary_lengths(self):
        return tuple(f.degree for f in sorted(self.faces, key=lambda f: f.index) if f.kind == BOUNDARY)

    @property
    def polygon_counts(self):
        """n_j as a Counter keyed by j."""
        return Counter(f.degree for f in self.faces if f.kind == POLYGON)

    def euler_defect(self):
        """2g - 2 + k + v - (sum (j - 2) n_j + sum l_i + ell) / 2, zero for a valid map."""
        rhs = sum((j - 2) * count for j, count in self.polygon_counts.items())
        rhs += sum(self.boundary_lengths) + self.ell
        return 2 * self.genus - 2 + self.k + self.v - rhs / 2

    def monomial(self, d_max):
        """(#loops, ell, n_3, ..., n_dmax): exponents of n, -1/c and the that_j."""
        counts = self.polygon_counts
        return (self.loops, self.ell) + tuple(counts.get(j, 0) for j in range(3, d_max + 1))


def count_cycles(perm):
    seen = [False] * len(perm)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        d = start
        while not seen[d]:
            seen[d] = True
            d = perm[d]
    return cycles


class _Builder:
    """Mutable state of the depth-first generation, with undo."""

    def __init__(self, lengths, degrees, loop_triangles, budget, v_max, g_max):
        self.degrees = degrees
        self.loop_triangles = loop_triangles
        self.budget = budget
        self.v_max = v_max
        self.g_max = g_max
        self.types = []
        self.sigma = []
        self.alpha = []
        self.owner = []
        self.faces = []
        self.spent = 0.0
        for i, l in enumerate(lengths):
            self._push(BOUNDARY, (DART_M,) * l, index=i)

    def _push(self, kind, types, index=0):
        first = len(self.types)
        darts = tuple(range(first, first + len(types)))
        for pos, d in enumerate(darts):
            self.types.append(types[pos])
            self.sigma.append(darts[(pos + 1) % len(darts)])
            self.alpha.append(-1)
            self.owner.append(len(self.faces))
        path = tuple(d for d, kind_ in zip(darts, types) if kind_ == DART_A)
        self.faces.append(FaceDecoration(kind, darts, index, path))
        self.spent += len(types) / 2 - 1
        return first

    def _pop(self):
        face = self.faces.pop()
        for _ in face.darts:
            self.types.pop()
            self.sigma.pop()
            self.alpha.pop()
            self.owner.pop()
        self.spent -= face.degree / 2 - 1

    def _glue(self, d, e):
        self.alpha[d] = e
        self.alpha[e] = d

    def _unglue(self, d, e):
        self.alpha[d] = -1
        self.alpha[e] = -1

    def _first_free(self):
        for d, partner in enumerate(self.alpha):
            if partner < 0:
                return d
        return None

    def _attachments(self, dart_type):
        if dart_type == DART_M:
            for j in self.degrees:
                yield POLYGON, (DART_M,) * j
            if self.loop_triangles:
                yield LOOP_TRIANGLE, _TRIANGLE_FROM_M
        elif self.loop_triangles:
            yield LOOP_TRIANGLE, _TRIANGLE_FROM_FIRST_A
            yield LOOP_TRIANGLE, _TRIANGLE_FROM_SECOND_A

    def run(self):
        d = self._first_free()
        if d is None:
            result = self._finish()
            if result is not None:
                yield result
            return

        kind = self.types[d]
        for e in range(d + 1, len(self.types)):
            if self.alpha[e] < 0 and self.types[e] == kind:
                self._glue(d, e)
                yield from self.run()
                self._unglue(d, e)

        for face_kind, types in self._attachments(kind):
            if self.spent + len(types) / 2 - 1 > self.budget:
                continue
            partner = self._push(face_kind, types)
            self._glue(d, partner)
            yield from self.run()
            self._unglue(d, partner)
            self._pop()

    def _connected(self):
        parent = list(range(len(self.faces)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for d, e in enumerate(self.alpha):
            parent[find(self.owner[d])] = find(self.owner[e])
        return len({find(i) for i in range(len(self.faces))}) == 1

    def _count_loops(self):
        triangles = [i for i, f in enumerate(self.faces) if f.kind == LOOP_TRIANGLE]
        if not triangles:
            return 0
        parent = {i: i for i in triangles}

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for d, e in enumerate(self.alpha):
            if self.types[d] == DART_A and d < e:
                parent[find(self.owner[d])] = find(self.owner[e])
        return len({find(i) for i in triangles})

    def _finish(self):
        if not self._connected():
            return None
        face_perm = [self.sigma[self.alpha[d]] for d in range(len(self.alpha))]
        v = count_cycles(face_perm)
        chi = len(self.faces) - len(self.alpha) // 2 + v
        genus = (2 - chi) // 2
        if v > self.v_max or genus > self.g_max:
            return None
        ell = sum(1 for f in self.faces if f.kind == LOOP_TRIANGLE)
        return DecoratedMap(
            sigma=tuple(self.sigma),
            alpha=tuple(self.alpha),
            dart_types=tuple(self.types),
            faces=tuple(self.faces),
            genus=genus,
            v=v,
            ell=ell,
            loops=self._count_loops(),
        )


def vertex_budget(v_max, g_max):
    """Upper bound on sum over polygons of (degree/2 - 1), from the Euler relation."""
    return v_max - 2 + 2 * g_max


def boundary_length_tuples(k, budget):
    """All (l_1, ..., l_k), l_i >= 1, with sum (l_i/2 - 1) within the budget."""

    def extend(prefix, spent):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        # every later boundary costs at least -1/2
        slack = budget - spent + 0.5 * (k - len(prefix) - 1)
        for l in itertools.count(1):
            if l / 2 - 1 > slack:
                break
            yield from extend(prefix + [l], spent + l / 2 - 1)

    yield from extend([], 0.0)


def single_vertex_map():
    """The map reduced to one vertex: k = 1, g = 0, v = 1, empty boundary."""
    return DecoratedMap(
        sigma=(), alpha=(), dart_types=(), faces=(FaceDecoration(BOUNDARY, (), 0),),
        genus=0, v=1, ell=0, loops=0,
    )


def iter_maps(v_max, g_max=0, k=1, d_max=3, loop_triangles=True):
    """
    Yield every connected rooted decorated map with k boundaries, at most
    v_max vertices and genus at most g_max.

    Args:
        v_max: vertex cap
        g_max: genus cap
        k: number of boundaries (>= 1)
        d_max: largest empty polygon degree
        loop_triangles: include triangles carrying a path

    Yields:
        DecoratedMap
    """
    budget = vertex_budget(v_max, g_max)
    degrees = tuple(range(3, d_max + 1))
    if k == 1 and v_max >= 1:
        yield single_vertex_map()
    for lengths in boundary_length_tuples(k, budget):
        builder = _Builder(lengths, degrees, loop_triangles, budget, v_max, g_max)
        count = 0
        for m in builder.run():
            count += 1
            yield m
        logger.debug('boundary lengths %s: %d maps', lengths, count)
