"""Immutable data model for trace diagrams.

A trace diagram over dimension ``n`` is a directed multigraph whose vertices
have degree 1 (leaves) or degree ``n`` (internal vertices carrying an explicit
ordering of their incident edge ends, the *ciliation*). Edges are marked by an
ordered word of matrix labels, listed head to tail, standing for the product
of the bound matrices with the first label nearest the head; an edge may also
close on itself with no vertices at all (a free loop). A leaf is *open*, in
which case a framing assigns it to the ordered inputs or outputs of the
diagram, or it is terminated by a vector label, which contracts that end
against a bound vector during evaluation.

Everything here is a frozen dataclass: diagrams can be shared freely between
threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from . import matrices
from .errors import (
    DimensionMismatchError,
    InadmissibleColoringError,
    UnboundLabelError,
)

HEAD = "head"
TAIL = "tail"

LEAF = "leaf"
INTERNAL = "internal"


def other_end(end: str) -> str:
    return TAIL if end == HEAD else HEAD


@dataclass(frozen=True)
class EndRef:
    """One end of one edge: the unit the ciliation and colorings refer to."""

    edge: str
    end: str  # HEAD or TAIL

    def __str__(self) -> str:
        return f"{self.edge}.{'h' if self.end == HEAD else 't'}"


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str  # LEAF or INTERNAL
    ciliation: tuple[EndRef, ...] = ()
    vector_label: Optional[str] = None


def leaf(vid: str, vector_label: Optional[str] = None) -> Vertex:
    return Vertex(vid, LEAF, (), vector_label)


def internal(vid: str, ciliation: Iterable[EndRef]) -> Vertex:
    return Vertex(vid, INTERNAL, tuple(ciliation))


@dataclass(frozen=True)
class Edge:
    """Directed edge; ``tail``/``head`` are vertex ids, or both None for a free loop."""

    id: str
    tail: Optional[str]
    head: Optional[str]
    marking: tuple[str, ...] = ()

    @property
    def is_free_loop(self) -> bool:
        return self.tail is None and self.head is None

    def vertex_at(self, end: str) -> Optional[str]:
        return self.head if end == HEAD else self.tail


@dataclass(frozen=True)
class TraceDiagram:
    n: int
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    inputs: Optional[tuple[str, ...]] = None  # ordered open-leaf vertex ids
    outputs: Optional[tuple[str, ...]] = None

    @property
    def framed(self) -> bool:
        return self.inputs is not None and self.outputs is not None

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def incidence(self) -> dict[str, list[EndRef]]:
        """Vertex id -> incident edge ends, in edge-declaration order."""
        inc: dict[str, list[EndRef]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            for end in (TAIL, HEAD):
                vid = e.vertex_at(end)
                if vid is not None:
                    inc.setdefault(vid, []).append(EndRef(e.id, end))
        return inc

    def leaf_end(self, vid: str) -> EndRef:
        """The single edge end attached to a leaf vertex."""
        ends = self.incidence().get(vid, [])
        if len(ends) != 1:
            raise KeyError(f"{vid} is not a leaf with one incident end")
        return ends[0]

    def open_leaves(self) -> tuple[str, ...]:
        return tuple(
            v.id for v in self.vertices if v.kind == LEAF and v.vector_label is None
        )

    def is_closed(self) -> bool:
        """No open leaf ends; vector-terminated leaves carry no free index."""
        return not self.open_leaves()

    def matrix_labels(self) -> set[str]:
        return {lab for e in self.edges for lab in e.marking}

    def vector_labels(self) -> set[str]:
        return {
            v.vector_label
            for v in self.vertices
            if v.kind == LEAF and v.vector_label is not None
        }

    def with_framing(
        self, inputs: Iterable[str], outputs: Iterable[str]
    ) -> "TraceDiagram":
        return replace(self, inputs=tuple(inputs), outputs=tuple(outputs))


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(diagram: TraceDiagram) -> ValidationResult:
    """Structural diagnostics; never raises. An empty list means the diagram is well formed."""
    bad: list[str] = []
    if diagram.n < 1:
        bad.append(f"dimension must be >= 1, got {diagram.n}")

    vids = [v.id for v in diagram.vertices]
    if len(set(vids)) != len(vids):
        bad.append("duplicate vertex id")
    eids = [e.id for e in diagram.edges]
    if len(set(eids)) != len(eids):
        bad.append("duplicate edge id")
    byid = {v.id: v for v in diagram.vertices}

    for e in diagram.edges:
        if (e.tail is None) != (e.head is None):
            bad.append(f"edge {e.id}: one end closed, one attached")
            continue
        for end in (TAIL, HEAD):
            vid = e.vertex_at(end)
            if vid is not None and vid not in byid:
                bad.append(f"edge {e.id}: unknown vertex {vid!r}")

    inc = diagram.incidence()
    for v in diagram.vertices:
        ends = inc.get(v.id, [])
        if v.kind == LEAF:
            if len(ends) != 1:
                bad.append(f"leaf {v.id} has degree {len(ends)}, expected 1")
            if v.ciliation:
                bad.append(f"leaf {v.id} carries a ciliation")
        elif v.kind == INTERNAL:
            if v.vector_label is not None:
                bad.append(f"internal vertex {v.id} carries a vector label")
            if len(ends) != diagram.n:
                bad.append(
                    f"internal vertex {v.id} has degree {len(ends)} != n = {diagram.n}"
                )
            if sorted(map(str, v.ciliation)) != sorted(map(str, ends)):
                bad.append(
                    f"ciliation of {v.id} does not list its incident ends exactly once"
                )
        else:
            bad.append(f"vertex {v.id} has unknown kind {v.kind!r}")

    if diagram.inputs is not None or diagram.outputs is not None:
        ins = diagram.inputs or ()
        outs = diagram.outputs or ()
        listed = list(ins) + list(outs)
        if len(set(listed)) != len(listed):
            bad.append("framing repeats a leaf")
        open_set = set(diagram.open_leaves())
        for vid in listed:
            if vid not in open_set:
                bad.append(f"framing lists {vid!r}, which is not an open leaf")
        if set(listed) != open_set or len(listed) != len(open_set):
            bad.append("framing not a partition of the open leaves")

    return ValidationResult(tuple(bad))


@dataclass(frozen=True)
class Coloring:
    """Head/tail labels for every edge, keyed by edge id, sorted for determinism."""

    pairs: tuple[tuple[str, tuple[int, int]], ...]

    def __post_init__(self):
        object.__setattr__(self, "_by_edge", dict(self.pairs))

    @classmethod
    def from_dict(cls, labels: Mapping[str, tuple[int, int]]) -> "Coloring":
        return cls(tuple(sorted((e, (h, t)) for e, (h, t) in labels.items())))

    def head(self, edge_id: str) -> int:
        return self._by_edge[edge_id][0]

    def tail(self, edge_id: str) -> int:
        return self._by_edge[edge_id][1]

    def at(self, ref: EndRef) -> int:
        h, t = self._by_edge[ref.edge]
        return h if ref.end == HEAD else t

    def as_dict(self) -> dict[str, tuple[int, int]]:
        return dict(self.pairs)


def vertex_permutation(
    diagram: TraceDiagram, coloring: Coloring, vertex_id: str
) -> tuple[int, ...]:
    """Images (1..n) read off the ciliation: position i holds the label on the i-th end."""
    v = diagram.vertex(vertex_id)
    if v.kind != INTERNAL:
        raise InadmissibleColoringError(f"{vertex_id} is not an internal vertex")
    images = tuple(coloring.at(ref) for ref in v.ciliation)
    if len(set(images)) != len(images):
        raise InadmissibleColoringError(f"inadmissible coloring at vertex {vertex_id}")
    return images


@dataclass(frozen=True)
class FormalSum:
    """Rational linear combination of diagrams; terms stay unmerged."""

    terms: tuple[tuple[Fraction, TraceDiagram], ...]

    def __post_init__(self):
        dims = {d.n for _, d in self.terms}
        if len(dims) > 1:
            raise DimensionMismatchError("formal sum mixes dimensions")
        arities = {
            (len(d.inputs or ()), len(d.outputs or ()))
            for _, d in self.terms
            if d.framed
        }
        if len(arities) > 1:
            raise DimensionMismatchError("formal sum mixes framing arities")

    @classmethod
    def of(cls, *pairs) -> "FormalSum":
        return cls(tuple((Fraction(c), d) for c, d in pairs))

    @classmethod
    def single(cls, diagram: TraceDiagram, coeff=1) -> "FormalSum":
        return cls(((Fraction(coeff), diagram),))

    def __add__(self, other: "FormalSum") -> "FormalSum":
        return FormalSum(self.terms + other.terms)

    def __sub__(self, other: "FormalSum") -> "FormalSum":
        return self + (-other)

    def __neg__(self) -> "FormalSum":
        return self.scale(-1)

    def __rmul__(self, c) -> "FormalSum":
        return self.scale(c)

    def scale(self, c) -> "FormalSum":
        c = Fraction(c)
        return FormalSum(tuple((c * k, d) for k, d in self.terms))


@dataclass(frozen=True)
class MatrixBinding:
    """Concrete exact matrices and vectors for the labels a diagram uses."""

    n: int
    matrices: Mapping[str, matrices.Matrix] = field(default_factory=dict)
    vectors: Mapping[str, matrices.Vector] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatchError(f"dimension must be >= 1, got {self.n}")
        mats = {k: matrices.freeze_matrix(v) for k, v in self.matrices.items()}
        vecs = {k: matrices.freeze_vector(v) for k, v in self.vectors.items()}
        for k, m in mats.items():
            if matrices.shape(m) != (self.n, self.n):
                raise DimensionMismatchError(
                    f"matrix {k!r} is {matrices.shape(m)}, expected {self.n}x{self.n}"
                )
        for k, v in vecs.items():
            if len(v) != self.n:
                raise DimensionMismatchError(
                    f"vector {k!r} has length {len(v)}, expected {self.n}"
                )
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "vectors", vecs)

    def matrix(self, label: str) -> matrices.Matrix:
        try:
            return self.matrices[label]
        except KeyError:
            raise UnboundLabelError(label) from None

    def vector(self, label: str) -> matrices.Vector:
        try:
            return self.vectors[label]
        except KeyError:
            raise UnboundLabelError(label) from None

    def edge_matrix(self, marking: tuple[str, ...]) -> matrices.Matrix:
        """Product of a marking word, first label nearest the head."""
        return matrices.word_product([self.matrix(lab) for lab in marking])


def are_isomorphic(a: TraceDiagram, b: TraceDiagram) -> bool:
    """Equality up to renaming of vertex and edge ids.

    Ciliation order, edge directions, marking words, vector labels and the
    framing orders must all be preserved by the relabeling. Backtracking
    search; meant for tests, not for evaluation paths.
    """
    if a.n != b.n or len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return False
    if a.framed != b.framed:
        return False

    averts = sorted(a.vertices, key=lambda v: v.id)
    bverts = list(b.vertices)
    aedges = sorted(a.edges, key=lambda e: e.id)
    bedges = list(b.edges)

    def vertex_compatible(va: Vertex, vb: Vertex) -> bool:
        return va.kind == vb.kind and va.vector_label == vb.vector_label

    def edge_compatible(ea: Edge, eb: Edge, vmap: dict[str, str]) -> bool:
        if ea.marking != eb.marking or ea.is_free_loop != eb.is_free_loop:
            return False
        for end in (TAIL, HEAD):
            va, vb = ea.vertex_at(end), eb.vertex_at(end)
            if (va is None) != (vb is None):
                return False
            if va is not None and va in vmap and vmap[va] != vb:
                return False
        return True

    def finish(vmap: dict[str, str], emap: dict[str, str]) -> bool:
        for va in averts:
            vb = b.vertex(vmap[va.id])
            mapped = tuple(EndRef(emap[r.edge], r.end) for r in va.ciliation)
            if mapped != vb.ciliation:
                return False
        if a.framed:
            if tuple(vmap[x] for x in a.inputs) != b.inputs:
                return False
            if tuple(vmap[x] for x in a.outputs) != b.outputs:
                return False
        return True

    def assign_edges(i: int, vmap: dict[str, str], emap: dict[str, str]) -> bool:
        if i == len(aedges):
            return finish(vmap, emap)
        ea = aedges[i]
        for eb in bedges:
            if eb.id in emap.values() or not edge_compatible(ea, eb, vmap):
                continue
            grown = dict(vmap)
            ok = True
            for end in (TAIL, HEAD):
                va, vb = ea.vertex_at(end), eb.vertex_at(end)
                if va is None:
                    continue
                if va in grown:
                    if grown[va] != vb:
                        ok = False
                        break
                elif vb in grown.values() or not vertex_compatible(
                    a.vertex(va), b.vertex(vb)
                ):
                    ok = False
                    break
                else:
                    grown[va] = vb
            if not ok:
                continue
            emap[ea.id] = eb.id
            if assign_edges(i + 1, grown, emap):
                return True
            del emap[ea.id]
        return False

    if not aedges:
        # vertex-free (or edge-free) diagrams: match vertices directly
        used: set[str] = set()
        vmap: dict[str, str] = {}
        for va in averts:
            cand = [
                vb for vb in bverts if vb.id not in used and vertex_compatible(va, vb)
            ]
            if not cand:
                return False
            vmap[va.id] = cand[0].id
            used.add(cand[0].id)
        return finish(vmap, {})

    return assign_edges(0, {}, {})
