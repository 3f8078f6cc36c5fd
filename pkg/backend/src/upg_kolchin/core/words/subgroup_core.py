# core/words/subgroup_core.py - Stallings subgroup graphs and folding

"""
Finitely generated subgroups of F_n as folded core graphs.

A :class:`SubgroupGraph` is always folded, reduced to its core (except for a
possible spur at the basepoint) and numbered canonically by a breadth-first
walk from the basepoint, so two graphs are equal exactly when they describe
the same subgroup.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ...services.system_logger import LogCategory, log_search
from .word_core import Basis, Word, cyclic_reduce, letter_key

Move = Tuple[int, int, int]  # (target vertex, edge index, orientation sign)


class FoldingEngine:
    """Stallings folding on a labeled graph, optionally tracking edge values.

    Edge records are ``[src, label, dst, value]`` with ``label > 0``. Values
    live in an auxiliary free group; the value of a loop at the base vertex is
    preserved by every fold. Two parallel edges whose values disagree are
    recorded in :attr:`conflicts` and identified anyway.
    """

    def __init__(self, track_values: bool = False):
        self.base = 0
        self.vertices = {0}
        self.records: Dict[int, List] = {}
        self.alias: Dict[int, int] = {}
        self.conflicts: List[Word] = []
        self.track_values = track_values
        self._next_vertex = 1
        self._next_edge = 0

    def new_vertex(self) -> int:
        v = self._next_vertex
        self._next_vertex += 1
        self.vertices.add(v)
        return v

    def find(self, v: int) -> int:
        while v in self.alias:
            v = self.alias[v]
        return v

    def add_edge(self, src: int, letter: int, dst: int, value: Word = Word()) -> int:
        src, dst = self.find(src), self.find(dst)
        if letter < 0:
            src, dst, letter, value = dst, src, -letter, ~value
        eid = self._next_edge
        self._next_edge += 1
        self.records[eid] = [src, letter, dst, value]
        return eid

    def add_path(self, start: int, word: Word, end: Optional[int] = None,
                 value: Word = Word()) -> int:
        """Attach a path reading ``word``; ``value`` goes on its first edge"""
        cur = self.find(start)
        n = len(word)
        for i, x in enumerate(word.letters):
            nxt = end if (i == n - 1 and end is not None) else self.new_vertex()
            self.add_edge(cur, x, nxt, value if i == 0 else Word())
            cur = self.find(nxt)
        if n == 0 and end is not None and self.find(end) != cur:
            self.merge(self.find(end), cur)
        return cur

    def add_loop(self, word: Word, value: Word = Word()):
        if word:
            self.add_path(self.base, word, self.base, value)

    def merge(self, drop: int, keep: int):
        if drop == self.base:
            drop, keep = keep, drop
        for rec in self.records.values():
            if rec[0] == drop:
                rec[0] = keep
            if rec[2] == drop:
                rec[2] = keep
        self.vertices.discard(drop)
        self.alias[drop] = keep

    def _repotential(self, w: int, g: Word):
        for rec in self.records.values():
            if rec[0] == w:
                rec[3] = ~g * rec[3]
            if rec[2] == w:
                rec[3] = rec[3] * g

    def _oriented(self, oriented: Tuple[int, int]) -> Tuple[int, Word]:
        eid, sign = oriented
        src, _, dst, value = self.records[eid]
        return (dst, value) if sign > 0 else (src, ~value)

    def _find_conflict(self):
        star: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for eid in sorted(self.records):
            src, label, dst, _ = self.records[eid]
            for key, oriented in (((src, label), (eid, 1)), ((dst, -label), (eid, -1))):
                if key in star and star[key] != oriented:
                    return key[0], star[key], oriented
                star[key] = oriented
        return None

    def fold(self) -> 'FoldingEngine':
        steps = 0
        while True:
            conflict = self._find_conflict()
            if conflict is None:
                break
            steps += 1
            u, o1, o2 = conflict
            v1, val1 = self._oriented(o1)
            v2, val2 = self._oriented(o2)
            if v1 == v2:
                if self.track_values and val1 != val2:
                    self.conflicts.append(val1 * ~val2)
                del self.records[o2[0]]
                continue
            if self.track_values and val1 != val2:
                if v2 != self.base and v2 != u:
                    self._repotential(v2, ~val2 * val1)
                elif v1 != self.base and v1 != u:
                    self._repotential(v1, ~val1 * val2)
                else:
                    loop_val, other_val = (val1, val2) if v1 == u else (val2, val1)
                    self._repotential(u, ~loop_val * other_val)
            if v2 == self.base:
                self.merge(v1, v2)
            else:
                self.merge(v2, v1)
            del self.records[o2[0]]
        log_search(LogCategory.SUBGROUPS, 'folding', f"folded in {steps} steps",
                   edges=len(self.records), vertices=len(self.vertices))
        return self

    def moves(self) -> Dict[Tuple[int, int], Tuple[int, Word]]:
        out = {}
        for src, label, dst, value in self.records.values():
            out[(src, label)] = (dst, value)
            out[(dst, -label)] = (src, ~value)
        return out


@dataclass(frozen=True)
class SubgroupGraph:
    """Folded core graph with basepoint 0 and canonical vertex numbering."""

    num_vertices: int = 1
    edges: Tuple[Tuple[int, int, int], ...] = ()
    base: int = 0

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[Hashable, int, Hashable]], base: Hashable) -> 'SubgroupGraph':
        """Fold, core and canonically renumber an arbitrary labeled graph"""
        index: Dict[Hashable, int] = {base: 0}
        engine = FoldingEngine()
        for src, label, dst in edges:
            for v in (src, dst):
                if v not in index:
                    index[v] = engine.new_vertex()
            engine.add_edge(index[src], label, index[dst])
        engine.fold()
        return cls._from_records(
            [(r[0], r[1], r[2]) for r in engine.records.values()], engine.base)

    @classmethod
    def _from_records(cls, edges: List[Tuple[int, int, int]], base: int) -> 'SubgroupGraph':
        edges = list(edges)
        # Shave hairs away from the basepoint
        while True:
            degree: Dict[int, int] = {}
            for src, _, dst in edges:
                degree[src] = degree.get(src, 0) + 1
                degree[dst] = degree.get(dst, 0) + 1
            leaves = {v for v, d in degree.items() if d <= 1 and v != base}
            if not leaves:
                break
            edges = [e for e in edges if e[0] not in leaves and e[2] not in leaves]
        return cls._canonical(edges, base)

    @classmethod
    def _canonical(cls, edges: List[Tuple[int, int, int]], base: int) -> 'SubgroupGraph':
        moves: Dict[int, Dict[int, int]] = {}
        for src, label, dst in edges:
            moves.setdefault(src, {})[label] = dst
            moves.setdefault(dst, {})[-label] = src
        number = {base: 0}
        queue = deque([base])
        while queue:
            v = queue.popleft()
            for letter in sorted(moves.get(v, {}), key=letter_key):
                w = moves[v][letter]
                if w not in number:
                    number[w] = len(number)
                    queue.append(w)
        renumbered = sorted((number[s], label, number[d]) for s, label, d in edges)
        return cls(num_vertices=len(number), edges=tuple(renumbered), base=0)

    @classmethod
    def trivial(cls) -> 'SubgroupGraph':
        return cls()

    @classmethod
    def full(cls, rank: int) -> 'SubgroupGraph':
        return cls(1, tuple((0, i, 0) for i in range(1, rank + 1)), 0)

    @cached_property
    def moves(self) -> Dict[Tuple[int, int], Move]:
        out: Dict[Tuple[int, int], Move] = {}
        for idx, (src, label, dst) in enumerate(self.edges):
            out[(src, label)] = (dst, idx, 1)
            out[(dst, -label)] = (src, idx, -1)
        return out

    @property
    def rank(self) -> int:
        return len(self.edges) - self.num_vertices + 1

    def is_trivial(self) -> bool:
        return not self.edges

    @cached_property
    def _star(self) -> Dict[int, List[int]]:
        star: Dict[int, List[int]] = {v: [] for v in range(self.num_vertices)}
        for (u, x) in self.moves:
            star[u].append(x)
        return {v: sorted(xs, key=letter_key) for v, xs in star.items()}

    def letters_at(self, v: int) -> List[int]:
        return self._star.get(v, [])

    def degree(self, v: int) -> int:
        return len(self.letters_at(v))

    def read(self, start: int, w: Word) -> Tuple[Optional[int], List[int]]:
        """Follow w from ``start``; returns (end or None, vertex path)"""
        path = [start]
        v = start
        for x in w.letters:
            move = self.moves.get((v, x))
            if move is None:
                return None, path
            v = move[0]
            path.append(v)
        return v, path

    @cached_property
    def spanning_tree(self) -> Tuple[Dict[int, Word], frozenset]:
        """Tree path words from the basepoint and the set of tree edge indices"""
        paths = {self.base: Word()}
        tree_edges = set()
        queue = deque([self.base])
        while queue:
            v = queue.popleft()
            for letter in self.letters_at(v):
                w, idx, _ = self.moves[(v, letter)]
                if w not in paths:
                    paths[w] = paths[v] * Word((letter,))
                    tree_edges.add(idx)
                    queue.append(w)
        return paths, frozenset(tree_edges)

    def path_to(self, v: int) -> Word:
        return self.spanning_tree[0][v]

    @cached_property
    def _basis_edges(self) -> List[int]:
        tree = self.spanning_tree[1]
        return [i for i in range(len(self.edges)) if i not in tree]

    def basis(self) -> List[Word]:
        """Free basis read off the non-tree edges, in edge order"""
        paths = self.spanning_tree[0]
        out = []
        for idx in self._basis_edges:
            src, label, dst = self.edges[idx]
            out.append(paths[src] * Word((label,)) * ~paths[dst])
        return out

    def express_in_basis(self, w: Word) -> Optional[Word]:
        """Rewrite a member of the subgroup in the letters of :meth:`basis`"""
        position = {idx: i + 1 for i, idx in enumerate(self._basis_edges)}
        v = self.base
        out = []
        for x in w.letters:
            move = self.moves.get((v, x))
            if move is None:
                return None
            v, idx, sign = move
            if idx in position:
                out.append(sign * position[idx])
        if v != self.base:
            return None
        return Word(tuple(out))

    def trim(self) -> Tuple['SubgroupGraph', Word]:
        """Remove the basepoint spur: returns (C, p) with H = p·C·p⁻¹"""
        if self.is_trivial():
            return self, Word()
        v = self.base
        p = Word()
        seen = {v}
        while self.degree(v) == 1:
            letter = self.letters_at(v)[0]
            v = self.moves[(v, letter)][0]
            p = p * Word((letter,))
            if v in seen:
                break
            seen.add(v)
        if v == self.base:
            return self, Word()
        edges = [(s, label, d) for s, label, d in self.edges]
        return SubgroupGraph._from_records(edges, v), p

    def to_dict(self, basis: Basis = None) -> Dict:
        basis = basis or Basis.standard(max((e[1] for e in self.edges), default=1))
        return {
            'vertices': list(range(self.num_vertices)),
            'edges': [[s, basis.names[label - 1], d] for s, label, d in self.edges],
            'basepoint': self.base,
            'rank': self.rank,
            'basis': [w.format(basis) for w in self.basis()],
        }

    def format(self, basis: Basis = None) -> str:
        words = [w.format(basis) for w in self.basis()]
        return "<" + ",".join(words) + ">"

    def __str__(self) -> str:
        return self.format()


def fold(generators: Sequence[Word]) -> SubgroupGraph:
    """Folded core of ⟨generators⟩"""
    engine = FoldingEngine()
    for g in generators:
        engine.add_loop(g)
    engine.fold()
    return SubgroupGraph._from_records(
        [(r[0], r[1], r[2]) for r in engine.records.values()], engine.base)


@dataclass(frozen=True)
class Membership:
    member: bool
    path: Tuple[int, ...]

    def __bool__(self) -> bool:
        return self.member


def contains(H: SubgroupGraph, w: Word) -> Membership:
    end, path = H.read(H.base, w)
    return Membership(end == H.base, tuple(path))


def _isomorphic_from(A: SubgroupGraph, a0: int, B: SubgroupGraph, b0: int) -> bool:
    if A.num_vertices != B.num_vertices or len(A.edges) != len(B.edges):
        return False
    match = {a0: b0}
    used = {b0}
    queue = deque([a0])
    while queue:
        a = queue.popleft()
        b = match[a]
        letters = A.letters_at(a)
        if letters != B.letters_at(b):
            return False
        for x in letters:
            a2 = A.moves[(a, x)][0]
            b2 = B.moves[(b, x)][0]
            if a2 in match:
                if match[a2] != b2:
                    return False
            else:
                if b2 in used:
                    return False
                match[a2] = b2
                used.add(b2)
                queue.append(a2)
    return len(match) == A.num_vertices


def conjugator(H: SubgroupGraph, K: SubgroupGraph) -> Optional[Word]:
    """Some γ with γ⁻¹·H·γ = K, or None"""
    if H.is_trivial() or K.is_trivial():
        return Word() if H.is_trivial() and K.is_trivial() else None
    if H == K:
        return Word()
    core_h, p = H.trim()
    core_k, q = K.trim()
    candidates = [core_k.base] + [v for v in range(core_k.num_vertices) if v != core_k.base]
    for x in candidates:
        if _isomorphic_from(core_h, core_h.base, core_k, x):
            r = core_k.path_to(x)
            return p * ~r * ~q
    return None


def is_conjugate(H: SubgroupGraph, K: SubgroupGraph) -> bool:
    return conjugator(H, K) is not None


def conjugate_into(H: SubgroupGraph, w: Word) -> Optional[Word]:
    """Some γ with γ·w·γ⁻¹ ∈ H, or None"""
    if not w:
        return Word()
    if H.is_trivial():
        return None
    core, p = H.trim()
    c, conj = cyclic_reduce(w)
    loop = c.word()
    for x in range(core.num_vertices):
        end, _ = core.read(x, loop)
        if end == x:
            return p * core.path_to(x) * ~conj
    return None


@dataclass(frozen=True)
class IntersectionComponent:
    """π₁ of one product component at vertex (h, k).

    ``subgroup`` is u⁻¹Hu ∩ v⁻¹Kv where u, v are the tree paths to h and k;
    conjugating by u⁻¹ gives H ∩ c⁻¹Kc with c = v·u⁻¹.
    """
    subgroup: SubgroupGraph
    first_path: Word
    second_path: Word

    @property
    def in_first(self) -> SubgroupGraph:
        u = self.first_path
        return fold([u * w * ~u for w in self.subgroup.basis()])


def intersect(H: SubgroupGraph, K: SubgroupGraph) -> List[IntersectionComponent]:
    """Nontrivial components of the fiber product, base component first"""
    product = nx.MultiGraph()
    labeled = []
    for h in range(H.num_vertices):
        for k in range(K.num_vertices):
            product.add_node((h, k))
    for (h, x), (h2, _, _) in H.moves.items():
        if x < 0:
            continue
        for k in range(K.num_vertices):
            move = K.moves.get((k, x))
            if move is not None:
                labeled.append(((h, k), x, (h2, move[0])))
                product.add_edge((h, k), (h2, move[0]))
    components = []
    for comp in nx.connected_components(product):
        comp_edges = [e for e in labeled if e[0] in comp]
        if len(comp_edges) - len(comp) + 1 < 1:
            continue
        root = (H.base, K.base) if (H.base, K.base) in comp else min(comp)
        sub = SubgroupGraph.from_edges(comp_edges, root)
        components.append(IntersectionComponent(sub, H.path_to(root[0]), K.path_to(root[1])))
    components.sort(key=lambda c: (c.first_path != Word() or c.second_path != Word(),
                                   len(c.first_path) + len(c.second_path),
                                   [letter_key(x) for x in c.first_path.letters + c.second_path.letters]))
    return components


@dataclass(frozen=True)
class DoubleCosetResult:
    member: bool
    a: Optional[Word] = None
    b: Optional[Word] = None

    def __bool__(self) -> bool:
        return self.member


def in_double_coset(A: SubgroupGraph, g: Word, B: SubgroupGraph, w: Word) -> DoubleCosetResult:
    """Decide w ∈ A·g·B; on success w = a·g·b"""
    # Graph of the set w·B·g⁻¹ between y0 and y1
    engine = FoldingEngine()
    y0 = engine.base
    beta = engine.add_path(y0, w)
    index = {B.base: beta}
    for v in range(B.num_vertices):
        if v not in index:
            index[v] = engine.new_vertex()
    for src, label, dst in B.edges:
        engine.add_edge(index[src], label, index[dst])
    y1 = engine.add_path(beta, ~g)
    engine.fold()
    y0, y1 = engine.find(y0), engine.find(y1)
    ymoves = engine.moves()

    start, target = (A.base, y0), (A.base, y1)
    parent: Dict[Tuple[int, int], Optional[Tuple[Tuple[int, int], int]]] = {start: None}
    queue = deque([start])
    while queue and target not in parent:
        a_v, y_v = queue.popleft()
        for x in A.letters_at(a_v):
            ymove = ymoves.get((y_v, x))
            if ymove is None:
                continue
            nxt = (A.moves[(a_v, x)][0], ymove[0])
            if nxt not in parent:
                parent[nxt] = ((a_v, y_v), x)
                queue.append(nxt)
    if target not in parent:
        return DoubleCosetResult(False)
    letters = []
    node = target
    while parent[node] is not None:
        node, x = parent[node]
        letters.append(x)
    a = Word(tuple(reversed(letters)))
    b = ~g * ~a * w
    return DoubleCosetResult(True, a, b)
