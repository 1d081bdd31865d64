"""Mixed causality graphs: directed (lagged) and undirected (instantaneous) edges."""
import json
from dataclasses import dataclass, field

import numpy as np

DIRECTED = "directed"
UNDIRECTED = "undirected"


@dataclass(frozen=True)
class EdgeTestResult:
    """Outcome of one surrogate test.

    ``pair`` is ``(source, target)`` for directed tests and the two channel
    names in channel order for undirected ones.
    """

    kind: str
    pair: tuple
    statistic: float
    null: np.ndarray = field(repr=False)
    p_value: float
    reject: bool = False

    @property
    def n_surrogates(self):
        return len(self.null)

    def to_dict(self):
        a, b = self.pair
        key = ("from", "to") if self.kind == DIRECTED else ("a", "b")
        return {key[0]: a, key[1]: b, "stat": float(self.statistic),
                "p": float(self.p_value), "reject": bool(self.reject)}


def undirected_key(a, b, order):
    """Canonical orientation of an unordered pair, following ``order``."""
    if a == b:
        raise ValueError(f"self-pair {a!r} is not an edge")
    return (a, b) if order.index(a) < order.index(b) else (b, a)


@dataclass
class CausalityGraph:
    """Nodes plus directed and undirected edge sets.

    ``results`` maps ``(kind, pair)`` to the :class:`EdgeTestResult` behind
    each tested edge, present or not; oracle graphs carry no results.
    """

    nodes: tuple
    directed: set = field(default_factory=set)
    undirected: set = field(default_factory=set)
    results: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        self.directed = set(self.directed)
        und = set()
        for a, b in self.undirected:
            und.add(undirected_key(a, b, self.nodes))
        self.undirected = und
        for a, b in self.directed:
            if a == b or a not in self.nodes or b not in self.nodes:
                raise ValueError(f"invalid directed edge {a!r} -> {b!r}")

    def sorted_directed(self):
        idx = self.nodes.index
        return sorted(self.directed, key=lambda e: (idx(e[0]), idx(e[1])))

    def sorted_undirected(self):
        idx = self.nodes.index
        return sorted(self.undirected, key=lambda e: (idx(e[0]), idx(e[1])))

    def same_edges(self, other):
        return (set(self.directed) == set(other.directed)
                and set(self.undirected) == set(other.undirected))

    def _label(self, kind, pair):
        res = self.results.get((kind, pair))
        return f' [label="p={res.p_value:.6g}"]' if res is not None else ""

    def to_dot(self):
        """DOT text; lagged edges as ``a -> b``, instantaneous ones as ``a -- b``."""
        lines = ["digraph causality {"]
        lines += [f'  "{n}";' for n in self.nodes]
        for a, b in self.sorted_directed():
            lines.append(f'  "{a}" -> "{b}"{self._label(DIRECTED, (a, b))};')
        for a, b in self.sorted_undirected():
            lines.append(f'  "{a}" -- "{b}"{self._label(UNDIRECTED, (a, b))};')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self, config=None):
        """JSON-ready form. Tested but absent edges are listed with ``reject`` false."""
        def edges(kind, present, key_names):
            rows = []
            tested = sorted((p for k, p in self.results if k == kind),
                            key=lambda e: (self.nodes.index(e[0]), self.nodes.index(e[1])))
            if tested:
                rows = [self.results[(kind, p)].to_dict() for p in tested]
            else:
                rows = [{key_names[0]: a, key_names[1]: b, "stat": None, "p": None,
                         "reject": True} for a, b in present]
            return rows

        return {
            "nodes": list(self.nodes),
            "directed": edges(DIRECTED, self.sorted_directed(), ("from", "to")),
            "undirected": edges(UNDIRECTED, self.sorted_undirected(), ("a", "b")),
            "config": config,
        }

    def to_json(self, config=None):
        return json.dumps(self.to_dict(config), indent=2) + "\n"
