"""Network documents (YAML) and CSV snapshot output.

A network document looks like::

    nodes: [n1, n2, J, n3]
    arcs:
      - {id: a1, tail: n1, head: J, length: 1.0}
      - {id: a2, tail: n2, head: J, length: 1.0}
      - {id: a3, tail: J, head: n3, length: 1.0}
    paths:
      - {id: 1, arcs: [a1, a3]}
      - {id: 2, arcs: [a2, a3]}
    flux: {kind: quadratic, rho_max: 1.0, scale: 1.0}
    grid: {dx: 0.04}
    boundaries:
      - {path: 1, upstream: 0.1, downstream: 0.3}
      - {path: 2, upstream: 0.15, downstream: 0.3}
    initial:
      - {path: 1, value: 0.0}
      - {path: 2, values: [0.0, 0.0, ...]}

``flux`` may instead be ``{kind: tabulated, grid: [...], values: [...]}``.
Paths may set ``periodic: true`` and then take no boundary entry. Paths
missing from ``boundaries`` or ``initial`` default to zero.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np
import yaml

from .flux import FluxModel
from .network import (
    Arc,
    DensityField,
    Network,
    NetworkError,
    NetworkGrid,
    Path,
    build_grid,
    check_admissible,
    phys_omega,
    validate_path,
)
from .scheme import Snapshot

CSV_HEADER = ("time", "path", "cell", "x", "mu", "omega", "pi")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-3`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


class DocumentError(ValueError):
    """Invalid network document; carries the offending field and source line."""

    def __init__(self, message: str, where: str = "", line: int | None = None):
        self.where = where
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if where:
            prefix += f"{where}: "
        super().__init__(prefix + message)


@dataclass
class NetworkDocument:
    network: Network
    paths: list[Path]
    flux: FluxModel
    dx: float
    boundaries: dict[int, tuple[float, float]] = field(default_factory=dict)
    initial: dict[int, float | tuple[float, ...]] = field(default_factory=dict)

    def grid(self) -> NetworkGrid:
        return build_grid(self.network, self.paths, self.dx)

    def field(self, grid: NetworkGrid | None = None) -> DensityField:
        grid = grid or self.grid()
        return grid.field(
            {pid: np.asarray(v, dtype=float) for pid, v in self.initial.items()},
            self.boundaries,
        )

    def __eq__(self, other):
        if not isinstance(other, NetworkDocument):
            return NotImplemented
        return (
            self.network.nodes == other.network.nodes
            and self.network.arcs == other.network.arcs
            and sorted(self.paths, key=lambda p: p.id) == sorted(other.paths, key=lambda p: p.id)
            and self.flux == other.flux
            and self.dx == other.dx
            and self.boundaries == other.boundaries
            and self.initial == other.initial
        )


# -- parsing ------------------------------------------------------------------


class _Locator:
    """Maps field paths like ``("arcs", 2, "length")`` to source line numbers."""

    def __init__(self, root):
        self.root = root

    def line(self, keys: Sequence) -> int | None:
        node = self.root
        best = node.start_mark.line + 1 if node is not None else None
        for k in keys:
            nxt = None
            if isinstance(node, yaml.MappingNode):
                for kn, vn in node.value:
                    if kn.value == k:
                        nxt = vn
                        break
            elif isinstance(node, yaml.SequenceNode) and isinstance(k, int) and k < len(node.value):
                nxt = node.value[k]
            if nxt is None:
                break
            node = nxt
            best = node.start_mark.line + 1
        return best


def _fmt_where(keys: Sequence) -> str:
    out = ""
    for k in keys:
        out += f"[{k}]" if isinstance(k, int) else (f".{k}" if out else str(k))
    return out


class _Reader:
    def __init__(self, text: str):
        try:
            self.data = yaml.load(text, Loader=_Loader)
            self.loc = _Locator(yaml.compose(text, Loader=_Loader))
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise DocumentError(f"malformed YAML: {getattr(e, 'problem', e)}",
                                line=mark.line + 1 if mark else None) from None
        if not isinstance(self.data, dict):
            raise DocumentError("document must be a mapping of sections", line=1)

    def fail(self, keys, message):
        raise DocumentError(message, _fmt_where(keys), self.loc.line(keys))

    def get(self, keys, required=True, default=None):
        node = self.data
        for k in keys:
            if isinstance(node, dict) and k in node:
                node = node[k]
            elif isinstance(node, list) and isinstance(k, int) and k < len(node):
                node = node[k]
            else:
                if required:
                    self.fail(keys, "missing required field")
                return default
        return node

    def number(self, keys, required=True, default=None) -> float:
        v = self.get(keys, required, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(keys, f"expected a number, got {v!r}")
        return float(v)

    def seq(self, keys, required=True) -> list:
        v = self.get(keys, required, [])
        if v is None:
            v = []
        if not isinstance(v, list):
            self.fail(keys, "expected a list")
        return v

    def mapping(self, keys, allowed: set[str]) -> dict:
        v = self.get(keys)
        if not isinstance(v, dict):
            self.fail(keys, "expected a mapping")
        extra = set(v) - allowed
        if extra:
            k = sorted(map(str, extra))[0]
            self.fail(list(keys) + [k], f"unknown field {k!r}")
        return v


def parse_network(text: str) -> NetworkDocument:
    """Parse and fully validate a network document."""
    r = _Reader(text)
    unknown = set(r.data) - {"nodes", "arcs", "paths", "flux", "grid", "boundaries", "initial"}
    if unknown:
        k = sorted(map(str, unknown))[0]
        r.fail([k], f"unknown section {k!r}")

    nodes = [str(n) for n in r.seq(["nodes"])]
    if not nodes:
        r.fail(["nodes"], "at least one node required")
    seen = set()
    for i, n in enumerate(nodes):
        if n in seen:
            r.fail(["nodes", i], f"duplicate node id {n!r}")
        seen.add(n)

    arcs = []
    arc_ids = set()
    for i, _ in enumerate(r.seq(["arcs"])):
        r.mapping(["arcs", i], {"id", "tail", "head", "length"})
        aid = str(r.get(["arcs", i, "id"]))
        if aid in arc_ids:
            r.fail(["arcs", i, "id"], f"duplicate arc id {aid!r}")
        arc_ids.add(aid)
        ends = []
        for end in ("tail", "head"):
            n = str(r.get(["arcs", i, end]))
            if n not in seen:
                r.fail(["arcs", i, end], f"unknown node {n!r}")
            ends.append(n)
        length = r.number(["arcs", i, "length"])
        if not length > 0:
            r.fail(["arcs", i, "length"], f"length must be positive, got {length}")
        arcs.append(Arc(aid, ends[0], ends[1], length))
    if not arcs:
        r.fail(["arcs"], "at least one arc required")
    network = Network(nodes, arcs)

    flux_cfg = r.mapping(["flux"], {"kind", "rho_max", "scale", "grid", "values"})
    kind = flux_cfg.get("kind", "quadratic")
    try:
        if kind == "quadratic":
            flux = FluxModel.quadratic(
                r.number(["flux", "rho_max"], False, 1.0), r.number(["flux", "scale"], False, 1.0)
            )
        elif kind == "tabulated":
            g = [r.number(["flux", "grid", i]) for i in range(len(r.seq(["flux", "grid"])))]
            v = [r.number(["flux", "values", i]) for i in range(len(r.seq(["flux", "values"])))]
            flux = FluxModel.tabulated(g, v)
        else:
            r.fail(["flux", "kind"], f"unknown flux kind {kind!r}")
    except DocumentError:
        raise
    except ValueError as e:
        r.fail(["flux"], str(e))

    r.mapping(["grid"], {"dx"})
    dx = r.number(["grid", "dx"])
    if not dx > 0:
        r.fail(["grid", "dx"], f"dx must be positive, got {dx}")
    for i, a in enumerate(arcs):
        ratio = a.length / dx
        if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
            r.fail(["arcs", i, "length"], f"length {a.length} is not a multiple of dx={dx}")

    paths = []
    path_ids = set()
    for i, _ in enumerate(r.seq(["paths"], required=False)):
        r.mapping(["paths", i], {"id", "arcs", "periodic"})
        pid = r.get(["paths", i, "id"])
        if isinstance(pid, bool) or not isinstance(pid, int):
            r.fail(["paths", i, "id"], f"path id must be an integer, got {pid!r}")
        if pid in path_ids:
            r.fail(["paths", i, "id"], f"duplicate path id {pid}")
        path_ids.add(pid)
        parcs = [str(a) for a in r.seq(["paths", i, "arcs"])]
        for j, a in enumerate(parcs):
            if a not in arc_ids:
                r.fail(["paths", i, "arcs", j], f"unknown arc {a!r}")
        periodic = r.get(["paths", i, "periodic"], False, False)
        if not isinstance(periodic, bool):
            r.fail(["paths", i, "periodic"], "expected true or false")
        p = Path(pid, tuple(parcs), periodic)
        try:
            validate_path(network, p)
        except NetworkError as e:
            r.fail(["paths", i], str(e))
        paths.append(p)
    if not paths:
        r.fail(["paths"], "at least one path required")
    by_id = {p.id: p for p in paths}

    rmax = flux.rho_max

    def density(keys):
        val = r.number(keys)
        if not 0 <= val <= rmax:
            r.fail(keys, f"density {val} outside [0, {rmax}]")
        return val

    boundaries = {}
    for i, _ in enumerate(r.seq(["boundaries"], required=False)):
        r.mapping(["boundaries", i], {"path", "upstream", "downstream"})
        pid = r.get(["boundaries", i, "path"])
        if pid not in by_id:
            r.fail(["boundaries", i, "path"], f"unknown path {pid!r}")
        if by_id[pid].periodic:
            r.fail(["boundaries", i, "path"], f"periodic path {pid} takes no boundary values")
        if pid in boundaries:
            r.fail(["boundaries", i, "path"], f"duplicate boundary entry for path {pid}")
        boundaries[pid] = (density(["boundaries", i, "upstream"]), density(["boundaries", i, "downstream"]))

    grid = build_grid(network, paths, dx)
    initial = {}
    for i, _ in enumerate(r.seq(["initial"], required=False)):
        entry = r.mapping(["initial", i], {"path", "value", "values"})
        pid = r.get(["initial", i, "path"])
        if pid not in by_id:
            r.fail(["initial", i, "path"], f"unknown path {pid!r}")
        if pid in initial:
            r.fail(["initial", i, "path"], f"duplicate initial entry for path {pid}")
        if ("value" in entry) == ("values" in entry):
            r.fail(["initial", i], "give exactly one of 'value' or 'values'")
        if "value" in entry:
            initial[pid] = density(["initial", i, "value"])
        else:
            n = grid.n_path_cells(pid)
            vals = r.seq(["initial", i, "values"])
            if len(vals) != n:
                r.fail(["initial", i, "values"], f"path {pid} has {n} cells, got {len(vals)} values")
            initial[pid] = tuple(density(["initial", i, "values", k]) for k in range(n))

    doc = NetworkDocument(network, paths, flux, dx, boundaries, initial)
    fld = doc.field(grid)
    rep = check_admissible(grid, fld, rmax)
    if not rep.admissible:
        pid, k, om = rep.offenders[0]
        idx = [i for i, e in enumerate(r.seq(["initial"], required=False)) if e.get("path") == pid]
        r.fail(["initial", idx[0]] if idx else ["initial"],
               f"total density {om:.6g} exceeds rho_max={rmax} at path {pid} cell {k}")
    ghosts_total = np.bincount(grid.ghost_phys - grid.n_phys, weights=fld.ghosts)
    if ghosts_total.size and ghosts_total.max() > rmax + 1e-12:
        r.fail(["boundaries"], f"boundary values sharing an arc end add up to {ghosts_total.max():.6g} > rho_max")
    return doc


def load_network(path: str | os.PathLike) -> NetworkDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise OSError(f"cannot read network file {os.fspath(path)!r}: {e.strerror}") from e
    return parse_network(text)


def render_network(doc: NetworkDocument) -> str:
    """YAML text that parses back to an equal document."""
    fx = doc.flux
    if fx.kind == "quadratic":
        flux = {"kind": "quadratic", "rho_max": fx.rho_max, "scale": fx.scale}
    else:
        flux = {"kind": "tabulated", "grid": list(fx.grid), "values": list(fx.values)}
    data = {
        "nodes": list(doc.network.nodes),
        "arcs": [{"id": a.id, "tail": a.tail, "head": a.head, "length": a.length} for a in doc.network.arcs],
        "paths": [
            {"id": p.id, "arcs": list(p.arcs), **({"periodic": True} if p.periodic else {})}
            for p in sorted(doc.paths, key=lambda p: p.id)
        ],
        "flux": flux,
        "grid": {"dx": doc.dx},
        "boundaries": [
            {"path": pid, "upstream": up, "downstream": down}
            for pid, (up, down) in sorted(doc.boundaries.items())
        ],
        "initial": [
            {"path": pid, **({"values": list(v)} if isinstance(v, tuple) else {"value": v})}
            for pid, v in sorted(doc.initial.items())
        ],
    }
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


# -- snapshots ----------------------------------------------------------------


@dataclass(frozen=True)
class SnapshotRecord:
    """One CSV row. ``cell`` is the physical cell id; ``x`` is None off-path."""

    time: float
    path: int
    cell: int
    x: float | None
    mu: float
    omega: float
    pi: float


def snapshot_records(grid: NetworkGrid, snapshots: Iterable[Snapshot]) -> list[SnapshotRecord]:
    """Rows for every (time, path, physical cell).

    Every path reports every physical cell of the network so that rows of
    different paths line up; cells a path does not cross get ``mu = pi = 0``
    and an empty position.
    """
    local = {}
    for p in grid.paths:
        s = grid.cells(p.id)
        local[p.id] = {int(c): k for k, c in enumerate(grid.phys[s])}
    out = []
    for snap in snapshots:
        omega = phys_omega(grid, snap.field)
        for p in grid.paths:
            mu_p = snap.field.path(grid, p.id)
            pos = local[p.id]
            for c in range(grid.n_phys):
                om = float(omega[c])
                if c in pos:
                    k = pos[c]
                    mu = float(mu_p[k])
                    x = (k + 0.5) * grid.dx
                else:
                    mu, x = 0.0, None
                pi = mu / om if om > 0 else 0.0
                out.append(SnapshotRecord(float(snap.t), p.id, c, x, mu, om, pi))
    out.sort(key=lambda r: (r.time, r.path, r.cell))
    return out


def _g(v: float) -> str:
    return f"{v:.12g}"


def write_snapshots_csv(records: Iterable[SnapshotRecord], destination: str | os.PathLike | IO[str]) -> bytes:
    """Write records as CSV and return the exact bytes written."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_g(r.time), r.path, r.cell, "" if r.x is None else _g(r.x), _g(r.mu), _g(r.omega), _g(r.pi)])
    data = buf.getvalue()
    _emit(data, destination)
    return data.encode("utf-8")


def _emit(text: str, destination) -> None:
    if hasattr(destination, "write"):
        destination.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {os.fspath(destination)!r}: {e.strerror}") from e
