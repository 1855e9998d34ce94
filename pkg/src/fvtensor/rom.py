"""Interpolatory reduced-order models on sampled Tucker-cross data.

A model couples a Tucker-cross approximation with one parameter grid and
one interpolation basis per mode.  Evaluation is an encoder-decoder pass:
the (nonlinear) encoder evaluates the basis at the query point and
contracts it with the scalar factors, the multilinear decoder contracts
the reduced coefficients against the sampled core.  At grid nodes whose
indices were sampled, the delta property of the bases pushes through and
the model reproduces the stored solution exactly.
"""

import json
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .btensor import BTensor, TuckerCrossModel
from .fvt import load_fvt, save_fvt

BASIS_KINDS = ("hat", "lagrange")


class DomainError(ValueError):
    """Query point outside the grid span of a hat basis."""


@dataclass
class ParamGrid:
    """Strictly increasing node vectors, one per parametric dimension."""

    nodes: list

    def __post_init__(self):
        checked = []
        for k, x in enumerate(self.nodes):
            x = np.asarray(x, dtype=float).reshape(-1)
            if x.size < 1:
                raise ValueError(f"grid for mode {k} is empty")
            if x.size > 1 and np.any(np.diff(x) <= 0.0):
                raise ValueError(f"grid for mode {k} is not strictly increasing")
            checked.append(x)
        self.nodes = checked

    @property
    def sizes(self):
        return tuple(x.size for x in self.nodes)


@dataclass
class Basis1D:
    """Delta-property interpolation basis bound to one grid axis."""

    kind: str
    nodes: np.ndarray

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1)


def _hat_eval(nodes, alpha):
    n = nodes.size
    out = np.zeros(n)
    if n == 1:
        if alpha != nodes[0]:
            raise DomainError(f"{alpha} is not the single grid node")
        out[0] = 1.0
        return out
    if alpha < nodes[0] or alpha > nodes[-1]:
        raise DomainError(f"{alpha} outside [{nodes[0]}, {nodes[-1]}]")
    j = int(np.searchsorted(nodes, alpha, side="right")) - 1
    if j >= n - 1:
        out[-1] = 1.0
        return out
    t = (alpha - nodes[j]) / (nodes[j + 1] - nodes[j])
    out[j] = 1.0 - t
    out[j + 1] = t
    return out


def _lagrange_eval(nodes, alpha):
    n = nodes.size
    out = np.zeros(n)
    if n == 1:
        out[0] = 1.0
        return out
    diff = alpha - nodes
    hit = np.nonzero(diff == 0.0)[0]
    if hit.size:
        out[hit[0]] = 1.0
        return out
    if alpha < nodes[0] or alpha > nodes[-1]:
        warnings.warn(f"extrapolating outside [{nodes[0]}, {nodes[-1]}]",
                      stacklevel=3)
    w = np.ones(n)
    for i in range(n):
        w[i] = 1.0 / np.prod(np.delete(nodes[i] - nodes, i))
    terms = w / diff
    return terms / terms.sum()


def basis_eval(basis, alpha):
    """Values of all basis functions on one axis at the point ``alpha``.

    Hat bases are local, nonnegative, sum to one, and refuse points
    outside the grid span; the barycentric Lagrange basis reproduces
    polynomials up to the grid degree and extrapolates with a warning.
    Both return an exact unit vector at grid nodes.
    """
    alpha = float(alpha)
    if basis.kind == "hat":
        return _hat_eval(basis.nodes, alpha)
    return _lagrange_eval(basis.nodes, alpha)


@dataclass
class RomModel:
    """Tucker-cross model plus grids and bases for off-grid evaluation."""

    model: TuckerCrossModel
    grid: ParamGrid
    bases: list

    def __post_init__(self):
        sizes = self.grid.sizes
        if len(self.bases) != len(sizes):
            raise ValueError("need one basis per parametric dimension")
        for k, (Fk, n) in enumerate(zip(self.model.factors, sizes)):
            if Fk.shape[0] != n:
                raise ValueError(
                    f"factor {k} has {Fk.shape[0]} rows but the grid has {n} nodes"
                )

    @property
    def ip(self):
        return self.model.ip


def rom_from_parts(model, nodes, kinds):
    grid = ParamGrid(list(nodes))
    bases = [Basis1D(kind, x) for kind, x in zip(kinds, grid.nodes)]
    return RomModel(model=model, grid=grid, bases=bases)


def encode(rm, alphas):
    """Reduced coefficient vectors, one of length ``|I_k|`` per mode."""
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != len(rm.bases):
        raise ValueError(f"expected {len(rm.bases)} parameters, got {len(alphas)}")
    return [basis_eval(b, a) @ Fk
            for b, a, Fk in zip(rm.bases, alphas, rm.model.factors)]


def decode(rm, reduced):
    """Contract the sampled core against reduced coefficient vectors."""
    T = rm.model.core.data
    if len(reduced) != T.ndim - 1:
        raise ValueError("wrong number of reduced vectors")
    for vec in reduced:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (T.shape[0],):
            raise ValueError("reduced vector length mismatch")
        T = np.tensordot(vec, T, axes=(0, 0))
    return T


def rom_eval(rm, alphas):
    """Model prediction at a parameter point, as a coefficient vector."""
    return decode(rm, encode(rm, alphas))


def reuse_factors(rm, fine_cached):
    """Transfer a model to a finer discretization of the same family.

    Keeps the selected index sets and scalar factors; only the core is
    resampled from the fine oracle, costing exactly ``prod(|I_k|)`` fine
    evaluations.
    """
    model = rm.model
    if tuple(fine_cached.dims) != tuple(model.dims):
        raise ValueError(
            f"fine oracle dims {fine_cached.dims} != model dims {model.dims}"
        )
    core_data = fine_cached.gather([np.asarray(I) for I in model.index_sets])
    fine_core = BTensor(core_data, fine_cached.ip)
    fine_model = TuckerCrossModel(
        index_sets=model.index_sets,
        core=fine_core,
        factors=[Fk.copy() for Fk in model.factors],
        dims=model.dims,
    )
    return RomModel(model=fine_model, grid=rm.grid, bases=list(rm.bases))


def _hex_list(arr):
    return [float(v).hex() for v in np.asarray(arr, dtype=float).reshape(-1)]


def _from_hex(values, shape):
    out = np.array([float.fromhex(v) for v in values], dtype=float)
    return out.reshape(shape)


def save_model(rm, path, core_path=None):
    """Persist a ROM as JSON plus a companion FVT file for the core.

    Floats are hex-encoded for a bit-exact round-trip; index sets are
    stored as 1-based sorted lists.
    """
    if core_path is None:
        base = path[:-5] if path.endswith(".json") else path
        core_path = base + ".core.fvt"
    save_fvt(rm.model.core, core_path)
    doc = {
        "format": "fvt-rom",
        "version": 1,
        "dims": [int(n) for n in rm.model.dims],
        "index_sets": [[int(i) + 1 for i in I] for I in rm.model.index_sets],
        "grids": [_hex_list(x) for x in rm.grid.nodes],
        "basis": [b.kind for b in rm.bases],
        "factors": [
            {"rows": int(F.shape[0]), "cols": int(F.shape[1]),
             "data": _hex_list(F)}
            for F in rm.model.factors
        ],
        "core_file": os.path.basename(core_path),
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def load_model(path):
    """Load a ROM saved by :func:`save_model`."""
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format") != "fvt-rom" or doc.get("version") != 1:
        raise ValueError("not a version-1 ROM file")
    core_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                             doc["core_file"])
    core = load_fvt(core_path)
    dims = tuple(int(n) for n in doc["dims"])
    index_sets = tuple(tuple(int(i) - 1 for i in I) for I in doc["index_sets"])
    factors = [_from_hex(F["data"], (F["rows"], F["cols"]))
               for F in doc["factors"]]
    model = TuckerCrossModel(index_sets=index_sets, core=core,
                             factors=factors, dims=dims)
    nodes = [_from_hex(g, (len(g),)) for g in doc["grids"]]
    return rom_from_parts(model, nodes, doc["basis"])
