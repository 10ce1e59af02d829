"""Network records and their line-oriented text format.

The format is a header line ``d ℓ c N0 lambda a_lambda``, then one line
``index x1 … xd eta`` per point, then one line ``i j`` per edge. Floats are
written with 17 significant digits, so a round trip is exact.
"""

import pathlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from sinr_ldp.errors import DomainError
from sinr_ldp.types import EdgeArray, PoweredPointSet

from .params import ModelParams


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


class NetworkHeader(NamedTuple):
    """The model constants recorded alongside a network."""

    dimension: int
    pathloss_exponent: float
    power_rate: float
    noise: float
    lam: float
    a_lambda: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "NetworkHeader":
        return cls(
            dimension=params.dimension,
            pathloss_exponent=params.pathloss_exponent,
            power_rate=params.power_rate,
            noise=params.noise,
            lam=params.lam,
            a_lambda=params.a_lambda,
        )

    @property
    def edge_scale(self) -> float:
        return self.lam**2 * self.a_lambda


def pair_indices(num_points: int) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Unordered pairs i < j in the fixed order used for edge indicator vectors."""
    i, j = np.triu_indices(num_points, k=1)
    return i.astype(np.int64), j.astype(np.int64)


def canonical_edges(edges: npt.ArrayLike, num_points: int) -> EdgeArray:
    """Validate an edge list and return it as sorted unique rows (i, j) with i < j."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if np.any(edges < 0) or np.any(edges >= num_points):
        raise DomainError(f"edge index out of range for {num_points} points")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise DomainError("self-loops are not allowed")
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0)


@dataclass(frozen=True, kw_only=True)
class SinrNetwork:
    points: PoweredPointSet
    edges: EdgeArray
    header: NetworkHeader

    @property
    def num_points(self) -> int:
        return self.points.num_points

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def adjacency(self) -> npt.NDArray[np.bool_]:
        adj = np.zeros((self.num_points, self.num_points), dtype=bool)
        adj[self.edges[:, 0], self.edges[:, 1]] = True
        adj[self.edges[:, 1], self.edges[:, 0]] = True
        return adj

    def edge_indicator(self) -> npt.NDArray[np.bool_]:
        """Edge presence for every unordered pair, in `pair_indices` order."""
        i, j = pair_indices(self.num_points)
        return self.adjacency()[i, j]

    @classmethod
    def from_indicator(
        cls,
        points: PoweredPointSet,
        indicator: npt.NDArray[np.bool_],
        header: NetworkHeader,
    ) -> "SinrNetwork":
        i, j = pair_indices(points.num_points)
        indicator = np.asarray(indicator, dtype=bool)
        assert indicator.shape == i.shape
        return cls(
            points=points,
            edges=np.stack([i[indicator], j[indicator]], axis=-1),
            header=header,
        )

    def relabel(self, permutation: npt.ArrayLike) -> "SinrNetwork":
        """The same network with point `k` moved to position `permutation[k]`."""
        permutation = np.asarray(permutation, dtype=np.int64)
        inverse = np.argsort(permutation)
        points = PoweredPointSet(
            locations=self.points.locations[inverse], powers=self.points.powers[inverse]
        )
        return SinrNetwork(
            points=points,
            edges=canonical_edges(permutation[self.edges], self.num_points),
            header=self.header,
        )


def dumps_network(network: SinrNetwork) -> str:
    h = network.header
    lines = [
        " ".join(
            [
                str(h.dimension),
                _fmt(h.pathloss_exponent),
                _fmt(h.power_rate),
                _fmt(h.noise),
                _fmt(h.lam),
                _fmt(h.a_lambda),
            ]
        )
    ]
    for index in range(network.num_points):
        coords = " ".join(_fmt(x) for x in network.points.locations[index])
        lines.append(f"{index} {coords} {_fmt(network.points.powers[index])}")
    for i, j in network.edges:
        lines.append(f"{int(i)} {int(j)}")
    return "\n".join(lines) + "\n"


def loads_network(text: str) -> SinrNetwork:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 6:
        raise ValueError("missing or malformed header line `d ℓ c N0 lambda a_lambda`")
    d = int(rows[0][0])
    header = NetworkHeader(d, *(float(v) for v in rows[0][1:]))

    locations, powers, edges = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) == d + 2:
            if edges:
                raise ValueError(f"line {lineno}: point after the edge list")
            if int(row[0]) != len(powers):
                raise ValueError(f"line {lineno}: expected point index {len(powers)}")
            locations.append([float(v) for v in row[1:-1]])
            powers.append(float(row[-1]))
        elif len(row) == 2:
            edges.append([int(row[0]), int(row[1])])
        else:
            raise ValueError(f"line {lineno}: expected {d + 2} or 2 fields")

    points = PoweredPointSet(
        locations=np.asarray(locations, dtype=np.float64).reshape(-1, d),
        powers=np.asarray(powers, dtype=np.float64),
    )
    return SinrNetwork(
        points=points, edges=canonical_edges(edges, points.num_points), header=header
    )


def save_network(network: SinrNetwork, path: pathlib.Path) -> None:
    pathlib.Path(path).write_text(dumps_network(network), encoding="utf-8")


def load_network(path: pathlib.Path) -> SinrNetwork:
    return loads_network(pathlib.Path(path).read_text(encoding="utf-8"))
