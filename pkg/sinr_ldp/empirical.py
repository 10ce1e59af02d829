"""Binned measures on 𝒲 = 𝒟×ℝ₊ and 𝒲×𝒲.

Bins are products of a rectangular cell of 𝒟 and a power interval. Bin
``b`` of a partition is cell ``b // num_power_bins`` (cells in C order over
the axes) with power bin ``b % num_power_bins``.
"""

import csv
import hashlib
import json
import math
import pathlib
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import flax.struct
import numpy as np
import numpy.typing as npt
from jaxtyping import Float

from sinr_ldp.config.kernel import KernelConfig, QuadratureConfig
from sinr_ldp.config.model import DomainConfig
from sinr_ldp.config.utils import BoundaryMode, KernelKind, KernelMode
from sinr_ldp.errors import ConfigurationError, DomainError, PartitionMismatchError
from sinr_ldp.model.network import SinrNetwork, pair_indices
from sinr_ldp.model.params import ModelParams
from sinr_ldp.model.sinr import pairwise_distances
from sinr_ldp.types import BinIds, Locations, PoweredPointSet

_SYMMETRY_RTOL = 1e-12


def _json_float(value: float) -> float | str:
    return "inf" if math.isinf(value) else float(value)


@dataclass(frozen=True, kw_only=True)
class Partition:
    domain: DomainConfig
    domain_res: tuple[int, ...]
    eta_cap: float
    power_res: int

    @property
    def has_overflow(self) -> bool:
        return math.isfinite(self.eta_cap)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.domain_res))

    @property
    def num_power_bins(self) -> int:
        return self.power_res + int(self.has_overflow)

    @property
    def num_bins(self) -> int:
        return self.num_cells * self.num_power_bins

    @property
    def num_regular_bins(self) -> int:
        return self.num_cells * self.power_res

    @cached_property
    def power_edges(self) -> npt.NDArray[np.float64]:
        """0 = e₀ < … < e_k = eta_cap, then +inf when there is an overflow bin."""
        if not self.has_overflow:
            return np.asarray([0.0, math.inf])
        edges = self.eta_cap * np.arange(self.power_res + 1) / self.power_res
        return np.append(edges, math.inf)

    @cached_property
    def identity(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_json(), sort_keys=True).encode()
        ).hexdigest()[:16]

    def cell_index(self, locations: Locations) -> BinIds:
        locations = np.asarray(locations, dtype=np.float64).reshape(
            -1, self.domain.dimension
        )
        if not np.all(self.domain.contains(locations)):
            raise DomainError("a location falls outside the partitioned domain")
        res = np.asarray(self.domain_res)
        scaled = (locations - self.domain.low) / self.domain.lengths * res
        per_axis = np.clip(np.floor(scaled).astype(np.int64), 0, res - 1)
        return np.ravel_multi_index(tuple(per_axis.T), self.domain_res).astype(
            np.int64
        )

    def power_index(self, powers: npt.ArrayLike) -> BinIds:
        powers = np.asarray(powers, dtype=np.float64).reshape(-1)
        if np.any(~(powers > 0)):
            raise DomainError("powers must be positive")
        # right-closed intervals (e_{k-1}, e_k]
        return np.searchsorted(self.power_edges[1:-1], powers, side="left").astype(
            np.int64
        )

    def bin_index(self, points: PoweredPointSet) -> BinIds:
        return (
            self.cell_index(points.locations) * self.num_power_bins
            + self.power_index(points.powers)
        )

    def cell_of_bin(self, bins: npt.ArrayLike) -> BinIds:
        return np.asarray(bins, dtype=np.int64) // self.num_power_bins

    def power_of_bin(self, bins: npt.ArrayLike) -> BinIds:
        return np.asarray(bins, dtype=np.int64) % self.num_power_bins

    def check_same(self, other: "Partition") -> None:
        if self != other:
            raise PartitionMismatchError(
                f"partitions differ ({self.identity} vs {other.identity})"
            )

    def coarsening_map(self, coarse: "Partition") -> BinIds:
        """For every bin of this (fine) partition, the coarse bin containing it."""
        if self.domain != coarse.domain or self.eta_cap != coarse.eta_cap:
            raise PartitionMismatchError("partitions cover different spaces")
        if len(self.domain_res) != len(coarse.domain_res) or any(
            f % c for f, c in zip(self.domain_res, coarse.domain_res)
        ):
            raise PartitionMismatchError("domain cells are not nested")
        if self.power_res % coarse.power_res:
            raise PartitionMismatchError("power bins are not nested")

        bins = np.arange(self.num_bins)
        fine_cells = np.unravel_index(self.cell_of_bin(bins), self.domain_res)
        ratios = [f // c for f, c in zip(self.domain_res, coarse.domain_res)]
        coarse_cells = np.ravel_multi_index(
            tuple(c // r for c, r in zip(fine_cells, ratios)), coarse.domain_res
        )
        fine_power = self.power_of_bin(bins)
        coarse_power = np.where(
            fine_power >= self.power_res,
            coarse.power_res,
            fine_power // (self.power_res // coarse.power_res),
        )
        return (coarse_cells * coarse.num_power_bins + coarse_power).astype(np.int64)

    def to_json(self) -> dict[str, Any]:
        return {
            "lows": list(self.domain.lows),
            "highs": list(self.domain.highs),
            "boundary": self.domain.boundary.value,
            "domain_res": list(self.domain_res),
            "power_res": self.power_res,
            "eta_cap": _json_float(self.eta_cap),
            "power_edges": [_json_float(e) for e in self.power_edges],
            "num_bins": self.num_bins,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Partition":
        domain = DomainConfig(
            lows=tuple(data["lows"]),
            highs=tuple(data["highs"]),
            boundary=BoundaryMode(data["boundary"]),
        )
        return make_partition(
            domain, float(data["eta_cap"]), tuple(data["domain_res"]), data["power_res"]
        )


def make_partition(
    domain: DomainConfig,
    eta_cap: float,
    domain_res: int | tuple[int, ...],
    power_res: int,
) -> Partition:
    if isinstance(domain_res, int):
        domain_res = (domain_res,)
    if len(domain_res) == 1:
        domain_res = domain_res * domain.dimension
    if len(domain_res) != domain.dimension:
        raise ConfigurationError(
            f"expected 1 or {domain.dimension} resolutions", field="domain_res"
        )
    if any(r < 1 for r in domain_res) or power_res < 1:
        raise ConfigurationError("resolutions must be at least 1", field="domain_res")
    if not eta_cap > 0:
        raise ConfigurationError("must be positive", field="eta_cap")
    if math.isinf(eta_cap) and power_res != 1:
        raise ConfigurationError(
            "an infinite cap allows a single power bin", field="power_res"
        )
    return Partition(
        domain=domain,
        domain_res=tuple(int(r) for r in domain_res),
        eta_cap=float(eta_cap),
        power_res=int(power_res),
    )


class BinnedMeasure(flax.struct.PyTreeNode):
    """Masses `weights / normalizer` on the bins (or bin pairs) of a partition.

    Empirical measures keep integer counts in `weights` so that their total
    mass is exactly `count / normalizer`.
    """

    weights: Float[np.ndarray, "..."]
    partition: Partition = flax.struct.field(pytree_node=False)
    normalizer: float = flax.struct.field(pytree_node=False, default=1.0)

    @classmethod
    def create(
        cls, masses: npt.ArrayLike, partition: Partition, normalizer: float = 1.0
    ) -> "BinnedMeasure":
        weights = np.asarray(masses, dtype=np.float64)
        n = partition.num_bins
        if weights.shape not in ((n,), (n, n)):
            raise PartitionMismatchError(
                f"masses of shape {weights.shape} do not fit {n} bins"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise DomainError("masses must be finite and nonnegative")
        if not normalizer > 0:
            raise DomainError("normalizer must be positive")
        if weights.ndim == 2 and not np.allclose(
            weights, weights.T, rtol=_SYMMETRY_RTOL, atol=0.0
        ):
            raise DomainError("pair measures must be symmetric")
        return cls(weights=weights, partition=partition, normalizer=float(normalizer))

    @classmethod
    def zeros(cls, partition: Partition, pair: bool = False) -> "BinnedMeasure":
        shape = (partition.num_bins,) * (2 if pair else 1)
        return cls(weights=np.zeros(shape), partition=partition)

    @property
    def masses(self) -> npt.NDArray[np.float64]:
        if self.normalizer == 1.0:
            return self.weights
        return self.weights / self.normalizer

    @property
    def is_pair(self) -> bool:
        return self.weights.ndim == 2

    @property
    def total(self) -> float:
        return math.fsum(self.weights.reshape(-1)) / self.normalizer

    def scaled(self, factor: float) -> "BinnedMeasure":
        return BinnedMeasure.create(self.masses * factor, self.partition)

    def check_compatible(self, other: "BinnedMeasure") -> None:
        self.partition.check_same(other.partition)
        if self.weights.shape != other.weights.shape:
            raise PartitionMismatchError(
                "cannot compare a measure on 𝒲 with one on 𝒲×𝒲"
            )


class TiltFunction(flax.struct.PyTreeNode):
    """A bounded symmetric function g on bin pairs."""

    values: Float[np.ndarray, "bins bins"]
    partition: Partition = flax.struct.field(pytree_node=False)

    @classmethod
    def create(cls, values: npt.ArrayLike, partition: Partition) -> "TiltFunction":
        values = np.asarray(values, dtype=np.float64)
        n = partition.num_bins
        if values.shape != (n, n):
            raise PartitionMismatchError(f"tilt of shape {values.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(values)):
            raise DomainError("tilt values must be finite")
        if not np.allclose(values, values.T, rtol=_SYMMETRY_RTOL, atol=0.0):
            raise DomainError("tilts must be symmetric")
        return cls(values=values, partition=partition)

    @classmethod
    def constant(cls, partition: Partition, value: float) -> "TiltFunction":
        n = partition.num_bins
        return cls.create(np.full((n, n), value), partition)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)


class BinnedKernel(flax.struct.PyTreeNode):
    """Limit kernel q averaged over bin pairs, so that (qπ⊗π)(b, b') = K(b, b')π(b)π(b')."""

    values: Float[np.ndarray, "bins bins"]
    partition: Partition = flax.struct.field(pytree_node=False)

    @classmethod
    def constant(cls, partition: Partition, value: float) -> "BinnedKernel":
        n = partition.num_bins
        return cls(values=np.full((n, n), float(value)), partition=partition)

    def q_pi_pi(self, pi: BinnedMeasure) -> BinnedMeasure:
        self.partition.check_same(pi.partition)
        if pi.is_pair:
            raise PartitionMismatchError("qπ⊗π needs a measure on 𝒲")
        masses = pi.masses
        return BinnedMeasure.create(
            self.values * np.outer(masses, masses), self.partition
        )


def bin_index(partition: Partition, points: PoweredPointSet) -> BinIds:
    return partition.bin_index(points)


def pair_measure(
    values: npt.ArrayLike,
    bins_i: BinIds,
    bins_j: BinIds,
    partition: Partition,
    normalizer: float,
) -> BinnedMeasure:
    """Σ values_p [δ(b_i, b_j) + δ(b_j, b_i)] / normalizer over unordered pairs p."""
    n = partition.num_bins
    weights = np.zeros((n, n), dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    np.add.at(weights, (bins_i, bins_j), values)
    np.add.at(weights, (bins_j, bins_i), values)
    return BinnedMeasure(weights=weights, partition=partition, normalizer=float(normalizer))


def empirical_power_measure(
    network: SinrNetwork, partition: Partition, lam: float
) -> BinnedMeasure:
    """U₁^λ = λ⁻¹ Σ_i δ_(Z_i, η_i)."""
    if network.num_points == 0:
        return BinnedMeasure(
            weights=np.zeros(partition.num_bins), partition=partition, normalizer=lam
        )
    counts = np.bincount(
        partition.bin_index(network.points), minlength=partition.num_bins
    ).astype(np.float64)
    return BinnedMeasure(weights=counts, partition=partition, normalizer=float(lam))


def empirical_connectivity_measure(
    network: SinrNetwork, partition: Partition, lam: float, a_lambda: float
) -> BinnedMeasure:
    """U₂^λ = (λ²a_λ)⁻¹ Σ_{edges} [δ_(i, j) + δ_(j, i)]."""
    scale = lam**2 * a_lambda
    if network.num_edges == 0:
        n = partition.num_bins
        return BinnedMeasure(
            weights=np.zeros((n, n)), partition=partition, normalizer=scale
        )
    bins = partition.bin_index(network.points)
    return pair_measure(
        np.ones(network.num_edges),
        bins[network.edges[:, 0]],
        bins[network.edges[:, 1]],
        partition,
        scale,
    )


def coarsen(measure: BinnedMeasure, coarse: Partition) -> BinnedMeasure:
    mapping = measure.partition.coarsening_map(coarse)
    n = coarse.num_bins
    if measure.is_pair:
        weights = np.zeros((n, n), dtype=np.float64)
        np.add.at(weights, (mapping[:, None], mapping[None, :]), measure.weights)
    else:
        weights = np.bincount(mapping, weights=measure.weights, minlength=n)
    return BinnedMeasure(weights=weights, partition=coarse, normalizer=measure.normalizer)


def tv_distance(a: BinnedMeasure, b: BinnedMeasure) -> float:
    """Σ_b |a(b) − b(b)|."""
    a.check_compatible(b)
    return float(np.sum(np.abs(a.masses - b.masses)))


def _cell_masses(
    partition: Partition, params: ModelParams, quad: QuadratureConfig, pair: bool
) -> tuple[npt.NDArray, npt.NDArray, npt.NDArray]:
    nodes, weights = quad.nodes(partition.domain, pair=pair)
    weights = weights * params.intensity(nodes)
    cells = partition.cell_index(nodes)
    return nodes, weights, cells


def power_reference_measure(
    partition: Partition, params: ModelParams, quad: QuadratureConfig
) -> BinnedMeasure:
    """The mean measure π⊗𝒦 of U₁^λ: π(cell) times the exponential mass of the power bin."""
    _, weights, cells = _cell_masses(partition, params, quad, pair=False)
    cell_mass = np.bincount(cells, weights=weights, minlength=partition.num_cells)
    edges = partition.power_edges
    power_mass = np.exp(-params.power_rate * edges[:-1]) - np.exp(
        -params.power_rate * edges[1:]
    )
    return BinnedMeasure.create(np.outer(cell_mass, power_mass).reshape(-1), partition)


def bin_kernel(
    partition: Partition,
    params: ModelParams,
    kernel: KernelConfig,
    quad: QuadratureConfig,
) -> BinnedKernel:
    """Average of the synthetic limit kernel over every pair of cells, weighted by π⊗π."""
    if kernel.mode != KernelMode.SYNTHETIC:
        raise ConfigurationError(
            "a closed-form limit kernel needs the synthetic mode", field="kernel.mode"
        )
    nodes, weights, cells = _cell_masses(partition, params, quad, pair=True)
    q = kernel.kappa * np.exp(-kernel.theta * pairwise_distances(nodes, partition.domain))
    indicator = np.zeros((nodes.shape[0], partition.num_cells))
    indicator[np.arange(nodes.shape[0]), cells] = 1.0
    weighted = indicator * weights[:, None]
    cell_pair = weighted.T @ q @ weighted
    cell_mass = weighted.sum(axis=0)
    norm = np.outer(cell_mass, cell_mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_cell = np.where(norm > 0, cell_pair / np.where(norm > 0, norm, 1.0), 0.0)
    per_cell = 0.5 * (per_cell + per_cell.T)
    cell_of = partition.cell_of_bin(np.arange(partition.num_bins))
    return BinnedKernel(values=per_cell[np.ix_(cell_of, cell_of)], partition=partition)


def limit_connectivity_reference(
    partition: Partition,
    params: ModelParams,
    kernel: KernelConfig,
    quad: QuadratureConfig,
) -> BinnedMeasure:
    """q·(π⊗𝒦)⊗(π⊗𝒦) on bin pairs."""
    return bin_kernel(partition, params, kernel, quad).q_pi_pi(
        power_reference_measure(partition, params, quad)
    )


def quenched_connectivity_reference(
    points: PoweredPointSet,
    partition: Partition,
    params: ModelParams,
    kernel: KernelConfig,
    quad: QuadratureConfig | None = None,
) -> BinnedMeasure:
    """qπ⊗π with π the empirical power measure of a frozen configuration.

    Equal to λ⁻² Σ_{i≠j} q(x_i, x_j) δ_(b_i, b_j); the diagonal i = j is left out.
    """
    limit = kernel.spawn(params, KernelKind.LIMIT_Q, quad)
    if points.num_points < 2:
        n = partition.num_bins
        return BinnedMeasure(weights=np.zeros((n, n)), partition=partition)
    bins = partition.bin_index(points)
    i, j = pair_indices(points.num_points)
    return pair_measure(
        limit.pair_values(points), bins[i], bins[j], partition, params.lam**2
    )


def wlln_deviation(
    network: SinrNetwork,
    partition: Partition,
    params: ModelParams,
    kernel: KernelConfig,
    quad: QuadratureConfig,
    references: tuple[BinnedMeasure, BinnedMeasure] | None = None,
) -> tuple[float, float]:
    """Sup-norm distances of U₁^λ and U₂^λ from their limits.

    `references` are the limits π⊗𝒦 and qπ⊗π when already computed for this λ.
    """
    u1 = empirical_power_measure(network, partition, params.lam)
    u2 = empirical_connectivity_measure(network, partition, params.lam, params.a_lambda)
    if references is None:
        ref1 = power_reference_measure(partition, params, quad)
        ref2 = bin_kernel(partition, params, kernel, quad).q_pi_pi(ref1)
    else:
        ref1, ref2 = references
        ref1.check_compatible(u1)
        ref2.check_compatible(u2)
    return (
        float(np.max(np.abs(u1.masses - ref1.masses))),
        float(np.max(np.abs(u2.masses - ref2.masses))),
    )


def write_measure_csv(measure: BinnedMeasure, path: pathlib.Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        masses = measure.masses
        if measure.is_pair:
            writer.writerow(["bin_index", "bin_index_2", "mass"])
            for a, b in zip(*np.nonzero(masses)):
                writer.writerow([int(a), int(b), format(masses[a, b], ".17g")])
        else:
            writer.writerow(["bin_index", "mass"])
            for a in np.nonzero(masses)[0]:
                writer.writerow([int(a), format(masses[a], ".17g")])


def read_measure_csv(path: pathlib.Path, partition: Partition) -> BinnedMeasure:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    n = partition.num_bins
    if header == ["bin_index", "bin_index_2", "mass"]:
        masses = np.zeros((n, n))
        for a, b, mass in rows:
            masses[int(a), int(b)] = float(mass)
    elif header == ["bin_index", "mass"]:
        masses = np.zeros(n)
        for a, mass in rows:
            masses[int(a)] = float(mass)
    else:
        raise ValueError(f"unrecognized measure CSV header {header}")
    return BinnedMeasure.create(masses, partition)


def write_partition_json(partition: Partition, path: pathlib.Path) -> None:
    pathlib.Path(path).write_text(
        json.dumps(partition.to_json(), indent=2) + "\n", encoding="utf-8"
    )


def read_partition_json(path: pathlib.Path) -> Partition:
    return Partition.from_json(json.loads(pathlib.Path(path).read_text("utf-8")))
