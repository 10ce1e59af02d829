from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

from sinr_ldp.errors import ConfigurationError

from .model import DomainConfig
from .utils import KernelKind, KernelMode, QuadratureScheme

if TYPE_CHECKING:
    from sinr_ldp.connectivity import Kernel
    from sinr_ldp.model.params import ModelParams


@dataclass(frozen=True, kw_only=True)
class QuadratureConfig:
    scheme: QuadratureScheme | None = None
    """Integration rule over 𝒟. Defaults to a midpoint grid for d ≤ 2, Monte Carlo otherwise."""

    resolution: int | None = None
    """Nodes per axis (grid) or sample count (Monte Carlo). Defaults to 2⁸ / 10⁵."""

    pair_resolution: int | None = None
    """The same for double integrals over 𝒟×𝒟. Defaults to 2⁵ / 2·10³."""

    seed: int = 0
    """Seed of the Monte Carlo nodes."""

    def __post_init__(self) -> None:
        for name in ("resolution", "pair_resolution"):
            value = getattr(self, name)
            if value is None or self.scheme is None:
                continue
            if self.scheme == QuadratureScheme.MIDPOINT_GRID and value < 2:
                raise ConfigurationError("need at least 2 nodes per axis", field=name)
            if self.scheme == QuadratureScheme.MONTE_CARLO and value < 1000:
                raise ConfigurationError("need at least 10³ samples", field=name)

    def resolve(self, dimension: int) -> "QuadratureConfig":
        """Fill in the dimension-dependent defaults."""
        scheme = self.scheme
        if scheme is None:
            scheme = (
                QuadratureScheme.MIDPOINT_GRID
                if dimension <= 2
                else QuadratureScheme.MONTE_CARLO
            )
        grid = scheme == QuadratureScheme.MIDPOINT_GRID
        return QuadratureConfig(
            scheme=scheme,
            resolution=self.resolution or (2**8 if grid else 10**5),
            pair_resolution=self.pair_resolution or (2**5 if grid else 2 * 10**3),
            seed=self.seed,
        )

    def nodes(
        self, domain: DomainConfig, pair: bool = False
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Nodes in 𝒟 and Lebesgue weights summing to the volume of 𝒟."""
        quad = self.resolve(domain.dimension)
        resolution = quad.pair_resolution if pair else quad.resolution
        assert resolution is not None
        if quad.scheme == QuadratureScheme.MIDPOINT_GRID:
            axes = [
                lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
                for lo, hi in zip(domain.low, domain.high)
            ]
            mesh = np.meshgrid(*axes, indexing="ij")
            nodes = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        else:
            rng = np.random.default_rng(quad.seed)
            nodes = rng.uniform(
                domain.low, domain.high, size=(resolution, domain.dimension)
            )
        weights = np.full(nodes.shape[0], domain.volume / nodes.shape[0])
        return nodes, weights


@dataclass(frozen=True, kw_only=True)
class KernelConfig:
    mode: KernelMode = KernelMode.SYNTHETIC
    """`SYNTHETIC` sets Q = min(1, a_λ q) with a known limit q, `INTEGRAL` uses Q = e^{-λ q_λ^𝒟}."""

    kappa: float = 1.0
    """Height κ of the synthetic limit kernel q(x, y) = κ e^{-θ‖x-y‖}."""

    theta: float = 1.0
    """Decay θ of the synthetic limit kernel. θ = 0 gives a constant kernel."""

    def __post_init__(self) -> None:
        if not self.kappa >= 0:
            raise ConfigurationError("must be nonnegative", field="kappa")
        if not self.theta >= 0:
            raise ConfigurationError("must be nonnegative", field="theta")

    def spawn(
        self,
        params: "ModelParams",
        kind: KernelKind = KernelKind.Q_LAMBDA,
        quad: QuadratureConfig | None = None,
    ) -> "Kernel":
        from sinr_ldp.connectivity import build_kernel

        return build_kernel(self, params, kind, quad or QuadratureConfig())
