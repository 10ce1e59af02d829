import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from sinr_ldp.errors import ConfigurationError

from .model import DomainConfig

if TYPE_CHECKING:
    from sinr_ldp.empirical import Partition


@dataclass(frozen=True, kw_only=True)
class PartitionConfig:
    domain_res: tuple[int, ...] = (1,)
    """Cells per axis. A single entry is used for every axis."""

    power_res: int = 1
    """Number of equal-width power bins on (0, eta_cap]."""

    eta_cap: float = math.inf
    """Upper edge of the regular power bins. Finite caps add an overflow bin (eta_cap, ∞)."""

    def __post_init__(self) -> None:
        if len(self.domain_res) < 1 or any(r < 1 for r in self.domain_res):
            raise ConfigurationError("resolutions must be at least 1", field="domain_res")
        if self.power_res < 1:
            raise ConfigurationError("must be at least 1", field="power_res")
        if not self.eta_cap > 0:
            raise ConfigurationError("must be positive", field="eta_cap")
        if math.isinf(self.eta_cap) and self.power_res != 1:
            raise ConfigurationError(
                "an infinite cap allows a single power bin", field="power_res"
            )

    def spawn(self, domain: DomainConfig) -> "Partition":
        from sinr_ldp.empirical import make_partition

        return make_partition(domain, self.eta_cap, self.domain_res, self.power_res)
