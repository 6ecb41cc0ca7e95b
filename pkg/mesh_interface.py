"""
Uniform interface-aligned meshes on (0, 1) and P1 hat bookkeeping
The interface b = p/q always sits exactly on node M.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from config import Config
from errors import CapacityError, ConfigurationError, DomainError
from utils import parse_rational


@dataclass(frozen=True)
class RationalInterface:
    """b = p/q in lowest terms with 0 < p < q"""
    p: int
    q: int

    def __post_init__(self):
        if not (0 < self.p < self.q):
            raise DomainError(f"interface {self.p}/{self.q} is not inside (0, 1)")
        if Fraction(self.p, self.q).denominator != self.q:
            raise ConfigurationError(f"interface {self.p}/{self.q} is not in lowest terms")

    @classmethod
    def parse(cls, text) -> "RationalInterface":
        value = parse_rational(text)
        return cls(value.numerator, value.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def value(self) -> float:
        return self.p / self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class InterfaceMesh:
    n_cells: int
    m_interface: int
    interface: RationalInterface
    level: int

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def b(self) -> float:
        return self.interface.value

    @property
    def n_interior(self) -> int:
        """N_h: number of interior nodes"""
        return self.n_cells - 1

    @cached_property
    def nodes(self) -> np.ndarray:
        """x_i = i h for i = 0..n_cells (x_0 = 0, x_{n_cells} = 1)"""
        x = np.arange(self.n_cells + 1, dtype=float) / self.n_cells
        x.setflags(write=False)
        return x

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def interface_slot(self) -> int:
        """0-based position of node M in interior-node vectors"""
        return self.m_interface - 1

    def node(self, i: int) -> float:
        return i / self.n_cells

    def subdomain_slots(self, k: int) -> np.ndarray:
        """0-based interior-vector positions of the interior nodes of I_k"""
        if k == 1:
            return np.arange(0, self.m_interface - 1)
        if k == 2:
            return np.arange(self.m_interface, self.n_interior)
        raise ConfigurationError(f"subdomain index must be 1 or 2, got {k}")

    def describe(self) -> str:
        return f"b={self.interface} level={self.level} cells={self.n_cells} h={self.h:.3g} M={self.m_interface}"


def build_mesh(b, refinement: int) -> InterfaceMesh:
    """n_cells = q 2^k, M = p 2^k"""
    if not isinstance(b, RationalInterface):
        b = RationalInterface.parse(b)
    if refinement < 0:
        raise DomainError(f"refinement level must be >= 0, got {refinement}")
    n_cells = b.q * 2 ** refinement
    if n_cells > Config.MAX_CELLS:
        raise CapacityError(f"{n_cells} cells exceed the configured maximum {Config.MAX_CELLS}")
    return InterfaceMesh(n_cells=n_cells, m_interface=b.p * 2 ** refinement,
                         interface=b, level=refinement)


def hat_value(mesh: InterfaceMesh, i: int, x):
    """phi_i(x) = max(0, 1 - |x - x_i|/h)"""
    if not (1 <= i <= mesh.n_interior):
        raise DomainError(f"node index {i} is not interior (1..{mesh.n_interior})")
    xx = np.asarray(x, dtype=float)
    val = np.maximum(0.0, 1.0 - np.abs(xx * mesh.n_cells - i))
    return float(val) if val.ndim == 0 else val


def check_alignment(mesh: InterfaceMesh, b) -> None:
    """Raise ConfigurationError unless b is exactly node M of the mesh"""
    fb = parse_rational(b)
    if Fraction(mesh.m_interface, mesh.n_cells) != fb:
        raise ConfigurationError(f"interface {b} is not node M of mesh {mesh.describe()}")


def nearest_representable_b(value: float, max_denominator: int = 64) -> RationalInterface:
    """Closest p/q to a requested decimal interface, for building aligned meshes"""
    if not (0.0 < value < 1.0):
        raise DomainError(f"interface {value} is not inside (0, 1)")
    frac = Fraction(value).limit_denominator(max_denominator)
    if frac <= 0 or frac >= 1:
        frac = Fraction(1, max_denominator) if frac <= 0 else Fraction(max_denominator - 1, max_denominator)
    return RationalInterface(frac.numerator, frac.denominator)
