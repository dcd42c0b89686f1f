"""Module contains Enums that will be used as resource arguments."""
from enum import Enum, IntEnum


class MeshFormat(Enum):
    """Coarse mesh text formats."""

    single_block = "single-block"
    node_ele = "node-ele"


class InteriorRule(Enum):
    """Choice of the interior point of each macro-triangle."""

    incenter = "incenter"
    barycenter = "barycenter"


class BoundaryRule(Enum):
    """Choice of the split point on boundary macro-edges."""

    midpoint = "midpoint"


class Family(Enum):
    """Local space families.

    The value is the tag used in reports and on the command line.
    """

    V0 = "V0"
    V1 = "V1"
    V2 = "V2"
    L0 = "L0"
    L1 = "L1"
    L2 = "L2"
    S0 = "S0"
    S1 = "S1"
    S2 = "S2"
    calV2 = "calV2"

    @property
    def ncomp(self) -> int:
        """int: Number of scalar components of members of the family."""
        return 2 if self in (Family.V1, Family.L1, Family.S1) else 1

    @property
    def form_degree(self) -> int:
        """int: Position of the family in the de Rham complex."""
        return int(self.value[-1])


class Operator(Enum):
    """Differential operators of the 2D complex."""

    rot = "rot"
    div = "div"


class Trace(Enum):
    """Quantities that can be restricted to a macro-edge."""

    value = "value"
    normal_component = "normal-component"
    tangential_component = "tangential-component"
    normal_derivative = "normal-derivative"
    divergence = "divergence"


class Region(Enum):
    """Integration regions."""

    subtriangle = "subtriangle"
    macro = "macro"
    edge_half = "edge-half"


class DofKind(Enum):
    """Kinds of degree of freedom functionals."""

    value = "point-value"
    gradient = "point-gradient"
    tangential_derivative = "point-tangential-derivative"
    normal_component = "point-normal-component"
    divergence = "point-divergence"
    jump_value = "jump-of-value"
    jump_divergence = "jump-of-divergence"
    flux = "edge-flux"
    edge_moment = "edge-moment"
    normal_derivative_moment = "normal-derivative-moment"
    divergence_moment = "divergence-moment"
    interior_moment = "interior-moment"
    total_integral = "total-integral"
    theta = "theta"


class Pairing(Enum):
    """Pairings used by interior moment functionals."""

    identity = "identity"
    rot_rot = "rot-rot"
    div_scalar = "div-scalar"


class Chain(Enum):
    """Projections induced by the local degrees of freedom.

    The global projections apply the local ones macro by macro, so the
    same members name them as well.
    """

    Pi0 = "Pi0"
    Pi1 = "Pi1"
    Pi2 = "Pi2"
    varpi1 = "varpi1"
    varpi2 = "varpi2"

    @property
    def family(self) -> Family:
        """Family: Target family of the projection."""
        return {
            Chain.Pi0: Family.S0,
            Chain.Pi1: Family.L1,
            Chain.Pi2: Family.V2,
            Chain.varpi1: Family.S1,
            Chain.varpi2: Family.L2,
        }[self]

    @property
    def shift(self) -> int:
        """int: Degree drop relative to the chain degree r."""
        return self.family.form_degree


class LocalSequence(Enum):
    """Sequences on one macro-triangle."""

    lvv = "L0-V1-V2"
    slv = "S0-L1-V2"
    ssl = "S0-S1-L2"
    ring_lvv = "ring-L0-V1-V2"
    ring_slv = "ring-S0-L1-calV2"
    ring_ssl = "ring-S0-S1-L2"
    ring_slv_v2 = "ring-S0-L1-V2"


class GlobalSequence(Enum):
    """Global sequences; also the Stokes pairs they induce."""

    SLV = "SLV"
    SSL = "SSL"


class PressureSpace(IntEnum):
    """Pressure space used by the SLV Stokes pair."""

    conforming = 0
    broken = 1


class Backend(Enum):
    """Divergence preimage backends."""

    constructive = "constructive"
    algebraic = "algebraic"


class Diagram(Enum):
    """Commuting diagrams."""

    lagrange = "thm1"
    smooth = "thm2"


class ErrorType(Enum):
    """Non-Application Error types."""

    error = "ERROR"
    warning = "WARNING"
    info = "INFO"


class EdgeVariant(Enum):
    """Degree of freedom sets of the C1 splines on one split edge."""

    edge1 = "edge1"
    edge2 = "edge2"
