from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional


class SurfaceKind(Enum):
    """The surface catalog. See geometry.surfaces.make_surface for the Weierstrass data of each entry."""

    Plane = 0
    Enneper = 1
    Catenoid = 2
    Helicoid = 3
    GenericWeierstrass = 4


@dataclass
class SurfaceConfig:
    """One surface of a scenario. Fields left at None fall back to the catalog defaults of `kind`.

    Attributes
    ----------
    kind : SurfaceKind
        The catalog entry (GenericWeierstrass cannot be built from a config file, it needs callables)
    domain : Optional[str]
        Chart domain kind: "whole", "disk", "annulus", "rectangle" or "sector"
    radius : Optional[float]
        Disk radius
    r_in : Optional[float]
        Inner radius of an annulus or sector
    r_out : Optional[float]
        Outer radius of an annulus or sector
    u_min : Optional[float]
        Rectangle bounds on Re z
    u_max : Optional[float]
    v_min : Optional[float]
        Rectangle bounds on Im z
    v_max : Optional[float]
    arg_min : Optional[float]
        Sector bounds on arg z, within [-pi, pi]
    arg_max : Optional[float]
    boundary : bool
        Whether the chart edge is a true boundary of the surface; a motion reaching it stops with
        reason Boundary
    rotvec : List[float]
        Rotation vector (axis times angle, radians) applied to the immersion
    offset : List[float]
        Translation applied after the rotation
    """

    kind: SurfaceKind = SurfaceKind.Plane
    domain: Optional[str] = None
    radius: Optional[float] = None
    r_in: Optional[float] = None
    r_out: Optional[float] = None
    u_min: Optional[float] = None
    u_max: Optional[float] = None
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    arg_min: Optional[float] = None
    arg_max: Optional[float] = None
    boundary: bool = False
    rotvec: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    offset: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])


@dataclass
class StartsConfig:
    """Chart start points as [re, im] pairs.

    Attributes
    ----------
    x0 : List[float]
        Start of the motion on the first surface
    y0 : List[float]
        Start of the motion on the second surface (coupled scenarios only)
    """

    x0: List[float] = field(default_factory=lambda: [0.0, 0.0])
    y0: List[float] = field(default_factory=lambda: [1.0, 0.0])
